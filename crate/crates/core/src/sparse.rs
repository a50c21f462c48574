//! Dictionary-of-keys operators on tensor products of 16-dimensional face spaces.
//!
//! A multi-index packs one 4-bit face state per slot, slot 1 in the most
//! significant nibble. Entries are kept sorted by `(out, in)`; duplicate
//! contributions are summed in ascending order of value, so results do not
//! depend on how the slots were labeled while computing them.

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::scalar::{canonical_sum, Scalar};

/// Dimension of one face space.
pub const FACE_DIM: u32 = 16;
const NIBBLE: u32 = 4;
/// Largest supported number of slots (24-bit multi-indices).
pub const MAX_ARITY: usize = 6;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SparseError {
    #[error("slot {slot} used twice")]
    SlotCollision { slot: usize },
    #[error("slot {slot} outside 1..={arity}")]
    SlotOutOfRange { slot: usize, arity: usize },
    #[error("operator acts on {expected} slots, got {actual} slot labels")]
    ArityMismatch { expected: usize, actual: usize },
}

/// Face state stored in `slot` (1-based) of a multi-index over `arity` slots.
#[inline]
pub fn slot_value(index: u32, slot: usize, arity: usize) -> u32 {
    (index >> (NIBBLE * (arity - slot) as u32)) & 0xf
}

#[inline]
pub fn with_slot(index: u32, slot: usize, arity: usize, value: u32) -> u32 {
    let shift = NIBBLE * (arity - slot) as u32;
    (index & !(0xf << shift)) | (value << shift)
}

/// Packs face states, first element into slot 1.
pub fn pack(states: &[u32]) -> u32 {
    states.iter().fold(0, |acc, &s| (acc << NIBBLE) | s)
}

pub fn unpack(index: u32, arity: usize) -> Vec<u32> {
    (1..=arity).map(|s| slot_value(index, s, arity)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator<T> {
    arity: usize,
    entries: Vec<(u32, u32, T)>,
}

impl<T: Scalar> SparseOperator<T> {
    pub fn zero(arity: usize) -> Self {
        assert!(arity <= MAX_ARITY);
        Self { arity, entries: Vec::new() }
    }

    /// Sums duplicate `(out, in)` terms and drops zeros.
    pub fn from_terms(arity: usize, mut terms: Vec<(u32, u32, T)>) -> Self {
        assert!(arity <= MAX_ARITY);
        terms.sort_unstable_by(|a, b| {
            (a.0, a.1).cmp(&(b.0, b.1)).then(a.2.partial_cmp(&b.2).unwrap_or(std::cmp::Ordering::Equal))
        });
        let mut entries = Vec::with_capacity(terms.len());
        let mut run: Vec<T> = Vec::new();
        let mut i = 0;
        while i < terms.len() {
            let key = (terms[i].0, terms[i].1);
            run.clear();
            while i < terms.len() && (terms[i].0, terms[i].1) == key {
                run.push(terms[i].2);
                i += 1;
            }
            let v = if run.len() == 1 { run[0] } else { canonical_sum(&mut run) };
            if v != T::zero() {
                entries.push((key.0, key.1, v));
            }
        }
        Self { arity, entries }
    }

    pub fn identity(arity: usize) -> Self {
        let dim = FACE_DIM.pow(arity as u32);
        Self { arity, entries: (0..dim).map(|i| (i, i, T::one())).collect() }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(u32, u32, T)] {
        &self.entries
    }

    pub fn get(&self, out: u32, inp: u32) -> T {
        self.entries
            .binary_search_by(|e| (e.0, e.1).cmp(&(out, inp)))
            .map(|k| self.entries[k].2)
            .unwrap_or_else(|_| T::zero())
    }

    pub fn max_abs(&self) -> T {
        self.entries.iter().map(|e| e.2.abs()).fold(T::zero(), T::max)
    }

    pub fn scaled(&self, s: T) -> Self {
        Self::from_terms(self.arity, self.entries.iter().map(|&(o, i, w)| (o, i, w * s)).collect())
    }

    /// Columns grouped by input index.
    fn by_input(&self) -> HashMap<u32, Vec<(u32, T)>> {
        let mut m: HashMap<u32, Vec<(u32, T)>> = HashMap::new();
        for &(o, i, w) in &self.entries {
            m.entry(i).or_default().push((o, w));
        }
        m
    }

    /// Tensor with the identity on the remaining slots of an `arena`-slot
    /// space. Local slot `k` is placed at global slot `slots[k]` (1-based).
    pub fn embed(&self, slots: &[usize], arena: usize) -> Result<Self, SparseError> {
        let all: Vec<u32> = (0..FACE_DIM).collect();
        self.embed_with_fill(slots, arena, &all)
    }

    /// Like [`embed`](Self::embed), but the identity on the other slots only
    /// runs over the face states in `fill`.
    pub fn embed_with_fill(&self, slots: &[usize], arena: usize, fill: &[u32]) -> Result<Self, SparseError> {
        check_slots(slots, self.arity, arena)?;
        let others: Vec<usize> = (1..=arena).filter(|s| !slots.contains(s)).collect();
        let rest = (fill.len() as u32).pow(others.len() as u32);
        let mut terms = Vec::with_capacity(self.entries.len() * rest as usize);
        for &(o, i, w) in &self.entries {
            let (mut go, mut gi) = (0u32, 0u32);
            for (k, &s) in slots.iter().enumerate() {
                go = with_slot(go, s, arena, slot_value(o, k + 1, self.arity));
                gi = with_slot(gi, s, arena, slot_value(i, k + 1, self.arity));
            }
            for r in 0..rest {
                let (mut ro, mut ri) = (go, gi);
                let mut digits = r;
                for &s in others.iter().rev() {
                    let v = fill[(digits % fill.len() as u32) as usize];
                    digits /= fill.len() as u32;
                    ro = with_slot(ro, s, arena, v);
                    ri = with_slot(ri, s, arena, v);
                }
                terms.push((ro, ri, w));
            }
        }
        Ok(Self::from_terms(arena, terms))
    }

    /// `self · rhs` (`rhs` applied first).
    pub fn compose(&self, rhs: &Self) -> Self {
        assert_eq!(self.arity, rhs.arity, "compose needs a common arena");
        let cols = self.by_input();
        let mut terms = Vec::new();
        for &(m, i, wb) in &rhs.entries {
            if let Some(col) = cols.get(&m) {
                for &(o, wa) in col {
                    terms.push((o, i, wa * wb));
                }
            }
        }
        Self::from_terms(self.arity, terms)
    }

    /// `embed(local, slots) · self` without materializing the embedding.
    pub fn left_multiply(&self, local: &Self, slots: &[usize]) -> Result<Self, SparseError> {
        check_slots(slots, local.arity, self.arity)?;
        let cols = local.by_input();
        let mut terms = Vec::new();
        for &(m, i, wm) in &self.entries {
            let key = slots.iter().fold(0u32, |acc, &s| (acc << NIBBLE) | slot_value(m, s, self.arity));
            if let Some(col) = cols.get(&key) {
                for &(lo, lw) in col {
                    let mut o = m;
                    for (k, &s) in slots.iter().enumerate() {
                        o = with_slot(o, s, self.arity, slot_value(lo, k + 1, local.arity));
                    }
                    terms.push((o, i, lw * wm));
                }
            }
        }
        Ok(Self::from_terms(self.arity, terms))
    }

    /// Applies a permutation of face states to every slot of both indices:
    /// `B[p(o) | p(i)] = A[o | i]`. For an involution `p` this is conjugation.
    pub fn map_face_states(&self, perm: &[u32; 16]) -> Self {
        let map = |idx: u32| -> u32 {
            (1..=self.arity)
                .fold(idx, |acc, s| with_slot(acc, s, self.arity, perm[slot_value(idx, s, self.arity) as usize]))
        };
        Self::from_terms(self.arity, self.entries.iter().map(|&(o, i, w)| (map(o), map(i), w)).collect())
    }

    /// Moves the content of slot `s` to slot `target[s − 1]`.
    pub fn permute_slots(&self, target: &[usize]) -> Result<Self, SparseError> {
        check_slots(target, self.arity, self.arity)?;
        let map = |idx: u32| -> u32 {
            (1..=self.arity).fold(0, |acc, s| with_slot(acc, target[s - 1], self.arity, slot_value(idx, s, self.arity)))
        };
        Ok(Self::from_terms(self.arity, self.entries.iter().map(|&(o, i, w)| (map(o), map(i), w)).collect()))
    }

    /// `max |a − b|` over the union of supports.
    pub fn compare(&self, other: &Self) -> T {
        let (a, b) = (&self.entries, &other.entries);
        let (mut i, mut j) = (0, 0);
        let mut worst = T::zero();
        while i < a.len() || j < b.len() {
            let ka = a.get(i).map(|e| (e.0, e.1));
            let kb = b.get(j).map(|e| (e.0, e.1));
            let d = match (ka, kb) {
                (Some(x), Some(y)) if x == y => {
                    let d = (a[i].2 - b[j].2).abs();
                    i += 1;
                    j += 1;
                    d
                }
                (Some(x), Some(y)) if x < y => {
                    i += 1;
                    a[i - 1].2.abs()
                }
                (Some(_), None) => {
                    i += 1;
                    a[i - 1].2.abs()
                }
                _ => {
                    j += 1;
                    b[j - 1].2.abs()
                }
            };
            worst = worst.max(d);
        }
        worst
    }

    /// `(out_index, in_index, weight)` rows for dumping.
    pub fn to_triples(&self) -> Vec<OperatorEntry> {
        self.entries
            .iter()
            .map(|&(o, i, w)| OperatorEntry { out_index: o, in_index: i, weight: w.to_f64_lossy() })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OperatorEntry {
    pub out_index: u32,
    pub in_index: u32,
    pub weight: f64,
}

fn check_slots(slots: &[usize], arity: usize, arena: usize) -> Result<(), SparseError> {
    if slots.len() != arity {
        return Err(SparseError::ArityMismatch { expected: arity, actual: slots.len() });
    }
    for (k, &s) in slots.iter().enumerate() {
        if s == 0 || s > arena {
            return Err(SparseError::SlotOutOfRange { slot: s, arity: arena });
        }
        if slots[..k].contains(&s) {
            return Err(SparseError::SlotCollision { slot: s });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_op(arity: usize, n: usize, seed: u64) -> SparseOperator<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = FACE_DIM.pow(arity as u32);
        SparseOperator::from_terms(
            arity,
            (0..n).map(|_| (rng.gen_range(0..dim), rng.gen_range(0..dim), rng.gen_range(0.5..2.0))).collect(),
        )
    }

    #[test]
    fn pack_roundtrip() {
        let idx = pack(&[1, 2, 3, 4, 5, 6]);
        assert_eq!(idx, 0x123456);
        assert_eq!(unpack(idx, 6), vec![1, 2, 3, 4, 5, 6]);
        assert_eq!(slot_value(idx, 6, 6), 6);
        assert_eq!(with_slot(idx, 1, 6, 0xf), 0xf23456);
    }

    #[test]
    fn identity_is_neutral() {
        let a = random_op(2, 60, 1);
        let id = SparseOperator::identity(2);
        assert_eq!(a.compose(&id), a);
        assert_eq!(id.compose(&a), a);
        assert_eq!(a.compare(&a), 0.0);
    }

    #[test]
    fn embed_identity_is_identity() {
        let id1 = SparseOperator::<f64>::identity(1);
        assert_eq!(id1.embed(&[2], 3).unwrap(), SparseOperator::identity(3));
    }

    #[test]
    fn embed_multiplies_support() {
        let a = random_op(1, 10, 2);
        assert_eq!(a.embed(&[3], 3).unwrap().nnz(), a.nnz() * 256);
    }

    #[test]
    fn restricted_fill_is_a_subset() {
        let a = random_op(1, 10, 2);
        let full = a.embed(&[2], 3).unwrap();
        let part = a.embed_with_fill(&[2], 3, &[0, 3]).unwrap();
        assert_eq!(part.nnz(), a.nnz() * 4);
        assert!(part.entries().iter().all(|&(o, i, w)| full.get(o, i) == w));
    }

    #[test]
    fn embed_errors() {
        let a = random_op(2, 5, 3);
        assert_eq!(a.embed(&[1, 1], 3), Err(SparseError::SlotCollision { slot: 1 }));
        assert_eq!(a.embed(&[1, 4], 3), Err(SparseError::SlotOutOfRange { slot: 4, arity: 3 }));
        assert!(a.embed(&[1], 3).is_err());
    }

    #[test]
    fn left_multiply_matches_materialized_product() {
        let local = random_op(2, 40, 4);
        let m = random_op(3, 300, 5);
        let fast = m.left_multiply(&local, &[3, 1]).unwrap();
        let slow = local.embed(&[3, 1], 3).unwrap().compose(&m);
        assert!(fast.compare(&slow) < 1e-12);
    }

    #[test]
    fn embed_then_permute_equals_direct_embed() {
        let local = random_op(2, 30, 6);
        let a = local.embed(&[1, 2], 3).unwrap().permute_slots(&[3, 2, 1]).unwrap();
        let b = local.embed(&[3, 2], 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn compare_covers_union() {
        let a = SparseOperator::from_terms(1, vec![(1, 1, 2.0)]);
        let b = SparseOperator::from_terms(1, vec![(2, 2, 3.0)]);
        assert_eq!(a.compare(&b), 3.0);
        assert_eq!(b.compare(&a), 3.0);
    }

    #[test]
    fn duplicate_terms_sum_and_zeros_drop() {
        let a = SparseOperator::from_terms(1, vec![(1, 1, 2.0), (1, 1, -2.0), (0, 3, 1.0), (0, 3, 0.5)]);
        assert_eq!(a.nnz(), 1);
        assert_eq!(a.get(0, 3), 1.5);
        assert_eq!(a.get(1, 1), 0.0);
    }

    #[test]
    fn compose_is_associative() {
        let (a, b, c) = (random_op(2, 80, 7), random_op(2, 80, 8), random_op(2, 80, 9));
        let l = a.compose(&b).compose(&c);
        let r = a.compose(&b.compose(&c));
        assert!(l.compare(&r) <= 1e-12 * l.max_abs().max(1.0));
    }
}
