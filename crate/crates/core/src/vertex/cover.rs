//! Exact covers of a periodic cubic lattice by edge triples chosen per cube.
//!
//! Every elementary cube of an `L × L × L` torus is identified by its lowest
//! corner. A [`CoverAssignment`] picks three local edges for each cube,
//! periodically in each axis. When every lattice bond is picked by exactly one
//! cube, the product of cube weights `exp(t·Σ_triple s_e)` over all cubes is
//! the Ising weight `exp(t·H)` configuration by configuration.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hypercube::{EdgeChoiceTables, SubfaceCode, Symbol};
use crate::ising::{gray_code_histogram, partition_from_histogram, Boundary, CubicLattice, MAX_EXHAUSTIVE_SPINS};
use crate::scalar::Scalar;
use crate::spin::SpinConfig;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoverError {
    #[error("covers need periodic boundaries on every axis")]
    NotPeriodic,
    #[error("period {period} does not divide side {side} on axis {axis}")]
    PeriodMismatch { axis: usize, period: usize, side: usize },
    #[error("expected {expected} cube triples, got {actual}")]
    WrongTripleCount { expected: usize, actual: usize },
    #[error("{0} is not an edge of the 3-cube")]
    NotAnEdge(SubfaceCode),
    #[error("bond at {vertex:?} along axis {axis} is not covered")]
    Uncovered { vertex: [usize; 3], axis: usize },
    #[error("bond at {vertex:?} along axis {axis} is covered {count} times")]
    Overcovered { vertex: [usize; 3], axis: usize, count: usize },
    #[error("{0} spins exceed the exhaustive limit")]
    TooLarge(usize),
}

/// Periodic choice of one edge triple per cube.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverAssignment {
    pub period: [usize; 3],
    /// Indexed by `(x mod px) + px·((y mod py) + py·(z mod pz))`.
    pub triples: Vec<[SubfaceCode; 3]>,
}

impl CoverAssignment {
    pub fn uniform(triple: [SubfaceCode; 3]) -> Self {
        Self { period: [1, 1, 1], triples: vec![triple] }
    }

    pub fn triple_at(&self, c: [usize; 3]) -> &[SubfaceCode; 3] {
        let [px, py, pz] = self.period;
        &self.triples[c[0] % px + px * (c[1] % py + py * (c[2] % pz))]
    }

    fn validate(&self, lat: &CubicLattice) -> Result<(), CoverError> {
        if lat.boundary.iter().any(|&b| b != Boundary::Periodic) {
            return Err(CoverError::NotPeriodic);
        }
        for axis in 0..3 {
            let (period, side) = (self.period[axis], lat.dims[axis]);
            if period == 0 || side % period != 0 {
                return Err(CoverError::PeriodMismatch { axis, period, side });
            }
        }
        let expected = self.period.iter().product();
        if self.triples.len() != expected {
            return Err(CoverError::WrongTripleCount { expected, actual: self.triples.len() });
        }
        for e in self.triples.iter().flatten() {
            if e.len() != 3 || e.dimension() != 1 {
                return Err(CoverError::NotAnEdge(*e));
            }
        }
        Ok(())
    }
}

/// Lattice bond `(base vertex, axis)` of local edge `e` in the cube at `corner`.
fn bond_of(lat: &CubicLattice, corner: [usize; 3], e: &SubfaceCode) -> (usize, usize) {
    let mut c = corner;
    let mut axis = 0;
    for (k, ck) in c.iter_mut().enumerate() {
        match e.symbol(k) {
            Symbol::Star => axis = k,
            Symbol::One => *ck = (*ck + 1) % lat.dims[k],
            Symbol::Zero => {}
        }
    }
    (lat.index(c[0], c[1], c[2]), axis)
}

fn corners(lat: &CubicLattice) -> impl Iterator<Item = [usize; 3]> + '_ {
    (0..lat.num_vertices()).map(|v| lat.coords(v))
}

fn coverage(lat: &CubicLattice, a: &CoverAssignment) -> Vec<usize> {
    let mut counts = vec![0usize; lat.num_vertices() * 3];
    for c in corners(lat) {
        for e in a.triple_at(c) {
            let (v, axis) = bond_of(lat, c, e);
            counts[3 * v + axis] += 1;
        }
    }
    counts
}

/// Checks that every bond is chosen by exactly one cube.
pub fn cover_check(lat: &CubicLattice, a: &CoverAssignment) -> Result<(), CoverError> {
    a.validate(lat)?;
    for (k, &count) in coverage(lat, a).iter().enumerate() {
        let (vertex, axis) = (lat.coords(k / 3), k % 3);
        match count {
            1 => {}
            0 => return Err(CoverError::Uncovered { vertex, axis }),
            _ => return Err(CoverError::Overcovered { vertex, axis, count }),
        }
    }
    Ok(())
}

/// `Σ_cubes Σ_triple σ_a σ_b`.
pub fn cover_energy(lat: &CubicLattice, a: &CoverAssignment, sigma: &SpinConfig) -> Result<i64, CoverError> {
    a.validate(lat)?;
    let mut total = 0i64;
    for c in corners(lat) {
        for e in a.triple_at(c) {
            let (v, axis) = bond_of(lat, c, e);
            let w = lat.step(v, axis, true).expect("periodic");
            total += (sigma.get(v) * sigma.get(w)) as i64;
        }
    }
    Ok(total)
}

/// Product over cubes of `exp(t·Σ_triple s_e)` for one configuration.
pub fn cover_weight<T: Scalar>(
    lat: &CubicLattice,
    a: &CoverAssignment,
    t: T,
    sigma: &SpinConfig,
) -> Result<T, CoverError> {
    a.validate(lat)?;
    let mut w = T::one();
    for c in corners(lat) {
        let s: i64 = a
            .triple_at(c)
            .iter()
            .map(|e| {
                let (v, axis) = bond_of(lat, c, e);
                (sigma.get(v) * sigma.get(lat.step(v, axis, true).expect("periodic"))) as i64
            })
            .sum();
        w = w * (t * T::of_int(s)).exp();
    }
    Ok(w)
}

/// Histogram of `Σ_cubes Σ_triple s_e` over all configurations.
pub fn cover_histogram(lat: &CubicLattice, a: &CoverAssignment) -> Result<BTreeMap<i64, u64>, CoverError> {
    cover_check(lat, a)?;
    let n = lat.num_vertices();
    if n > MAX_EXHAUSTIVE_SPINS {
        return Err(CoverError::TooLarge(n));
    }
    let mut incidence = vec![Vec::new(); n];
    for c in corners(lat) {
        for e in a.triple_at(c) {
            let (v, axis) = bond_of(lat, c, e);
            let w = lat.step(v, axis, true).expect("periodic");
            incidence[v].push(w);
            incidence[w].push(v);
        }
    }
    Ok(gray_code_histogram(&incidence))
}

/// `Σ_σ Π_cubes exp(t·Σ_triple s_e)`, enumerated over the bonds the cover picks.
pub fn realize_partition<T: Scalar>(lat: &CubicLattice, t: T, a: &CoverAssignment) -> Result<T, CoverError> {
    Ok(partition_from_histogram(&cover_histogram(lat, a)?, t))
}

/// Axis permutation followed by reflections of the 3-cube.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CubeSymmetry {
    pub perm: [usize; 3],
    pub flip: [bool; 3],
}

impl CubeSymmetry {
    pub fn apply(&self, c: &SubfaceCode) -> SubfaceCode {
        let mut syms = [Symbol::Star; 3];
        for j in 0..3 {
            syms[self.perm[j]] = match (c.symbol(j), self.flip[j]) {
                (Symbol::Zero, true) => Symbol::One,
                (Symbol::One, true) => Symbol::Zero,
                (s, _) => s,
            };
        }
        SubfaceCode::from_symbols(&syms).expect("length 3")
    }
}

/// All 48 symmetries of the 3-cube.
pub fn cube_symmetries() -> Vec<CubeSymmetry> {
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut out = Vec::with_capacity(48);
    for perm in perms {
        for f in 0..8u8 {
            out.push(CubeSymmetry { perm, flip: [f & 1 != 0, f & 2 != 0, f & 4 != 0] });
        }
    }
    out
}

/// Localized table columns first, then their images under the cube
/// symmetries, without repeats (triples compared as sets).
pub fn table_candidates(tables: &EdgeChoiceTables) -> Vec<[SubfaceCode; 3]> {
    let mut out: Vec<[SubfaceCode; 3]> = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    let mut push = |tri: [SubfaceCode; 3], out: &mut Vec<[SubfaceCode; 3]>| {
        let mut key = tri;
        key.sort();
        if seen.insert(key) {
            out.push(tri);
        }
    };
    let columns: Vec<[SubfaceCode; 3]> = tables
        .lte
        .iter()
        .chain(&tables.rte)
        .map(|(cube, es)| es.map(|e| e.localize(cube).expect("table edges lie in their cube")))
        .collect();
    for tri in &columns {
        push(*tri, &mut out);
    }
    for sym in cube_symmetries() {
        for tri in &columns {
            push(tri.map(|e| sym.apply(&e)), &mut out);
        }
    }
    out
}

/// Depth-first search for a periodic exact cover, trying uniform periods
/// `1..=max_period` that divide every side.
pub fn search_cover(lat: &CubicLattice, candidates: &[[SubfaceCode; 3]], max_period: usize) -> Option<CoverAssignment> {
    if lat.boundary.iter().any(|&b| b != Boundary::Periodic) {
        return None;
    }
    for p in 1..=max_period {
        if lat.dims.iter().any(|&d| d % p != 0) {
            continue;
        }
        let cells = p * p * p;
        let mut members: Vec<Vec<[usize; 3]>> = vec![Vec::new(); cells];
        for c in corners(lat) {
            members[c[0] % p + p * (c[1] % p + p * (c[2] % p))].push(c);
        }
        let bonds: Vec<Vec<Vec<usize>>> = members
            .iter()
            .map(|cubes| {
                candidates
                    .iter()
                    .map(|tri| {
                        cubes
                            .iter()
                            .flat_map(|&c| tri.iter().map(move |e| (c, e)))
                            .map(|(c, e)| {
                                let (v, axis) = bond_of(lat, c, e);
                                3 * v + axis
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let mut counts = vec![0u8; lat.num_vertices() * 3];
        let mut choice = vec![0usize; cells];
        if dfs(0, &bonds, &mut counts, &mut choice) {
            return Some(CoverAssignment { period: [p; 3], triples: choice.iter().map(|&k| candidates[k]).collect() });
        }
    }
    None
}

fn dfs(cell: usize, bonds: &[Vec<Vec<usize>>], counts: &mut [u8], choice: &mut [usize]) -> bool {
    if cell == bonds.len() {
        return counts.iter().all(|&c| c == 1);
    }
    for (k, bs) in bonds[cell].iter().enumerate() {
        if bs.iter().any(|&b| counts[b] > 0) {
            continue;
        }
        let mut ok = true;
        for &b in bs {
            counts[b] += 1;
            ok &= counts[b] == 1;
        }
        if ok {
            choice[cell] = k;
            if dfs(cell + 1, bonds, counts, choice) {
                return true;
            }
        }
        for &b in bs {
            counts[b] -= 1;
        }
    }
    false
}
