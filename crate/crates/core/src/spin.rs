//! Bit-packed ±1 spin assignments.
//!
//! Bit `i` clear means spin `+1`, bit set means spin `-1`. This matches the
//! face-state encoding used by the vertex model, where spin `+1` maps to bit 0.

use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct SpinConfig {
    len: usize,
    words: Vec<u64>,
}

/// A Hopfield network state.
pub type NetworkState = SpinConfig;

impl SpinConfig {
    /// All spins `+1`.
    pub fn all_up(len: usize) -> Self {
        Self { len, words: vec![0; len.div_ceil(64)] }
    }

    pub fn all_down(len: usize) -> Self {
        let mut s = Self::all_up(len);
        for i in 0..len {
            s.set(i, -1);
        }
        s
    }

    /// Independent uniform spins.
    pub fn random<R: rand::Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut s = Self::all_up(len);
        for i in 0..len {
            if rng.gen::<bool>() {
                s.set(i, -1);
            }
        }
        s
    }

    /// Builds from the low `len` bits of `bits` (`len <= 64`).
    pub fn from_bits(len: usize, bits: u64) -> Self {
        assert!(len <= 64, "from_bits supports at most 64 spins");
        let mask = if len == 64 { u64::MAX } else { (1u64 << len) - 1 };
        let mut s = Self::all_up(len);
        if len > 0 {
            s.words[0] = bits & mask;
        }
        s
    }

    /// The low 64 bits of the packed representation.
    pub fn low_bits(&self) -> u64 {
        self.words.first().copied().unwrap_or(0)
    }

    /// Returns `None` if any entry is not ±1.
    pub fn from_signs(signs: &[i8]) -> Option<Self> {
        let mut s = Self::all_up(signs.len());
        for (i, &v) in signs.iter().enumerate() {
            match v {
                1 => {}
                -1 => s.set(i, -1),
                _ => return None,
            }
        }
        Some(s)
    }

    pub fn to_signs(&self) -> Vec<i8> {
        (0..self.len).map(|i| self.get(i)).collect()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> i8 {
        debug_assert!(i < self.len);
        if (self.words[i / 64] >> (i % 64)) & 1 == 0 {
            1
        } else {
            -1
        }
    }

    #[inline]
    pub fn set(&mut self, i: usize, spin: i8) {
        debug_assert!(i < self.len);
        let bit = 1u64 << (i % 64);
        if spin >= 0 {
            self.words[i / 64] &= !bit;
        } else {
            self.words[i / 64] |= bit;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    /// Global spin reversal.
    pub fn negated(&self) -> Self {
        let mut s = self.clone();
        for i in 0..self.len {
            s.flip(i);
        }
        s
    }

    /// Number of `-1` spins.
    pub fn down_count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Concatenates several configurations (e.g. trajectory layers).
    pub fn concat<'a, I: IntoIterator<Item = &'a SpinConfig>>(parts: I) -> Self {
        let parts: Vec<&SpinConfig> = parts.into_iter().collect();
        let len = parts.iter().map(|p| p.len).sum();
        let mut out = Self::all_up(len);
        let mut offset = 0;
        for p in parts {
            for i in 0..p.len {
                out.set(offset + i, p.get(i));
            }
            offset += p.len;
        }
        out
    }

    /// Copy of spins `start..start + len`.
    pub fn slice(&self, start: usize, len: usize) -> Self {
        let mut out = Self::all_up(len);
        for i in 0..len {
            out.set(i, self.get(start + i));
        }
        out
    }
}

impl fmt::Debug for SpinConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SpinConfig[")?;
        for i in 0..self.len {
            f.write_str(if self.get(i) > 0 { "+" } else { "-" })?;
        }
        write!(f, "]")
    }
}

impl Serialize for SpinConfig {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_signs().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SpinConfig {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let signs = Vec::<i8>::deserialize(deserializer)?;
        SpinConfig::from_signs(&signs).ok_or_else(|| D::Error::custom("spins must be +1 or -1"))
    }
}
