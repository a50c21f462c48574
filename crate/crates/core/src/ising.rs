//! Exact Ising machinery on small cubic lattices.
//!
//! Partition functions are brute-force sums. Enumeration walks the Gray code
//! so each step flips one spin, accumulating an integer energy histogram;
//! `Z(t)` is then `Σ_E count(E)·e^{tE}`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;
use crate::spin::SpinConfig;

/// Largest lattice summed exhaustively.
pub const MAX_EXHAUSTIVE_SPINS: usize = 27;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IsingError {
    #[error("lattice dimensions must be positive")]
    EmptyLattice,
    #[error("periodic axis {axis} has length {len}, need at least 3")]
    PeriodicTooSmall { axis: usize, len: usize },
    #[error("spin field has {actual} spins, lattice has {expected}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("{spins} spins exceeds exhaustive cap of {cap}")]
    TooLarge { spins: usize, cap: usize },
    #[error("diagonal Hamiltonian needs a lattice periodic in x, y and open in time")]
    NotTimeSlab,
    #[error("conditioning layer {layer} out of range for {layers} layers")]
    InvalidLayer { layer: usize, layers: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Periodic,
    Open,
}

/// Nearest-neighbor bond between `a` and `a + e_axis`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub axis: usize,
}

/// `Lx × Ly × Lz` lattice; vertex `(x, y, z)` has index `x + Lx·(y + Ly·z)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CubicLattice {
    pub dims: [usize; 3],
    pub boundary: [Boundary; 3],
}

impl CubicLattice {
    pub fn new(dims: [usize; 3], boundary: [Boundary; 3]) -> Result<Self, IsingError> {
        if dims.contains(&0) {
            return Err(IsingError::EmptyLattice);
        }
        for axis in 0..3 {
            if boundary[axis] == Boundary::Periodic && dims[axis] < 3 {
                return Err(IsingError::PeriodicTooSmall { axis, len: dims[axis] });
            }
        }
        Ok(Self { dims, boundary })
    }

    pub fn periodic(l: usize) -> Result<Self, IsingError> {
        Self::new([l; 3], [Boundary::Periodic; 3])
    }

    pub fn open(dims: [usize; 3]) -> Result<Self, IsingError> {
        Self::new(dims, [Boundary::Open; 3])
    }

    /// `side × side` spatial torus stacked over `layers` time slices.
    pub fn time_slab(side: usize, layers: usize) -> Result<Self, IsingError> {
        Self::new([side, side, layers], [Boundary::Periodic, Boundary::Periodic, Boundary::Open])
    }

    pub fn is_time_slab(&self) -> bool {
        self.boundary == [Boundary::Periodic, Boundary::Periodic, Boundary::Open]
    }

    pub fn num_vertices(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.dims[0] * (y + self.dims[1] * z)
    }

    pub fn coords(&self, i: usize) -> [usize; 3] {
        let [lx, ly, _] = self.dims;
        [i % lx, (i / lx) % ly, i / (lx * ly)]
    }

    /// Neighbor one step along `axis` in direction `+1` or `−1`, if it exists.
    pub fn step(&self, v: usize, axis: usize, forward: bool) -> Option<usize> {
        let mut c = self.coords(v);
        let l = self.dims[axis];
        match (forward, self.boundary[axis]) {
            (true, _) if c[axis] + 1 < l => c[axis] += 1,
            (true, Boundary::Periodic) => c[axis] = 0,
            (false, _) if c[axis] > 0 => c[axis] -= 1,
            (false, Boundary::Periodic) => c[axis] = l - 1,
            _ => return None,
        }
        Some(self.index(c[0], c[1], c[2]))
    }

    /// All bonds, ordered by base vertex then axis.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::new();
        for a in 0..self.num_vertices() {
            for axis in 0..3 {
                if let Some(b) = self.step(a, axis, true) {
                    out.push(Edge { a, b, axis });
                }
            }
        }
        out
    }

    /// Index into [`edges`](Self::edges) of the bond leaving `v` along `axis`.
    pub fn edge_index(&self, v: usize, axis: usize) -> Option<usize> {
        self.step(v, axis, true)?;
        let mut idx = 0;
        for a in 0..v {
            idx += (0..3).filter(|&ax| self.step(a, ax, true).is_some()).count();
        }
        idx += (0..axis).filter(|&ax| self.step(v, ax, true).is_some()).count();
        Some(idx)
    }

    /// Neighbor list of every vertex, one entry per incident bond.
    pub fn incidence(&self) -> Vec<Vec<usize>> {
        let mut inc = vec![Vec::new(); self.num_vertices()];
        for e in self.edges() {
            inc[e.a].push(e.b);
            inc[e.b].push(e.a);
        }
        inc
    }

    /// Elementary squares as four bond indices each.
    pub fn plaquettes(&self) -> Vec<[usize; 4]> {
        let edges = self.edges();
        let mut lookup = std::collections::HashMap::new();
        for (k, e) in edges.iter().enumerate() {
            lookup.insert((e.a, e.axis), k);
        }
        let mut out = Vec::new();
        for v in 0..self.num_vertices() {
            for a in 0..3 {
                for b in a + 1..3 {
                    let (Some(va), Some(vb)) = (self.step(v, a, true), self.step(v, b, true)) else {
                        continue;
                    };
                    out.push([lookup[&(v, a)], lookup[&(va, b)], lookup[&(vb, a)], lookup[&(v, b)]]);
                }
            }
        }
        out
    }

    fn check(&self, sigma: &SpinConfig) -> Result<(), IsingError> {
        if sigma.len() != self.num_vertices() {
            return Err(IsingError::DimensionMismatch { expected: self.num_vertices(), actual: sigma.len() });
        }
        Ok(())
    }

    fn check_exhaustive(&self) -> Result<(), IsingError> {
        let n = self.num_vertices();
        if n > MAX_EXHAUSTIVE_SPINS {
            return Err(IsingError::TooLarge { spins: n, cap: MAX_EXHAUSTIVE_SPINS });
        }
        Ok(())
    }

    /// In-neighbors `(x−1, y, t−1)`, `(x, y−1, t−1)`, `(x+1, y+1, t−1)` of a
    /// time-slab vertex with `t ≥ 1`; the images of the cubic stencil
    /// `(i−1,j,k)`, `(i,j−1,k)`, `(i,j,k−1)` under `(i,j,k) ↦ (i−k, j−k, i+j+k)`.
    pub fn in_neighbors(&self, v: usize) -> Option<[usize; 3]> {
        let [x, y, t] = self.coords(v);
        if t == 0 {
            return None;
        }
        let [lx, ly, _] = self.dims;
        Some([
            self.index((x + lx - 1) % lx, y, t - 1),
            self.index(x, (y + ly - 1) % ly, t - 1),
            self.index((x + 1) % lx, (y + 1) % ly, t - 1),
        ])
    }
}

/// `H(σ) = Σ_{⟨ij⟩} σ_i σ_j` over nearest-neighbor bonds.
pub fn hamiltonian_nn(lat: &CubicLattice, sigma: &SpinConfig) -> Result<i64, IsingError> {
    lat.check(sigma)?;
    Ok(lat.edges().iter().map(|e| (sigma.get(e.a) * sigma.get(e.b)) as i64).sum())
}

/// Energy histogram of `Σ_bonds σσ` over all `2^n` configurations, where
/// `incidence[v]` lists the other endpoint of every bond at `v`.
pub fn gray_code_histogram(incidence: &[Vec<usize>]) -> BTreeMap<i64, u64> {
    let n = incidence.len();
    assert!(n < 64, "too many spins for u64 enumeration");
    let bonds: i64 = incidence.iter().map(|l| l.len() as i64).sum::<i64>() / 2;
    let offset = bonds;
    let chunk_bits = n.min(6);
    let chunk_len: u64 = 1 << (n - chunk_bits);
    let partials: Vec<Vec<u64>> = (0..1u64 << chunk_bits)
        .into_par_iter()
        .map(|c| {
            let mut hist = vec![0u64; (2 * bonds + 1) as usize];
            let start = c * chunk_len;
            let mut state = start ^ (start >> 1);
            let spin = |s: u64, v: usize| 1 - 2 * ((s >> v & 1) as i64);
            let mut energy: i64 = 0;
            for (v, nbrs) in incidence.iter().enumerate() {
                for &u in nbrs {
                    energy += spin(state, v) * spin(state, u);
                }
            }
            energy /= 2;
            hist[(energy + offset) as usize] += 1;
            for k in start + 1..start + chunk_len {
                let v = k.trailing_zeros() as usize;
                let local: i64 = incidence[v].iter().map(|&u| spin(state, u)).sum();
                energy -= 2 * spin(state, v) * local;
                state ^= 1 << v;
                hist[(energy + offset) as usize] += 1;
            }
            hist
        })
        .collect();
    let mut out = BTreeMap::new();
    for h in partials {
        for (k, c) in h.into_iter().enumerate() {
            if c > 0 {
                *out.entry(k as i64 - offset).or_insert(0) += c;
            }
        }
    }
    out
}

/// Number of configurations at each value of `H`.
pub fn energy_histogram(lat: &CubicLattice) -> Result<BTreeMap<i64, u64>, IsingError> {
    lat.check_exhaustive()?;
    Ok(gray_code_histogram(&lat.incidence()))
}

/// `Σ_E count(E)·e^{tE}`.
pub fn partition_from_histogram<T: Scalar>(hist: &BTreeMap<i64, u64>, t: T) -> T {
    hist.iter().map(|(&e, &c)| T::of(c as f64) * (t * T::of_int(e)).exp()).sum()
}

/// `Z(t) = Σ_σ exp(t·H(σ))`, exhaustive.
pub fn partition_function<T: Scalar>(lat: &CubicLattice, t: T) -> Result<T, IsingError> {
    Ok(partition_from_histogram(&energy_histogram(lat)?, t))
}

/// `exp(t·H(σ)) / Z(t)`.
pub fn gibbs_probability<T: Scalar>(lat: &CubicLattice, t: T, sigma: &SpinConfig) -> Result<T, IsingError> {
    let h = hamiltonian_nn(lat, sigma)?;
    let z = partition_function(lat, t)?;
    Ok((t * T::of_int(h)).exp() / z)
}

/// Exponent of the anisotropic Gibbs weight with in-neighbor diagonals,
/// summed over vertices strictly above `conditioning_layer`:
/// `Σ −β s (a + b + c) − γ (ab + bc + ca)` with `a, b, c` the in-neighbors.
pub fn hamiltonian_diag<T: Scalar>(
    lat: &CubicLattice,
    sigma: &SpinConfig,
    beta: T,
    gamma: T,
    conditioning_layer: usize,
) -> Result<T, IsingError> {
    lat.check(sigma)?;
    if !lat.is_time_slab() {
        return Err(IsingError::NotTimeSlab);
    }
    let layers = lat.dims[2];
    if conditioning_layer >= layers {
        return Err(IsingError::InvalidLayer { layer: conditioning_layer, layers });
    }
    let per_layer = lat.dims[0] * lat.dims[1];
    let mut field_sum = 0i64;
    let mut diag_sum = 0i64;
    for v in (conditioning_layer + 1) * per_layer..lat.num_vertices() {
        let [a, b, c] = lat.in_neighbors(v).expect("above layer 0").map(|u| sigma.get(u) as i64);
        field_sum += sigma.get(v) as i64 * (a + b + c);
        diag_sum += a * b + b * c + c * a;
    }
    Ok(-beta * T::of_int(field_sum) - gamma * T::of_int(diag_sum))
}

/// Bond spins `s_ij = σ_i σ_j`, aligned with [`CubicLattice::edges`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EdgeField {
    pub values: Vec<i8>,
}

impl EdgeField {
    /// Product of the four bond spins around every plaquette is `+1`.
    pub fn is_closed(&self, lat: &CubicLattice) -> bool {
        lat.plaquettes().iter().all(|p| p.iter().map(|&k| self.values[k]).product::<i8>() == 1)
    }
}

pub fn edge_spin_field(lat: &CubicLattice, sigma: &SpinConfig) -> Result<EdgeField, IsingError> {
    lat.check(sigma)?;
    Ok(EdgeField { values: lat.edges().iter().map(|e| sigma.get(e.a) * sigma.get(e.b)).collect() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    /// Transfer-matrix evaluation of `Z(t)` along the z axis for open boundaries.
    fn transfer_oracle(dims: [usize; 3], t: f64) -> f64 {
        let [lx, ly, lz] = dims;
        let m = lx * ly;
        let layer_energy = |s: u64| -> i64 {
            let sp = |x: usize, y: usize| 1 - 2 * ((s >> (x + lx * y)) & 1) as i64;
            let mut e = 0;
            for x in 0..lx {
                for y in 0..ly {
                    if x + 1 < lx {
                        e += sp(x, y) * sp(x + 1, y);
                    }
                    if y + 1 < ly {
                        e += sp(x, y) * sp(x, y + 1);
                    }
                }
            }
            e
        };
        let coupling = |a: u64, b: u64| -> i64 { m as i64 - 2 * (a ^ b).count_ones() as i64 };
        let states = 1u64 << m;
        let mut v: Vec<f64> = (0..states).map(|s| (t * layer_energy(s) as f64).exp()).collect();
        for _ in 1..lz {
            v = (0..states)
                .map(|b| {
                    let w = (t * layer_energy(b) as f64).exp();
                    (0..states).map(|a| v[a as usize] * (t * coupling(a, b) as f64).exp()).sum::<f64>() * w
                })
                .collect();
        }
        v.iter().sum()
    }

    fn direct_sum(lat: &CubicLattice, t: f64, order: &[u64]) -> f64 {
        order
            .iter()
            .map(|&b| (t * hamiltonian_nn(lat, &SpinConfig::from_bits(lat.num_vertices(), b)).unwrap() as f64).exp())
            .sum()
    }

    #[test]
    fn hamiltonian_examples() {
        let open = CubicLattice::open([2, 2, 2]).unwrap();
        assert_eq!(hamiltonian_nn(&open, &SpinConfig::all_up(8)).unwrap(), 12);
        let per = CubicLattice::periodic(3).unwrap();
        assert_eq!(hamiltonian_nn(&per, &SpinConfig::all_up(27)).unwrap(), 81);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let s = SpinConfig::from_bits(27, rng.gen());
            assert_eq!(hamiltonian_nn(&per, &s).unwrap(), hamiltonian_nn(&per, &s.negated()).unwrap());
        }
    }

    #[test]
    fn lattice_validation() {
        assert_eq!(CubicLattice::periodic(2), Err(IsingError::PeriodicTooSmall { axis: 0, len: 2 }));
        assert_eq!(CubicLattice::open([0, 1, 1]), Err(IsingError::EmptyLattice));
        let lat = CubicLattice::open([2, 2, 2]).unwrap();
        assert!(hamiltonian_nn(&lat, &SpinConfig::all_up(7)).is_err());
        let big = CubicLattice::periodic(4).unwrap();
        assert!(matches!(partition_function(&big, 0.1f64), Err(IsingError::TooLarge { .. })));
    }

    #[test]
    fn z_at_zero_counts_states() {
        for lat in [
            CubicLattice::open([2, 2, 2]).unwrap(),
            CubicLattice::new([3, 3, 2], [Boundary::Periodic, Boundary::Periodic, Boundary::Open]).unwrap(),
        ] {
            let n = lat.num_vertices() as i32;
            assert_eq!(partition_function(&lat, 0.0f64).unwrap(), 2f64.powi(n));
        }
    }

    #[test]
    fn z_is_even_on_bipartite_lattices() {
        let lat = CubicLattice::open([2, 3, 2]).unwrap();
        for t in [0.1, 0.4, 1.3] {
            assert_relative_eq!(
                partition_function(&lat, t).unwrap(),
                partition_function(&lat, -t).unwrap(),
                max_relative = 1e-13
            );
        }
    }

    #[test]
    fn z_matches_transfer_matrix() {
        for dims in [[2, 2, 2], [2, 3, 2], [3, 2, 3]] {
            let lat = CubicLattice::open(dims).unwrap();
            for t in [-0.7, 0.25, 0.9] {
                let z = partition_function(&lat, t).unwrap();
                assert_relative_eq!(z, transfer_oracle(dims, t), max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn z_independent_of_enumeration_order() {
        let lat = CubicLattice::new([3, 3, 2], [Boundary::Periodic, Boundary::Periodic, Boundary::Open]).unwrap();
        let n = lat.num_vertices();
        let mut order: Vec<u64> = (0..1u64 << n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for i in (1..order.len()).rev() {
            order.swap(i, rng.gen_range(0..=i));
        }
        let t = 0.37;
        assert_relative_eq!(partition_function(&lat, t).unwrap(), direct_sum(&lat, t, &order), max_relative = 1e-12);
    }

    #[test]
    fn gibbs_probabilities() {
        let lat = CubicLattice::open([2, 2, 2]).unwrap();
        let all: Vec<_> = (0..256u64).map(|b| SpinConfig::from_bits(8, b)).collect();
        assert_eq!(gibbs_probability(&lat, 0.0f64, &all[17]).unwrap(), 1.0 / 256.0);
        let t = 0.6f64;
        let probs: Vec<f64> = all.iter().map(|s| gibbs_probability(&lat, t, s).unwrap()).collect();
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let max = probs.iter().cloned().fold(0.0, f64::max);
        assert_eq!(probs[0], max);
        assert_eq!(probs[255], max);
        assert_eq!(probs.iter().filter(|&&p| p == max).count(), 2);
    }

    #[test]
    fn diag_hamiltonian_examples() {
        let lat = CubicLattice::time_slab(3, 2).unwrap();
        let up = SpinConfig::all_up(18);
        // nine updated vertices, each −3β − 3γ
        assert_relative_eq!(hamiltonian_diag(&lat, &up, 0.5f64, 0.2, 0).unwrap(), 9.0 * (-1.5 - 0.6), epsilon = 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let s = SpinConfig::from_bits(18, rng.gen());
            let h0 = hamiltonian_diag(&lat, &s, 0.8f64, 0.0, 0).unwrap();
            let mut directed = 0i64;
            for v in 9..18 {
                for u in lat.in_neighbors(v).unwrap() {
                    directed += (s.get(u) * s.get(v)) as i64;
                }
            }
            assert_relative_eq!(h0, -0.8 * directed as f64, epsilon = 1e-12);
            let h = hamiltonian_diag(&lat, &s, 0.8f64, 0.3, 0).unwrap();
            assert_eq!(h, hamiltonian_diag(&lat, &s.negated(), 0.8f64, 0.3, 0).unwrap());
        }
    }

    #[test]
    fn diag_hamiltonian_errors() {
        let lat = CubicLattice::time_slab(3, 2).unwrap();
        let s = SpinConfig::all_up(18);
        assert_eq!(hamiltonian_diag(&lat, &s, 1.0f64, 0.0, 2), Err(IsingError::InvalidLayer { layer: 2, layers: 2 }));
        let per = CubicLattice::periodic(3).unwrap();
        assert_eq!(hamiltonian_diag(&per, &SpinConfig::all_up(27), 1.0f64, 0.0, 0), Err(IsingError::NotTimeSlab));
    }

    #[test]
    fn edge_field_examples() {
        let lat = CubicLattice::periodic(3).unwrap();
        let f = edge_spin_field(&lat, &SpinConfig::all_up(27)).unwrap();
        assert!(f.values.iter().all(|&s| s == 1));
        let mut s = SpinConfig::all_up(27);
        s.flip(lat.index(1, 1, 1));
        let f = edge_spin_field(&lat, &s).unwrap();
        assert_eq!(f.values.iter().filter(|&&v| v == -1).count(), 6);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let s = SpinConfig::from_bits(27, rng.gen());
            assert!(edge_spin_field(&lat, &s).unwrap().is_closed(&lat));
        }
    }

    #[test]
    fn edge_fields_are_two_to_one() {
        let lat = CubicLattice::open([2, 2, 2]).unwrap();
        let fields: HashSet<_> =
            (0..256u64).map(|b| edge_spin_field(&lat, &SpinConfig::from_bits(8, b)).unwrap()).collect();
        assert_eq!(fields.len(), 128);
    }

    #[test]
    fn edge_index_matches_edges() {
        let lat = CubicLattice::new([3, 4, 2], [Boundary::Periodic, Boundary::Periodic, Boundary::Open]).unwrap();
        for (k, e) in lat.edges().iter().enumerate() {
            assert_eq!(lat.edge_index(e.a, e.axis), Some(k));
        }
        assert_eq!(lat.plaquettes().len(), 24 + 12 + 12);
    }
}
