//! Hopfield dynamics: Hebbian learning, synchronous deterministic and
//! probabilistic updates, trajectory probabilities, and the asymmetric
//! network on the 3-colored triangular lattice.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;
use crate::spin::{NetworkState, SpinConfig};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HopfieldError {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("pattern list is empty")]
    EmptyPatterns,
    #[error("inverse gain must be finite and non-negative")]
    InvalidBeta,
    #[error("triangular lattice side {0} must be a positive multiple of 3")]
    InvalidSide(usize),
    #[error("trajectory needs at least one step")]
    EmptyTrajectory,
}

/// Sign of the exponent in the transition probability.
///
/// `Sigmoid` uses `(1 + exp(-β x'·h))⁻¹`. `Printed` flips the sign of `β`,
/// which is what the exponential rewriting `exp(-β/2 Σ W x' x)` amounts to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignConvention {
    #[default]
    Sigmoid,
    Printed,
}

/// A network of `n` ±1 neurons with row `i` of `weights` holding the inputs to neuron `i`.
#[derive(Debug, Clone)]
pub struct HopfieldNet<T> {
    n: usize,
    weights: Vec<T>,
    thresholds: Vec<T>,
    beta: T,
    sign: SignConvention,
    /// Nonzero entries of each row, for sparse field evaluation.
    rows: Vec<Vec<(usize, T)>>,
}

impl<T: Scalar> HopfieldNet<T> {
    /// `weights` is row-major `n × n`; thresholds default to zero.
    pub fn new(n: usize, weights: Vec<T>, beta: T) -> Result<Self, HopfieldError> {
        if weights.len() != n * n {
            return Err(HopfieldError::DimensionMismatch { expected: n * n, actual: weights.len() });
        }
        if !beta.is_finite() || beta < T::zero() {
            return Err(HopfieldError::InvalidBeta);
        }
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .filter_map(|j| {
                        let w = weights[i * n + j];
                        (w != T::zero()).then_some((j, w))
                    })
                    .collect()
            })
            .collect();
        Ok(Self { n, weights, thresholds: vec![T::zero(); n], beta, sign: SignConvention::Sigmoid, rows })
    }

    pub fn with_thresholds(mut self, thresholds: Vec<T>) -> Result<Self, HopfieldError> {
        if thresholds.len() != self.n {
            return Err(HopfieldError::DimensionMismatch { expected: self.n, actual: thresholds.len() });
        }
        self.thresholds = thresholds;
        Ok(self)
    }

    pub fn with_sign(mut self, sign: SignConvention) -> Self {
        self.sign = sign;
        self
    }

    pub fn with_beta(mut self, beta: T) -> Result<Self, HopfieldError> {
        if !beta.is_finite() || beta < T::zero() {
            return Err(HopfieldError::InvalidBeta);
        }
        self.beta = beta;
        Ok(self)
    }

    /// Hebbian network storing `patterns`.
    pub fn hebbian(patterns: &[NetworkState], beta: T, zero_diagonal: bool) -> Result<Self, HopfieldError> {
        let w = hebbian_weights(patterns, zero_diagonal)?;
        Self::new(patterns[0].len(), w, beta)
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    pub fn sign(&self) -> SignConvention {
        self.sign
    }

    pub fn weight(&self, i: usize, j: usize) -> T {
        self.weights[i * self.n + j]
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn thresholds(&self) -> &[T] {
        &self.thresholds
    }

    fn check(&self, x: &NetworkState) -> Result<(), HopfieldError> {
        if x.len() != self.n {
            return Err(HopfieldError::DimensionMismatch { expected: self.n, actual: x.len() });
        }
        Ok(())
    }

    /// `Σ_j W_ij x_j − t_i`.
    pub fn local_field(&self, i: usize, x: &NetworkState) -> T {
        let s: T = self.rows[i].iter().map(|&(j, w)| w * T::of_int(x.get(j) as i64)).sum();
        s - self.thresholds[i]
    }

    fn effective_beta(&self) -> T {
        match self.sign {
            SignConvention::Sigmoid => self.beta,
            SignConvention::Printed => -self.beta,
        }
    }

    /// Probability that neuron `i` takes value `spin` given the previous state `x`.
    pub fn site_probability(&self, i: usize, spin: i8, x: &NetworkState) -> T {
        let h = self.local_field(i, x);
        let a = self.effective_beta() * T::of_int(spin as i64) * h;
        T::one() / (T::one() + (-a).exp())
    }

    fn site_log_probability(&self, i: usize, spin: i8, x: &NetworkState) -> T {
        let h = self.local_field(i, x);
        let a = self.effective_beta() * T::of_int(spin as i64) * h;
        // log σ(a) = −log(1 + e^{−a}), evaluated stably on both tails
        if a >= T::zero() {
            -(-a).exp().ln_1p()
        } else {
            a - a.exp().ln_1p()
        }
    }

    /// Synchronous threshold update; a field exactly at threshold keeps the old spin.
    pub fn deterministic_step(&self, x: &NetworkState) -> Result<NetworkState, HopfieldError> {
        self.check(x)?;
        let mut next = x.clone();
        for i in 0..self.n {
            let h = self.local_field(i, x);
            if h > T::zero() {
                next.set(i, 1);
            } else if h < T::zero() {
                next.set(i, -1);
            }
        }
        Ok(next)
    }

    /// Updates neuron `i` in place by the threshold rule. Returns whether it changed.
    pub fn asynchronous_update(&self, x: &mut NetworkState, i: usize) -> bool {
        let h = self.local_field(i, x);
        let old = x.get(i);
        let new = if h > T::zero() {
            1
        } else if h < T::zero() {
            -1
        } else {
            old
        };
        x.set(i, new);
        new != old
    }

    /// `P(x' | x) = Π_i (1 + exp(−β x'_i h_i))⁻¹`.
    pub fn transition_probability(&self, x: &NetworkState, next: &NetworkState) -> Result<T, HopfieldError> {
        self.check(x)?;
        self.check(next)?;
        Ok((0..self.n).map(|i| self.site_probability(i, next.get(i), x)).fold(T::one(), |a, b| a * b))
    }

    pub fn log_transition_probability(&self, x: &NetworkState, next: &NetworkState) -> Result<T, HopfieldError> {
        self.check(x)?;
        self.check(next)?;
        Ok((0..self.n).map(|i| self.site_log_probability(i, next.get(i), x)).sum())
    }

    /// Samples each neuron independently, drawing from `rng` in index order.
    pub fn stochastic_step<R: Rng + ?Sized>(
        &self,
        x: &NetworkState,
        rng: &mut R,
    ) -> Result<NetworkState, HopfieldError> {
        self.check(x)?;
        let mut next = x.clone();
        for i in 0..self.n {
            let p_up = self.site_probability(i, 1, x).to_f64_lossy();
            let u: f64 = rng.gen();
            next.set(i, if u < p_up { 1 } else { -1 });
        }
        Ok(next)
    }

    pub fn stochastic_step_seeded(&self, x: &NetworkState, seed: u64) -> Result<NetworkState, HopfieldError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.stochastic_step(x, &mut rng)
    }

    /// Runs `steps` stochastic updates from `start`.
    pub fn run<R: Rng + ?Sized>(
        &self,
        start: &NetworkState,
        steps: usize,
        rng: &mut R,
    ) -> Result<Trajectory, HopfieldError> {
        self.check(start)?;
        let mut layers = Vec::with_capacity(steps + 1);
        layers.push(start.clone());
        for _ in 0..steps {
            let next = self.stochastic_step(layers.last().expect("non-empty"), rng)?;
            layers.push(next);
        }
        Trajectory::new(layers)
    }

    /// Probability of the trajectory conditioned on its first layer.
    pub fn trajectory_probability(&self, traj: &Trajectory) -> Result<T, HopfieldError> {
        traj.steps().try_fold(T::one(), |acc, (x, next)| Ok(acc * self.transition_probability(x, next)?))
    }

    pub fn log_trajectory_probability(&self, traj: &Trajectory) -> Result<T, HopfieldError> {
        traj.steps().try_fold(T::zero(), |acc, (x, next)| Ok(acc + self.log_transition_probability(x, next)?))
    }

    /// `E = −½ Σ_ij W_ij x_i x_j − Σ_i t_i x_i`.
    pub fn energy(&self, x: &NetworkState) -> Result<T, HopfieldError> {
        self.check(x)?;
        let half = T::of(0.5);
        let mut e = T::zero();
        for i in 0..self.n {
            let xi = T::of_int(x.get(i) as i64);
            let wx: T = self.rows[i].iter().map(|&(j, w)| w * T::of_int(x.get(j) as i64)).sum();
            e = e - half * xi * wx - self.thresholds[i] * xi;
        }
        Ok(e)
    }
}

/// `W_ij = (1/n) Σ_k ε_i^k ε_j^k`, row-major.
pub fn hebbian_weights<T: Scalar>(patterns: &[NetworkState], zero_diagonal: bool) -> Result<Vec<T>, HopfieldError> {
    let first = patterns.first().ok_or(HopfieldError::EmptyPatterns)?;
    let n = first.len();
    if let Some(p) = patterns.iter().find(|p| p.len() != n) {
        return Err(HopfieldError::DimensionMismatch { expected: n, actual: p.len() });
    }
    let mut counts = vec![0i64; n * n];
    for p in patterns {
        let s = p.to_signs();
        for i in 0..n {
            for j in 0..n {
                counts[i * n + j] += (s[i] * s[j]) as i64;
            }
        }
    }
    let inv = T::one() / T::of_int(patterns.len() as i64);
    let mut w: Vec<T> = counts.into_iter().map(|c| T::of_int(c) * inv).collect();
    if zero_diagonal {
        for i in 0..n {
            w[i * n + i] = T::zero();
        }
    }
    Ok(w)
}

/// Time-ordered network states, first layer is the initial condition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<SpinConfig>", into = "Vec<SpinConfig>")]
pub struct Trajectory {
    layers: Vec<SpinConfig>,
}

impl Trajectory {
    pub fn new(layers: Vec<SpinConfig>) -> Result<Self, HopfieldError> {
        let first = layers.first().ok_or(HopfieldError::EmptyTrajectory)?;
        if layers.len() < 2 {
            return Err(HopfieldError::EmptyTrajectory);
        }
        if let Some(l) = layers.iter().find(|l| l.len() != first.len()) {
            return Err(HopfieldError::DimensionMismatch { expected: first.len(), actual: l.len() });
        }
        Ok(Self { layers })
    }

    pub fn layers(&self) -> &[SpinConfig] {
        &self.layers
    }

    /// Number of update steps `T`.
    pub fn len(&self) -> usize {
        self.layers.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn width(&self) -> usize {
        self.layers[0].len()
    }

    pub fn steps(&self) -> impl Iterator<Item = (&SpinConfig, &SpinConfig)> {
        self.layers.windows(2).map(|w| (&w[0], &w[1]))
    }

    /// All layers packed into one configuration, layer-major.
    pub fn flatten(&self) -> SpinConfig {
        SpinConfig::concat(self.layers.iter())
    }

    /// Inverse of [`flatten`](Self::flatten).
    pub fn from_flat(field: &SpinConfig, width: usize) -> Result<Self, HopfieldError> {
        if width == 0 || !field.len().is_multiple_of(width) {
            return Err(HopfieldError::DimensionMismatch { expected: width, actual: field.len() });
        }
        Self::new((0..field.len() / width).map(|t| field.slice(t * width, width)).collect())
    }
}

impl TryFrom<Vec<SpinConfig>> for Trajectory {
    type Error = HopfieldError;
    fn try_from(v: Vec<SpinConfig>) -> Result<Self, Self::Error> {
        Trajectory::new(v)
    }
}

impl From<Trajectory> for Vec<SpinConfig> {
    fn from(t: Trajectory) -> Self {
        t.layers
    }
}

/// Asymmetric network on an `L × L` rhombic torus of the triangular lattice.
///
/// Site `(x, y)` has color `(x + y) mod 3` and listens to its three
/// neighbors of color `c − 1`: `(x−1, y)`, `(x, y−1)`, `(x+1, y+1)`.
/// Site index is `x + L·y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriangularNet<T> {
    pub side: usize,
    pub weight: T,
    pub beta: T,
}

impl<T: Scalar> TriangularNet<T> {
    pub fn new(side: usize, beta: T) -> Result<Self, HopfieldError> {
        Self::with_weight(side, T::one(), beta)
    }

    pub fn with_weight(side: usize, weight: T, beta: T) -> Result<Self, HopfieldError> {
        if side == 0 || !side.is_multiple_of(3) {
            return Err(HopfieldError::InvalidSide(side));
        }
        Ok(Self { side, weight, beta })
    }

    pub fn sites(&self) -> usize {
        self.side * self.side
    }

    pub fn index(&self, x: usize, y: usize) -> usize {
        (x % self.side) + self.side * (y % self.side)
    }

    pub fn coords(&self, i: usize) -> (usize, usize) {
        (i % self.side, i / self.side)
    }

    pub fn color(&self, i: usize) -> usize {
        let (x, y) = self.coords(i);
        (x + y) % 3
    }

    pub fn in_neighbors(&self, i: usize) -> [usize; 3] {
        let l = self.side;
        let (x, y) = self.coords(i);
        [self.index(x + l - 1, y), self.index(x, y + l - 1), self.index(x + 1, y + 1)]
    }

    pub fn out_neighbors(&self, i: usize) -> [usize; 3] {
        let l = self.side;
        let (x, y) = self.coords(i);
        [self.index(x + 1, y), self.index(x, y + 1), self.index(x + l - 1, y + l - 1)]
    }

    pub fn to_net(&self) -> Result<HopfieldNet<T>, HopfieldError> {
        let n = self.sites();
        let mut w = vec![T::zero(); n * n];
        for i in 0..n {
            for j in self.in_neighbors(i) {
                w[i * n + j] = self.weight;
            }
        }
        HopfieldNet::new(n, w, self.beta)
    }

    /// Sublattice of site `i` at time `time`: `(color − time) mod 3`.
    pub fn class_of(&self, i: usize, time: usize) -> usize {
        (self.color(i) + 3 * time - time) % 3
    }
}

/// The (site, time) pairs of one of the three independent subsystems.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SublatticeField {
    pub class: usize,
    pub members: Vec<(usize, usize)>,
    pub spins: Vec<i8>,
}

impl SublatticeField {
    /// Cubic coordinates `(i, j, k)` of a member under `(i,j,k) ↦ (i−k, j−k, i+j+k+class')`,
    /// using the representatives `0 ≤ x, y < L`. Only adjacency of interior
    /// points is meaningful; the torus identifies `i, j` modulo `L`.
    pub fn cubic_coords<T: Scalar>(&self, tri: &TriangularNet<T>, site: usize, time: usize) -> (i64, i64, i64) {
        let (x, y) = tri.coords(site);
        let (x, y, t) = (x as i64, y as i64, time as i64);
        // x + y − t ≡ class (mod 3); shift time so the remainder divides out
        let r = (x + y - t).rem_euclid(3);
        let k = (t + r - x - y) / 3;
        (x + k, y + k, k)
    }
}

/// Splits a triangular-net trajectory into its three non-interacting subsystems.
pub fn decompose_sublattices<T: Scalar>(
    tri: &TriangularNet<T>,
    traj: &Trajectory,
) -> Result<[SublatticeField; 3], HopfieldError> {
    if traj.width() != tri.sites() {
        return Err(HopfieldError::DimensionMismatch { expected: tri.sites(), actual: traj.width() });
    }
    let mut out: [SublatticeField; 3] =
        std::array::from_fn(|r| SublatticeField { class: r, members: Vec::new(), spins: Vec::new() });
    for (time, layer) in traj.layers().iter().enumerate() {
        for site in 0..tri.sites() {
            let r = tri.class_of(site, time);
            out[r].members.push((site, time));
            out[r].spins.push(layer.get(site));
        }
    }
    Ok(out)
}

/// Log-probability of the updates of one subsystem (members with `time ≥ 1`).
pub fn class_log_probability<T: Scalar>(
    net: &HopfieldNet<T>,
    traj: &Trajectory,
    field: &SublatticeField,
) -> Result<T, HopfieldError> {
    let layers = traj.layers();
    let mut acc = T::zero();
    for &(site, time) in &field.members {
        if time == 0 {
            continue;
        }
        acc = acc + net.site_log_probability(site, layers[time].get(site), &layers[time - 1]);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;

    fn st(signs: &[i8]) -> SpinConfig {
        SpinConfig::from_signs(signs).unwrap()
    }

    fn all_states(n: usize) -> impl Iterator<Item = SpinConfig> {
        (0..1u64 << n).map(move |b| SpinConfig::from_bits(n, b))
    }

    fn random_net(n: usize, seed: u64, symmetric: bool) -> HopfieldNet<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut w = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if symmetric && j < i {
                    w[i * n + j] = w[j * n + i];
                } else if !(symmetric && i == j) {
                    w[i * n + j] = rng.gen_range(-1.0..1.0);
                }
            }
        }
        // the energy's −Σ t x term pairs with a `> −t` update rule, so monotonicity
        // is only checked with zero thresholds
        let t = (0..n).map(|_| if symmetric { 0.0 } else { rng.gen_range(-0.5..0.5) }).collect();
        HopfieldNet::new(n, w, rng.gen_range(0.2..2.0)).unwrap().with_thresholds(t).unwrap()
    }

    #[test]
    fn hebbian_single_pattern_is_rank_one() {
        let p = st(&[1, -1, 1, 1]);
        let w: Vec<f64> = hebbian_weights(std::slice::from_ref(&p), false).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(w[i * 4 + j], (p.get(i) * p.get(j)) as f64);
            }
        }
    }

    #[test]
    fn hebbian_pattern_and_negation() {
        let p = st(&[1, -1, -1, 1, 1]);
        let a: Vec<f64> = hebbian_weights(std::slice::from_ref(&p), false).unwrap();
        let b: Vec<f64> = hebbian_weights(&[p.clone(), p.negated()], false).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn hebbian_orthogonal_entry() {
        let w: Vec<f64> = hebbian_weights(&[st(&[1, 1, -1, -1]), st(&[1, -1, 1, -1])], false).unwrap();
        assert_eq!(w[1], 0.0);
        let z: Vec<f64> = hebbian_weights(&[st(&[1, 1, -1, -1])], true).unwrap();
        assert!((0..4).all(|i| z[i * 4 + i] == 0.0));
    }

    #[test]
    fn hebbian_errors() {
        assert_eq!(hebbian_weights::<f64>(&[], false), Err(HopfieldError::EmptyPatterns));
        assert!(hebbian_weights::<f64>(&[st(&[1]), st(&[1, 1])], false).is_err());
    }

    #[test]
    fn deterministic_tie_keeps_state() {
        let net = HopfieldNet::new(3, vec![0.0; 9], 1.0).unwrap();
        let x = st(&[1, -1, 1]);
        assert_eq!(net.deterministic_step(&x).unwrap(), x);
    }

    #[test]
    fn stored_pattern_is_fixed_point() {
        let p = st(&[1, -1, -1, 1, -1, 1]);
        let net = HopfieldNet::<f64>::hebbian(std::slice::from_ref(&p), 1.0, false).unwrap();
        assert_eq!(net.deterministic_step(&p).unwrap(), p);
    }

    #[test]
    fn negative_threshold_flips_up() {
        let net = HopfieldNet::new(1, vec![0.0], 1.0).unwrap().with_thresholds(vec![-1.0]).unwrap();
        assert_eq!(net.deterministic_step(&st(&[-1])).unwrap(), st(&[1]));
    }

    #[test]
    fn transition_examples() {
        let net = HopfieldNet::new(1, vec![0.0], 1.0).unwrap();
        for s in [1, -1] {
            assert_eq!(net.transition_probability(&st(&[1]), &st(&[s])).unwrap(), 0.5);
        }
        let net = HopfieldNet::new(2, vec![0.0, 1.0, 1.0, 0.0], 1.0).unwrap();
        let p = net.transition_probability(&st(&[1, 1]), &st(&[1, 1])).unwrap();
        let oracle = (1.0 + (-1.0f64).exp()).powi(-2);
        assert_relative_eq!(p, oracle, epsilon = 1e-15);
        assert!((p - 0.534447).abs() < 1e-6);
    }

    #[test]
    fn large_beta_concentrates_on_aligned_state() {
        let net = HopfieldNet::new(2, vec![0.0, 1.0, 1.0, 0.0], 200.0).unwrap();
        let p = net.transition_probability(&st(&[1, -1]), &st(&[-1, 1])).unwrap();
        assert!((1.0 - p) < 1e-12);
    }

    #[test]
    fn printed_convention_flips_beta() {
        let net = random_net(4, 3, false);
        let printed = net.clone().with_sign(SignConvention::Printed);
        let x = st(&[1, -1, 1, 1]);
        for y in all_states(4) {
            let a = printed.transition_probability(&x, &y).unwrap();
            let b = net.transition_probability(&x, &y.negated()).unwrap();
            // flipping β is the same as flipping x' when thresholds are absorbed in h
            assert_relative_eq!(a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn normalization_exhaustive() {
        for n in 1..=8 {
            let net = random_net(n, n as u64, false);
            let x = SpinConfig::from_bits(n, 0b1011_0110 & ((1 << n) - 1));
            let total: f64 = all_states(n).map(|y| net.transition_probability(&x, &y).unwrap()).sum();
            assert!((total - 1.0).abs() < 1e-12, "n={n} total={total}");
        }
    }

    #[test]
    fn log_matches_linear() {
        let net = random_net(6, 11, false);
        let x = SpinConfig::from_bits(6, 0b101100);
        for y in all_states(6) {
            let p = net.transition_probability(&x, &y).unwrap();
            let lp = net.log_transition_probability(&x, &y).unwrap();
            assert_relative_eq!(p.ln(), lp, epsilon = 1e-12);
        }
    }

    #[test]
    fn beta_zero_sampling_is_uniform_probability() {
        let net = random_net(5, 2, false).with_beta(0.0).unwrap();
        let x = SpinConfig::all_up(5);
        for y in all_states(5) {
            assert_eq!(net.transition_probability(&x, &y).unwrap(), 1.0 / 32.0);
        }
        let traj = net.run(&x, 3, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_relative_eq!(net.trajectory_probability(&traj).unwrap(), 2f64.powi(-15), epsilon = 1e-20);
    }

    #[test]
    fn seeded_step_is_reproducible() {
        let net = random_net(7, 9, false);
        let x = SpinConfig::from_bits(7, 0b1010101);
        assert_eq!(net.stochastic_step_seeded(&x, 42).unwrap(), net.stochastic_step_seeded(&x, 42).unwrap());
    }

    #[test]
    fn trajectory_single_step_equals_transition() {
        let net = random_net(4, 5, false);
        let (a, b) = (SpinConfig::from_bits(4, 3), SpinConfig::from_bits(4, 9));
        let traj = Trajectory::new(vec![a.clone(), b.clone()]).unwrap();
        assert_eq!(net.trajectory_probability(&traj).unwrap(), net.transition_probability(&a, &b).unwrap());
    }

    #[test]
    fn trajectories_sum_to_one() {
        let net = random_net(4, 17, false);
        let x0 = SpinConfig::from_bits(4, 0b0110);
        let mut total = 0.0;
        for a in all_states(4) {
            for b in all_states(4) {
                let traj = Trajectory::new(vec![x0.clone(), a.clone(), b]).unwrap();
                total += net.trajectory_probability(&traj).unwrap();
            }
        }
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn energy_examples() {
        let zero = HopfieldNet::new(3, vec![0.0; 9], 1.0).unwrap();
        assert_eq!(zero.energy(&st(&[1, -1, 1])).unwrap(), 0.0);
        let p = st(&[1, -1, 1, 1, -1]);
        let net = HopfieldNet::<f64>::hebbian(std::slice::from_ref(&p), 1.0, false).unwrap();
        let e = net.energy(&p).unwrap();
        assert_eq!(e, -12.5);
        let mut q = p.clone();
        q.flip(2);
        assert!(net.energy(&q).unwrap() > e);
    }

    #[test]
    fn asynchronous_updates_never_raise_energy() {
        for seed in 0..100u64 {
            let n = 2 + (seed as usize % 9);
            let net = random_net(n, 1000 + seed, true);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut x = SpinConfig::from_bits(n, rng.gen::<u64>());
            let mut e = net.energy(&x).unwrap();
            for _ in 0..5 * n {
                let i = rng.gen_range(0..n);
                net.asynchronous_update(&mut x, i);
                let e2 = net.energy(&x).unwrap();
                assert!(e2 <= e + 1e-12, "seed {seed}: {e} -> {e2}");
                e = e2;
            }
        }
    }

    #[test]
    fn triangular_structure() {
        let tri = TriangularNet::new(3, 1.0f64).unwrap();
        let net = tri.to_net().unwrap();
        let n = tri.sites();
        for i in 0..n {
            for j in tri.in_neighbors(i) {
                assert_eq!(tri.color(j), (tri.color(i) + 2) % 3);
                assert!(tri.out_neighbors(j).contains(&i));
            }
            let indeg = (0..n).filter(|&j| net.weight(i, j) != 0.0).count();
            let outdeg = (0..n).filter(|&j| net.weight(j, i) != 0.0).count();
            assert_eq!((indeg, outdeg), (3, 3));
        }
        for c in 0..3 {
            assert_eq!((0..n).filter(|&i| tri.color(i) == c).count(), n / 3);
        }
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    assert_eq!(net.weight(i, j) * net.weight(j, i), 0.0);
                }
            }
        }
    }

    #[test]
    fn triangular_rejects_bad_side() {
        assert_eq!(TriangularNet::new(4, 1.0f64), Err(HopfieldError::InvalidSide(4)));
        assert!(TriangularNet::new(0, 1.0f64).is_err());
    }

    #[test]
    fn in_neighbors_stay_in_class() {
        let tri = TriangularNet::new(6, 1.0f64).unwrap();
        for time in 1..5 {
            for i in 0..tri.sites() {
                for j in tri.in_neighbors(i) {
                    assert_eq!(tri.class_of(j, time - 1), tri.class_of(i, time));
                }
            }
        }
    }

    #[test]
    fn decomposition_factorizes() {
        let tri = TriangularNet::new(3, 0.8f64).unwrap();
        let net = tri.to_net().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let layers = (0..4).map(|_| SpinConfig::from_bits(9, rng.gen())).collect();
            let traj = Trajectory::new(layers).unwrap();
            let classes = decompose_sublattices(&tri, &traj).unwrap();
            for c in &classes {
                assert_eq!(c.members.len(), 3 * 4);
            }
            let sum: f64 = classes.iter().map(|c| class_log_probability(&net, &traj, c).unwrap()).sum();
            let full = net.log_trajectory_probability(&traj).unwrap();
            assert!((sum - full).abs() < 1e-12);
        }
    }

    #[test]
    fn class_probability_ignores_other_classes() {
        let tri = TriangularNet::new(3, 1.1f64).unwrap();
        let net = tri.to_net().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let layers: Vec<_> = (0..4).map(|_| SpinConfig::from_bits(9, rng.gen())).collect();
        let traj = Trajectory::new(layers.clone()).unwrap();
        let classes = decompose_sublattices(&tri, &traj).unwrap();
        let base = class_log_probability(&net, &traj, &classes[0]).unwrap();
        let mut other = layers;
        for (t, layer) in other.iter_mut().enumerate() {
            for i in 0..9 {
                if tri.class_of(i, t) != 0 {
                    layer.flip(i);
                }
            }
        }
        let traj2 = Trajectory::new(other).unwrap();
        assert_eq!(class_log_probability(&net, &traj2, &classes[0]).unwrap(), base);
    }

    #[test]
    fn cubic_coords_follow_stencil() {
        let tri = TriangularNet::new(9, 1.0f64).unwrap();
        let field = SublatticeField { class: 0, members: vec![], spins: vec![] };
        let site = tri.index(4, 4);
        let (i, j, k) = field.cubic_coords(&tri, site, 5);
        let nb = tri.in_neighbors(site);
        assert_eq!(field.cubic_coords(&tri, nb[0], 4), (i - 1, j, k));
        assert_eq!(field.cubic_coords(&tri, nb[1], 4), (i, j - 1, k));
        assert_eq!(field.cubic_coords(&tri, nb[2], 4), (i, j, k - 1));
    }

    #[test]
    fn trajectory_flatten_roundtrip() {
        let layers: Vec<_> = (0..3).map(|b| SpinConfig::from_bits(5, b * 7)).collect();
        let traj = Trajectory::new(layers).unwrap();
        assert_eq!(Trajectory::from_flat(&traj.flatten(), 5).unwrap(), traj);
        assert!(Trajectory::new(vec![SpinConfig::all_up(3)]).is_err());
    }
}
