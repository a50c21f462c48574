//! Hyperbolic identities behind the Hopfield ↔ Ising correspondence, the
//! coupling map `β ↦ γ`, and the exhaustive check that conditional
//! trajectory probabilities are a Gibbs distribution with diagonal couplings.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::hopfield::{HopfieldNet, SignConvention, Trajectory, TriangularNet};
use crate::ising::{hamiltonian_diag, CubicLattice, IsingError};
use crate::scalar::Scalar;
use crate::spin::SpinConfig;

/// Cap on the number of summed (non-conditioned) spins.
pub const MAX_CONDITIONED_SPINS: usize = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EquivalenceError {
    #[error("{spins} conditioned spins exceeds cap of {cap}")]
    TooLarge { spins: usize, cap: usize },
    #[error("initial layer has {actual} spins, expected {expected}")]
    InitialLayer { expected: usize, actual: usize },
    #[error("need at least one time step")]
    NoSteps,
    #[error(transparent)]
    Lattice(#[from] IsingError),
}

/// `s1 s2 + s1 s3 + s2 s3`, either 3 or −1 for ±1 inputs.
pub fn sigma2(s1: i8, s2: i8, s3: i8) -> i32 {
    let (a, b, c) = (s1 as i32, s2 as i32, s3 as i32);
    a * b + a * c + b * c
}

fn sign_triples() -> impl Iterator<Item = [i8; 3]> {
    (0..8u8).map(|m| [0, 1, 2].map(|k| if m >> k & 1 == 0 { 1 } else { -1 }))
}

/// Max over sign choices of `|ch(β(s1+s2+s3)) − (ch³β + sh²β chβ σ₂)|`.
pub fn cosh_identity_residual<T: Scalar>(beta: T) -> T {
    let (c, s) = (beta.cosh(), beta.sinh());
    sign_triples()
        .map(|[a, b, d]| {
            let lhs = (beta * T::of_int((a + b + d) as i64)).cosh();
            let rhs = c * c * c + s * s * c * T::of_int(sigma2(a, b, d) as i64);
            (lhs - rhs).abs()
        })
        .fold(T::zero(), T::max)
}

/// Max over `σ₂ ∈ {3, −1}` of `|e^{γσ₂} − (ch³γ + sh³γ) − (ch²γ shγ + chγ sh²γ)σ₂|`.
pub fn exp_sigma2_residual<T: Scalar>(gamma: T) -> T {
    let (c, s) = (gamma.cosh(), gamma.sinh());
    [3i64, -1]
        .into_iter()
        .map(|s2| {
            let s2t = T::of_int(s2);
            let lhs = (gamma * s2t).exp();
            let rhs = (c * c * c + s * s * s) + (c * c * s + c * s * s) * s2t;
            (lhs - rhs).abs()
        })
        .fold(T::zero(), T::max)
}

/// `|th²β − thγ / (1 − thγ + th²γ)|`.
pub fn eq3_residual<T: Scalar>(beta: T, gamma: T) -> T {
    let tb = beta.tanh();
    let u = gamma.tanh();
    (tb * tb - u / (T::one() - u + u * u)).abs()
}

/// `γ = ¼ ln(ch 3β / ch β)` via a stable log-cosh.
pub fn gamma_closed_form<T: Scalar>(beta: T) -> T {
    let ln_cosh = |x: T| {
        let a = x.abs();
        a + (-(a + a)).exp().ln_1p() - T::LN_2()
    };
    (ln_cosh(T::of(3.0) * beta) - ln_cosh(beta)) / T::of(4.0)
}

/// Diagonal coupling matched to an inverse gain, with the proportionality
/// constant `C` such that `C·e^{−γσ₂} = 1 / ch(β(s1+s2+s3))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CouplingMap<T> {
    pub beta: T,
    pub gamma: T,
    /// `tanh γ`, the root of `T·u² − (1+T)·u + T = 0` in `[0, 1)`, `T = th²β`.
    pub tanh_gamma: T,
    pub c: T,
}

impl<T: Scalar> CouplingMap<T> {
    /// Max over sign choices of `|C·e^{−γσ₂}·ch(β(s1+s2+s3)) − 1|`.
    pub fn proportionality_residual(&self) -> T {
        sign_triples()
            .map(|[a, b, d]| {
                let h = T::of_int((a + b + d) as i64);
                let s2 = T::of_int(sigma2(a, b, d) as i64);
                (self.c * (-self.gamma * s2).exp() * (self.beta * h).cosh() - T::one()).abs()
            })
            .fold(T::zero(), T::max)
    }
}

/// Solves `th²β = thγ/(1 − thγ + th²γ)` on the branch with `γ(0) = 0`.
pub fn gamma_from_beta<T: Scalar>(beta: T) -> CouplingMap<T> {
    let one = T::one();
    let two = T::of(2.0);
    let three = T::of(3.0);
    let th = beta.tanh();
    let t = th * th;
    // 1 − th²β computed as sech²β to keep precision at large β
    let sech = one / beta.cosh();
    let one_minus_t = sech * sech;
    let s = ((one + three * t) * one_minus_t).sqrt();
    // smaller root, rationalized: the product of the two roots is 1
    let u = two * t / ((one + t) + s);
    // atanh(u) = ½ ln((1+u)/(1−u)), with the quotient simplified symbolically
    let gamma = ((one + three * t + s) / (one_minus_t + s)).ln() / two;
    let c = (-gamma).exp() / beta.cosh();
    CouplingMap { beta, gamma, tanh_gamma: u, c }
}

fn check_slab(lat: &CubicLattice, sigma: &SpinConfig, layer: usize) -> Result<(), IsingError> {
    if !lat.is_time_slab() {
        return Err(IsingError::NotTimeSlab);
    }
    if sigma.len() != lat.num_vertices() {
        return Err(IsingError::DimensionMismatch { expected: lat.num_vertices(), actual: sigma.len() });
    }
    if layer >= lat.dims[2] {
        return Err(IsingError::InvalidLayer { layer, layers: lat.dims[2] });
    }
    Ok(())
}

/// `Π e^{−β s h} / (2 ch(β h))` over vertices above `conditioning_layer`,
/// `h` the sum of the three in-neighbor spins.
pub fn conditional_trajectory_probability<T: Scalar>(
    lat: &CubicLattice,
    sigma: &SpinConfig,
    beta: T,
    conditioning_layer: usize,
) -> Result<T, IsingError> {
    check_slab(lat, sigma, conditioning_layer)?;
    let per_layer = lat.dims[0] * lat.dims[1];
    let two = T::of(2.0);
    let mut p = T::one();
    for v in (conditioning_layer + 1) * per_layer..lat.num_vertices() {
        let h: i64 = lat.in_neighbors(v).expect("above layer 0").iter().map(|&u| sigma.get(u) as i64).sum();
        let h = T::of_int(h);
        let s = T::of_int(sigma.get(v) as i64);
        p = p * (-beta * s * h).exp() / (two * (beta * h).cosh());
    }
    Ok(p)
}

/// Parameters of one exhaustive equivalence run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceSetup<T> {
    pub side: usize,
    pub steps: usize,
    pub beta: T,
    /// Added to the matched `γ`; nonzero values serve as a negative control.
    pub gamma_shift: T,
    pub initial: SpinConfig,
}

impl<T: Scalar> EquivalenceSetup<T> {
    /// Uses a fixed, non-uniform initial layer.
    pub fn new(side: usize, steps: usize, beta: T) -> Self {
        let m = side * side;
        let mut initial = SpinConfig::all_up(m);
        for i in 0..m {
            if (i * 7 + 3) % 5 < 2 {
                initial.set(i, -1);
            }
        }
        Self { side, steps, beta, gamma_shift: T::zero(), initial }
    }

    pub fn with_gamma_shift(mut self, shift: T) -> Self {
        self.gamma_shift = shift;
        self
    }

    pub fn with_initial(mut self, initial: SpinConfig) -> Self {
        self.initial = initial;
        self
    }

    pub fn conditioned_spins(&self) -> usize {
        self.side * self.side * self.steps
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport<T> {
    pub beta: T,
    pub gamma: T,
    pub c: T,
    pub eq1_residual: T,
    pub eq2_residual: T,
    pub eq3_residual: T,
    /// `max |P_traj − e^{H_diag}/Z|` over all conditioned configurations.
    pub max_deviation: T,
    /// `max |P_traj − P_hopfield|` when the side is a multiple of 3.
    pub hopfield_deviation: Option<T>,
    /// `Σ P_traj`.
    pub normalization: T,
    pub configurations: u64,
}

/// Compares the conditional trajectory probability with the diagonal-Ising
/// Gibbs distribution over every configuration of the updated layers.
///
/// When `side` is a multiple of 3 the triangular Hopfield network is also
/// run on the same trajectories (printed sign convention, inverse gain `2β`).
pub fn equivalence_check<T: Scalar>(setup: &EquivalenceSetup<T>) -> Result<EquivalenceReport<T>, EquivalenceError> {
    let n_free = setup.conditioned_spins();
    if n_free > MAX_CONDITIONED_SPINS {
        return Err(EquivalenceError::TooLarge { spins: n_free, cap: MAX_CONDITIONED_SPINS });
    }
    if setup.steps == 0 {
        return Err(EquivalenceError::NoSteps);
    }
    let lat = CubicLattice::time_slab(setup.side, setup.steps + 1)?;
    let m = setup.side * setup.side;
    if setup.initial.len() != m {
        return Err(EquivalenceError::InitialLayer { expected: m, actual: setup.initial.len() });
    }
    let map = gamma_from_beta(setup.beta);
    let gamma = map.gamma + setup.gamma_shift;
    let total = lat.num_vertices();
    let init_bits = setup.initial.low_bits();

    let hopfield = if setup.side.is_multiple_of(3) {
        let (sign, gain) = if setup.beta >= T::zero() {
            (SignConvention::Printed, setup.beta + setup.beta)
        } else {
            (SignConvention::Sigmoid, -(setup.beta + setup.beta))
        };
        let tri = TriangularNet::new(setup.side, gain).map_err(|_| IsingError::EmptyLattice)?;
        Some(tri.to_net().map_err(|_| IsingError::EmptyLattice)?.with_sign(sign))
    } else {
        None
    };
    let hop_prob = |net: &HopfieldNet<T>, field: &SpinConfig| -> T {
        let traj = Trajectory::from_flat(field, m).expect("slab layers");
        net.trajectory_probability(&traj).expect("matching sizes")
    };

    let rows: Vec<(T, T, T)> = (0..1u64 << n_free)
        .into_par_iter()
        .map(|c| {
            let field = SpinConfig::from_bits(total, init_bits | (c << m));
            let p = conditional_trajectory_probability(&lat, &field, setup.beta, 0).expect("valid slab");
            let w = hamiltonian_diag(&lat, &field, setup.beta, gamma, 0).expect("valid slab").exp();
            let ph = hopfield.as_ref().map_or(p, |net| hop_prob(net, &field));
            (p, w, ph)
        })
        .collect();

    let z: T = rows.iter().map(|r| r.1).sum();
    let normalization: T = rows.iter().map(|r| r.0).sum();
    let max_deviation = rows.iter().map(|&(p, w, _)| (p - w / z).abs()).fold(T::zero(), T::max);
    let hopfield_deviation =
        hopfield.as_ref().map(|_| rows.iter().map(|&(p, _, ph)| (p - ph).abs()).fold(T::zero(), T::max));

    Ok(EquivalenceReport {
        beta: setup.beta,
        gamma,
        c: map.c,
        eq1_residual: cosh_identity_residual(setup.beta),
        eq2_residual: exp_sigma2_residual(gamma),
        eq3_residual: eq3_residual(setup.beta, map.gamma),
        max_deviation,
        hopfield_deviation,
        normalization,
        configurations: 1u64 << n_free,
    })
}
