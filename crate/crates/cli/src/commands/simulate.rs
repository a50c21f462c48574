use std::collections::BTreeMap;
use std::fmt::Write as _;

use anyhow::{bail, ensure, Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use tetra_core::hopfield::HopfieldNet;
use tetra_core::{SpinConfig, TriangularNet};

use super::{emit_json, reject_flag};
use crate::config::{load, MonteCarloConfig, NetworkKind, SimulateConfig, StartState, SCHEMA_VERSION};
use crate::Flags;

const PATTERN_STREAM: u64 = 1;
const START_STREAM: u64 = 2;
const MC_STREAM: u64 = 1 << 20;
const TRAJECTORY_STREAM: u64 = 1 << 32;
const MC_CHUNKS: u64 = 64;
/// Expected count below which Monte Carlo cells are pooled.
const MIN_EXPECTED: f64 = 5.0;

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Start state, layers, energies and cumulative log-probabilities.
type Run = (SpinConfig, Vec<SpinConfig>, Vec<f64>, Vec<f64>);

fn signs(s: &SpinConfig) -> String {
    s.to_signs().iter().map(|&v| if v > 0 { '+' } else { '-' }).collect()
}

#[derive(Debug, Serialize)]
pub struct MonteCarloReport {
    pub samples: u64,
    pub cells: usize,
    pub chi_squared: f64,
    pub degrees_of_freedom: usize,
    /// `dof + 4·sqrt(2·dof)`.
    pub threshold: f64,
    pub max_abs_z: f64,
    pub pass: bool,
}

#[derive(Serialize)]
struct Summary {
    schema_version: u32,
    command: &'static str,
    config: SimulateConfig,
    neurons: usize,
    /// Fraction of trajectories whose every layer equals its start.
    persistence: f64,
    mean_final_energy: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    monte_carlo: Option<MonteCarloReport>,
    pass: bool,
}

fn build_net(cfg: &mut SimulateConfig, seed: u64) -> Result<HopfieldNet<f64>> {
    let net = match cfg.network {
        NetworkKind::Triangular => {
            ensure!(cfg.side >= 3, "triangular side must be at least 3");
            TriangularNet::with_weight(cfg.side, cfg.weight, cfg.beta)?.to_net()?
        }
        NetworkKind::Hebbian => {
            if cfg.patterns.is_none() {
                ensure!(cfg.neurons > 0 && cfg.pattern_count > 0, "need neurons and pattern_count > 0");
                let mut rng = stream(seed, PATTERN_STREAM);
                cfg.patterns =
                    Some((0..cfg.pattern_count).map(|_| SpinConfig::random(cfg.neurons, &mut rng)).collect());
            }
            let patterns = cfg.patterns.as_ref().expect("set above");
            HopfieldNet::hebbian(patterns, cfg.beta, cfg.zero_diagonal)?
        }
    };
    Ok(net.with_sign(cfg.sign))
}

fn start_state(cfg: &SimulateConfig, n: usize, rng: &mut ChaCha8Rng) -> Result<SpinConfig> {
    let s = match &cfg.start {
        StartState::Pattern => match (&cfg.network, &cfg.patterns) {
            (NetworkKind::Hebbian, Some(p)) => p[0].clone(),
            _ => SpinConfig::all_up(n),
        },
        StartState::Random => SpinConfig::random(n, rng),
        StartState::Explicit(s) => s.clone(),
    };
    ensure!(s.len() == n, "start state has {} spins, the network {n}", s.len());
    Ok(s)
}

/// One-step frequencies from `x` against exact transition probabilities.
pub fn monte_carlo_check(
    net: &HopfieldNet<f64>,
    x: &SpinConfig,
    mc: &MonteCarloConfig,
    seed: u64,
) -> Result<MonteCarloReport> {
    ensure!(mc.samples > 0, "Monte Carlo needs at least one sample");
    let n = net.size();
    let states = 1usize << n;
    let exact: Vec<f64> = (0..states)
        .map(|k| net.transition_probability(x, &SpinConfig::from_bits(n, k as u64)))
        .collect::<Result<_, _>>()?;
    let per_chunk = mc.samples / MC_CHUNKS;
    let extra = mc.samples % MC_CHUNKS;
    let counts = (0..MC_CHUNKS)
        .into_par_iter()
        .map(|c| -> Result<Vec<u64>> {
            let mut rng = stream(seed, MC_STREAM + c);
            let mut h = vec![0u64; states];
            for _ in 0..per_chunk + u64::from(c < extra) {
                h[net.stochastic_step(x, &mut rng)?.low_bits() as usize] += 1;
            }
            Ok(h)
        })
        .try_reduce(
            || vec![0u64; states],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                Ok(a)
            },
        )?;
    let total = mc.samples as f64;
    let mut chi2 = 0.0;
    let mut cells = 0usize;
    let (mut pooled_obs, mut pooled_exp) = (0.0, 0.0);
    let mut max_z: f64 = 0.0;
    for (k, &p) in exact.iter().enumerate() {
        let (obs, exp) = (counts[k] as f64, p * total);
        if exp > 0.0 {
            max_z = max_z.max((obs - exp).abs() / (exp * (1.0 - p)).sqrt().max(f64::MIN_POSITIVE));
        }
        if exp >= MIN_EXPECTED {
            chi2 += (obs - exp).powi(2) / exp;
            cells += 1;
        } else {
            pooled_obs += obs;
            pooled_exp += exp;
        }
    }
    if pooled_exp > 0.0 {
        chi2 += (pooled_obs - pooled_exp).powi(2) / pooled_exp;
        cells += 1;
    }
    let dof = cells.saturating_sub(1).max(1);
    let threshold = dof as f64 + 4.0 * (2.0 * dof as f64).sqrt();
    Ok(MonteCarloReport {
        samples: mc.samples,
        cells,
        chi_squared: chi2,
        degrees_of_freedom: dof,
        threshold,
        max_abs_z: max_z,
        pass: chi2 <= threshold,
    })
}

pub fn run(flags: &Flags) -> Result<bool> {
    reject_flag("grid", flags.grid.is_some(), "simulate")?;
    reject_flag("convention", flags.convention.is_some(), "simulate")?;
    let mut cfg: SimulateConfig = load(flags.config.as_deref())?;
    if let Some(s) = flags.seed {
        cfg.seed = Some(s);
    }
    let Some(seed) = cfg.seed else {
        bail!("simulate needs a seed (--seed or \"seed\" in the config)");
    };
    let Some(dir) = flags.out.clone() else {
        bail!("simulate needs --out DIR for its CSV files");
    };
    ensure!(cfg.steps > 0 && cfg.trajectories > 0, "steps and trajectories must be positive");
    let net = build_net(&mut cfg, seed)?;
    let n = net.size();
    let shared_start = match cfg.start {
        StartState::Random => None,
        _ => Some(start_state(&cfg, n, &mut stream(seed, START_STREAM))?),
    };

    let runs: Vec<Run> = (0..cfg.trajectories as u64)
        .into_par_iter()
        .map(|k| -> Result<_> {
            let mut rng = stream(seed, TRAJECTORY_STREAM + k);
            let start = match &shared_start {
                Some(s) => s.clone(),
                None => start_state(&cfg, n, &mut rng)?,
            };
            let traj = net.run(&start, cfg.steps, &mut rng)?;
            let layers = traj.layers().to_vec();
            let energies = layers.iter().map(|l| net.energy(l)).collect::<Result<Vec<_>, _>>()?;
            let mut cumulative = vec![0.0];
            for (a, b) in traj.steps() {
                cumulative.push(cumulative.last().copied().unwrap_or(0.0) + net.log_transition_probability(a, b)?);
            }
            Ok((start, layers, energies, cumulative))
        })
        .collect::<Result<_>>()?;

    let mut traj_csv = String::from("trajectory,step,energy,log_probability,state\n");
    let mut finals: BTreeMap<String, u64> = BTreeMap::new();
    let mut persistent = 0usize;
    let mut final_energy = 0.0;
    for (k, (start, layers, energies, logp)) in runs.iter().enumerate() {
        for (step, layer) in layers.iter().enumerate() {
            writeln!(traj_csv, "{k},{step},{},{},{}", energies[step], logp[step], signs(layer))?;
        }
        *finals.entry(signs(layers.last().expect("non-empty"))).or_insert(0) += 1;
        persistent += usize::from(layers.iter().all(|l| l == start));
        final_energy += energies.last().copied().unwrap_or(0.0);
    }
    let mut hist: Vec<(String, u64)> = finals.into_iter().collect();
    hist.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let mut hist_csv = String::from("state,count,frequency\n");
    for (state, count) in &hist {
        writeln!(hist_csv, "{state},{count},{}", *count as f64 / cfg.trajectories as f64)?;
    }

    let monte_carlo = match &cfg.monte_carlo {
        Some(mc) if n <= mc.max_neurons => {
            let x = match &shared_start {
                Some(s) => s.clone(),
                None => start_state(&cfg, n, &mut stream(seed, START_STREAM))?,
            };
            Some(monte_carlo_check(&net, &x, mc, seed)?)
        }
        Some(mc) => bail!("Monte Carlo cross-check needs at most {} neurons, the network has {n}", mc.max_neurons),
        None => None,
    };
    let pass = monte_carlo.as_ref().is_none_or(|m| m.pass);

    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    std::fs::write(dir.join("trajectories.csv"), traj_csv)?;
    std::fs::write(dir.join("histogram.csv"), hist_csv)?;
    let summary = Summary {
        schema_version: SCHEMA_VERSION,
        command: "simulate",
        neurons: n,
        persistence: persistent as f64 / cfg.trajectories as f64,
        mean_final_energy: final_energy / cfg.trajectories as f64,
        config: cfg,
        monte_carlo,
        pass,
    };
    emit_json(&summary, Some(&dir.join("summary.json")))?;
    eprintln!("wrote {} trajectories to {}", summary.config.trajectories, dir.display());
    Ok(pass)
}
