use anyhow::{bail, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use tetra_core::ising::{energy_histogram, hamiltonian_nn, partition_from_histogram, MAX_EXHAUSTIVE_SPINS};
use tetra_core::vertex::{cover_histogram, cover_weight, search_cover, table_candidates, CoverAssignment};
use tetra_core::{CubicLattice, EdgeChoiceTables, SpinConfig};

use super::{emit_json, reject_flag};
use crate::config::{load, non_empty, parse_grid, ZCheckConfig, SCHEMA_VERSION};
use crate::Flags;

const SAMPLE_TOLERANCE: f64 = 1e-12;
const Z_TOLERANCE: f64 = 1e-12;

#[derive(Serialize)]
struct ZRow {
    t: f64,
    z_cover: f64,
    z_direct: f64,
    relative_difference: f64,
}

#[derive(Serialize)]
struct Exhaustive {
    side: usize,
    spins: usize,
    cover: CoverAssignment,
    histograms_equal: bool,
    rows: Vec<ZRow>,
}

#[derive(Serialize)]
struct Sampled {
    side: usize,
    samples: usize,
    cover: CoverAssignment,
    max_relative_error: f64,
}

#[derive(Serialize)]
struct Report {
    schema_version: u32,
    command: &'static str,
    config: ZCheckConfig,
    candidates: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    exhaustive: Option<Exhaustive>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sampled: Option<Sampled>,
    diagnostics: Vec<String>,
    pass: bool,
}

pub fn run(flags: &Flags) -> Result<bool> {
    reject_flag("convention", flags.convention.is_some(), "z-check")?;
    let mut cfg: ZCheckConfig = load(flags.config.as_deref())?;
    if let Some(g) = &flags.grid {
        cfg.t_grid = parse_grid(g)?;
    }
    if let Some(s) = flags.seed {
        cfg.seed = Some(s);
    }
    let Some(seed) = cfg.seed else {
        bail!("z-check samples configurations and needs a seed (--seed or \"seed\" in the config)");
    };
    non_empty("t", &cfg.t_grid)?;
    let spins = cfg.side.pow(3);
    if spins > MAX_EXHAUSTIVE_SPINS {
        bail!("side {} gives {spins} spins, above the exhaustive cap of {MAX_EXHAUSTIVE_SPINS}", cfg.side);
    }
    if cfg.max_period == 0 {
        bail!("max_period must be positive");
    }
    let tables = cfg.tables.clone().unwrap_or_else(EdgeChoiceTables::standard);
    tables.validate()?;
    let candidates = table_candidates(&tables);
    let lat = CubicLattice::periodic(cfg.side)?;
    let big = CubicLattice::periodic(cfg.sample_side)?;
    let mut diagnostics = Vec::new();

    let exhaustive = match search_cover(&lat, &candidates, cfg.max_period) {
        None => {
            diagnostics.push(format!(
                "no periodic cover of the {0}x{0}x{0} torus with period <= {1} from {2} candidate triples",
                cfg.side,
                cfg.max_period,
                candidates.len()
            ));
            None
        }
        Some(cover) => {
            let hc = cover_histogram(&lat, &cover)?;
            let hd = energy_histogram(&lat)?;
            let rows = cfg
                .t_grid
                .iter()
                .map(|&t| {
                    let z_cover = partition_from_histogram(&hc, t);
                    let z_direct = partition_from_histogram(&hd, t);
                    ZRow { t, z_cover, z_direct, relative_difference: (z_cover - z_direct).abs() / z_direct.abs() }
                })
                .collect();
            Some(Exhaustive { side: cfg.side, spins, cover, histograms_equal: hc == hd, rows })
        }
    };

    let sampled = match search_cover(&big, &candidates, cfg.max_period) {
        None => {
            diagnostics.push(format!("no periodic cover of the {0}x{0}x{0} torus", cfg.sample_side));
            None
        }
        Some(cover) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut worst: f64 = 0.0;
            for _ in 0..cfg.samples {
                let s = SpinConfig::random(big.num_vertices(), &mut rng);
                let h = hamiltonian_nn(&big, &s)? as f64;
                for &t in &cfg.t_grid {
                    let direct = (t * h).exp();
                    let product = cover_weight(&big, &cover, t, &s)?;
                    worst = worst.max((product - direct).abs() / direct);
                }
            }
            Some(Sampled { side: cfg.sample_side, samples: cfg.samples, cover, max_relative_error: worst })
        }
    };

    let pass = exhaustive
        .as_ref()
        .is_some_and(|e| e.histograms_equal && e.rows.iter().all(|r| r.relative_difference <= Z_TOLERANCE))
        && sampled.as_ref().is_some_and(|s| s.max_relative_error <= SAMPLE_TOLERANCE);
    for d in &diagnostics {
        eprintln!("{d}");
    }
    let report = Report {
        schema_version: SCHEMA_VERSION,
        command: "z-check",
        config: cfg,
        candidates: candidates.len(),
        exhaustive,
        sampled,
        diagnostics,
        pass,
    };
    emit_json(&report, flags.out.as_deref())?;
    Ok(pass)
}
