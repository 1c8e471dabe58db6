//! Parameter sweeps: one row per axis value, selected outputs as columns,
//! CSV out.
//!
//! Output is deterministic for a fixed document and seed: Monte Carlo
//! columns shard sample index ranges whose counts are summed as integers,
//! so the bytes do not depend on the worker count. Decimal separator is
//! `.`, field separator `,`, one header row, `\n` line endings, values in
//! shortest round-trip scientific notation.

use crate::config::RunConfig;
use crate::{fmt_full, CliError};
use rayon::prelude::*;
use risout_core::analytic::outage_probability;
use risout_core::asymptotic::asymptotic_outage;
use risout_core::model::{normalize_phase, IrsSpec, OutageQuery, PhaseShifts, SystemModel};
use risout_core::montecarlo::{estimate_from_count, outage_count, McEstimate, MIN_SAMPLES};
use risout_core::optimizer::optimal_outage;

/// Quantity requested per sweep row. The discriminant fixes the canonical
/// column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputKind {
    /// Outage probability at the given phase shifts (`p_o`).
    Analytic = 0,
    /// Optimal outage probability (`p_o_star`).
    Optimal = 1,
    /// High-SNR asymptote of the optimum (`p_tilde`).
    Asymptotic = 2,
    /// Monte Carlo estimate at the given phase shifts
    /// (`mc_p_hat`, `mc_std_err`).
    MonteCarlo = 3,
}

impl OutputKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Analytic => "analytic",
            Self::Optimal => "optimal",
            Self::Asymptotic => "asymptotic",
            Self::MonteCarlo => "montecarlo",
        }
    }

    fn columns(&self) -> &'static [&'static str] {
        match self {
            Self::Analytic => &["p_o"],
            Self::Optimal => &["p_o_star"],
            Self::Asymptotic => &["p_tilde"],
            Self::MonteCarlo => &["mc_p_hat", "mc_std_err"],
        }
    }
}

/// What the sweep varies.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepAxis {
    /// Transmit SNR in dB.
    SnrDb,
    /// Number of IRSs; each count materializes that many copies of the
    /// template.
    IrsCount { template: IrsSpec },
    /// Common element count applied to every IRS (LoS phase lists are
    /// zero-padded or truncated to fit).
    ElementsUniform,
    /// Common IRS-to-destination Rician factor applied to every IRS.
    KappaRdUniform,
    /// One phase shift `theta[k][n]`, radians.
    ThetaSingle { k: usize, n: usize },
}

impl SweepAxis {
    /// Header label of the axis column.
    pub fn label(&self) -> &'static str {
        match self {
            Self::SnrDb => "snr_db",
            Self::IrsCount { .. } => "K",
            Self::ElementsUniform => "N_uniform",
            Self::KappaRdUniform => "kappa_rd_uniform",
            Self::ThetaSingle { .. } => "theta_single",
        }
    }
}

/// A validated sweep: ordered axis values, deduplicated outputs in
/// canonical order, Monte Carlo budget and seed.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub outputs: Vec<OutputKind>,
    pub mc_samples: u64,
    pub seed: u64,
}

/// Run the sweep and return the CSV table.
pub fn run_sweep(cfg: &RunConfig, threads: usize) -> Result<String, CliError> {
    let spec = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Usage("the configuration has no sweep".into()))?;
    let pool = build_pool(threads)?;

    let mut csv = String::new();
    csv.push_str(spec.axis.label());
    for kind in &spec.outputs {
        for col in kind.columns() {
            csv.push(',');
            csv.push_str(col);
        }
    }
    csv.push('\n');

    for &value in &spec.values {
        let row = sweep_row(cfg, spec, value, &pool)
            .map_err(|e| annotate_axis(e, spec.axis.label(), value))?;
        csv.push_str(&row);
        csv.push('\n');
    }
    Ok(csv)
}

fn annotate_axis(e: CliError, label: &str, value: f64) -> CliError {
    let note = format!("at {label} = {value}: ");
    match e {
        CliError::Usage(m) => CliError::Usage(note + &m),
        CliError::Validation(m) => CliError::Validation(note + &m),
        CliError::Numeric(m) => CliError::Numeric(note + &m),
    }
}

fn sweep_row(
    cfg: &RunConfig,
    spec: &SweepSpec,
    value: f64,
    pool: &rayon::ThreadPool,
) -> Result<String, CliError> {
    let (model, query, theta) = materialize(cfg, &spec.axis, value)?;
    let mut row = format!("{value}");
    for kind in &spec.outputs {
        match kind {
            OutputKind::Analytic => {
                let p = outage_probability(&model, &theta, &query, cfg.ctl)?;
                row.push(',');
                row.push_str(&fmt_full(p));
            }
            OutputKind::Optimal => {
                let sol = optimal_outage(&model, &query, cfg.ctl)?;
                row.push(',');
                row.push_str(&fmt_full(sol.p_o_star));
            }
            OutputKind::Asymptotic => {
                let r = asymptotic_outage(&model, &query, cfg.ctl)?;
                row.push(',');
                row.push_str(&fmt_full(r.p_tilde));
            }
            OutputKind::MonteCarlo => {
                let est =
                    estimate_parallel(&model, &theta, &query, spec.mc_samples, spec.seed, pool)?;
                row.push(',');
                row.push_str(&fmt_full(est.p_hat));
                row.push(',');
                row.push_str(&fmt_full(est.std_err));
            }
        }
    }
    Ok(row)
}

/// Instantiate the model/query/phases for one axis value.
fn materialize(
    cfg: &RunConfig,
    axis: &SweepAxis,
    value: f64,
) -> Result<(SystemModel, OutageQuery, PhaseShifts), CliError> {
    match axis {
        SweepAxis::SnrDb => Ok((
            cfg.model.clone(),
            OutageQuery::with_snr_db(cfg.query.rate, value),
            cfg.theta.clone(),
        )),
        SweepAxis::IrsCount { template } => {
            let count = value as usize;
            let model = SystemModel {
                direct: cfg.model.direct.clone(),
                irss: vec![template.clone(); count],
            };
            let theta = PhaseShifts::zeros(&model);
            Ok((model, cfg.query, theta))
        }
        SweepAxis::ElementsUniform => {
            let n = value as usize;
            let mut model = cfg.model.clone();
            for irs in &mut model.irss {
                irs.n_elements = n;
                irs.los_phases_sr.resize(n, 0.0);
                irs.los_phases_rd.resize(n, 0.0);
            }
            let theta = PhaseShifts::zeros(&model);
            Ok((model, cfg.query, theta))
        }
        SweepAxis::KappaRdUniform => {
            let mut model = cfg.model.clone();
            for irs in &mut model.irss {
                irs.kappa_rd = value;
            }
            Ok((model, cfg.query, cfg.theta.clone()))
        }
        SweepAxis::ThetaSingle { k, n } => {
            let mut theta = cfg.theta.clone();
            theta.theta[*k][*n] = normalize_phase(value);
            Ok((cfg.model.clone(), cfg.query, theta))
        }
    }
}

/// Samples per shard for parallel counting.
const SHARD: u64 = 1 << 16;

/// Monte Carlo estimate with the samples sharded over a thread pool.
/// Bit-identical to the sequential estimate for any worker count.
pub fn estimate_parallel(
    model: &SystemModel,
    phases: &PhaseShifts,
    query: &OutageQuery,
    n_samples: u64,
    seed: u64,
    pool: &rayon::ThreadPool,
) -> Result<McEstimate, CliError> {
    if n_samples < MIN_SAMPLES {
        return Err(CliError::Validation(format!(
            "mc_samples: must be at least {MIN_SAMPLES}, got {n_samples}"
        )));
    }
    let shards: Vec<std::ops::Range<u64>> = (0..n_samples)
        .step_by(SHARD as usize)
        .map(|start| start..(start + SHARD).min(n_samples))
        .collect();
    let counts: Result<Vec<u64>, _> = pool.install(|| {
        shards
            .into_par_iter()
            .map(|range| outage_count(model, phases, query, seed, range))
            .collect()
    });
    let total: u64 = counts.map_err(CliError::from)?.iter().sum();
    Ok(estimate_from_count(total, n_samples, seed))
}

/// A dedicated pool so the worker count is an explicit, reproducible input.
pub fn build_pool(threads: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))
}
