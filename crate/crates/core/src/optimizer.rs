//! Closed-form phase-shift optimization, plus an exhaustive grid-search
//! verifier.
//!
//! The outage probability is strictly decreasing in the LoS power of the
//! equivalent channel, so minimizing outage reduces to aligning every
//! reflected LoS term. With a direct LoS component present, each element's
//! total phase is steered onto the direct link's phase; without one, all
//! reflected terms are steered onto a common phase (canonically zero).
//! Either way the triangle inequality becomes an equality and the LoS
//! amplitudes add up coherently.

use crate::analytic::{f_series, g_nlos, AnalyticError, SeriesControl};
use crate::model::{normalize_phase, OutageQuery, PhaseShifts, SystemModel, TWO_PI};
use alloc::vec;
use libm::sqrt;

/// Which alignment rule produced the optimal phases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimalCase {
    /// Direct LoS present: reflected terms align onto the direct phase.
    DirectLosPresent,
    /// No direct LoS, but at least one reflected LoS term: terms align onto
    /// a common phase.
    DirectLosAbsent,
    /// No LoS anywhere; phases are irrelevant and the LoS power is zero.
    AllLosAbsent,
}

/// Result of the closed-form optimization.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalSolution {
    /// Canonical optimal phase shifts.
    pub phases: PhaseShifts,
    /// Maximum achievable LoS power.
    pub g_los_star: f64,
    /// Outage probability at the optimum.
    pub p_o_star: f64,
    /// Alignment rule that applied.
    pub case: OptimalCase,
}

/// Canonical optimal phase shifts.
///
/// Element `(k, n)` of an IRS with a LoS destination leg gets
/// `theta = (target - phi_rd - phi_sr) mod 2pi`, where `target` is the
/// direct link's LoS phase when it exists and zero otherwise, so each
/// reflected term's total phase lands exactly on `target`. Elements of an
/// IRS with `kappa_rd = 0` contribute nothing to the LoS sum and get
/// `theta = 0`.
pub fn optimal_phases(model: &SystemModel) -> PhaseShifts {
    let target = if model.direct.kappa_sd != 0.0 {
        model.direct.los_phase_sd
    } else {
        0.0
    };
    let theta = model
        .irss
        .iter()
        .map(|irs| {
            if irs.kappa_rd == 0.0 {
                vec![0.0; irs.n_elements]
            } else {
                (0..irs.n_elements)
                    .map(|n| normalize_phase(target - irs.los_phases_rd[n] - irs.los_phases_sr[n]))
                    .collect()
            }
        })
        .collect();
    PhaseShifts { theta }
}

/// Maximum achievable LoS power of the equivalent channel:
///
/// ```text
/// g_los_star = ( sqrt(a_sd k_sd/(k_sd+1))
///              + sum_k N_k sqrt(a_rd_k a_sr_k k_rd_k/(k_rd_k+1)) )^2
/// ```
pub fn g_los_star(model: &SystemModel) -> f64 {
    let d = &model.direct;
    let mut amp = sqrt(d.alpha_sd * d.kappa_sd / (d.kappa_sd + 1.0));
    for irs in &model.irss {
        amp += irs.n_elements as f64
            * sqrt(irs.alpha_rd * irs.alpha_sr * irs.kappa_rd / (irs.kappa_rd + 1.0));
    }
    amp * amp
}

/// Minimize the outage probability in closed form.
pub fn optimal_outage(
    model: &SystemModel,
    query: &OutageQuery,
    ctl: SeriesControl,
) -> Result<OptimalSolution, AnalyticError> {
    let phases = optimal_phases(model);
    let star = g_los_star(model);
    let p_o_star = f_series(star, g_nlos(model), query.threshold(), ctl)?;
    let any_reflected_los = model
        .irss
        .iter()
        .any(|irs| irs.kappa_rd != 0.0 && irs.n_elements > 0);
    let case = if model.direct.kappa_sd != 0.0 {
        OptimalCase::DirectLosPresent
    } else if any_reflected_los {
        OptimalCase::DirectLosAbsent
    } else {
        OptimalCase::AllLosAbsent
    };
    Ok(OptimalSolution {
        phases,
        g_los_star: star,
        p_o_star,
        case,
    })
}

/// Errors from [`grid_search`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridSearchError {
    /// More phase dimensions than the exhaustive budget allows.
    BudgetExceeded { dims: usize, max: usize },
    /// Fewer grid points per dimension than the minimum resolution.
    TooFewPoints { points: usize, min: usize },
    /// An outage evaluation failed at some grid point.
    Analytic(AnalyticError),
}

impl core::fmt::Display for GridSearchError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Self::BudgetExceeded { dims, max } => {
                write!(
                    f,
                    "grid search refused: {dims} phase dimensions exceed the budget of {max}"
                )
            }
            Self::TooFewPoints { points, min } => {
                write!(
                    f,
                    "grid search needs at least {min} points per dimension, got {points}"
                )
            }
            Self::Analytic(e) => write!(f, "grid point evaluation failed: {e}"),
        }
    }
}

impl core::error::Error for GridSearchError {}

impl From<AnalyticError> for GridSearchError {
    fn from(e: AnalyticError) -> Self {
        Self::Analytic(e)
    }
}

/// Total phase dimensions `sum_k N_k` accepted by [`grid_search`].
pub const GRID_SEARCH_MAX_DIMS: usize = 4;

/// Exhaustively minimize the outage probability over the uniform phase grid
/// `{2 pi i / points : i = 0..points}` per element, as an independent check
/// of the closed form.
///
/// Deliberately minimizes the outage probability itself rather than
/// maximizing the LoS power, so both the outage expression and the
/// alignment rule are exercised end to end. Ties resolve to the lowest
/// lexicographic grid index; the first dimension is element 0 of IRS 0.
pub fn grid_search(
    model: &SystemModel,
    query: &OutageQuery,
    points_per_dim: usize,
    ctl: SeriesControl,
) -> Result<(PhaseShifts, f64), GridSearchError> {
    let dims = model.total_elements();
    if dims > GRID_SEARCH_MAX_DIMS {
        return Err(GridSearchError::BudgetExceeded {
            dims,
            max: GRID_SEARCH_MAX_DIMS,
        });
    }
    if points_per_dim < 8 {
        return Err(GridSearchError::TooFewPoints {
            points: points_per_dim,
            min: 8,
        });
    }

    let mut digits = vec![0usize; dims];
    let mut phases = PhaseShifts::zeros(model);
    let mut best_phases = phases.clone();
    let mut best = f64::INFINITY;
    let step = TWO_PI / points_per_dim as f64;

    loop {
        // write current digits into the ragged phase layout
        let mut d = 0;
        for row in &mut phases.theta {
            for slot in row.iter_mut() {
                *slot = digits[d] as f64 * step;
                d += 1;
            }
        }
        let value = crate::analytic::outage_probability(model, &phases, query, ctl)?;
        if value < best {
            best = value;
            best_phases = phases.clone();
        }
        // advance the mixed-radix counter, last dimension fastest
        let mut pos = dims;
        loop {
            if pos == 0 {
                return Ok((best_phases, best));
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < points_per_dim {
                break;
            }
            digits[pos] = 0;
        }
    }
}
