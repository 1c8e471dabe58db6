//! Closed-form outage probability: the series kernel `f(a, b, c)` and the
//! channel power aggregates `g_los` / `g_nlos` it is evaluated at.
//!
//! The equivalent channel is complex Gaussian with mean power `g_los` and
//! variance `g_nlos`, so its squared magnitude over `g_nlos` is non-central
//! chi-squared with 2 degrees of freedom. The outage probability is the CDF
//!
//! ```text
//! f(a, b, c) = e^{-a/b} sum_{i>=0} (a/b)^i / i! * gamma(1+i, c/b) / Gamma(1+i)
//! ```
//!
//! evaluated at `a = g_los`, `b = g_nlos`, `c = (2^R - 1)/SNR`, which also
//! equals `1 - Q1(sqrt(2a/b), sqrt(2c/b))` in terms of the Marcum Q
//! function.

use crate::model::{PhaseShifts, SystemModel};
use libm::{cos, exp, expm1, floor, lgamma, log, sin, sqrt};
use num_complex::Complex64;

/// Truncation policy for the series kernel.
///
/// `rel_tol` bounds the discarded tail relative to the accumulated sum;
/// `max_terms` caps the number of series terms per evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControl {
    rel_tol: f64,
    max_terms: usize,
}

impl SeriesControl {
    /// `rel_tol` must be in `(0, 1e-6]` and `max_terms` at least 64.
    pub fn new(rel_tol: f64, max_terms: usize) -> Result<Self, AnalyticError> {
        if !(rel_tol > 0.0 && rel_tol <= 1e-6) {
            return Err(AnalyticError::InvalidControl {
                what: "rel_tol",
                value: rel_tol,
            });
        }
        if max_terms < 64 {
            return Err(AnalyticError::InvalidControl {
                what: "max_terms",
                value: max_terms as f64,
            });
        }
        Ok(Self { rel_tol, max_terms })
    }

    pub fn rel_tol(&self) -> f64 {
        self.rel_tol
    }

    pub fn max_terms(&self) -> usize {
        self.max_terms
    }
}

impl Default for SeriesControl {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            max_terms: 10_000,
        }
    }
}

/// The two scalars that, together with the threshold, determine the outage
/// probability: LoS power and NLoS power of the equivalent channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelMoments {
    pub g_los: f64,
    pub g_nlos: f64,
}

impl ChannelMoments {
    pub fn of(model: &SystemModel, phases: &PhaseShifts) -> Result<Self, AnalyticError> {
        Ok(Self {
            g_los: g_los(model, phases)?,
            g_nlos: g_nlos(model),
        })
    }
}

/// Errors from the analytic operations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnalyticError {
    /// An argument is outside the function's domain.
    Domain { what: &'static str, value: f64 },
    /// Phase-shift shape does not match the model layout.
    ShapeMismatch {
        irs: Option<usize>,
        expected: usize,
        actual: usize,
    },
    /// The series did not meet `rel_tol` within `max_terms`; carries the
    /// partial sum and the tail bound at the point of giving up.
    NotConverged { partial: f64, bound: f64 },
    /// A `SeriesControl` field is out of its allowed range.
    InvalidControl { what: &'static str, value: f64 },
    /// A per-IRS target index is out of range.
    InvalidTarget { index: usize, count: usize },
}

impl core::fmt::Display for AnalyticError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Self::Domain { what, value } => write!(f, "domain error: {what} = {value}"),
            Self::ShapeMismatch {
                irs: Some(k),
                expected,
                actual,
            } => {
                write!(
                    f,
                    "phase row {k} has {actual} entries, model expects {expected}"
                )
            }
            Self::ShapeMismatch {
                irs: None,
                expected,
                actual,
            } => {
                write!(
                    f,
                    "phase matrix has {actual} rows, model has {expected} IRSs"
                )
            }
            Self::NotConverged { partial, bound } => {
                write!(
                    f,
                    "series not converged: partial sum {partial}, tail bound {bound}"
                )
            }
            Self::InvalidControl { what, value } => {
                write!(f, "invalid series control: {what} = {value}")
            }
            Self::InvalidTarget { index, count } => {
                write!(f, "IRS index {index} out of range, model has {count} IRSs")
            }
        }
    }
}

impl core::error::Error for AnalyticError {}

// ---------------------------------------------------------------------------
// Series kernel
// ---------------------------------------------------------------------------

/// Above this value of `a/b` (or of `c/b`) the leading factor `e^{-a/b}`
/// (or `e^{-c/b}`) is too small for the forward recurrences to start from;
/// the evaluation switches to log-domain initialization at the Poisson
/// mode.
const MODE_START_THRESHOLD: f64 = 700.0;

/// Evaluate the series kernel `f(a, b, c)`, clamped to `[0, 1]`.
///
/// Requires `a >= 0`, `b > 0`, `c >= 0`, all finite. The result is the CDF
/// at `c` of the squared magnitude of a complex Gaussian with mean power
/// `a` and variance `b`.
///
/// Terms are generated by the coupled recurrences
/// `p_{i+1} = p_i (a/b)/(i+1)` (Poisson weights) and
/// `G_{i+1} = G_i - e^{-x} x^{i+1}/(i+1)!` with `x = c/b` (regularized
/// lower incomplete gamma at integer order), which avoids factorials and
/// cancellation. Since `G_i` decreases in `i`, the discarded tail after
/// term `m` is at most `(1 - sum_{i<=m} p_i) * G_m`; summation stops once
/// that bound drops below `rel_tol` times the accumulated sum.
pub fn f_series(a: f64, b: f64, c: f64, ctl: SeriesControl) -> Result<f64, AnalyticError> {
    if !(a >= 0.0 && a.is_finite()) {
        return Err(AnalyticError::Domain {
            what: "a",
            value: a,
        });
    }
    if !(b > 0.0 && b.is_finite()) {
        return Err(AnalyticError::Domain {
            what: "b",
            value: b,
        });
    }
    if !(c >= 0.0 && c.is_finite()) {
        return Err(AnalyticError::Domain {
            what: "c",
            value: c,
        });
    }
    if c == 0.0 {
        return Ok(0.0);
    }
    let lambda = a / b;
    let x = c / b;
    if lambda == 0.0 {
        // single surviving term: the exponential CDF
        return Ok(clamp01(-expm1(-x)));
    }
    // Deep lower tail: when the Poisson mass sits far beyond the gamma-CDF
    // decay, the result is ~exp(-(sqrt(lambda)-sqrt(x))^2) and the forward
    // G recurrence bottoms out at its absolute rounding floor (~1e-16 of
    // G_0), destroying relative accuracy. The mode-start scheme keeps G at
    // its own scale and stays relatively accurate there.
    let deep_tail = lambda > x && sqrt(lambda) - sqrt(x) > 4.0;
    if lambda <= MODE_START_THRESHOLD && x <= MODE_START_THRESHOLD && !deep_tail {
        forward_sum(lambda, x, ctl)
    } else {
        mode_start_sum(lambda, x, ctl)
    }
}

fn clamp01(v: f64) -> f64 {
    // anything beyond rounding-level excursions is a bug, not a clamp case
    debug_assert!(
        v > -1e-9 && v < 1.0 + 1e-9,
        "series sum far outside [0,1]: {v}"
    );
    v.clamp(0.0, 1.0)
}

/// Forward summation from `i = 0`. Valid while both `e^{-lambda}` and
/// `e^{-x}` are normal floats.
fn forward_sum(lambda: f64, x: f64, ctl: SeriesControl) -> Result<f64, AnalyticError> {
    let mut p = exp(-lambda); // Poisson weight p_i
    let mut t = exp(-x); // pmf term t_i = e^{-x} x^i / i!
    let mut g = -expm1(-x); // G_i = P(1+i, x), regularized lower gamma
    let mut q = 1.0 - p; // Poisson mass beyond index i
    let mut sum = p * g;
    let mut i = 0usize;
    loop {
        if q * g <= ctl.rel_tol * sum {
            return Ok(clamp01(sum));
        }
        i += 1;
        if i > ctl.max_terms {
            return Err(AnalyticError::NotConverged {
                partial: clamp01(sum),
                bound: q * g,
            });
        }
        let inv = 1.0 / i as f64;
        p *= lambda * inv;
        t *= x * inv;
        g = (g - t).max(0.0);
        q = (q - p).max(0.0);
        sum += p * g;
    }
}

/// Summation anchored at the series' dominant term and expanded outward.
/// Used when `e^{-lambda}` or `e^{-x}` underflows and in the deep lower
/// tail, where it preserves relative accuracy: initial values are computed
/// in the log domain, `G` at the anchor comes from the standard series /
/// continued-fraction evaluation of the regularized incomplete gamma, and
/// the downward pass rebuilds `G` by additions alone.
///
/// The anchor is `min(lambda, sqrt(lambda x))`: the product `p_i G_i`
/// peaks there, so the anchor values are representable whenever the result
/// is. Anchoring at the Poisson mode instead would underflow the gamma
/// factors once `x` falls far enough below `lambda`, even with the result
/// itself far above the underflow threshold.
fn mode_start_sum(lambda: f64, x: f64, ctl: SeriesControl) -> Result<f64, AnalyticError> {
    let anchor = floor(sqrt(lambda * x).min(lambda)) as usize;
    anchored_sum(lambda, x, anchor, ctl)
}

fn anchored_sum(
    lambda: f64,
    x: f64,
    anchor: usize,
    ctl: SeriesControl,
) -> Result<f64, AnalyticError> {
    let i0 = anchor;
    let i0f = i0 as f64;
    let p0 = exp(-lambda + i0f * log(lambda) - lgamma(i0f + 1.0));
    let t0 = exp(-x + i0f * log(x) - lgamma(i0f + 1.0));
    let g0 = regularized_lower_gamma(i0f + 1.0, x)?;

    let mut sum = p0 * g0;
    let mut seen = p0; // total Poisson mass accumulated so far

    // downward from the mode: p shrinks by i/lambda per step, G grows
    // toward 1. Tail below index i is bounded by the geometric sum
    // p_i * r/(1 - r) with r = i/lambda, times G <= 1.
    let mut p = p0;
    let mut t = t0;
    let mut g = g0;
    let mut i = i0;
    while i > 0 {
        let r = i as f64 / lambda;
        if p * r / (1.0 - r) <= 0.5 * ctl.rel_tol * sum {
            break;
        }
        g = (g + t).min(1.0); // G_{i-1} = G_i + t_i
        p *= i as f64 / lambda;
        t *= i as f64 / x;
        i -= 1;
        seen += p;
        sum += p * g;
    }

    // upward from the anchor: G decreases, so the remaining tail after
    // index m is bounded by (1 - seen mass) * G_m, as in the forward
    // scheme. The subtractive recurrence for G is only accurate within a
    // few decades of its last reference value; whenever it has fallen two,
    // re-derive G exactly from the tail product at its own scale.
    let mut p = p0;
    let mut t = t0;
    let mut g = g0;
    let mut g_ref = g0;
    let mut i = i0;
    loop {
        let q = (1.0 - seen).max(0.0);
        if q * g <= 0.5 * ctl.rel_tol * sum {
            return Ok(clamp01(sum));
        }
        i += 1;
        if i - i0 > ctl.max_terms {
            return Err(AnalyticError::NotConverged {
                partial: clamp01(sum),
                bound: q * g,
            });
        }
        let inv = 1.0 / i as f64;
        p *= lambda * inv;
        t *= x * inv;
        g = (g - t).max(0.0);
        if g < 1e-2 * g_ref && x < 0.99 * (i + 2) as f64 {
            g = gamma_from_tail(t * x / (i + 1) as f64, i, x);
            g_ref = g;
        }
        seen += p;
        sum += p * g;
    }
}

/// `G_i = P(1 + i, x)` from the Poisson tail: `t_{i+1} (1 + x/(i+2) +
/// x^2/((i+2)(i+3)) + ...)`. All terms positive, so the value is accurate
/// at its own scale however small; geometrically convergent for `i + 2`
/// above `x` (the caller guards the margin).
fn gamma_from_tail(t_next: f64, i: usize, x: f64) -> f64 {
    let mut total = 1.0_f64;
    let mut term = 1.0_f64;
    let mut m = (i + 2) as f64;
    while term > total * 1e-17 {
        term *= x / m;
        total += term;
        m += 1.0;
    }
    t_next * total
}

/// Regularized lower incomplete gamma `P(s, x) = gamma(s, x)/Gamma(s)` via
/// the power series (x < s + 1) or the Lentz continued fraction for the
/// upper function (x >= s + 1).
fn regularized_lower_gamma(s: f64, x: f64) -> Result<f64, AnalyticError> {
    debug_assert!(s > 0.0 && x >= 0.0);
    if x == 0.0 {
        return Ok(0.0);
    }
    let ln_prefactor = -x + s * log(x) - lgamma(s);
    const MAX_ITER: usize = 50_000;
    if x < s + 1.0 {
        // P(s,x) = prefactor * sum_n x^n / (s (s+1) ... (s+n))
        let mut ap = s;
        let mut term = 1.0 / s;
        let mut total = term;
        for _ in 0..MAX_ITER {
            ap += 1.0;
            term *= x / ap;
            total += term;
            if term.abs() < total.abs() * 1e-17 {
                return Ok(clamp01(exp(ln_prefactor) * total));
            }
        }
    } else {
        // Q(s,x) = prefactor / (x + 1 - s + K_n( n(s - n) / (x + 2n + 1 - s) ))
        let tiny = 1e-300;
        let mut b = x + 1.0 - s;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for n in 1..=MAX_ITER {
            let an = n as f64 * (s - n as f64);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                return Ok(clamp01(1.0 - exp(ln_prefactor) * h));
            }
        }
    }
    Err(AnalyticError::NotConverged {
        partial: f64::NAN,
        bound: f64::NAN,
    })
}

// ---------------------------------------------------------------------------
// Channel power aggregates
// ---------------------------------------------------------------------------

/// LoS power of the equivalent channel for the given phase shifts:
///
/// ```text
/// g_los = | sqrt(a_sd k_sd/(k_sd+1)) e^{j phi_sd}
///          + sum_{k,n} sqrt(a_rd_k a_sr_k k_rd_k/(k_rd_k+1))
///                      e^{j(phi_rd_kn + theta_kn + phi_sr_kn)} |^2
/// ```
///
/// computed by complex accumulation. The phase shifts must match the model
/// shape; the model itself is assumed valid.
pub fn g_los(model: &SystemModel, phases: &PhaseShifts) -> Result<f64, AnalyticError> {
    check_shape(model, phases)?;
    let d = &model.direct;
    let amp = sqrt(d.alpha_sd * d.kappa_sd / (d.kappa_sd + 1.0));
    let mut acc = Complex64::new(amp * cos(d.los_phase_sd), amp * sin(d.los_phase_sd));
    for (irs, row) in model.irss.iter().zip(&phases.theta) {
        let coef = sqrt(irs.alpha_rd * irs.alpha_sr * irs.kappa_rd / (irs.kappa_rd + 1.0));
        for (n, &theta) in row.iter().enumerate() {
            let total = irs.los_phases_rd[n] + theta + irs.los_phases_sr[n];
            acc += Complex64::new(coef * cos(total), coef * sin(total));
        }
    }
    Ok(acc.norm_sqr())
}

/// NLoS power of the equivalent channel; independent of the phase shifts:
///
/// ```text
/// g_nlos = a_sd/(k_sd+1) + sum_k N_k a_rd_k a_sr_k / (k_rd_k + 1)
/// ```
///
/// Strictly positive for every valid model (finite Rician factors, positive
/// path losses).
pub fn g_nlos(model: &SystemModel) -> f64 {
    let d = &model.direct;
    let mut total = d.alpha_sd / (d.kappa_sd + 1.0);
    for irs in &model.irss {
        total += irs.n_elements as f64 * irs.alpha_rd * irs.alpha_sr / (irs.kappa_rd + 1.0);
    }
    total
}

/// Outage probability at the given phase shifts:
/// `f(g_los, g_nlos, (2^R - 1)/SNR)`.
pub fn outage_probability(
    model: &SystemModel,
    phases: &PhaseShifts,
    query: &crate::model::OutageQuery,
    ctl: SeriesControl,
) -> Result<f64, AnalyticError> {
    let moments = ChannelMoments::of(model, phases)?;
    f_series(moments.g_los, moments.g_nlos, query.threshold(), ctl)
}

fn check_shape(model: &SystemModel, phases: &PhaseShifts) -> Result<(), AnalyticError> {
    if phases.theta.len() != model.irss.len() {
        return Err(AnalyticError::ShapeMismatch {
            irs: None,
            expected: model.irss.len(),
            actual: phases.theta.len(),
        });
    }
    for (k, (row, irs)) in phases.theta.iter().zip(&model.irss).enumerate() {
        if row.len() != irs.n_elements {
            return Err(AnalyticError::ShapeMismatch {
                irs: Some(k),
                expected: irs.n_elements,
                actual: row.len(),
            });
        }
    }
    Ok(())
}
