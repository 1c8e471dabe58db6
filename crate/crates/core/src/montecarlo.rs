//! Ground-truth channel simulator: draws the Gaussian NLoS components,
//! assembles the equivalent channel, and estimates the outage probability
//! empirically.
//!
//! Reproducibility contract: the draws of sample `i` are a pure function of
//! `(seed, i)`, so an estimate is bit-identical no matter how samples are
//! sharded across workers. Streams are keyed SplitMix64 sequences: the
//! per-sample state is `mix64(mix64(seed + GAMMA) + i * GAMMA)` and draw
//! `j` is `mix64(state + j * GAMMA)`, with `mix64` the SplitMix64
//! finalizer. Uniforms take the top 53 bits; standard normals come from the
//! Box-Muller transform (one uniform pair per normal pair), so every
//! complex Gaussian consumes exactly two draws. This mapping is part of
//! the output contract and must not change between versions.

use crate::analytic::AnalyticError;
use crate::model::{OutageQuery, PhaseShifts, SystemModel};
use alloc::vec::Vec;
use libm::{cos, log, log2, sin, sqrt};
use num_complex::Complex64;

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic random stream for one Monte Carlo sample.
#[derive(Debug, Clone)]
pub struct SampleStream {
    state: u64,
    draw: u64,
}

impl SampleStream {
    /// Stream for sample `sample_index` of the run keyed by `seed`.
    pub fn new(seed: u64, sample_index: u64) -> Self {
        let root = mix64(seed.wrapping_add(GAMMA));
        Self {
            state: mix64(root.wrapping_add(sample_index.wrapping_mul(GAMMA))),
            draw: 0,
        }
    }

    /// Next raw 64-bit draw.
    pub fn next_u64(&mut self) -> u64 {
        let j = self.draw;
        self.draw += 1;
        mix64(self.state.wrapping_add(j.wrapping_mul(GAMMA)))
    }

    /// Uniform in the open interval (0, 1), from the top 53 bits.
    pub fn next_uniform(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Pair of independent standard normals (Box-Muller).
    pub fn next_normal_pair(&mut self) -> (f64, f64) {
        let u1 = self.next_uniform();
        let u2 = self.next_uniform();
        let r = sqrt(-2.0 * log(u1));
        let phi = crate::model::TWO_PI * u2;
        (r * cos(phi), r * sin(phi))
    }

    /// Circularly-symmetric complex Gaussian with unit total variance:
    /// real and imaginary parts are independent `Normal(0, 1/2)`.
    pub fn next_cn01(&mut self) -> Complex64 {
        let (z0, z1) = self.next_normal_pair();
        Complex64::new(
            z0 * core::f64::consts::FRAC_1_SQRT_2,
            z1 * core::f64::consts::FRAC_1_SQRT_2,
        )
    }
}

/// One draw of all NLoS components: the direct channel's and one per IRS
/// element, shaped like the model.
#[derive(Debug, Clone, PartialEq)]
pub struct NLoSRealization {
    pub nlos_sd: Complex64,
    pub nlos_rd: Vec<Vec<Complex64>>,
}

/// Draw a full NLoS realization from the stream. Order is fixed: the direct
/// component first, then IRS elements in `(k, n)` order.
pub fn sample_nlos(model: &SystemModel, stream: &mut SampleStream) -> NLoSRealization {
    let nlos_sd = stream.next_cn01();
    let nlos_rd = model
        .irss
        .iter()
        .map(|irs| (0..irs.n_elements).map(|_| stream.next_cn01()).collect())
        .collect();
    NLoSRealization { nlos_sd, nlos_rd }
}

/// Precomputed per-element decomposition of the equivalent channel:
/// `h = direct_mean + direct_scale * nlos_sd + sum (mean_kn + scale_kn * nlos_kn)`.
struct LinkTerms {
    direct_mean: Complex64,
    direct_scale: f64,
    /// `(mean, nlos scale)` per element, `(k, n)` order.
    elements: Vec<(Complex64, Complex64)>,
}

impl LinkTerms {
    fn new(model: &SystemModel, phases: &PhaseShifts) -> Result<Self, AnalyticError> {
        if phases.theta.len() != model.irss.len() {
            return Err(AnalyticError::ShapeMismatch {
                irs: None,
                expected: model.irss.len(),
                actual: phases.theta.len(),
            });
        }
        let d = &model.direct;
        let amp = sqrt(d.alpha_sd * d.kappa_sd / (d.kappa_sd + 1.0));
        let direct_mean = Complex64::new(amp * cos(d.los_phase_sd), amp * sin(d.los_phase_sd));
        let direct_scale = sqrt(d.alpha_sd / (d.kappa_sd + 1.0));
        let mut elements = Vec::with_capacity(model.total_elements());
        for (k, (irs, row)) in model.irss.iter().zip(&phases.theta).enumerate() {
            if row.len() != irs.n_elements {
                return Err(AnalyticError::ShapeMismatch {
                    irs: Some(k),
                    expected: irs.n_elements,
                    actual: row.len(),
                });
            }
            let product = irs.alpha_rd * irs.alpha_sr;
            let coef_los = sqrt(product * irs.kappa_rd / (irs.kappa_rd + 1.0));
            let coef_nlos = sqrt(product / (irs.kappa_rd + 1.0));
            for (n, &theta) in row.iter().enumerate() {
                // total LoS phase matches the g_los accumulation exactly
                let total = irs.los_phases_rd[n] + theta + irs.los_phases_sr[n];
                let rotation = irs.los_phases_sr[n] + theta;
                elements.push((
                    Complex64::new(coef_los * cos(total), coef_los * sin(total)),
                    Complex64::new(coef_nlos * cos(rotation), coef_nlos * sin(rotation)),
                ));
            }
        }
        Ok(Self {
            direct_mean,
            direct_scale,
            elements,
        })
    }

    fn channel<I: Iterator<Item = Complex64>>(
        &self,
        nlos_sd: Complex64,
        nlos_elems: I,
    ) -> Complex64 {
        let mut acc = self.direct_mean + self.direct_scale * nlos_sd;
        for ((mean, scale), tilde) in self.elements.iter().zip(nlos_elems) {
            acc += mean + scale * tilde;
        }
        acc
    }

    fn channel_sampled(&self, stream: &mut SampleStream) -> Complex64 {
        let mut acc = self.direct_mean + self.direct_scale * stream.next_cn01();
        for (mean, scale) in &self.elements {
            acc += mean + scale * stream.next_cn01();
        }
        acc
    }
}

/// Assemble the equivalent channel for one NLoS realization.
pub fn equivalent_channel(
    model: &SystemModel,
    phases: &PhaseShifts,
    real: &NLoSRealization,
) -> Result<Complex64, AnalyticError> {
    let terms = LinkTerms::new(model, phases)?;
    if real.nlos_rd.len() != model.irss.len()
        || real
            .nlos_rd
            .iter()
            .zip(&model.irss)
            .any(|(row, irs)| row.len() != irs.n_elements)
    {
        return Err(AnalyticError::ShapeMismatch {
            irs: None,
            expected: model.irss.len(),
            actual: real.nlos_rd.len(),
        });
    }
    Ok(terms.channel(real.nlos_sd, real.nlos_rd.iter().flatten().copied()))
}

/// Instantaneous capacity in bit/s/Hz: `log2(1 + SNR |h|^2)`.
pub fn capacity(h: Complex64, query: &OutageQuery) -> f64 {
    log2(1.0 + query.snr * h.norm_sqr())
}

/// Monte Carlo outage estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    /// Fraction of samples in outage.
    pub p_hat: f64,
    /// Binomial standard error `sqrt(p_hat (1 - p_hat) / n)`.
    pub std_err: f64,
    pub n_samples: u64,
    pub seed: u64,
}

impl McEstimate {
    /// True when no outage was observed at all: the estimate carries no
    /// information beyond an upper bound, and the high-SNR asymptote is the
    /// better tool.
    pub fn rare_event(&self) -> bool {
        self.p_hat == 0.0
    }
}

/// Errors from the Monte Carlo operations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum McError {
    /// Below the minimum sample count.
    TooFewSamples {
        n: u64,
        min: u64,
    },
    Shape(AnalyticError),
}

impl core::fmt::Display for McError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Self::TooFewSamples { n, min } => write!(f, "need at least {min} samples, got {n}"),
            Self::Shape(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for McError {}

impl From<AnalyticError> for McError {
    fn from(e: AnalyticError) -> Self {
        Self::Shape(e)
    }
}

/// Count outage events (`|h|^2` strictly below the threshold) over the
/// given range of sample indices.
///
/// Shardable: concatenating counts over a partition of `0..n` reproduces
/// `estimate_outage` exactly, because sample `i` depends only on
/// `(seed, i)`.
pub fn outage_count(
    model: &SystemModel,
    phases: &PhaseShifts,
    query: &OutageQuery,
    seed: u64,
    samples: core::ops::Range<u64>,
) -> Result<u64, McError> {
    let terms = LinkTerms::new(model, phases)?;
    let threshold = query.threshold();
    let mut count = 0u64;
    for i in samples {
        let mut stream = SampleStream::new(seed, i);
        let h = terms.channel_sampled(&mut stream);
        if h.norm_sqr() < threshold {
            count += 1;
        }
    }
    Ok(count)
}

/// Minimum sample count accepted by [`estimate_outage`].
pub const MIN_SAMPLES: u64 = 1_000;

/// Estimate the outage probability from `n_samples` independent channel
/// draws.
pub fn estimate_outage(
    model: &SystemModel,
    phases: &PhaseShifts,
    query: &OutageQuery,
    n_samples: u64,
    seed: u64,
) -> Result<McEstimate, McError> {
    if n_samples < MIN_SAMPLES {
        return Err(McError::TooFewSamples {
            n: n_samples,
            min: MIN_SAMPLES,
        });
    }
    let count = outage_count(model, phases, query, seed, 0..n_samples)?;
    Ok(estimate_from_count(count, n_samples, seed))
}

/// Form the estimate from a raw outage count (used by parallel drivers that
/// shard [`outage_count`] themselves).
pub fn estimate_from_count(count: u64, n_samples: u64, seed: u64) -> McEstimate {
    let n = n_samples as f64;
    let p_hat = count as f64 / n;
    McEstimate {
        p_hat,
        std_err: sqrt(p_hat * (1.0 - p_hat) / n),
        n_samples,
        seed,
    }
}
