//! Domain types for the multi-IRS link: channel parameters, phase shifts,
//! outage queries, validation, and named preset scenarios.
//!
//! All angles are radians and all powers are linear (not dB) inside this
//! crate; dB conversion belongs at external boundaries.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use libm::pow;

/// Full turn; phases live in `[0, TWO_PI)`.
pub const TWO_PI: f64 = 2.0 * core::f64::consts::PI;

/// Reduce a phase to its canonical representative in `[0, 2pi)`.
///
/// Idempotent: a value already in range is returned unchanged.
pub fn normalize_phase(p: f64) -> f64 {
    let mut r = p % TWO_PI;
    if r < 0.0 {
        r += TWO_PI;
    }
    // p slightly below zero can round up to exactly 2pi
    if r >= TWO_PI {
        r = 0.0;
    }
    r
}

/// Convert a dB power ratio to linear scale.
pub fn db_to_linear(db: f64) -> f64 {
    pow(10.0, db / 10.0)
}

/// Convert a linear power ratio to dB.
pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * libm::log10(linear)
}

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

/// Direct source-to-destination channel, Rician faded.
///
/// The unit-modulus LoS component is stored as its argument only.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectLink {
    /// Path loss, linear power gain (> 0).
    pub alpha_sd: f64,
    /// Rician factor (>= 0, finite). Zero means Rayleigh fading.
    pub kappa_sd: f64,
    /// Argument of the LoS component, radians in `[0, 2pi)`.
    pub los_phase_sd: f64,
}

/// One IRS: element count, the two path-loss legs, the Rician factor of the
/// IRS-to-destination leg, and the per-element LoS phases of both legs.
///
/// The source-to-IRS leg is pure LoS; the IRS-to-destination leg is Rician.
#[derive(Debug, Clone, PartialEq)]
pub struct IrsSpec {
    /// Number of reflecting elements (>= 1).
    pub n_elements: usize,
    /// Source-to-IRS path loss, linear (> 0).
    pub alpha_sr: f64,
    /// IRS-to-destination path loss, linear (> 0).
    pub alpha_rd: f64,
    /// Rician factor of the IRS-to-destination leg (>= 0, finite).
    pub kappa_rd: f64,
    /// Per-element LoS phases of the source-to-IRS leg, radians.
    pub los_phases_sr: Vec<f64>,
    /// Per-element LoS phases of the IRS-to-destination leg, radians.
    pub los_phases_rd: Vec<f64>,
}

impl IrsSpec {
    /// An IRS with `n` elements, the given losses and Rician factor, and
    /// all LoS phases zero.
    pub fn uniform(n: usize, alpha_sr: f64, alpha_rd: f64, kappa_rd: f64) -> Self {
        Self {
            n_elements: n,
            alpha_sr,
            alpha_rd,
            kappa_rd,
            los_phases_sr: vec![0.0; n],
            los_phases_rd: vec![0.0; n],
        }
    }
}

/// The whole link: one direct channel plus `K >= 0` IRSs.
///
/// `K = 0` models the baseline system without IRS assistance. Values are
/// immutable after construction and safe to share across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemModel {
    pub direct: DirectLink,
    pub irss: Vec<IrsSpec>,
}

impl SystemModel {
    /// A model with no IRSs.
    pub fn direct_only(direct: DirectLink) -> Self {
        Self {
            direct,
            irss: Vec::new(),
        }
    }

    /// Total number of reflecting elements over all IRSs.
    pub fn total_elements(&self) -> usize {
        self.irss.iter().map(|irs| irs.n_elements).sum()
    }

    /// Check every invariant and return one entry per violation; an empty
    /// list means the model is valid. Violations are data, not failures.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        check_positive(&mut out, "direct.alpha_sd", self.direct.alpha_sd);
        check_rician(&mut out, "direct.kappa_sd", self.direct.kappa_sd);
        check_phase(&mut out, "direct.los_phase_sd", self.direct.los_phase_sd);
        for (k, irs) in self.irss.iter().enumerate() {
            if irs.n_elements == 0 {
                out.push(Violation::new(
                    format!("irs[{k}].n_elements"),
                    "must be at least 1".into(),
                ));
            }
            check_positive(&mut out, &format!("irs[{k}].alpha_sr"), irs.alpha_sr);
            check_positive(&mut out, &format!("irs[{k}].alpha_rd"), irs.alpha_rd);
            check_rician(&mut out, &format!("irs[{k}].kappa_rd"), irs.kappa_rd);
            for (name, list) in [
                ("los_phases_sr", &irs.los_phases_sr),
                ("los_phases_rd", &irs.los_phases_rd),
            ] {
                if list.len() != irs.n_elements {
                    out.push(Violation::new(
                        format!("irs[{k}].{name}"),
                        format!(
                            "has {} entries but n_elements = {}",
                            list.len(),
                            irs.n_elements
                        ),
                    ));
                }
                for (n, &p) in list.iter().enumerate() {
                    check_phase(&mut out, &format!("irs[{k}].{name}[{n}]"), p);
                }
            }
        }
        out
    }
}

fn check_positive(out: &mut Vec<Violation>, path: &str, v: f64) {
    if !(v > 0.0 && v.is_finite()) {
        out.push(Violation::new(
            path.into(),
            format!("must be positive and finite, got {v}"),
        ));
    }
}

fn check_rician(out: &mut Vec<Violation>, path: &str, v: f64) {
    // kappa -> infinity (pure LoS) is rejected: it degenerates the NLoS power
    if !(v >= 0.0 && v.is_finite()) {
        out.push(Violation::new(
            path.into(),
            format!("must be >= 0 and finite, got {v}"),
        ));
    }
}

fn check_phase(out: &mut Vec<Violation>, path: &str, v: f64) {
    if !(v.is_finite() && (0.0..TWO_PI).contains(&v)) {
        out.push(Violation::new(
            path.into(),
            format!("must be a radian in [0, 2pi), got {v}"),
        ));
    }
}

/// A single invariant violation: which field, and what is wrong with it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl Violation {
    fn new(path: String, message: String) -> Self {
        Self { path, message }
    }
}

impl core::fmt::Display for Violation {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

/// Phase shifts applied by the IRS elements: `theta[k][n]` is the shift of
/// element `n` of IRS `k`, radians in `[0, 2pi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseShifts {
    pub theta: Vec<Vec<f64>>,
}

impl PhaseShifts {
    /// Build from raw angles, normalizing every entry into `[0, 2pi)`.
    /// Non-finite entries are rejected.
    pub fn new(theta: Vec<Vec<f64>>) -> Result<Self, Violation> {
        for (k, row) in theta.iter().enumerate() {
            for (n, &p) in row.iter().enumerate() {
                if !p.is_finite() {
                    return Err(Violation::new(
                        format!("theta[{k}][{n}]"),
                        format!("must be finite, got {p}"),
                    ));
                }
            }
        }
        let theta = theta
            .into_iter()
            .map(|row| row.into_iter().map(normalize_phase).collect())
            .collect();
        Ok(Self { theta })
    }

    /// All-zero shifts shaped like `model`.
    pub fn zeros(model: &SystemModel) -> Self {
        Self {
            theta: model
                .irss
                .iter()
                .map(|irs| vec![0.0; irs.n_elements])
                .collect(),
        }
    }

    /// True when the ragged shape matches the model's IRS layout.
    pub fn shape_matches(&self, model: &SystemModel) -> bool {
        self.theta.len() == model.irss.len()
            && self
                .theta
                .iter()
                .zip(&model.irss)
                .all(|(row, irs)| row.len() == irs.n_elements)
    }

    /// Total number of entries.
    pub fn len(&self) -> usize {
        self.theta.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Rate/SNR pair defining the outage event `C < R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageQuery {
    /// Target rate, bit/s/Hz (>= 0).
    pub rate: f64,
    /// Transmit SNR, linear power ratio (> 0).
    pub snr: f64,
}

impl OutageQuery {
    pub fn new(rate: f64, snr: f64) -> Self {
        Self { rate, snr }
    }

    /// Same, with the SNR quoted in dB.
    pub fn with_snr_db(rate: f64, snr_db: f64) -> Self {
        Self {
            rate,
            snr: db_to_linear(snr_db),
        }
    }

    /// Outage threshold on the channel power: `(2^R - 1)/SNR`.
    /// Zero exactly when `rate` is zero.
    pub fn threshold(&self) -> f64 {
        (libm::exp2(self.rate) - 1.0) / self.snr
    }

    /// Invariant check, mirroring [`SystemModel::validate`].
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if !(self.rate >= 0.0 && self.rate.is_finite()) {
            out.push(Violation::new(
                "query.rate".into(),
                format!("must be >= 0 and finite, got {}", self.rate),
            ));
        }
        if !(self.snr > 0.0 && self.snr.is_finite()) {
            out.push(Violation::new(
                "query.snr".into(),
                format!("must be positive and finite, got {}", self.snr),
            ));
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Preset scenarios
// ---------------------------------------------------------------------------

/// Sweep recommended by a preset scenario.
#[derive(Debug, Clone, PartialEq)]
pub enum PresetSweep {
    /// Sweep the transmit SNR over the given dB values.
    SnrDb(Vec<f64>),
    /// Sweep the number of IRSs, replicating `template` per count.
    IrsCount {
        template: IrsSpec,
        counts: Vec<usize>,
    },
    /// Sweep a common element count applied to every IRS.
    ElementsUniform(Vec<usize>),
}

/// A named parameter set: base model, query, and the sweep the scenario is
/// usually plotted over.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioPreset {
    pub name: &'static str,
    pub model: SystemModel,
    pub query: OutageQuery,
    pub sweep: PresetSweep,
}

/// Unknown preset name; lists the valid ones.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownPreset {
    pub name: String,
}

impl core::fmt::Display for UnknownPreset {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(
            f,
            "unknown preset '{}'; valid presets: {}",
            self.name,
            PRESET_NAMES.join(", ")
        )
    }
}

impl core::error::Error for UnknownPreset {}

/// Names accepted by [`preset`].
pub const PRESET_NAMES: [&str; 4] = ["fig2", "fig3a", "fig3b", "fig4"];

/// Look up a named scenario.
///
/// All four scenarios use rate 4 bit/s/Hz and all-zero LoS phases:
///
/// * `fig2` — two 2-element IRSs with a strong direct link; SNR sweep
///   0..20 dB.
/// * `fig3a` — IRS-count sweep 0..8, replicating a 20-element template with
///   symmetric 0.01 path losses.
/// * `fig3b` — two IRSs with asymmetric losses; uniform element-count sweep
///   1..64.
/// * `fig4` — two 8-element IRSs with weak reflected paths; high-SNR sweep
///   30..50 dB.
pub fn preset(name: &str) -> Result<ScenarioPreset, UnknownPreset> {
    match name {
        "fig2" => Ok(ScenarioPreset {
            name: "fig2",
            model: SystemModel {
                direct: DirectLink {
                    alpha_sd: 0.8,
                    kappa_sd: 2.0,
                    los_phase_sd: 0.0,
                },
                irss: vec![
                    IrsSpec::uniform(2, 1.0, 0.6, 10.0),
                    IrsSpec::uniform(2, 1.0, 0.1, 15.0),
                ],
            },
            query: OutageQuery::with_snr_db(4.0, 15.0),
            sweep: PresetSweep::SnrDb(vec![0.0, 5.0, 10.0, 15.0, 20.0]),
        }),
        "fig3a" => {
            let template = IrsSpec::uniform(20, 0.01, 0.01, 10.0);
            Ok(ScenarioPreset {
                name: "fig3a",
                model: SystemModel {
                    direct: DirectLink {
                        alpha_sd: 0.5,
                        kappa_sd: 3.0,
                        los_phase_sd: 0.0,
                    },
                    irss: vec![template.clone(), template.clone()],
                },
                query: OutageQuery::with_snr_db(4.0, 15.0),
                sweep: PresetSweep::IrsCount {
                    template,
                    counts: (0..=8).collect(),
                },
            })
        }
        "fig3b" => Ok(ScenarioPreset {
            name: "fig3b",
            model: SystemModel {
                direct: DirectLink {
                    alpha_sd: 0.5,
                    kappa_sd: 3.0,
                    los_phase_sd: 0.0,
                },
                irss: vec![
                    IrsSpec::uniform(20, 0.01, 0.01, 10.0),
                    IrsSpec::uniform(20, 0.05, 0.05, 15.0),
                ],
            },
            query: OutageQuery::with_snr_db(4.0, 15.0),
            sweep: PresetSweep::ElementsUniform((1..=64).collect()),
        }),
        "fig4" => Ok(ScenarioPreset {
            name: "fig4",
            model: SystemModel {
                direct: DirectLink {
                    alpha_sd: 0.5,
                    kappa_sd: 3.0,
                    los_phase_sd: 0.0,
                },
                irss: vec![
                    IrsSpec::uniform(8, 0.01, 0.01, 10.0),
                    IrsSpec::uniform(8, 0.05, 0.05, 10.0),
                ],
            },
            query: OutageQuery::with_snr_db(4.0, 40.0),
            sweep: PresetSweep::SnrDb(vec![30.0, 35.0, 40.0, 45.0, 50.0]),
        }),
        other => Err(UnknownPreset { name: other.into() }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_valid_model() -> SystemModel {
        SystemModel {
            direct: DirectLink {
                alpha_sd: 0.8,
                kappa_sd: 2.0,
                los_phase_sd: 0.0,
            },
            irss: vec![IrsSpec::uniform(2, 1.0, 0.5, 3.0)],
        }
    }

    #[test]
    fn valid_model_has_no_violations() {
        assert!(small_valid_model().validate().is_empty());
    }

    #[test]
    fn negative_path_loss_is_named() {
        let mut m = small_valid_model();
        m.direct.alpha_sd = -1.0;
        let v = m.validate();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].path, "direct.alpha_sd");
    }

    #[test]
    fn phase_list_shape_mismatch_is_named() {
        let mut m = small_valid_model();
        m.irss[0].los_phases_sr = vec![0.0, 0.0, 0.0];
        let v = m.validate();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].path, "irs[0].los_phases_sr");
    }

    #[test]
    fn infinite_kappa_is_rejected() {
        let mut m = small_valid_model();
        m.direct.kappa_sd = f64::INFINITY;
        assert_eq!(m.validate().len(), 1);
    }

    #[test]
    fn out_of_range_phase_is_rejected() {
        let mut m = small_valid_model();
        m.irss[0].los_phases_rd[1] = TWO_PI;
        let v = m.validate();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].path, "irs[0].los_phases_rd[1]");
    }

    #[test]
    fn normalize_phase_is_canonical_and_idempotent() {
        for &p in &[
            -10.0,
            -TWO_PI,
            -1e-17,
            0.0,
            1.0,
            TWO_PI,
            TWO_PI + 0.5,
            123.456,
        ] {
            let r = normalize_phase(p);
            assert!((0.0..TWO_PI).contains(&r), "p={p} -> r={r}");
            assert_eq!(normalize_phase(r), r, "not idempotent at p={p}");
        }
        // representative values
        assert_eq!(normalize_phase(0.0), 0.0);
        assert!((normalize_phase(-core::f64::consts::PI) - core::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn phase_shifts_are_normalized_on_construction() {
        let p = PhaseShifts::new(vec![vec![-1.0, TWO_PI + 1.0]]).unwrap();
        assert!((p.theta[0][0] - (TWO_PI - 1.0)).abs() < 1e-15);
        assert!((p.theta[0][1] - 1.0).abs() < 1e-15);
        assert!(PhaseShifts::new(vec![vec![f64::NAN]]).is_err());
    }

    #[test]
    fn threshold_is_zero_iff_rate_zero() {
        assert_eq!(OutageQuery::new(0.0, 5.0).threshold(), 0.0);
        assert!(OutageQuery::new(1e-12, 5.0).threshold() > 0.0);
        let q = OutageQuery::with_snr_db(4.0, 15.0);
        assert!((q.threshold() - 15.0 / db_to_linear(15.0)).abs() < 1e-15);
    }

    #[test]
    fn preset_fig2_matches_caption_parameters() {
        let p = preset("fig2").unwrap();
        assert_eq!(p.model.irss.len(), 2);
        assert_eq!(p.model.direct.alpha_sd, 0.8);
        assert_eq!(p.model.direct.kappa_sd, 2.0);
        assert_eq!(p.model.irss[0].alpha_sr, 1.0);
        assert_eq!(p.model.irss[0].alpha_rd, 0.6);
        assert_eq!(p.model.irss[0].kappa_rd, 10.0);
        assert_eq!(p.model.irss[1].alpha_rd, 0.1);
        assert_eq!(p.model.irss[1].kappa_rd, 15.0);
        assert_eq!(p.query.rate, 4.0);
        assert!(p.model.validate().is_empty());
    }

    #[test]
    fn preset_fig4_matches_caption_parameters() {
        let p = preset("fig4").unwrap();
        assert_eq!(p.model.irss.len(), 2);
        assert_eq!(p.model.irss[0].n_elements, 8);
        assert_eq!(p.model.direct.alpha_sd, 0.5);
        assert_eq!(p.model.direct.kappa_sd, 3.0);
        assert_eq!(p.model.irss[0].alpha_sr, 0.01);
        assert_eq!(p.model.irss[1].alpha_sr, 0.05);
        assert_eq!(p.query.rate, 4.0);
    }

    #[test]
    fn unknown_preset_lists_valid_names() {
        let err = preset("fig9").unwrap_err();
        let msg = alloc::string::ToString::to_string(&err);
        for name in PRESET_NAMES {
            assert!(msg.contains(name), "{msg}");
        }
    }

    #[test]
    fn all_presets_validate() {
        for name in PRESET_NAMES {
            let p = preset(name).unwrap();
            assert!(p.model.validate().is_empty(), "{name}");
            assert!(p.query.validate().is_empty(), "{name}");
        }
    }
}
