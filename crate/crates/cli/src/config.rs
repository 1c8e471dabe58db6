//! The configuration document: a versioned TOML schema describing a model,
//! a query, optional fixed phase shifts, and an optional sweep.
//!
//! SNR appears in dB in documents and on the command line and is converted
//! once on parse; everything behind the boundary is linear. Angles are
//! radians.
//!
//! ```toml
//! schema_version = 1
//! theta = [0.0, 0.0, 0.0, 0.0]  # optional, flattened (k, n) order,
//!                               # radians; top level, before any section
//!
//! [direct]
//! alpha_sd = 0.8
//! kappa_sd = 2.0
//! los_phase_sd = 0.0        # optional, radians, default 0
//!
//! [[irs]]
//! n_elements = 2
//! alpha_sr = 1.0
//! alpha_rd = 0.6
//! kappa_rd = 10.0
//! los_phases_sr = [0.0, 0.0]   # optional, default all zero
//! los_phases_rd = [0.0, 0.0]
//!
//! [query]
//! rate = 4.0
//! snr_db = 15.0
//!
//! [sweep]                       # optional
//! axis = "snr_db"               # snr_db | K | N_uniform | kappa_rd_uniform | theta_single
//! values = [0.0, 5.0, 10.0, 15.0, 20.0]
//! outputs = ["analytic", "montecarlo"]
//! mc_samples = 1000000          # optional, default 1e6
//! seed = 0                      # optional, default 0
//! theta_index = [0, 0]          # required for axis = "theta_single"
//! # [sweep.template]            # required for axis = "K": an IRS table
//! ```
//!
//! A document may instead reference a named preset, optionally overriding
//! the query:
//!
//! ```toml
//! schema_version = 1
//! preset = "fig2"
//! ```

use crate::sweep::{OutputKind, SweepAxis, SweepSpec};
use crate::CliError;
use risout_core::analytic::SeriesControl;
use risout_core::model::{
    preset as core_preset, DirectLink, IrsSpec, OutageQuery, PhaseShifts, PresetSweep,
    ScenarioPreset, SystemModel,
};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// Default Monte Carlo sample count.
pub const DEFAULT_MC_SAMPLES: u64 = 1_000_000;

// ---------------------------------------------------------------------------
// Document schema
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDoc {
    pub schema_version: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    /// Series truncation tolerance; default 1e-12.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    /// Series term cap; default 10000.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_terms: Option<usize>,
    /// Fixed phase shifts, flattened in (k, n) order. Declared before the
    /// table sections so emission keeps it at the document top level.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direct: Option<DirectSection>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub irs: Vec<IrsSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub query: Option<QuerySection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirectSection {
    pub alpha_sd: f64,
    pub kappa_sd: f64,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub los_phase_sd: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IrsSection {
    pub n_elements: usize,
    pub alpha_sr: f64,
    pub alpha_rd: f64,
    pub kappa_rd: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub los_phases_sr: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub los_phases_rd: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuerySection {
    pub rate: f64,
    pub snr_db: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axis: String,
    pub values: Vec<f64>,
    pub outputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc_samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_index: Option<[usize; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub template: Option<IrsSection>,
}

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

// ---------------------------------------------------------------------------
// Parsed run
// ---------------------------------------------------------------------------

/// Everything a run needs: the validated base objects plus the optional
/// sweep.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model: SystemModel,
    pub query: OutageQuery,
    pub theta: PhaseShifts,
    pub ctl: SeriesControl,
    pub sweep: Option<SweepSpec>,
}

/// Parse and validate a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let doc: ConfigDoc =
        toml::from_str(text).map_err(|e| CliError::Validation(format!("config parse: {e}")))?;
    resolve(doc)
}

/// Turn a parsed document into validated run objects.
pub fn resolve(doc: ConfigDoc) -> Result<RunConfig, CliError> {
    if doc.schema_version != SCHEMA_VERSION {
        return Err(CliError::Validation(format!(
            "schema_version: expected {SCHEMA_VERSION}, got {}",
            doc.schema_version
        )));
    }

    let (model, preset_query, preset_sweep) = match (&doc.preset, &doc.direct) {
        (Some(name), None) => {
            if !doc.irs.is_empty() {
                return Err(CliError::Validation(
                    "preset: cannot combine a preset with [[irs] ] sections".into(),
                ));
            }
            let p = core_preset(name).map_err(|e| CliError::Validation(e.to_string()))?;
            (
                p.model.clone(),
                Some(p.query),
                Some(preset_sweep_section(&p)),
            )
        }
        (None, Some(direct)) => {
            let model = SystemModel {
                direct: DirectLink {
                    alpha_sd: direct.alpha_sd,
                    kappa_sd: direct.kappa_sd,
                    los_phase_sd: direct.los_phase_sd,
                },
                irss: doc
                    .irs
                    .iter()
                    .map(irs_from_section)
                    .collect::<Result<_, _>>()?,
            };
            (model, None, None)
        }
        (Some(_), Some(_)) => {
            return Err(CliError::Validation(
                "preset: cannot combine a preset with a [direct] section".into(),
            ))
        }
        (None, None) => {
            return Err(CliError::Validation(
                "config needs either `preset` or a [direct] section".into(),
            ))
        }
    };

    let violations = model.validate();
    if !violations.is_empty() {
        let lines: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(CliError::Validation(lines.join("; ")));
    }

    let query = match (&doc.query, preset_query) {
        (Some(q), _) => OutageQuery::with_snr_db(q.rate, q.snr_db),
        (None, Some(q)) => q,
        (None, None) => {
            return Err(CliError::Validation(
                "config needs a [query] section".into(),
            ))
        }
    };
    let violations = query.validate();
    if !violations.is_empty() {
        let lines: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(CliError::Validation(lines.join("; ")));
    }

    let theta = match &doc.theta {
        Some(flat) => unflatten_theta(&model, flat)?,
        None => PhaseShifts::zeros(&model),
    };

    let ctl = SeriesControl::new(
        doc.rel_tol.unwrap_or(1e-12),
        doc.max_terms.unwrap_or(10_000),
    )
    .map_err(|e| CliError::Validation(e.to_string()))?;

    let sweep = match (&doc.sweep, preset_sweep) {
        (Some(section), _) => Some(sweep_from_section(
            section,
            &model,
            &query,
            doc.theta.is_some(),
        )?),
        (None, Some(section)) => Some(sweep_from_section(&section, &model, &query, false)?),
        (None, None) => None,
    };

    Ok(RunConfig {
        model,
        query,
        theta,
        ctl,
        sweep,
    })
}

/// Distribute a flat phase list over the model's ragged layout.
pub fn unflatten_theta(model: &SystemModel, flat: &[f64]) -> Result<PhaseShifts, CliError> {
    let want = model.total_elements();
    if flat.len() != want {
        return Err(CliError::Validation(format!(
            "theta: has {} entries, model has {want} elements",
            flat.len()
        )));
    }
    let mut it = flat.iter().copied();
    let theta = model
        .irss
        .iter()
        .map(|irs| (0..irs.n_elements).map(|_| it.next().unwrap()).collect())
        .collect();
    PhaseShifts::new(theta).map_err(|v| CliError::Validation(v.to_string()))
}

fn irs_from_section(s: &IrsSection) -> Result<IrsSpec, CliError> {
    for (name, list) in [
        ("los_phases_sr", &s.los_phases_sr),
        ("los_phases_rd", &s.los_phases_rd),
    ] {
        if let Some(list) = list {
            if list.len() != s.n_elements {
                return Err(CliError::Validation(format!(
                    "irs.{name}: has {} entries but n_elements = {}",
                    list.len(),
                    s.n_elements
                )));
            }
        }
    }
    Ok(IrsSpec {
        n_elements: s.n_elements,
        alpha_sr: s.alpha_sr,
        alpha_rd: s.alpha_rd,
        kappa_rd: s.kappa_rd,
        los_phases_sr: s
            .los_phases_sr
            .clone()
            .unwrap_or_else(|| vec![0.0; s.n_elements]),
        los_phases_rd: s
            .los_phases_rd
            .clone()
            .unwrap_or_else(|| vec![0.0; s.n_elements]),
    })
}

fn sweep_from_section(
    s: &SweepSection,
    model: &SystemModel,
    query: &OutageQuery,
    theta_fixed: bool,
) -> Result<SweepSpec, CliError> {
    if s.values.is_empty() {
        return Err(CliError::Validation(
            "sweep.values: must not be empty".into(),
        ));
    }
    if s.values.iter().any(|v| !v.is_finite()) {
        return Err(CliError::Validation("sweep.values: must be finite".into()));
    }
    if s.values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::Validation(
            "sweep.values: must be strictly increasing".into(),
        ));
    }

    let axis = match s.axis.as_str() {
        "snr_db" => SweepAxis::SnrDb,
        "K" => {
            let t = s.template.as_ref().ok_or_else(|| {
                CliError::Validation("sweep: axis \"K\" needs a [sweep.template] IRS".into())
            })?;
            let template = irs_from_section(t)?;
            let probe = SystemModel { direct: model.direct.clone(), irss: vec![template.clone()] };
            let violations = probe.validate();
            if !violations.is_empty() {
                let lines: Vec<String> =
                    violations.iter().map(|v| format!("sweep.template: {v}")).collect();
                return Err(CliError::Validation(lines.join("; ")));
            }
            if s.values.iter().any(|v| v.fract() != 0.0 || *v < 0.0) {
                return Err(CliError::Validation(
                    "sweep.values: axis \"K\" takes non-negative integers".into(),
                ));
            }
            SweepAxis::IrsCount { template }
        }
        "N_uniform" => {
            if s.values.iter().any(|v| v.fract() != 0.0 || *v < 1.0) {
                return Err(CliError::Validation(
                    "sweep.values: axis \"N_uniform\" takes integers >= 1".into(),
                ));
            }
            SweepAxis::ElementsUniform
        }
        "kappa_rd_uniform" => {
            if s.values.iter().any(|v| *v < 0.0) {
                return Err(CliError::Validation(
                    "sweep.values: axis \"kappa_rd_uniform\" takes values >= 0".into(),
                ));
            }
            SweepAxis::KappaRdUniform
        }
        "theta_single" => {
            let [k, n] = s.theta_index.ok_or_else(|| {
                CliError::Validation("sweep: axis \"theta_single\" needs theta_index = [k, n]".into())
            })?;
            let ok = model.irss.get(k).map(|irs| n < irs.n_elements).unwrap_or(false);
            if !ok {
                return Err(CliError::Validation(format!(
                    "sweep.theta_index: [{k}, {n}] is outside the model layout"
                )));
            }
            SweepAxis::ThetaSingle { k, n }
        }
        other => {
            return Err(CliError::Validation(format!(
                "sweep.axis: unknown axis '{other}'; valid: snr_db, K, N_uniform, kappa_rd_uniform, theta_single"
            )))
        }
    };

    if theta_fixed
        && matches!(
            axis,
            SweepAxis::IrsCount { .. } | SweepAxis::ElementsUniform
        )
    {
        return Err(CliError::Validation(
            "theta: cannot fix phase shifts while the sweep axis changes the model shape".into(),
        ));
    }

    if s.outputs.is_empty() {
        return Err(CliError::Validation(
            "sweep.outputs: must not be empty".into(),
        ));
    }
    let mut outputs = Vec::new();
    for name in &s.outputs {
        let kind = match name.as_str() {
            "analytic" => OutputKind::Analytic,
            "optimal" => OutputKind::Optimal,
            "asymptotic" => OutputKind::Asymptotic,
            "montecarlo" => OutputKind::MonteCarlo,
            other => {
                return Err(CliError::Validation(format!(
                    "sweep.outputs: unknown output '{other}'; valid: analytic, optimal, asymptotic, montecarlo"
                )))
            }
        };
        if !outputs.contains(&kind) {
            outputs.push(kind);
        }
    }
    outputs.sort_by_key(|k| *k as u8);

    if outputs.contains(&OutputKind::Asymptotic) && query.rate == 0.0 {
        return Err(CliError::Validation(
            "sweep.outputs: asymptotic output needs rate > 0".into(),
        ));
    }

    let mc_samples = s.mc_samples.unwrap_or(DEFAULT_MC_SAMPLES);
    if outputs.contains(&OutputKind::MonteCarlo)
        && mc_samples < risout_core::montecarlo::MIN_SAMPLES
    {
        return Err(CliError::Validation(format!(
            "sweep.mc_samples: must be at least {}",
            risout_core::montecarlo::MIN_SAMPLES
        )));
    }

    Ok(SweepSpec {
        axis,
        values: s.values.clone(),
        outputs,
        mc_samples,
        seed: s.seed.unwrap_or(0),
    })
}

// ---------------------------------------------------------------------------
// Emission
// ---------------------------------------------------------------------------

/// Serialize a run back into the canonical document form. Parsing the
/// output reproduces the identical model, query, and phases bit for bit.
pub fn emit_config(cfg: &RunConfig) -> String {
    let doc = ConfigDoc {
        schema_version: SCHEMA_VERSION,
        preset: None,
        rel_tol: Some(cfg.ctl.rel_tol()),
        max_terms: Some(cfg.ctl.max_terms()),
        direct: Some(DirectSection {
            alpha_sd: cfg.model.direct.alpha_sd,
            kappa_sd: cfg.model.direct.kappa_sd,
            los_phase_sd: cfg.model.direct.los_phase_sd,
        }),
        irs: cfg
            .model
            .irss
            .iter()
            .map(|irs| IrsSection {
                n_elements: irs.n_elements,
                alpha_sr: irs.alpha_sr,
                alpha_rd: irs.alpha_rd,
                kappa_rd: irs.kappa_rd,
                los_phases_sr: Some(irs.los_phases_sr.clone()),
                los_phases_rd: Some(irs.los_phases_rd.clone()),
            })
            .collect(),
        query: Some(QuerySection {
            rate: cfg.query.rate,
            snr_db: risout_core::model::linear_to_db(cfg.query.snr),
        }),
        theta: if cfg.theta.theta.iter().flatten().any(|&v| v != 0.0) {
            Some(cfg.theta.theta.iter().flatten().copied().collect())
        } else {
            None
        },
        sweep: cfg.sweep.as_ref().map(sweep_section_from_spec),
    };
    toml::to_string(&doc).expect("document serialization cannot fail")
}

fn sweep_section_from_spec(spec: &SweepSpec) -> SweepSection {
    let (axis, theta_index, template) = match &spec.axis {
        SweepAxis::SnrDb => ("snr_db", None, None),
        SweepAxis::IrsCount { template } => (
            "K",
            None,
            Some(IrsSection {
                n_elements: template.n_elements,
                alpha_sr: template.alpha_sr,
                alpha_rd: template.alpha_rd,
                kappa_rd: template.kappa_rd,
                los_phases_sr: Some(template.los_phases_sr.clone()),
                los_phases_rd: Some(template.los_phases_rd.clone()),
            }),
        ),
        SweepAxis::ElementsUniform => ("N_uniform", None, None),
        SweepAxis::KappaRdUniform => ("kappa_rd_uniform", None, None),
        SweepAxis::ThetaSingle { k, n } => ("theta_single", Some([*k, *n]), None),
    };
    SweepSection {
        axis: axis.into(),
        values: spec.values.clone(),
        outputs: spec.outputs.iter().map(|o| o.name().to_string()).collect(),
        mc_samples: Some(spec.mc_samples),
        seed: Some(spec.seed),
        theta_index,
        template,
    }
}

/// The sweep a named preset is usually plotted over, as a document section.
fn preset_sweep_section(p: &ScenarioPreset) -> SweepSection {
    let (axis, values, template, outputs): (&str, Vec<f64>, Option<&IrsSpec>, Vec<&str>) = match &p
        .sweep
    {
        PresetSweep::SnrDb(dbs) if p.name == "fig4" => {
            ("snr_db", dbs.clone(), None, vec!["optimal", "asymptotic"])
        }
        PresetSweep::SnrDb(dbs) => ("snr_db", dbs.clone(), None, vec!["analytic", "montecarlo"]),
        PresetSweep::IrsCount { template, counts } => (
            "K",
            counts.iter().map(|&c| c as f64).collect(),
            Some(template),
            vec!["optimal"],
        ),
        PresetSweep::ElementsUniform(ns) => (
            "N_uniform",
            ns.iter().map(|&n| n as f64).collect(),
            None,
            vec!["optimal"],
        ),
    };
    SweepSection {
        axis: axis.into(),
        values,
        outputs: outputs.into_iter().map(String::from).collect(),
        mc_samples: Some(DEFAULT_MC_SAMPLES),
        seed: Some(0),
        theta_index: None,
        template: template.map(|t| IrsSection {
            n_elements: t.n_elements,
            alpha_sr: t.alpha_sr,
            alpha_rd: t.alpha_rd,
            kappa_rd: t.kappa_rd,
            los_phases_sr: Some(t.los_phases_sr.clone()),
            los_phases_rd: Some(t.los_phases_rd.clone()),
        }),
    }
}

/// Resolve a named preset into a full run (zero phase shifts, default
/// series control, the preset's figure sweep).
pub fn preset_config(name: &str) -> Result<RunConfig, CliError> {
    let doc = ConfigDoc {
        schema_version: SCHEMA_VERSION,
        preset: Some(name.to_string()),
        rel_tol: None,
        max_terms: None,
        direct: None,
        irs: Vec::new(),
        query: None,
        theta: None,
        sweep: None,
    };
    resolve(doc)
}
