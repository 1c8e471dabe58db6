//! High-SNR behavior of the optimal outage probability.
//!
//! As the SNR grows, the optimal outage probability approaches
//!
//! ```text
//! p_tilde(SNR) = (2^R - 1) / (g_nlos * SNR) * exp(-g_los_star / g_nlos)
//! ```
//!
//! which is inversely proportional to the SNR and strictly decreasing in
//! every Rician factor.

use crate::analytic::{f_series, g_nlos, AnalyticError, SeriesControl};
use crate::model::{OutageQuery, SystemModel};
use crate::optimizer::g_los_star;
use libm::exp;

/// Exact values this small are treated as underflowed and excluded from the
/// ratio diagnostic.
const UNDERFLOW_FLOOR: f64 = 1e-300;

/// Asymptote evaluation.
///
/// `p_tilde` is an asymptote, not a probability: it is reported unclamped
/// and may exceed 1 at low SNR. `ratio_to_exact` is `p_o_star / p_tilde`
/// when the exact series value is representable, and absent when it
/// underflows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoteResult {
    pub p_tilde: f64,
    pub ratio_to_exact: Option<f64>,
}

/// Evaluate the high-SNR asymptote of the optimal outage probability.
///
/// Requires `rate > 0` (at zero rate the asymptote is identically zero and
/// the ratio undefined) and a positive finite SNR.
pub fn asymptotic_outage(
    model: &SystemModel,
    query: &OutageQuery,
    ctl: SeriesControl,
) -> Result<AsymptoteResult, AnalyticError> {
    if !(query.rate > 0.0 && query.rate.is_finite()) {
        return Err(AnalyticError::Domain {
            what: "rate",
            value: query.rate,
        });
    }
    if !(query.snr > 0.0 && query.snr.is_finite()) {
        return Err(AnalyticError::Domain {
            what: "snr",
            value: query.snr,
        });
    }
    let nlos = g_nlos(model);
    let star = g_los_star(model);
    let p_tilde = p_tilde_from(star, nlos, query);
    let exact = f_series(star, nlos, query.threshold(), ctl)?;
    let ratio_to_exact = if exact >= UNDERFLOW_FLOOR && p_tilde >= UNDERFLOW_FLOOR {
        Some(exact / p_tilde)
    } else {
        None
    };
    Ok(AsymptoteResult {
        p_tilde,
        ratio_to_exact,
    })
}

fn p_tilde_from(star: f64, nlos: f64, query: &OutageQuery) -> f64 {
    query.threshold() / nlos * exp(-star / nlos)
}

/// Which Rician factor [`kappa_sensitivity`] perturbs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KappaTarget {
    /// The direct link's factor.
    Direct,
    /// The IRS-to-destination factor of the given IRS.
    IrsRd(usize),
}

/// Asymptote before and after incrementing one Rician factor by `delta`,
/// everything else held fixed. The asymptote is strictly decreasing in
/// every Rician factor, so `after < before` whenever `delta > 0`.
pub fn kappa_sensitivity(
    model: &SystemModel,
    query: &OutageQuery,
    target: KappaTarget,
    delta: f64,
) -> Result<(f64, f64), AnalyticError> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(AnalyticError::Domain {
            what: "delta",
            value: delta,
        });
    }
    if !(query.rate > 0.0 && query.rate.is_finite()) {
        return Err(AnalyticError::Domain {
            what: "rate",
            value: query.rate,
        });
    }
    let mut bumped = model.clone();
    match target {
        KappaTarget::Direct => bumped.direct.kappa_sd += delta,
        KappaTarget::IrsRd(k) => {
            let count = bumped.irss.len();
            let irs = bumped
                .irss
                .get_mut(k)
                .ok_or(AnalyticError::InvalidTarget { index: k, count })?;
            irs.kappa_rd += delta;
        }
    }
    let before = p_tilde_from(g_los_star(model), g_nlos(model), query);
    let after = p_tilde_from(g_los_star(&bumped), g_nlos(&bumped), query);
    Ok((before, after))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{preset, DirectLink};

    fn ctl() -> SeriesControl {
        SeriesControl::default()
    }

    #[test]
    fn rayleigh_direct_link_value() {
        // g_los_star = 0, g_nlos = 1: p_tilde = (2^1 - 1)/10 = 0.1
        let model = SystemModel::direct_only(DirectLink {
            alpha_sd: 1.0,
            kappa_sd: 0.0,
            los_phase_sd: 0.0,
        });
        let q = OutageQuery::new(1.0, 10.0);
        let r = asymptotic_outage(&model, &q, ctl()).unwrap();
        assert!((r.p_tilde - 0.1).abs() < 1e-16);
    }

    #[test]
    fn zero_rate_is_a_domain_error() {
        let p = preset("fig4").unwrap();
        let q = OutageQuery::new(0.0, 100.0);
        assert!(matches!(
            asymptotic_outage(&p.model, &q, ctl()),
            Err(AnalyticError::Domain { what: "rate", .. })
        ));
    }

    #[test]
    fn doubling_snr_halves_p_tilde_exactly() {
        let p = preset("fig4").unwrap();
        let q1 = OutageQuery::new(4.0, 1e4);
        let q2 = OutageQuery::new(4.0, 2e4);
        let r1 = asymptotic_outage(&p.model, &q1, ctl()).unwrap();
        let r2 = asymptotic_outage(&p.model, &q2, ctl()).unwrap();
        assert_eq!((r1.p_tilde / 2.0).to_bits(), r2.p_tilde.to_bits());
    }

    #[test]
    fn inverse_snr_scaling() {
        let p = preset("fig4").unwrap();
        let base = asymptotic_outage(&p.model, &OutageQuery::new(4.0, 500.0), ctl()).unwrap();
        // powers of two scale exactly
        let r4 = asymptotic_outage(&p.model, &OutageQuery::new(4.0, 2000.0), ctl()).unwrap();
        assert_eq!((base.p_tilde / 4.0).to_bits(), r4.p_tilde.to_bits());
        // other factors to rounding
        let r3 = asymptotic_outage(&p.model, &OutageQuery::new(4.0, 1500.0), ctl()).unwrap();
        assert!((r3.p_tilde - base.p_tilde / 3.0).abs() <= 1e-15 * base.p_tilde);
    }

    #[test]
    fn asymptote_may_exceed_one_at_low_snr() {
        let model = SystemModel::direct_only(DirectLink {
            alpha_sd: 1.0,
            kappa_sd: 0.0,
            los_phase_sd: 0.0,
        });
        let q = OutageQuery::new(4.0, 1.0); // threshold 15 over g_nlos 1
        let r = asymptotic_outage(&model, &q, ctl()).unwrap();
        assert!(r.p_tilde > 1.0);
    }

    #[test]
    fn ratio_appears_and_tends_to_one_at_high_snr() {
        let p = preset("fig4").unwrap();
        let mut prev_gap = f64::INFINITY;
        for db in [30.0, 35.0, 40.0, 45.0, 50.0] {
            let q = OutageQuery::with_snr_db(4.0, db);
            let r = asymptotic_outage(&p.model, &q, ctl()).unwrap();
            let ratio = r.ratio_to_exact.expect("exact side representable here");
            let gap = (ratio - 1.0).abs();
            assert!(
                gap <= prev_gap + 1e-12,
                "{db} dB: gap {gap} grew from {prev_gap}"
            );
            prev_gap = gap;
        }
        assert!(
            prev_gap < 0.02,
            "ratio at 50 dB still {prev_gap} away from 1"
        );
    }

    #[test]
    fn kappa_increments_strictly_decrease_the_asymptote() {
        let p = preset("fig4").unwrap();
        let q = OutageQuery::with_snr_db(4.0, 40.0);
        for target in [
            KappaTarget::Direct,
            KappaTarget::IrsRd(0),
            KappaTarget::IrsRd(1),
        ] {
            let (before, after) = kappa_sensitivity(&p.model, &q, target, 5.0).unwrap();
            assert!(after < before, "{target:?}: {after} !< {before}");
        }
        let (before, after) = kappa_sensitivity(&p.model, &q, KappaTarget::Direct, 0.0).unwrap();
        assert_eq!(before.to_bits(), after.to_bits());
    }

    #[test]
    fn invalid_target_index_is_reported() {
        let p = preset("fig4").unwrap();
        let q = OutageQuery::with_snr_db(4.0, 40.0);
        assert!(matches!(
            kappa_sensitivity(&p.model, &q, KappaTarget::IrsRd(2), 1.0),
            Err(AnalyticError::InvalidTarget { index: 2, count: 2 })
        ));
        assert!(kappa_sensitivity(&p.model, &q, KappaTarget::Direct, -1.0).is_err());
    }
}
