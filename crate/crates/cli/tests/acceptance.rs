//! Acceptance suite: every release criterion as one test, each printing a
//! PASS line with its measured margins (visible under `--nocapture`).
//!
//! Monte Carlo comparisons are studentized by the binomial standard error
//! at the analytic value, `sqrt(p (1 - p) / n)`, which stays meaningful at
//! points where no outage is observed and the estimate's own standard
//! error degenerates to zero.

use rayon::prelude::*;
use risout::config::{parse_config, preset_config};
use risout::sweep::{build_pool, estimate_parallel, run_sweep};
use risout_core::analytic::{f_series, g_los, g_nlos, outage_probability, SeriesControl};
use risout_core::asymptotic::{asymptotic_outage, kappa_sensitivity, KappaTarget};
use risout_core::model::{
    preset, DirectLink, IrsSpec, OutageQuery, PhaseShifts, PresetSweep, SystemModel, TWO_PI,
};
use risout_core::montecarlo::SampleStream;
use risout_core::optimizer::{g_los_star, grid_search, optimal_outage, optimal_phases};
use risout_refcdf::f_reference;
use std::time::Instant;

fn ctl() -> SeriesControl {
    SeriesControl::default()
}

fn threads() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

/// Binomial standard error at the analytic value.
fn se_at(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

#[test]
fn criterion_1_f_kernel_accuracy_vs_quadrature() {
    let t0 = Instant::now();
    let mut worst = 0.0f64;
    let mut worst_at = (0.0, 0.0, 0.0);
    for i in 0..20 {
        let a = 50.0 * i as f64 / 19.0;
        for j in 0..10 {
            let b = (j + 1) as f64;
            for k in 0..20 {
                let c = 20.0 * k as f64 / 19.0;
                let got = f_series(a, b, c, ctl()).unwrap();
                let want = f_reference(a, b, c);
                let err = (got - want).abs();
                if err > worst {
                    worst = err;
                    worst_at = (a, b, c);
                }
            }
        }
    }
    let dt = t0.elapsed().as_secs_f64();
    assert!(worst <= 1e-10, "worst error {worst:e} at {worst_at:?}");
    assert!(dt < 10.0, "runtime {dt:.1}s exceeds 10s");
    println!("PASS criterion 1: worst |f - quadrature| = {worst:.2e} on 20x10x20 grid ({dt:.1}s)");
}

#[test]
fn criterion_2_analytic_outage_matches_monte_carlo_on_fig2_grid() {
    let t0 = Instant::now();
    let p = preset("fig2").unwrap();
    let zeros = PhaseShifts::zeros(&p.model);
    let pool = build_pool(threads()).unwrap();
    let n = 1_000_000u64;
    let seed = 1u64;
    let mut prev = f64::INFINITY;
    let mut worst_z = 0.0f64;
    for db in [0.0, 5.0, 10.0, 15.0, 20.0] {
        let q = OutageQuery::with_snr_db(4.0, db);
        let analytic = outage_probability(&p.model, &zeros, &q, ctl()).unwrap();
        assert!(
            analytic < prev,
            "analytic outage not strictly decreasing at {db} dB"
        );
        prev = analytic;
        let est = estimate_parallel(&p.model, &zeros, &q, n, seed, &pool).unwrap();
        let z = (est.p_hat - analytic).abs() / se_at(analytic, n);
        worst_z = worst_z.max(z);
        assert!(
            z <= 3.0,
            "{db} dB: mc {} vs analytic {analytic} is {z:.2} standard errors",
            est.p_hat
        );
    }
    let dt = t0.elapsed().as_secs_f64();
    assert!(dt < 60.0, "runtime {dt:.1}s exceeds 60s");
    println!("PASS criterion 2: 5 SNR points within 3 standard errors (worst {worst_z:.2}), analytic strictly decreasing ({dt:.1}s)");
}

#[test]
fn criterion_3_closed_form_optimum_beats_exhaustive_grid() {
    let t0 = Instant::now();
    let mut driver = SampleStream::new(0x5EED, 0);
    let mut models = Vec::new();
    for _ in 0..50 {
        let k_count = (driver.next_u64() % 3) as usize;
        let direct = DirectLink {
            alpha_sd: 0.2 + driver.next_uniform(),
            kappa_sd: if driver.next_u64().is_multiple_of(4) {
                0.0
            } else {
                5.0 * driver.next_uniform()
            },
            los_phase_sd: TWO_PI * driver.next_uniform(),
        };
        let irss = (0..k_count)
            .map(|_| {
                let n = 1 + (driver.next_u64() % 2) as usize;
                let kappa = if driver.next_u64().is_multiple_of(5) {
                    0.0
                } else {
                    8.0 * driver.next_uniform()
                };
                let mut irs = IrsSpec::uniform(
                    n,
                    0.2 + driver.next_uniform(),
                    0.2 + driver.next_uniform(),
                    kappa,
                );
                for j in 0..n {
                    irs.los_phases_sr[j] = TWO_PI * driver.next_uniform();
                    irs.los_phases_rd[j] = TWO_PI * driver.next_uniform();
                }
                irs
            })
            .collect();
        let model = SystemModel { direct, irss };
        assert!(model.validate().is_empty());
        models.push(model);
    }

    let q = OutageQuery::with_snr_db(2.0, 6.0);
    let results: Vec<(f64, f64, f64)> = models
        .par_iter()
        .map(|model| {
            let star = g_los_star(model);
            let at_opt = g_los(model, &optimal_phases(model)).unwrap();
            let align_err = (at_opt - star).abs() / star.max(1.0);

            // exhaustive 64-point grid: the largest LoS power found
            let dims = model.total_elements();
            let mut phases = PhaseShifts::zeros(model);
            let mut digits = vec![0usize; dims];
            let step = TWO_PI / 64.0;
            let mut grid_g_max = 0.0f64;
            loop {
                let mut d = 0;
                for row in &mut phases.theta {
                    for slot in row.iter_mut() {
                        *slot = digits[d] as f64 * step;
                        d += 1;
                    }
                }
                grid_g_max = grid_g_max.max(g_los(model, &phases).unwrap());
                let mut pos = dims;
                let done = loop {
                    if pos == 0 {
                        break true;
                    }
                    pos -= 1;
                    digits[pos] += 1;
                    if digits[pos] < 64 {
                        break false;
                    }
                    digits[pos] = 0;
                };
                if done {
                    break;
                }
            }

            let sol = optimal_outage(model, &q, ctl()).unwrap();
            let (_, grid_best) = grid_search(model, &q, 64, ctl()).unwrap();
            (grid_g_max - star, grid_best - sol.p_o_star, align_err)
        })
        .collect();

    let mut worst_g_excess = f64::NEG_INFINITY;
    let mut worst_p_deficit = f64::INFINITY;
    let mut worst_align = 0.0f64;
    for (g_excess, p_gap, align_err) in results {
        worst_g_excess = worst_g_excess.max(g_excess);
        worst_p_deficit = worst_p_deficit.min(p_gap);
        worst_align = worst_align.max(align_err);
        assert!(
            g_excess <= 1e-9,
            "grid LoS power exceeds the closed form by {g_excess:e}"
        );
        assert!(
            p_gap >= -1e-12,
            "grid outage beats the closed form by {:e}",
            -p_gap
        );
    }
    assert!(worst_align <= 1e-12, "alignment error {worst_align:e}");
    let dt = t0.elapsed().as_secs_f64();
    assert!(dt < 300.0, "runtime {dt:.1}s exceeds 5min");
    println!(
        "PASS criterion 3: 50 models, grid g_los excess <= {worst_g_excess:.1e}, grid outage gap >= {worst_p_deficit:.1e}, alignment err <= {worst_align:.1e} ({dt:.1}s)"
    );
}

#[test]
fn criterion_4_optimal_outage_decreases_in_irs_count_and_elements() {
    let t0 = Instant::now();

    // IRS count 0..8 on the fig3a template
    let p3a = preset("fig3a").unwrap();
    let template = match &p3a.sweep {
        PresetSweep::IrsCount { template, .. } => template.clone(),
        other => panic!("fig3a preset should sweep the IRS count, got {other:?}"),
    };
    let mut prev = f64::INFINITY;
    for k in 0..=8usize {
        let model = SystemModel {
            direct: p3a.model.direct.clone(),
            irss: vec![template.clone(); k],
        };
        let sol = optimal_outage(&model, &p3a.query, ctl()).unwrap();
        assert!(sol.p_o_star < prev, "K={k}: {} !< {prev}", sol.p_o_star);
        prev = sol.p_o_star;
    }

    // uniform element count 1..64 on the fig3b pair
    let p3b = preset("fig3b").unwrap();
    let mut prev = f64::INFINITY;
    for n in 1..=64usize {
        let mut model = p3b.model.clone();
        for irs in &mut model.irss {
            irs.n_elements = n;
            irs.los_phases_sr = vec![0.0; n];
            irs.los_phases_rd = vec![0.0; n];
        }
        let sol = optimal_outage(&model, &p3b.query, ctl()).unwrap();
        assert!(sol.p_o_star < prev, "N={n}: {} !< {prev}", sol.p_o_star);
        prev = sol.p_o_star;
    }

    let dt = t0.elapsed().as_secs_f64();
    assert!(dt < 10.0, "runtime {dt:.1}s exceeds 10s");
    println!(
        "PASS criterion 4: p_o_star strictly decreasing over K = 0..8 and N = 1..64 ({dt:.1}s)"
    );
}

#[test]
fn criterion_5_high_snr_asymptote_converges_on_fig4() {
    let t0 = Instant::now();
    let p = preset("fig4").unwrap();
    let tight = SeriesControl::new(1e-14, 40_000).unwrap();
    let mut prev_gap = f64::INFINITY;
    let mut ratio_at_50 = 0.0;
    for db in [30.0, 35.0, 40.0, 45.0, 50.0] {
        let q = OutageQuery::with_snr_db(4.0, db);
        let r = asymptotic_outage(&p.model, &q, tight).unwrap();
        let ratio = r
            .ratio_to_exact
            .expect("exact value representable on this grid");
        let gap = (ratio - 1.0).abs();
        assert!(
            gap <= prev_gap + 1e-12,
            "{db} dB: |ratio-1| grew from {prev_gap:e} to {gap:e}"
        );
        prev_gap = gap;
        ratio_at_50 = ratio;
    }
    assert!(
        (0.98..=1.02).contains(&ratio_at_50),
        "ratio at 50 dB: {ratio_at_50}"
    );
    let dt = t0.elapsed().as_secs_f64();
    assert!(dt < 5.0, "runtime {dt:.1}s exceeds 5s");
    println!("PASS criterion 5: ratio at 50 dB = {ratio_at_50:.6}, |ratio-1| non-increasing over 30..50 dB ({dt:.1}s)");
}

#[test]
fn criterion_6_asymptote_decreases_in_every_rician_factor() {
    let t0 = Instant::now();
    let mut driver = SampleStream::new(0xA5A5, 0);
    for trial in 0..20 {
        let k_count = 1 + (driver.next_u64() % 2) as usize;
        let model = SystemModel {
            direct: DirectLink {
                alpha_sd: 0.2 + driver.next_uniform(),
                kappa_sd: 0.5 + 19.5 * driver.next_uniform(),
                los_phase_sd: TWO_PI * driver.next_uniform(),
            },
            irss: (0..k_count)
                .map(|_| {
                    IrsSpec::uniform(
                        1 + (driver.next_u64() % 8) as usize,
                        0.1 + driver.next_uniform(),
                        0.1 + driver.next_uniform(),
                        0.5 + 19.5 * driver.next_uniform(),
                    )
                })
                .collect(),
        };
        let q = OutageQuery::with_snr_db(2.0 + 4.0 * driver.next_uniform(), 40.0);
        let mut targets = vec![KappaTarget::Direct];
        for k in 0..k_count {
            targets.push(KappaTarget::IrsRd(k));
        }
        for target in targets {
            let current = match target {
                KappaTarget::Direct => model.direct.kappa_sd,
                KappaTarget::IrsRd(k) => model.irss[k].kappa_rd,
            };
            let (before, after) = kappa_sensitivity(&model, &q, target, 0.1 * current).unwrap();
            assert!(
                after < before,
                "trial {trial} {target:?}: {after} !< {before}"
            );
        }
    }
    let dt = t0.elapsed().as_secs_f64();
    assert!(dt < 1.0, "runtime {dt:.2}s exceeds 1s");
    println!("PASS criterion 6: +10% on any Rician factor strictly lowers the asymptote, 20 models ({dt:.2}s)");
}

#[test]
fn criterion_7_rayleigh_closed_form_and_monte_carlo() {
    let t0 = Instant::now();
    let model = SystemModel {
        direct: DirectLink {
            alpha_sd: 1.0,
            kappa_sd: 0.0,
            los_phase_sd: 0.0,
        },
        irss: vec![IrsSpec::uniform(2, 0.8, 0.5, 0.0)],
    };
    let zeros = PhaseShifts::zeros(&model);
    let q = OutageQuery::new(2.0, 5.0); // c = 0.6, c/g_nlos ~ 0.33
    let analytic = outage_probability(&model, &zeros, &q, ctl()).unwrap();
    let closed = 1.0 - (-q.threshold() / g_nlos(&model)).exp();
    assert!(
        (analytic - closed).abs() <= 1e-12,
        "analytic {analytic} vs closed form {closed}"
    );
    let pool = build_pool(threads()).unwrap();
    let n = 1_000_000u64;
    let est = estimate_parallel(&model, &zeros, &q, n, 3, &pool).unwrap();
    let z = (est.p_hat - closed).abs() / se_at(closed, n);
    assert!(
        z <= 3.0,
        "mc {} vs {closed}: {z:.2} standard errors",
        est.p_hat
    );
    let dt = t0.elapsed().as_secs_f64();
    assert!(dt < 10.0, "runtime {dt:.1}s exceeds 10s");
    println!("PASS criterion 7: |analytic - closed form| = {:.1e}, mc within {z:.2} standard errors ({dt:.1}s)", (analytic - closed).abs());
}

#[test]
fn criterion_8_sweep_csv_is_deterministic_across_parallelism() {
    let t0 = Instant::now();
    let text = "\nschema_version = 1\npreset = \"fig2\"\n[sweep]\naxis = \"snr_db\"\nvalues = [5.0, 10.0, 15.0]\noutputs = [\"analytic\", \"optimal\", \"asymptotic\", \"montecarlo\"]\nmc_samples = 200000\nseed = 7\n";
    let cfg = parse_config(text).unwrap();
    let reference = run_sweep(&cfg, 1).unwrap();
    for workers in [1usize, 2, 8] {
        let again = run_sweep(&cfg, workers).unwrap();
        assert_eq!(reference.as_bytes(), again.as_bytes(), "{workers} workers");
    }
    // the preset's own figure sweep is deterministic end to end as well
    let mut preset_cfg = preset_config("fig3b").unwrap();
    if let Some(s) = preset_cfg.sweep.as_mut() {
        s.values.truncate(16);
    }
    let a = run_sweep(&preset_cfg, 2).unwrap();
    let b = run_sweep(&preset_cfg, 7).unwrap();
    assert_eq!(a, b);
    let dt = t0.elapsed().as_secs_f64();
    println!(
        "PASS criterion 8: byte-identical CSV across 1/2/8 workers and repeated runs ({dt:.1}s)"
    );
}
