//! `risout` — outage probability analysis and phase-shift optimization for
//! multi-IRS wireless links.
//!
//! Exit codes: 0 success, 1 usage error, 2 validation error, 3 numeric or
//! accuracy error.

use clap::{Args, Parser, Subcommand};
use risout::config::{emit_config, parse_config, preset_config, unflatten_theta, RunConfig};
use risout::sweep::{build_pool, estimate_parallel, run_sweep};
use risout::CliError;
use risout_core::analytic::{outage_probability, SeriesControl};
use risout_core::asymptotic::asymptotic_outage;
use risout_core::model::{OutageQuery, PRESET_NAMES};
use risout_core::optimizer::{optimal_outage, OptimalCase};
use std::io::Write;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "risout",
    version,
    about = "Outage probability analysis and phase-shift optimization for links assisted by intelligent reflecting surfaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Outage probability at given phase shifts
    Eval(CommonArgs),
    /// Optimal phase shifts and the optimal outage probability
    Optimal(CommonArgs),
    /// High-SNR asymptote of the optimal outage probability
    Asymptotic(CommonArgs),
    /// Monte Carlo outage estimate with a confidence interval
    Mc(McArgs),
    /// Parameter sweep, CSV to stdout or --out
    Sweep(SweepArgs),
    /// List named presets or dump one as a config document
    Preset(PresetArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Configuration document (TOML)
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Named preset scenario instead of a config file
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
    /// Override the transmit SNR, dB
    #[arg(long, value_name = "DB")]
    snr_db: Option<f64>,
    /// Override the target rate, bit/s/Hz
    #[arg(long, value_name = "R")]
    rate: Option<f64>,
    /// Phase shifts, comma-separated radians in (k, n) order
    #[arg(long, value_name = "LIST", conflicts_with = "theta_deg")]
    theta: Option<String>,
    /// Phase shifts, comma-separated degrees in (k, n) order
    #[arg(long, value_name = "LIST")]
    theta_deg: Option<String>,
    /// Series truncation tolerance
    #[arg(long, value_name = "TOL")]
    rel_tol: Option<f64>,
}

#[derive(Args)]
struct McArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Number of channel draws
    #[arg(long, value_name = "N")]
    samples: Option<u64>,
    /// Stream seed
    #[arg(long, value_name = "SEED")]
    seed: Option<u64>,
    /// Worker threads (the result does not depend on this)
    #[arg(long, value_name = "T")]
    threads: Option<usize>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Write the CSV here instead of stdout
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Override the sweep's Monte Carlo sample count
    #[arg(long, value_name = "N")]
    samples: Option<u64>,
    /// Override the sweep's seed
    #[arg(long, value_name = "SEED")]
    seed: Option<u64>,
    /// Worker threads (the CSV bytes do not depend on this)
    #[arg(long, value_name = "T")]
    threads: Option<usize>,
}

#[derive(Args)]
struct PresetArgs {
    /// List the preset names
    #[arg(long, conflicts_with = "dump")]
    list: bool,
    /// Dump a preset as a canonical config document
    #[arg(long, value_name = "NAME")]
    dump: Option<String>,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version are not failures
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.exit_code());
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Eval(args) => {
            let cfg = load(&args)?;
            let p = outage_probability(&cfg.model, &cfg.theta, &cfg.query, cfg.ctl)?;
            println!("p_o = {p:.11e}");
            Ok(())
        }
        Command::Optimal(args) => {
            let cfg = load(&args)?;
            let sol = optimal_outage(&cfg.model, &cfg.query, cfg.ctl)?;
            let case = match sol.case {
                OptimalCase::DirectLosPresent => "direct-los-present",
                OptimalCase::DirectLosAbsent => "direct-los-absent",
                OptimalCase::AllLosAbsent => "all-los-absent",
            };
            println!("case = {case}");
            println!("theta_star = {}", join_phases(&sol.phases.theta));
            println!("g_los_star = {:.11e}", sol.g_los_star);
            println!("p_o_star = {:.11e}", sol.p_o_star);
            Ok(())
        }
        Command::Asymptotic(args) => {
            let cfg = load(&args)?;
            let r = asymptotic_outage(&cfg.model, &cfg.query, cfg.ctl)?;
            println!("p_tilde = {:.11e}", r.p_tilde);
            match r.ratio_to_exact {
                Some(ratio) => println!("ratio_to_exact = {ratio:.11e}"),
                None => println!("ratio_to_exact = unavailable (exact value underflowed)"),
            }
            if r.p_tilde > 1.0 {
                eprintln!("warning: asymptote exceeds 1; the SNR is below its validity range");
            }
            Ok(())
        }
        Command::Mc(args) => {
            let cfg = load(&args.common)?;
            let n = args.samples.unwrap_or_else(|| {
                cfg.sweep
                    .as_ref()
                    .map(|s| s.mc_samples)
                    .unwrap_or(1_000_000)
            });
            let seed = args
                .seed
                .unwrap_or_else(|| cfg.sweep.as_ref().map(|s| s.seed).unwrap_or(0));
            let pool = build_pool(threads_or_default(args.threads))?;
            let est = estimate_parallel(&cfg.model, &cfg.theta, &cfg.query, n, seed, &pool)?;
            println!("p_hat = {}", risout::fmt_full(est.p_hat));
            println!("std_err = {}", risout::fmt_full(est.std_err));
            let half = 1.959964 * est.std_err;
            println!(
                "ci95 = [{}, {}]",
                risout::fmt_full((est.p_hat - half).max(0.0)),
                risout::fmt_full((est.p_hat + half).min(1.0))
            );
            println!("n_samples = {}", est.n_samples);
            println!("seed = {}", est.seed);
            if est.rare_event() {
                eprintln!(
                    "note: no outage observed in {n} samples; the asymptotic subcommand resolves deep tails"
                );
            }
            Ok(())
        }
        Command::Sweep(args) => {
            let mut cfg = load(&args.common)?;
            if let Some(spec) = cfg.sweep.as_mut() {
                if let Some(n) = args.samples {
                    spec.mc_samples = n;
                }
                if let Some(seed) = args.seed {
                    spec.seed = seed;
                }
            }
            let csv = run_sweep(&cfg, threads_or_default(args.threads))?;
            match &args.out {
                Some(path) => std::fs::File::create(path)
                    .and_then(|mut f| f.write_all(csv.as_bytes()))
                    .map_err(|e| {
                        CliError::Usage(format!("cannot write {}: {e}", path.display()))
                    })?,
                None => print!("{csv}"),
            }
            Ok(())
        }
        Command::Preset(args) => {
            if args.list {
                for name in PRESET_NAMES {
                    println!("{name}");
                }
                return Ok(());
            }
            match args.dump {
                Some(name) => {
                    let cfg = preset_config(&name)?;
                    print!("{}", emit_config(&cfg));
                    Ok(())
                }
                None => Err(CliError::Usage("preset needs --list or --dump NAME".into())),
            }
        }
    }
}

fn threads_or_default(requested: Option<usize>) -> usize {
    requested.unwrap_or_else(|| {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    })
}

/// Load the base configuration and apply flag overrides.
fn load(args: &CommonArgs) -> Result<RunConfig, CliError> {
    let mut cfg = match (&args.config, &args.preset) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            parse_config(&text)?
        }
        (None, Some(name)) => preset_config(name)?,
        (Some(_), Some(_)) => {
            return Err(CliError::Usage(
                "--config and --preset are mutually exclusive".into(),
            ))
        }
        (None, None) => {
            return Err(CliError::Usage(
                "need --config PATH or --preset NAME".into(),
            ))
        }
    };

    if let Some(db) = args.snr_db {
        cfg.query = OutageQuery::with_snr_db(cfg.query.rate, db);
    }
    if let Some(rate) = args.rate {
        cfg.query = OutageQuery::new(rate, cfg.query.snr);
    }
    let violations = cfg.query.validate();
    if !violations.is_empty() {
        let lines: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(CliError::Validation(lines.join("; ")));
    }

    let theta_list = match (&args.theta, &args.theta_deg) {
        (Some(list), None) => Some(parse_list(list)?),
        (None, Some(list)) => Some(parse_list(list)?.into_iter().map(f64::to_radians).collect()),
        (None, None) => None,
        (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
    };
    if let Some(flat) = theta_list {
        cfg.theta = unflatten_theta(&cfg.model, &flat)?;
    }

    if let Some(rel_tol) = args.rel_tol {
        cfg.ctl = SeriesControl::new(rel_tol, cfg.ctl.max_terms())
            .map_err(|e| CliError::Validation(e.to_string()))?;
    }
    Ok(cfg)
}

fn parse_list(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| CliError::Usage(format!("bad number '{}': {e}", s.trim())))
        })
        .collect()
}

fn join_phases(theta: &[Vec<f64>]) -> String {
    let flat: Vec<String> = theta.iter().flatten().map(|v| format!("{v}")).collect();
    flat.join(",")
}
