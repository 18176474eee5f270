//! wdvv-lab: batch verification campaigns and prepotential evaluation.
//!
//! Subcommands: `identities`, `wdvv`, `hurwitz`, `eval`, `selftest`.
//! Tolerance overrides use `--tol.<check>=<value>` (e.g. `--tol.chazy=1e-8`);
//! reports are JSON (schema `wdvv-lab/1`) or CSV. Exit status is 0 iff every
//! check passed. `WDVV_LAB_THREADS` caps worker threads (0 = auto).

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use wdvv_lab_core::campaign::{
    run_hurwitz, run_identities, run_selftest, run_wdvv, CampaignConfig,
};
use wdvv_lab_core::numdiff::{derivative_tensor, DerivSpec};
use wdvv_lab_core::prepotential_zoo::{eval_prepotential, FamilyId};
use wdvv_lab_core::report::{ReportFormat, VerificationReport};
use wdvv_lab_core::special_fn::SeriesControl;
use wdvv_lab_core::{parse_c64, C64};

#[derive(Parser)]
#[command(
    name = "wdvv-lab",
    version,
    about = "Numerical verification of WDVV prepotentials on Hurwitz spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CampaignArgs {
    /// RNG seed for sample draws.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Samples per check.
    #[arg(long, default_value_t = 10)]
    samples: usize,
    /// Family selection (repeatable), e.g. "G1_3D_Phi1" or "G0_PhiJ(2,1)".
    #[arg(long)]
    family: Vec<String>,
    /// Report output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format.
    #[arg(long, default_value = "json")]
    format: String,
}

#[derive(Subcommand)]
enum Command {
    /// Chazy, Ramanujan/q-Ramanujan, Weierstrass, e_j-ODE and
    /// flat-coordinate identity campaigns.
    Identities(CampaignArgs),
    /// WDVV associativity, eta-recovery, quasi-homogeneity and Hessian
    /// consistency over sampled points per family.
    Wdvv(CampaignArgs),
    /// Gram pairings, lambda-Jacobian, unit field, chart sum rules and the
    /// generic-assembler comparison over random coverings.
    Hurwitz(CampaignArgs),
    /// Evaluate one prepotential at a point.
    Eval {
        /// Family name, e.g. "G1_3D_Phi1".
        #[arg(long)]
        family: String,
        /// Comma-separated complex literals "a+bi", one per coordinate.
        #[arg(long)]
        point: String,
        /// Also print derivatives up to this order (0, 1 or 2).
        #[arg(long, default_value_t = 0)]
        order: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Full verification suite (identities + wdvv + hurwitz) in one report.
    Selftest(CampaignArgs),
}

/// Extracts `--tol.<check>=<value>` arguments before clap parsing.
fn split_tol_args() -> Result<(Vec<String>, BTreeMap<String, f64>)> {
    let mut rest = Vec::new();
    let mut tols = BTreeMap::new();
    for arg in std::env::args() {
        if let Some(body) = arg.strip_prefix("--tol.") {
            let (check, value) = body
                .split_once('=')
                .with_context(|| format!("expected --tol.<check>=<value>, got {arg}"))?;
            let v: f64 = value
                .parse()
                .with_context(|| format!("invalid tolerance value in {arg}"))?;
            if !(v > 0.0) {
                bail!("tolerance in {arg} must be positive");
            }
            tols.insert(check.to_string(), v);
        } else {
            rest.push(arg);
        }
    }
    Ok((rest, tols))
}

fn parse_families(names: &[String]) -> Result<Option<Vec<FamilyId>>> {
    if names.is_empty() {
        return Ok(None);
    }
    let mut out = Vec::new();
    for n in names {
        let fam = FamilyId::parse(n)
            .with_context(|| format!("unknown family '{n}' (see README for the catalogue)"))?;
        out.push(fam);
    }
    Ok(Some(out))
}

fn parse_point(s: &str) -> Result<Vec<C64>> {
    s.split(',')
        .map(|tok| {
            parse_c64(tok).with_context(|| format!("invalid complex literal '{tok}' (use a+bi)"))
        })
        .collect()
}

fn config_from(args: &CampaignArgs, tols: BTreeMap<String, f64>) -> Result<CampaignConfig> {
    if args.samples == 0 {
        bail!("--samples must be >= 1");
    }
    let mut cfg = CampaignConfig::new(args.seed, args.samples);
    cfg.tol_overrides = tols;
    cfg.families = parse_families(&args.family)?;
    Ok(cfg)
}

fn emit(report: &VerificationReport, args: &CampaignArgs) -> Result<bool> {
    let format: ReportFormat = args
        .format
        .parse()
        .map_err(|e: String| anyhow::anyhow!(e))?;
    match &args.out {
        Some(path) => {
            report
                .write_to(path, format)
                .with_context(|| format!("cannot write report to {}", path.display()))?;
            eprintln!(
                "{}: {} checks, {} passed, {} failed -> {}",
                report.command,
                report.summary.total,
                report.summary.passed,
                report.summary.failed,
                path.display()
            );
        }
        None => {
            let body = match format {
                ReportFormat::Json => report.to_json(),
                ReportFormat::Csv => report.to_csv(),
            };
            println!("{body}");
        }
    }
    if !report.all_pass() {
        for f in report.failures().iter().take(10) {
            eprintln!(
                "FAIL {} [{}] {} residual {:e} > tol {:e}",
                f.check_id, f.sample_index, f.family, f.residual, f.tolerance
            );
        }
    }
    Ok(report.all_pass())
}

fn run_eval(
    family: &str,
    point: &str,
    order: usize,
    out: Option<&PathBuf>,
    ctl: &SeriesControl,
) -> Result<bool> {
    if order > 2 {
        bail!("--order must be 0, 1 or 2");
    }
    let fam = FamilyId::parse(family).with_context(|| format!("unknown family '{family}'"))?;
    let pt = parse_point(point)?;
    if pt.len() != fam.n() {
        bail!(
            "family {} expects {} coordinates, got {}",
            fam.name(),
            fam.n(),
            pt.len()
        );
    }
    let value = eval_prepotential(&fam, &pt, ctl)
        .with_context(|| format!("evaluation failed for {}", fam.name()))?;
    let mut doc = serde_json::json!({
        "schema": "wdvv-lab/1",
        "family": fam.name(),
        "point": wdvv_lab_core::report::format_point(&pt),
        "value": { "re": value.re, "im": value.im },
    });
    println!("F = {} + {}i", value.re, value.im);
    if order >= 1 {
        let f = |t: &[C64]| eval_prepotential(&fam, t, ctl).map_err(|e| e.to_string());
        let grad = derivative_tensor(&f, &pt, 1, &DerivSpec::default())
            .map_err(|e| anyhow::anyhow!(e.to_string()))?;
        let g: Vec<_> = (0..fam.n())
            .map(|a| {
                let v = grad.get(&[a]);
                serde_json::json!({ "re": v.re, "im": v.im })
            })
            .collect();
        for (a, v) in g.iter().enumerate() {
            println!("dF/dt{a} = {} + {}i", v["re"], v["im"]);
        }
        doc["gradient"] = serde_json::Value::Array(g);
    }
    if order >= 2 {
        let f = |t: &[C64]| eval_prepotential(&fam, t, ctl).map_err(|e| e.to_string());
        let hess = derivative_tensor(&f, &pt, 2, &DerivSpec::default())
            .map_err(|e| anyhow::anyhow!(e.to_string()))?;
        let mut rows = Vec::new();
        for a in 0..fam.n() {
            let row: Vec<_> = (0..fam.n())
                .map(|b| {
                    let v = hess.get(&[a, b]);
                    serde_json::json!({ "re": v.re, "im": v.im })
                })
                .collect();
            println!(
                "H[{a}] = [{}]",
                row.iter()
                    .map(|v| format!("{}+{}i", v["re"], v["im"]))
                    .collect::<Vec<_>>()
                    .join(", ")
            );
            rows.push(serde_json::Value::Array(row));
        }
        doc["hessian"] = serde_json::Value::Array(rows);
    }
    if let Some(path) = out {
        std::fs::write(path, format!("{}\n", serde_json::to_string_pretty(&doc)?))
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(true)
}

fn main() -> ExitCode {
    match try_main() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn try_main() -> Result<bool> {
    let (argv, tols) = split_tol_args()?;
    let cli = Cli::parse_from(argv);
    let ctl = SeriesControl::default();
    match &cli.command {
        Command::Identities(args) => {
            let cfg = config_from(args, tols)?;
            emit(&run_identities(&cfg, &ctl), args)
        }
        Command::Wdvv(args) => {
            let cfg = config_from(args, tols)?;
            emit(&run_wdvv(&cfg, &ctl), args)
        }
        Command::Hurwitz(args) => {
            let cfg = config_from(args, tols)?;
            emit(&run_hurwitz(&cfg, &ctl), args)
        }
        Command::Selftest(args) => {
            let cfg = config_from(args, tols)?;
            emit(&run_selftest(&cfg, &ctl), args)
        }
        Command::Eval {
            family,
            point,
            order,
            out,
        } => run_eval(family, point, *order, out.as_ref(), &ctl),
    }
}
