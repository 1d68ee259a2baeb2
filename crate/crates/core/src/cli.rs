//! Command-line front end.
//!
//! Exit codes: 0 success, 1 a verification check failed, 2 usage error,
//! 3 numerical failure, 4 parameter regime violated.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use crate::density::{annulus_integral, xi_density_auto, Annulus, DensityField, GridSpec};
use crate::eigen::{eigenvalues, Balance};
use crate::ensemble::{build_toeplitz, draw_gaussian, run_ensemble, unperturbed_spectrum, EnsembleConfig};
use crate::error::{Error, Result};
use crate::io::{fmt_f64, write_csv, write_json, write_pgm, RunManifest};
use crate::regime::{self, max_admissible_r0, regime_report, RegimeReport, DEFAULT_THRESHOLD, MARGIN_C};
use crate::symbol::SymbolParams;
use crate::verify::{run_verify, VerifyOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_REGIME: i32 = 4;

/// Largest fraction of aborted ensemble trials accepted as a successful run.
pub const MAX_ABORTED_FRACTION: f64 = 0.01;

#[derive(Debug, Parser)]
#[command(name = "toeplitz-density", version, about = "Eigenvalue density of perturbed bidiagonal Toeplitz matrices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form and computed spectrum of P (optionally P + delta Q).
    Spectrum(SpectrumArgs),
    /// Theoretical density on a grid.
    Density(DensityArgs),
    /// Monte Carlo eigenvalue counts compared with the theoretical density.
    Ensemble(EnsembleArgs),
    /// Regime conditions for (n, delta, r0).
    Regime(RegimeArgs),
    /// Numerical identity suite.
    Verify(VerifyArgs),
}

/// Symbol coefficients. Missing parts of a given coefficient are zero; a
/// coefficient with neither part given takes its default (a = 1, b = 0.25).
#[derive(Debug, Clone, Args, Serialize)]
pub struct SymbolArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub a_re: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub a_im: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub b_re: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub b_im: Option<f64>,
}

impl SymbolArgs {
    pub fn coefficients(&self) -> (Complex64, Complex64) {
        let pick = |re: Option<f64>, im: Option<f64>, default: f64| match (re, im) {
            (None, None) => Complex64::new(default, 0.0),
            (re, im) => Complex64::new(re.unwrap_or(0.0), im.unwrap_or(0.0)),
        };
        (pick(self.a_re, self.a_im, 1.0), pick(self.b_re, self.b_im, 0.25))
    }

    pub fn params(&self) -> Result<SymbolParams> {
        let (a, b) = self.coefficients();
        SymbolParams::normalize(a, b)
    }
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; 0 uses every core. Never changes results.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SpectrumArgs {
    #[arg(long, default_value_t = 101)]
    pub n: usize,
    #[command(flatten)]
    pub symbol: SymbolArgs,
    /// Also perturb by delta Q, with Q drawn from --seed.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Skip the diagonal balancing step of the eigensolver.
    #[arg(long)]
    pub no_balance: bool,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, Args)]
pub struct RegionArgs {
    #[arg(long, default_value_t = 101)]
    pub n: usize,
    #[command(flatten)]
    pub symbol: SymbolArgs,
    #[arg(long, default_value_t = 1e-8)]
    pub delta: f64,
    /// Outer radius r0; defaults to the largest admissible value.
    #[arg(long)]
    pub r0: Option<f64>,
    /// r1 = sqrt(|b/a|) + margin.
    #[arg(long, default_value_t = 1.0 / MARGIN_C)]
    pub r1_margin: f64,
    /// Bound on the two error terms of the regime conditions.
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: f64,
    /// Grid half-width around the origin; defaults to 1.2 (|a| + |b|).
    #[arg(long)]
    pub half_width: Option<f64>,
    #[arg(long, default_value_t = 100)]
    pub nx: usize,
    #[arg(long, default_value_t = 100)]
    pub ny: usize,
}

#[derive(Debug, Clone, Args)]
pub struct DensityArgs {
    #[command(flatten)]
    pub region: RegionArgs,
    /// Write the outputs even when the regime conditions fail.
    #[arg(long)]
    pub force: bool,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, Args)]
pub struct EnsembleArgs {
    #[command(flatten)]
    pub region: RegionArgs,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    /// Inner |zeta_-| of the counting annulus (default r1).
    #[arg(long)]
    pub inner: Option<f64>,
    /// Outer |zeta_-| of the counting annulus (default r0 - 1/n).
    #[arg(long)]
    pub outer: Option<f64>,
    #[arg(long)]
    pub no_balance: bool,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, Args)]
pub struct RegimeArgs {
    #[arg(long, default_value_t = 101)]
    pub n: usize,
    #[command(flatten)]
    pub symbol: SymbolArgs,
    #[arg(long, default_value_t = 1e-8)]
    pub delta: f64,
    #[arg(long)]
    pub r0: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: f64,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub symbol: SymbolArgs,
    /// Matrix sizes for the identity checks.
    #[arg(long, value_delimiter = ',', default_values_t = vec![2usize, 8, 32, 128])]
    pub n_list: Vec<usize>,
    /// Sample points per check.
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    /// Replace every tolerance of the suite.
    #[arg(long)]
    pub tol: Option<f64>,
    #[command(flatten)]
    pub run: RunArgs,
}

/// Exit code for an error raised while running a command.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::RegimeViolation(_) => EXIT_REGIME,
        Error::InvalidConfig(_) | Error::ZeroCoefficient | Error::DimensionTooSmall { .. } => EXIT_USAGE,
        _ => EXIT_NUMERICAL,
    }
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn dispatch(command: &Command) -> Result<i32> {
    match command {
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::Density(a) => cmd_density(a),
        Command::Ensemble(a) => cmd_ensemble(a),
        Command::Regime(a) => cmd_regime(a),
        Command::Verify(a) => cmd_verify(a),
    }
}

fn prepare_out_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

fn effective_workers(workers: usize) -> usize {
    if cfg!(feature = "parallel") {
        if workers == 0 {
            crate::par::available_workers()
        } else {
            workers
        }
    } else {
        1
    }
}

fn write_manifest<P: Serialize>(run: &RunArgs, command: &str, parameters: &P, started: Instant) -> Result<RunManifest> {
    let manifest = RunManifest::new(
        command,
        run.seed,
        parameters,
        started.elapsed().as_secs_f64(),
        effective_workers(run.workers),
    )?;
    write_json(&run.out_dir.join("manifest.json"), &manifest)?;
    Ok(manifest)
}

fn complex_json(z: Complex64) -> serde_json::Value {
    json!({ "re": z.re, "im": z.im })
}

fn symbol_json(params: &SymbolParams) -> serde_json::Value {
    let (a, b) = params.original();
    json!({ "a": complex_json(a), "b": complex_json(b) })
}

fn check_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("--{name} must be finite")))
    }
}

pub fn cmd_spectrum(args: &SpectrumArgs) -> Result<i32> {
    let started = Instant::now();
    let params = args.symbol.params()?;
    if args.n == 0 {
        return Err(Error::DimensionTooSmall { n: 0, min: 1 });
    }
    if let Some(d) = args.delta {
        if !(d >= 0.0 && d.is_finite()) {
            return Err(Error::InvalidConfig("--delta must be finite and non-negative".into()));
        }
    }
    prepare_out_dir(&args.run.out_dir)?;
    let analytic = unperturbed_spectrum(&params, args.n);
    let numeric = if args.n >= 2 {
        let mut m = build_toeplitz(&params, args.n)?;
        if let Some(d) = args.delta {
            m += draw_gaussian(args.n, args.run.seed, 0) * Complex64::new(d, 0.0);
        }
        eigenvalues(&m, Balance::from_flag(args.no_balance))?
    } else {
        Vec::new()
    };
    let rows = analytic
        .iter()
        .map(|z| (z, "analytic"))
        .chain(numeric.iter().map(|z| (z, "numeric")))
        .map(|(z, src)| vec![fmt_f64(z.re), fmt_f64(z.im), src.to_string()]);
    write_csv(&args.run.out_dir.join("spectrum.csv"), &["re", "im", "source"], rows)?;
    let parameters = json!({
        "n": args.n,
        "symbol": symbol_json(&params),
        "delta": args.delta,
        "balance": !args.no_balance,
    });
    write_manifest(&args.run, "spectrum", &parameters, started)?;
    Ok(EXIT_OK)
}

/// Region parameters with every default filled in.
#[derive(Debug, Clone, Serialize)]
struct Region {
    n: usize,
    delta: f64,
    r0: f64,
    r1: f64,
    threshold: f64,
    grid: GridSpec,
    max_admissible_r0: Option<f64>,
    infeasible: Option<String>,
}

fn resolve_region(args: &RegionArgs, params: &SymbolParams) -> Result<Region> {
    check_finite("delta", args.delta)?;
    check_finite("r1-margin", args.r1_margin)?;
    if args.n < 2 {
        return Err(Error::DimensionTooSmall { n: args.n, min: 2 });
    }
    if !(args.r1_margin >= 0.0) {
        return Err(Error::InvalidConfig("--r1-margin must be non-negative".into()));
    }
    let (max_r0, infeasible) = if args.delta > 0.0 {
        match max_admissible_r0(params, args.n, args.delta, args.threshold) {
            Ok(r) => (Some(r), None),
            Err(e) => (None, Some(e.to_string())),
        }
    } else {
        (None, Some("delta = 0".to_string()))
    };
    let r0 = match (args.r0, max_r0) {
        (Some(r), _) => r,
        (None, Some(r)) => r,
        (None, None) => 1.0 - 1.0 / args.n as f64,
    };
    if !(r0 > 0.0 && r0 < 1.0) {
        return Err(Error::InvalidConfig(format!("--r0 must lie in (0, 1), got {r0}")));
    }
    let half = args.half_width.unwrap_or(1.2 * (params.a.norm() + params.b.norm()));
    let grid = GridSpec::square(half, 1);
    let grid = GridSpec { nx: args.nx, ny: args.ny, ..grid };
    grid.validate()?;
    Ok(Region {
        n: args.n,
        delta: args.delta,
        r0,
        r1: params.r_min() + args.r1_margin,
        threshold: args.threshold,
        grid,
        max_admissible_r0: max_r0,
        infeasible,
    })
}

fn regime_json(report: &RegimeReport, region: &Region, manifest: Option<&RunManifest>) -> serde_json::Value {
    json!({
        "report": report,
        "max_admissible_r0": region.max_admissible_r0,
        "infeasible": region.infeasible,
        "manifest": manifest,
    })
}

pub fn cmd_density(args: &DensityArgs) -> Result<i32> {
    let started = Instant::now();
    let params = args.region.symbol.params()?;
    let region = resolve_region(&args.region, &params)?;
    prepare_out_dir(&args.run.out_dir)?;
    let report = regime_report(&params, region.n, region.delta, region.r0, region.threshold);
    write_json(&args.run.out_dir.join("regime.json"), &regime_json(&report, &region, None))?;
    if !report.pass() && !args.force {
        return Err(Error::RegimeViolation(format!(
            "growth {:.4e} + coupling {:.4e} > {} or floor/r0 bounds violated (see regime.json; --force to override)",
            report.term_growth, report.term_coupling, region.threshold
        )));
    }
    let field = DensityField::evaluate(&params, region.n, region.grid, region.r0, region.r1, args.run.workers)?;
    if field.masked_count() == 0 {
        log::warn!("no grid cell lies inside the admissible annulus; density.csv has no data rows");
    }
    let rows = (0..field.grid.ny).flat_map(|iy| (0..field.grid.nx).map(move |ix| (ix, iy))).filter_map(|(ix, iy)| {
        let z = field.grid.center(ix, iy);
        field.get(ix, iy).map(|v| vec![fmt_f64(z.re), fmt_f64(z.im), fmt_f64(v), "1".to_string()])
    });
    write_csv(&args.run.out_dir.join("density.csv"), &["re", "im", "xi", "masked"], rows)?;
    write_pgm(&args.run.out_dir.join("density.pgm"), &field)?;

    let ann = field.annulus;
    let quadrature = if ann.inner < ann.outer {
        annulus_integral(&params, Annulus::new(&params, ann.inner, ann.outer)?, |_| 1.0)?
    } else {
        0.0
    };
    let parameters = json!({ "symbol": symbol_json(&params), "region": region, "force": args.force });
    let manifest = write_manifest(&args.run, "density", &parameters, started)?;
    let summary = json!({
        "manifest": manifest,
        "annulus": ann,
        "masked_cells": field.masked_count(),
        "grid_integral": field.integral(),
        "annulus_integral": quadrature,
        "xi_range": field.masked_range(),
        "regime": report,
    });
    write_json(&args.run.out_dir.join("density.json"), &summary)?;
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct CellRecord {
    re: f64,
    im: f64,
    theory: f64,
    empirical_mean: f64,
    z_score: f64,
}

pub fn cmd_ensemble(args: &EnsembleArgs) -> Result<i32> {
    let started = Instant::now();
    let params = args.region.symbol.params()?;
    let region = resolve_region(&args.region, &params)?;
    let inner = args.inner.unwrap_or(region.r1);
    let outer = args.outer.unwrap_or(region.r0 - 1.0 / region.n as f64);
    let annulus = Annulus::new(&params, inner, outer)?;
    prepare_out_dir(&args.run.out_dir)?;
    let cfg = EnsembleConfig {
        n: region.n,
        delta: region.delta,
        trials: args.trials,
        seed: args.run.seed,
        params,
        annulus,
        grid: region.grid,
        balance: Balance::from_flag(args.no_balance),
        workers: args.run.workers,
    };
    let result = run_ensemble(&cfg)?;
    let intensity = &result.intensity;
    let theory_integral = annulus_integral(&params, annulus, |_| 1.0)?;
    let area = cfg.grid.cell_area();
    let t = intensity.trials_used as f64;
    let mut per_cell = Vec::new();
    for k in 0..cfg.grid.len() {
        if !intensity.mask[k] {
            continue;
        }
        let z = cfg.grid.center(k % cfg.grid.nx, k / cfg.grid.nx);
        let theory = if annulus.contains(&params, z) { xi_density_auto(&params, z)? * area } else { 0.0 };
        let mean = intensity.mean_counts[k];
        let se = if t > 0.0 { (intensity.var_counts[k] / t).sqrt() } else { 0.0 };
        let z_score = if se > 0.0 { (mean - theory) / se } else { 0.0 };
        per_cell.push(CellRecord { re: z.re, im: z.im, theory, empirical_mean: mean, z_score });
    }
    let report = regime_report(&params, region.n, region.delta, annulus.outer, region.threshold);
    let parameters = json!({
        "symbol": symbol_json(&params),
        "region": region,
        "trials": args.trials,
        "annulus": annulus,
        "balance": !args.no_balance,
    });
    let manifest = write_manifest(&args.run, "ensemble", &parameters, started)?;
    let relative_error = if theory_integral > 0.0 {
        Some((intensity.total_mean - theory_integral).abs() / theory_integral)
    } else {
        None
    };
    let out = json!({
        "manifest": manifest,
        "theory_integral": theory_integral,
        "total_mean": intensity.total_mean,
        "total_stderr": intensity.total_stderr,
        "relative_error": relative_error,
        "trials_used": intensity.trials_used,
        "truncated_trials": intensity.truncated_trials,
        "aborted_trials": intensity.aborted,
        "outside_grid_mean": intensity.outside_grid_mean,
        "per_cell": per_cell,
        "regime": report,
    });
    write_json(&args.run.out_dir.join("ensemble.json"), &out)?;
    let aborted = intensity.aborted.len() as f64 / args.trials as f64;
    if aborted > MAX_ABORTED_FRACTION {
        eprintln!("error: {} of {} trials aborted", intensity.aborted.len(), args.trials);
        return Ok(EXIT_NUMERICAL);
    }
    Ok(EXIT_OK)
}

pub fn cmd_regime(args: &RegimeArgs) -> Result<i32> {
    let started = Instant::now();
    let params = args.symbol.params()?;
    check_finite("delta", args.delta)?;
    prepare_out_dir(&args.run.out_dir)?;
    let max = max_admissible_r0(&params, args.n, args.delta, args.threshold);
    let r0 = match (args.r0, &max) {
        (Some(r), _) => r,
        (None, Ok(r)) => *r,
        (None, Err(_)) => 1.0 / regime::MARGIN_C,
    };
    let report = regime_report(&params, args.n, args.delta, r0, args.threshold);
    let parameters = json!({
        "n": args.n,
        "symbol": symbol_json(&params),
        "delta": args.delta,
        "r0": r0,
        "threshold": args.threshold,
    });
    let manifest = write_manifest(&args.run, "regime", &parameters, started)?;
    let out = json!({
        "report": report,
        "max_admissible_r0": max.as_ref().ok(),
        "infeasible": max.as_ref().err().map(|e| e.to_string()),
        "manifest": manifest,
    });
    write_json(&args.run.out_dir.join("regime.json"), &out)?;
    // a closed stdout (e.g. piped into `head`) is not an error for the run
    let _ = writeln!(
        std::io::stdout(),
        "{}: term_growth = {:.4e}, term_coupling = {:.4e}, r0 = {r0}, r1 = {}",
        if report.pass() { "pass" } else { "fail" },
        report.term_growth,
        report.term_coupling,
        report.r1
    );
    Ok(if report.pass() { EXIT_OK } else { EXIT_REGIME })
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<i32> {
    let started = Instant::now();
    let params = args.symbol.params()?;
    if args.samples == 0 || args.n_list.is_empty() || args.n_list.contains(&0) {
        return Err(Error::InvalidConfig("--samples and every --n-list entry must be positive".into()));
    }
    prepare_out_dir(&args.run.out_dir)?;
    let opts = VerifyOptions {
        n_list: args.n_list.clone(),
        samples: args.samples,
        seed: args.run.seed,
        tol: args.tol,
        workers: args.run.workers,
    };
    let report = run_verify(&params, &opts)?;
    let mut stdout = std::io::stdout().lock();
    for c in &report.checks {
        let at = c.worst_location.map(|(re, im)| format!(" at {re:+.6}{im:+.6}i")).unwrap_or_default();
        let _ = writeln!(
            stdout,
            "{:<4} {:<18} worst {:.3e} (tol {:.1e}){at}",
            if c.pass { "ok" } else { "FAIL" },
            c.name,
            c.worst_error,
            c.tolerance
        );
    }
    let parameters = json!({
        "symbol": symbol_json(&params),
        "n_list": args.n_list,
        "samples": args.samples,
        "tol": args.tol,
    });
    let manifest = write_manifest(&args.run, "verify", &parameters, started)?;
    let out = json!({ "manifest": manifest, "pass": report.pass, "checks": report.checks });
    write_json(&args.run.out_dir.join("verify.json"), &out)?;
    Ok(if report.pass { EXIT_OK } else { EXIT_VERIFY })
}
