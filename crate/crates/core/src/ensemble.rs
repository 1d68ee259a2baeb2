//! Monte Carlo ensemble of Gaussian perturbations `P + delta Q`.
//!
//! Each trial draws `Q` from its own seeded stream, so trials may run in any
//! order on any number of workers; aggregation then walks the trials in index
//! order, which makes every reported number independent of the schedule.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::density::{Annulus, GridSpec};
use crate::eigen::{eigenvalues, Balance};
use crate::error::{Error, Result};
use crate::par;
use crate::regime;
use crate::symbol::SymbolParams;

pub use crate::eigen::hs_norm;

/// Trials with `|Q|_HS > TRUNCATION_C1 * n` are flagged and left out of averages.
pub const TRUNCATION_C1: f64 = 2.0;

/// The bidiagonal Toeplitz matrix with `a` on the superdiagonal and `b` on
/// the subdiagonal, in the orientation the coefficients were given in.
pub fn build_toeplitz(params: &SymbolParams, n: usize) -> Result<DMatrix<Complex64>> {
    if n < 2 {
        return Err(Error::DimensionTooSmall { n, min: 2 });
    }
    let (a, b) = params.original();
    let mut m = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for k in 0..n - 1 {
        m[(k, k + 1)] = a;
        m[(k + 1, k)] = b;
    }
    Ok(m)
}

/// `2 sqrt(ab) cos(pi nu / (n + 1))` for `nu = 1..=n`.
pub fn unperturbed_spectrum(params: &SymbolParams, n: usize) -> Vec<Complex64> {
    let s = 2.0 * params.sqrt_ab();
    (1..=n).map(|nu| s * (PI * nu as f64 / (n + 1) as f64).cos()).collect()
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn trial_rng(seed: u64, trial_index: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed ^ splitmix64(trial_index))
}

/// `n x n` matrix of i.i.d. standard complex Gaussians (`E|q|^2 = 1`),
/// determined by `(seed, trial_index)`.
pub fn draw_gaussian(n: usize, seed: u64, trial_index: u64) -> DMatrix<Complex64> {
    let mut rng = trial_rng(seed, trial_index);
    let mut next = || {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
    };
    // column-major fill order is part of the reproducibility contract
    DMatrix::from_fn(n, n, |_, _| next())
}

#[derive(Debug, Clone, Serialize)]
pub struct EnsembleConfig {
    pub n: usize,
    pub delta: f64,
    pub trials: usize,
    pub seed: u64,
    pub params: SymbolParams,
    /// Counting region, in terms of `|zeta_-|`.
    pub annulus: Annulus,
    pub grid: GridSpec,
    #[serde(skip)]
    pub balance: Balance,
    /// Worker threads (`0` = all cores). Never affects results.
    #[serde(skip)]
    pub workers: usize,
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::DimensionTooSmall { n: self.n, min: 2 });
        }
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(Error::InvalidConfig(format!("delta must be finite and >= 0, got {}", self.delta)));
        }
        self.grid.validate()
    }
}

/// One trial's spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSample {
    pub trial_index: usize,
    pub eigenvalues: Vec<Complex64>,
    pub hs_norm_q: f64,
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AbortedTrial {
    pub trial_index: usize,
    pub reason: String,
}

/// Per-cell eigenvalue counts in the counting annulus, averaged over trials.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalIntensity {
    pub grid: GridSpec,
    pub annulus: Annulus,
    /// Row-major, `[iy * nx + ix]`.
    pub mean_counts: Vec<f64>,
    pub var_counts: Vec<f64>,
    /// Cells whose center lies in the annulus, or which received a count.
    pub mask: Vec<bool>,
    /// Sum of the masked `mean_counts`.
    pub total_mean: f64,
    pub total_stderr: f64,
    pub trials_used: usize,
    pub truncated_trials: usize,
    pub aborted: Vec<AbortedTrial>,
    /// Mean number of annulus eigenvalues that fell outside the grid.
    pub outside_grid_mean: f64,
}

#[derive(Debug, Clone)]
pub struct EnsembleResult {
    pub intensity: EmpiricalIntensity,
    pub samples: Vec<SpectrumSample>,
}

fn run_trial(cfg: &EnsembleConfig, p: &DMatrix<Complex64>, k: usize) -> Result<SpectrumSample> {
    let q = draw_gaussian(cfg.n, cfg.seed, k as u64);
    let hs = hs_norm(&q);
    let m = p + q * Complex64::new(cfg.delta, 0.0);
    let eigenvalues = eigenvalues(&m, cfg.balance)?;
    Ok(SpectrumSample {
        trial_index: k,
        eigenvalues,
        hs_norm_q: hs,
        truncated: hs > TRUNCATION_C1 * cfg.n as f64,
    })
}

/// Regime conditions for the outermost counted modulus, `r0 = annulus.outer`;
/// `None` for the unperturbed ensemble.
pub fn advisory_regime(cfg: &EnsembleConfig) -> Option<regime::RegimeReport> {
    (cfg.delta > 0.0).then(|| regime::regime_report(&cfg.params, cfg.n, cfg.delta, cfg.annulus.outer, regime::DEFAULT_THRESHOLD))
}

/// Spectra of all trials, in trial order; failed trials are returned as
/// [`AbortedTrial`]s.
pub fn sample_spectra(cfg: &EnsembleConfig) -> Result<(Vec<SpectrumSample>, Vec<AbortedTrial>)> {
    cfg.validate()?;
    if let Some(report) = advisory_regime(cfg) {
        if !report.pass() {
            log::warn!(
                "ensemble outside the admissible regime: growth {:.3e} + coupling {:.3e} vs {}",
                report.term_growth,
                report.term_coupling,
                report.threshold
            );
        }
    }
    let p = build_toeplitz(&cfg.params, cfg.n)?;
    let outcomes = par::map_indexed(cfg.trials, cfg.workers, |k| run_trial(cfg, &p, k));
    let mut samples = Vec::with_capacity(cfg.trials);
    let mut aborted = Vec::new();
    for (k, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(s) => samples.push(s),
            Err(e) => aborted.push(AbortedTrial { trial_index: k, reason: e.to_string() }),
        }
    }
    Ok((samples, aborted))
}

/// Runs the ensemble and bins the eigenvalues inside the counting annulus.
pub fn run_ensemble(cfg: &EnsembleConfig) -> Result<EnsembleResult> {
    let (samples, aborted) = sample_spectra(cfg)?;
    let intensity = aggregate(cfg, &samples, aborted);
    Ok(EnsembleResult { intensity, samples })
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let (mean, var) = mean_and_var(values);
    if values.is_empty() {
        (mean, 0.0)
    } else {
        (mean, (var / values.len() as f64).sqrt())
    }
}

/// Mean and unbiased sample variance (zero for fewer than two values).
fn mean_and_var(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, ss / (n - 1) as f64)
}

/// Deterministic reduction over `samples` in the order given.
pub fn aggregate(cfg: &EnsembleConfig, samples: &[SpectrumSample], aborted: Vec<AbortedTrial>) -> EmpiricalIntensity {
    let grid = cfg.grid;
    let cells = grid.len();
    let used: Vec<&SpectrumSample> = samples.iter().filter(|s| !s.truncated).collect();
    let t = used.len();
    let mut sum = vec![0.0; cells];
    let mut sum_sq = vec![0.0; cells];
    let mut totals = Vec::with_capacity(t);
    let mut outside = 0.0;
    let mut counts = vec![0u32; cells];
    for s in &used {
        counts.iter_mut().for_each(|c| *c = 0);
        let mut total = 0u32;
        for &ev in &s.eigenvalues {
            if !cfg.annulus.contains(&cfg.params, ev) {
                continue;
            }
            match grid.locate(ev) {
                Some((ix, iy)) => {
                    counts[iy * grid.nx + ix] += 1;
                    total += 1;
                }
                None => outside += 1.0,
            }
        }
        for (k, &c) in counts.iter().enumerate() {
            if c > 0 {
                let c = c as f64;
                sum[k] += c;
                sum_sq[k] += c * c;
            }
        }
        totals.push(total as f64);
    }
    let tf = t as f64;
    let mean_counts: Vec<f64> = sum.iter().map(|s| if t > 0 { s / tf } else { 0.0 }).collect();
    let var_counts: Vec<f64> = sum
        .iter()
        .zip(&sum_sq)
        .map(|(s, s2)| if t > 1 { ((s2 - s * s / tf) / (tf - 1.0)).max(0.0) } else { 0.0 })
        .collect();
    let mask: Vec<bool> = (0..cells)
        .map(|k| {
            let (ix, iy) = (k % grid.nx, k / grid.nx);
            sum[k] > 0.0 || cfg.annulus.contains(&cfg.params, grid.center(ix, iy))
        })
        .collect();
    let total_mean = mean_counts.iter().zip(&mask).filter(|(_, m)| **m).map(|(v, _)| v).sum();
    let (_, total_stderr) = mean_and_stderr(&totals);
    EmpiricalIntensity {
        grid,
        annulus: cfg.annulus,
        mean_counts,
        var_counts,
        mask,
        total_mean,
        total_stderr,
        trials_used: t,
        truncated_trials: samples.len() - t,
        aborted,
        outside_grid_mean: if t > 0 { outside / tf } else { 0.0 },
    }
}

/// Test functions for linear statistics `sum_{lambda} phi(lambda)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum TestFunction {
    Zero,
    /// Indicator of `inner <= |zeta_-| < outer`.
    AnnulusIndicator(Annulus),
    /// Indicator of the annulus with linear ramps of half-width `width`
    /// (in `|zeta_-|`) at both edges.
    SmoothedIndicator { annulus: Annulus, width: f64 },
    /// `height (1 - (|z - center| / width)^2)^2` for `|z - center| < width`.
    Bump { center: (f64, f64), width: f64, height: f64 },
}

impl TestFunction {
    pub fn eval(&self, params: &SymbolParams, z: Complex64) -> f64 {
        match *self {
            TestFunction::Zero => 0.0,
            TestFunction::AnnulusIndicator(a) => {
                if a.contains(params, z) {
                    1.0
                } else {
                    0.0
                }
            }
            TestFunction::SmoothedIndicator { annulus, width } => {
                let m = params.solve_characteristic(z).modulus_minus();
                let ramp = |x: f64| ((x / width + 1.0) * 0.5).clamp(0.0, 1.0);
                ramp(m - annulus.inner).min(ramp(annulus.outer - m))
            }
            TestFunction::Bump { center, width, height } => bump_profile((z - Complex64::new(center.0, center.1)).norm(), width, height),
        }
    }
}

/// Radial profile of [`TestFunction::Bump`].
pub fn bump_profile(dist: f64, width: f64, height: f64) -> f64 {
    if dist >= width {
        0.0
    } else {
        let u = 1.0 - (dist / width).powi(2);
        height * u * u
    }
}

/// Mean of `sum phi(lambda)` over the non-truncated samples and its standard error.
pub fn linear_statistic_from_samples(params: &SymbolParams, samples: &[SpectrumSample], phi: &TestFunction) -> (f64, f64) {
    if matches!(phi, TestFunction::Zero) {
        return (0.0, 0.0);
    }
    let values: Vec<f64> = samples
        .iter()
        .filter(|s| !s.truncated)
        .map(|s| s.eigenvalues.iter().map(|&z| phi.eval(params, z)).sum())
        .collect();
    mean_and_stderr(&values)
}

/// Monte Carlo estimate of `E[sum phi(lambda)]` with its standard error.
pub fn linear_statistic(cfg: &EnsembleConfig, phi: &TestFunction) -> Result<(f64, f64)> {
    let (samples, _) = sample_spectra(cfg)?;
    Ok(linear_statistic_from_samples(&cfg.params, &samples, phi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn p(a: Complex64, b: Complex64) -> SymbolParams {
        SymbolParams::normalize(a, b).unwrap()
    }

    fn config(params: SymbolParams, n: usize, delta: f64, trials: usize) -> EnsembleConfig {
        EnsembleConfig {
            n,
            delta,
            trials,
            seed: 42,
            params,
            annulus: Annulus::new(&params, 0.6, 0.8).unwrap(),
            grid: GridSpec::square(1.5, 30),
            balance: Balance::On,
            workers: 1,
        }
    }

    #[test]
    fn toeplitz_examples() {
        let s = p(c(1.0, 0.0), c(0.25, 0.0));
        let m = build_toeplitz(&s, 2).unwrap();
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.25, 0.0), c(0.0, 0.0)]));
        assert_eq!(build_toeplitz(&s, 3).unwrap().trace(), c(0.0, 0.0));
        assert!(matches!(build_toeplitz(&s, 1), Err(Error::DimensionTooSmall { n: 1, min: 2 })));

        // original orientation survives normalization
        let t = p(c(0.25, 0.0), c(1.0, 0.0));
        assert_eq!(build_toeplitz(&t, 4).unwrap(), build_toeplitz(&s, 4).unwrap().transpose());

        let one = p(c(1.0, 0.0), c(1.0, 0.0));
        let mut ev = eigenvalues(&build_toeplitz(&one, 3).unwrap(), Balance::On).unwrap();
        ev.sort_by(|x, y| x.re.total_cmp(&y.re));
        let want = [-2f64.sqrt(), 0.0, 2f64.sqrt()];
        for (e, w) in ev.iter().zip(want) {
            assert!((e - c(w, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn unperturbed_examples() {
        let s = p(c(1.0, 0.0), c(1.0, 0.0));
        let v = unperturbed_spectrum(&s, 3);
        assert!((v[0] - c(2f64.sqrt(), 0.0)).norm() < 1e-15);
        assert!(v[1].norm() < 1e-15);
        assert!((v[2] + c(2f64.sqrt(), 0.0)).norm() < 1e-15);

        let s = p(c(1.0, 0.0), c(0.25, 0.0));
        let v = unperturbed_spectrum(&s, 1);
        assert_eq!(v.len(), 1);
        assert!(v[0].norm() < 1e-16);

        let s = p(c(0.5, 0.0), c(0.0, 1.0));
        let mut v = unperturbed_spectrum(&s, 2);
        v.sort_by(|x, y| x.re.total_cmp(&y.re));
        assert!((v[0] - c(-0.5, -0.5)).norm() < 1e-15);
        assert!((v[1] - c(0.5, 0.5)).norm() < 1e-15);
    }

    #[test]
    fn balanced_solve_matches_closed_form() {
        for (a, b, tol) in [(1.0, 1.0, 1e-10), (1.0, 0.25, 1e-8)] {
            let s = p(c(a, 0.0), c(b, 0.0));
            let ev = eigenvalues(&build_toeplitz(&s, 50).unwrap(), Balance::On).unwrap();
            for w in unperturbed_spectrum(&s, 50) {
                let d = ev.iter().map(|e| (e - w).norm()).fold(f64::INFINITY, f64::min);
                assert!(d < tol, "{w}: {d}");
            }
        }
    }

    #[test]
    fn gaussian_draws() {
        assert_eq!(draw_gaussian(5, 42, 0), draw_gaussian(5, 42, 0));
        assert_ne!(draw_gaussian(5, 42, 0), draw_gaussian(5, 42, 1));
        let q = draw_gaussian(200, 42, 0);
        let n2 = (200 * 200) as f64;
        let m2 = q.iter().map(|x| x.norm_sqr()).sum::<f64>() / n2;
        let mean = q.iter().sum::<Complex64>() / n2;
        assert!((m2 - 1.0).abs() < 0.02, "{m2}");
        assert!(mean.norm() < 0.015, "{mean}");
    }

    #[test]
    fn hs_norm_examples() {
        let id = DMatrix::<Complex64>::identity(3, 3);
        assert!((hs_norm(&id) - 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(hs_norm(&DMatrix::from_element(3, 3, c(0.0, 0.0))), 0.0);
        let flagged = (0..1000).filter(|&k| hs_norm(&draw_gaussian(100, 7, k)) > TRUNCATION_C1 * 100.0).count();
        assert!(flagged as f64 / 1000.0 <= 1e-3);
    }

    #[test]
    fn unperturbed_ensemble_is_empty_off_segment() {
        let s = p(c(1.0, 0.0), c(0.25, 0.0));
        let r = run_ensemble(&config(s, 40, 0.0, 3)).unwrap();
        assert_eq!(r.intensity.total_mean, 0.0);
        assert_eq!(r.intensity.trials_used, 3);
        for sample in &r.samples {
            assert_eq!(sample.eigenvalues.len(), 40);
            // symmetric under z -> -z
            for &e in &sample.eigenvalues {
                let d = sample.eigenvalues.iter().map(|f| (f + e).norm()).fold(f64::INFINITY, f64::min);
                assert!(d < 1e-8);
            }
        }
    }

    #[test]
    fn reproducible_across_workers() {
        let s = p(c(1.0, 0.0), c(0.25, 0.0));
        let mut cfg = config(s, 30, 1e-6, 12);
        let one = run_ensemble(&cfg).unwrap().intensity;
        cfg.workers = 4;
        let four = run_ensemble(&cfg).unwrap().intensity;
        assert_eq!(one, four);
        assert!(one.total_mean > 0.0);
        let summed: f64 = one.mean_counts.iter().zip(&one.mask).filter(|(_, m)| **m).map(|(v, _)| v).sum();
        assert_eq!(summed, one.total_mean);
    }

    #[test]
    fn indicator_statistic_equals_total_mean() {
        let s = p(c(1.0, 0.0), c(0.25, 0.0));
        let cfg = config(s, 30, 1e-6, 10);
        let r = run_ensemble(&cfg).unwrap();
        assert_eq!(r.intensity.outside_grid_mean, 0.0);
        let (mean, se) = linear_statistic_from_samples(&s, &r.samples, &TestFunction::AnnulusIndicator(cfg.annulus));
        assert!((mean - r.intensity.total_mean).abs() < 1e-12);
        assert!((se - r.intensity.total_stderr).abs() < 1e-12);
        assert_eq!(linear_statistic(&cfg, &TestFunction::Zero).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn transpose_invariance() {
        let s = p(c(1.0, 0.0), c(0.25, 0.0));
        let t = p(c(0.25, 0.0), c(1.0, 0.0));
        let x = run_ensemble(&config(s, 30, 1e-6, 60)).unwrap().intensity;
        let mut cfg = config(t, 30, 1e-6, 60);
        cfg.seed = 4242;
        let y = run_ensemble(&cfg).unwrap().intensity;
        let se = (x.total_stderr.powi(2) + y.total_stderr.powi(2)).sqrt();
        assert!((x.total_mean - y.total_mean).abs() <= 3.0 * se + 1e-12, "{} vs {} (se {se})", x.total_mean, y.total_mean);
    }

    #[test]
    fn test_function_shapes() {
        let s = p(c(1.0, 0.0), c(0.25, 0.0));
        let ann = Annulus::new(&s, 0.6, 0.8).unwrap();
        let smooth = TestFunction::SmoothedIndicator { annulus: ann, width: 0.02 };
        assert_eq!(smooth.eval(&s, s.ellipse_point(0.7, 0.3)), 1.0);
        assert_eq!(smooth.eval(&s, s.ellipse_point(0.9, 0.3)), 0.0);
        assert!((smooth.eval(&s, s.ellipse_point(0.8, 0.3)) - 0.5).abs() < 1e-9);
        assert_eq!(bump_profile(0.0, 0.1, 2.0), 2.0);
        assert_eq!(bump_profile(0.1, 0.1, 2.0), 0.0);
        assert!((bump_profile(0.05, 0.1, 1.0) - 0.5625).abs() < 1e-15);
    }
}
