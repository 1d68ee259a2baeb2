//! Self-check suite for the identities the density formula rests on.
//!
//! Every check samples admissible points from a seeded stream, records the
//! worst error and where it occurred, and passes iff the worst error is within
//! tolerance.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::density::identities::{gram_defect, rel_err, LOWER_BOUND_SLACK, ORDER_BRACKET};
use crate::density::roots::{find_zeros, Rect};
use crate::density::{default_step, g0_poly, k_inf, k_n_poly, partial_geom, verify_gram_identity};
use crate::error::Result;
use crate::par;
use crate::regime::r1_value;
use crate::symbol::SymbolParams;

pub const GRAM_TOL: f64 = 1e-6;
pub const BRANCH_TOL: f64 = 1e-12;
pub const K_SERIES_TOL: f64 = 1e-10;
pub const ROOTS_TOL: f64 = 1e-8;
/// Terms in the direct series compared against the closed form of `K_inf`.
pub const K_SERIES_TERMS: usize = 10_000;
/// Largest `n` for which the zeros of `g0` are located by subdivision.
pub const ROOTS_MAX_N: usize = 12;
/// At most this many failing points are listed per check.
const MAX_LISTED: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub n_list: Vec<usize>,
    pub samples: usize,
    pub seed: u64,
    /// Replaces every tolerance when set.
    pub tol: Option<f64>,
    pub workers: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { n_list: vec![2, 8, 32, 128], samples: 100, seed: 0, tol: None, workers: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub re: f64,
    pub im: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub n: Option<usize>,
    pub pass: bool,
    pub tolerance: f64,
    pub worst_error: f64,
    pub worst_location: Option<(f64, f64)>,
    pub evaluated: usize,
    pub failed: usize,
    pub failures: Vec<Failure>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub pass: bool,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Summarizes per-point errors; a point fails when its error exceeds `tol`
/// or is not a number.
fn summarize(name: String, n: Option<usize>, tol: f64, points: &[(Complex64, f64)]) -> CheckResult {
    let mut worst: Option<(Complex64, f64)> = None;
    let mut failures = Vec::new();
    let mut failed = 0;
    for &(z, e) in points {
        let bad = !(e <= tol);
        if bad {
            failed += 1;
            if failures.len() < MAX_LISTED {
                failures.push(Failure { re: z.re, im: z.im, error: e });
            }
        }
        let worse = match worst {
            None => true,
            Some((_, w)) => e > w || (e.is_nan() && !w.is_nan()),
        };
        if worse {
            worst = Some((z, e));
        }
    }
    CheckResult {
        name,
        n,
        pass: failed == 0 && !points.is_empty(),
        tolerance: tol,
        worst_error: worst.map_or(0.0, |(_, e)| e),
        worst_location: worst.map(|(z, _)| (z.re, z.im)),
        evaluated: points.len(),
        failed,
        failures,
    }
}

/// `count` points `z = f(rho e^{i theta})` with `rho` uniform in `[lo, hi]`.
pub fn sample_points(params: &SymbolParams, count: usize, seed: u64, lo: f64, hi: f64) -> Vec<Complex64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let rho = rng.gen_range(lo..=hi);
            let theta = rng.gen_range(0.0..TAU);
            let zeta = Complex64::from_polar(rho, theta);
            params.a * zeta + params.b / zeta
        })
        .collect()
}

/// `|zeta_-|` range used for the identity checks: `[r1, 0.9]`, or the middle
/// of `[r_min, 1]` when the symbol leaves no room for that.
pub fn admissible_band(params: &SymbolParams) -> (f64, f64) {
    let r1 = r1_value(params);
    if r1 < 0.85 {
        (r1, 0.9)
    } else {
        let r = params.r_min();
        (r + 0.25 * (1.0 - r), r + 0.75 * (1.0 - r))
    }
}

fn branch_errors(params: &SymbolParams, points: &[Complex64]) -> Vec<(Complex64, f64)> {
    points
        .iter()
        .map(|&z| {
            let pair = params.solve_characteristic(z);
            let (zp, zm) = (pair.zeta_plus, pair.zeta_minus);
            let f = |w: Complex64| params.a * w + params.b / w;
            let scale_f = |w: Complex64| (params.a * w).norm() + (params.b / w).norm();
            let e_fp = (f(zp) - z).norm() / scale_f(zp);
            let e_fm = (f(zm) - z).norm() / scale_f(zm);
            let e_prod = (zp * zm - params.b / params.a).norm() / (params.b / params.a).norm();
            let e_sum = (zp + zm - z / params.a).norm() / (zp.norm() + zm.norm());
            let order = if zp.norm() <= zm.norm() * (1.0 + 4.0 * f64::EPSILON) { 0.0 } else { 1.0 };
            (z, e_fp.max(e_fm).max(e_prod).max(e_sum).max(order))
        })
        .collect()
}

fn gram_errors(params: &SymbolParams, n: usize, points: &[Complex64], workers: usize) -> Vec<(Complex64, f64)> {
    par::map_indexed(points.len(), workers, |k| {
        let z = points[k];
        let e = verify_gram_identity(params, n, z, default_step(params, z)).map_or(f64::NAN, |r| r.rel_err);
        (z, e)
    })
}

/// Relative shortfall of the Gram defect below `2/|a|^6`, clipped at zero.
fn lower_bound_errors(params: &SymbolParams, n: usize, points: &[Complex64], workers: usize) -> Vec<(Complex64, f64)> {
    let bound = 2.0 / params.a.norm().powi(6);
    par::map_indexed(points.len(), workers, |k| {
        let z = points[k];
        let e = gram_defect(params, n, z, default_step(params, z)).map_or(f64::NAN, |lhs| ((bound - lhs) / bound).max(0.0));
        (z, e)
    })
}

/// Distance of `ln(ratio)` from the bracket `[1/C, C]`, zero inside it.
fn order_errors(params: &SymbolParams, n: usize, points: &[Complex64], workers: usize) -> Vec<(Complex64, f64)> {
    let c = ORDER_BRACKET.ln();
    par::map_indexed(points.len(), workers, |k| {
        let z = points[k];
        let e = gram_defect(params, n, z, default_step(params, z)).map_or(f64::NAN, |lhs| {
            let m2 = params.solve_characteristic(z).zeta_minus.norm_sqr();
            let f = partial_geom(Complex64::new(m2, 0.0), n).re;
            let l = (lhs / f.powi(4)).ln();
            (l.abs() - c).max(0.0)
        });
        (z, e)
    })
}

fn k_errors(params: &SymbolParams, points: &[Complex64], workers: usize) -> Vec<(Complex64, f64)> {
    par::map_indexed(points.len(), workers, |k| {
        let z = points[k];
        let e = k_inf(params, z).map_or(f64::NAN, |closed| rel_err(closed, k_n_poly(params, K_SERIES_TERMS, z)));
        (z, e)
    })
}

/// Zeros of `g0` for size `n`, by argument-principle subdivision.
pub fn g0_zeros(params: &SymbolParams, n: usize) -> Vec<Complex64> {
    let s = 2.0 * params.sqrt_ab().norm();
    let half = 1.1 * s + 0.05 * params.a.norm();
    // the box is deliberately off-center so no edge runs along the segment
    let rect = Rect::new(Complex64::new(-half, -0.93 * half), Complex64::new(1.07 * half, half));
    find_zeros(|z| g0_poly(params, n, z), rect, 1e-14)
}

/// For each closed-form eigenvalue, distance to the nearest located zero;
/// a count mismatch is reported as an infinite error.
fn root_errors(params: &SymbolParams, n: usize) -> Vec<(Complex64, f64)> {
    let found = g0_zeros(params, n);
    let s = 2.0 * params.sqrt_ab();
    (1..=n)
        .map(|nu| {
            let w = s * (PI * nu as f64 / (n + 1) as f64).cos();
            let d = found.iter().map(|z| (z - w).norm()).fold(f64::INFINITY, f64::min);
            (w, if found.len() == n { d } else { f64::INFINITY })
        })
        .collect()
}

pub fn run_verify(params: &SymbolParams, opts: &VerifyOptions) -> Result<VerifyReport> {
    let tol = |default: f64| opts.tol.unwrap_or(default);
    let mut checks = Vec::new();

    // branch relations over a box around E_1, both inside and outside it
    let extent = params.a.norm() + params.b.norm();
    let mut rng = ChaCha20Rng::seed_from_u64(opts.seed ^ 0xB4A4C4);
    let box_points: Vec<Complex64> = (0..10 * opts.samples)
        .map(|_| Complex64::new(rng.gen_range(-2.0..2.0) * extent, rng.gen_range(-2.0..2.0) * extent))
        .filter(|&z| params.distance_to_focal_segment(z) > 1e-6 * extent)
        .collect();
    checks.push(summarize("branch_relations".into(), None, tol(BRANCH_TOL), &branch_errors(params, &box_points)));

    let (lo, hi) = admissible_band(params);
    let points = sample_points(params, opts.samples, opts.seed, lo, hi);
    for &n in &opts.n_list {
        checks.push(summarize(format!("gram_identity_n{n}"), Some(n), tol(GRAM_TOL), &gram_errors(params, n, &points, opts.workers)));
        if n >= 2 {
            checks.push(summarize(
                format!("lower_bound_n{n}"),
                Some(n),
                tol(LOWER_BOUND_SLACK),
                &lower_bound_errors(params, n, &points, opts.workers),
            ));
            checks.push(summarize(format!("order_n{n}"), Some(n), 0.0, &order_errors(params, n, &points, opts.workers)));
        }
    }

    let k_points = sample_points(params, 10 * opts.samples, opts.seed ^ 0x4B, params.r_min() + 1e-3, 0.95);
    checks.push(summarize("k_closed_form".into(), None, tol(K_SERIES_TOL), &k_errors(params, &k_points, opts.workers)));

    let roots: Vec<(Complex64, f64)> = par::map_indexed(ROOTS_MAX_N, opts.workers, |k| root_errors(params, k + 1))
        .into_iter()
        .flatten()
        .collect();
    checks.push(summarize("g0_roots".into(), None, tol(ROOTS_TOL), &roots));

    let pass = checks.iter().all(|c| c.pass);
    Ok(VerifyReport { pass, checks })
}
