//! Numerical checks of the identities relating `Z`, its derivative and `K_N`.
//!
//! Two sides are computed along independent routes:
//!
//! - the Gram defect `|dZ|^2 - |(Z|dZ)|^2 / |Z|^2`, from entrywise finite
//!   differences of the matrix `Z(z)` and explicit Hilbert-Schmidt sums;
//! - `2 K_N^2 d_z d_zbar ln K_N`, from a finite-difference Laplacian of the
//!   scalar sum `K_N`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use super::{check_step, default_step, fd, series};
use crate::error::Result;
use crate::symbol::SymbolParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityReport {
    pub z: (f64, f64),
    pub lhs: f64,
    pub rhs: f64,
    pub rel_err: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LowerBoundReport {
    pub lhs: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrderStats {
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub samples: usize,
    /// Bracket constant `C`: ratios must lie in `[1/C, C]`.
    pub bracket: f64,
    pub within_bracket: bool,
}

/// Bracket constant for the order-of-magnitude check.
pub const ORDER_BRACKET: f64 = 100.0;

/// Relative slack applied to the lower bound `2/|a|^6`.
pub const LOWER_BOUND_SLACK: f64 = 1e-6;

pub(crate) fn rel_err(x: f64, y: f64) -> f64 {
    let scale = x.abs().max(y.abs());
    if scale == 0.0 {
        0.0
    } else {
        (x - y).abs() / scale
    }
}

/// `|dZ|^2 - |(Z|dZ)|^2 / |Z|^2` with `dZ` by finite differences.
pub fn gram_defect(params: &SymbolParams, n: usize, z: Complex64, h: f64) -> Result<f64> {
    let zmat = series::z_vector(params, n, z)?;
    let flat = |m: DMatrix<Complex64>| m.iter().copied().collect::<Vec<_>>();
    let dz = fd::holomorphic_derivative(|w| series::z_vector(params, n, w).map(flat), z, h)?;
    let z_norm2: f64 = zmat.iter().map(|x| x.norm_sqr()).sum();
    let dz_norm2: f64 = dz.iter().map(|x| x.norm_sqr()).sum();
    let inner: Complex64 = zmat.iter().zip(&dz).map(|(a, b)| a * b.conj()).sum();
    Ok(dz_norm2 - inner.norm_sqr() / z_norm2)
}

/// Both sides of `|dZ|^2 - |(Z|dZ)|^2/|Z|^2 = 2 K_N^2 d_z d_zbar ln K_N`.
pub fn verify_gram_identity(params: &SymbolParams, n: usize, z: Complex64, h: f64) -> Result<IdentityReport> {
    check_step(params, z, h)?;
    let lhs = gram_defect(params, n, z, h)?;
    let k = series::k_n(params, n, z)?;
    let ddbar = fd::dzdzbar(|w| series::k_n(params, n, w).map(f64::ln), z, h)?;
    let rhs = 2.0 * k * k * ddbar;
    Ok(IdentityReport { z: (z.re, z.im), lhs, rhs, rel_err: rel_err(lhs, rhs), n })
}

/// Checks the Gram defect against its lower bound `2 / |a|^6`.
pub fn verify_lower_bound(params: &SymbolParams, n: usize, z: Complex64, h: f64) -> Result<LowerBoundReport> {
    check_step(params, z, h)?;
    let lhs = gram_defect(params, n, z, h)?;
    let bound = 2.0 / params.a.norm().powi(6);
    Ok(LowerBoundReport { lhs, bound, pass: lhs >= bound * (1.0 - LOWER_BOUND_SLACK) })
}

/// Ratio of the Gram defect to `F_N(|zeta_-|^2)^4` over a set of points.
pub fn verify_order_bracket(params: &SymbolParams, n: usize, samples: &[Complex64]) -> Result<OrderStats> {
    let mut min_ratio = f64::INFINITY;
    let mut max_ratio = 0.0f64;
    for &z in samples {
        let h = default_step(params, z);
        let lhs = gram_defect(params, n, z, h)?;
        let m2 = params.solve_characteristic(z).zeta_minus.norm_sqr();
        let f = series::partial_geom(Complex64::new(m2, 0.0), n).re;
        let ratio = lhs / f.powi(4);
        min_ratio = min_ratio.min(ratio);
        max_ratio = max_ratio.max(ratio);
    }
    let within = !samples.is_empty()
        && min_ratio >= 1.0 / ORDER_BRACKET
        && max_ratio <= ORDER_BRACKET
        && min_ratio.is_finite();
    Ok(OrderStats {
        min_ratio,
        max_ratio,
        samples: samples.len(),
        bracket: ORDER_BRACKET,
        within_bracket: within,
    })
}

/// First-order model `g0(z) - delta (Q | conj Z)` of the eigenvalue function.
pub fn g_lin(
    params: &SymbolParams,
    n: usize,
    delta: f64,
    z: Complex64,
    q: &DMatrix<Complex64>,
) -> Result<Complex64> {
    assert_eq!((q.nrows(), q.ncols()), (n, n), "g_lin: q must be n x n");
    let g = series::g0(params, n, z)?;
    let zmat = series::z_vector(params, n, z)?;
    let pairing: Complex64 = q.iter().zip(zmat.iter()).map(|(a, b)| a * b).sum();
    Ok(g - delta * pairing)
}
