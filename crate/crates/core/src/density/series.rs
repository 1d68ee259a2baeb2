//! Truncated and infinite series built from the characteristic roots.
//!
//! With `t = zeta_+ / zeta_-` and `F_m(t) = 1 + t + ... + t^{m-1}`, the
//! quantities here are
//!
//! - `g0(z)  = zeta_-^N F_{N+1}(t) / a`
//! - `Z_jk   = a^{-2} F_{N+1-j}(t) F_k(t) zeta_-^{N-j+k-1}`
//! - `K_N(z) = |a|^{-2} sum_{mu<N} |zeta_-|^{2 mu} |F_{mu+1}(t)|^2`, equal to the
//!   Hilbert-Schmidt norm of `Z`
//! - `K_inf(z)`, the limit of `K_N` for `z` inside `E_1`, in closed form.
//!
//! Prefix sums of `F` are accumulated term by term, which stays accurate for
//! `|t|` close to one where the closed form `(1 - t^m)/(1 - t)` cancels.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::symbol::{BranchPair, SymbolParams};

/// Roots closer than this (relative) are treated as a double root.
pub const DEGENERATE_TOL: f64 = 1e-10;

/// Switch to direct summation of `F` when `|1 - t|` is below this.
pub const GEOM_CLOSED_FORM_TOL: f64 = 1e-8;

/// `F_m(t) = 1 + t + ... + t^{m-1}`.
pub fn partial_geom(t: Complex64, m: usize) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    if m == 0 {
        return Complex64::new(0.0, 0.0);
    }
    if t.norm() < 1.0 && (one - t).norm() >= GEOM_CLOSED_FORM_TOL {
        (one - t.powu(m as u32)) / (one - t)
    } else {
        let mut sum = Complex64::new(0.0, 0.0);
        let mut power = one;
        for _ in 0..m {
            sum += power;
            power *= t;
        }
        sum
    }
}

/// `[F_0, F_1, ..., F_m]` by running summation.
pub(crate) fn geom_prefix(t: Complex64, m: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(m + 1);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut power = Complex64::new(1.0, 0.0);
    out.push(sum);
    for _ in 0..m {
        sum += power;
        power *= t;
        out.push(sum);
    }
    out
}

/// Characteristic roots at `z`, rejecting (near-)double roots.
pub fn nondegenerate_roots(params: &SymbolParams, z: Complex64) -> Result<BranchPair> {
    let pair = params.solve_characteristic(z);
    let gap = (pair.zeta_minus - pair.zeta_plus).norm();
    if gap < DEGENERATE_TOL * (pair.modulus_minus() + pair.modulus_plus()) {
        return Err(Error::DegenerateRoots { re: z.re, im: z.im });
    }
    Ok(pair)
}

pub fn g0(params: &SymbolParams, n: usize, z: Complex64) -> Result<Complex64> {
    let pair = nondegenerate_roots(params, z)?;
    let f = geom_prefix(pair.ratio(), n + 1);
    Ok(pair.zeta_minus.powu(n as u32) * f[n + 1] / params.a)
}

/// `g0` by the three-term recurrence `h_{k+1} = (z/a) h_k - (b/a) h_{k-1}`.
///
/// `g0` is a polynomial of degree `n` in `z`; this form has no division by
/// `zeta_- - zeta_+` and stays valid on the focal segment.
pub fn g0_poly(params: &SymbolParams, n: usize, z: Complex64) -> Complex64 {
    let e1 = z / params.a;
    let e2 = params.b / params.a;
    let mut prev = Complex64::new(0.0, 0.0);
    let mut cur = Complex64::new(1.0, 0.0);
    for _ in 0..n {
        let next = e1 * cur - e2 * prev;
        prev = cur;
        cur = next;
    }
    cur / params.a
}

/// `K_N` as `|a|^{-2} sum_{k<n} |h_k|^2` over the recurrence of [`g0_poly`].
///
/// Independent of the characteristic roots; with many terms it is the
/// direct-series reference for [`k_inf`].
pub fn k_n_poly(params: &SymbolParams, n: usize, z: Complex64) -> f64 {
    let e1 = z / params.a;
    let e2 = params.b / params.a;
    let (mut prev, mut cur) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
    let mut sum = 0.0;
    for _ in 0..n {
        sum += cur.norm_sqr();
        let next = e1 * cur - e2 * prev;
        prev = cur;
        cur = next;
    }
    sum / params.a.norm_sqr()
}

/// The `n x n` matrix `Z(z)`.
pub fn z_vector(params: &SymbolParams, n: usize, z: Complex64) -> Result<DMatrix<Complex64>> {
    let pair = nondegenerate_roots(params, z)?;
    let f = geom_prefix(pair.ratio(), n + 1);
    let inv_a2 = (params.a * params.a).inv();
    let mut powers = Vec::with_capacity(2 * n);
    let mut p = Complex64::new(1.0, 0.0);
    for _ in 0..(2 * n).max(1) {
        powers.push(p);
        p *= pair.zeta_minus;
    }
    // 1-based (j, k): exponent n - j + k - 1
    Ok(DMatrix::from_fn(n, n, |r, c| {
        let (j, k) = (r + 1, c + 1);
        inv_a2 * f[n + 1 - j] * f[k] * powers[n - j + k - 1]
    }))
}

/// `|Z|` from its sum representation.
pub fn z_norm(params: &SymbolParams, n: usize, z: Complex64) -> Result<f64> {
    let pair = nondegenerate_roots(params, z)?;
    Ok(truncated_sum(params, &pair, n))
}

/// `K_N(z)`; identical to [`z_norm`] term by term.
pub fn k_n(params: &SymbolParams, n: usize, z: Complex64) -> Result<f64> {
    z_norm(params, n, z)
}

fn truncated_sum(params: &SymbolParams, pair: &BranchPair, n: usize) -> f64 {
    let f = geom_prefix(pair.ratio(), n);
    let m2 = pair.zeta_minus.norm_sqr();
    let mut weight = 1.0;
    let mut sum = 0.0;
    for mu in 0..n {
        sum += weight * f[mu + 1].norm_sqr();
        weight *= m2;
    }
    sum / params.a.norm_sqr()
}

/// `K_inf(z) = sum_{k>=0} |(zeta_-^{k+1} - zeta_+^{k+1}) / (a (zeta_- - zeta_+))|^2`.
///
/// Expanding the square and summing the three geometric series gives
/// `(|zm|^2/(1-|zm|^2) + |zp|^2/(1-|zp|^2) - 2 Re(w/(1-w))) / |a (zm - zp)|^2`
/// with `w = zm conj(zp)`.
pub fn k_inf(params: &SymbolParams, z: Complex64) -> Result<f64> {
    let pair = params.solve_characteristic(z);
    let m = pair.modulus_minus();
    if !(m < 1.0) {
        return Err(Error::OutsideDomain { re: z.re, im: z.im, modulus: m });
    }
    let pair = nondegenerate_roots(params, z)?;
    Ok(k_inf_from_roots(params, &pair))
}

pub(crate) fn k_inf_from_roots(params: &SymbolParams, pair: &BranchPair) -> f64 {
    let (zm, zp) = (pair.zeta_minus, pair.zeta_plus);
    let m2 = zm.norm_sqr();
    let p2 = zp.norm_sqr();
    let w = zm * zp.conj();
    let cross = (w / (Complex64::new(1.0, 0.0) - w)).re;
    let bracket = m2 / (1.0 - m2) + p2 / (1.0 - p2) - 2.0 * cross;
    bracket / (params.a * (zm - zp)).norm_sqr()
}
