//! Finite-difference stencils in the complex plane.
//!
//! The Laplacian uses the fourth-order 9-point cross (center plus two points
//! on each side along both axes). It tolerates steps an order of magnitude
//! larger than the compact second-order box stencil for the same truncation
//! error, which keeps the `eps / h^2` roundoff of second differences small.

use num_complex::Complex64;

use crate::error::Result;

const D2: [f64; 5] = [-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0];
const D1: [f64; 5] = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0];
const OFFSETS: [f64; 5] = [-2.0, -1.0, 0.0, 1.0, 2.0];

/// `Delta u(z)` for a real function `u`, with step `h`.
pub fn laplacian<F>(u: F, z: Complex64, h: f64) -> Result<f64>
where
    F: Fn(Complex64) -> Result<f64>,
{
    let center = u(z)?;
    let mut acc = 2.0 * D2[2] * center;
    for (k, &off) in OFFSETS.iter().enumerate() {
        if k == 2 {
            continue;
        }
        acc += D2[k] * (u(z + Complex64::new(off * h, 0.0))? + u(z + Complex64::new(0.0, off * h))?);
    }
    Ok(acc / (h * h))
}

/// `d_z d_zbar u = Delta u / 4`.
pub fn dzdzbar<F>(u: F, z: Complex64, h: f64) -> Result<f64>
where
    F: Fn(Complex64) -> Result<f64>,
{
    Ok(0.25 * laplacian(u, z, h)?)
}

/// Complex derivative of a holomorphic vector-valued map, differenced along
/// the real axis (fourth order).
pub fn holomorphic_derivative<F>(f: F, z: Complex64, h: f64) -> Result<Vec<Complex64>>
where
    F: Fn(Complex64) -> Result<Vec<Complex64>>,
{
    let mut out: Option<Vec<Complex64>> = None;
    for (k, &off) in OFFSETS.iter().enumerate() {
        if D1[k] == 0.0 {
            continue;
        }
        let v = f(z + Complex64::new(off * h, 0.0))?;
        let acc = out.get_or_insert_with(|| vec![Complex64::new(0.0, 0.0); v.len()]);
        for (a, x) in acc.iter_mut().zip(&v) {
            *a += x * D1[k];
        }
    }
    let mut d = out.unwrap_or_default();
    for x in &mut d {
        *x /= h;
    }
    Ok(d)
}
