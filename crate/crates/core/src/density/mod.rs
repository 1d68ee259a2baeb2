//! Theoretical eigenvalue density and the objects it is built from.
//!
//! The leading term of the average density of eigenvalues of `P + delta Q`
//! inside `E_1` is `xi(z) = (2/pi) d_z d_zbar ln K_inf(z)`, a quantity that
//! depends only on the symbol. Its relative error is controlled by
//! `N |zeta_-|^{N-1} (1 - |zeta_-|)^2 / delta + delta N^3`.

pub mod fd;
pub mod field;
pub mod identities;
pub mod roots;
pub mod series;

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::symbol::SymbolParams;

pub use field::{annulus_integral, disk_integral, Annulus, DensityField, GridSpec};
pub use identities::{
    g_lin, verify_lower_bound, verify_gram_identity, verify_order_bracket, IdentityReport,
    LowerBoundReport, OrderStats,
};
pub use series::{g0, g0_poly, k_inf, k_n, k_n_poly, partial_geom, z_norm, z_vector};

/// Largest admissible step, as a fraction of the distance to the focal segment.
pub const MAX_STEP_FRACTION: f64 = 1e-2;

/// Default finite-difference step at `z`.
///
/// `5e-3` of the distance to the focal segment, capped at `5e-4 |a|`, and
/// for points inside `E_1` also at `5e-3` of the `z`-distance corresponding
/// to `1 - |zeta_-|`, where `K_inf` blows up.
pub fn default_step(params: &SymbolParams, z: Complex64) -> f64 {
    let dist = params.distance_to_focal_segment(z);
    let mut h = (5e-3 * dist).min(5e-4 * params.a.norm());
    let pair = params.solve_characteristic(z);
    let m = pair.modulus_minus();
    if m < 1.0 {
        let dfdz = (params.a - params.b / (pair.zeta_minus * pair.zeta_minus)).norm();
        h = h.min(5e-3 * (1.0 - m) * dfdz);
    }
    h
}

pub(crate) fn check_step(params: &SymbolParams, z: Complex64, h: f64) -> Result<()> {
    let max = MAX_STEP_FRACTION * params.distance_to_focal_segment(z);
    if !(h > 0.0) || h > max {
        return Err(Error::StepTooLarge { h, max });
    }
    Ok(())
}

/// Leading term of the density, `(2/pi) d_z d_zbar ln K_inf(z)`, with step `h`.
pub fn xi_density(params: &SymbolParams, z: Complex64, h: f64) -> Result<f64> {
    // domain errors first, so callers see OutsideDomain rather than a step error
    series::k_inf(params, z)?;
    check_step(params, z, h)?;
    let lap = fd::dzdzbar(|w| series::k_inf(params, w).map(f64::ln), z, h)?;
    Ok(2.0 / PI * lap)
}

/// [`xi_density`] with [`default_step`].
pub fn xi_density_auto(params: &SymbolParams, z: Complex64) -> Result<f64> {
    xi_density(params, z, default_step(params, z))
}

/// `N m^{N-1} (1 - m)^2 / delta + delta N^3` for `m = |zeta_-|`.
pub fn envelope_at_modulus(n: usize, delta: f64, m: f64) -> f64 {
    growth_term(n, delta, m) + coupling_term(n, delta)
}

pub(crate) fn growth_term(n: usize, delta: f64, m: f64) -> f64 {
    let nf = n as f64;
    nf * m.powi(n as i32 - 1) * (1.0 - m).powi(2) / delta
}

pub(crate) fn coupling_term(n: usize, delta: f64) -> f64 {
    delta * (n as f64).powi(3)
}

/// Multiplicative error scale of the density formula at `z` (no hidden constant).
pub fn error_envelope(params: &SymbolParams, n: usize, delta: f64, z: Complex64) -> f64 {
    let m = params.solve_characteristic(z).modulus_minus();
    envelope_at_modulus(n, delta, m)
}
