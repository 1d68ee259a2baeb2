//! Grid evaluation of the density and quadrature over elliptic annuli.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::xi_density_auto;
use crate::error::{Error, Result};
use crate::par;
use crate::quad::composite_gauss;
use crate::symbol::{PointClass, SymbolParams};

/// Value stored in cells outside the admissible region.
pub const UNMASKED: f64 = -1.0;

/// Rectangular grid of `nx x ny` cells over `[re_min, re_max] x [im_min, im_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn square(half_width: f64, cells: usize) -> Self {
        Self {
            re_min: -half_width,
            re_max: half_width,
            im_min: -half_width,
            im_max: half_width,
            nx: cells,
            ny: cells,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.nx > 0
            && self.ny > 0
            && self.re_min < self.re_max
            && self.im_min < self.im_max
            && [self.re_min, self.re_max, self.im_min, self.im_max].iter().all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("bad grid {self:?}")))
        }
    }

    pub fn dx(&self) -> f64 {
        (self.re_max - self.re_min) / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        (self.im_max - self.im_min) / self.ny as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dy()
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Center of cell `(ix, iy)`.
    pub fn center(&self, ix: usize, iy: usize) -> Complex64 {
        Complex64::new(
            self.re_min + (ix as f64 + 0.5) * self.dx(),
            self.im_min + (iy as f64 + 0.5) * self.dy(),
        )
    }

    /// Cell containing `z`: half-open `[lo, hi)` cells, with the upper
    /// boundary of the grid assigned to the last cell.
    pub fn locate(&self, z: Complex64) -> Option<(usize, usize)> {
        let idx = |v: f64, lo: f64, hi: f64, n: usize| -> Option<usize> {
            if !(v >= lo && v <= hi) {
                return None;
            }
            if v == hi {
                return Some(n - 1);
            }
            let k = ((v - lo) / (hi - lo) * n as f64).floor() as usize;
            Some(k.min(n - 1))
        };
        Some((
            idx(z.re, self.re_min, self.re_max, self.nx)?,
            idx(z.im, self.im_min, self.im_max, self.ny)?,
        ))
    }
}

/// Elliptic annulus `{ z : inner <= |zeta_-(z)| < outer }`, i.e. the region
/// between the confocal ellipses `E_inner` and `E_outer`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Annulus {
    pub inner: f64,
    pub outer: f64,
}

impl Annulus {
    pub fn new(params: &SymbolParams, inner: f64, outer: f64) -> Result<Self> {
        if !(inner >= params.r_min() && inner < outer && outer <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "annulus [{inner}, {outer}) must satisfy r_min = {} <= inner < outer <= 1",
                params.r_min()
            )));
        }
        Ok(Self { inner, outer })
    }

    pub fn contains(&self, params: &SymbolParams, z: Complex64) -> bool {
        let m = params.solve_characteristic(z).modulus_minus();
        m >= self.inner && m < self.outer
    }
}

/// Theoretical density on a grid, restricted to an admissible annulus.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityField {
    pub grid: GridSpec,
    pub annulus: Annulus,
    /// Row-major, `values[iy * nx + ix]`; [`UNMASKED`] outside the mask.
    pub values: Vec<f64>,
    pub mask: Vec<bool>,
}

impl DensityField {
    /// Evaluates `xi` at the centers of the cells lying strictly inside
    /// `E_{r0 - 1/n}` and strictly outside `E_{r1}`.
    pub fn evaluate(
        params: &SymbolParams,
        n: usize,
        grid: GridSpec,
        r0: f64,
        r1: f64,
        workers: usize,
    ) -> Result<Self> {
        grid.validate()?;
        let outer = r0 - 1.0 / n as f64;
        if !(r1 >= params.r_min()) || !(outer > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "need r1 >= r_min and r0 - 1/n > 0 (r0 = {r0}, r1 = {r1}, n = {n})"
            )));
        }
        let annulus = Annulus { inner: r1, outer };
        let rows = par::map_indexed(grid.ny, workers, |iy| -> Result<Vec<(bool, f64)>> {
            (0..grid.nx)
                .map(|ix| {
                    let z = grid.center(ix, iy);
                    let inside = outer >= params.r_min()
                        && params.classify(z, outer)? == PointClass::Interior
                        && params.classify(z, r1)? == PointClass::Exterior;
                    if inside {
                        Ok((true, xi_density_auto(params, z)?))
                    } else {
                        Ok((false, UNMASKED))
                    }
                })
                .collect()
        });
        let mut values = Vec::with_capacity(grid.len());
        let mut mask = Vec::with_capacity(grid.len());
        for row in rows {
            for (m, v) in row? {
                mask.push(m);
                values.push(v);
            }
        }
        Ok(Self { grid, annulus, values, mask })
    }

    pub fn get(&self, ix: usize, iy: usize) -> Option<f64> {
        let k = iy * self.grid.nx + ix;
        self.mask[k].then(|| self.values[k])
    }

    pub fn masked_count(&self) -> usize {
        self.mask.iter().filter(|m| **m).count()
    }

    /// Midpoint-rule integral of `xi` over the masked cells.
    pub fn integral(&self) -> f64 {
        let area = self.grid.cell_area();
        self.values
            .iter()
            .zip(&self.mask)
            .filter(|(_, m)| **m)
            .map(|(v, _)| v * area)
            .sum()
    }

    /// Masked value range, `None` when the mask is empty.
    pub fn masked_range(&self) -> Option<(f64, f64)> {
        let mut it = self.values.iter().zip(&self.mask).filter(|(_, m)| **m).map(|(v, _)| *v);
        let first = it.next()?;
        Some(it.fold((first, first), |(lo, hi), v| (lo.min(v), hi.max(v))))
    }
}

/// `integral of phi(z) xi(z) dL(z)` over an elliptic annulus.
///
/// Uses the parametrization `z = f(rho e^{i theta})`, which is one-to-one for
/// `rho > r_min`, with `dL(z) = |f'(zeta)|^2 rho drho dtheta`. Gauss-Legendre
/// in `rho`, trapezoid (spectrally accurate for periodic integrands) in `theta`.
pub fn annulus_integral<F>(params: &SymbolParams, annulus: Annulus, phi: F) -> Result<f64>
where
    F: Fn(Complex64) -> f64,
{
    const RADIAL_ORDER: usize = 24;
    const RADIAL_PANELS: usize = 4;
    const ANGULAR: usize = 512;
    let rule = composite_gauss(annulus.inner, annulus.outer, RADIAL_ORDER, RADIAL_PANELS);
    let dtheta = TAU / ANGULAR as f64;
    let mut total = 0.0;
    for (rho, w) in rule {
        let mut ring = 0.0;
        for k in 0..ANGULAR {
            let zeta = Complex64::from_polar(rho, k as f64 * dtheta);
            let z = params.a * zeta + params.b / zeta;
            let weight = phi(z);
            if weight == 0.0 {
                continue;
            }
            let jac = (params.a - params.b / (zeta * zeta)).norm_sqr();
            ring += weight * xi_density_auto(params, z)? * jac;
        }
        total += w * rho * ring * dtheta;
    }
    Ok(total)
}

/// `integral of phi(|z - center|) xi(z) dL(z)` over the disk of radius `radius`.
pub fn disk_integral<F>(params: &SymbolParams, center: Complex64, radius: f64, phi: F) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    const RADIAL_ORDER: usize = 24;
    const RADIAL_PANELS: usize = 4;
    const ANGULAR: usize = 256;
    let rule = composite_gauss(0.0, radius, RADIAL_ORDER, RADIAL_PANELS);
    let dtheta = TAU / ANGULAR as f64;
    let mut total = 0.0;
    for (r, w) in rule {
        let weight = phi(r);
        if weight == 0.0 {
            continue;
        }
        let mut ring = 0.0;
        for k in 0..ANGULAR {
            let z = center + Complex64::from_polar(r, k as f64 * dtheta);
            ring += xi_density_auto(params, z)?;
        }
        total += w * r * weight * ring * dtheta;
    }
    Ok(total)
}
