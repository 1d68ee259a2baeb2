//! Symbol geometry of the bidiagonal Toeplitz operator.
//!
//! The symbol `p(xi) = a e^{i xi} + b e^{-i xi}` is the restriction of
//! `f(zeta) = a zeta + b / zeta` to the unit circle. Circles `|zeta| = r` are
//! mapped onto a family of confocal ellipses `E_r` with common foci
//! `±2 sqrt(ab)`; the circle of radius `r_min = sqrt(|b|/|a|)` collapses onto
//! the focal segment between them.
//!
//! For a point `z`, the two solutions of `f(zeta) = z` are the roots of
//! `zeta^2 - (z/a) zeta + b/a = 0`. They are labelled `zeta_+`, `zeta_-` with
//! `|zeta_+| <= |zeta_-|`, and `z` lies inside `E_r` exactly when
//! `|zeta_-(z)| < r`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Relative tolerance for the `OnCurve` and `OnFocalSegment` classes.
pub const CLASSIFY_TOL: f64 = 1e-9;

/// Coefficients of the bidiagonal Toeplitz matrix, normalized so that `|a| >= |b|`.
///
/// `P` and its transpose have the same spectrum, so exchanging the two
/// coefficients leaves every spectral quantity unchanged. `swapped` records
/// whether that happened so the original matrix can still be rebuilt.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymbolParams {
    pub a: Complex64,
    pub b: Complex64,
    pub swapped: bool,
}

/// The two characteristic roots at `z`, ordered by modulus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchPair {
    pub zeta_plus: Complex64,
    pub zeta_minus: Complex64,
    pub z: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EllipseGeometry {
    pub r: f64,
    pub major: f64,
    pub minor: f64,
    pub direction: f64,
    pub foci: (Complex64, Complex64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PointClass {
    Interior,
    OnCurve,
    Exterior,
    OnFocalSegment,
}

impl SymbolParams {
    /// Orders the coefficients so that `|a| >= |b|`.
    pub fn normalize(a: Complex64, b: Complex64) -> Result<Self> {
        if a == Complex64::new(0.0, 0.0) || b == Complex64::new(0.0, 0.0) {
            return Err(Error::ZeroCoefficient);
        }
        if !(a.re.is_finite() && a.im.is_finite() && b.re.is_finite() && b.im.is_finite()) {
            return Err(Error::InvalidConfig("coefficients must be finite".into()));
        }
        if b.norm() > a.norm() {
            Ok(Self { a: b, b: a, swapped: true })
        } else {
            Ok(Self { a, b, swapped: false })
        }
    }

    /// The coefficients in the orientation they were given: (superdiagonal, subdiagonal).
    pub fn original(&self) -> (Complex64, Complex64) {
        if self.swapped {
            (self.b, self.a)
        } else {
            (self.a, self.b)
        }
    }

    /// `r_min = sqrt(|b| / |a|)`, the radius whose image is the focal segment.
    pub fn r_min(&self) -> f64 {
        (self.b.norm() / self.a.norm()).sqrt()
    }

    /// Principal square root of the product `ab`.
    pub fn sqrt_ab(&self) -> Complex64 {
        (self.a * self.b).sqrt()
    }

    /// `p(xi) = a e^{i xi} + b e^{-i xi}`.
    pub fn symbol(&self, xi: f64) -> Complex64 {
        let e = Complex64::from_polar(1.0, xi);
        self.a * e + self.b / e
    }

    /// `f(zeta) = a zeta + b / zeta`.
    pub fn f(&self, zeta: Complex64) -> Result<Complex64> {
        if zeta == Complex64::new(0.0, 0.0) {
            return Err(Error::ZeroArgument);
        }
        Ok(self.a * zeta + self.b / zeta)
    }

    /// The focal points `(2 sqrt(ab), -2 sqrt(ab))`.
    pub fn focal_points(&self) -> (Complex64, Complex64) {
        let c = 2.0 * self.sqrt_ab();
        (c, -c)
    }

    /// Point of `E_r` at angle `theta`: `f(r e^{i theta})`.
    pub fn ellipse_point(&self, r: f64, theta: f64) -> Complex64 {
        let zeta = Complex64::from_polar(r, theta);
        self.a * zeta + self.b / zeta
    }

    pub fn ellipse_geometry(&self, r: f64) -> Result<EllipseGeometry> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::NonPositiveRadius(r));
        }
        let (abs_a, abs_b) = (self.a.norm(), self.b.norm());
        Ok(EllipseGeometry {
            r,
            major: abs_a * r + abs_b / r,
            minor: (abs_a * r - abs_b / r).abs(),
            direction: 0.5 * (self.a.arg() + self.b.arg()),
            foci: self.focal_points(),
        })
    }

    /// Solves `a zeta + b / zeta = z` for both roots.
    ///
    /// The larger root comes from the sign-matched discriminant and the
    /// smaller one from the product relation, so neither loses digits to
    /// cancellation. On the focal segment both roots have the same modulus;
    /// there `zeta_-` is the root with `Im(zeta_- / sqrt(b/a)) >= 0`.
    pub fn solve_characteristic(&self, z: Complex64) -> BranchPair {
        let e1 = z / self.a;
        let e2 = self.b / self.a;
        let disc = (e1 * e1 - 4.0 * e2).sqrt();
        let q = if (e1.conj() * disc).re >= 0.0 {
            0.5 * (e1 + disc)
        } else {
            0.5 * (e1 - disc)
        };
        // q = 0 would need e1 = 0 and e2 = 0, excluded by b != 0.
        let big = q;
        let small = e2 / q;

        let (mb, ms) = (big.norm(), small.norm());
        let (zeta_minus, zeta_plus) = if mb - ms > 4.0 * f64::EPSILON * mb {
            (big, small)
        } else {
            let s = e2.sqrt();
            if (big / s).im >= 0.0 {
                (big, small)
            } else {
                (small, big)
            }
        };
        BranchPair { zeta_plus, zeta_minus, z }
    }

    /// Classifies `z` relative to the ellipse `E_r`, `r >= r_min`.
    pub fn classify(&self, z: Complex64, r: f64) -> Result<PointClass> {
        let r_min = self.r_min();
        if !(r >= r_min * (1.0 - CLASSIFY_TOL)) {
            return Err(Error::RadiusBelowMinimum { r, r_min });
        }
        let pair = self.solve_characteristic(z);
        let m_minus = pair.zeta_minus.norm();
        let m_plus = pair.zeta_plus.norm();
        if m_minus - m_plus <= CLASSIFY_TOL * m_minus {
            return Ok(PointClass::OnFocalSegment);
        }
        if (m_minus - r).abs() <= CLASSIFY_TOL * r {
            Ok(PointClass::OnCurve)
        } else if m_minus < r {
            Ok(PointClass::Interior)
        } else {
            Ok(PointClass::Exterior)
        }
    }

    /// Euclidean distance from `z` to the focal segment `[-2 sqrt(ab), 2 sqrt(ab)]`.
    pub fn distance_to_focal_segment(&self, z: Complex64) -> f64 {
        segment_distance(z, 2.0 * self.sqrt_ab())
    }

    /// Euclidean distance from `z` to the curve `E_r`.
    pub fn distance_to_ellipse(&self, r: f64, z: Complex64) -> f64 {
        const COARSE: usize = 720;
        let dist2 = |t: f64| (z - self.ellipse_point(r, t)).norm_sqr();
        let step = std::f64::consts::TAU / COARSE as f64;
        let best = (0..COARSE)
            .map(|k| k as f64 * step)
            .min_by(|s, t| dist2(*s).total_cmp(&dist2(*t)))
            .unwrap_or(0.0);
        // golden-section refinement inside the bracketing cell
        let (mut lo, mut hi) = (best - step, best + step);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let mut x1 = hi - g * (hi - lo);
        let mut x2 = lo + g * (hi - lo);
        let (mut f1, mut f2) = (dist2(x1), dist2(x2));
        for _ in 0..80 {
            if f1 < f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - g * (hi - lo);
                f1 = dist2(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + g * (hi - lo);
                f2 = dist2(x2);
            }
        }
        f1.min(f2).min(dist2(best)).sqrt()
    }
}

impl BranchPair {
    pub fn modulus_minus(&self) -> f64 {
        self.zeta_minus.norm()
    }

    pub fn modulus_plus(&self) -> f64 {
        self.zeta_plus.norm()
    }

    /// `zeta_+ / zeta_-`, of modulus at most one.
    pub fn ratio(&self) -> Complex64 {
        self.zeta_plus / self.zeta_minus
    }
}

/// Distance from `z` to the segment `[-c, c]`.
pub(crate) fn segment_distance(z: Complex64, c: Complex64) -> f64 {
    let len2 = c.norm_sqr();
    if len2 == 0.0 {
        return z.norm();
    }
    let t = ((z * c.conj()).re / len2).clamp(-1.0, 1.0);
    (z - c * t).norm()
}
