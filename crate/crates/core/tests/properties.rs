//! Property tests over random symbols and points.

use std::f64::consts::TAU;

use num_complex::Complex64;
use proptest::prelude::*;
use toeplitz_density::density::{k_inf, k_n, xi_density_auto, z_norm, z_vector, GridSpec};
use toeplitz_density::ensemble::unperturbed_spectrum;
use toeplitz_density::{PointClass, SymbolParams};

fn symbol() -> impl Strategy<Value = SymbolParams> {
    (0.2f64..3.0, -3.1f64..3.1, 0.05f64..0.95, -3.1f64..3.1).prop_map(|(ma, pa, ratio, pb)| {
        let a = Complex64::from_polar(ma, pa);
        let b = Complex64::from_polar(ma * ratio, pb);
        SymbolParams::normalize(a, b).unwrap()
    })
}

/// A point `f(rho e^{i theta})` with `|zeta_-| = rho` inside `(r_min, 1)`.
fn inner_point(params: &SymbolParams, s: f64, theta: f64) -> (f64, Complex64) {
    let r = params.r_min();
    let rho = r + (1.0 - r) * (0.05 + 0.9 * s);
    (rho, params.ellipse_point(rho, theta))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn characteristic_roots_solve_the_equation(params in symbol(), x in -4.0f64..4.0, y in -4.0f64..4.0) {
        let z = Complex64::new(x, y);
        prop_assume!(params.distance_to_focal_segment(z) > 1e-9);
        let pair = params.solve_characteristic(z);
        let scale = z.norm() + params.a.norm() + params.b.norm();
        prop_assert!(pair.modulus_plus() <= pair.modulus_minus() * (1.0 + 1e-12));
        for w in [pair.zeta_plus, pair.zeta_minus] {
            prop_assert!((params.f(w).unwrap() - z).norm() <= 1e-12 * scale * (1.0 + 1.0 / w.norm()));
        }
        let prod = pair.zeta_plus * pair.zeta_minus;
        prop_assert!((prod - params.b / params.a).norm() <= 1e-12 * (params.b / params.a).norm());
        prop_assert!((pair.zeta_plus + pair.zeta_minus - z / params.a).norm() <= 1e-12 * scale / params.a.norm());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn confocal_ellipses_are_nested(params in symbol(), s in 0.0f64..1.0, t in 0.0f64..1.0, theta in 0.0f64..TAU) {
        let r = params.r_min();
        let (lo, hi) = (s.min(t), s.max(t));
        prop_assume!(hi - lo > 1e-3);
        let r_small = r + (1.5 - r) * (0.01 + 0.98 * lo);
        let r_big = r + (1.5 - r) * (0.01 + 0.98 * hi);
        let z = params.ellipse_point(r_small, theta);
        prop_assert_eq!(params.classify(z, r_big).unwrap(), PointClass::Interior);
        let w = params.ellipse_point(r_big, theta);
        prop_assert_eq!(params.classify(w, r_small).unwrap(), PointClass::Exterior);
    }

    #[test]
    fn zeta_minus_is_continuous_off_the_segment(params in symbol(), s in 0.0f64..1.0, theta in 0.0f64..TAU, dir in 0.0f64..TAU) {
        let (_, z) = inner_point(&params, s, theta);
        let d = params.distance_to_focal_segment(z);
        let step = Complex64::from_polar(1e-4 * d, dir);
        let z0 = params.solve_characteristic(z).zeta_minus;
        let z1 = params.solve_characteristic(z + step).zeta_minus;
        // |d zeta_- / dz| = 1 / |a - b / zeta_-^2|
        let deriv = 1.0 / (params.a - params.b / (z0 * z0)).norm();
        prop_assert!((z1 - z0).norm() <= 2.0 * deriv * step.norm() + 1e-12);
    }

    #[test]
    fn k_n_is_the_hilbert_schmidt_norm_and_increases(params in symbol(), s in 0.0f64..1.0, theta in 0.0f64..TAU, n in 1usize..128) {
        let (_, z) = inner_point(&params, s, theta);
        let k = k_n(&params, n, z).unwrap();
        prop_assert_eq!(k, z_norm(&params, n, z).unwrap());
        let hs = z_vector(&params, n, z).unwrap().iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        prop_assert!((k - hs).abs() <= 1e-12 * k);
        let next = k_n(&params, n + 1, z).unwrap();
        prop_assert!(next >= k);
        prop_assert!(k <= k_inf(&params, z).unwrap() * (1.0 + 1e-12));
    }

    #[test]
    fn density_is_positive_inside_the_ellipse(params in symbol(), s in 0.0f64..1.0, theta in 0.0f64..TAU) {
        let (_, z) = inner_point(&params, s, theta);
        prop_assert!(xi_density_auto(&params, z).unwrap() > 0.0);
    }

    #[test]
    fn unperturbed_spectrum_is_symmetric(params in symbol(), n in 1usize..60) {
        let v = unperturbed_spectrum(&params, n);
        prop_assert_eq!(v.len(), n);
        for k in 0..n {
            prop_assert!((v[k] + v[n - 1 - k]).norm() <= 1e-12 * (1.0 + v[k].norm()));
            prop_assert!(params.distance_to_focal_segment(v[k]) <= 1e-12 * (1.0 + v[k].norm()));
        }
    }

    #[test]
    fn histogram_cells_are_half_open(x in -1.0f64..1.0, y in -1.0f64..1.0, cells in 1usize..40) {
        let g = GridSpec::square(1.0, cells);
        let (ix, iy) = g.locate(Complex64::new(x, y)).unwrap();
        let c = g.center(ix, iy);
        prop_assert!(x >= c.re - 0.5 * g.dx() - 1e-12 && x < c.re + 0.5 * g.dx() + 1e-12);
        prop_assert!(y >= c.im - 0.5 * g.dy() - 1e-12 && y < c.im + 0.5 * g.dy() + 1e-12);
    }
}

#[test]
fn histogram_upper_boundary_goes_to_last_cell() {
    let g = GridSpec::square(1.0, 10);
    assert_eq!(g.locate(Complex64::new(1.0, 1.0)), Some((9, 9)));
    assert_eq!(g.locate(Complex64::new(-1.0, -1.0)), Some((0, 0)));
    assert_eq!(g.locate(Complex64::new(1.0 + 1e-12, 0.0)), None);
}
