//! Zeros of holomorphic functions in a rectangle, by the argument principle.
//!
//! A rectangle's zero count is the winding number of `f` along its boundary.
//! Rectangles with a nonzero count are split into quadrants until each holds
//! a single zero and is small, then the zero is polished with Newton steps.
//! Split points are offset from the midpoint so that symmetric zero sets do
//! not land on box edges.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub lo: Complex64,
    pub hi: Complex64,
}

impl Rect {
    pub fn new(lo: Complex64, hi: Complex64) -> Self {
        Self { lo, hi }
    }

    fn width(&self) -> f64 {
        (self.hi.re - self.lo.re).max(self.hi.im - self.lo.im)
    }

    fn center(&self) -> Complex64 {
        0.5 * (self.lo + self.hi)
    }

    fn corners(&self) -> [Complex64; 4] {
        [
            self.lo,
            Complex64::new(self.hi.re, self.lo.im),
            self.hi,
            Complex64::new(self.lo.re, self.hi.im),
        ]
    }
}

const SPLIT: f64 = 0.5 + 0.013_7;
const MAX_DEPTH: usize = 60;

/// Winding number of `f` around the boundary of `rect`, or `None` when `f`
/// (nearly) vanishes on the boundary.
pub fn winding_number<F>(f: &F, rect: &Rect) -> Option<i64>
where
    F: Fn(Complex64) -> Complex64,
{
    let corners = rect.corners();
    let mut total = 0.0;
    for k in 0..4 {
        total += edge_arg_change(f, corners[k], corners[(k + 1) % 4], 0)?;
    }
    Some((total / TAU).round() as i64)
}

fn edge_arg_change<F>(f: &F, a: Complex64, b: Complex64, depth: usize) -> Option<f64>
where
    F: Fn(Complex64) -> Complex64,
{
    const SAMPLES: usize = 32;
    let mut prev = f(a);
    if !prev.norm().is_normal() {
        return None;
    }
    let mut total = 0.0;
    for k in 1..=SAMPLES {
        let t0 = (k - 1) as f64 / SAMPLES as f64;
        let t1 = k as f64 / SAMPLES as f64;
        let p1 = a + (b - a) * t1;
        let cur = f(p1);
        if !cur.norm().is_normal() {
            return None;
        }
        let step = (cur / prev).arg();
        if step.abs() > PI / 4.0 {
            if depth >= 12 {
                return None;
            }
            total += edge_arg_change(f, a + (b - a) * t0, p1, depth + 1)?;
        } else {
            total += step;
        }
        prev = cur;
    }
    Some(total)
}

/// All zeros of `f` inside `rect`, sorted by real then imaginary part.
pub fn find_zeros<F>(f: F, rect: Rect, tol: f64) -> Vec<Complex64>
where
    F: Fn(Complex64) -> Complex64,
{
    let mut out = Vec::new();
    search(&f, rect, tol, 0, &mut out);
    out.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    out
}

fn search<F>(f: &F, rect: Rect, tol: f64, depth: usize, out: &mut Vec<Complex64>)
where
    F: Fn(Complex64) -> Complex64,
{
    let count = match winding_number(f, &rect) {
        Some(c) => c,
        None => {
            // zero on the boundary: nudge the box outwards slightly and retry
            if depth >= MAX_DEPTH {
                return;
            }
            let pad = Complex64::new(1.0, 1.0) * (1e-7 * rect.width());
            return search(f, Rect::new(rect.lo - pad, rect.hi + pad), tol, depth + 1, out);
        }
    };
    if count <= 0 {
        return;
    }
    if count == 1 && rect.width() < 1e-3 {
        out.push(newton(f, rect.center(), tol));
        return;
    }
    if rect.width() < tol || depth >= MAX_DEPTH {
        // clustered zeros below resolution: report the center with multiplicity
        for _ in 0..count {
            out.push(rect.center());
        }
        return;
    }
    let mid = Complex64::new(
        rect.lo.re + SPLIT * (rect.hi.re - rect.lo.re),
        rect.lo.im + SPLIT * (rect.hi.im - rect.lo.im),
    );
    let quads = [
        Rect::new(rect.lo, mid),
        Rect::new(Complex64::new(mid.re, rect.lo.im), Complex64::new(rect.hi.re, mid.im)),
        Rect::new(mid, rect.hi),
        Rect::new(Complex64::new(rect.lo.re, mid.im), Complex64::new(mid.re, rect.hi.im)),
    ];
    for q in quads {
        search(f, q, tol, depth + 1, out);
    }
}

fn newton<F>(f: &F, mut z: Complex64, tol: f64) -> Complex64
where
    F: Fn(Complex64) -> Complex64,
{
    for _ in 0..50 {
        let h = 1e-6 * (1.0 + z.norm());
        let d = (f(z + h) - f(z - h)) / (2.0 * h);
        if d.norm() == 0.0 {
            break;
        }
        let step = f(z) / d;
        z -= step;
        if step.norm() < 0.01 * tol {
            break;
        }
    }
    z
}
