//! Dense eigenvalues of general complex matrices.
//!
//! Pipeline: optional diagonal balancing, Householder reduction to upper
//! Hessenberg form, then single-shift complex QR iteration (Wilkinson shifts
//! with occasional exceptional shifts) restricted to the active window.
//! Only eigenvalues are produced; no Schur vectors are accumulated.
//!
//! Balancing matters here. A bidiagonal Toeplitz matrix with `|a| != |b|` has
//! eigenvector condition numbers growing like `(|a|/|b|)^{n/2}`, so solving it
//! without scaling returns a ring of spurious eigenvalues near a
//! pseudospectral level curve. For tridiagonal input the scaling is computed
//! exactly (magnitudes of each off-diagonal pair are equalized); for general
//! input it is the iterative radix-2 row/column norm equalization.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Balance {
    /// Diagonal similarity scaling before the QR iteration.
    On,
    /// Solve the matrix as given.
    Off,
}

impl Balance {
    pub fn from_flag(no_balance: bool) -> Self {
        if no_balance {
            Balance::Off
        } else {
            Balance::On
        }
    }
}

/// Row-major square work array.
struct Work {
    n: usize,
    data: Vec<Complex64>,
}

impl Work {
    fn from_matrix(m: &DMatrix<Complex64>) -> Self {
        let n = m.nrows();
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(m[(i, j)]);
            }
        }
        Self { n, data }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.n + j] = v;
    }
}

#[inline]
fn cabs1(z: Complex64) -> f64 {
    z.re.abs() + z.im.abs()
}

/// Eigenvalues of a square complex matrix, with multiplicity.
pub fn eigenvalues(m: &DMatrix<Complex64>, balance: Balance) -> Result<Vec<Complex64>> {
    assert_eq!(m.nrows(), m.ncols(), "eigenvalues: matrix must be square");
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidConfig("matrix has non-finite entries".into()));
    }
    let n = m.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut w = Work::from_matrix(m);
    if balance == Balance::On {
        if is_tridiagonal(&w) {
            balance_tridiagonal(&mut w);
        } else {
            balance_general(&mut w);
        }
    }
    reduce_to_hessenberg(&mut w);
    hessenberg_qr(&mut w)
}

fn is_tridiagonal(w: &Work) -> bool {
    let n = w.n;
    for i in 0..n {
        for j in 0..n {
            if (i as isize - j as isize).abs() > 1 && w.at(i, j) != ZERO {
                return false;
            }
        }
    }
    true
}

/// Scales a tridiagonal matrix so that `|m[i][i+1]| == |m[i+1][i]|` wherever
/// both are nonzero. Ratios are applied locally, so no running product of
/// scale factors is formed and nothing overflows for large `n`.
fn balance_tridiagonal(w: &mut Work) {
    for i in 0..w.n.saturating_sub(1) {
        let up = w.at(i, i + 1);
        let down = w.at(i + 1, i);
        if up == ZERO || down == ZERO {
            continue;
        }
        // D^{-1} M D with d_{i+1}/d_i = s
        let s = (down.norm() / up.norm()).sqrt();
        w.set(i, i + 1, up * s);
        w.set(i + 1, i, down / s);
    }
}

/// Iterative radix-2 balancing of row and column 1-norms (no permutations).
fn balance_general(w: &mut Work) {
    const RADIX: f64 = 2.0;
    const RADIX2: f64 = RADIX * RADIX;
    const MAX_SWEEPS: usize = 2000;
    let n = w.n;
    for _ in 0..MAX_SWEEPS {
        let mut converged = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += cabs1(w.at(j, i));
                    r += cabs1(w.at(i, j));
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= RADIX2;
            }
            g = r * RADIX;
            while c >= g {
                f /= RADIX;
                c /= RADIX2;
            }
            if (c + r) / f < 0.95 * s {
                converged = false;
                let inv = 1.0 / f;
                for j in 0..n {
                    let v = w.at(i, j);
                    w.set(i, j, v * inv);
                }
                for j in 0..n {
                    let v = w.at(j, i);
                    w.set(j, i, v * f);
                }
            }
        }
        if converged {
            break;
        }
    }
}

/// Householder reduction to upper Hessenberg form, in place.
fn reduce_to_hessenberg(w: &mut Work) {
    let n = w.n;
    if n < 3 {
        return;
    }
    let mut v = vec![ZERO; n];
    for k in 0..n - 2 {
        let tail_norm2: f64 = (k + 2..n).map(|i| w.at(i, k).norm_sqr()).sum();
        if tail_norm2 == 0.0 {
            continue;
        }
        let x0 = w.at(k + 1, k);
        let alpha = (x0.norm_sqr() + tail_norm2).sqrt();
        let phase = if x0 == ZERO { Complex64::new(1.0, 0.0) } else { x0 / x0.norm() };
        // v = x + phase*alpha*e1, H = I - 2 v v^H / (v^H v)
        v[k + 1] = x0 + phase * alpha;
        for i in k + 2..n {
            v[i] = w.at(i, k);
        }
        let vnorm2: f64 = (k + 1..n).map(|i| v[i].norm_sqr()).sum();
        let beta = 2.0 / vnorm2;

        // left: rows k+1.., columns k..
        for j in k..n {
            let mut s = ZERO;
            for i in k + 1..n {
                s += v[i].conj() * w.at(i, j);
            }
            s *= beta;
            for i in k + 1..n {
                let val = w.at(i, j) - v[i] * s;
                w.set(i, j, val);
            }
        }
        // right: all rows, columns k+1..
        for i in 0..n {
            let mut s = ZERO;
            for j in k + 1..n {
                s += w.at(i, j) * v[j];
            }
            s *= beta;
            for j in k + 1..n {
                let val = w.at(i, j) - s * v[j].conj();
                w.set(i, j, val);
            }
        }
        for i in k + 2..n {
            w.set(i, k, ZERO);
        }
    }
}

/// Complex Givens rotation `[c s; -conj(s) c]` mapping `(f, g)` to `(r, 0)`.
#[inline]
fn givens(f: Complex64, g: Complex64) -> (f64, Complex64) {
    if g == ZERO {
        return (1.0, ZERO);
    }
    if f == ZERO {
        return (0.0, g.conj() / g.norm());
    }
    let fa = f.norm();
    let norm = fa.hypot(g.norm());
    let c = fa / norm;
    let s = (f / fa) * g.conj() / norm;
    (c, s)
}

/// Eigenvalues of an upper Hessenberg matrix by implicit single-shift QR.
fn hessenberg_qr(w: &mut Work) -> Result<Vec<Complex64>> {
    let n = w.n;
    let mut eig = vec![ZERO; n];
    let ulp = f64::EPSILON;
    let safe_min = f64::MIN_POSITIVE;
    let small_num = safe_min * (n as f64 / ulp);
    let itmax = 30 * n.max(10);

    let mut i = n as isize - 1;
    let mut total_iterations = 0usize;
    while i >= 0 {
        let iu = i as usize;
        let mut converged = false;
        let mut l = 0usize;
        for its in 0..=itmax {
            // look for a single small subdiagonal element
            let mut k = iu;
            while k > l {
                let sub = cabs1(w.at(k, k - 1));
                if sub <= small_num {
                    break;
                }
                let mut tst = cabs1(w.at(k - 1, k - 1)) + cabs1(w.at(k, k));
                if tst == 0.0 {
                    if k >= 2 {
                        tst += w.at(k - 1, k - 2).re.abs();
                    }
                    if k < iu {
                        tst += w.at(k + 1, k).re.abs();
                    }
                }
                if sub <= ulp * tst {
                    break;
                }
                k -= 1;
            }
            l = k;
            if l > 0 {
                w.set(l, l - 1, ZERO);
            }
            if l >= iu {
                converged = true;
                break;
            }
            total_iterations += 1;

            let shift = if its == 10 {
                Complex64::new(0.75 * w.at(l + 1, l).re.abs(), 0.0) + w.at(l, l)
            } else if its == 20 {
                Complex64::new(0.75 * w.at(iu, iu - 1).re.abs(), 0.0) + w.at(iu, iu)
            } else {
                wilkinson_shift(
                    w.at(iu - 1, iu - 1),
                    w.at(iu - 1, iu),
                    w.at(iu, iu - 1),
                    w.at(iu, iu),
                )
            };

            qr_sweep(w, l, iu, shift);
        }
        if !converged {
            return Err(Error::ConvergenceFailure { iterations: total_iterations });
        }
        eig[iu] = w.at(iu, iu);
        i -= 1;
    }
    Ok(eig)
}

/// Eigenvalue of `[[a, b], [c, d]]` closest to `d`.
fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let p = 0.5 * (a - d);
    let bc = b * c;
    if bc == ZERO {
        return d;
    }
    let disc = (p * p + bc).sqrt();
    let den1 = p + disc;
    let den2 = p - disc;
    let den = if den1.norm() >= den2.norm() { den1 } else { den2 };
    if den == ZERO {
        d
    } else {
        d - bc / den
    }
}

/// One implicit single-shift bulge chase on the active window `l..=i`.
fn qr_sweep(w: &mut Work, l: usize, i: usize, shift: Complex64) {
    let mut x = w.at(l, l) - shift;
    let mut y = w.at(l + 1, l);
    for k in l..i {
        if k > l {
            x = w.at(k, k - 1);
            y = w.at(k + 1, k - 1);
        }
        let (c, s) = givens(x, y);
        if k > l {
            w.set(k, k - 1, Complex64::new(c, 0.0) * x + s * y);
            w.set(k + 1, k - 1, ZERO);
        }
        let col_start = if k > l { k } else { l };
        for j in col_start..=i {
            let t1 = w.at(k, j);
            let t2 = w.at(k + 1, j);
            w.set(k, j, t1 * c + s * t2);
            w.set(k + 1, j, -s.conj() * t1 + t2 * c);
        }
        let row_end = (k + 2).min(i);
        for r in l..=row_end {
            let t1 = w.at(r, k);
            let t2 = w.at(r, k + 1);
            w.set(r, k, t1 * c + s.conj() * t2);
            w.set(r, k + 1, -s * t1 + t2 * c);
        }
    }
}

/// Hilbert-Schmidt (Frobenius) norm.
pub fn hs_norm(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
