//! Average eigenvalue density of Gaussian-perturbed bidiagonal Toeplitz matrices.
//!
//! For `P` with `a` on the superdiagonal and `b` on the subdiagonal, the
//! eigenvalues of `P + delta Q` (with `Q` a complex Gaussian matrix) settle,
//! on average, with density `(2/pi) d_z d_zbar ln K(z)` inside the ellipse
//! `E_1 = { a e^{i t} + b e^{-i t} }`. This crate computes that density, the
//! identities behind it, Monte Carlo ensembles to compare against, and the
//! parameter ranges in which the comparison is meaningful.

pub mod cli;
pub mod density;
pub mod eigen;
pub mod ensemble;
pub mod error;
pub mod io;
pub mod par;
pub mod quad;
pub mod regime;
pub mod symbol;
pub mod verify;

pub use error::{Error, Result};
pub use symbol::{BranchPair, EllipseGeometry, PointClass, SymbolParams};
