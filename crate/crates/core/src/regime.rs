//! Parameter ranges under which the density formula is accurate.
//!
//! The leading-term density is trustworthy when both
//! `N r0^{N-1} (1 - r0)^2 / delta` and `delta N^3` are small, `delta` is not
//! exponentially small in `N`, and the counting region stays a fixed margin
//! away from the focal segment and from `E_1`.

use serde::Serialize;

use crate::density::{coupling_term, growth_term};
use crate::error::{Error, Result};
use crate::symbol::SymbolParams;

/// Default bound on `term_growth + term_coupling`.
pub const DEFAULT_THRESHOLD: f64 = 0.2;

/// `C` in the floor `delta >= exp(-N / C)`.
pub const FLOOR_C: f64 = 5.0;

/// `C` in `r1 = r_min + 1/C` and in the lower bound `r0 >= 1/C`.
pub const MARGIN_C: f64 = 10.0;

/// Bisection tolerance for [`max_admissible_r0`].
pub const R0_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeReport {
    pub n: usize,
    pub delta: f64,
    pub r0: f64,
    pub r1: f64,
    pub term_growth: f64,
    pub term_coupling: f64,
    pub delta_floor: f64,
    pub delta_floor_ok: bool,
    pub r0_ok: bool,
    pub threshold: f64,
    pub verdict: Verdict,
}

impl RegimeReport {
    pub fn pass(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Inner radius `r_min + 1/C` of the admissible annulus.
pub fn r1_value(params: &SymbolParams) -> f64 {
    params.r_min() + 1.0 / MARGIN_C
}

/// Evaluates every regime condition; out-of-range input yields a failing verdict.
pub fn regime_report(params: &SymbolParams, n: usize, delta: f64, r0: f64, threshold: f64) -> RegimeReport {
    let nf = n as f64;
    let term_growth = growth_term(n, delta, r0);
    let term_coupling = coupling_term(n, delta);
    let delta_floor = (-nf / FLOOR_C).exp();
    let delta_floor_ok = delta >= delta_floor;
    let r0_ok = r0 >= 1.0 / MARGIN_C && r0 <= 1.0 - 1.0 / nf;
    let sane = n >= 2 && delta > 0.0 && r0 > 0.0 && r0 < 1.0;
    let small = term_growth + term_coupling <= threshold;
    let verdict = if sane && small && delta_floor_ok && r0_ok { Verdict::Pass } else { Verdict::Fail };
    RegimeReport {
        n,
        delta,
        r0,
        r1: r1_value(params),
        term_growth,
        term_coupling,
        delta_floor,
        delta_floor_ok,
        r0_ok,
        threshold,
        verdict,
    }
}

/// Like [`regime_report`], but a failing verdict is an error.
pub fn require_regime(params: &SymbolParams, n: usize, delta: f64, r0: f64, threshold: f64) -> Result<RegimeReport> {
    let report = regime_report(params, n, delta, r0, threshold);
    if report.pass() {
        Ok(report)
    } else {
        Err(Error::RegimeViolation(format!(
            "n = {n}, delta = {delta:e}, r0 = {r0}: growth {:.3e} + coupling {:.3e} vs threshold {threshold}, \
             floor ok = {}, r0 ok = {}",
            report.term_growth, report.term_coupling, report.delta_floor_ok, report.r0_ok
        )))
    }
}

/// Largest `r0` such that the growth term stays within `threshold - delta N^3`
/// on all of `[1/C, r0]`, to within [`R0_TOL`].
///
/// `r^{N-1} (1 - r)^2` increases up to `(N-1)/(N+1)` and decreases after it;
/// when even its peak fits the budget, every `r0 <= 1 - 1/N` qualifies.
pub fn max_admissible_r0(params: &SymbolParams, n: usize, delta: f64, threshold: f64) -> Result<f64> {
    let _ = params;
    if n < 2 {
        return Err(Error::DimensionTooSmall { n, min: 2 });
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidConfig(format!("delta must be positive, got {delta}")));
    }
    let nf = n as f64;
    let coupling = coupling_term(n, delta);
    if coupling >= threshold {
        return Err(Error::Infeasible(format!("delta N^3 = {coupling:.4e} already exceeds {threshold}")));
    }
    if delta < (-nf / FLOOR_C).exp() {
        return Err(Error::Infeasible(format!("delta = {delta:e} is below the floor exp(-N/{FLOOR_C})")));
    }
    let budget = threshold - coupling;
    let lo = 1.0 / MARGIN_C;
    let top = 1.0 - 1.0 / nf;
    if lo > top || growth_term(n, delta, lo) > budget {
        return Err(Error::Infeasible(format!("growth term exceeds {budget:.4e} already at r0 = {lo}")));
    }
    let peak = ((nf - 1.0) / (nf + 1.0)).min(top);
    if growth_term(n, delta, peak) <= budget {
        return Ok(top);
    }
    let (mut a, mut b) = (lo, peak);
    while b - a > R0_TOL {
        let mid = 0.5 * (a + b);
        if growth_term(n, delta, mid) <= budget {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(a)
}
