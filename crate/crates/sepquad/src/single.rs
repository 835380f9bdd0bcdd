//! Single-constraint solver: closed-form box minimizer, bracket growth,
//! and bisection on the dual multiplier.
//!
//! For a [`SingleConstraintProblem`] the Lagrangian minimizer over the box
//! has a per-coordinate closed form, and the constraint value along it,
//! `g(y*(lambda))`, is nonincreasing in `lambda`. The solver either takes
//! the `lambda = 0` branch (constraint already inactive) or bisects for the
//! root of `g(y*(lambda))`.

use crate::model::SingleConstraintProblem;
use thiserror::Error;

/// Bracket growth stops once the trial multiplier exceeds this; a constraint
/// still active out here has no strictly feasible point in practice.
pub const BRACKET_CAP: f64 = 1e12;

/// Hard cap on bisection steps. With `hi <= 1e12`, 200 halvings shrink the
/// bracket far below any meaningful tolerance; this only triggers when the
/// requested tolerance is below attainable precision.
pub const BISECTION_ITER_CAP: usize = 200;

/// Relative bracket width below which further halving cannot move the
/// multiplier meaningfully; the constraint value is then evaluation-noise
/// limited and the bisection returns its best midpoint.
const WIDTH_FLOOR: f64 = 1e-13;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SingleSolveError {
    #[error("constraint stays active for every multiplier up to 1e12; no strictly feasible point")]
    BracketFailure,
}

/// A multiplier interval with `g(y*(lo)) >= 0 > g(y*(hi))`, so the root is
/// inside by monotonicity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BisectionBracket {
    pub lo: f64,
    pub hi: f64,
}

/// Output of [`solve_single`].
#[derive(Debug, Clone, PartialEq)]
pub struct SingleSolveResult {
    /// The multiplier found, `>= 0`.
    pub lambda_star: f64,
    /// `y*(lambda_star)`, componentwise inside the box.
    pub y_star: Vec<f64>,
    /// Constraint value at `y_star`.
    pub g_at_solution: f64,
    /// Bisection steps taken (0 when the `lambda = 0` branch was taken).
    pub bisection_iters: usize,
    /// True when `|g| <= eps` (and the complementarity product is within
    /// `eps`) was reached. False means the tolerance sits below attainable
    /// precision and `lambda_star` is the midpoint with the smallest `|g|`
    /// seen before the bracket collapsed.
    pub converged: bool,
}

/// Minimizer of the box-constrained Lagrangian at `lambda`:
/// `y_j = clamp(-(alpha_eff_j + lambda * beta_k_j) / (2 (delta_eff_j + lambda * theta_k_j)))`.
///
/// The denominator is strictly positive for `lambda >= 0` because
/// `delta_eff > 0` and `theta_k >= 0`. Panics if `lambda < 0`.
pub fn inner_minimizer(sub: &SingleConstraintProblem, lambda: f64) -> Vec<f64> {
    let mut y = Vec::with_capacity(sub.n());
    inner_minimizer_into(sub, lambda, &mut y);
    y
}

pub(crate) fn inner_minimizer_into(sub: &SingleConstraintProblem, lambda: f64, out: &mut Vec<f64>) {
    assert!(lambda >= 0.0, "negative multiplier {lambda}");
    out.clear();
    for j in 0..sub.n() {
        let den = 2.0 * (sub.delta_eff[j] + lambda * sub.theta_k[j]);
        let raw = -(sub.alpha_eff[j] + lambda * sub.beta_k[j]) / den;
        out.push(raw.clamp(sub.lower[j], sub.upper[j]));
    }
}

/// Find `hi` in the doubling sequence 1, 2, 4, ... with `g(y*(hi)) < 0`,
/// pairing it with `lo = 0`.
///
/// The caller is expected to have handled the `g(y*(0)) < 0` branch already;
/// on such input the returned bracket simply has `hi = 1`.
pub fn bracket(sub: &SingleConstraintProblem) -> Result<BisectionBracket, SingleSolveError> {
    let mut y = Vec::with_capacity(sub.n());
    let mut hi = 1.0;
    loop {
        inner_minimizer_into(sub, hi, &mut y);
        if sub.constraint_value(&y) < 0.0 {
            return Ok(BisectionBracket { lo: 0.0, hi });
        }
        hi *= 2.0;
        if hi > BRACKET_CAP {
            return Err(SingleSolveError::BracketFailure);
        }
    }
}

/// Solve the subproblem to tolerance `eps > 0`.
///
/// If `g(y*(0)) < 0` the constraint is inactive and `lambda = 0` is optimal.
/// Otherwise bisection maintains `g(y*(lo)) >= 0 > g(y*(hi))` and stops once
/// the midpoint satisfies both `|g| <= eps` and `lambda * |g| <= eps`, so
/// the returned pair also meets the complementarity tolerance used by the
/// cyclic solver's stop test. If the bracket collapses to relative width
/// [`WIDTH_FLOOR`] first, the tolerance is below attainable precision and
/// the best midpoint comes back with `converged = false`.
pub fn solve_single(
    sub: &SingleConstraintProblem,
    eps: f64,
) -> Result<SingleSolveResult, SingleSolveError> {
    assert!(eps > 0.0, "eps must be positive");

    let mut y = inner_minimizer(sub, 0.0);
    let g0 = sub.constraint_value(&y);
    if g0 < 0.0 {
        return Ok(SingleSolveResult {
            lambda_star: 0.0,
            y_star: y,
            g_at_solution: g0,
            bisection_iters: 0,
            converged: true,
        });
    }

    let BisectionBracket { mut lo, mut hi } = bracket(sub)?;
    let mut best = (f64::INFINITY, lo);
    let mut iters = 0;
    while iters < BISECTION_ITER_CAP {
        let mid = 0.5 * (lo + hi);
        iters += 1;
        inner_minimizer_into(sub, mid, &mut y);
        let g = sub.constraint_value(&y);
        if g.abs() <= eps && mid * g.abs() <= eps {
            return Ok(SingleSolveResult {
                lambda_star: mid,
                y_star: y,
                g_at_solution: g,
                bisection_iters: iters,
                converged: true,
            });
        }
        if g.abs() < best.0 {
            best = (g.abs(), mid);
        }
        if g > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= WIDTH_FLOOR * mid.max(1.0) {
            break;
        }
    }

    let lambda = best.1;
    inner_minimizer_into(sub, lambda, &mut y);
    let g = sub.constraint_value(&y);
    Ok(SingleSolveResult {
        lambda_star: lambda,
        y_star: y,
        g_at_solution: g,
        bisection_iters: iters,
        converged: false,
    })
}
