//! Independent verification machinery.
//!
//! [`oracle_dual_grid`] maximizes the Lagrangian dual by exhaustive grid
//! search with refinement. It shares nothing with the coordinate-ascent
//! path beyond the closed-form dual evaluation, so agreement between the
//! two is a meaningful cross-check. [`finite_difference_check`] probes the
//! dual gradient against central differences of the dual value.

use crate::model::{DualVector, ProblemInstance};
use crate::multi::{dual_gradient, dual_value, lagrangian_minimizer};
use thiserror::Error;

/// Points per grid axis: spacing is `lambda_max / 100` on the initial grid
/// and shrinks tenfold per refinement level.
const GRID_POINTS: usize = 101;

/// Upper limit for bracket expansion of the initial grid.
const EXPANSION_CAP: f64 = 1e6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("grid search is exponential in m; got m = {m}, limit 3")]
    TooManyConstraints { m: usize },
    #[error("dual optimum not bracketed below lambda_max = {lambda_max:e}")]
    NoBracket { lambda_max: f64 },
}

/// Best dual point found by the grid search.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub lambda_hat: DualVector,
    /// Closed-form minimizer at `lambda_hat`. May be slightly infeasible
    /// (within the dual-gap slack); compare objective values, not points.
    pub y_hat: Vec<f64>,
    /// Dual value at `lambda_hat`.
    pub value: f64,
    /// Final grid spacing per axis.
    pub grid_resolution: f64,
}

/// Maximize the dual over `[0, lambda_max]^m` by grid search plus `levels`
/// refinement rounds (tenfold shrink each).
///
/// If the best initial grid point sits on the upper boundary the grid is
/// re-tried with `lambda_max` grown tenfold, up to `1e6`.
pub fn oracle_dual_grid(
    instance: &ProblemInstance,
    lambda_max: f64,
    levels: usize,
) -> Result<OracleResult, OracleError> {
    if instance.m > 3 {
        return Err(OracleError::TooManyConstraints { m: instance.m });
    }
    assert!(lambda_max > 0.0, "lambda_max must be positive");
    assert!(levels >= 1, "levels must be at least 1");
    let m = instance.m;

    if m == 0 {
        let lambda = DualVector::zeros(0);
        let value = dual_value(instance, &lambda);
        let y_hat = lagrangian_minimizer(instance, &[]);
        return Ok(OracleResult {
            lambda_hat: lambda,
            y_hat,
            value,
            grid_resolution: 0.0,
        });
    }

    // Initial grid, expanding while the maximum sits on the upper boundary.
    let mut lmax = lambda_max;
    let (mut best_lambda, mut best_value);
    loop {
        let spacing = lmax / (GRID_POINTS - 1) as f64;
        let origin = vec![0.0; m];
        let (lam, val) = scan_grid(instance, &origin, spacing, None);
        let on_boundary = lam.iter().any(|&l| l >= lmax - 0.5 * spacing);
        if !on_boundary {
            best_lambda = lam;
            best_value = val;
            break;
        }
        if lmax >= EXPANSION_CAP {
            return Err(OracleError::NoBracket { lambda_max: lmax });
        }
        lmax = (lmax * 10.0).min(EXPANSION_CAP);
    }

    let mut spacing = lmax / (GRID_POINTS - 1) as f64;
    for _ in 0..levels {
        let new_spacing = spacing / 10.0;
        let half = (GRID_POINTS / 2) as f64 * new_spacing;
        let origin: Vec<f64> = best_lambda.iter().map(|&b| (b - half).max(0.0)).collect();
        let (lam, val) = scan_grid(
            instance,
            &origin,
            new_spacing,
            Some((best_lambda, best_value)),
        );
        best_lambda = lam;
        best_value = val;
        spacing = new_spacing;
    }

    let y_hat = lagrangian_minimizer(instance, &best_lambda);
    Ok(OracleResult {
        lambda_hat: DualVector::new(best_lambda),
        y_hat,
        value: best_value,
        grid_resolution: spacing,
    })
}

/// Evaluate the dual on `origin + idx * spacing` over all `GRID_POINTS^m`
/// index vectors, keeping the best point. `incumbent` seeds the comparison
/// so refinement can never regress.
fn scan_grid(
    instance: &ProblemInstance,
    origin: &[f64],
    spacing: f64,
    incumbent: Option<(Vec<f64>, f64)>,
) -> (Vec<f64>, f64) {
    let m = origin.len();
    let (mut best_lambda, mut best_value) = match incumbent {
        Some((lam, val)) => (lam, val),
        None => (origin.to_vec(), f64::NEG_INFINITY),
    };
    let mut idx = vec![0usize; m];
    let mut lambda = vec![0.0; m];
    loop {
        for d in 0..m {
            lambda[d] = origin[d] + idx[d] as f64 * spacing;
        }
        let value = dual_value(instance, &DualVector::new(lambda.clone()));
        if value > best_value {
            best_value = value;
            best_lambda = lambda.clone();
        }
        // mixed-radix increment
        let mut d = 0;
        loop {
            if d == m {
                return (best_lambda, best_value);
            }
            idx[d] += 1;
            if idx[d] < GRID_POINTS {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

/// Max componentwise gap between the dual gradient and a central finite
/// difference of the dual value with step `h`.
///
/// Panics unless `h > 0` and every `lambda_i >= h` (the probes must stay in
/// the nonnegative orthant).
pub fn finite_difference_check(instance: &ProblemInstance, lambda: &DualVector, h: f64) -> f64 {
    assert!(h > 0.0, "h must be positive");
    assert!(
        lambda.iter().all(|&l| l >= h),
        "every multiplier must be at least h"
    );
    let grad = dual_gradient(instance, lambda);
    let mut worst: f64 = 0.0;
    for i in 0..instance.m {
        let mut plus = lambda.to_vec();
        plus[i] += h;
        let mut minus = lambda.to_vec();
        minus[i] -= h;
        let fd = (dual_value(instance, &DualVector::new(plus))
            - dual_value(instance, &DualVector::new(minus)))
            / (2.0 * h);
        worst = worst.max((fd - grad[i]).abs());
    }
    worst
}
