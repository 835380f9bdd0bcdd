//! Cyclic dual coordinate ascent over the constraints.
//!
//! Starting from all-zero multipliers, each iteration folds the fixed
//! multipliers into the objective ([`crate::model::aggregate`]), solves the
//! resulting single-constraint problem ([`crate::single::solve_single`]),
//! and writes the new multiplier back. The loop stops once every constraint
//! passes the stop test, or after `max_iters` subproblem solves.
//!
//! Each coordinate update maximizes the Lagrangian dual in that coordinate,
//! so the dual value is nondecreasing along the iterations; with
//! `track_dual_values` the solver records it per iteration.

use crate::model::{
    aggregate, eval_constraint, eval_objective, quad_form, validate, DualVector, KKTCertificate,
    ProblemInstance, SolveReport, SolveStatus,
};
use crate::single::{solve_single, SingleSolveError};

/// With several constraints, each subproblem is solved tighter than the
/// outer tolerance by this factor: an `eps`-accurate multiplier update can
/// perturb the other constraints' values at the stop-threshold scale, and
/// the tighter updates keep the simultaneous stop test governed by the
/// ascent alone. A single constraint has no cross-perturbation, so `m = 1`
/// keeps the caller's tolerance (and the exact bisection path of a direct
/// [`solve_single`] call).
const SUBPROBLEM_EPS_FACTOR: f64 = 1e-3;

/// Per-constraint stop test applied after every subproblem solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StopRule {
    /// Constraint `i` passes iff `g_i(y) <= eps` AND `|lambda_i g_i(y)| <= eps`.
    /// A point accepted under this rule is an eps-accurate KKT point.
    #[default]
    And,
    /// Constraint `i` passes iff `g_i(y) <= eps` OR `|lambda_i g_i(y)| <= eps`.
    /// This looser test can accept points that are not eps-KKT (an untouched
    /// constraint with a zero multiplier always passes); it exists for
    /// iteration-count comparisons with solvers that use it, not for
    /// production use.
    Or,
}

/// Solver knobs. `Default` gives `eps = 1e-6`, `max_iters = 1000`, no
/// tracking, the `And` stop rule, and a cold start.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Tolerance for the stop test and the subproblem bisections.
    pub eps: f64,
    /// Cap on subproblem solves.
    pub max_iters: usize,
    /// Record the dual value per iteration in the trace.
    pub track_dual_values: bool,
    pub stop_rule: StopRule,
    /// Start from these multipliers instead of zeros.
    pub warm_start: Option<DualVector>,
    /// Index of the first constraint to update (cyclic offset).
    pub start_constraint: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            eps: 1e-6,
            max_iters: 1000,
            track_dual_values: false,
            stop_rule: StopRule::And,
            warm_start: None,
            start_constraint: 0,
        }
    }
}

/// Snapshot taken after one subproblem solve.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace {
    /// 1-based iteration number (count of subproblem solves so far).
    pub iteration: usize,
    /// Constraint whose multiplier was updated (0-based).
    pub k_updated: usize,
    pub lambda_after: DualVector,
    /// Lagrangian dual value at `lambda_after`, when tracking is on.
    pub dual_value: Option<f64>,
    /// Number of constraints passing the stop test at this point.
    pub index_count: usize,
}

/// Solve the full instance by cyclic dual coordinate ascent.
///
/// Total function: validation failures, bracket failures, and the iteration
/// cap are reported through [`SolveStatus`] rather than an error. With
/// `m = 0` the box-clamped unconstrained minimizer is returned directly.
pub fn solve(instance: &ProblemInstance, config: &SolverConfig) -> SolveReport {
    assert!(config.eps > 0.0, "eps must be positive");
    assert!(config.max_iters >= 1, "max_iters must be at least 1");

    if !validate(instance).is_empty() {
        return SolveReport {
            y: Vec::new(),
            lambda: DualVector::zeros(0),
            iterations: 0,
            certificate: empty_certificate(),
            objective: f64::NAN,
            status: SolveStatus::InvalidInstance,
            trace: None,
        };
    }

    let m = instance.m;
    let mut lambda: Vec<f64> = match &config.warm_start {
        Some(w) => {
            assert_eq!(w.len(), m, "warm start has wrong length");
            assert!(
                w.iter().all(|&l| l >= 0.0),
                "warm start has negative multiplier"
            );
            w.to_vec()
        }
        None => vec![0.0; m],
    };

    if m == 0 {
        let y = lagrangian_minimizer(instance, &lambda);
        let certificate = kkt_residuals(instance, &DualVector::zeros(0), &y, config.eps);
        let status = if certificate.max_residual <= config.eps {
            SolveStatus::Converged
        } else {
            SolveStatus::IterationCapReached
        };
        return SolveReport {
            objective: eval_objective(instance, &y),
            y,
            lambda: DualVector::zeros(0),
            iterations: 0,
            certificate,
            status,
            trace: None,
        };
    }

    assert!(config.start_constraint < m, "start_constraint out of range");

    let mut y = lagrangian_minimizer(instance, &lambda);
    let mut trace: Option<Vec<IterationTrace>> = config.track_dual_values.then(Vec::new);
    let mut k = config.start_constraint;
    let mut iterations = 0;
    let subproblem_eps = if m == 1 {
        config.eps
    } else {
        config.eps * SUBPROBLEM_EPS_FACTOR
    };

    // A warm start that already satisfies the stop test is a fixed point:
    // return it untouched instead of re-solving a subproblem (which would
    // move the multipliers within their tolerance tubes).
    if config.warm_start.is_some() && count_passing(instance, &lambda, &y, config) == m {
        let lambda = DualVector::new(lambda);
        let certificate = kkt_residuals(instance, &lambda, &y, config.eps);
        return SolveReport {
            objective: eval_objective(instance, &y),
            y,
            lambda,
            iterations: 0,
            certificate,
            status: SolveStatus::Converged,
            trace,
        };
    }

    let status = loop {
        if iterations >= config.max_iters {
            break SolveStatus::IterationCapReached;
        }
        iterations += 1;

        let sub = aggregate(instance, &DualVector::new(lambda.clone()), k);
        match solve_single(&sub, subproblem_eps) {
            Ok(res) => {
                lambda[k] = res.lambda_star;
                y = res.y_star;
            }
            Err(SingleSolveError::BracketFailure) => {
                break SolveStatus::BracketFailure { constraint: k };
            }
        }

        let index_count = count_passing(instance, &lambda, &y, config);

        if let Some(rows) = trace.as_mut() {
            rows.push(IterationTrace {
                iteration: iterations,
                k_updated: k,
                lambda_after: DualVector::new(lambda.clone()),
                dual_value: Some(dual_value(instance, &DualVector::new(lambda.clone()))),
                index_count,
            });
        }

        if index_count == m {
            break SolveStatus::Converged;
        }
        k = (k + 1) % m;
    };

    let lambda = DualVector::new(lambda);
    let certificate = kkt_residuals(instance, &lambda, &y, config.eps);
    SolveReport {
        objective: eval_objective(instance, &y),
        y,
        lambda,
        iterations,
        certificate,
        status,
        trace,
    }
}

/// Number of constraints passing the per-constraint stop test at `(lambda, y)`.
fn count_passing(
    instance: &ProblemInstance,
    lambda: &[f64],
    y: &[f64],
    config: &SolverConfig,
) -> usize {
    (0..instance.m)
        .filter(|&i| {
            let g = eval_constraint(instance, i, y);
            let feasible = g <= config.eps;
            let complementary = (lambda[i] * g).abs() <= config.eps;
            match config.stop_rule {
                StopRule::And => feasible && complementary,
                StopRule::Or => feasible || complementary,
            }
        })
        .count()
}

/// Lagrangian dual value `L(lambda) = min over the box of
/// f(y) + sum_i lambda_i g_i(y)`, computed exactly through the closed-form
/// minimizer of the fully aggregated problem.
pub fn dual_value(instance: &ProblemInstance, lambda: &DualVector) -> f64 {
    let (delta_full, alpha_full, offset) = aggregate_all(instance, lambda);
    let y = clamped_minimizer(&delta_full, &alpha_full, &instance.lower, &instance.upper);
    quad_form(&delta_full, &alpha_full, 0.0, &y) + offset
}

/// Gradient of the dual: `(g_1(y*(lambda)), ..., g_m(y*(lambda)))` at the
/// fully aggregated closed-form minimizer.
pub fn dual_gradient(instance: &ProblemInstance, lambda: &DualVector) -> Vec<f64> {
    let y = lagrangian_minimizer(instance, lambda.as_slice());
    (0..instance.m)
        .map(|i| eval_constraint(instance, i, &y))
        .collect()
}

/// Minimizer over the box of the Lagrangian with all `m` multipliers folded
/// in.
pub fn lagrangian_minimizer(instance: &ProblemInstance, lambda: &[f64]) -> Vec<f64> {
    let lambda = DualVector::new(lambda.to_vec());
    let (delta_full, alpha_full, _) = aggregate_all(instance, &lambda);
    clamped_minimizer(&delta_full, &alpha_full, &instance.lower, &instance.upper)
}

fn aggregate_all(instance: &ProblemInstance, lambda: &DualVector) -> (Vec<f64>, Vec<f64>, f64) {
    assert_eq!(lambda.len(), instance.m, "lambda has wrong length");
    let mut delta_full = instance.delta.clone();
    let mut alpha_full = instance.alpha.clone();
    let mut offset = 0.0;
    for i in 0..instance.m {
        let li = lambda[i];
        if li == 0.0 {
            continue;
        }
        let (theta_i, beta_i) = (&instance.theta[i], &instance.beta[i]);
        for j in 0..instance.n {
            delta_full[j] += li * theta_i[j];
            alpha_full[j] += li * beta_i[j];
        }
        offset += li * instance.sigma[i];
    }
    (delta_full, alpha_full, offset)
}

fn clamped_minimizer(delta: &[f64], alpha: &[f64], lower: &[f64], upper: &[f64]) -> Vec<f64> {
    (0..delta.len())
        .map(|j| (-alpha[j] / (2.0 * delta[j])).clamp(lower[j], upper[j]))
        .collect()
}

/// Residuals of the optimality system at `(lambda, y)`.
///
/// The gradient of the aggregated Lagrangian,
/// `s_j = 2 (delta_j + sum_i lambda_i theta_i_j) y_j + alpha_j + sum_i lambda_i beta_i_j`,
/// may be absorbed by a derived bound multiplier when `y_j` sits within
/// `eps` of that bound: `eta_lower_j = max(s_j, 0)` near the lower bound,
/// `eta_upper_j = max(-s_j, 0)` near the upper. What remains is the
/// stationarity residual. `max_residual` is the infinity norm over
/// stationarity, positive feasibility violations, complementarity slack,
/// box violation, and negative multipliers.
pub fn kkt_residuals(
    instance: &ProblemInstance,
    lambda: &DualVector,
    y: &[f64],
    eps: f64,
) -> KKTCertificate {
    assert_eq!(y.len(), instance.n, "y has wrong length");
    let (delta_full, alpha_full, _) = aggregate_all(instance, lambda);

    let n = instance.n;
    let mut stationarity_residual = Vec::with_capacity(n);
    let mut eta_lower = Vec::with_capacity(n);
    let mut eta_upper = Vec::with_capacity(n);
    let mut box_violation: f64 = 0.0;
    let mut max_residual: f64 = 0.0;

    for j in 0..n {
        let s = 2.0 * delta_full[j] * y[j] + alpha_full[j];
        let near_lower = (y[j] - instance.lower[j]).abs() <= eps;
        let near_upper = (y[j] - instance.upper[j]).abs() <= eps;
        let el = if near_lower { s.max(0.0) } else { 0.0 };
        let eu = if near_upper { (-s).max(0.0) } else { 0.0 };
        let r = s - el + eu;
        stationarity_residual.push(r);
        eta_lower.push(el);
        eta_upper.push(eu);
        box_violation = box_violation
            .max(instance.lower[j] - y[j])
            .max(y[j] - instance.upper[j]);
        max_residual = max_residual.max(r.abs());
    }
    box_violation = box_violation.max(0.0);
    max_residual = max_residual.max(box_violation);

    let mut comp_slack = Vec::with_capacity(instance.m);
    let mut feasibility = Vec::with_capacity(instance.m);
    for i in 0..instance.m {
        let g = eval_constraint(instance, i, y);
        let slack = lambda[i] * g;
        comp_slack.push(slack);
        feasibility.push(g);
        max_residual = max_residual
            .max(g.max(0.0))
            .max(slack.abs())
            .max(-lambda[i]);
    }

    KKTCertificate {
        stationarity_residual,
        eta_lower,
        eta_upper,
        comp_slack,
        feasibility,
        box_violation,
        max_residual,
    }
}

fn empty_certificate() -> KKTCertificate {
    KKTCertificate {
        stationarity_residual: Vec::new(),
        eta_lower: Vec::new(),
        eta_upper: Vec::new(),
        comp_slack: Vec::new(),
        feasibility: Vec::new(),
        box_violation: 0.0,
        max_residual: f64::INFINITY,
    }
}
