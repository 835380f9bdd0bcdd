//! Problem data types, validation, and evaluation.
//!
//! The problem family is
//!
//! ```text
//!     minimize     sum_j delta[j] y_j^2 + alpha[j] y_j
//!     subject to   sum_j theta[i][j] y_j^2 + beta[i][j] y_j + sigma[i] <= 0,   i = 0..m
//!                  lower <= y <= upper
//! ```
//!
//! with `delta > 0` (strongly convex objective) and `theta >= 0` (convex
//! constraints). All quadratic forms are diagonal, so every evaluation is a
//! single pass over the coordinates.

use crate::multi::IterationTrace;

/// Full problem data: diagonal objective, `m` diagonal quadratic
/// constraints, and box bounds. Constraint rows are stored densely.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    /// Number of variables.
    pub n: usize,
    /// Number of quadratic constraints (0 is allowed).
    pub m: usize,
    /// Diagonal of the objective quadratic, length `n`, strictly positive.
    pub delta: Vec<f64>,
    /// Objective linear term, length `n`.
    pub alpha: Vec<f64>,
    /// Constraint quadratic diagonals, `m` rows of length `n`, nonnegative.
    pub theta: Vec<Vec<f64>>,
    /// Constraint linear terms, `m` rows of length `n`.
    pub beta: Vec<Vec<f64>>,
    /// Constraint offsets, length `m`.
    pub sigma: Vec<f64>,
    /// Lower bounds, length `n`.
    pub lower: Vec<f64>,
    /// Upper bounds, length `n`, componentwise `>= lower`.
    pub upper: Vec<f64>,
}

/// A single-constraint subproblem produced by [`aggregate`]: the objective
/// has absorbed the fixed multipliers of every other constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleConstraintProblem {
    /// Effective objective diagonal: `delta + sum_{i != k} lambda_i * theta_i`.
    pub delta_eff: Vec<f64>,
    /// Effective linear term: `alpha + sum_{i != k} lambda_i * beta_i`.
    pub alpha_eff: Vec<f64>,
    /// Quadratic diagonal of the one remaining constraint.
    pub theta_k: Vec<f64>,
    /// Linear term of the one remaining constraint.
    pub beta_k: Vec<f64>,
    /// Offset of the one remaining constraint.
    pub sigma_k: f64,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// `sum_{i != k} lambda_i * sigma_i`, carried so dual values of the
    /// parent problem can be reported exactly.
    pub const_offset: f64,
}

impl SingleConstraintProblem {
    pub fn n(&self) -> usize {
        self.delta_eff.len()
    }

    /// Constraint value `sum_j theta_k[j] y_j^2 + beta_k[j] y_j + sigma_k`.
    pub fn constraint_value(&self, y: &[f64]) -> f64 {
        quad_form(&self.theta_k, &self.beta_k, self.sigma_k, y)
    }

    /// Effective objective value (fixed-multiplier terms absorbed, without
    /// `const_offset`).
    pub fn objective_value(&self, y: &[f64]) -> f64 {
        quad_form(&self.delta_eff, &self.alpha_eff, 0.0, y)
    }
}

/// Nonnegative multipliers, one per quadratic constraint.
///
/// Construction does not enforce the sign: solver output satisfies it, but
/// the certificate checker must be able to measure violations on arbitrary
/// input (e.g. a hand-edited report).
#[derive(Debug, Clone, PartialEq)]
pub struct DualVector(pub Vec<f64>);

impl DualVector {
    pub fn new(lambda: Vec<f64>) -> Self {
        DualVector(lambda)
    }

    pub fn zeros(m: usize) -> Self {
        DualVector(vec![0.0; m])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl std::ops::Deref for DualVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Residuals of the first-order optimality system at a primal/dual pair,
/// with box-bound multipliers derived from the gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct KKTCertificate {
    /// Gradient equation violation per coordinate, after the derived box
    /// multipliers have absorbed what they legally can.
    pub stationarity_residual: Vec<f64>,
    /// Derived multipliers for the lower bounds, nonnegative.
    pub eta_lower: Vec<f64>,
    /// Derived multipliers for the upper bounds, nonnegative.
    pub eta_upper: Vec<f64>,
    /// `lambda_i * g_i(y)` per constraint.
    pub comp_slack: Vec<f64>,
    /// `g_i(y)` per constraint (feasible iff `<= 0`).
    pub feasibility: Vec<f64>,
    /// Max distance of `y` outside the box.
    pub box_violation: f64,
    /// Infinity norm over all residual families.
    pub max_residual: f64,
}

/// Terminal state of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    /// Stop rule satisfied; under the default rule the certificate residual
    /// is within tolerance.
    Converged,
    /// The sweep limit was reached before the stop rule held.
    IterationCapReached,
    /// No multiplier made the named constraint inactive; the instance is
    /// infeasible or has no strictly feasible point.
    BracketFailure { constraint: usize },
    /// Validation rejected the instance; no solve was attempted.
    InvalidInstance,
}

impl SolveStatus {
    pub fn name(&self) -> &'static str {
        match self {
            SolveStatus::Converged => "converged",
            SolveStatus::IterationCapReached => "iteration_cap_reached",
            SolveStatus::BracketFailure { .. } => "bracket_failure",
            SolveStatus::InvalidInstance => "invalid_instance",
        }
    }
}

/// Everything a solve produces: primal point, multipliers, certificate,
/// and iteration trace when requested.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub y: Vec<f64>,
    pub lambda: DualVector,
    /// Number of subproblem solves performed.
    pub iterations: usize,
    pub certificate: KKTCertificate,
    /// Objective value at `y`.
    pub objective: f64,
    pub status: SolveStatus,
    /// Per-iteration snapshots, present when the solver was configured to
    /// record them.
    pub trace: Option<Vec<IterationTrace>>,
}

/// Outcome of [`validate`]: the list of violated invariants, each with its
/// index location. Empty means the instance is accepted by all solvers.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Check every instance invariant and report all violations at once.
/// Violations are data, not failures: this is a total function.
pub fn validate(instance: &ProblemInstance) -> ValidationReport {
    let mut out = Vec::new();
    let n = instance.n;
    let m = instance.m;

    if n == 0 {
        out.push("n must be at least 1".to_string());
    }
    check_len(&mut out, "delta", instance.delta.len(), n);
    check_len(&mut out, "alpha", instance.alpha.len(), n);
    check_len(&mut out, "lower", instance.lower.len(), n);
    check_len(&mut out, "upper", instance.upper.len(), n);
    check_len(&mut out, "sigma", instance.sigma.len(), m);
    if instance.theta.len() != m {
        out.push(format!(
            "theta has {} rows, expected m = {m}",
            instance.theta.len()
        ));
    }
    if instance.beta.len() != m {
        out.push(format!(
            "beta has {} rows, expected m = {m}",
            instance.beta.len()
        ));
    }
    for (i, row) in instance.theta.iter().enumerate() {
        if row.len() != n {
            out.push(format!(
                "theta[{i}] has length {}, expected n = {n}",
                row.len()
            ));
        }
    }
    for (i, row) in instance.beta.iter().enumerate() {
        if row.len() != n {
            out.push(format!(
                "beta[{i}] has length {}, expected n = {n}",
                row.len()
            ));
        }
    }

    for (j, &d) in instance.delta.iter().enumerate() {
        if !d.is_finite() {
            out.push(format!("delta[{j}] not finite"));
        } else if d <= 0.0 {
            out.push(format!("delta[{j}] not > 0"));
        }
    }
    for (j, &a) in instance.alpha.iter().enumerate() {
        if !a.is_finite() {
            out.push(format!("alpha[{j}] not finite"));
        }
    }
    for (i, row) in instance.theta.iter().enumerate() {
        for (j, &t) in row.iter().enumerate() {
            if !t.is_finite() {
                out.push(format!("theta[{i}][{j}] not finite"));
            } else if t < 0.0 {
                out.push(format!("theta[{i}][{j}] not >= 0"));
            }
        }
    }
    for (i, row) in instance.beta.iter().enumerate() {
        for (j, &b) in row.iter().enumerate() {
            if !b.is_finite() {
                out.push(format!("beta[{i}][{j}] not finite"));
            }
        }
    }
    for (i, &s) in instance.sigma.iter().enumerate() {
        if !s.is_finite() {
            out.push(format!("sigma[{i}] not finite"));
        }
    }
    for (j, &l) in instance.lower.iter().enumerate() {
        if !l.is_finite() {
            out.push(format!("lower[{j}] not finite"));
        }
    }
    for (j, &u) in instance.upper.iter().enumerate() {
        if !u.is_finite() {
            out.push(format!("upper[{j}] not finite"));
        }
    }
    for j in 0..instance.lower.len().min(instance.upper.len()) {
        let (l, u) = (instance.lower[j], instance.upper[j]);
        if l.is_finite() && u.is_finite() && l > u {
            out.push(format!("lower[{j}] > upper[{j}]"));
        }
    }

    ValidationReport { violations: out }
}

fn check_len(out: &mut Vec<String>, name: &str, got: usize, want: usize) {
    if got != want {
        out.push(format!("{name} has length {got}, expected {want}"));
    }
}

/// Diagonal quadratic `sum_j quad[j] y_j^2 + lin[j] y_j + constant`.
///
/// Every constraint and objective evaluation in the crate funnels through
/// this one kernel so that repeated evaluations of the same expression are
/// bit-identical (the summation order never varies).
pub(crate) fn quad_form(quad: &[f64], lin: &[f64], constant: f64, y: &[f64]) -> f64 {
    let mut acc = 0.0;
    for ((&q, &b), &v) in quad.iter().zip(lin).zip(y) {
        acc += q * v * v + b * v;
    }
    acc + constant
}

/// Objective value `sum_j delta[j] y_j^2 + alpha[j] y_j`.
///
/// Panics on dimension mismatch.
pub fn eval_objective(instance: &ProblemInstance, y: &[f64]) -> f64 {
    assert_eq!(y.len(), instance.n, "y has wrong length");
    quad_form(&instance.delta, &instance.alpha, 0.0, y)
}

/// Value of constraint `i` (0-based): `sum_j theta[i][j] y_j^2 + beta[i][j] y_j + sigma[i]`.
///
/// Panics if `i >= m` or on dimension mismatch.
pub fn eval_constraint(instance: &ProblemInstance, i: usize, y: &[f64]) -> f64 {
    assert!(
        i < instance.m,
        "constraint index {i} out of range (m = {})",
        instance.m
    );
    assert_eq!(y.len(), instance.n, "y has wrong length");
    quad_form(&instance.theta[i], &instance.beta[i], instance.sigma[i], y)
}

/// Fold the multipliers of every constraint except `k` into the objective,
/// producing the single-constraint subproblem in constraint `k`.
///
/// For `lambda >= 0` the effective diagonal stays strictly positive, so the
/// subproblem inherits strong convexity. Panics if `k >= m`.
pub fn aggregate(
    instance: &ProblemInstance,
    lambda: &DualVector,
    k: usize,
) -> SingleConstraintProblem {
    assert!(
        k < instance.m,
        "constraint index {k} out of range (m = {})",
        instance.m
    );
    assert_eq!(lambda.len(), instance.m, "lambda has wrong length");

    let mut delta_eff = instance.delta.clone();
    let mut alpha_eff = instance.alpha.clone();
    let mut const_offset = 0.0;
    for i in 0..instance.m {
        if i == k {
            continue;
        }
        let li = lambda[i];
        if li == 0.0 {
            continue;
        }
        let (theta_i, beta_i) = (&instance.theta[i], &instance.beta[i]);
        for j in 0..instance.n {
            delta_eff[j] += li * theta_i[j];
            alpha_eff[j] += li * beta_i[j];
        }
        const_offset += li * instance.sigma[i];
    }

    SingleConstraintProblem {
        delta_eff,
        alpha_eff,
        theta_k: instance.theta[k].clone(),
        beta_k: instance.beta[k].clone(),
        sigma_k: instance.sigma[k],
        lower: instance.lower.clone(),
        upper: instance.upper.clone(),
        const_offset,
    }
}
