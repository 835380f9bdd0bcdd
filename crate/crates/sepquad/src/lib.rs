//! Solver for separable convex quadratic programs with separable convex
//! quadratic constraints and box bounds.
//!
//! The target problem is
//!
//! ```text
//!     minimize     y' D y + a' y                    (D diagonal, D > 0)
//!     subject to   y' T_i y + b_i' y + s_i <= 0     (T_i diagonal, T_i >= 0)
//!                  lower <= y <= upper
//! ```
//!
//! Separability makes the box-constrained Lagrangian minimizer available in
//! closed form per coordinate, which turns the dual of the single-constraint
//! problem into a one-dimensional root-finding task ([`single`]) and the
//! multi-constraint problem into a cyclic dual coordinate ascent that solves
//! one such subproblem per iteration ([`multi`]).
//!
//! The crate also ships a seeded feasible-instance [`generator`], an
//! independent grid-search [`oracle`] for verification, and JSON file
//! schemas ([`io`]) shared with the `sepquad` command-line tool.
//!
//! # Example
//!
//! ```
//! use sepquad::generator::{generate, GeneratorSpec};
//! use sepquad::multi::{solve, SolverConfig};
//! use sepquad::model::SolveStatus;
//!
//! let gen = generate(&GeneratorSpec { n: 50, m: 2, seed: 1 });
//! let report = solve(&gen.instance, &SolverConfig::default());
//! assert_eq!(report.status, SolveStatus::Converged);
//! assert!(report.certificate.max_residual <= 1e-6);
//! ```

pub mod generator;
pub mod io;
pub mod model;
pub mod multi;
pub mod oracle;
pub mod single;

pub use model::{
    DualVector, KKTCertificate, ProblemInstance, SingleConstraintProblem, SolveReport, SolveStatus,
    ValidationReport,
};
pub use multi::{SolverConfig, StopRule};
