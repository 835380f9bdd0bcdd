//! Seeded random instance generator.
//!
//! Draw distributions:
//!
//! * `delta[j] ~ U[0,1]`, resampled on an exact zero draw so the objective
//!   stays strictly convex,
//! * `alpha[j] ~ U[-5,-2]`,
//! * `theta[i][j] ~ U[0,2]`, `beta[i][j] ~ U[0,5]`,
//! * `lower = -1`, `upper = 1`,
//! * a witness point `y0 ~ U[-1,1]^n` is drawn, and each offset
//!   `sigma[i] ~ U[-v_i - 1, -v_i]` with `v_i = g_i(y0) - sigma[i]`, which
//!   pins `g_i(y0)` into `[-1, 0]` and makes every instance feasible by
//!   construction.
//!
//! Determinism is per implementation: a fixed `(n, m, seed)` always yields
//! the same instance from this crate, but no particular bit stream is
//! promised across implementations.

use crate::model::{quad_form, validate, ProblemInstance};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generation request.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneratorSpec {
    pub n: usize,
    pub m: usize,
    pub seed: u64,
}

/// A generated instance together with the feasible witness point used to
/// place the constraint offsets. Solvers ignore the witness; tests and the
/// instance file format keep it.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedInstance {
    pub instance: ProblemInstance,
    pub witness: Vec<f64>,
}

/// Generate a feasible instance. Panics unless `n >= 1` and `m >= 1`.
pub fn generate(spec: &GeneratorSpec) -> GeneratedInstance {
    assert!(spec.n >= 1, "n must be at least 1");
    assert!(spec.m >= 1, "m must be at least 1");
    let (n, m) = (spec.n, spec.m);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let delta: Vec<f64> = (0..n)
        .map(|_| {
            let mut d = rng.gen_range(0.0..=1.0);
            while d == 0.0 {
                d = rng.gen_range(0.0..=1.0);
            }
            d
        })
        .collect();
    let alpha: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..=-2.0)).collect();
    let theta: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..n).map(|_| rng.gen_range(0.0..=2.0)).collect())
        .collect();
    let beta: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..n).map(|_| rng.gen_range(0.0..=5.0)).collect())
        .collect();
    let lower = vec![-1.0; n];
    let upper = vec![1.0; n];
    let witness: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();

    let sigma: Vec<f64> = (0..m)
        .map(|i| {
            let v = quad_form(&theta[i], &beta[i], 0.0, &witness);
            let mut s = rng.gen_range(-v - 1.0..=-v);
            // Rounding at the interval ends can push g_i(y0) = v + s a few
            // ulps outside [-1, 0]; nudge s back so the certified interval
            // holds in f64, not just in exact arithmetic.
            for _ in 0..4 {
                let g = v + s;
                if g > 0.0 {
                    s -= g;
                } else if g < -1.0 {
                    s += -1.0 - g;
                } else {
                    break;
                }
            }
            s
        })
        .collect();

    let instance = ProblemInstance {
        n,
        m,
        delta,
        alpha,
        theta,
        beta,
        sigma,
        lower,
        upper,
    };
    debug_assert!(validate(&instance).is_empty());
    GeneratedInstance { instance, witness }
}
