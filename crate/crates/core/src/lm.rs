//! Levenberg damped least squares.

use serde::{Deserialize, Serialize};

use crate::numeric::{Mat, Vector};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LmOptions {
    pub initial_damping: f64,
    pub damping_up: f64,
    pub damping_down: f64,
    pub max_iterations: usize,
    pub step_tol: f64,
    pub residual_tol: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            initial_damping: 1e-3,
            damping_up: 10.0,
            damping_down: 0.5,
            max_iterations: 200,
            step_tol: 1e-12,
            residual_tol: 1e-10,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LmOutcome {
    pub x: Vector,
    pub residual_norm: f64,
    /// Trial steps taken, accepted or not.
    pub iterations: usize,
}

/// Minimize `||r(x)||` from `x0`. `residual` returns `None` where the model
/// is undefined; such trial points are rejected like an increase in cost.
pub fn minimize<R, J>(x0: Vector, residual: R, jacobian: J, opts: &LmOptions) -> LmOutcome
where
    R: Fn(&Vector) -> Option<Vector>,
    J: Fn(&Vector) -> Mat,
{
    let mut x = x0;
    let Some(mut r) = residual(&x) else {
        return LmOutcome {
            x,
            residual_norm: f64::INFINITY,
            iterations: 0,
        };
    };
    let mut cost = r.norm();
    let mut lambda = opts.initial_damping;
    let mut iterations = 0;
    let mut fresh_jacobian = true;
    let (mut jtj, mut jtr) = (Mat::zeros(0, 0), Vector::zeros(0));
    while iterations < opts.max_iterations && cost >= opts.residual_tol {
        if fresh_jacobian {
            let jac = jacobian(&x);
            jtj = jac.tr_mul(&jac);
            jtr = jac.tr_mul(&r);
            fresh_jacobian = false;
        }
        iterations += 1;
        let mut system = jtj.clone();
        for k in 0..system.nrows() {
            system[(k, k)] += lambda;
        }
        let Some(step) = system.cholesky().map(|c| c.solve(&(-&jtr))) else {
            lambda *= opts.damping_up;
            continue;
        };
        let step_norm = step.norm();
        let candidate = &x + &step;
        match residual(&candidate) {
            Some(rc) if rc.norm() < cost => {
                x = candidate;
                r = rc;
                cost = r.norm();
                lambda *= opts.damping_down;
                fresh_jacobian = true;
            }
            _ => lambda *= opts.damping_up,
        }
        if step_norm < opts.step_tol * (1.0 + x.norm()) || !lambda.is_finite() || lambda > 1e30 {
            break;
        }
    }
    LmOutcome {
        x,
        residual_norm: cost,
        iterations,
    }
}
