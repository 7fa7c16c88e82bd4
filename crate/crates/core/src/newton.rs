//! Damped Gauss-Newton for small polynomial systems.
//!
//! Steps are minimum-norm least-squares solutions of `J s = -r` computed by SVD,
//! so square, over- and underdetermined systems share one code path. The line
//! search is Armijo backtracking on `0.5 * ||r||^2`.

use nalgebra::{DMatrix, DVector};

use crate::model::FaceSystem;

pub trait System {
    fn n_vars(&self) -> usize;
    fn eval(&self, y: &[f64]) -> Vec<f64>;
    fn jacobian(&self, y: &[f64]) -> DMatrix<f64>;
}

impl System for FaceSystem<'_> {
    fn n_vars(&self) -> usize {
        self.n_unknowns()
    }

    fn eval(&self, y: &[f64]) -> Vec<f64> {
        FaceSystem::eval(self, y)
    }

    fn jacobian(&self, y: &[f64]) -> DMatrix<f64> {
        FaceSystem::jacobian(self, y)
    }
}

#[derive(Debug, Clone)]
pub struct NewtonOutcome {
    pub y: Vec<f64>,
    /// `||r||_inf` at the returned point.
    pub residual: f64,
    pub iterations: usize,
}

/// Iterates are abandoned beyond this magnitude.
const DIVERGENCE: f64 = 1e8;
const ARMIJO_C: f64 = 1e-4;
/// Iteration stops when `0.5 ||r||^2` falls by less than this factor over
/// `STALL_WINDOW` iterations. Multiple roots still shrink it by far more.
const STALL_FACTOR: f64 = 0.5;
const STALL_WINDOW: usize = 5;

/// Runs until the residual is exactly zero, the step stalls at rounding
/// level, the objective stagnates, the line search fails or `max_iter` is
/// reached. Stopping on step
/// size rather than residual lets slowly converging double roots reach the
/// face boundary. Returns `None` if evaluation produced a non-finite value at
/// the start point.
pub fn damped_newton<S: System>(sys: &S, y0: &[f64], max_iter: usize) -> Option<NewtonOutcome> {
    let mut y = y0.to_vec();
    let mut r = sys.eval(&y);
    if r.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let mut f = half_sq(&r);
    let mut history = vec![f];
    let mut iterations = 0;
    while iterations < max_iter {
        if r.iter().all(|v| *v == 0.0) {
            break;
        }
        iterations += 1;
        let jac = sys.jacobian(&y);
        let Some(step) = least_squares_step(&jac, &r) else { break };
        let slope = directional(&jac, &r, &step);
        if !(slope < 0.0) {
            break;
        }
        let mut t = 1.0;
        let mut accepted = None;
        while t > 1e-12 {
            let trial: Vec<f64> = y.iter().zip(&step).map(|(a, s)| a + t * s).collect();
            let rt = sys.eval(&trial);
            let ft = half_sq(&rt);
            if ft.is_finite() && ft <= f + ARMIJO_C * t * slope {
                accepted = Some((trial, rt, ft));
                break;
            }
            t *= 0.5;
        }
        let Some((trial, rt, ft)) = accepted else { break };
        let moved = step.iter().fold(0.0f64, |acc, s| acc.max((t * s).abs()));
        let scale = 1.0 + y.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        y = trial;
        r = rt;
        f = ft;
        if moved <= 1e-15 * scale || scale > DIVERGENCE {
            break;
        }
        history.push(f);
        if history.len() > STALL_WINDOW && f > STALL_FACTOR * history[history.len() - 1 - STALL_WINDOW] {
            break;
        }
    }
    let residual = r.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    Some(NewtonOutcome { y, residual, iterations })
}

fn half_sq(r: &[f64]) -> f64 {
    0.5 * r.iter().map(|v| v * v).sum::<f64>()
}

fn least_squares_step(jac: &DMatrix<f64>, r: &[f64]) -> Option<Vec<f64>> {
    if jac.ncols() == 0 || jac.nrows() == 0 {
        return None;
    }
    let svd = jac.clone().svd(true, true);
    let smax = svd.singular_values.iter().fold(0.0f64, |a, s| a.max(*s));
    if smax == 0.0 || !smax.is_finite() {
        return None;
    }
    let rhs = DVector::from_iterator(r.len(), r.iter().map(|v| -v));
    let sol = svd.solve(&rhs, smax * 1e-13).ok()?;
    let step: Vec<f64> = sol.iter().copied().collect();
    if step.iter().all(|s| *s == 0.0) || step.iter().any(|s| !s.is_finite()) {
        return None;
    }
    Some(step)
}

/// Derivative of `0.5 ||r||^2` along `step`: `r^T J step`.
fn directional(jac: &DMatrix<f64>, r: &[f64], step: &[f64]) -> f64 {
    let s = DVector::from_column_slice(step);
    let js = jac * s;
    js.iter().zip(r).map(|(a, b)| a * b).sum()
}

/// Smallest over largest singular value (0 for an all-zero matrix).
pub fn singular_ratio(jac: &DMatrix<f64>) -> f64 {
    if jac.ncols() == 0 || jac.nrows() == 0 {
        return 1.0;
    }
    let sv = jac.clone().singular_values();
    let smax = sv.iter().fold(0.0f64, |a, s| a.max(*s));
    if smax == 0.0 {
        return 0.0;
    }
    // rank-deficient when fewer rows than columns
    if jac.nrows() < jac.ncols() {
        return 0.0;
    }
    let smin = sv.iter().fold(f64::INFINITY, |a, s| a.min(*s));
    smin / smax
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Circle;

    impl System for Circle {
        fn n_vars(&self) -> usize {
            2
        }
        fn eval(&self, y: &[f64]) -> Vec<f64> {
            vec![y[0] * y[0] + y[1] * y[1] - 4.0, y[0] - y[1]]
        }
        fn jacobian(&self, y: &[f64]) -> DMatrix<f64> {
            DMatrix::from_row_slice(2, 2, &[2.0 * y[0], 2.0 * y[1], 1.0, -1.0])
        }
    }

    struct DoubleRoot;

    impl System for DoubleRoot {
        fn n_vars(&self) -> usize {
            1
        }
        fn eval(&self, y: &[f64]) -> Vec<f64> {
            vec![y[0] * y[0]]
        }
        fn jacobian(&self, y: &[f64]) -> DMatrix<f64> {
            DMatrix::from_element(1, 1, 2.0 * y[0])
        }
    }

    #[test]
    fn converges_quadratically_on_simple_root() {
        let out = damped_newton(&Circle, &[3.0, 0.5], 100).unwrap();
        let r = 2f64.sqrt();
        assert!((out.y[0] - r).abs() < 1e-14 && (out.y[1] - r).abs() < 1e-14);
        assert!(out.residual < 1e-14);
        assert!(out.iterations < 20);
    }

    #[test]
    fn double_root_reaches_rounding_level() {
        let out = damped_newton(&DoubleRoot, &[5.0], 100).unwrap();
        assert!(out.y[0].abs() < 1e-12, "{}", out.y[0]);
    }

    #[test]
    fn singular_ratio_detects_rank_loss() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(singular_ratio(&m) < 1e-12);
        assert!((singular_ratio(&DMatrix::<f64>::identity(3, 3)) - 1.0).abs() < 1e-15);
        assert_eq!(singular_ratio(&DMatrix::<f64>::zeros(2, 2)), 0.0);
    }
}
