//! Randomized trial suites shared by the invariant and acceptance targets.
//! Each suite runs `cases` proptest trials from a fixed seed and reports the
//! first (shrunk) failure.

#![allow(dead_code)]

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

use tcp_core::model::{face_of, kkt_residual, residual, FaceMask, KktPoint, TcpInstance};
use tcp_core::solver::{chi_bound, homogeneous_solve, solve, SolverConfig};
use tcp_core::tensor::{dot, norm2};
use tcp_core::Tensor;

pub fn runner(seed: u64, cases: u32) -> TestRunner {
    let mut bytes = [0u8; 32];
    bytes[..8].copy_from_slice(&seed.to_le_bytes());
    let cfg = Config { cases, failure_persistence: None, max_shrink_iters: 256, ..Config::default() };
    TestRunner::new_with_rng(cfg, TestRng::from_seed(RngAlgorithm::ChaCha, &bytes))
}

fn finish<T: std::fmt::Debug>(r: Result<(), proptest::test_runner::TestError<T>>) -> Result<(), String> {
    r.map_err(|e| e.to_string())
}

/// Tensor of order 2..=4 and dimension 2..=3 with entries in `[-2, 2]`.
pub fn tensor_strategy() -> impl Strategy<Value = Tensor> {
    (2usize..=4, 2usize..=3).prop_flat_map(|(m, n)| {
        proptest::collection::vec(-2.0f64..2.0, n.pow(m as u32)).prop_map(move |e| Tensor::new(m, n, e).unwrap())
    })
}

fn tensor_and_vec(lo: f64, hi: f64) -> impl Strategy<Value = (Tensor, Vec<f64>)> {
    tensor_strategy().prop_flat_map(move |t| {
        let n = t.dim();
        (Just(t), proptest::collection::vec(lo..hi, n))
    })
}

fn close(lhs: f64, rhs: f64, scale: f64, rel: f64) -> bool {
    (lhs - rhs).abs() <= rel * scale.max(1e-300)
}

/// `A (t x)^(m-1) = t^(m-1) A x^(m-1)` and `A (t x)^m = t^m A x^m`, relative
/// to the magnitude of the summands.
pub fn homogeneity(seed: u64, cases: u32) -> Result<(), String> {
    let strat = (tensor_and_vec(-2.0, 2.0), 0.0f64..10.0);
    finish(runner(seed, cases).run(&strat, |((t, x), s)| {
        let m = t.order() as i32;
        let sx: Vec<f64> = x.iter().map(|v| s * v).collect();
        let lhs = t.contract(&sx).unwrap();
        let base = t.contract(&x).unwrap();
        let abs_x: Vec<f64> = x.iter().map(|v| v.abs()).collect();
        let abs_t = Tensor::new(t.order(), t.dim(), t.entries().iter().map(|v| v.abs()).collect()).unwrap();
        let mag = abs_t.contract(&abs_x).unwrap();
        for i in 0..t.dim() {
            let scale = s.powi(m - 1) * mag[i];
            prop_assert!(close(lhs[i], s.powi(m - 1) * base[i], scale, 1e-10), "contract component {i}");
        }
        let form_scale = s.powi(m) * dot(&abs_x, &mag);
        prop_assert!(close(t.form(&sx).unwrap(), s.powi(m) * t.form(&x).unwrap(), form_scale, 1e-10));
        Ok(())
    }))
}

/// `A x^m = <x, A x^(m-1)>` and `||A x^(m-1)|| <= n^((m-1)/2) ||A||` on the
/// unit box.
pub fn duality_and_bounded_image(seed: u64, cases: u32) -> Result<(), String> {
    finish(runner(seed, cases).run(&tensor_and_vec(-1.0, 1.0), |(t, x)| {
        let y = t.contract(&x).unwrap();
        let f = t.form(&x).unwrap();
        let d = dot(&x, &y);
        prop_assert!(close(f, d, x.iter().zip(&y).map(|(a, b)| (a * b).abs()).sum(), 1e-12));
        let beta = (t.dim() as f64).powf((t.order() as f64 - 1.0) / 2.0);
        prop_assert!(norm2(&y) <= beta * t.frobenius() * (1.0 + 1e-12));
        Ok(())
    }))
}

/// Builds an exact KKT point: `x` positive off `alpha`, `lambda` nonnegative
/// on `alpha`, and `a = lambda - A x^(m-1)`. Both directions of the KKT
/// equivalence are checked on it and on a rounding-level perturbation.
pub fn kkt_equivalence(seed: u64, cases: u32) -> Result<(), String> {
    let tol = tcp_core::model::DEFAULT_TOL;
    let strat = tensor_strategy().prop_flat_map(|t| {
        let n = t.dim();
        (Just(t), 0u64..(1u64 << n), proptest::collection::vec(0.01f64..3.0, n), proptest::collection::vec(0.0f64..3.0, n))
    });
    finish(runner(seed, cases).run(&strat, |(t, bits, xs, ls)| {
        let n = t.dim();
        let alpha = FaceMask::from_bits(bits);
        let x: Vec<f64> = (0..n).map(|i| if alpha.contains(i) { 0.0 } else { xs[i] }).collect();
        let lambda: Vec<f64> = (0..n).map(|i| if alpha.contains(i) { ls[i] } else { 0.0 }).collect();
        let ax = t.contract(&x).unwrap();
        let a: Vec<f64> = lambda.iter().zip(&ax).map(|(l, v)| l - v).collect();
        let inst = TcpInstance::new(t, a).unwrap();
        let kkt = kkt_residual(&inst, &KktPoint { x: x.clone(), lambda }).unwrap();
        prop_assert!(kkt <= tol, "constructed point has kkt residual {kkt}");
        prop_assert!(residual(&inst, &x).unwrap().max() <= 10.0 * tol);
        let back = kkt_residual(&inst, &KktPoint::from_solution(&inst, &x).unwrap()).unwrap();
        prop_assert!(back <= 10.0 * tol);
        prop_assert_eq!(face_of(&x, 0.0).unwrap(), alpha);
        Ok(())
    }))
}

/// Light solver settings for the high-count determinism trials; determinism
/// does not depend on the start budget.
pub fn light_config(seed: u64) -> SolverConfig {
    SolverConfig { grid_starts_per_axis: 4, random_starts: 4, ..SolverConfig::default() }.with_seed(seed)
}

fn small_instance() -> impl Strategy<Value = TcpInstance> {
    (proptest::collection::vec(-2.0f64..2.0, 8), proptest::collection::vec(-2.0f64..2.0, 2))
        .prop_map(|(e, a)| TcpInstance::new(Tensor::new(3, 2, e).unwrap(), a).unwrap())
}

/// Two solves of the same input agree exactly, every emitted point passes
/// an independent residual and KKT check, and the count respects chi.
pub fn solver_determinism(seed: u64, cases: u32, cfg: &SolverConfig) -> Result<(), String> {
    let chi = chi_bound(3, 2).unwrap() as usize;
    finish(runner(seed, cases).run(&small_instance(), |inst| {
        let first = solve(&inst, cfg).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let second = solve(&inst, cfg).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(&first, &second);
        prop_assert!(first.points.len() <= chi);
        for p in &first.points {
            prop_assert!(residual(&inst, &p.x).unwrap().is_solution(cfg.tol), "point {:?}", p.x);
            prop_assert!(p.kkt_res <= 10.0 * cfg.tol);
            let lam = KktPoint::from_solution(&inst, &p.x).unwrap();
            prop_assert!(kkt_residual(&inst, &lam).unwrap() <= 10.0 * cfg.tol);
        }
        Ok(())
    }))
}

/// Random tensors mixed with guaranteed non-R0 witnesses so that rays occur.
fn homogeneous_tensor() -> impl Strategy<Value = Tensor> {
    prop_oneof![
        proptest::collection::vec(-2.0f64..2.0, 8).prop_map(|e| Tensor::new(3, 2, e).unwrap()),
        (0u64..3, any::<u64>()).prop_map(|(bits, s)| Tensor::non_r0_witness(3, 2, FaceMask::from_bits(bits), s).unwrap()),
    ]
}

/// Rays of the homogeneous problem stay solutions along the ray, and the
/// representative set is unchanged by positive scaling of the tensor.
pub fn cone_and_scaling(seed: u64, cases: u32, cfg: &SolverConfig) -> Result<(), String> {
    let strat = (homogeneous_tensor(), 0.05f64..20.0);
    finish(runner(seed, cases).run(&strat, |(t, s)| {
        let h = homogeneous_solve(&t, cfg).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let homog = TcpInstance::homogeneous(t.clone());
        for r in &h.rays {
            for k in [0.5, 1.0, 2.0, 10.0] {
                let x: Vec<f64> = r.direction.iter().map(|v| k * v).collect();
                prop_assert!(residual(&homog, &x).unwrap().is_solution(cfg.tol), "ray {:?} at t={k}", r.direction);
            }
        }
        let scaled = homogeneous_solve(&t.scale(s), cfg).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(h.points.len(), scaled.points.len());
        for (p, q) in h.points.iter().zip(&scaled.points) {
            prop_assert!(p.x.iter().zip(&q.x).all(|(u, v)| (u - v).abs() <= 1e-8), "{:?} vs {:?}", p.x, q.x);
        }
        Ok(())
    }))
}
