//! Built-in order-3, dimension-2 tensors with closed-form solution tables, and
//! the golden suite that checks the solver against those tables.

use crate::error::{Result, TcpError};
use crate::model::TcpInstance;
use crate::solver::{solve, SolutionSet, SolverConfig};
use crate::tensor::Tensor;

pub const EXAMPLE_NAMES: [&str; 4] = ["ex1", "gus", "monotone", "zero"];

/// `a_111 = a_122 = a_211 = a_222 = -1`: `F(x) = -(x1^2 + x2^2)(1, 1) + a`.
pub fn example_one() -> Tensor {
    sparse3(&[([0, 0, 0], -1.0), ([0, 1, 1], -1.0), ([1, 0, 0], -1.0), ([1, 1, 1], -1.0)])
}

/// `a_111 = a_222 = 1`: `F(x) = (x1^2, x2^2) + a`, which has exactly one
/// solution for every `a`.
pub fn gus_tensor() -> Tensor {
    sparse3(&[([0, 0, 0], 1.0), ([1, 1, 1], 1.0)])
}

/// `a_111 = a_122 = a_211 = a_222 = 1`: `F(x) = (x1^2 + x2^2)(1, 1) + a`.
pub fn sum_of_squares_tensor() -> Tensor {
    sparse3(&[([0, 0, 0], 1.0), ([0, 1, 1], 1.0), ([1, 0, 0], 1.0), ([1, 1, 1], 1.0)])
}

fn sparse3(items: &[([usize; 3], f64)]) -> Tensor {
    let items: Vec<(Vec<usize>, f64)> = items.iter().map(|(i, v)| (i.to_vec(), *v)).collect();
    Tensor::from_sparse(3, 2, &items).expect("static example")
}

/// Named tensor. `zero` honours `(m, n)`; the others are fixed at `m = 3, n = 2`.
pub fn builtin_tensor(name: &str, m: usize, n: usize) -> Result<Tensor> {
    match name {
        "ex1" => Ok(example_one()),
        "gus" => Ok(gus_tensor()),
        "monotone" => Ok(sum_of_squares_tensor()),
        "zero" => Tensor::zeros(m, n),
        other => Err(TcpError::Argument(format!(
            "unknown example '{other}' (expected one of {})",
            EXAMPLE_NAMES.join(", ")
        ))),
    }
}

pub fn builtin_example(name: &str, a: Vec<f64>) -> Result<TcpInstance> {
    let n = a.len();
    TcpInstance::new(builtin_tensor(name, 3, n.max(2))?, a)
}

/// What a golden row expects of `Sol(A, a)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expected {
    /// Exactly these isolated points.
    Points(Vec<Vec<f64>>),
    /// These isolated points must appear, and a positive-dimensional
    /// component must be flagged.
    PointsAndContinuum(Vec<Vec<f64>>),
    /// These points must appear and every listed direction must be a
    /// recession ray.
    PointsAndRays(Vec<Vec<f64>>, Vec<Vec<f64>>),
}

#[derive(Debug, Clone)]
pub struct GoldenCase {
    pub name: &'static str,
    pub example: &'static str,
    pub a: Vec<f64>,
    pub expected: Expected,
}

#[derive(Debug, Clone)]
pub struct GoldenOutcome {
    pub case: GoldenCase,
    pub computed: Option<SolutionSet>,
    pub passed: bool,
    pub detail: String,
}

/// Matching tolerance for isolated points.
pub const GOLDEN_TOL: f64 = 1e-6;

pub fn golden_cases() -> Vec<GoldenCase> {
    use Expected::*;
    let c = |name, example, a: [f64; 2], expected| GoldenCase { name, example, a: a.to_vec(), expected };
    let s2 = 2f64.sqrt();
    vec![
        c("ex1 0<=a2<a1", "ex1", [2.0, 1.0], Points(vec![vec![0.0, 0.0], vec![0.0, 1.0]])),
        c("ex1 0<=a1<a2", "ex1", [1.0, 2.0], Points(vec![vec![0.0, 0.0], vec![1.0, 0.0]])),
        c("ex1 a2=0<a1", "ex1", [4.0, 0.0], Points(vec![vec![0.0, 0.0]])),
        c("ex1 0<a1=a2", "ex1", [1.0, 1.0], PointsAndContinuum(vec![vec![0.0, 0.0]])),
        c("ex1 otherwise", "ex1", [-1.0, 0.0], Points(vec![])),
        c("gus a1<0,a2<0", "gus", [-1.0, -4.0], Points(vec![vec![1.0, 2.0]])),
        c("gus a1>=0,a2<0", "gus", [3.0, -4.0], Points(vec![vec![0.0, 2.0]])),
        c("gus a1<0,a2>=0", "gus", [-2.0, 0.5], Points(vec![vec![s2, 0.0]])),
        c("gus a1>=0,a2>=0", "gus", [5.0, 5.0], Points(vec![vec![0.0, 0.0]])),
        c("monotone a1<0,a1<=a2", "monotone", [-4.0, -1.0], Points(vec![vec![2.0, 0.0]])),
        c("monotone a2<0,a2<=a1", "monotone", [-1.0, -9.0], Points(vec![vec![0.0, 3.0]])),
        c("monotone a>=0", "monotone", [1.0, 2.0], Points(vec![vec![0.0, 0.0]])),
        c("monotone a1=a2<0", "monotone", [-1.0, -1.0], PointsAndContinuum(vec![])),
        c("zero a1=a2=0", "zero", [0.0, 0.0], PointsAndContinuum(vec![vec![0.0, 0.0]])),
        c("zero a1=0,a2>0", "zero", [0.0, 1.0], PointsAndRays(vec![vec![0.0, 0.0]], vec![vec![1.0, 0.0]])),
        c("zero a1>0,a2=0", "zero", [1.0, 0.0], PointsAndRays(vec![vec![0.0, 0.0]], vec![vec![0.0, 1.0]])),
        c("zero a1>0,a2>0", "zero", [1.0, 1.0], Points(vec![vec![0.0, 0.0]])),
        c("zero otherwise", "zero", [-1.0, 0.0], Points(vec![])),
    ]
}

fn contains(set: &[Vec<f64>], p: &[f64]) -> bool {
    set.iter().any(|q| q.iter().zip(p).all(|(a, b)| (a - b).abs() <= GOLDEN_TOL))
}

/// Compares a computed set against a golden row. `member` decides whether an
/// extra computed point still belongs to the closed-form set (used for rows
/// with continua or rays).
pub fn check_case(case: &GoldenCase, sol: &SolutionSet) -> std::result::Result<(), String> {
    let xs = sol.xs();
    let must_contain = |expected: &[Vec<f64>]| -> std::result::Result<(), String> {
        for p in expected {
            if !contains(&xs, p) {
                return Err(format!("missing point {p:?}; computed {xs:?}"));
            }
        }
        Ok(())
    };
    match &case.expected {
        Expected::Points(expected) => {
            must_contain(expected)?;
            if xs.len() != expected.len() {
                return Err(format!("expected {} points, computed {xs:?}", expected.len()));
            }
            if !sol.posdim_suspect.is_empty() {
                return Err(format!("unexpected positive-dimensional flag on {:?}", sol.posdim_suspect));
            }
        }
        Expected::PointsAndContinuum(expected) => {
            must_contain(expected)?;
            if sol.posdim_suspect.is_empty() {
                return Err("positive-dimensional component not flagged".into());
            }
        }
        Expected::PointsAndRays(expected, rays) => {
            must_contain(expected)?;
            let dirs: Vec<Vec<f64>> = sol.rays.iter().map(|r| r.direction.clone()).collect();
            for d in rays {
                if !contains(&dirs, d) {
                    return Err(format!("missing ray {d:?}; computed {dirs:?}"));
                }
            }
        }
    }
    Ok(())
}

pub fn run_golden_case(case: &GoldenCase, cfg: &SolverConfig) -> GoldenOutcome {
    let result = builtin_example(case.example, case.a.clone()).and_then(|inst| solve(&inst, cfg));
    match result {
        Ok(sol) => {
            let verdict = check_case(case, &sol);
            let detail = match &verdict {
                Ok(()) => format!("{} points, status {}", sol.points.len(), sol.status.as_str()),
                Err(e) => e.clone(),
            };
            GoldenOutcome { case: case.clone(), passed: verdict.is_ok(), computed: Some(sol), detail }
        }
        Err(e) => GoldenOutcome { case: case.clone(), computed: None, passed: false, detail: e.to_string() },
    }
}

pub fn golden_suite(cfg: &SolverConfig) -> Vec<GoldenOutcome> {
    golden_cases().iter().map(|c| run_golden_case(c, cfg)).collect()
}
