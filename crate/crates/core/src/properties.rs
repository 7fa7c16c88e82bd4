//! Structural tensor properties: R0, copositivity, monotonicity of `F`, and
//! sampled GUS probing, plus the lower-semicontinuity obstruction.
//!
//! Every checker is falsification-sound: a `fails` verdict carries a
//! certificate that can be re-checked from the tensor entries alone. A
//! `holds-numerically` verdict only means no counterexample turned up at the
//! recorded effort.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{residual, FaceMask, TcpInstance};
use crate::rng;
use crate::solver::{homogeneous_solve, solve, SolverConfig};
use crate::tensor::{dot, Tensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Property {
    R0,
    Copositive,
    Monotone,
    #[serde(rename = "GUS")]
    Gus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    HoldsNumerically,
    Fails,
    Inconclusive,
}

impl Verdict {
    /// 0 holds, 1 fails, 2 inconclusive.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::HoldsNumerically => 0,
            Verdict::Fails => 1,
            Verdict::Inconclusive => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Certificate {
    /// A nonzero solution of `TCP(A, 0)` (simplex representative).
    Ray { x: Vec<f64> },
    /// A nonnegative point with `A x^m < 0`.
    Point { x: Vec<f64>, form: f64 },
    /// A pair with `<F(y) - F(x), y - x> < 0`.
    Pair { x: Vec<f64>, y: Vec<f64>, inner: f64 },
    /// A constant vector for which `TCP(A, a)` does not have exactly one solution.
    Vector { a: Vec<f64>, solutions: usize, posdim: bool },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub property: Property,
    pub verdict: Verdict,
    pub certificate: Option<Certificate>,
    pub effort: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Certificates are re-validated at this looser level to absorb polish error.
pub const CERTIFICATE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyConfig {
    pub solver: SolverConfig,
    /// Simplex lattice divisions per axis for copositivity.
    pub simplex_grid: usize,
    pub polish_starts: usize,
    pub polish_iters: usize,
    /// Pairs are drawn from `[0, monotone_box]^n`.
    pub monotone_box: f64,
    pub monotone_grid: usize,
    pub monotone_random_pairs: usize,
    pub gus_samples: usize,
    /// Sign-pattern grid values for GUS probing.
    pub gus_grid: Vec<f64>,
}

impl Default for PropertyConfig {
    fn default() -> Self {
        Self {
            solver: SolverConfig::default(),
            simplex_grid: 200,
            polish_starts: 20,
            polish_iters: 200,
            monotone_box: 2.0,
            monotone_grid: 6,
            monotone_random_pairs: 2000,
            gus_samples: 200,
            gus_grid: vec![-2.0, -1.0, 0.0, 1.0, 2.0],
        }
    }
}

/// Lattice points evaluated by the copositivity scan never exceed this.
const MAX_SIMPLEX_POINTS: usize = 2_000_000;

fn effort(items: &[(&str, f64)]) -> BTreeMap<String, f64> {
    items.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// `Sol(A, 0) = {0}`, decided with the homogeneous simplex search.
pub fn check_r0(tensor: &Tensor, cfg: &SolverConfig) -> Result<PropertyReport> {
    let h = homogeneous_solve(tensor, cfg)?;
    let eff = effort(&[("starts", h.meta.total_starts as f64), ("tol", cfg.tol)]);
    Ok(match h.points.first() {
        None => PropertyReport { property: Property::R0, verdict: Verdict::HoldsNumerically, certificate: None, effort: eff, note: None },
        Some(p) => PropertyReport {
            property: Property::R0,
            verdict: Verdict::Fails,
            certificate: Some(Certificate::Ray { x: p.x.clone() }),
            effort: eff,
            note: None,
        },
    })
}

/// Re-checks a certificate against the tensor (and `a` for vector certificates).
pub fn certificate_is_valid(tensor: &Tensor, cert: &Certificate) -> bool {
    match cert {
        Certificate::Ray { x } => {
            let sum: f64 = x.iter().sum();
            sum > 0.5
                && residual(&TcpInstance::homogeneous(tensor.clone()), x)
                    .map(|r| r.is_solution(CERTIFICATE_TOL * tensor.frobenius().max(1.0)))
                    .unwrap_or(false)
        }
        Certificate::Point { x, .. } => {
            x.iter().all(|v| *v >= 0.0) && tensor.form(x).map(|f| f < -CERTIFICATE_TOL.min(1e-8)).unwrap_or(false)
        }
        Certificate::Pair { x, y, .. } => {
            let (Ok(fx), Ok(fy)) = (tensor.contract(x), tensor.contract(y)) else { return false };
            let dfx: Vec<f64> = fy.iter().zip(&fx).map(|(a, b)| a - b).collect();
            let d: Vec<f64> = y.iter().zip(x).map(|(a, b)| a - b).collect();
            x.iter().chain(y).all(|v| *v >= 0.0) && dot(&dfx, &d) < -1e-8
        }
        Certificate::Vector { a, .. } => TcpInstance::new(tensor.clone(), a.clone())
            .and_then(|inst| solve(&inst, &SolverConfig::default()))
            .map(|s| s.points.len() != 1 || !s.posdim_suspect.is_empty() || !s.rays.is_empty())
            .unwrap_or(false),
    }
}

fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut c = vec![0usize; parts];
    fn rec(total: usize, pos: usize, c: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if pos + 1 == c.len() {
            c[pos] = total;
            out.push(c.clone());
            return;
        }
        for v in 0..=total {
            c[pos] = v;
            rec(total - v, pos + 1, c, out);
        }
    }
    rec(total, 0, &mut c, &mut out);
    out
}

fn lattice_size(divisions: usize, parts: usize) -> usize {
    let mut acc: usize = 1;
    for i in 0..parts - 1 {
        acc = acc.saturating_mul(divisions + parts - 1 - i) / (i + 1);
    }
    acc
}

/// Euclidean projection onto the unit simplex.
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut css = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        css += uj;
        let t = (css - 1.0) / (j + 1) as f64;
        if uj - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

fn form_gradient(tensor: &Tensor, x: &[f64]) -> Vec<f64> {
    let f = tensor.contract_unchecked(x);
    let jac = tensor.jacobian_unchecked(x);
    (0..x.len()).map(|j| f[j] + (0..x.len()).map(|i| x[i] * jac[(i, j)]).sum::<f64>()).collect()
}

fn polish_on_simplex(tensor: &Tensor, x0: &[f64], iters: usize) -> (Vec<f64>, f64) {
    let mut x = x0.to_vec();
    let mut fx = tensor.form(&x).unwrap_or(f64::INFINITY);
    let mut eta = 1.0;
    for _ in 0..iters {
        let g = form_gradient(tensor, &x);
        let mut improved = false;
        while eta > 1e-14 {
            let trial = project_simplex(&x.iter().zip(&g).map(|(a, b)| a - eta * b).collect::<Vec<_>>());
            let ft = tensor.form(&trial).unwrap_or(f64::INFINITY);
            if ft < fx {
                x = trial;
                fx = ft;
                improved = true;
                eta *= 2.0;
                break;
            }
            eta *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (x, fx)
}

/// Minimizes `A x^m` over the unit simplex by a lattice scan followed by
/// projected-gradient polishing of the best lattice points.
pub fn check_copositive(tensor: &Tensor, cfg: &PropertyConfig) -> Result<PropertyReport> {
    let n = tensor.dim();
    let tol = cfg.solver.tol;
    let mut divisions = cfg.simplex_grid.max(1);
    while lattice_size(divisions, n) > MAX_SIMPLEX_POINTS && divisions > 1 {
        divisions /= 2;
    }
    let lattice = compositions(divisions, n);
    let mut values: Vec<(f64, usize)> = lattice
        .par_iter()
        .enumerate()
        .map(|(k, c)| {
            let x: Vec<f64> = c.iter().map(|&v| v as f64 / divisions as f64).collect();
            (tensor.form(&x).unwrap_or(f64::INFINITY), k)
        })
        .collect();
    values.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut best: Option<(Vec<f64>, f64)> = None;
    for &(v, k) in values.iter().take(cfg.polish_starts.max(1)) {
        let x0: Vec<f64> = lattice[k].iter().map(|&c| c as f64 / divisions as f64).collect();
        let (x, fx) = polish_on_simplex(tensor, &x0, cfg.polish_iters);
        let (x, fx) = if fx <= v { (x, fx) } else { (x0, v) };
        if best.as_ref().is_none_or(|b| fx < b.1) {
            best = Some((x, fx));
        }
    }
    let (x, min) = best.unwrap_or((vec![1.0 / n as f64; n], 0.0));
    let eff = effort(&[
        ("simplex_divisions", divisions as f64),
        ("lattice_points", lattice.len() as f64),
        ("polish_starts", cfg.polish_starts as f64),
        ("min_form", min),
    ]);
    Ok(if min < -tol {
        PropertyReport {
            property: Property::Copositive,
            verdict: Verdict::Fails,
            certificate: Some(Certificate::Point { x, form: min }),
            effort: eff,
            note: None,
        }
    } else {
        PropertyReport { property: Property::Copositive, verdict: Verdict::HoldsNumerically, certificate: None, effort: eff, note: None }
    })
}

/// Samples pairs in `[0, R]^n` and looks for `<F(y) - F(x), y - x> < 0`.
///
/// The constant vector `a` cancels in the difference; it is accepted for
/// interface symmetry. A monotone verdict is cross-checked against
/// copositivity (take `y = 0`); a disagreement makes the report inconclusive.
pub fn check_monotone(tensor: &Tensor, a: &[f64], cfg: &PropertyConfig) -> Result<PropertyReport> {
    let inst = TcpInstance::new(tensor.clone(), a.to_vec())?;
    let n = tensor.dim();
    let tol = cfg.solver.tol;
    let g = cfg.monotone_grid.max(2);
    let mut points: Vec<Vec<f64>> = Vec::new();
    if g.checked_pow(n as u32).is_some_and(|c| c <= 400) {
        for flat in 0..g.pow(n as u32) {
            let mut rest = flat;
            points.push(
                (0..n)
                    .map(|_| {
                        let v = (rest % g) as f64 * cfg.monotone_box / (g - 1) as f64;
                        rest /= g;
                        v
                    })
                    .collect(),
            );
        }
    }
    let mut pairs: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    for (i, x) in points.iter().enumerate() {
        for y in &points[i + 1..] {
            pairs.push((x.clone(), y.clone()));
        }
    }
    let mut r = rng::stream(cfg.solver.seed, 0x6d6f6e6f);
    for _ in 0..cfg.monotone_random_pairs {
        let mut draw = || (0..n).map(|_| cfg.monotone_box * rand::Rng::random::<f64>(&mut r)).collect::<Vec<f64>>();
        let x = draw();
        let y = draw();
        pairs.push((x, y));
    }
    let worst = pairs
        .par_iter()
        .enumerate()
        .map(|(k, (x, y))| {
            let fx = inst.map_unchecked(x);
            let fy = inst.map_unchecked(y);
            let inner: f64 = fy.iter().zip(&fx).zip(y.iter().zip(x)).map(|((p, q), (s, t))| (p - q) * (s - t)).sum();
            (inner, k)
        })
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut eff = effort(&[("pairs", pairs.len() as f64), ("box", cfg.monotone_box)]);
    if let Some((inner, k)) = worst {
        eff.insert("min_inner".into(), inner);
        if inner < -tol {
            let (x, y) = pairs[k].clone();
            return Ok(PropertyReport {
                property: Property::Monotone,
                verdict: Verdict::Fails,
                certificate: Some(Certificate::Pair { x, y, inner }),
                effort: eff,
                note: None,
            });
        }
    }
    let cop = check_copositive(tensor, cfg)?;
    if cop.verdict == Verdict::Fails {
        return Ok(PropertyReport {
            property: Property::Monotone,
            verdict: Verdict::Inconclusive,
            certificate: cop.certificate,
            effort: eff,
            note: Some("no monotonicity violation sampled but the tensor is not copositive".into()),
        });
    }
    Ok(PropertyReport { property: Property::Monotone, verdict: Verdict::HoldsNumerically, certificate: None, effort: eff, note: None })
}

/// The `a`-vectors probed by [`probe_gus`]: the sign-pattern grid (when it
/// has at most 625 points) followed by seeded Gaussian draws.
pub fn gus_samples(n: usize, cfg: &PropertyConfig) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    let g = cfg.gus_grid.len();
    if g > 0 && g.checked_pow(n as u32).is_some_and(|c| c <= 625) {
        for flat in 0..g.pow(n as u32) {
            let mut rest = flat;
            let mut a = vec![0.0; n];
            for v in a.iter_mut().rev() {
                *v = cfg.gus_grid[rest % g];
                rest /= g;
            }
            out.push(a);
        }
    }
    let mut r = rng::stream(cfg.solver.seed, 0x677573);
    for _ in 0..cfg.gus_samples {
        out.push(rng::gaussian_vec(&mut r, n));
    }
    out
}

/// Solves `TCP(A, a)` over sampled `a` and fails on the first sample without
/// exactly one isolated solution.
pub fn probe_gus(tensor: &Tensor, cfg: &PropertyConfig) -> Result<PropertyReport> {
    let samples = gus_samples(tensor.dim(), cfg);
    let outcomes = samples
        .par_iter()
        .map(|a| {
            let inst = TcpInstance::new(tensor.clone(), a.clone())?;
            let s = solve(&inst, &cfg.solver)?;
            Ok((s.points.len(), !s.posdim_suspect.is_empty() || !s.rays.is_empty()))
        })
        .collect::<Result<Vec<_>>>()?;
    let eff = effort(&[("samples", samples.len() as f64)]);
    let failure = outcomes.iter().position(|&(count, posdim)| count != 1 || posdim);
    Ok(match failure {
        Some(k) => PropertyReport {
            property: Property::Gus,
            verdict: Verdict::Fails,
            certificate: Some(Certificate::Vector { a: samples[k].clone(), solutions: outcomes[k].0, posdim: outcomes[k].1 }),
            effort: eff,
            note: None,
        },
        None => PropertyReport { property: Property::Gus, verdict: Verdict::HoldsNumerically, certificate: None, effort: eff, note: None },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "verdict")]
pub enum LscVerdict {
    /// A positive-dimensional component was found, so the solution map is not
    /// lower semicontinuous at the instance.
    NotLsc { faces: Vec<Vec<usize>> },
    /// No obstruction found; this is not a claim of lower semicontinuity.
    NoObstruction,
}

pub fn lsc_witness(inst: &TcpInstance, cfg: &SolverConfig) -> Result<LscVerdict> {
    let s = solve(inst, cfg)?;
    let n = inst.dim();
    Ok(if s.posdim_suspect.is_empty() {
        LscVerdict::NoObstruction
    } else {
        LscVerdict::NotLsc { faces: s.posdim_suspect.iter().map(|f: &FaceMask| f.one_based(n)).collect() }
    })
}

/// `<r, q> > tol` for every listed ray. With no rays (the R0 case) the dual
/// cone's interior is all of `R^n`. Exact only when the rays generate the
/// homogeneous solution cone.
pub fn int_dual_cone_member(rays: &[Vec<f64>], q: &[f64], tol: f64) -> bool {
    rays.iter().all(|r| dot(r, q) > tol)
}
