//! Seeded experiments on the solution map `(A, a) -> Sol(A, a)`.
//!
//! Each sample draws from its own ChaCha stream `(seed, sample index)`, so
//! parallel and serial runs produce identical rows.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Result, TcpError};
use crate::model::TcpInstance;
use crate::oracle::brute_force_oracle;
use crate::properties::{check_copositive, check_r0, int_dual_cone_member, PropertyConfig, Verdict};
use crate::rng;
use crate::solver::{hausdorff_excess, homogeneous_solve, solve, SolutionSet};
use crate::tensor::{norm2, Tensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    LocalBoundedness,
    R0Openness,
    Genericity,
    Usc,
    Hoelder,
    StabilityInclusion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRow {
    pub sample_id: usize,
    /// Radius the sample was drawn for, when the experiment sweeps radii.
    pub radius: Option<f64>,
    pub pert_norm_tensor: f64,
    pub pert_norm_vec: f64,
    pub n_points: usize,
    pub max_norm: f64,
    #[serde(with = "crate::io::nonfinite")]
    pub excess: Option<f64>,
    pub flags: Vec<String>,
}

/// Aggregate over the samples drawn at one radius (or one shell of
/// perturbation norms).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
    /// Fraction passing (openness) or maximum excess (usc, hoelder).
    #[serde(with = "crate::io::nonfinite")]
    pub value: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitStatus {
    Fitted,
    LowConfidence,
    ExactStability,
    Undefined,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Summary {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_norm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unbounded_count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ci95: Option<(f64, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub largest_passing_radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub calibrated_eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "crate::io::nonfinite")]
    pub max_excess: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exponent: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prefactor: Option<f64>,
    /// Smallest `gamma` making `excess <= gamma * t^c` hold on every sample.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub envelope_prefactor: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_status: Option<FitStatus>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accepted: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub attempts: Option<usize>,
    pub vacuous: bool,
    pub inconclusive: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub kind: ExperimentKind,
    pub params: BTreeMap<String, Value>,
    pub rows: Vec<SampleRow>,
    pub groups: Vec<GroupSummary>,
    pub summary: Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabConfig {
    pub props: PropertyConfig,
    /// Grid step of the oracle used as reference for positive-dimensional sets.
    pub oracle_step: f64,
    pub usc_shells: usize,
}

impl Default for LabConfig {
    fn default() -> Self {
        Self { props: PropertyConfig::default(), oracle_step: 0.01, usc_shells: 5 }
    }
}

impl LabConfig {
    pub fn seed(&self) -> u64 {
        self.props.solver.seed
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.props.solver.seed = seed;
        self
    }
}

/// A sample is a usc violation witness when its excess exceeds
/// `USC_VIOLATION_FLOOR + USC_VIOLATION_SLOPE * perturbation`.
pub const USC_VIOLATION_FLOOR: f64 = 0.1;
pub const USC_VIOLATION_SLOPE: f64 = 10.0;

/// Rejection sampling of copositive perturbations stops after this many
/// attempts per requested sample.
pub const REJECTION_FACTOR: usize = 20;

fn base_params(cfg: &LabConfig, extra: Value) -> BTreeMap<String, Value> {
    let mut p = BTreeMap::new();
    p.insert("seed".to_string(), json!(cfg.seed()));
    p.insert("config".to_string(), serde_json::to_value(cfg).unwrap_or(Value::Null));
    if let Value::Object(map) = extra {
        p.extend(map);
    }
    p
}

fn flags_of(sol: &SolutionSet) -> Vec<String> {
    let mut f = Vec::new();
    if sol.is_unbounded_suspect() {
        f.push("unbounded-suspect".to_string());
    }
    if !sol.posdim_suspect.is_empty() {
        f.push("posdim".to_string());
    }
    if sol.points.is_empty() && sol.posdim_suspect.is_empty() && sol.rays.is_empty() {
        f.push("empty".to_string());
    }
    f
}

/// Draws `(B, b)` uniformly from the product of closed balls.
fn draw_pair(rng: &mut rng::LabRng, tensor: &Tensor, eps: f64, delta: f64) -> (Vec<f64>, Vec<f64>) {
    let db = if eps > 0.0 { rng::uniform_ball(rng, tensor.entries().len(), eps) } else { vec![0.0; tensor.entries().len()] };
    let dv = if delta > 0.0 { rng::uniform_ball(rng, tensor.dim(), delta) } else { vec![0.0; tensor.dim()] };
    (db, dv)
}

/// Draws `(B, b)` uniformly from the joint ball of `radius` in
/// `R^(n^m) x R^n`.
fn draw_joint(rng: &mut rng::LabRng, tensor: &Tensor, radius: f64) -> (Vec<f64>, Vec<f64>) {
    let len = tensor.entries().len();
    if radius == 0.0 {
        return (vec![0.0; len], vec![0.0; tensor.dim()]);
    }
    let v = rng::uniform_ball(rng, len + tensor.dim(), radius);
    (v[..len].to_vec(), v[len..].to_vec())
}

fn shifted(a: &[f64], d: &[f64]) -> Vec<f64> {
    a.iter().zip(d).map(|(x, y)| x + y).collect()
}

/// Solves every perturbation of a sampled `(S(eps, delta))` union and records
/// the largest solution norm.
pub fn local_boundedness_probe(
    tensor: &Tensor,
    a: &[f64],
    eps: f64,
    delta: f64,
    samples: usize,
    cfg: &LabConfig,
) -> Result<ExperimentReport> {
    let base = TcpInstance::new(tensor.clone(), a.to_vec())?;
    if eps < 0.0 || delta < 0.0 {
        return Err(TcpError::Argument("eps and delta must be nonnegative".into()));
    }
    let r0 = check_r0(tensor, &cfg.props.solver)?.verdict == Verdict::HoldsNumerically;
    let count = if eps == 0.0 && delta == 0.0 { samples.min(1) } else { samples };
    let rows = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream(cfg.seed(), i as u64);
            let (db, dv) = draw_pair(&mut r, tensor, eps, delta);
            let inst = TcpInstance::new(base.tensor.perturbed(&db)?, shifted(a, &dv))?;
            let sol = solve(&inst, &cfg.props.solver)?;
            Ok(SampleRow {
                sample_id: i,
                radius: None,
                pert_norm_tensor: norm2(&db),
                pert_norm_vec: norm2(&dv),
                n_points: sol.points.len(),
                max_norm: sol.max_norm(),
                excess: None,
                flags: flags_of(&sol),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut summary = Summary {
        max_norm: Some(rows.iter().map(|r| r.max_norm).fold(0.0, f64::max)),
        unbounded_count: Some(rows.iter().filter(|r| r.flags.iter().any(|f| f == "unbounded-suspect")).count()),
        vacuous: !r0,
        ..Summary::default()
    };
    if !r0 {
        summary.notes.push("tensor is not R0; boundedness is not guaranteed".into());
    }
    Ok(ExperimentReport {
        kind: ExperimentKind::LocalBoundedness,
        params: base_params(cfg, json!({"eps": eps, "delta": delta, "samples": samples, "a": a})),
        rows,
        groups: vec![],
        summary,
    })
}

/// Perturbs `A` by tensors of exact Frobenius norm `r` for each radius and
/// records the fraction that remain R0.
pub fn r0_openness_probe(tensor: &Tensor, radii: &[f64], samples_per_radius: usize, cfg: &LabConfig) -> Result<ExperimentReport> {
    let params = base_params(cfg, json!({"radii": radii, "samples_per_radius": samples_per_radius}));
    if radii.iter().any(|r| !(*r >= 0.0)) {
        return Err(TcpError::Argument("radii must be nonnegative".into()));
    }
    if check_r0(tensor, &cfg.props.solver)?.verdict != Verdict::HoldsNumerically {
        let summary = Summary { vacuous: true, notes: vec!["tensor is not R0".into()], ..Summary::default() };
        return Ok(ExperimentReport { kind: ExperimentKind::R0Openness, params, rows: vec![], groups: vec![], summary });
    }
    let len = tensor.entries().len();
    let jobs: Vec<(usize, f64)> = radii.iter().enumerate().flat_map(|(k, &r)| (0..samples_per_radius).map(move |j| (k * samples_per_radius + j, r))).collect();
    let rows = jobs
        .par_iter()
        .map(|&(i, radius)| {
            let mut r = rng::stream(cfg.seed(), i as u64);
            let db: Vec<f64> = rng::unit_sphere(&mut r, len).into_iter().map(|v| v * radius).collect();
            let b = tensor.perturbed(&db)?;
            let verdict = check_r0(&b, &cfg.props.solver)?.verdict;
            Ok(SampleRow {
                sample_id: i,
                radius: Some(radius),
                pert_norm_tensor: norm2(&db),
                pert_norm_vec: 0.0,
                n_points: 0,
                max_norm: 0.0,
                excess: None,
                flags: vec![if verdict == Verdict::HoldsNumerically { "r0" } else { "not-r0" }.to_string()],
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let groups: Vec<GroupSummary> = radii
        .iter()
        .map(|&r| {
            let sel: Vec<&SampleRow> = rows.iter().filter(|row| row.radius == Some(r)).collect();
            let pass = sel.iter().filter(|row| row.flags[0] == "r0").count();
            GroupSummary { lower: r, upper: r, count: sel.len(), value: (!sel.is_empty()).then(|| pass as f64 / sel.len() as f64) }
        })
        .collect();
    let mut sorted: Vec<&GroupSummary> = groups.iter().collect();
    sorted.sort_by(|a, b| a.lower.total_cmp(&b.lower));
    let mut largest = None;
    for g in sorted {
        if g.value == Some(1.0) || g.lower == 0.0 {
            largest = Some(g.lower);
        } else {
            break;
        }
    }
    let summary = Summary { largest_passing_radius: largest, calibrated_eps: largest.map(|r| r / 2.0), ..Summary::default() };
    Ok(ExperimentReport { kind: ExperimentKind::R0Openness, params, rows, groups, summary })
}

/// Wilson score interval at 95%.
pub fn wilson_interval(successes: usize, trials: usize) -> Option<(f64, f64)> {
    if trials == 0 {
        return None;
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z = 1.959_963_984_540_054_f64;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    Some(((centre - half).max(0.0), (centre + half).min(1.0)))
}

/// Fraction of standard Gaussian tensors that classify as R0.
pub fn genericity_sample(m: usize, n: usize, samples: usize, cfg: &LabConfig) -> Result<ExperimentReport> {
    Tensor::zeros(m, n)?;
    let rows = (0..samples)
        .into_par_iter()
        .map(|i| {
            let t = Tensor::gaussian_from(m, n, &mut rng::stream(cfg.seed(), i as u64))?;
            let verdict = check_r0(&t, &cfg.props.solver)?.verdict;
            Ok(SampleRow {
                sample_id: i,
                radius: None,
                pert_norm_tensor: t.frobenius(),
                pert_norm_vec: 0.0,
                n_points: 0,
                max_norm: 0.0,
                excess: None,
                flags: vec![if verdict == Verdict::HoldsNumerically { "r0" } else { "not-r0" }.to_string()],
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let pass = rows.iter().filter(|r| r.flags[0] == "r0").count();
    let mut summary = Summary {
        fraction: (samples > 0).then(|| pass as f64 / samples as f64),
        ci95: wilson_interval(pass, samples),
        ..Summary::default()
    };
    if samples == 0 {
        summary.notes.push("no samples; fraction undefined".into());
    }
    Ok(ExperimentReport {
        kind: ExperimentKind::Genericity,
        params: base_params(cfg, json!({"m": m, "n": n, "samples": samples})),
        rows,
        groups: vec![],
        summary,
    })
}

/// Reference point set for excess computations: the isolated points, plus
/// oracle cluster representatives when a positive-dimensional component was
/// flagged (when the grid fits the oracle budget).
fn reference_set(inst: &TcpInstance, sol: &SolutionSet, cfg: &LabConfig) -> (Vec<Vec<f64>>, Option<String>) {
    let mut pts = sol.xs();
    if sol.posdim_suspect.is_empty() {
        return (pts, None);
    }
    match brute_force_oracle(inst, cfg.props.solver.start_box_radius, cfg.oracle_step, cfg.props.solver.tol) {
        Ok(o) => {
            pts.extend(o.all_representatives());
            (pts, Some("reference set includes oracle cluster points".into()))
        }
        Err(e) => (pts, Some(format!("oracle reference unavailable ({e}); isolated points only"))),
    }
}

/// Excess of a perturbed solution set over the reference; `+inf` when the
/// perturbed set carries a verified recession ray the reference lacks.
fn excess_over(sol: &SolutionSet, reference: &[Vec<f64>], reference_rays: &[Vec<f64>]) -> f64 {
    let new_ray = sol.rays.iter().any(|r| {
        !reference_rays.iter().any(|d| r.direction.iter().zip(d).all(|(u, v)| (u - v).abs() <= 1e-6))
    });
    if new_ray {
        return f64::INFINITY;
    }
    hausdorff_excess(&sol.xs(), reference)
}

fn ray_dirs(sol: &SolutionSet) -> Vec<Vec<f64>> {
    sol.rays.iter().map(|r| r.direction.clone()).collect()
}

/// Samples `(B, b)` in the joint ball of `radius` around `(A, a)` and records
/// the excess of `Sol(B, b)` over `Sol(A, a)`, pooled into shells of
/// perturbation norm.
pub fn usc_probe(inst: &TcpInstance, radius: f64, samples: usize, cfg: &LabConfig) -> Result<ExperimentReport> {
    if !(radius >= 0.0) {
        return Err(TcpError::Argument("radius must be nonnegative".into()));
    }
    let params = base_params(cfg, json!({"radius": radius, "samples": samples, "a": inst.a}));
    let base = solve(inst, &cfg.props.solver)?;
    let (reference, note) = reference_set(inst, &base, cfg);
    let base_rays = ray_dirs(&base);
    if reference.is_empty() {
        let summary = Summary { vacuous: true, notes: vec!["Sol(A, a) is empty".into()], ..Summary::default() };
        return Ok(ExperimentReport { kind: ExperimentKind::Usc, params, rows: vec![], groups: vec![], summary });
    }
    let rows = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream(cfg.seed(), i as u64);
            let (db, dv) = draw_joint(&mut r, &inst.tensor, radius);
            let pert = TcpInstance::new(inst.tensor.perturbed(&db)?, shifted(&inst.a, &dv))?;
            let sol = solve(&pert, &cfg.props.solver)?;
            let e = excess_over(&sol, &reference, &base_rays);
            let norm = (norm2(&db).powi(2) + norm2(&dv).powi(2)).sqrt();
            let mut flags = flags_of(&sol);
            if e > USC_VIOLATION_FLOOR + USC_VIOLATION_SLOPE * norm {
                flags.push("usc-violation".into());
            }
            Ok(SampleRow {
                sample_id: i,
                radius: Some(radius),
                pert_norm_tensor: norm2(&db),
                pert_norm_vec: norm2(&dv),
                n_points: sol.points.len(),
                max_norm: sol.max_norm(),
                excess: Some(e),
                flags,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let shells = cfg.usc_shells.max(1);
    let groups: Vec<GroupSummary> = (0..shells)
        .map(|k| {
            let lower = radius * k as f64 / shells as f64;
            let upper = radius * (k + 1) as f64 / shells as f64;
            let sel: Vec<f64> = rows
                .iter()
                .filter(|row| {
                    let nrm = (row.pert_norm_tensor.powi(2) + row.pert_norm_vec.powi(2)).sqrt();
                    (nrm > lower || k == 0) && nrm <= upper
                })
                .filter_map(|row| row.excess)
                .collect();
            GroupSummary { lower, upper, count: sel.len(), value: (!sel.is_empty()).then(|| sel.iter().copied().fold(0.0, f64::max)) }
        })
        .collect();
    let violations = rows.iter().filter(|r| r.flags.iter().any(|f| f == "usc-violation")).count();
    let summary = Summary {
        max_excess: Some(rows.iter().filter_map(|r| r.excess).fold(0.0, f64::max)),
        violations: Some(violations),
        notes: note.into_iter().collect(),
        ..Summary::default()
    };
    Ok(ExperimentReport { kind: ExperimentKind::Usc, params, rows, groups, summary })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerFit {
    pub prefactor: f64,
    pub exponent: f64,
    /// Root-mean-square residual of the fit in natural-log space.
    pub residual: f64,
}

/// Least-squares fit of `log y = log gamma + c log x` over pairs with
/// positive finite coordinates. Needs two distinct abscissae.
pub fn fit_power_law(points: &[(f64, f64)]) -> Option<PowerFit> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if logs.len() < 2 {
        return None;
    }
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx <= 1e-300 {
        return None;
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let c = sxy / sxx;
    let intercept = my - c * mx;
    let rss: f64 = logs.iter().map(|p| (p.1 - intercept - c * p.0).powi(2)).sum();
    Some(PowerFit { prefactor: intercept.exp(), exponent: c, residual: (rss / n).sqrt() })
}

/// Radii must span this many decades for a confident exponent.
pub const MIN_DECADES: f64 = 1.5;
pub const MIN_RADII: usize = 4;

/// Fits the local upper-Hölder constants of `b -> Sol(A, b)` at `a` from the
/// maximum excess over spheres `||b - a|| = r`.
pub fn hoelder_fit(tensor: &Tensor, a: &[f64], radii: &[f64], samples_per_radius: usize, cfg: &LabConfig) -> Result<ExperimentReport> {
    if radii.is_empty() {
        return Err(TcpError::Argument("hoelder_fit needs at least one radius".into()));
    }
    if radii.iter().any(|r| !(*r > 0.0)) {
        return Err(TcpError::Argument("radii must be positive".into()));
    }
    let inst = TcpInstance::new(tensor.clone(), a.to_vec())?;
    let base = solve(&inst, &cfg.props.solver)?;
    if base.points.is_empty() || !base.posdim_suspect.is_empty() {
        return Err(TcpError::Argument("hoelder_fit needs Sol(A, a) nonempty and finite".into()));
    }
    let reference = base.xs();
    let base_rays = ray_dirs(&base);
    let n = tensor.dim();
    let jobs: Vec<(usize, f64)> = radii.iter().enumerate().flat_map(|(k, &r)| (0..samples_per_radius).map(move |j| (k * samples_per_radius + j, r))).collect();
    let rows = jobs
        .par_iter()
        .map(|&(i, radius)| {
            let mut r = rng::stream(cfg.seed(), i as u64);
            let dv: Vec<f64> = rng::unit_sphere(&mut r, n).into_iter().map(|v| v * radius).collect();
            let sol = solve(&TcpInstance::new(tensor.clone(), shifted(a, &dv))?, &cfg.props.solver)?;
            let e = excess_over(&sol, &reference, &base_rays);
            Ok(SampleRow {
                sample_id: i,
                radius: Some(radius),
                pert_norm_tensor: 0.0,
                pert_norm_vec: norm2(&dv),
                n_points: sol.points.len(),
                max_norm: sol.max_norm(),
                excess: Some(e),
                flags: flags_of(&sol),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let groups: Vec<GroupSummary> = radii
        .iter()
        .map(|&r| {
            let sel: Vec<f64> = rows.iter().filter(|row| row.radius == Some(r)).filter_map(|row| row.excess).collect();
            GroupSummary { lower: r, upper: r, count: sel.len(), value: (!sel.is_empty()).then(|| sel.iter().copied().fold(0.0, f64::max)) }
        })
        .collect();
    let pairs: Vec<(f64, f64)> = groups.iter().filter_map(|g| g.value.map(|v| (g.lower, v))).collect();
    let mut summary = Summary { max_excess: Some(pairs.iter().map(|p| p.1).fold(0.0, f64::max)), ..Summary::default() };
    if pairs.iter().all(|p| p.1 == 0.0) {
        summary.fit_status = Some(FitStatus::ExactStability);
        summary.notes.push("all excesses are zero; exponent undefined".into());
    } else if let Some(fit) = fit_power_law(&pairs) {
        let used: Vec<f64> = pairs.iter().filter(|p| p.1 > 0.0 && p.1.is_finite()).map(|p| p.0).collect();
        let lo = used.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = used.iter().copied().fold(0.0, f64::max);
        let decades = (hi / lo).log10();
        let mut distinct = used.clone();
        distinct.sort_by(f64::total_cmp);
        distinct.dedup();
        let confident = decades >= MIN_DECADES && distinct.len() >= MIN_RADII;
        summary.exponent = Some(fit.exponent);
        summary.prefactor = Some(fit.prefactor);
        summary.fit_residual = Some(fit.residual);
        summary.envelope_prefactor = Some(pairs.iter().filter(|p| p.1 > 0.0).map(|p| p.1 / p.0.powf(fit.exponent)).fold(0.0, f64::max));
        summary.fit_status = Some(if confident { FitStatus::Fitted } else { FitStatus::LowConfidence });
        if !confident {
            summary.notes.push(format!("radii span {decades:.2} decades over {} values", distinct.len()));
        }
    } else {
        summary.fit_status = Some(FitStatus::Undefined);
    }
    Ok(ExperimentReport {
        kind: ExperimentKind::Hoelder,
        params: base_params(cfg, json!({"radii": radii, "samples_per_radius": samples_per_radius, "a": a})),
        rows,
        groups,
        summary,
    })
}

/// Joint-perturbation stability check under copositive perturbations.
///
/// Requires `a` to pair strictly positively with every homogeneous ray of
/// `A`. Draws `(B, b)` within `eps` of `(A, a)`, keeps draws whose tensor is
/// copositive, and verifies that each `Sol(B, b)` is nonempty and bounded.
/// The excess over `Sol(A, a)` is fitted against `||B - A|| + ||b - a||`.
pub fn stability_inclusion_check(tensor: &Tensor, a: &[f64], eps: f64, samples: usize, cfg: &LabConfig) -> Result<ExperimentReport> {
    if !(eps >= 0.0) {
        return Err(TcpError::Argument("eps must be nonnegative".into()));
    }
    let params = base_params(cfg, json!({"eps": eps, "samples": samples, "a": a}));
    let inst = TcpInstance::new(tensor.clone(), a.to_vec())?;
    let rays: Vec<Vec<f64>> = homogeneous_solve(tensor, &cfg.props.solver)?.rays.into_iter().map(|r| r.direction).collect();
    let mut notes = vec!["dual-cone membership is tested against the computed homogeneous rays only".to_string()];
    if !int_dual_cone_member(&rays, a, cfg.props.solver.tol) {
        notes.push("a is not in the interior of the dual of Sol(A, 0)".into());
        let summary = Summary { vacuous: true, notes, ..Summary::default() };
        return Ok(ExperimentReport { kind: ExperimentKind::StabilityInclusion, params, rows: vec![], groups: vec![], summary });
    }
    let base = solve(&inst, &cfg.props.solver)?;
    let (reference, note) = reference_set(&inst, &base, cfg);
    let base_rays = ray_dirs(&base);
    notes.extend(note);

    // attempts are drawn in parallel batches but accepted in index order
    let cap = REJECTION_FACTOR * samples;
    let mut accepted: Vec<(usize, Vec<f64>, Vec<f64>)> = Vec::new();
    let mut attempts = 0;
    let batch = samples.max(1);
    while accepted.len() < samples && attempts < cap {
        let hi = (attempts + batch).min(cap);
        let drawn = (attempts..hi)
            .into_par_iter()
            .map(|i| {
                let mut r = rng::stream(cfg.seed(), i as u64);
                let (db, dv) = draw_joint(&mut r, tensor, eps);
                let ok = check_copositive(&tensor.perturbed(&db)?, &cfg.props)?.verdict == Verdict::HoldsNumerically;
                Ok((i, db, dv, ok))
            })
            .collect::<Result<Vec<_>>>()?;
        for (i, db, dv, ok) in drawn {
            if ok && accepted.len() < samples {
                accepted.push((i, db, dv));
            }
        }
        attempts = hi;
    }
    let rows = accepted
        .par_iter()
        .map(|(i, db, dv)| {
            let pert = TcpInstance::new(tensor.perturbed(db)?, shifted(a, dv))?;
            let sol = solve(&pert, &cfg.props.solver)?;
            let mut flags = flags_of(&sol);
            let empty = sol.points.is_empty() && sol.posdim_suspect.is_empty() && sol.rays.is_empty();
            if empty || sol.is_unbounded_suspect() {
                flags.push("violation".into());
            }
            Ok(SampleRow {
                sample_id: *i,
                radius: Some(eps),
                pert_norm_tensor: norm2(db),
                pert_norm_vec: norm2(dv),
                n_points: sol.points.len(),
                max_norm: sol.max_norm(),
                excess: Some(excess_over(&sol, &reference, &base_rays)),
                flags,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let violations = rows.iter().filter(|r| r.flags.iter().any(|f| f == "violation")).count();
    let pairs: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| !r.flags.iter().any(|f| f == "violation"))
        .filter_map(|r| r.excess.map(|e| (r.pert_norm_tensor + r.pert_norm_vec, e)))
        .collect();
    let mut summary = Summary {
        violations: Some(violations),
        accepted: Some(rows.len()),
        attempts: Some(attempts),
        max_excess: Some(rows.iter().filter_map(|r| r.excess).fold(0.0, f64::max)),
        inconclusive: rows.len() < samples,
        ..Summary::default()
    };
    if summary.inconclusive {
        notes.push(format!("only {} copositive perturbations in {attempts} attempts", rows.len()));
    }
    if pairs.iter().all(|p| p.1 == 0.0) {
        // zero excess everywhere: the inclusion holds with gamma = 0 for any c
        summary.fit_status = Some(FitStatus::ExactStability);
        summary.exponent = Some(1.0);
        summary.prefactor = Some(0.0);
        summary.envelope_prefactor = Some(0.0);
    } else if let Some(fit) = fit_power_law(&pairs) {
        summary.fit_status = Some(FitStatus::Fitted);
        summary.exponent = Some(fit.exponent);
        summary.prefactor = Some(fit.prefactor);
        summary.fit_residual = Some(fit.residual);
        summary.envelope_prefactor = Some(pairs.iter().filter(|p| p.0 > 0.0).map(|p| p.1 / p.0.powf(fit.exponent)).fold(0.0, f64::max));
    } else {
        summary.fit_status = Some(FitStatus::Undefined);
    }
    summary.notes = notes;
    Ok(ExperimentReport { kind: ExperimentKind::StabilityInclusion, params, rows, groups: vec![], summary })
}
