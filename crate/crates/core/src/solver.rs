//! Pseudo-face solver for `Sol(A, a)`.
//!
//! The nonnegative orthant splits into the `2^n` pseudo-faces `K_alpha`. On
//! each face the KKT system reduces to a square polynomial system in the free
//! coordinates, solved here by multistart damped Newton. Roots are filtered by
//! the face's sign conditions, deduplicated, and merged across faces.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TcpError};
use crate::model::{enumerate_faces, kkt_residual, residual, FaceMask, FaceSystem, KktPoint, TcpInstance, DEFAULT_TOL};
use crate::newton::{damped_newton, singular_ratio};
use crate::rng;
use crate::tensor::{norm2, Tensor};

/// Seed used when the caller does not supply one.
pub const DEFAULT_SEED: u64 = 20_240_601;

/// Faces with more surviving roots than this are flagged as carrying a
/// positive-dimensional component.
pub const POSDIM_ROOT_COUNT: usize = 25;

/// Jacobian conditioning (smallest / largest singular value) below which a
/// polished root is treated as non-isolated.
pub const POSDIM_SINGULAR_RATIO: f64 = 1e-6;

/// Upper bound on grid starts per face; the per-axis count shrinks to fit.
const MAX_GRID_STARTS: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub tol: f64,
    pub dedup_radius: f64,
    pub newton_max_iter: usize,
    pub grid_starts_per_axis: usize,
    pub random_starts: usize,
    pub start_box_radius: f64,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            dedup_radius: 1e-5,
            newton_max_iter: 100,
            grid_starts_per_axis: 9,
            random_starts: 16,
            start_box_radius: 5.0,
            seed: DEFAULT_SEED,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = self.tol > 0.0
            && self.dedup_radius > 0.0
            && self.newton_max_iter > 0
            && self.grid_starts_per_axis > 0
            && self.start_box_radius > 0.0;
        if !positive {
            return Err(TcpError::Argument("solver parameters must be positive".into()));
        }
        if self.tol >= self.dedup_radius {
            return Err(TcpError::Argument(format!(
                "tol ({}) must be below dedup_radius ({})",
                self.tol, self.dedup_radius
            )));
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    ExactEmpty,
    Finite,
    NonIsolated,
    UnboundedSuspect,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::ExactEmpty => "exact-empty",
            Status::Finite => "finite",
            Status::NonIsolated => "non-isolated",
            Status::UnboundedSuspect => "unbounded-suspect",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionPoint {
    pub x: Vec<f64>,
    pub face: FaceMask,
    pub kkt_res: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ray {
    /// Unit Euclidean norm.
    pub direction: Vec<f64>,
    pub face: FaceMask,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveMeta {
    pub tol: f64,
    pub dedup_radius: f64,
    pub seed: u64,
    pub newton_max_iter: usize,
    pub start_box_radius: f64,
    pub grid_starts_per_axis: usize,
    pub random_starts: usize,
    pub total_starts: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionSet {
    pub dim: usize,
    pub points: Vec<SolutionPoint>,
    pub rays: Vec<Ray>,
    pub posdim_suspect: Vec<FaceMask>,
    pub status: Status,
    pub meta: SolveMeta,
}

impl SolutionSet {
    pub fn xs(&self) -> Vec<Vec<f64>> {
        self.points.iter().map(|p| p.x.clone()).collect()
    }

    pub fn is_unbounded_suspect(&self) -> bool {
        self.status == Status::UnboundedSuspect
    }

    pub fn max_norm(&self) -> f64 {
        self.points.iter().map(|p| norm2(&p.x)).fold(0.0, f64::max)
    }
}

fn meta(cfg: &SolverConfig, total_starts: usize) -> SolveMeta {
    SolveMeta {
        tol: cfg.tol,
        dedup_radius: cfg.dedup_radius,
        seed: cfg.seed,
        newton_max_iter: cfg.newton_max_iter,
        start_box_radius: cfg.start_box_radius,
        grid_starts_per_axis: cfg.grid_starts_per_axis,
        random_starts: cfg.random_starts,
        total_starts,
    }
}

/// Classification of one polished root.
struct Candidate {
    x: Vec<f64>,
    face: FaceMask,
    /// Root stayed on the face it was computed on.
    interior: bool,
}

/// Lifts a root, snaps free coordinates in `[-tol, tol]` to zero (moving the
/// root to the larger face), and checks the complementarity conditions.
fn classify(fs: &FaceSystem<'_>, y: &[f64], tol: f64) -> Option<Candidate> {
    let mut x = fs.lift(y);
    let mut face = fs.alpha();
    for &i in fs.free() {
        if x[i] < -tol {
            return None;
        }
        if x[i] <= tol {
            x[i] = 0.0;
            face = face.with(i);
        }
    }
    let res = residual(fs.instance(), &x).ok()?;
    if !res.is_solution(tol) {
        return None;
    }
    Some(Candidate { x, face, interior: face == fs.alpha() })
}

fn dedup_push(kept: &mut Vec<Candidate>, c: Candidate, radius: f64) {
    for k in kept.iter_mut() {
        if dist_inf(&k.x, &c.x) <= radius {
            if c.face.count() > k.face.count() {
                *k = c;
            }
            return;
        }
    }
    kept.push(c);
}

fn dist_inf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |acc, (x, y)| acc.max((x - y).abs()))
}

fn grid_per_axis(requested: usize, k: usize) -> usize {
    let mut g = requested.max(1);
    while g > 1 && g.checked_pow(k as u32).is_none_or(|c| c > MAX_GRID_STARTS) {
        g -= 1;
    }
    g
}

/// Cell-centred grid over `[0, radius]^k` plus seeded uniform starts.
fn box_starts(k: usize, cfg: &SolverConfig, stream: u64) -> Vec<Vec<f64>> {
    let g = grid_per_axis(cfg.grid_starts_per_axis, k);
    let total = g.pow(k as u32);
    let mut starts = Vec::with_capacity(total + cfg.random_starts);
    for flat in 0..total {
        let mut rest = flat;
        let mut y = vec![0.0; k];
        for v in y.iter_mut() {
            *v = cfg.start_box_radius * ((rest % g) as f64 + 0.5) / g as f64;
            rest /= g;
        }
        starts.push(y);
    }
    let mut r = rng::stream(cfg.seed, stream);
    for _ in 0..cfg.random_starts {
        starts.push((0..k).map(|_| cfg.start_box_radius * rand::Rng::random::<f64>(&mut r)).collect());
    }
    starts
}

/// Interior lattice points of the unit simplex in `R^k` plus seeded
/// Dirichlet(1,..,1) starts.
fn simplex_starts(k: usize, cfg: &SolverConfig, stream: u64) -> Vec<Vec<f64>> {
    if k == 1 {
        return vec![vec![1.0]];
    }
    let mut divisions = cfg.grid_starts_per_axis.saturating_sub(1).max(1);
    while binomial(divisions + k - 1, k - 1) > MAX_GRID_STARTS && divisions > 1 {
        divisions -= 1;
    }
    let mut starts = Vec::new();
    let mut c = vec![0usize; k];
    compositions(divisions, 0, &mut c, &mut |c| {
        let denom = divisions as f64 + 0.5 * k as f64;
        starts.push(c.iter().map(|&v| (v as f64 + 0.5) / denom).collect());
    });
    let mut r = rng::stream(cfg.seed, stream);
    for _ in 0..cfg.random_starts {
        let e: Vec<f64> = (0..k).map(|_| -(1.0 - rand::Rng::random::<f64>(&mut r)).ln()).collect();
        let s: f64 = e.iter().sum();
        starts.push(e.into_iter().map(|v| v / s).collect());
    }
    starts
}

fn compositions(total: usize, pos: usize, c: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
    if pos + 1 == c.len() {
        c[pos] = total;
        f(c);
        return;
    }
    for v in 0..=total {
        c[pos] = v;
        compositions(total - v, pos + 1, c, f);
    }
}

fn binomial(n: usize, k: usize) -> usize {
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// Per-face search result before merging.
struct FaceOutcome {
    points: Vec<Candidate>,
    rays: Vec<Ray>,
    posdim: bool,
    starts: usize,
}

fn search_face(fs: &FaceSystem<'_>, starts: &[Vec<f64>], cfg: &SolverConfig) -> Result<FaceOutcome> {
    let alpha = fs.alpha();
    let n = fs.instance().dim();
    if fs.n_unknowns() == 0 {
        let x = vec![0.0; n];
        let mut points = Vec::new();
        if residual(fs.instance(), &x)?.is_solution(cfg.tol) {
            points.push(Candidate { x, face: alpha, interior: true });
        }
        return Ok(FaceOutcome { points, rays: vec![], posdim: false, starts: 0 });
    }
    let accept = cfg.tol / 10.0;
    let mut kept: Vec<Candidate> = Vec::new();
    for y0 in starts {
        let Some(out) = damped_newton(fs, y0, cfg.newton_max_iter) else {
            return Err(TcpError::Numeric { face: alpha.one_based(n), msg: "non-finite evaluation at start".into() });
        };
        if out.y.iter().any(|v| v.is_nan()) {
            return Err(TcpError::Numeric { face: alpha.one_based(n), msg: "NaN iterate".into() });
        }
        if out.residual > accept {
            continue;
        }
        if let Some(c) = classify(fs, &out.y, cfg.tol) {
            dedup_push(&mut kept, c, cfg.dedup_radius);
        }
    }
    let interior: Vec<&Candidate> = kept.iter().filter(|c| c.interior).collect();
    let mut posdim = interior.len() > POSDIM_ROOT_COUNT
        || interior
            .iter()
            .any(|c| singular_ratio(&fs.jacobian(&fs.restrict(&c.x))) < POSDIM_SINGULAR_RATIO);
    let mut rays = Vec::new();
    if fs.is_underdetermined() && !interior.is_empty() {
        posdim = true;
        rays = recession_rays(fs, &interior[0].x, &interior, cfg.tol);
    }
    if posdim {
        // samples of a continuum are not reported as isolated points
        kept.retain(|c| !c.interior);
    }
    Ok(FaceOutcome { points: kept, rays, posdim, starts: starts.len() })
}

/// Directions `d` (free unit vectors and normalized feasible points) such that
/// `base + t d` stays a solution for `t` up to `10^3` and `d` solves the
/// homogeneous problem.
fn recession_rays(fs: &FaceSystem<'_>, base: &[f64], feasible: &[&Candidate], tol: f64) -> Vec<Ray> {
    let n = fs.instance().dim();
    let inst = fs.instance();
    let homog = TcpInstance::homogeneous(inst.tensor.clone());
    let mut candidates: Vec<Vec<f64>> = fs
        .free()
        .iter()
        .map(|&j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            e
        })
        .collect();
    candidates.extend(feasible.iter().map(|c| {
        let s = norm2(&c.x);
        c.x.iter().map(|v| v / s).collect()
    }));
    let mut rays: Vec<Ray> = Vec::new();
    for d in candidates {
        let along = [1.0, 10.0, 100.0, 1000.0].iter().all(|&t| {
            let x: Vec<f64> = base.iter().zip(&d).map(|(b, v)| b + t * v).collect();
            residual(inst, &x).map(|r| r.is_solution(tol)).unwrap_or(false)
        });
        let homogeneous = residual(&homog, &d).map(|r| r.is_solution(tol)).unwrap_or(false);
        if along && homogeneous && !rays.iter().any(|r| dist_inf(&r.direction, &d) < 1e-6) {
            let face = d.iter().enumerate().filter(|(_, v)| **v <= tol).fold(FaceMask::EMPTY, |m, (i, _)| m.with(i));
            rays.push(Ray { direction: d, face });
        }
    }
    rays
}

fn finish_points(inst: &TcpInstance, cands: Vec<Candidate>) -> Result<Vec<SolutionPoint>> {
    cands
        .into_iter()
        .map(|c| {
            let kkt = kkt_residual(inst, &KktPoint::from_solution(inst, &c.x)?)?;
            Ok(SolutionPoint { x: c.x, face: c.face, kkt_res: kkt })
        })
        .collect()
}

fn local_status(points: &[SolutionPoint], rays: &[Ray], posdim: &[FaceMask]) -> Status {
    if !rays.is_empty() {
        Status::UnboundedSuspect
    } else if !posdim.is_empty() {
        Status::NonIsolated
    } else if points.is_empty() {
        Status::ExactEmpty
    } else {
        Status::Finite
    }
}

/// Roots of `TCP(A, a)` on the single pseudo-face `alpha`.
pub fn solve_face(inst: &TcpInstance, alpha: FaceMask, cfg: &SolverConfig) -> Result<SolutionSet> {
    cfg.validate()?;
    let n = inst.dim();
    if !alpha.fits(n) {
        return Err(TcpError::Argument(format!("mask {alpha:?} exceeds dimension {n}")));
    }
    let fs = FaceSystem::new(inst, alpha);
    let starts = box_starts(fs.n_unknowns(), cfg, alpha.bits());
    let out = search_face(&fs, &starts, cfg)?;
    let mut cands = out.points;
    sort_candidates(&mut cands);
    let points = finish_points(inst, cands)?;
    let posdim = if out.posdim { vec![alpha] } else { vec![] };
    let status = local_status(&points, &out.rays, &posdim);
    Ok(SolutionSet { dim: n, points, rays: out.rays, posdim_suspect: posdim, status, meta: meta(cfg, out.starts) })
}

fn sort_candidates(c: &mut [Candidate]) {
    c.sort_by(|a, b| lex_cmp(&a.x, &b.x));
}

fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            o => return o,
        }
    }
    std::cmp::Ordering::Equal
}

/// Merges per-face outcomes in face order, then sorts lexicographically.
fn merge(outcomes: Vec<(FaceMask, FaceOutcome)>, radius: f64) -> (Vec<Candidate>, Vec<Ray>, Vec<FaceMask>, usize) {
    let mut kept: Vec<Candidate> = Vec::new();
    let mut rays: Vec<Ray> = Vec::new();
    let mut posdim = Vec::new();
    let mut starts = 0;
    for (alpha, out) in outcomes {
        starts += out.starts;
        if out.posdim {
            posdim.push(alpha);
        }
        for c in out.points {
            dedup_push(&mut kept, c, radius);
        }
        for r in out.rays {
            if !rays.iter().any(|k| dist_inf(&k.direction, &r.direction) < 1e-6) {
                rays.push(r);
            }
        }
    }
    sort_candidates(&mut kept);
    rays.sort_by(|a, b| lex_cmp(&a.direction, &b.direction));
    (kept, rays, posdim, starts)
}

/// `Sol(A, a)` as the union of per-face solutions.
///
/// The status is `unbounded-suspect` when the set is nonempty and either a
/// recession ray was found or `TCP(A, 0)` has a nonzero solution.
pub fn solve(inst: &TcpInstance, cfg: &SolverConfig) -> Result<SolutionSet> {
    cfg.validate()?;
    let n = inst.dim();
    let outcomes = enumerate_faces(n)
        .into_par_iter()
        .map(|alpha| {
            let fs = FaceSystem::new(inst, alpha);
            let starts = box_starts(fs.n_unknowns(), cfg, alpha.bits());
            search_face(&fs, &starts, cfg).map(|o| (alpha, o))
        })
        .collect::<Result<Vec<_>>>()?;
    let (cands, rays, posdim, starts) = merge(outcomes, cfg.dedup_radius);
    let points = finish_points(inst, cands)?;
    let nonempty = !points.is_empty() || !posdim.is_empty() || !rays.is_empty();
    let status = if nonempty && (!rays.is_empty() || !homogeneous_solve(&inst.tensor, cfg)?.points.is_empty()) {
        Status::UnboundedSuspect
    } else {
        local_status(&points, &rays, &posdim)
    };
    Ok(SolutionSet { dim: n, points, rays, posdim_suspect: posdim, status, meta: meta(cfg, starts) })
}

/// Nonzero solutions of `TCP(A, 0)`, searched on the probability simplex.
///
/// `points` holds simplex representatives (coordinates summing to one),
/// `rays` the same directions scaled to unit Euclidean norm. An empty result
/// means `Sol(A, 0) = {0}`. The tensor is normalized to unit Frobenius norm
/// first, so positive multiples of `A` give identical answers.
pub fn homogeneous_solve(tensor: &Tensor, cfg: &SolverConfig) -> Result<SolutionSet> {
    cfg.validate()?;
    let n = tensor.dim();
    let norm = tensor.frobenius();
    let normalized = if norm > 0.0 { tensor.scale(1.0 / norm) } else { tensor.clone() };
    let inst = TcpInstance::homogeneous(normalized);
    let full = FaceMask::full(n);
    let outcomes = enumerate_faces(n)
        .into_par_iter()
        .filter(|alpha| *alpha != full)
        .map(|alpha| {
            let fs = FaceSystem::normalized(&inst, alpha);
            let starts = simplex_starts(fs.n_unknowns(), cfg, alpha.bits());
            search_homogeneous_face(&fs, &starts, cfg).map(|o| (alpha, o))
        })
        .collect::<Result<Vec<_>>>()?;
    let (cands, _, posdim, starts) = merge(outcomes, cfg.dedup_radius);
    let points = finish_points(&inst, cands)?;
    let rays = points
        .iter()
        .map(|p| {
            let s = norm2(&p.x);
            Ray { direction: p.x.iter().map(|v| v / s).collect(), face: p.face }
        })
        .collect::<Vec<_>>();
    let status = if points.is_empty() { Status::ExactEmpty } else { Status::UnboundedSuspect };
    Ok(SolutionSet { dim: n, points, rays, posdim_suspect: posdim, status, meta: meta(cfg, starts) })
}

/// Like [`search_face`] but keeps every representative: on the simplex slice
/// each root is a distinct ray of the solution cone.
fn search_homogeneous_face(fs: &FaceSystem<'_>, starts: &[Vec<f64>], cfg: &SolverConfig) -> Result<FaceOutcome> {
    let n = fs.instance().dim();
    let accept = cfg.tol / 10.0;
    let mut kept: Vec<Candidate> = Vec::new();
    for y0 in starts {
        let Some(out) = damped_newton(fs, y0, cfg.newton_max_iter) else {
            return Err(TcpError::Numeric { face: fs.alpha().one_based(n), msg: "non-finite evaluation".into() });
        };
        if out.residual > accept {
            continue;
        }
        if let Some(c) = classify(fs, &out.y, cfg.tol) {
            if c.x.iter().all(|v| *v == 0.0) {
                continue;
            }
            dedup_push(&mut kept, c, cfg.dedup_radius);
        }
    }
    let interior: Vec<&Candidate> = kept.iter().filter(|c| c.interior).collect();
    let posdim = fs.is_underdetermined() && !interior.is_empty()
        || interior.len() > POSDIM_ROOT_COUNT
        || interior
            .iter()
            .any(|c| singular_ratio(&fs.jacobian(&fs.restrict(&c.x))) < POSDIM_SINGULAR_RATIO);
    Ok(FaceOutcome { points: kept, rays: vec![], posdim, starts: starts.len() })
}

/// `d (2d - 1)^(5n)` with `d = max(2, m - 1)`: a bound on the number of
/// connected components of any `Sol(A, a)`.
pub fn chi_bound(m: usize, n: usize) -> Result<u64> {
    if m < 2 || n < 2 {
        return Err(TcpError::Argument(format!("chi bound needs m, n >= 2, got m={m}, n={n}")));
    }
    let d = (m as u64 - 1).max(2);
    let exp = u32::try_from(5 * n).map_err(|_| TcpError::Overflow(format!("exponent 5n for n={n}")))?;
    (2 * d - 1)
        .checked_pow(exp)
        .and_then(|p| p.checked_mul(d))
        .ok_or_else(|| TcpError::Overflow(format!("chi bound for m={m}, n={n} exceeds u64")))
}

/// `sup_{z in s1} dist(z, s2)` in the Euclidean norm.
///
/// Zero when `s1` is empty; `+inf` when `s1` is nonempty and `s2` empty.
pub fn hausdorff_excess(s1: &[Vec<f64>], s2: &[Vec<f64>]) -> f64 {
    if s1.is_empty() {
        return 0.0;
    }
    if s2.is_empty() {
        return f64::INFINITY;
    }
    s1.iter()
        .map(|z| {
            s2.iter()
                .map(|w| z.iter().zip(w).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{example_one, gus_tensor};
    use crate::model::FaceMask;

    fn inst(t: Tensor, a: &[f64]) -> TcpInstance {
        TcpInstance::new(t, a.to_vec()).unwrap()
    }

    fn close(a: &[f64], b: &[f64]) -> bool {
        dist_inf(a, b) < 1e-9
    }

    #[test]
    fn face_examples() {
        let cfg = SolverConfig::default();
        let p = inst(example_one(), &[2.0, 1.0]);
        let s = solve_face(&p, FaceMask::from_indices(&[0]), &cfg).unwrap();
        assert_eq!(s.points.len(), 1);
        assert!(close(&s.points[0].x, &[0.0, 1.0]));
        let s = solve_face(&p, FaceMask::full(2), &cfg).unwrap();
        assert_eq!(s.xs(), vec![vec![0.0, 0.0]]);
        let z = inst(Tensor::zeros(3, 2).unwrap(), &[0.0, 1.0]);
        let s = solve_face(&z, FaceMask::from_indices(&[1]), &cfg).unwrap();
        assert_eq!(s.rays.len(), 1);
        assert!(close(&s.rays[0].direction, &[1.0, 0.0]));
        assert_eq!(s.status, Status::UnboundedSuspect);
    }

    #[test]
    fn solve_examples() {
        let cfg = SolverConfig::default();
        let s = solve(&inst(gus_tensor(), &[-1.0, -4.0]), &cfg).unwrap();
        assert_eq!(s.points.len(), 1);
        assert!(close(&s.points[0].x, &[1.0, 2.0]));
        assert_eq!(s.status, Status::Finite);
        let s = solve(&inst(Tensor::zeros(3, 2).unwrap(), &[-1.0, 0.0]), &cfg).unwrap();
        assert!(s.points.is_empty());
        assert_eq!(s.status, Status::ExactEmpty);
        let s = solve(&inst(example_one(), &[1.0, 1.0]), &cfg).unwrap();
        assert!(s.points.iter().any(|p| close(&p.x, &[0.0, 0.0])));
        assert_eq!(s.posdim_suspect, vec![FaceMask::EMPTY]);
        assert_eq!(s.status, Status::NonIsolated);
        for p in &s.points {
            // remaining points are (0,0) and the arc endpoints
            let r2 = p.x[0] * p.x[0] + p.x[1] * p.x[1];
            assert!(r2 < 1e-12 || (r2 - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn homogeneous_examples() {
        let cfg = SolverConfig::default();
        assert!(homogeneous_solve(&example_one(), &cfg).unwrap().points.is_empty());
        let z = homogeneous_solve(&Tensor::zeros(3, 2).unwrap(), &cfg).unwrap();
        let faces: std::collections::BTreeSet<FaceMask> = z.points.iter().map(|p| p.face).collect();
        assert_eq!(faces.len(), 3);
        let w = Tensor::non_r0_witness(3, 2, FaceMask::from_indices(&[0]), 4).unwrap();
        let h = homogeneous_solve(&w, &cfg).unwrap();
        assert_eq!(h.rays.len(), 1);
        assert!(close(&h.rays[0].direction, &[0.0, 1.0]));
    }

    #[test]
    fn chi_values() {
        assert_eq!(chi_bound(3, 2).unwrap(), 118_098);
        assert_eq!(chi_bound(2, 2).unwrap(), 118_098);
        assert_eq!(chi_bound(4, 2).unwrap(), 29_296_875);
        assert!(matches!(chi_bound(3, 30), Err(TcpError::Overflow(_))));
        assert!(chi_bound(1, 2).is_err());
    }

    #[test]
    fn excess_examples() {
        let a = vec![vec![0.0, 1.0]];
        assert_eq!(hausdorff_excess(&a, &[vec![0.0, 1.0], vec![0.0, 0.0]]), 0.0);
        assert_eq!(hausdorff_excess(&[vec![0.0, 2.0]], &a), 1.0);
        assert_eq!(hausdorff_excess(&[], &a), 0.0);
        assert!(hausdorff_excess(&a, &[]).is_infinite());
    }

    #[test]
    fn config_validation() {
        let cfg = SolverConfig { tol: 1e-4, ..SolverConfig::default() };
        assert!(cfg.validate().is_err());
        let cfg = SolverConfig { start_box_radius: 0.0, ..SolverConfig::default() };
        assert!(solve(&inst(gus_tensor(), &[1.0, 1.0]), &cfg).is_err());
    }

    #[test]
    fn solve_is_deterministic() {
        let cfg = SolverConfig::default();
        let t = Tensor::random_gaussian(3, 3, 17).unwrap();
        let p = inst(t, &[-0.5, 0.3, -1.2]);
        assert_eq!(solve(&p, &cfg).unwrap(), solve(&p, &cfg).unwrap());
    }
}
