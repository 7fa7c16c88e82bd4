//! Grid brute-force oracle for `Sol(A, a)`.
//!
//! Scans `[0, R]^n` on a regular grid, keeps points whose natural residual
//! `|min(x_i, F_i(x))|` is within one grid cell's worth of variation of zero,
//! groups them into connected clusters and polishes each cluster's discrete
//! local minima with a plain Newton iteration on the faces they touch. It
//! shares no code with the pseudo-face solver beyond evaluating `F`.

use std::collections::{HashMap, VecDeque};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Result, TcpError};
use crate::model::{residual, TcpInstance};

/// Largest admissible `n * (points per axis)^n`.
pub const GRID_BUDGET: f64 = 1e8;

/// Polished roots must satisfy the complementarity conditions to this level.
pub const POLISH_TOL: f64 = 1e-8;

/// Clusters polishing to more distinct roots than this are reported as
/// positive-dimensional.
pub const POSDIM_CLUSTER_ROOTS: usize = 25;

const MAX_MINIMA_PER_CLUSTER: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleCluster {
    /// Polished roots, or the best grid point if polishing failed.
    pub representatives: Vec<Vec<f64>>,
    /// Number of accepted grid points in the cluster.
    pub size: usize,
    pub polished: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub clusters: Vec<OracleCluster>,
    pub grid_points: usize,
    pub accepted: usize,
}

impl OracleResult {
    /// Distinct polished roots over all clusters.
    pub fn points(&self) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = Vec::new();
        for c in self.clusters.iter().filter(|c| c.polished) {
            for r in &c.representatives {
                if !out.iter().any(|q| dist_inf(q, r) < 1e-6) {
                    out.push(r.clone());
                }
            }
        }
        out.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        out
    }

    pub fn posdim_suspect(&self) -> bool {
        self.clusters.iter().any(|c| c.representatives.len() > POSDIM_CLUSTER_ROOTS)
    }

    /// Every grid point of every cluster is kept only implicitly; this is the
    /// representative set used as a reference for positive-dimensional sets.
    pub fn all_representatives(&self) -> Vec<Vec<f64>> {
        self.clusters.iter().flat_map(|c| c.representatives.iter().cloned()).collect()
    }
}

fn dist_inf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |acc, (x, y)| acc.max((x - y).abs()))
}

struct Grid {
    n: usize,
    per_axis: usize,
    step: f64,
}

impl Grid {
    fn decode(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.n];
        for v in idx.iter_mut() {
            *v = flat % self.per_axis;
            flat /= self.per_axis;
        }
        idx
    }

    fn encode(&self, idx: &[usize]) -> usize {
        idx.iter().rev().fold(0, |acc, &i| acc * self.per_axis + i)
    }

    fn point(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter().map(|&i| i as f64 * self.step).collect()
    }

    fn neighbours(&self, flat: usize) -> Vec<usize> {
        let idx = self.decode(flat);
        let total = 3usize.pow(self.n as u32);
        let mut out = Vec::with_capacity(total - 1);
        'outer: for code in 0..total {
            let mut c = code;
            let mut nb = idx.clone();
            let mut moved = false;
            for v in nb.iter_mut() {
                let d = c % 3;
                c /= 3;
                match d {
                    0 => {}
                    1 => {
                        if *v + 1 >= self.per_axis {
                            continue 'outer;
                        }
                        *v += 1;
                        moved = true;
                    }
                    _ => {
                        if *v == 0 {
                            continue 'outer;
                        }
                        *v -= 1;
                        moved = true;
                    }
                }
            }
            if moved {
                out.push(self.encode(&nb));
            }
        }
        out
    }
}

/// Natural residual at `x` and whether it is small enough that a root may lie
/// within the surrounding grid cell.
fn screen(inst: &TcpInstance, x: &[f64], step: f64, tol: f64) -> Option<f64> {
    let f = inst.map_unchecked(x);
    let n = x.len();
    let mut worst = 0.0f64;
    let mut xs = x.to_vec();
    let mut variation = vec![0.0; n];
    for j in 0..n {
        xs[j] += step;
        let fj = inst.map_unchecked(&xs);
        xs[j] = x[j];
        for i in 0..n {
            variation[i] += (fj[i] - f[i]).abs();
        }
    }
    for i in 0..n {
        let r = x[i].min(f[i]).abs();
        let slack = tol + step.max(variation[i]);
        if r > slack {
            return None;
        }
        worst = worst.max(r);
    }
    Some(worst)
}

/// Grid brute force over `[0, box_radius]^n` with spacing `grid_step`.
///
/// `tol` is added to the per-point acceptance slack. Errors with a resource
/// error when `n * (box_radius / grid_step + 1)^n` exceeds [`GRID_BUDGET`].
pub fn brute_force_oracle(inst: &TcpInstance, box_radius: f64, grid_step: f64, tol: f64) -> Result<OracleResult> {
    if !(grid_step > 0.0) || !(box_radius >= 0.0) || !(tol >= 0.0) {
        return Err(TcpError::Argument("oracle needs grid_step > 0, box_radius >= 0, tol >= 0".into()));
    }
    let n = inst.dim();
    let per_axis = (box_radius / grid_step + 1e-9).floor() as usize + 1;
    let budget = n as f64 * (per_axis as f64).powi(n as i32);
    if budget > GRID_BUDGET {
        return Err(TcpError::Resource(format!("grid of {budget:.3e} evaluations exceeds {GRID_BUDGET:e}")));
    }
    let grid = Grid { n, per_axis, step: grid_step };
    let total = per_axis.pow(n as u32);
    let accepted: HashMap<usize, f64> = (0..total)
        .into_par_iter()
        .filter_map(|flat| {
            let x = grid.point(&grid.decode(flat));
            screen(inst, &x, grid_step, tol).map(|r| (flat, r))
        })
        .collect();

    // connected components, visited in ascending flat order for determinism
    let mut keys: Vec<usize> = accepted.keys().copied().collect();
    keys.sort_unstable();
    let mut label: HashMap<usize, usize> = HashMap::with_capacity(keys.len());
    let mut components: Vec<Vec<usize>> = Vec::new();
    for &start in &keys {
        if label.contains_key(&start) {
            continue;
        }
        let id = components.len();
        let mut members = vec![start];
        label.insert(start, id);
        let mut queue = VecDeque::from([start]);
        while let Some(p) = queue.pop_front() {
            for q in grid.neighbours(p) {
                if accepted.contains_key(&q) && !label.contains_key(&q) {
                    label.insert(q, id);
                    members.push(q);
                    queue.push_back(q);
                }
            }
        }
        members.sort_unstable();
        components.push(members);
    }

    let clusters = components
        .par_iter()
        .map(|members| polish_cluster(inst, &grid, members, &accepted))
        .collect();
    Ok(OracleResult { clusters, grid_points: total, accepted: keys.len() })
}

fn polish_cluster(inst: &TcpInstance, grid: &Grid, members: &[usize], accepted: &HashMap<usize, f64>) -> OracleCluster {
    let mut minima: Vec<(usize, f64)> = members
        .iter()
        .filter(|&&p| {
            let rp = accepted[&p];
            grid.neighbours(p).iter().all(|q| accepted.get(q).is_none_or(|&rq| rp <= rq))
        })
        .map(|&p| (p, accepted[&p]))
        .collect();
    minima.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    minima.truncate(MAX_MINIMA_PER_CLUSTER);

    let mut roots: Vec<Vec<f64>> = Vec::new();
    for &(p, _) in &minima {
        let idx = grid.decode(p);
        let start = grid.point(&idx);
        let near_zero: Vec<usize> = (0..grid.n).filter(|&i| idx[i] <= 1).collect();
        for subset in 0..(1usize << near_zero.len()) {
            let zeros: Vec<usize> = near_zero
                .iter()
                .enumerate()
                .filter(|(b, _)| subset & (1 << b) != 0)
                .map(|(_, &i)| i)
                .collect();
            if let Some(x) = newton_on_face(inst, &start, &zeros) {
                if !roots.iter().any(|q| dist_inf(q, &x) < 1e-6) {
                    roots.push(x);
                }
            }
        }
    }
    if roots.is_empty() {
        let best = minima.first().map(|&(p, _)| grid.point(&grid.decode(p))).unwrap_or_default();
        return OracleCluster { representatives: vec![best], size: members.len(), polished: false };
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    OracleCluster { representatives: roots, size: members.len(), polished: true }
}

/// Undamped Newton on `F_i = 0` for coordinates not in `zeros`, with a
/// central-difference Jacobian and an SVD pseudo-inverse step.
fn newton_on_face(inst: &TcpInstance, start: &[f64], zeros: &[usize]) -> Option<Vec<f64>> {
    let n = start.len();
    let free: Vec<usize> = (0..n).filter(|i| !zeros.contains(i)).collect();
    let mut x = start.to_vec();
    for &i in zeros {
        x[i] = 0.0;
    }
    let k = free.len();
    if k > 0 {
        for _ in 0..60 {
            let f = inst.map_unchecked(&x);
            let r = DVector::from_iterator(k, free.iter().map(|&i| -f[i]));
            if r.amax() == 0.0 {
                break;
            }
            let mut jac = DMatrix::zeros(k, k);
            for (c, &j) in free.iter().enumerate() {
                let h = 1e-7 * (1.0 + x[j].abs());
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[j] += h;
                xm[j] -= h;
                let (fp, fm) = (inst.map_unchecked(&xp), inst.map_unchecked(&xm));
                for (row, &i) in free.iter().enumerate() {
                    jac[(row, c)] = (fp[i] - fm[i]) / (2.0 * h);
                }
            }
            let step = match jac.clone().lu().solve(&r) {
                Some(s) if s.iter().all(|v| v.is_finite()) => s,
                _ => jac.svd(true, true).solve(&r, 1e-12).ok()?,
            };
            for (c, &j) in free.iter().enumerate() {
                x[j] += step[c];
            }
            if x.iter().any(|v| !v.is_finite() || v.abs() > 1e8) {
                return None;
            }
            if step.amax() <= 1e-15 * (1.0 + x.iter().fold(0.0f64, |a, v| a.max(v.abs()))) {
                break;
            }
        }
    }
    for v in x.iter_mut() {
        if v.abs() <= POLISH_TOL {
            *v = 0.0;
        }
    }
    let res = residual(inst, &x).ok()?;
    res.is_solution(POLISH_TOL).then_some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{example_one, gus_tensor};
    use crate::tensor::Tensor;

    #[test]
    fn gus_instance_has_one_cluster_near_closed_form() {
        let inst = TcpInstance::new(gus_tensor(), vec![-1.0, -4.0]).unwrap();
        let out = brute_force_oracle(&inst, 4.0, 0.01, 1e-8).unwrap();
        assert_eq!(out.clusters.len(), 1);
        let pts = out.points();
        assert_eq!(pts.len(), 1);
        assert!(dist_inf(&pts[0], &[1.0, 2.0]) < 1e-9);
    }

    #[test]
    fn example_one_arc_is_an_extended_cluster() {
        let inst = TcpInstance::new(example_one(), vec![1.0, 1.0]).unwrap();
        let out = brute_force_oracle(&inst, 2.0, 0.005, 1e-8).unwrap();
        assert_eq!(out.clusters.len(), 2);
        let origin = out.clusters.iter().find(|c| c.representatives.iter().any(|r| r == &vec![0.0, 0.0])).unwrap();
        let arc = out.clusters.iter().find(|c| !std::ptr::eq(*c, origin)).unwrap();
        assert!(arc.size > 10 * origin.size);
        assert!(out.posdim_suspect());
        for r in &arc.representatives {
            assert!((r[0] * r[0] + r[1] * r[1] - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn nonnegative_a_gives_origin_cluster() {
        let inst = TcpInstance::new(Tensor::random_gaussian(3, 2, 3).unwrap(), vec![0.5, 2.0]).unwrap();
        let out = brute_force_oracle(&inst, 2.0, 0.02, 1e-8).unwrap();
        assert!(out.points().iter().any(|p| p == &vec![0.0, 0.0]));
    }

    #[test]
    fn budget_guard() {
        let inst = TcpInstance::new(Tensor::zeros(3, 4).unwrap(), vec![1.0; 4]).unwrap();
        assert!(matches!(brute_force_oracle(&inst, 5.0, 0.01, 1e-8), Err(TcpError::Resource(_))));
        assert!(brute_force_oracle(&inst, 5.0, 0.0, 1e-8).is_err());
    }
}
