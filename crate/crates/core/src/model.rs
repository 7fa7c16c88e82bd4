//! Problem instances, residuals, the KKT characterization and the
//! pseudo-face decomposition of the nonnegative orthant.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Result, TcpError};
use crate::tensor::{dot, Tensor};

/// Default classification tolerance.
pub const DEFAULT_TOL: f64 = 1e-8;

/// Coefficients below this magnitude count as zero when deciding whether a
/// reduced equation vanishes identically.
pub const ZERO_COEF_TOL: f64 = 1e-14;

/// `TCP(A, a)`: find `x >= 0` with `A x^(m-1) + a >= 0` and `<x, A x^(m-1) + a> = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TcpInstance {
    pub tensor: Tensor,
    pub a: Vec<f64>,
}

impl TcpInstance {
    pub fn new(tensor: Tensor, a: Vec<f64>) -> Result<Self> {
        check_dim(tensor.dim(), a.len())?;
        if let Some(i) = a.iter().position(|v| !v.is_finite()) {
            return Err(TcpError::NonFinite(format!("a[{i}]")));
        }
        Ok(Self { tensor, a })
    }

    /// The homogeneous problem `TCP(A, 0)`.
    pub fn homogeneous(tensor: Tensor) -> Self {
        let n = tensor.dim();
        Self { tensor, a: vec![0.0; n] }
    }

    pub fn dim(&self) -> usize {
        self.tensor.dim()
    }

    /// `F(x) = A x^(m-1) + a`.
    pub fn map(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), x.len())?;
        Ok(self.map_unchecked(x))
    }

    pub(crate) fn map_unchecked(&self, x: &[f64]) -> Vec<f64> {
        let mut f = self.tensor.contract_unchecked(x);
        f.iter_mut().zip(&self.a).for_each(|(v, a)| *v += a);
        f
    }
}

/// Subset `alpha` of `[n]` naming the pseudo-face
/// `K_alpha = { x : x_i = 0 for i in alpha, x_i > 0 otherwise }`.
///
/// Bit `i` (zero-based) set means coordinate `i` vanishes on the face.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FaceMask(u64);

impl FaceMask {
    pub const EMPTY: FaceMask = FaceMask(0);

    pub fn from_bits(bits: u64) -> Self {
        FaceMask(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn full(n: usize) -> Self {
        assert!(n < 64, "face masks support n < 64");
        FaceMask((1u64 << n) - 1)
    }

    pub fn from_indices(zero_based: &[usize]) -> Self {
        FaceMask(zero_based.iter().fold(0u64, |acc, &i| acc | (1u64 << i)))
    }

    /// Parses 1-based indices as used in files and on the command line.
    pub fn from_one_based(indices: &[usize], n: usize) -> Result<Self> {
        let mut bits = 0u64;
        for &i in indices {
            if i == 0 || i > n {
                return Err(TcpError::Argument(format!("face index {i} outside 1..={n}")));
            }
            bits |= 1 << (i - 1);
        }
        Ok(FaceMask(bits))
    }

    pub fn contains(self, i: usize) -> bool {
        i < 64 && self.0 & (1 << i) != 0
    }

    pub fn with(self, i: usize) -> Self {
        FaceMask(self.0 | (1 << i))
    }

    pub fn is_full(self, n: usize) -> bool {
        self == Self::full(n)
    }

    pub fn fits(self, n: usize) -> bool {
        self.0 & !Self::full(n).0 == 0
    }

    pub fn count(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_subset_of(self, other: FaceMask) -> bool {
        self.0 & !other.0 == 0
    }

    /// Zero-based coordinates fixed at zero.
    pub fn fixed(self, n: usize) -> Vec<usize> {
        (0..n).filter(|&i| self.contains(i)).collect()
    }

    /// Zero-based coordinates that are strictly positive on the face.
    pub fn free(self, n: usize) -> Vec<usize> {
        (0..n).filter(|&i| !self.contains(i)).collect()
    }

    pub fn one_based(self, n: usize) -> Vec<usize> {
        self.fixed(n).into_iter().map(|i| i + 1).collect()
    }
}

impl fmt::Debug for FaceMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let idx: Vec<usize> = (0..64).filter(|&i| self.contains(i)).map(|i| i + 1).collect();
        write!(f, "{{")?;
        for (k, i) in idx.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

/// All `2^n` masks in ascending bit order.
pub fn enumerate_faces(n: usize) -> Vec<FaceMask> {
    assert!((1..64).contains(&n), "enumerate_faces needs 1 <= n < 64");
    (0..(1u64 << n)).map(FaceMask).collect()
}

/// The face containing `x`: coordinates at or below `tol` count as zero.
pub fn face_of(x: &[f64], tol: f64) -> Result<FaceMask> {
    let mut bits = 0u64;
    for (i, &v) in x.iter().enumerate() {
        if v < -tol {
            return Err(TcpError::Argument(format!("x[{i}] = {v} is negative beyond tolerance")));
        }
        if v <= tol {
            bits |= 1 << i;
        }
    }
    Ok(FaceMask(bits))
}

/// Violations of the three complementarity conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub feas_x: f64,
    pub feas_f: f64,
    pub comp: f64,
}

impl Residual {
    pub fn max(&self) -> f64 {
        self.feas_x.max(self.feas_f).max(self.comp)
    }

    pub fn is_solution(&self, tol: f64) -> bool {
        self.feas_x <= tol && self.feas_f <= tol && self.comp <= tol
    }
}

pub fn residual(inst: &TcpInstance, x: &[f64]) -> Result<Residual> {
    let f = inst.map(x)?;
    let neg_part = |v: &[f64]| v.iter().fold(0.0f64, |acc, &t| acc.max(-t));
    Ok(Residual { feas_x: neg_part(x), feas_f: neg_part(&f), comp: dot(x, &f).abs() })
}

/// A candidate `(x, lambda)` for the system
/// `F(x) - lambda = 0, <lambda, x> = 0, lambda >= 0, x >= 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KktPoint {
    pub x: Vec<f64>,
    pub lambda: Vec<f64>,
}

impl KktPoint {
    /// The multiplier forced by the first equation: `lambda = F(x)`.
    pub fn from_solution(inst: &TcpInstance, x: &[f64]) -> Result<Self> {
        Ok(Self { x: x.to_vec(), lambda: inst.map(x)? })
    }
}

pub fn kkt_residual(inst: &TcpInstance, p: &KktPoint) -> Result<f64> {
    check_dim(inst.dim(), p.lambda.len())?;
    let f = inst.map(&p.x)?;
    let stationarity = f.iter().zip(&p.lambda).fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
    let comp = dot(&p.lambda, &p.x).abs();
    let neg = |v: &[f64]| v.iter().fold(0.0f64, |acc, &t| acc.max(-t));
    Ok(stationarity.max(comp).max(neg(&p.x)).max(neg(&p.lambda)))
}

/// The square polynomial system obtained by restricting the KKT conditions to
/// one pseudo-face: unknowns are the free coordinates, equations are `F_i = 0`
/// for free `i`. Optionally appends the simplex normalization `sum x = 1`,
/// used for the homogeneous problem.
#[derive(Debug, Clone)]
pub struct FaceSystem<'a> {
    inst: &'a TcpInstance,
    alpha: FaceMask,
    free: Vec<usize>,
    fixed: Vec<usize>,
    /// Free equations whose reduced polynomial vanishes identically.
    zero_eq: Vec<bool>,
    normalized: bool,
}

impl<'a> FaceSystem<'a> {
    pub fn new(inst: &'a TcpInstance, alpha: FaceMask) -> Self {
        Self::build(inst, alpha, false)
    }

    /// Face system of `TCP(A, 0)` sliced by the probability simplex.
    pub fn normalized(inst: &'a TcpInstance, alpha: FaceMask) -> Self {
        Self::build(inst, alpha, true)
    }

    fn build(inst: &'a TcpInstance, alpha: FaceMask, normalized: bool) -> Self {
        let n = inst.dim();
        let free = alpha.free(n);
        let fixed = alpha.fixed(n);
        let zero_eq = free.iter().map(|&i| reduced_is_zero(inst, i, alpha)).collect();
        Self { inst, alpha, free, fixed, zero_eq, normalized }
    }

    pub fn alpha(&self) -> FaceMask {
        self.alpha
    }

    pub fn instance(&self) -> &TcpInstance {
        self.inst
    }

    pub fn free(&self) -> &[usize] {
        &self.free
    }

    pub fn fixed(&self) -> &[usize] {
        &self.fixed
    }

    pub fn n_unknowns(&self) -> usize {
        self.free.len()
    }

    /// Number of equations that are not identically zero (plus the
    /// normalization row if present).
    pub fn n_equations(&self) -> usize {
        self.zero_eq.iter().filter(|z| !**z).count() + usize::from(self.normalized)
    }

    pub fn identically_zero(&self) -> &[bool] {
        &self.zero_eq
    }

    /// True when some reduced equation vanishes identically.
    pub fn is_underdetermined(&self) -> bool {
        self.zero_eq.iter().any(|z| *z)
    }

    /// Embeds free-coordinate values into `R^n` with zeros on `alpha`.
    pub fn lift(&self, y: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.inst.dim()];
        for (&i, &v) in self.free.iter().zip(y) {
            x[i] = v;
        }
        x
    }

    pub fn restrict(&self, x: &[f64]) -> Vec<f64> {
        self.free.iter().map(|&i| x[i]).collect()
    }

    pub fn eval(&self, y: &[f64]) -> Vec<f64> {
        let x = self.lift(y);
        let f = self.inst.map_unchecked(&x);
        let mut out: Vec<f64> = self
            .free
            .iter()
            .zip(&self.zero_eq)
            .filter(|(_, z)| !**z)
            .map(|(&i, _)| f[i])
            .collect();
        if self.normalized {
            out.push(y.iter().sum::<f64>() - 1.0);
        }
        out
    }

    pub fn jacobian(&self, y: &[f64]) -> DMatrix<f64> {
        let x = self.lift(y);
        let full = self.inst.tensor.jacobian_unchecked(&x);
        let rows: Vec<usize> = self
            .free
            .iter()
            .zip(&self.zero_eq)
            .filter(|(_, z)| !**z)
            .map(|(&i, _)| i)
            .collect();
        let k = self.free.len();
        let mut jac = DMatrix::zeros(self.n_equations(), k);
        for (r, &i) in rows.iter().enumerate() {
            for (c, &j) in self.free.iter().enumerate() {
                jac[(r, c)] = full[(i, j)];
            }
        }
        if self.normalized {
            let last = rows.len();
            for c in 0..k {
                jac[(last, c)] = 1.0;
            }
        }
        jac
    }

    /// Sign conditions of the face: `x_i > tol` on free coordinates and
    /// `F_i(x) >= -tol` on fixed ones.
    pub fn signs_hold(&self, x: &[f64], tol: f64) -> bool {
        if self.free.iter().any(|&i| x[i] <= tol) {
            return false;
        }
        let f = self.inst.map_unchecked(x);
        self.fixed.iter().all(|&i| f[i] >= -tol)
    }
}

/// Whether `F_i` restricted to `{x_alpha = 0}` is the zero polynomial.
///
/// Coefficients of each monomial in the free variables are accumulated over
/// all orderings of the contracted indices before comparing against zero.
fn reduced_is_zero(inst: &TcpInstance, i: usize, alpha: FaceMask) -> bool {
    if inst.a[i].abs() >= ZERO_COEF_TOL {
        return false;
    }
    let t = &inst.tensor;
    let (m, n) = (t.order(), t.dim());
    let block = n.pow((m - 1) as u32);
    let entries = &t.entries()[i * block..(i + 1) * block];
    let mut coefs: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    let mut idx = vec![0usize; m - 1];
    for (f, &v) in entries.iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        let mut rest = f;
        for slot in idx.iter_mut().rev() {
            *slot = rest % n;
            rest /= n;
        }
        if idx.iter().any(|&j| alpha.contains(j)) {
            continue;
        }
        let mut key = idx.clone();
        key.sort_unstable();
        *coefs.entry(key).or_insert(0.0) += v;
    }
    coefs.values().all(|c| c.abs() < ZERO_COEF_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example_one() -> Tensor {
        Tensor::from_sparse(
            3,
            2,
            &[(vec![0, 0, 0], -1.0), (vec![0, 1, 1], -1.0), (vec![1, 0, 0], -1.0), (vec![1, 1, 1], -1.0)],
        )
        .unwrap()
    }

    fn cubes() -> Tensor {
        Tensor::from_sparse(3, 2, &[(vec![0, 0, 0], 1.0), (vec![1, 1, 1], 1.0)]).unwrap()
    }

    #[test]
    fn residual_examples() {
        let inst = TcpInstance::new(cubes(), vec![-1.0, -4.0]).unwrap();
        let r = residual(&inst, &[1.0, 2.0]).unwrap();
        assert_eq!((r.feas_x, r.feas_f, r.comp), (0.0, 0.0, 0.0));
        assert_eq!(residual(&inst, &[-1.0, 2.0]).unwrap().feas_x, 1.0);
        let zero = TcpInstance::new(Tensor::zeros(3, 2).unwrap(), vec![1.0, 1.0]).unwrap();
        let r = residual(&zero, &[0.0, 0.0]).unwrap();
        assert!(r.is_solution(0.0));
        assert!(residual(&zero, &[0.0]).is_err());
    }

    #[test]
    fn kkt_examples() {
        let inst = TcpInstance::new(cubes(), vec![-1.0, -4.0]).unwrap();
        let p = KktPoint { x: vec![1.0, 2.0], lambda: vec![0.0, 0.0] };
        assert_eq!(kkt_residual(&inst, &p).unwrap(), 0.0);
        let zero = TcpInstance::new(Tensor::zeros(3, 2).unwrap(), vec![1.0, 1.0]).unwrap();
        let p = KktPoint { x: vec![0.0, 0.0], lambda: vec![1.0, 1.0] };
        assert_eq!(kkt_residual(&zero, &p).unwrap(), 0.0);
        // F(1,0) = (1, 0) with the tensor a_111 = 1, a = 0
        let lin = TcpInstance::new(
            Tensor::from_sparse(3, 2, &[(vec![0, 0, 0], 1.0)]).unwrap(),
            vec![0.0, 0.0],
        )
        .unwrap();
        let p = KktPoint { x: vec![1.0, 0.0], lambda: vec![1.0, 0.0] };
        assert_eq!(kkt_residual(&lin, &p).unwrap(), 1.0);
        let bad = KktPoint { x: vec![1.0, 0.0], lambda: vec![1.0] };
        assert!(kkt_residual(&lin, &bad).is_err());
    }

    #[test]
    fn faces_enumerated_in_bit_order() {
        let faces = enumerate_faces(2);
        let shown: Vec<Vec<usize>> = faces.iter().map(|f| f.one_based(2)).collect();
        assert_eq!(shown, vec![vec![], vec![1], vec![2], vec![1, 2]]);
        assert_eq!(enumerate_faces(3).len(), 8);
    }

    #[test]
    fn face_of_examples() {
        assert_eq!(face_of(&[0.0, 1.0], 1e-9).unwrap(), FaceMask::from_indices(&[0]));
        assert_eq!(face_of(&[0.0, 0.0], 1e-9).unwrap(), FaceMask::full(2));
        assert_eq!(face_of(&[2.0, 3.0], 1e-9).unwrap(), FaceMask::EMPTY);
        assert!(face_of(&[-1.0, 3.0], 1e-9).is_err());
    }

    #[test]
    fn face_system_example_one() {
        let inst = TcpInstance::new(example_one(), vec![2.0, 1.0]).unwrap();
        let fs = FaceSystem::new(&inst, FaceMask::from_indices(&[0]));
        assert_eq!(fs.n_unknowns(), 1);
        assert_eq!(fs.n_equations(), 1);
        // -x2^2 + 1 at x2 = 1 and 3
        assert_eq!(fs.eval(&[1.0]), vec![0.0]);
        assert_eq!(fs.eval(&[3.0]), vec![-8.0]);
        assert!(fs.signs_hold(&fs.lift(&[1.0]), 1e-9));
        // x2 = 2 breaks F_1 = -x2^2 + 2 >= 0
        assert!(!fs.signs_hold(&fs.lift(&[2.0]), 1e-9));
    }

    #[test]
    fn full_face_has_no_equations() {
        let inst = TcpInstance::new(example_one(), vec![2.0, 1.0]).unwrap();
        let fs = FaceSystem::new(&inst, FaceMask::full(2));
        assert_eq!(fs.n_unknowns(), 0);
        assert_eq!(fs.n_equations(), 0);
        assert!(fs.signs_hold(&[0.0, 0.0], 1e-9));
        let neg = TcpInstance::new(example_one(), vec![-1.0, 1.0]).unwrap();
        assert!(!FaceSystem::new(&neg, FaceMask::full(2)).signs_hold(&[0.0, 0.0], 1e-9));
    }

    #[test]
    fn zero_tensor_face_is_underdetermined() {
        let inst = TcpInstance::new(Tensor::zeros(3, 2).unwrap(), vec![0.0, 1.0]).unwrap();
        let fs = FaceSystem::new(&inst, FaceMask::from_indices(&[1]));
        assert!(fs.is_underdetermined());
        assert_eq!(fs.n_equations(), 0);
        // cancelling coefficients a_112 = -a_121 also vanish identically
        let t = Tensor::from_sparse(3, 2, &[(vec![0, 0, 1], 1.0), (vec![0, 1, 0], -1.0)]).unwrap();
        let inst = TcpInstance::homogeneous(t);
        assert!(FaceSystem::new(&inst, FaceMask::EMPTY).identically_zero()[0]);
    }

    #[test]
    fn face_jacobian_matches_finite_differences() {
        let t = Tensor::random_gaussian(3, 3, 9).unwrap();
        let inst = TcpInstance::new(t, vec![0.2, -0.4, 0.1]).unwrap();
        for bits in 0..7u64 {
            let fs = FaceSystem::normalized(&inst, FaceMask::from_bits(bits));
            let k = fs.n_unknowns();
            let y: Vec<f64> = (0..k).map(|j| 0.3 + 0.2 * j as f64).collect();
            let jac = fs.jacobian(&y);
            for c in 0..k {
                let mut yp = y.clone();
                let mut ym = y.clone();
                yp[c] += 1e-6;
                ym[c] -= 1e-6;
                let (fp, fm) = (fs.eval(&yp), fs.eval(&ym));
                for r in 0..fs.n_equations() {
                    let fd = (fp[r] - fm[r]) / 2e-6;
                    assert!((fd - jac[(r, c)]).abs() < 1e-6);
                }
            }
        }
    }
}
