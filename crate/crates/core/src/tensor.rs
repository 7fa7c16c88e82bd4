//! Dense real tensors of order `m` and dimension `n`.
//!
//! Entries are stored flat in lexicographic order of the (zero-based)
//! multi-index, so `(i1, ..., im)` lives at `sum_j i_j * n^(m-1-j)`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Result, TcpError};
use crate::model::FaceMask;
use crate::rng;

/// Upper bound on `n^m` for dense storage.
pub const MAX_ENTRIES: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    order: usize,
    dim: usize,
    entries: Vec<f64>,
}

fn entry_count(m: usize, n: usize) -> Result<usize> {
    if m < 2 || n < 2 {
        return Err(TcpError::Argument(format!(
            "tensor needs order >= 2 and dimension >= 2, got m={m}, n={n}"
        )));
    }
    let mut count: usize = 1;
    for _ in 0..m {
        count = count
            .checked_mul(n)
            .filter(|c| *c <= MAX_ENTRIES)
            .ok_or_else(|| TcpError::Resource(format!("n^m exceeds {MAX_ENTRIES} (m={m}, n={n})")))?;
    }
    Ok(count)
}

impl Tensor {
    pub fn new(order: usize, dim: usize, entries: Vec<f64>) -> Result<Self> {
        let count = entry_count(order, dim)?;
        check_dim(count, entries.len())?;
        if let Some(pos) = entries.iter().position(|v| !v.is_finite()) {
            return Err(TcpError::NonFinite(format!("tensor entry {pos}")));
        }
        Ok(Self { order, dim, entries })
    }

    pub fn zeros(order: usize, dim: usize) -> Result<Self> {
        let count = entry_count(order, dim)?;
        Ok(Self { order, dim, entries: vec![0.0; count] })
    }

    /// Builds a tensor from zero-based `(multi_index, value)` pairs; all other
    /// entries are zero. Repeated indices are rejected.
    pub fn from_sparse(order: usize, dim: usize, items: &[(Vec<usize>, f64)]) -> Result<Self> {
        let mut t = Self::zeros(order, dim)?;
        let mut seen = vec![false; t.entries.len()];
        for (idx, value) in items {
            let f = t.flat_index(idx)?;
            if seen[f] {
                return Err(TcpError::Load(format!("duplicate sparse index {idx:?}")));
            }
            if !value.is_finite() {
                return Err(TcpError::NonFinite(format!("tensor entry {idx:?}")));
            }
            seen[f] = true;
            t.entries[f] = *value;
        }
        Ok(t)
    }

    /// I.i.d. standard normal entries drawn from a ChaCha8 stream.
    pub fn random_gaussian(order: usize, dim: usize, seed: u64) -> Result<Self> {
        Self::gaussian_from(order, dim, &mut rng::seeded(seed))
    }

    pub fn gaussian_from(order: usize, dim: usize, rng: &mut rng::LabRng) -> Result<Self> {
        let count = entry_count(order, dim)?;
        Ok(Self { order, dim, entries: rng::gaussian_vec(rng, count) })
    }

    /// A tensor whose only nonzero entries have every index inside `alpha`.
    ///
    /// For any `x` supported on the complement of `alpha`, each term of
    /// `A x^(m-1)` contains an index outside `alpha`, so the closure of the
    /// pseudo-face `K_alpha` solves the homogeneous problem and the tensor is
    /// never R0.
    pub fn non_r0_witness(order: usize, dim: usize, alpha: FaceMask, seed: u64) -> Result<Self> {
        let count = entry_count(order, dim)?;
        if alpha.is_full(dim) {
            return Err(TcpError::Argument("witness face must differ from [n]".into()));
        }
        if !alpha.fits(dim) {
            return Err(TcpError::Argument(format!("mask {alpha:?} exceeds dimension {dim}")));
        }
        let mut rng = rng::seeded(seed);
        let mut t = Self { order, dim, entries: vec![0.0; count] };
        let mut idx = vec![0usize; order];
        for f in 0..count {
            t.decode_into(f, &mut idx);
            if idx.iter().all(|&i| alpha.contains(i)) {
                t.entries[f] = rand::Rng::sample::<f64, _>(&mut rng, rand_distr::StandardNormal);
            }
        }
        Ok(t)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn flat_index(&self, idx: &[usize]) -> Result<usize> {
        check_dim(self.order, idx.len())?;
        let mut f = 0usize;
        for &i in idx {
            if i >= self.dim {
                return Err(TcpError::Argument(format!(
                    "index {i} out of range for dimension {}",
                    self.dim
                )));
            }
            f = f * self.dim + i;
        }
        Ok(f)
    }

    pub fn multi_index(&self, flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.order];
        self.decode_into(flat, &mut idx);
        idx
    }

    fn decode_into(&self, mut flat: usize, idx: &mut [usize]) {
        for slot in idx.iter_mut().rev() {
            *slot = flat % self.dim;
            flat /= self.dim;
        }
    }

    pub fn get(&self, idx: &[usize]) -> Result<f64> {
        Ok(self.entries[self.flat_index(idx)?])
    }

    pub fn set(&mut self, idx: &[usize], value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(TcpError::NonFinite(format!("tensor entry {idx:?}")));
        }
        let f = self.flat_index(idx)?;
        self.entries[f] = value;
        Ok(())
    }

    /// `A x^(m-1)`: the vector with components `sum a_{i i2..im} x_{i2}..x_{im}`.
    pub fn contract(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, x.len())?;
        Ok(self.contract_unchecked(x))
    }

    pub(crate) fn contract_unchecked(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut cur = self.fold_last(&self.entries, x);
        while cur.len() > n {
            cur = self.fold_last(&cur, x);
        }
        cur
    }

    fn fold_last(&self, v: &[f64], x: &[f64]) -> Vec<f64> {
        v.chunks_exact(self.dim)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `A x^m = <x, A x^(m-1)>`.
    pub fn form(&self, x: &[f64]) -> Result<f64> {
        let y = self.contract(x)?;
        Ok(dot(x, &y))
    }

    /// Jacobian of `x -> A x^(m-1)`, an `n x n` matrix.
    pub fn jacobian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        check_dim(self.dim, x.len())?;
        Ok(self.jacobian_unchecked(x))
    }

    pub(crate) fn jacobian_unchecked(&self, x: &[f64]) -> DMatrix<f64> {
        let (m, n) = (self.order, self.dim);
        let mut jac = DMatrix::zeros(n, n);
        let mut idx = vec![0usize; m];
        let mut prefix = vec![1.0; m + 1];
        let mut suffix = vec![1.0; m + 1];
        for (f, &a) in self.entries.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            self.decode_into(f, &mut idx);
            // prefix/suffix products over slots 1..m
            prefix[1] = 1.0;
            for p in 1..m {
                prefix[p + 1] = prefix[p] * x[idx[p]];
            }
            suffix[m] = 1.0;
            for p in (1..m).rev() {
                suffix[p] = suffix[p + 1] * x[idx[p]];
            }
            for p in 1..m {
                jac[(idx[0], idx[p])] += a * prefix[p] * suffix[p + 1];
            }
        }
        jac
    }

    pub fn frobenius(&self) -> f64 {
        self.entries.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn add(&self, other: &Tensor) -> Result<Tensor> {
        self.same_shape(other)?;
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect();
        Ok(Tensor { order: self.order, dim: self.dim, entries })
    }

    pub fn sub(&self, other: &Tensor) -> Result<Tensor> {
        self.same_shape(other)?;
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect();
        Ok(Tensor { order: self.order, dim: self.dim, entries })
    }

    pub fn scale(&self, t: f64) -> Tensor {
        Tensor {
            order: self.order,
            dim: self.dim,
            entries: self.entries.iter().map(|a| t * a).collect(),
        }
    }

    /// Adds a flat perturbation of matching length.
    pub fn perturbed(&self, delta: &[f64]) -> Result<Tensor> {
        check_dim(self.entries.len(), delta.len())?;
        let entries = self.entries.iter().zip(delta).map(|(a, b)| a + b).collect();
        Tensor::new(self.order, self.dim, entries)
    }

    fn same_shape(&self, other: &Tensor) -> Result<()> {
        if self.order != other.order || self.dim != other.dim {
            return Err(TcpError::Shape(self.order, self.dim, other.order, other.dim));
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|v| *v == 0.0)
    }
}

/// `sqrt(||A||_F^2 + ||a||^2)`.
pub fn pair_norm(a_tensor: &Tensor, a: &[f64]) -> f64 {
    let t = a_tensor.frobenius();
    (t * t + a.iter().map(|v| v * v).sum::<f64>()).sqrt()
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

pub fn norm_inf(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |acc: f64, v| acc.max(v.abs()))
}
