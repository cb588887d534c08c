//! Small dense linear algebra for the estimator and the design solver.
//!
//! Everything here works on plain `Vec<T>`/slices plus a row-major symmetric
//! matrix type. Dimensions stay small (tens), so the routines favour accuracy
//! over asymptotic speed: Cholesky for positive-definite solves, cyclic Jacobi
//! for eigenvalues and one-sided Jacobi SVD for numerical rank.

#![allow(clippy::needless_range_loop)]

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const MAX_JACOBI_SWEEPS: usize = 100;

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

pub fn norm<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// Dense symmetric matrix stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Scalar> SymMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![T::zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scaled_identity(dim, T::one())
    }

    pub fn scaled_identity(dim: usize, s: T) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = s;
        }
        m
    }

    /// Builds a matrix from rows, rejecting non-square, non-finite or
    /// asymmetric input (relative tolerance 1e-12 of the largest entry).
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::InvalidInstance("empty matrix".into()));
        }
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInstance("non-finite matrix entry".into()));
        }
        let scale = data.iter().fold(T::zero(), |m, x| m.max(x.abs()));
        let tol = T::of(1e-12) * scale.max(T::one());
        for i in 0..dim {
            for j in (i + 1)..dim {
                if (data[i * dim + j] - data[j * dim + i]).abs() > tol {
                    return Err(Error::InvalidInstance("matrix is not symmetric".into()));
                }
            }
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.dim + j]
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        self.data.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    /// `self += weight * a aᵀ`
    pub fn add_outer(&mut self, a: &[T], weight: T) {
        assert_eq!(a.len(), self.dim, "outer product dimension");
        for i in 0..self.dim {
            let wi = weight * a[i];
            for j in 0..self.dim {
                self.data[i * self.dim + j] = self.data[i * self.dim + j] + wi * a[j];
            }
        }
    }

    pub fn add_assign(&mut self, other: &SymMatrix<T>) {
        assert_eq!(self.dim, other.dim, "matrix dimension");
        for (x, &y) in self.data.iter_mut().zip(&other.data) {
            *x = *x + y;
        }
    }

    pub fn scaled(&self, s: T) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&x| x * s).collect(),
        }
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        self.data.chunks(self.dim).map(|row| dot(row, x)).collect()
    }

    pub fn frobenius_norm(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |acc, &x| acc + x * x)
            .sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    /// Eigenvalues in ascending order (cyclic Jacobi).
    pub fn eigenvalues(&self) -> Vec<T> {
        let n = self.dim;
        let mut a = self.data.clone();
        let eps = T::epsilon();
        for _ in 0..MAX_JACOBI_SWEEPS {
            let off: T = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .fold(T::zero(), |acc, (i, j)| acc + a[i * n + j] * a[i * n + j]);
            let diag: T = (0..n).fold(T::zero(), |acc, i| acc + a[i * n + i] * a[i * n + i]);
            if off <= eps * eps * diag || off.is_zero() {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[p * n + q];
                    if apq.is_zero() {
                        continue;
                    }
                    let two = T::of(2.0);
                    let theta = (a[q * n + q] - a[p * n + p]) / (two * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                    let c = T::one() / (t * t + T::one()).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[k * n + p];
                        let akq = a[k * n + q];
                        a[k * n + p] = c * akp - s * akq;
                        a[k * n + q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[p * n + k];
                        let aqk = a[q * n + k];
                        a[p * n + k] = c * apk - s * aqk;
                        a[q * n + k] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut ev: Vec<T> = (0..n).map(|i| a[i * n + i]).collect();
        ev.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalue"));
        ev
    }

    /// Fails with `SingularMatrix` unless `lambda_min > cond_tol * lambda_max > 0`.
    pub fn check_positive_definite(&self) -> Result<()> {
        if self.data.iter().any(|x| !x.is_finite()) {
            return Err(Error::SingularMatrix);
        }
        let ev = self.eigenvalues();
        let (lo, hi) = (ev[0], ev[ev.len() - 1]);
        if hi <= T::zero() || lo <= T::cond_tol() * hi {
            return Err(Error::SingularMatrix);
        }
        Ok(())
    }
}

/// Lower-triangular Cholesky factor `V = L Lᵀ`.
#[derive(Clone, Debug)]
pub struct Cholesky<T> {
    dim: usize,
    lower: Vec<T>,
}

impl<T: Scalar> Cholesky<T> {
    /// Factorizes without the eigenvalue conditioning check; only a
    /// non-positive pivot is rejected. Use [`Cholesky::checked`] at trust boundaries.
    pub fn new(v: &SymMatrix<T>) -> Result<Self> {
        let n = v.dim;
        let mut l = vec![T::zero(); n * n];
        for j in 0..n {
            let mut diag = v.get(j, j);
            for k in 0..j {
                diag = diag - l[j * n + k] * l[j * n + k];
            }
            if diag.is_nan() || diag <= T::zero() {
                return Err(Error::SingularMatrix);
            }
            let ljj = diag.sqrt();
            l[j * n + j] = ljj;
            for i in (j + 1)..n {
                let mut s = v.get(i, j);
                for k in 0..j {
                    s = s - l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / ljj;
            }
        }
        Ok(Self { dim: n, lower: l })
    }

    pub fn checked(v: &SymMatrix<T>) -> Result<Self> {
        v.check_positive_definite()?;
        Self::new(v)
    }

    /// `L⁻¹ b`
    fn forward(&self, b: &[T]) -> Vec<T> {
        let n = self.dim;
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s = s - self.lower[i * n + k] * y[k];
            }
            y[i] = s / self.lower[i * n + i];
        }
        y
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.dim;
        let mut x = self.forward(b);
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in (i + 1)..n {
                s = s - self.lower[k * n + i] * x[k];
            }
            x[i] = s / self.lower[i * n + i];
        }
        x
    }

    /// `aᵀ V⁻¹ a = ‖L⁻¹ a‖²`
    pub fn quad_norm_sq(&self, a: &[T]) -> T {
        let y = self.forward(a);
        dot(&y, &y)
    }
}

fn check_len<T>(v: &SymMatrix<T>, x: &[T]) -> Result<()> {
    if v.dim != x.len() {
        return Err(Error::DimensionMismatch {
            expected: v.dim,
            got: x.len(),
        });
    }
    Ok(())
}

/// Solves `V x = b` for symmetric positive-definite `V`.
pub fn solve_psd<T: Scalar>(v: &SymMatrix<T>, b: &[T]) -> Result<Vec<T>> {
    check_len(v, b)?;
    Ok(Cholesky::checked(v)?.solve(b))
}

/// `aᵀ V⁻¹ a` for positive-definite `V`.
pub fn quad_norm_sq<T: Scalar>(v: &SymMatrix<T>, a: &[T]) -> Result<T> {
    check_len(v, a)?;
    Ok(Cholesky::checked(v)?.quad_norm_sq(a))
}

/// Orthonormal basis for the span of a set of arms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectionBasis<T> {
    rows: Vec<Vec<T>>,
    ambient_dim: usize,
}

impl<T: Scalar> ProjectionBasis<T> {
    /// Standard basis of `ℝᵈ`; projecting onto it is the identity.
    pub fn standard(dim: usize) -> Self {
        let rows = (0..dim)
            .map(|i| {
                let mut e = vec![T::zero(); dim];
                e[i] = T::one();
                e
            })
            .collect();
        Self {
            rows,
            ambient_dim: dim,
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn rows(&self) -> &[Vec<T>] {
        &self.rows
    }

    /// Coordinates of `a` in the basis, rejecting vectors whose relative
    /// residual against the span exceeds `T::span_tol()`.
    pub fn project(&self, a: &[T]) -> Result<Vec<T>> {
        if a.len() != self.ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim,
                got: a.len(),
            });
        }
        let coords: Vec<T> = self.rows.iter().map(|r| dot(r, a)).collect();
        let back = self.reconstruct(&coords);
        let resid: Vec<T> = a.iter().zip(&back).map(|(&x, &y)| x - y).collect();
        let rel = norm(&resid) / norm(a).max(T::min_positive_value());
        if rel > T::span_tol() {
            return Err(Error::OutOfSpan {
                residual: rel.as_f64(),
            });
        }
        Ok(coords)
    }

    /// `Bᵀ c`: maps coordinates back into the ambient space.
    pub fn reconstruct(&self, coords: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.ambient_dim];
        for (row, &c) in self.rows.iter().zip(coords) {
            for (o, &r) in out.iter_mut().zip(row) {
                *o = *o + c * r;
            }
        }
        out
    }
}

/// Orthonormal basis of `span(arms)` via one-sided Jacobi SVD of the `K × d`
/// arm matrix. Right singular vectors whose singular value exceeds
/// `tol * sigma_max` are kept, largest first.
pub fn rank_basis<T: Scalar>(arms: &[Vec<T>], tol: T) -> Result<ProjectionBasis<T>> {
    let d = match arms.first() {
        Some(a) => a.len(),
        None => return Err(Error::EmptyArmSet),
    };
    if let Some(bad) = arms.iter().find(|a| a.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: bad.len(),
        });
    }
    if arms.iter().all(|a| a.iter().all(|x| x.is_zero())) {
        return Err(Error::EmptyArmSet);
    }
    let k = arms.len();
    // columns of the arm matrix, and the accumulated right rotation V
    let mut cols: Vec<Vec<T>> = (0..d)
        .map(|j| arms.iter().map(|a| a[j]).collect())
        .collect();
    let mut v: Vec<Vec<T>> = ProjectionBasis::<T>::standard(d).rows;
    let eps = T::epsilon();
    for _ in 0..MAX_JACOBI_SWEEPS {
        let mut rotated = false;
        for i in 0..d {
            for j in (i + 1)..d {
                let alpha = dot(&cols[i], &cols[i]);
                let beta = dot(&cols[j], &cols[j]);
                let gamma = dot(&cols[i], &cols[j]);
                if gamma.is_zero() || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::of(2.0) * gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                for r in 0..k {
                    let (x, y) = (cols[i][r], cols[j][r]);
                    cols[i][r] = c * x - s * y;
                    cols[j][r] = s * x + c * y;
                }
                for r in 0..d {
                    let (x, y) = (v[i][r], v[j][r]);
                    v[i][r] = c * x - s * y;
                    v[j][r] = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<(T, usize)> = cols.iter().enumerate().map(|(j, c)| (norm(c), j)).collect();
    sv.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .expect("finite singular value")
            .then(a.1.cmp(&b.1))
    });
    let cutoff = tol * sv[0].0;
    let rows: Vec<Vec<T>> = sv
        .iter()
        .filter(|(s, _)| *s > cutoff)
        .map(|&(_, j)| v[j].clone())
        .collect();
    Ok(ProjectionBasis {
        rows,
        ambient_dim: d,
    })
}
