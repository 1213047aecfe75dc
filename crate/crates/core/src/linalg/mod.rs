//! Minimal dense complex linear-algebra kernel.
//!
//! Sized for 2x2 system matrices and 4x4 superoperator matrices; everything is
//! a square row-major [`ComplexMatrix`]. All operations are pure functions of
//! their inputs and values are immutable after construction.

use num_complex::Complex64;

use crate::error::{Error, Result};

mod eig;
mod exp;
pub mod textio;

pub use eig::{eig_general, eig_hermitian, eigenvalues, null_space, Spectrum};
pub use exp::{mat_exp, mat_sqrt_pd, unitary_from_hermitian};

/// Shorthand complex constructor.
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Default tolerances used across the crate when callers do not override them.
pub mod tol {
    /// Hermiticity check: max |M - M^dag| entrywise, relative to scale.
    pub const HERMITICITY: f64 = 1e-12;
    /// Eigenvalues closer than this (relative to norm) are treated as coalesced.
    pub const EIGEN_DEGENERACY: f64 = 1e-10;
    /// Positive-definiteness: smallest eigenvalue must exceed this times the norm.
    pub const POSITIVE_DEFINITE: f64 = 1e-10;
    /// LU pivot threshold, relative to the largest entry.
    pub const SINGULARITY: f64 = 1e-14;
    /// Null-space membership: ||Mv|| <= tol * ||M||.
    pub const NULL_SPACE: f64 = 1e-9;
    /// Eigenvector condition number above which mat_exp falls back to
    /// scaling-and-squaring.
    pub const EXP_EIG_CONDITION: f64 = 1e6;
}

/// Dense square complex matrix, row-major storage.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl std::fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for j in 0..self.dim {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    /// Build from row-major entries; `entries.len()` must equal `dim * dim`.
    pub fn from_vec(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("dimension must be >= 1".into()));
        }
        if entries.len() != dim * dim {
            return Err(Error::InvalidInput(format!(
                "expected {} entries for dim {}, got {}",
                dim * dim,
                dim,
                entries.len()
            )));
        }
        Ok(Self { dim, data: entries })
    }

    /// Build a 2x2 matrix from its four entries.
    pub fn from_2x2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Self {
            dim: 2,
            data: vec![a, b, c, d],
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex64::ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::ONE;
        }
        m
    }

    pub fn diag(entries: &[Complex64]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, &z) in entries.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    pub fn conj(&self) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self[(i, k)];
                if aik == Complex64::ZERO {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += aik * other[(k, j)];
                }
            }
        }
        out
    }

    /// Matrix-vector product.
    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        debug_assert_eq!(v.len(), self.dim);
        let n = self.dim;
        let mut out = vec![Complex64::ZERO; n];
        for i in 0..n {
            let mut acc = Complex64::ZERO;
            for j in 0..n {
                acc += self[(i, j)] * v[j];
            }
            out[i] = acc;
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Max entrywise |M - M^dag|.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in 0..self.dim {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Hermiticity predicate: max |M - M^dag| entrywise <= tol * max(1, max_abs).
    pub fn is_hermitian(&self, tolerance: f64) -> bool {
        self.hermiticity_defect() <= tolerance * self.max_abs().max(1.0)
    }

    /// (M + M^dag) / 2.
    pub fn hermitian_part(&self) -> Self {
        self.add(&self.adjoint()).scale(c(0.5, 0.0))
    }

    /// Positive-definiteness predicate for a claimed-Hermitian matrix: all
    /// eigenvalues > tol * max(1, ||M||).
    pub fn is_positive_definite(&self, tolerance: f64) -> bool {
        if !self.is_hermitian(tol::HERMITICITY) {
            return false;
        }
        let (vals, _) = eig_hermitian(self);
        let floor = tolerance * self.frobenius_norm().max(1.0);
        vals.iter().all(|&v| v > floor)
    }

    /// Kronecker product, row-major convention: for row-major vectorization,
    /// vec(A X B) = (A kron B^T) vec(X).
    pub fn kron(&self, other: &Self) -> Self {
        let n = self.dim;
        let m = other.dim;
        let mut out = Self::zeros(n * m);
        for i in 0..n {
            for j in 0..n {
                let aij = self[(i, j)];
                for k in 0..m {
                    for l in 0..m {
                        out[(i * m + k, j * m + l)] = aij * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// LU decomposition with partial pivoting. Returns (combined LU, row
    /// permutation) or a singular-matrix error.
    fn lu(&self) -> Result<(Self, Vec<usize>)> {
        let n = self.dim;
        let mut lu = self.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let threshold = tol::SINGULARITY * self.max_abs().max(f64::MIN_POSITIVE) * n as f64;
        for col in 0..n {
            let mut pivot_row = col;
            let mut pivot_mag = lu[(col, col)].norm();
            for row in (col + 1)..n {
                let mag = lu[(row, col)].norm();
                if mag > pivot_mag {
                    pivot_mag = mag;
                    pivot_row = row;
                }
            }
            if pivot_mag <= threshold {
                return Err(Error::SingularMatrix {
                    pivot: pivot_mag,
                    threshold,
                });
            }
            if pivot_row != col {
                for j in 0..n {
                    let tmp = lu[(col, j)];
                    lu[(col, j)] = lu[(pivot_row, j)];
                    lu[(pivot_row, j)] = tmp;
                }
                perm.swap(col, pivot_row);
            }
            let pivot = lu[(col, col)];
            for row in (col + 1)..n {
                let factor = lu[(row, col)] / pivot;
                lu[(row, col)] = factor;
                for j in (col + 1)..n {
                    let sub = factor * lu[(col, j)];
                    lu[(row, j)] -= sub;
                }
            }
        }
        Ok((lu, perm))
    }

    /// Solve M x = b.
    pub fn solve(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        let (lu, perm) = self.lu()?;
        Ok(lu_solve(&lu, &perm, b))
    }

    /// Matrix inverse via LU; M must be nonsingular within the pivot threshold.
    pub fn inv(&self) -> Result<Self> {
        let n = self.dim;
        let (lu, perm) = self.lu()?;
        let mut out = Self::zeros(n);
        let mut e = vec![Complex64::ZERO; n];
        for col in 0..n {
            e[col] = Complex64::ONE;
            let x = lu_solve(&lu, &perm, &e);
            e[col] = Complex64::ZERO;
            for row in 0..n {
                out[(row, col)] = x[row];
            }
        }
        Ok(out)
    }

    pub fn det(&self) -> Complex64 {
        match self.lu() {
            Ok((lu, perm)) => {
                let mut d = Complex64::ONE;
                for i in 0..self.dim {
                    d *= lu[(i, i)];
                }
                // sign of the permutation
                let mut p = perm;
                let mut sign = 1.0;
                for i in 0..p.len() {
                    while p[i] != i {
                        let j = p[i];
                        p.swap(i, j);
                        sign = -sign;
                    }
                }
                d * sign
            }
            Err(_) => Complex64::ZERO,
        }
    }
}

fn lu_solve(lu: &ComplexMatrix, perm: &[usize], b: &[Complex64]) -> Vec<Complex64> {
    let n = lu.dim();
    let mut y = vec![Complex64::ZERO; n];
    for i in 0..n {
        let mut acc = b[perm[i]];
        for j in 0..i {
            acc -= lu[(i, j)] * y[j];
        }
        y[i] = acc;
    }
    for i in (0..n).rev() {
        let mut acc = y[i];
        for j in (i + 1)..n {
            acc -= lu[(i, j)] * y[j];
        }
        y[i] = acc / lu[(i, i)];
    }
    y
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

/// Matrix inverse with non-finite input rejection and singularity detection.
pub fn mat_inv(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !m.is_finite() {
        return Err(Error::InvalidInput("non-finite entries".into()));
    }
    m.inv()
}

/// Pauli sigma_x.
pub fn sigma_x() -> ComplexMatrix {
    ComplexMatrix::from_2x2(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0))
}

/// Pauli sigma_y.
pub fn sigma_y() -> ComplexMatrix {
    ComplexMatrix::from_2x2(c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0))
}

/// Pauli sigma_z.
pub fn sigma_z() -> ComplexMatrix {
    ComplexMatrix::from_2x2(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0))
}

/// Lowering operator |1><0| = (sigma_x - i sigma_y)/2; annihilates the ground
/// state e_1 and de-excites e_0.
pub fn sigma_minus() -> ComplexMatrix {
    ComplexMatrix::from_2x2(c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0))
}

/// Raising operator |0><1|.
pub fn sigma_plus() -> ComplexMatrix {
    ComplexMatrix::from_2x2(c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0))
}

/// Pauli basis element sigma_ell for ell = 0..3 (identity first).
pub fn pauli(ell: usize) -> ComplexMatrix {
    match ell {
        0 => ComplexMatrix::identity(2),
        1 => sigma_x(),
        2 => sigma_y(),
        3 => sigma_z(),
        _ => panic!("pauli index out of range: {ell}"),
    }
}
