//! Dense finite-dimensional hermitian linear algebra.
//!
//! Everything downstream (coupled models, spin-chain pointers, spectral
//! approximants) computes on the types defined here. Values are immutable
//! after construction and all operations are pure functions.

mod eigen;

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub(crate) use eigen::hermitian_eigen;

/// Tolerance for hermiticity checks on constructed operators.
pub const TOL_HERMITIAN: f64 = 1e-12;
/// Tolerance for algebraic identities (idempotence, unitarity, reconstruction).
pub const TOL_ALGEBRAIC: f64 = 1e-10;
/// Tolerance for trace/rank agreement.
pub const TOL_TRACE: f64 = 1e-8;
/// Eigenvalues closer than this are treated as one degenerate level.
pub const EIGENVALUE_GROUP_GAP: f64 = 1e-9;

/// Square complex matrix in row-major storage. No structural constraints;
/// this is the carrier for off-diagonal blocks and other intermediates
/// that are neither hermitian nor unitary.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Build from nested rows; every row must have length equal to the row count.
    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let dim = rows.len();
        for row in &rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    context: "ComplexMatrix::from_rows",
                    expected: dim,
                    found: row.len(),
                });
            }
        }
        Ok(Self {
            dim,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_diag(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &z) in diag.iter().enumerate() {
            m.set(i, i, z);
        }
        m
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        Self::from_diag(&diag.iter().map(|&x| Complex64::new(x, 0.0)).collect::<Vec<_>>())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: Complex64) {
        self.data[i * self.dim + j] = value;
    }

    #[inline]
    pub(crate) fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub(crate) fn row_mut(&mut self, i: usize) -> &mut [Complex64] {
        &mut self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Mutable access to two distinct rows at once.
    pub(crate) fn row_pair_mut(&mut self, i: usize, j: usize) -> (&mut [Complex64], &mut [Complex64]) {
        assert!(i < j, "row_pair_mut requires i < j");
        let (head, tail) = self.data.split_at_mut(j * self.dim);
        (
            &mut head[i * self.dim..(i + 1) * self.dim],
            &mut tail[..self.dim],
        )
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.get(j, i).conj())
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest `|a[i][j] - conj(a[j][i])|` over all index pairs.
    pub fn hermitian_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                let d = (self.get(i, j) - self.get(j, i).conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Cheap upper bound on the operator norm: sqrt(|A|_1 |A|_inf).
    pub fn op_norm_bound(&self) -> f64 {
        let mut row_sums = vec![0.0f64; self.dim];
        let mut col_sums = vec![0.0f64; self.dim];
        for i in 0..self.dim {
            for j in 0..self.dim {
                let a = self.get(i, j).norm();
                row_sums[i] += a;
                col_sums[j] += a;
            }
        }
        let max_row = row_sums.into_iter().fold(0.0, f64::max);
        let max_col = col_sums.into_iter().fold(0.0, f64::max);
        (max_row * max_col).sqrt()
    }

    /// Operator norm (largest singular value).
    pub fn op_norm(&self) -> Result<f64> {
        if self.dim == 0 {
            return Ok(0.0);
        }
        if self.hermitian_deviation() <= TOL_HERMITIAN * (1.0 + self.max_abs()) {
            let (vals, _) = hermitian_eigen(self)?;
            return Ok(vals.iter().fold(0.0f64, |acc, &v| acc.max(v.abs())));
        }
        let gram = &self.adjoint() * self;
        let (vals, _) = hermitian_eigen(&gram)?;
        Ok(vals.last().copied().unwrap_or(0.0).max(0.0).sqrt())
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexMatrix({}x{})", self.dim, self.dim)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix addition dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(rhs.data.iter())
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix subtraction dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(rhs.data.iter())
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix product dimension mismatch");
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self.get(i, k);
                if aik == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let rhs_row = rhs.row(k);
                let out_row = out.row_mut(i);
                for (o, b) in out_row.iter_mut().zip(rhs_row.iter()) {
                    *o += aik * b;
                }
            }
        }
        out
    }
}

/// Hermitian operator: `a[i][j] = conj(a[j][i])` within [`TOL_HERMITIAN`].
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
}

impl HermitianOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if matrix.dim() == 0 {
            return Err(Error::DimensionMismatch {
                context: "HermitianOperator::new",
                expected: 1,
                found: 0,
            });
        }
        let deviation = matrix.hermitian_deviation();
        if deviation > TOL_HERMITIAN * (1.0 + matrix.max_abs()) {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self { matrix })
    }

    pub(crate) fn new_unchecked(matrix: ComplexMatrix) -> Self {
        Self { matrix }
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::zeros(dim),
        }
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        Self {
            matrix: ComplexMatrix::from_real_diag(diag),
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    #[inline]
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        hermitian_eigen(&self.matrix).map(|(vals, _)| vals)
    }
}

/// Density matrix: hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let deviation = matrix.hermitian_deviation();
        if deviation > TOL_HERMITIAN * (1.0 + matrix.max_abs()) {
            return Err(Error::NotDensityMatrix {
                detail: format!("not hermitian (deviation {deviation:.3e})"),
            });
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > TOL_ALGEBRAIC || tr.im.abs() > TOL_ALGEBRAIC {
            return Err(Error::NotDensityMatrix {
                detail: format!("trace {} != 1", tr),
            });
        }
        let (vals, _) = hermitian_eigen(&matrix)?;
        let min_eig = vals.first().copied().unwrap_or(0.0);
        if min_eig < -TOL_ALGEBRAIC {
            return Err(Error::NotDensityMatrix {
                detail: format!("negative eigenvalue {min_eig:.3e}"),
            });
        }
        Ok(Self { matrix })
    }

    /// Pure-state density matrix from a state vector (normalized here).
    pub fn pure(state: &[Complex64]) -> Result<Self> {
        let norm_sq: f64 = state.iter().map(|z| z.norm_sqr()).sum();
        if norm_sq <= 0.0 {
            return Err(Error::NotNormalized { norm_sq });
        }
        let dim = state.len();
        let mut matrix = ComplexMatrix::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                matrix.set(i, j, state[i] * state[j].conj() / norm_sq);
            }
        }
        Ok(Self { matrix })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let mut matrix = ComplexMatrix::zeros(dim);
        let w = Complex64::new(1.0 / dim as f64, 0.0);
        for i in 0..dim {
            matrix.set(i, i, w);
        }
        Self { matrix }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    #[inline]
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }
}

/// Orthogonal projector with an explicit rank.
#[derive(Clone, Debug, PartialEq)]
pub struct Projector {
    matrix: ComplexMatrix,
    rank: usize,
}

impl Projector {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let deviation = matrix.hermitian_deviation();
        if deviation > TOL_HERMITIAN * (1.0 + matrix.max_abs()) {
            return Err(Error::NotProjector {
                detail: format!("not hermitian (deviation {deviation:.3e})"),
            });
        }
        let residual = &(&matrix * &matrix) - &matrix;
        let idem = if residual.op_norm_bound() <= TOL_ALGEBRAIC {
            residual.op_norm_bound()
        } else {
            residual.op_norm()?
        };
        if idem > TOL_ALGEBRAIC {
            return Err(Error::NotProjector {
                detail: format!("|P^2 - P| = {idem:.3e}"),
            });
        }
        let tr = matrix.trace();
        let rank = tr.re.round();
        if (tr.re - rank).abs() > TOL_TRACE || tr.im.abs() > TOL_TRACE || rank < 0.0 {
            return Err(Error::NotProjector {
                detail: format!("trace {} is not a nonnegative integer", tr),
            });
        }
        Ok(Self {
            matrix,
            rank: rank as usize,
        })
    }

    pub(crate) fn new_unchecked(matrix: ComplexMatrix, rank: usize) -> Self {
        Self { matrix, rank }
    }

    /// Diagonal projector onto a set of coordinate basis vectors.
    pub fn from_basis_indices(dim: usize, indices: &[usize]) -> Result<Self> {
        let mut seen = vec![false; dim];
        let mut matrix = ComplexMatrix::zeros(dim);
        for &idx in indices {
            if idx >= dim {
                return Err(Error::DimensionMismatch {
                    context: "Projector::from_basis_indices",
                    expected: dim,
                    found: idx,
                });
            }
            if seen[idx] {
                return Err(Error::NotProjector {
                    detail: format!("basis index {idx} repeated"),
                });
            }
            seen[idx] = true;
            matrix.set(idx, idx, Complex64::new(1.0, 0.0));
        }
        Ok(Self {
            matrix,
            rank: indices.len(),
        })
    }

    /// Projector onto the span of an orthonormal family of vectors.
    pub fn from_orthonormal_columns(columns: &[Vec<Complex64>]) -> Result<Self> {
        let rank = columns.len();
        if rank == 0 {
            return Err(Error::NotProjector {
                detail: "empty column family".into(),
            });
        }
        let dim = columns[0].len();
        for (i, ci) in columns.iter().enumerate() {
            if ci.len() != dim {
                return Err(Error::DimensionMismatch {
                    context: "Projector::from_orthonormal_columns",
                    expected: dim,
                    found: ci.len(),
                });
            }
            for (j, cj) in columns.iter().enumerate() {
                let dot: Complex64 = ci.iter().zip(cj.iter()).map(|(a, b)| a.conj() * b).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                if (dot - expect).norm() > TOL_ALGEBRAIC {
                    return Err(Error::NotProjector {
                        detail: format!("columns {i},{j} not orthonormal (dot {dot})"),
                    });
                }
            }
        }
        let mut matrix = ComplexMatrix::zeros(dim);
        for col in columns {
            for i in 0..dim {
                for j in 0..dim {
                    let cur = matrix.get(i, j);
                    matrix.set(i, j, cur + col[i] * col[j].conj());
                }
            }
        }
        Ok(Self { matrix, rank })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    #[inline]
    pub fn rank(&self) -> usize {
        self.rank
    }

    #[inline]
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }
}

/// Unitary matrix: `|U*U - I| <= TOL_ALGEBRAIC` in operator norm.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix {
    matrix: ComplexMatrix,
}

impl UnitaryMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let residual = &(&matrix.adjoint() * &matrix) - &ComplexMatrix::identity(matrix.dim());
        let deviation = if residual.op_norm_bound() <= TOL_ALGEBRAIC {
            residual.op_norm_bound()
        } else {
            residual.op_norm()?
        };
        if deviation > TOL_ALGEBRAIC {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self { matrix })
    }

    pub(crate) fn new_unchecked(matrix: ComplexMatrix) -> Self {
        Self { matrix }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim),
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    #[inline]
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn adjoint(&self) -> UnitaryMatrix {
        Self {
            matrix: self.matrix.adjoint(),
        }
    }
}

/// Which tensor factor to trace out in [`partial_trace`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    First,
    Second,
}

/// Kronecker product with row-major composite indexing: the first factor
/// is the slow index, `(a ⊗ b)[(i1,i2),(j1,j2)] = a[i1][j1] b[i2][j2]`
/// at composite row `i1*d2 + i2`.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (d1, d2) = (a.dim(), b.dim());
    let mut out = ComplexMatrix::zeros(d1 * d2);
    for i1 in 0..d1 {
        for j1 in 0..d1 {
            let aij = a.get(i1, j1);
            if aij == Complex64::new(0.0, 0.0) {
                continue;
            }
            for i2 in 0..d2 {
                let out_row = out.row_mut(i1 * d2 + i2);
                let b_row = b.row(i2);
                for j2 in 0..d2 {
                    out_row[j1 * d2 + j2] = aij * b_row[j2];
                }
            }
        }
    }
    out
}

/// `exp(i k t)` for hermitian `k`, via the spectral decomposition.
pub fn evolve_unitary(k: &HermitianOperator, t: f64) -> Result<UnitaryMatrix> {
    let (vals, q) = hermitian_eigen(k.matrix())?;
    let n = k.dim();
    // Scale column j of q by exp(i lambda_j t), then multiply by q's adjoint.
    let mut scaled = q.clone();
    for j in 0..n {
        let phase = Complex64::from_polar(1.0, vals[j] * t);
        for i in 0..n {
            let cur = scaled.get(i, j);
            scaled.set(i, j, cur * phase);
        }
    }
    let u = &scaled * &q.adjoint();
    Ok(UnitaryMatrix::new_unchecked(u))
}

/// Spectral decomposition into (eigenvalue, projector) pairs, ascending,
/// with eigenvalues closer than [`EIGENVALUE_GROUP_GAP`] merged into a
/// single degenerate level.
pub fn spectral_decompose(a: &HermitianOperator) -> Result<Vec<(f64, Projector)>> {
    let (vals, q) = hermitian_eigen(a.matrix())?;
    let n = a.dim();
    let mut out = Vec::new();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && vals[end] - vals[end - 1] < EIGENVALUE_GROUP_GAP {
            end += 1;
        }
        let mean = vals[start..end].iter().sum::<f64>() / (end - start) as f64;
        let mut p = ComplexMatrix::zeros(n);
        for col in start..end {
            for i in 0..n {
                let qi = q.get(i, col);
                for j in 0..n {
                    let cur = p.get(i, j);
                    p.set(i, j, cur + qi * q.get(j, col).conj());
                }
            }
        }
        out.push((mean, Projector::new_unchecked(p, end - start)));
        start = end;
    }
    Ok(out)
}

/// Operator norm of the commutator `ab - ba`.
pub fn commutator_norm(a: &HermitianOperator, b: &HermitianOperator) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            context: "commutator_norm",
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let c = &(a.matrix() * b.matrix()) - &(b.matrix() * a.matrix());
    // For hermitian a, b the commutator is anti-hermitian, so i[a,b] is
    // hermitian and its extreme eigenvalue gives the operator norm.
    let ic = c.scale(Complex64::new(0.0, 1.0));
    if ic.hermitian_deviation() <= TOL_HERMITIAN * (1.0 + ic.max_abs()) {
        let (vals, _) = hermitian_eigen(&ic)?;
        return Ok(vals.iter().fold(0.0f64, |acc, &v| acc.max(v.abs())));
    }
    c.op_norm()
}

/// Partial trace of a matrix on a `d1*d2`-dimensional product space.
pub fn partial_trace(
    m: &ComplexMatrix,
    d1: usize,
    d2: usize,
    traced: Subsystem,
) -> Result<ComplexMatrix> {
    if d1 * d2 != m.dim() || d1 == 0 || d2 == 0 {
        return Err(Error::DimensionMismatch {
            context: "partial_trace",
            expected: m.dim(),
            found: d1 * d2,
        });
    }
    match traced {
        Subsystem::Second => {
            let mut out = ComplexMatrix::zeros(d1);
            for i1 in 0..d1 {
                for j1 in 0..d1 {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for i2 in 0..d2 {
                        acc += m.get(i1 * d2 + i2, j1 * d2 + i2);
                    }
                    out.set(i1, j1, acc);
                }
            }
            Ok(out)
        }
        Subsystem::First => {
            let mut out = ComplexMatrix::zeros(d2);
            for i2 in 0..d2 {
                for j2 in 0..d2 {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for i1 in 0..d1 {
                        acc += m.get(i1 * d2 + i2, i1 * d2 + j2);
                    }
                    out.set(i2, j2, acc);
                }
            }
            Ok(out)
        }
    }
}

pub fn pauli_x() -> HermitianOperator {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    HermitianOperator::new_unchecked(
        ComplexMatrix::from_rows(vec![vec![zero, one], vec![one, zero]]).unwrap(),
    )
}

pub fn pauli_y() -> HermitianOperator {
    let zero = Complex64::new(0.0, 0.0);
    let mi = Complex64::new(0.0, -1.0);
    let pi = Complex64::new(0.0, 1.0);
    HermitianOperator::new_unchecked(
        ComplexMatrix::from_rows(vec![vec![zero, mi], vec![pi, zero]]).unwrap(),
    )
}

pub fn pauli_z() -> HermitianOperator {
    HermitianOperator::from_real_diag(&[1.0, -1.0])
}
