//! Dense complex matrices and the bipartite operations built on them.
//!
//! Matrices are stored row-major. Bipartite operators use the A-then-B index
//! convention: the basis ket `|i⟩_A ⊗ |k⟩_B` sits at row `i * dB + k`.
//!
//! Eigenvalues and singular values are delegated to `nalgebra`; everything
//! else (Kronecker products, partial transposes and traces) is index
//! bookkeeping done here.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{mismatch, Error, Result};

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Absolute comparison threshold used by every check in the crate.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Tolerance(f64);

impl Tolerance {
    pub const DEFAULT_EPS: f64 = 1e-9;

    pub fn new(eps: f64) -> Result<Self> {
        if eps.is_finite() && eps > 0.0 {
            Ok(Self(eps))
        } else {
            Err(Error::InvalidTolerance(eps))
        }
    }

    pub fn eps(self) -> f64 {
        self.0
    }

    pub fn scaled(self, factor: f64) -> Self {
        Self(self.0 * factor)
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self(Self::DEFAULT_EPS)
    }
}

impl TryFrom<f64> for Tolerance {
    type Error = Error;

    fn try_from(eps: f64) -> Result<Self> {
        Self::new(eps)
    }
}

impl From<Tolerance> for f64 {
    fn from(t: Tolerance) -> f64 {
        t.0
    }
}

/// Dense rectangular complex matrix, row-major.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr", into = "MatrixRepr")]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    rows: usize,
    cols: usize,
    data: Vec<[f64; 2]>,
}

impl TryFrom<MatrixRepr> for ComplexMatrix {
    type Error = Error;

    fn try_from(r: MatrixRepr) -> Result<Self> {
        ComplexMatrix::new(r.rows, r.cols, pairs_to_complex(&r.data))
    }
}

impl From<ComplexMatrix> for MatrixRepr {
    fn from(m: ComplexMatrix) -> Self {
        MatrixRepr {
            rows: m.rows,
            cols: m.cols,
            data: complex_to_pairs(&m.data),
        }
    }
}

pub(crate) fn pairs_to_complex(pairs: &[[f64; 2]]) -> Vec<Complex64> {
    pairs.iter().map(|&[re, im]| Complex64::new(re, im)).collect()
}

pub(crate) fn complex_to_pairs(values: &[Complex64]) -> Vec<[f64; 2]> {
    values.iter().map(|z| [z.re, z.im]).collect()
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyMatrix { rows, cols });
        }
        if data.len() != rows * cols {
            return Err(Error::EntryCount {
                rows,
                cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Panics if either dimension is zero.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_real(rows: usize, cols: usize, values: &[f64]) -> Result<Self> {
        Self::new(
            rows,
            cols,
            values.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = Complex64::new(v, 0.0);
        }
        m
    }

    /// `|row⟩⟨col|` in dimension `d`.
    pub fn ket_bra(d: usize, row: usize, col: usize) -> Self {
        let mut m = Self::zeros(d, d);
        m[(row, col)] = ONE;
        m
    }

    /// Column vector with the given entries.
    pub fn column(values: &[Complex64]) -> Self {
        Self {
            rows: values.len(),
            cols: 1,
            data: values.to_vec(),
        }
    }

    /// `|v⟩⟨v|` for the column vector `v`.
    pub fn outer(values: &[Complex64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| values[i] * values[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn column_vec(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: f64) -> Self {
        self.scale_complex(Complex64::new(s, 0.0))
    }

    pub fn scale_complex(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Frobenius distance; `f64::INFINITY` when the shapes differ.
    pub fn distance(&self, other: &Self) -> f64 {
        if self.shape() != other.shape() {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Tolerance-based equality: Frobenius distance strictly below `tol`.
    pub fn approx_eq(&self, other: &Self, tol: Tolerance) -> bool {
        self.distance(other) < tol.eps()
    }

    /// `‖H − H†‖_F`, or infinity for a non-square matrix.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self[(i, j)] - self[(j, i)].conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    pub fn is_hermitian(&self, tol: Tolerance) -> bool {
        self.hermiticity_defect() < tol.eps()
    }

    /// `(H + H†) / 2`.
    pub fn hermitized(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * 0.5
        })
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(mismatch(
                "matrix product",
                format!("{} rows on the right", self.cols),
                rhs.rows,
            ));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.data[k * rhs.cols + j];
                }
            }
        }
        Ok(out)
    }

    /// `self · x · self†`.
    pub fn conjugate(&self, x: &Self) -> Result<Self> {
        self.matmul(x)?.matmul(&self.adjoint())
    }

    pub fn try_add(&self, rhs: &Self) -> Result<Self> {
        if self.shape() != rhs.shape() {
            return Err(mismatch(
                "matrix sum",
                format!("{:?}", self.shape()),
                format!("{:?}", rhs.shape()),
            ));
        }
        Ok(self.zip_with(rhs, |a, b| a + b))
    }

    fn zip_with(&self, rhs: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of range");
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of range");
        &mut self.data[i * self.cols + j]
    }
}

// The operator impls panic on shape mismatch, like nalgebra's. Use the
// `try_*`/`matmul` methods where shapes come from user input.

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.shape(), rhs.shape(), "shape mismatch in matrix sum");
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl AddAssign<&ComplexMatrix> for ComplexMatrix {
    fn add_assign(&mut self, rhs: &ComplexMatrix) {
        assert_eq!(self.shape(), rhs.shape(), "shape mismatch in matrix sum");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.shape(), rhs.shape(), "shape mismatch in matrix difference");
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("shape mismatch in matrix product")
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:>9.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (br, bc) = b.shape();
    let mut out = ComplexMatrix::zeros(a.rows * br, a.cols * bc);
    for i in 0..a.rows {
        for j in 0..a.cols {
            let aij = a[(i, j)];
            if aij == ZERO {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Subsystem {
    A,
    B,
}

/// Square operator on `C^dA ⊗ C^dB`.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BipartiteRepr", into = "BipartiteRepr")]
pub struct BipartiteOperator {
    dim_a: usize,
    dim_b: usize,
    matrix: ComplexMatrix,
}

#[derive(Serialize, Deserialize)]
struct BipartiteRepr {
    #[serde(rename = "dA")]
    dim_a: usize,
    #[serde(rename = "dB")]
    dim_b: usize,
    rows: usize,
    cols: usize,
    data: Vec<[f64; 2]>,
}

impl TryFrom<BipartiteRepr> for BipartiteOperator {
    type Error = Error;

    fn try_from(r: BipartiteRepr) -> Result<Self> {
        let m = ComplexMatrix::new(r.rows, r.cols, pairs_to_complex(&r.data))?;
        BipartiteOperator::new(r.dim_a, r.dim_b, m)
    }
}

impl From<BipartiteOperator> for BipartiteRepr {
    fn from(op: BipartiteOperator) -> Self {
        BipartiteRepr {
            dim_a: op.dim_a,
            dim_b: op.dim_b,
            rows: op.matrix.rows,
            cols: op.matrix.cols,
            data: complex_to_pairs(&op.matrix.data),
        }
    }
}

impl BipartiteOperator {
    pub fn new(dim_a: usize, dim_b: usize, matrix: ComplexMatrix) -> Result<Self> {
        let side = dim_a * dim_b;
        if dim_a == 0 || dim_b == 0 || matrix.shape() != (side, side) {
            return Err(mismatch(
                "bipartite operator",
                format!("{side}x{side} matrix for dA={dim_a}, dB={dim_b}"),
                format!("{}x{}", matrix.rows, matrix.cols),
            ));
        }
        Ok(Self {
            dim_a,
            dim_b,
            matrix,
        })
    }

    pub fn zeros(dim_a: usize, dim_b: usize) -> Self {
        let side = dim_a * dim_b;
        Self {
            dim_a,
            dim_b,
            matrix: ComplexMatrix::zeros(side, side),
        }
    }

    /// `a ⊗ b` as a bipartite operator; both factors must be square.
    pub fn product(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Self> {
        if !a.is_square() || !b.is_square() {
            return Err(mismatch(
                "product operator",
                "square factors",
                format!("{:?} and {:?}", a.shape(), b.shape()),
            ));
        }
        Self::new(a.rows, b.rows, kron(a, b))
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.dim_a, self.dim_b)
    }

    pub fn side(&self) -> usize {
        self.dim_a * self.dim_b
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn index_of(&self, a: usize, b: usize) -> usize {
        a * self.dim_b + b
    }

    /// Entry `⟨i k| X |j l⟩`.
    pub fn entry(&self, (i, k): (usize, usize), (j, l): (usize, usize)) -> Complex64 {
        self.matrix[(self.index_of(i, k), self.index_of(j, l))]
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            dim_a: self.dim_a,
            dim_b: self.dim_b,
            matrix: self.matrix.scale(s),
        }
    }

    pub fn distance(&self, other: &Self) -> f64 {
        if self.dims() != other.dims() {
            return f64::INFINITY;
        }
        self.matrix.distance(&other.matrix)
    }

    pub fn approx_eq(&self, other: &Self, tol: Tolerance) -> bool {
        self.distance(other) < tol.eps()
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        if self.dims() != other.dims() {
            return Err(mismatch(
                "bipartite sum",
                format!("{:?}", self.dims()),
                format!("{:?}", other.dims()),
            ));
        }
        Ok(Self {
            dim_a: self.dim_a,
            dim_b: self.dim_b,
            matrix: &self.matrix + &other.matrix,
        })
    }

    /// Transpose on the B factor: `⟨i k|X^Γ|j l⟩ = ⟨i l|X|j k⟩`.
    pub fn partial_transpose(&self) -> Self {
        let (da, db) = self.dims();
        let mut out = ComplexMatrix::zeros(da * db, da * db);
        for i in 0..da {
            for k in 0..db {
                for j in 0..da {
                    for l in 0..db {
                        out[(i * db + k, j * db + l)] = self.matrix[(i * db + l, j * db + k)];
                    }
                }
            }
        }
        Self {
            dim_a: da,
            dim_b: db,
            matrix: out,
        }
    }

    /// Transpose on the A factor: `⟨i k|X^{T_A}|j l⟩ = ⟨j k|X|i l⟩`.
    pub fn partial_transpose_a(&self) -> Self {
        let (da, db) = self.dims();
        let mut out = ComplexMatrix::zeros(da * db, da * db);
        for i in 0..da {
            for k in 0..db {
                for j in 0..da {
                    for l in 0..db {
                        out[(i * db + k, j * db + l)] = self.matrix[(j * db + k, i * db + l)];
                    }
                }
            }
        }
        Self {
            dim_a: da,
            dim_b: db,
            matrix: out,
        }
    }

    /// Reduced operator on the kept subsystem.
    pub fn partial_trace(&self, keep: Subsystem) -> ComplexMatrix {
        let (da, db) = self.dims();
        match keep {
            Subsystem::A => ComplexMatrix::from_fn(da, da, |i, j| {
                (0..db).map(|k| self.matrix[(i * db + k, j * db + k)]).sum()
            }),
            Subsystem::B => ComplexMatrix::from_fn(db, db, |k, l| {
                (0..da).map(|i| self.matrix[(i * db + k, i * db + l)]).sum()
            }),
        }
    }

    /// `(VA ⊗ VB)† X (VA ⊗ VB)`: restriction to the column spans of two isometries.
    pub fn compress(&self, va: &ComplexMatrix, vb: &ComplexMatrix) -> Result<Self> {
        if va.rows != self.dim_a || vb.rows != self.dim_b {
            return Err(mismatch(
                "compression isometries",
                format!("{} and {} rows", self.dim_a, self.dim_b),
                format!("{} and {}", va.rows, vb.rows),
            ));
        }
        let v = kron(va, vb);
        let m = v.adjoint().matmul(&self.matrix)?.matmul(&v)?;
        Self::new(va.cols, vb.cols, m)
    }

    /// `(VA ⊗ VB) X (VA ⊗ VB)†`: inverse of [`compress`](Self::compress) on the spans.
    pub fn embed(&self, va: &ComplexMatrix, vb: &ComplexMatrix) -> Result<Self> {
        if va.cols != self.dim_a || vb.cols != self.dim_b {
            return Err(mismatch(
                "embedding isometries",
                format!("{} and {} columns", self.dim_a, self.dim_b),
                format!("{} and {}", va.cols, vb.cols),
            ));
        }
        let v = kron(va, vb);
        Self::new(va.rows, vb.rows, v.conjugate(&self.matrix)?)
    }
}

impl fmt::Debug for BipartiteOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BipartiteOperator dA={} dB={} {:?}", self.dim_a, self.dim_b, self.matrix)
    }
}

pub fn partial_transpose(x: &BipartiteOperator) -> BipartiteOperator {
    x.partial_transpose()
}

pub fn partial_trace(x: &BipartiteOperator, keep: Subsystem) -> ComplexMatrix {
    x.partial_trace(keep)
}

fn hermitian_gate(h: &ComplexMatrix, tol: Tolerance) -> Result<()> {
    if !h.is_square() {
        return Err(mismatch("Hermitian operator", "square matrix", format!("{:?}", h.shape())));
    }
    let defect = h.hermiticity_defect();
    if defect < tol.eps() {
        Ok(())
    } else {
        Err(Error::NotHermitian { defect })
    }
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(h: &ComplexMatrix, tol: Tolerance) -> Result<Vec<f64>> {
    hermitian_gate(h, tol)?;
    let mut values: Vec<f64> = h
        .hermitized()
        .to_nalgebra()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Eigenvalues (ascending) and the matching orthonormal eigenvectors as columns.
pub fn hermitian_eigen(h: &ComplexMatrix, tol: Tolerance) -> Result<(Vec<f64>, ComplexMatrix)> {
    hermitian_gate(h, tol)?;
    let eig = h.hermitized().to_nalgebra().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let n = h.rows;
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok((values, vectors))
}

/// Singular values in descending order.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    let mut values: Vec<f64> = m.to_nalgebra().singular_values().iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    values
}

pub fn trace_norm(m: &ComplexMatrix) -> f64 {
    singular_values(m).iter().sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsdCheck {
    pub flag: bool,
    pub min_eigenvalue: f64,
}

/// PSD test: passes iff the smallest eigenvalue is at least `-tol`.
pub fn is_psd(h: &ComplexMatrix, tol: Tolerance) -> Result<PsdCheck> {
    let min = hermitian_eigenvalues(h, tol)?[0];
    Ok(PsdCheck {
        flag: min >= -tol.eps(),
        min_eigenvalue: min,
    })
}

/// Orthonormal basis (as columns) of the eigenvectors whose eigenvalue exceeds
/// `tol * λ_max`. `h` must be Hermitian PSD.
pub fn support_basis(h: &ComplexMatrix, tol: Tolerance) -> Result<ComplexMatrix> {
    let (values, vectors) = hermitian_eigen(h, tol)?;
    let max = values.last().copied().unwrap_or(0.0);
    let keep: Vec<usize> = (0..values.len())
        .rev()
        .filter(|&k| max > 0.0 && values[k] > tol.eps() * max)
        .collect();
    if keep.is_empty() {
        return Err(Error::ZeroVector);
    }
    Ok(ComplexMatrix::from_fn(h.rows, keep.len(), |i, j| vectors[(i, keep[j])]))
}

/// Number of eigenvalues above `tol * λ_max`.
pub fn relative_rank(values: &[f64], tol: Tolerance) -> usize {
    let max = values.iter().copied().fold(0.0, f64::max);
    if max <= 0.0 {
        return 0;
    }
    values.iter().filter(|&&v| v > tol.eps() * max).count()
}
