//! Dense complex matrix primitives for bipartite operators.
//!
//! Matrices are stored row-major over `Complex64`. Bipartite indices are
//! flattened as `i * d_B + j` for subsystem indices `(i, j)`, matching the
//! layout produced by [`tensor`]. Hermitian eigendecompositions are delegated
//! to nalgebra and post-processed into ascending order.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};
use std::str::FromStr;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Relative tolerance for the Hermiticity check in [`eigh`].
pub const HERMITICITY_TOL: f64 = 1e-10;

/// Eigenvalues closer than this are treated as one degenerate group.
pub const DEGENERACY_GAP: f64 = 1e-8;

/// Which tensor factor of a bipartite system an operation acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::A => write!(f, "A"),
            Side::B => write!(f, "B"),
        }
    }
}

impl FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Side> {
        match s.trim() {
            "A" | "a" => Ok(Side::A),
            "B" | "b" => Ok(Side::B),
            other => Err(Error::Parse(format!("expected side A or B, got {other:?}"))),
        }
    }
}

/// Bipartite cut `d_A x d_B`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cut {
    pub d_a: usize,
    pub d_b: usize,
}

impl Cut {
    pub fn new(d_a: usize, d_b: usize) -> Result<Cut> {
        if d_a < 1 || d_b < 1 {
            return Err(Error::InvalidArgument(format!(
                "cut dimensions must be positive, got {d_a}x{d_b}"
            )));
        }
        Ok(Cut { d_a, d_b })
    }

    /// Total Hilbert space dimension `d_A * d_B`.
    pub fn dim(&self) -> usize {
        self.d_a * self.d_b
    }

    /// Flat index of the product basis vector `|i> (x) |j>`.
    pub fn flat(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.d_a && j < self.d_b);
        i * self.d_b + j
    }

    /// Local dimension of the given side.
    pub fn side_dim(&self, side: Side) -> usize {
        match side {
            Side::A => self.d_a,
            Side::B => self.d_b,
        }
    }
}

impl fmt::Display for Cut {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.d_a, self.d_b)
    }
}

impl FromStr for Cut {
    type Err = Error;

    fn from_str(s: &str) -> Result<Cut> {
        let (a, b) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| Error::Parse(format!("expected cut of the form AxB, got {s:?}")))?;
        let d_a = a
            .trim()
            .parse::<usize>()
            .map_err(|e| Error::Parse(format!("bad cut dimension {a:?}: {e}")))?;
        let d_b = b
            .trim()
            .parse::<usize>()
            .map_err(|e| Error::Parse(format!("bad cut dimension {b:?}: {e}")))?;
        Cut::new(d_a, d_b)
    }
}

/// Dense complex column vector.
#[derive(Clone, Debug, PartialEq)]
pub struct CVector {
    data: Vec<C64>,
}

impl CVector {
    pub fn new(data: Vec<C64>) -> CVector {
        CVector { data }
    }

    pub fn zeros(n: usize) -> CVector {
        CVector {
            data: vec![C64::new(0.0, 0.0); n],
        }
    }

    /// Computational basis vector `|i>` in dimension `d`.
    pub fn basis(d: usize, i: usize) -> CVector {
        assert!(i < d, "basis index {i} out of range for dimension {d}");
        let mut v = CVector::zeros(d);
        v.data[i] = C64::new(1.0, 0.0);
        v
    }

    pub fn from_real(data: &[f64]) -> CVector {
        CVector {
            data: data.iter().map(|&x| C64::new(x, 0.0)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(&self) -> CVector {
        let n = self.norm();
        assert!(n > 0.0, "cannot normalize the zero vector");
        self.scale(1.0 / n)
    }

    pub fn scale(&self, s: f64) -> CVector {
        CVector {
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    /// Inner product `<self|other>`, conjugate-linear in `self`.
    pub fn dot(&self, other: &CVector) -> C64 {
        assert_eq!(self.dim(), other.dim(), "inner product dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Kronecker product `self (x) other`.
    pub fn tensor(&self, other: &CVector) -> CVector {
        let mut out = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.data {
            for b in &other.data {
                out.push(a * b);
            }
        }
        CVector::new(out)
    }

    /// Rank-one operator `|self><other|`.
    pub fn outer(&self, other: &CVector) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim(), other.dim());
        for (i, a) in self.data.iter().enumerate() {
            for (j, b) in other.data.iter().enumerate() {
                m[(i, j)] = a * b.conj();
            }
        }
        m
    }

    pub fn add(&self, other: &CVector) -> CVector {
        assert_eq!(self.dim(), other.dim());
        CVector::new(
            self.data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn sub(&self, other: &CVector) -> CVector {
        assert_eq!(self.dim(), other.dim());
        CVector::new(
            self.data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }
}

impl Index<usize> for CVector {
    type Output = C64;

    fn index(&self, i: usize) -> &C64 {
        &self.data[i]
    }
}

impl IndexMut<usize> for CVector {
    fn index_mut(&mut self, i: usize) -> &mut C64 {
        &mut self.data[i]
    }
}

/// Dense complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> CMatrix {
        CMatrix {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> CMatrix {
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> CMatrix {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMatrix { rows, cols, data }
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<C64>) -> Result<CMatrix> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(CMatrix { rows, cols, data })
    }

    pub fn from_diag(diag: &[f64]) -> CMatrix {
        let n = diag.len();
        let mut m = CMatrix::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(d, 0.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> CMatrix {
        CMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> CMatrix {
        CMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        assert!(self.is_square(), "trace of a non-square matrix");
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, s: f64) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_c(&self, s: C64) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    /// Frobenius norm, computed without any decomposition.
    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest deviation from Hermitian symmetry, `max |M_ij - conj(M_ji)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        assert!(self.is_square());
        let mut defect: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                defect = defect.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        defect
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.hermiticity_defect() <= tol * self.scale_estimate()
    }

    /// Nearest Hermitian matrix, `(M + M^dag) / 2`.
    pub fn hermitize(&self) -> CMatrix {
        assert!(self.is_square());
        CMatrix::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * 0.5
        })
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &CVector) -> CVector {
        assert_eq!(self.cols, v.dim(), "matrix-vector dimension mismatch");
        let mut out = CVector::zeros(self.rows);
        for i in 0..self.rows {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            let mut acc = C64::new(0.0, 0.0);
            for (m, x) in row.iter().zip(v.as_slice()) {
                acc += m * x;
            }
            out[i] = acc;
        }
        out
    }

    /// Quadratic form `<v|M|v>`.
    pub fn quad_form(&self, v: &CVector) -> C64 {
        v.dot(&self.mul_vec(v))
    }

    /// Adds `s * |v><v|` in place.
    pub fn add_scaled_outer(&mut self, s: f64, v: &CVector) {
        assert!(self.is_square() && self.rows == v.dim());
        let n = self.rows;
        for i in 0..n {
            let vi = v[i];
            for j in 0..n {
                self.data[i * n + j] += vi * v[j].conj() * s;
            }
        }
    }

    fn scale_estimate(&self) -> f64 {
        let maxabs = self.data.iter().map(|z| z.norm()).fold(0.0, f64::max);
        maxabs.max(1.0)
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows.min(8) {
            write!(f, "  ")?;
            for j in 0..self.cols.min(8) {
                let z = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f, "{}", if self.cols > 8 { "..." } else { "" })?;
        }
        if self.rows > 8 {
            writeln!(f, "  ...")?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;

    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;

    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;

    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, rhs.rows, "matmul dimension mismatch");
        let (n, k, m) = (self.rows, self.cols, rhs.cols);
        let mut out = CMatrix::zeros(n, m);
        for i in 0..n {
            for l in 0..k {
                let a = self.data[i * k + l];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                let rrow = &rhs.data[l * m..(l + 1) * m];
                let orow = &mut out.data[i * m..(i + 1) * m];
                for (o, b) in orow.iter_mut().zip(rrow) {
                    *o += a * b;
                }
            }
        }
        out
    }
}

/// Kronecker product `a (x) b` with the flat index convention `i * d_B + j`.
pub fn tensor(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ra, ca) = (a.rows(), a.cols());
    let (rb, cb) = (b.rows(), b.cols());
    let mut out = CMatrix::zeros(ra * rb, ca * cb);
    for i in 0..ra {
        for j in 0..ca {
            let aij = a[(i, j)];
            if aij.norm_sqr() == 0.0 {
                continue;
            }
            for p in 0..rb {
                for q in 0..cb {
                    out[(i * rb + p, j * cb + q)] = aij * b[(p, q)];
                }
            }
        }
    }
    out
}

fn check_cut(m: &CMatrix, cut: Cut) -> Result<()> {
    if !m.is_square() || m.rows() != cut.dim() {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {}x{}, cut {} needs {}x{}",
            m.rows(),
            m.cols(),
            cut,
            cut.dim(),
            cut.dim()
        )));
    }
    Ok(())
}

/// Partial transpose on the given side.
pub fn partial_transpose(m: &CMatrix, cut: Cut, side: Side) -> Result<CMatrix> {
    check_cut(m, cut)?;
    let (da, db) = (cut.d_a, cut.d_b);
    let mut out = CMatrix::zeros(m.rows(), m.cols());
    for a in 0..da {
        for b in 0..db {
            for a2 in 0..da {
                for b2 in 0..db {
                    let src = match side {
                        Side::A => (cut.flat(a2, b), cut.flat(a, b2)),
                        Side::B => (cut.flat(a, b2), cut.flat(a2, b)),
                    };
                    out[(cut.flat(a, b), cut.flat(a2, b2))] = m[src];
                }
            }
        }
    }
    Ok(out)
}

/// Partial trace keeping the given side.
pub fn partial_trace(m: &CMatrix, cut: Cut, keep: Side) -> Result<CMatrix> {
    check_cut(m, cut)?;
    let (da, db) = (cut.d_a, cut.d_b);
    match keep {
        Side::A => {
            let mut out = CMatrix::zeros(da, da);
            for a in 0..da {
                for a2 in 0..da {
                    let mut acc = C64::new(0.0, 0.0);
                    for b in 0..db {
                        acc += m[(cut.flat(a, b), cut.flat(a2, b))];
                    }
                    out[(a, a2)] = acc;
                }
            }
            Ok(out)
        }
        Side::B => {
            let mut out = CMatrix::zeros(db, db);
            for b in 0..db {
                for b2 in 0..db {
                    let mut acc = C64::new(0.0, 0.0);
                    for a in 0..da {
                        acc += m[(cut.flat(a, b), cut.flat(a, b2))];
                    }
                    out[(b, b2)] = acc;
                }
            }
            Ok(out)
        }
    }
}

/// Hermitian eigendecomposition with ascending eigenvalues.
#[derive(Clone, Debug)]
pub struct EigDecomp {
    /// Eigenvalues in ascending order.
    pub eigenvalues: Vec<f64>,
    /// Eigenvectors as columns, ordered to match `eigenvalues`.
    pub eigenvectors: CMatrix,
}

impl EigDecomp {
    /// Eigenvector for the i-th eigenvalue.
    pub fn vector(&self, i: usize) -> CVector {
        let n = self.eigenvectors.rows();
        let mut v = CVector::zeros(n);
        for r in 0..n {
            v[r] = self.eigenvectors[(r, i)];
        }
        v
    }

    /// Groups of indices whose eigenvalues sit within [`DEGENERACY_GAP`] of
    /// their neighbours, in ascending order.
    pub fn degenerate_groups(&self) -> Vec<std::ops::Range<usize>> {
        degenerate_groups(&self.eigenvalues, DEGENERACY_GAP)
    }

    /// Reconstructs `V diag(f(lambda)) V^dag`.
    pub fn map_eigenvalues(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.eigenvectors.rows();
        let mut out = CMatrix::zeros(n, n);
        for (k, &lam) in self.eigenvalues.iter().enumerate() {
            let fl = f(lam);
            if fl == 0.0 {
                continue;
            }
            let v = self.vector(k);
            out.add_scaled_outer(fl, &v);
        }
        out
    }
}

/// Splits an ascending eigenvalue list into near-degenerate groups.
pub fn degenerate_groups(eigenvalues: &[f64], gap: f64) -> Vec<std::ops::Range<usize>> {
    let mut groups = Vec::new();
    let mut start = 0;
    for i in 1..=eigenvalues.len() {
        if i == eigenvalues.len() || eigenvalues[i] - eigenvalues[i - 1] > gap {
            groups.push(start..i);
            start = i;
        }
    }
    groups
}

fn to_na(m: &CMatrix) -> DMatrix<C64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
}

fn require_hermitian(m: &CMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigh needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let defect = m.hermiticity_defect();
    let tol = HERMITICITY_TOL * m.scale_estimate();
    if defect > tol {
        return Err(Error::NotHermitian { defect, tol });
    }
    Ok(())
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
///
/// The input is symmetrized before factorization so that round-off level
/// asymmetry cannot leak into the spectrum; inputs beyond the Hermiticity
/// tolerance are rejected instead.
pub fn eigh(m: &CMatrix) -> Result<EigDecomp> {
    require_hermitian(m)?;
    let n = m.rows();
    let se = to_na(&m.hermitize()).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        se.eigenvalues[a]
            .partial_cmp(&se.eigenvalues[b])
            .unwrap()
            .then(a.cmp(&b))
    });
    let eigenvalues: Vec<f64> = order.iter().map(|&k| se.eigenvalues[k]).collect();
    let mut eigenvectors = CMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        for r in 0..n {
            eigenvectors[(r, col)] = se.eigenvectors[(r, k)];
        }
    }
    Ok(EigDecomp {
        eigenvalues,
        eigenvectors,
    })
}

/// Eigenvalues only, ascending. Cheaper than [`eigh`] when vectors are unused.
pub fn eigvalsh(m: &CMatrix) -> Result<Vec<f64>> {
    require_hermitian(m)?;
    let mut vals: Vec<f64> = to_na(&m.hermitize())
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(vals)
}

/// Schatten p-norm for `p >= 1`, including `p = infinity`.
///
/// `p = 2` uses the Frobenius sum directly; Hermitian inputs use their
/// eigenvalues, general inputs the singular values of `M`.
pub fn schatten(m: &CMatrix, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "Schatten norm needs p >= 1, got {p}"
        )));
    }
    if p == 2.0 {
        return Ok(m.frobenius());
    }
    let sv = singular_values(m)?;
    if p.is_infinite() {
        return Ok(sv.iter().copied().fold(0.0, f64::max));
    }
    Ok(sv.iter().map(|s| s.powf(p)).sum::<f64>().powf(1.0 / p))
}

fn singular_values(m: &CMatrix) -> Result<Vec<f64>> {
    if m.is_square() && m.is_hermitian(HERMITICITY_TOL) {
        return Ok(eigvalsh(m)?.iter().map(|l| l.abs()).collect());
    }
    // Singular values via the Gram matrix; adequate at these sizes.
    let gram = &m.dagger() * m;
    Ok(eigvalsh(&gram)?
        .iter()
        .map(|l| l.max(0.0).sqrt())
        .collect())
}

/// Hilbert-Schmidt pairing `Tr[A B^dag]`.
pub fn trace_inner(a: &CMatrix, b: &CMatrix) -> Result<C64> {
    if (a.rows(), a.cols()) != (b.rows(), b.cols()) {
        return Err(Error::DimensionMismatch(format!(
            "trace pairing of {}x{} with {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    Ok(a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| x * y.conj())
        .sum())
}

/// Euclidean projection onto the positive semidefinite cone.
pub fn psd_project(m: &CMatrix) -> Result<CMatrix> {
    let dec = eigh(m)?;
    Ok(dec.map_eigenvalues(|l| l.max(0.0)).hermitize())
}

/// Von Neumann entropy in bits. Errors if an eigenvalue is below `-1e-10`.
pub fn entropy(rho: &CMatrix) -> Result<f64> {
    let vals = eigvalsh(rho)?;
    let mut s = 0.0;
    for &l in &vals {
        if l < -1e-10 {
            return Err(Error::NotDensityMatrix(format!(
                "negative eigenvalue {l:.3e} in entropy"
            )));
        }
        if l > 0.0 {
            s -= l * l.log2();
        }
    }
    Ok(s.max(0.0))
}
