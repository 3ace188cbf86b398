//! Small dense matrix kernel.
//!
//! [`SymMatrix`] stores a full row-major square matrix but only exposes
//! writes that keep it exactly symmetric. [`Mat`] is a plain rectangular
//! matrix used for the non-square blocks of the certificate checks.
//!
//! Definiteness is certified by Cholesky factorization. The cyclic Jacobi
//! solver in [`eigenvalue_oracle`] is an independent cross-check for tests.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Dense rectangular matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds from nested rows. Panics on ragged input.
    pub fn from_rows<const C: usize>(rows: &[[f64; C]]) -> Self {
        let data = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Self {
            rows: rows.len(),
            cols: C,
            data,
        }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: f64) -> Mat {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn matmul(&self, rhs: &Mat) -> Mat {
        assert_eq!(self.cols, rhs.rows, "matmul: inner dimensions differ");
        let mut out = Mat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.data[k * rhs.cols + j];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Horizontal concatenation `[self, rhs]`.
    pub fn hcat(&self, rhs: &Mat) -> Mat {
        assert_eq!(self.rows, rhs.rows, "hcat: row counts differ");
        Mat::from_fn(self.rows, self.cols + rhs.cols, |i, j| {
            if j < self.cols {
                self[(i, j)]
            } else {
                rhs[(i, j - self.cols)]
            }
        })
    }

    /// Copies the upper triangle into a symmetric matrix. The matrix must be square.
    pub fn to_sym_upper(&self) -> SymMatrix {
        assert_eq!(self.rows, self.cols, "to_sym_upper: not square");
        SymMatrix::from_upper_fn(self.rows, |i, j| self[(i, j)])
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &Mat {
    type Output = Mat;
    fn add(self, rhs: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Mat {
    type Output = Mat;
    fn sub(self, rhs: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &Mat {
    type Output = Mat;
    fn neg(self) -> Mat {
        self.scale(-1.0)
    }
}

impl Mul for &Mat {
    type Output = Mat;
    fn mul(self, rhs: &Mat) -> Mat {
        self.matmul(rhs)
    }
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|j| format!("{:>11.4e}", self[(i, j)]))
                .collect();
            writeln!(f, "  {}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

/// Square matrix that is symmetric by construction.
///
/// Writes go through [`SymMatrix::set`], which fills both `(i, j)` and
/// `(j, i)`; mirrored entries are therefore bitwise equal.
#[derive(Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "SymMatrix dimension must be positive");
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diag(&vec![1.0; dim])
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * m.dim + i] = d;
        }
        m
    }

    /// Builds from a function evaluated on the upper triangle (`i <= j`) only.
    pub fn from_upper_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    /// Sets entry `(i, j)` and its mirror `(j, i)`.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
        self.data[j * self.dim + i] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_mat(&self) -> Mat {
        Mat {
            rows: self.dim,
            cols: self.dim,
            data: self.data.clone(),
        }
    }

    pub fn scale(&self, s: f64) -> SymMatrix {
        SymMatrix {
            dim: self.dim,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    /// `self + s * I`.
    pub fn shifted(&self, s: f64) -> SymMatrix {
        let mut out = self.clone();
        for i in 0..self.dim {
            out.data[i * self.dim + i] += s;
        }
        out
    }

    /// `self += s * other`.
    pub fn axpy(&mut self, s: f64, other: &SymMatrix) {
        assert_eq!(self.dim, other.dim, "axpy: dimensions differ");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.dim).all(|i| (0..i).all(|j| self.get(i, j).to_bits() == self.get(j, i).to_bits()))
    }

    /// Cholesky factor of a positive definite matrix, or `None`.
    pub fn cholesky(&self) -> Option<Cholesky> {
        Cholesky::factor(self)
    }

    pub fn quad_form(&self, v: &[f64]) -> f64 {
        assert_eq!(v.len(), self.dim);
        let mut acc = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                acc += v[i] * self.get(i, j) * v[j];
            }
        }
        acc
    }
}

impl Add for &SymMatrix {
    type Output = SymMatrix;
    fn add(self, rhs: &SymMatrix) -> SymMatrix {
        let mut out = self.clone();
        out.axpy(1.0, rhs);
        out
    }
}

impl Sub for &SymMatrix {
    type Output = SymMatrix;
    fn sub(self, rhs: &SymMatrix) -> SymMatrix {
        let mut out = self.clone();
        out.axpy(-1.0, rhs);
        out
    }
}

impl Neg for &SymMatrix {
    type Output = SymMatrix;
    fn neg(self) -> SymMatrix {
        self.scale(-1.0)
    }
}

impl fmt::Debug for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Sym")?;
        fmt::Debug::fmt(&self.to_mat(), f)
    }
}

/// Lower-triangular Cholesky factor `L` with `A = L Lᵀ`.
#[derive(Clone, Debug)]
pub struct Cholesky {
    dim: usize,
    l: Vec<f64>,
}

impl Cholesky {
    fn factor(a: &SymMatrix) -> Option<Self> {
        let n = a.dim;
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut d = a.get(j, j);
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if !(d > 0.0) || !d.is_finite() {
                return None;
            }
            let d = d.sqrt();
            l[j * n + j] = d;
            for i in (j + 1)..n {
                let mut s = a.get(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / d;
            }
        }
        Some(Self { dim: n, l })
    }

    /// Entry `(i, j)` of the lower factor; zero above the diagonal.
    pub fn lower(&self, i: usize, j: usize) -> f64 {
        if j > i {
            0.0
        } else {
            self.l[i * self.dim + j]
        }
    }

    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.dim).map(|i| self.l[i * self.dim + i].ln()).sum::<f64>()
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.dim;
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= self.l[i * n + k] * b[k];
            }
            b[i] = s / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in (i + 1)..n {
                s -= self.l[k * n + i] * b[k];
            }
            b[i] = s / self.l[i * n + i];
        }
    }

    pub fn inverse(&self) -> SymMatrix {
        let n = self.dim;
        let mut inv = SymMatrix::zeros(n);
        let mut col = vec![0.0; n];
        for j in 0..n {
            col.iter_mut().for_each(|v| *v = 0.0);
            col[j] = 1.0;
            self.solve_in_place(&mut col);
            for i in 0..=j {
                inv.set(i, j, col[i]);
            }
        }
        inv
    }
}

/// Row/column band layout for symmetric block assembly.
///
/// Only blocks on or above the block diagonal may be supplied. Omitted
/// blocks are zero; below-diagonal blocks are the transposes of their
/// mirrors.
#[derive(Clone, Debug)]
pub struct BlockLayout {
    sizes: Vec<usize>,
    blocks: Vec<(usize, usize, Mat)>,
}

impl BlockLayout {
    pub fn new(sizes: &[usize]) -> Self {
        Self {
            sizes: sizes.to_vec(),
            blocks: Vec::new(),
        }
    }

    pub fn with(mut self, row: usize, col: usize, block: Mat) -> Self {
        self.blocks.push((row, col, block));
        self
    }

    pub fn set(&mut self, row: usize, col: usize, block: Mat) {
        self.blocks.push((row, col, block));
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn dim(&self) -> usize {
        self.sizes.iter().sum()
    }
}

/// Assembles a symmetric matrix from upper-triangular blocks.
pub fn assemble_blocks(layout: &BlockLayout) -> Result<SymMatrix> {
    let nb = layout.sizes.len();
    if nb == 0 || layout.sizes.iter().any(|&s| s == 0) {
        return Err(Error::Dimension {
            band: "layout".into(),
            detail: format!("band sizes must be positive, got {:?}", layout.sizes),
        });
    }
    let offsets: Vec<usize> = layout
        .sizes
        .iter()
        .scan(0, |acc, &s| {
            let o = *acc;
            *acc += s;
            Some(o)
        })
        .collect();
    let mut out = SymMatrix::zeros(layout.dim());
    for (bi, bj, block) in &layout.blocks {
        let (bi, bj) = (*bi, *bj);
        if bi >= nb || bj >= nb {
            return Err(Error::Dimension {
                band: format!("block ({bi},{bj})"),
                detail: format!("layout has only {nb} bands"),
            });
        }
        if bi > bj {
            return Err(Error::Dimension {
                band: format!("block ({bi},{bj})"),
                detail: "only upper-triangular blocks may be supplied".into(),
            });
        }
        if block.rows() != layout.sizes[bi] {
            return Err(Error::Dimension {
                band: format!("row band {bi}"),
                detail: format!(
                    "block ({bi},{bj}) has {} rows, band expects {}",
                    block.rows(),
                    layout.sizes[bi]
                ),
            });
        }
        if block.cols() != layout.sizes[bj] {
            return Err(Error::Dimension {
                band: format!("column band {bj}"),
                detail: format!(
                    "block ({bi},{bj}) has {} columns, band expects {}",
                    block.cols(),
                    layout.sizes[bj]
                ),
            });
        }
        let (r0, c0) = (offsets[bi], offsets[bj]);
        for i in 0..block.rows() {
            for j in 0..block.cols() {
                // diagonal blocks: upper triangle is authoritative
                if bi == bj && j < i {
                    continue;
                }
                out.set(r0 + i, c0 + j, block[(i, j)]);
            }
        }
    }
    Ok(out)
}

/// True iff every eigenvalue of `m` is below `-margin`, certified by a
/// Cholesky factorization of `-(m + margin I)`.
pub fn is_negative_definite(m: &SymMatrix, margin: f64) -> bool {
    debug_assert!(margin >= 0.0);
    (-&m.shifted(margin)).cholesky().is_some()
}

pub fn is_positive_definite(m: &SymMatrix, margin: f64) -> bool {
    m.shifted(-margin).cholesky().is_some()
}

const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
///
/// Iterates until the off-diagonal Frobenius norm is at most
/// `1e-10 * ‖M‖_F`.
pub fn eigenvalue_oracle(m: &SymMatrix) -> Result<Vec<f64>> {
    let n = m.dim();
    let mut a = m.to_mat();
    let norm = m.frobenius_norm();
    let tol = 1e-10 * norm;
    let off = |a: &Mat| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[(i, j)] * a[(i, j)];
                }
            }
        }
        s.sqrt()
    };
    let mut sweeps = 0;
    while off(&a) > tol {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::EigenNoConvergence { sweeps });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                let tau = (aqq - app) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    eig.sort_by(|x, y| x.total_cmp(y));
    Ok(eig)
}

/// Inverse of a 2x2 symmetric matrix; `None` when numerically singular.
pub fn inverse_2x2(p: &SymMatrix) -> Option<SymMatrix> {
    assert_eq!(p.dim(), 2);
    let (a, b, d) = (p.get(0, 0), p.get(0, 1), p.get(1, 1));
    let det = a * d - b * b;
    let scale = a.abs().max(d.abs()).max(b.abs());
    if !det.is_finite() || det.abs() <= 1e-14 * scale * scale {
        return None;
    }
    let mut inv = SymMatrix::zeros(2);
    inv.set(0, 0, d / det);
    inv.set(0, 1, -b / det);
    inv.set(1, 1, a / det);
    Some(inv)
}
