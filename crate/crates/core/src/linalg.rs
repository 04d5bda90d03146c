//! Dense complex matrices, Hermitian spectral decomposition and
//! positivity verdicts.
//!
//! Every operator in the crate is a [`CMatrix`]. Positivity is decided from
//! the full spectrum of the Hermitian part, computed with cyclic Jacobi
//! rotations, and every verdict carries its margin.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Sub, SubAssign};

use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinalgError {
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("matrix is not Hermitian: defect {defect:e} exceeds {allowed:e}")]
    NotHermitian { defect: f64, allowed: f64 },
    #[error("non-finite entry at ({0}, {1})")]
    NonFinite(usize, usize),
    #[error("ragged block grid: {0}")]
    RaggedBlocks(String),
    #[error("subspace dimension {dim} out of range for a {size}-dimensional space")]
    SubspaceOutOfRange { dim: usize, size: usize },
}

pub type Result<T> = std::result::Result<T, LinalgError>;

/// Default relative PSD tolerance.
pub const DEFAULT_PSD_TOL: f64 = 1e-8;

const JACOBI_OFF_TOL: f64 = 1e-15;
const JACOBI_MAX_SWEEPS: usize = 80;

/// Dense row-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMatrix { rows, cols, data }
    }

    /// Builds a matrix from rows, rejecting ragged or non-finite input.
    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(nrows * ncols);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != ncols {
                return Err(LinalgError::ShapeMismatch(format!(
                    "row {i} has {} entries, expected {ncols}",
                    row.len()
                )));
            }
            for (j, z) in row.into_iter().enumerate() {
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(LinalgError::NonFinite(i, j));
                }
                data.push(z);
            }
        }
        Ok(CMatrix {
            rows: nrows,
            cols: ncols,
            data,
        })
    }

    /// Convenience constructor from real rows; panics on ragged input.
    pub fn from_real(rows: &[&[f64]]) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|x| Complex64::new(*x, 0.0)).collect())
                .collect(),
        )
        .expect("well-formed real matrix")
    }

    pub fn from_diag(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, z) in diag.iter().enumerate() {
            m[(i, i)] = *z;
        }
        m
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        Self::from_diag(&diag.iter().map(|x| Complex64::new(*x, 0.0)).collect::<Vec<_>>())
    }

    pub fn scalar(z: Complex64) -> Self {
        Self::from_diag(&[z])
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

    pub fn require_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(LinalgError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn adjoint(&self) -> CMatrix {
        CMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn hermitian_part(&self) -> CMatrix {
        CMatrix::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    pub fn scale(&self, z: Complex64) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * z).collect(),
        }
    }

    pub fn scale_real(&self, r: f64) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * r).collect(),
        }
    }

    /// `self += r · other`.
    pub fn add_scaled(&mut self, r: f64, other: &CMatrix) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "add_scaled shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * r;
        }
    }

    pub fn checked_mul(&self, other: &CMatrix) -> Result<CMatrix> {
        if self.cols != other.rows {
            return Err(LinalgError::ShapeMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                let b_row = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `self^k` by repeated right multiplication, starting from the identity.
    pub fn pow(&self, k: u64) -> CMatrix {
        let mut acc = CMatrix::identity(self.rows);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "max_abs_diff shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn submatrix(&self, row0: usize, col0: usize, nrows: usize, ncols: usize) -> CMatrix {
        assert!(row0 + nrows <= self.rows && col0 + ncols <= self.cols, "submatrix out of range");
        CMatrix::from_fn(nrows, ncols, |i, j| self[(row0 + i, col0 + j)])
    }

    pub fn set_block(&mut self, row0: usize, col0: usize, block: &CMatrix) {
        assert!(row0 + block.rows <= self.rows && col0 + block.cols <= self.cols, "block out of range");
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(row0 + i, col0 + j)] = block[(i, j)];
            }
        }
    }

    /// Block-diagonal direct sum `self ⊕ other`.
    pub fn direct_sum(&self, other: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.rows + other.rows, self.cols + other.cols);
        out.set_block(0, 0, self);
        out.set_block(self.rows, self.cols, other);
        out
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;

    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.checked_mul(rhs).expect("matrix product shape mismatch")
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;

    fn add(self, rhs: &CMatrix) -> CMatrix {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;

    fn sub(self, rhs: &CMatrix) -> CMatrix {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl AddAssign<&CMatrix> for CMatrix {
    fn add_assign(&mut self, rhs: &CMatrix) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "matrix sum shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl SubAssign<&CMatrix> for CMatrix {
    fn sub_assign(&mut self, rhs: &CMatrix) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "matrix difference shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a -= b;
        }
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for z in self.row(i) {
                write!(f, "{:>10.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// `AB - BA`.
pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    &(a * b) - &(b * a)
}

/// Eigenvalues in ascending order with the matching orthonormal eigenvectors
/// as columns.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    /// `Q · diag(f(λ)) · Q*`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.values.len();
        let q = &self.vectors;
        let mut scaled = q.clone();
        for j in 0..n {
            let s = f(self.values[j]);
            for i in 0..n {
                scaled[(i, j)] *= s;
            }
        }
        &scaled * &q.adjoint()
    }
}

fn off_diagonal_norm(m: &CMatrix) -> f64 {
    let n = m.rows;
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += m[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Spectral decomposition of the Hermitian part of `a` by cyclic complex
/// Jacobi rotations.
pub fn hermitian_eigen(a: &CMatrix) -> Result<HermitianEigen> {
    let n = a.require_square()?;
    let mut m = a.hermitian_part();
    let mut v = CMatrix::identity(n);
    let scale = m.frobenius_norm();

    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&m) <= JACOBI_OFF_TOL * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                // Phase ω = conj(apq/r) makes the (p,q) entry real and positive,
                // after which a real Jacobi rotation annihilates it.
                let omega = (apq / r).conj();
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let g_pp = Complex64::new(c, 0.0);
                let g_pq = Complex64::new(s, 0.0);
                let g_qp = omega * (-s);
                let g_qq = omega * c;

                for k in 0..n {
                    let akp = m[(k, p)];
                    let akq = m[(k, q)];
                    m[(k, p)] = akp * g_pp + akq * g_qp;
                    m[(k, q)] = akp * g_pq + akq * g_qq;
                }
                for k in 0..n {
                    let apk = m[(p, k)];
                    let aqk = m[(q, k)];
                    m[(p, k)] = g_pp.conj() * apk + g_qp.conj() * aqk;
                    m[(q, k)] = g_pq.conj() * apk + g_qq.conj() * aqk;
                }
                m[(p, q)] = Complex64::new(0.0, 0.0);
                m[(q, p)] = Complex64::new(0.0, 0.0);
                m[(p, p)] = Complex64::new(app - t * r, 0.0);
                m[(q, q)] = Complex64::new(aqq + t * r, 0.0);

                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * g_pp + vkq * g_qp;
                    v[(k, q)] = vkp * g_pq + vkq * g_qq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let values = order.iter().map(|&i| m[(i, i)].re).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(HermitianEigen { values, vectors })
}

/// Outcome of a positivity test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsdVerdict {
    pub is_psd: bool,
    /// Smallest eigenvalue of the Hermitian part (the PSD margin).
    pub min_eigenvalue: f64,
    /// `‖A - A*‖_F`.
    pub hermitian_defect: f64,
    /// Absolute slack actually applied: `tol · max(1, ‖A‖_F)`.
    pub tolerance_used: f64,
}

/// Decides `A ≥ 0` up to the relative tolerance `tol`.
///
/// The absolute slack is `tol · max(1, ‖A‖_F)`; a Hermitian defect above the
/// slack is reported as [`LinalgError::NotHermitian`], never as "not PSD".
pub fn psd_check(a: &CMatrix, tol: f64) -> Result<PsdVerdict> {
    let n = a.require_square()?;
    let defect = (a - &a.adjoint()).frobenius_norm();
    let tolerance_used = tol * a.frobenius_norm().max(1.0);
    if defect > tolerance_used {
        return Err(LinalgError::NotHermitian {
            defect,
            allowed: tolerance_used,
        });
    }
    let min_eigenvalue = if n == 0 {
        0.0
    } else {
        hermitian_eigen(a)?.values[0]
    };
    Ok(PsdVerdict {
        is_psd: min_eigenvalue >= -tolerance_used,
        min_eigenvalue,
        hermitian_defect: defect,
        tolerance_used,
    })
}

/// Loewner order `A ≤ B`, i.e. `B - A ≥ 0`.
pub fn loewner_leq(a: &CMatrix, b: &CMatrix, tol: f64) -> Result<PsdVerdict> {
    if (a.rows, a.cols) != (b.rows, b.cols) {
        return Err(LinalgError::ShapeMismatch(format!(
            "cannot compare {}x{} with {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    psd_check(&(b - a), tol)
}

/// Largest singular value.
pub fn operator_norm(a: &CMatrix) -> f64 {
    if a.rows == 0 || a.cols == 0 {
        return 0.0;
    }
    let gram = if a.cols <= a.rows {
        &a.adjoint() * a
    } else {
        a * &a.adjoint()
    };
    let eig = hermitian_eigen(&gram).expect("gram matrices are square");
    eig.values.last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

/// Concatenates a rectangular grid of blocks.
pub fn block_assemble(grid: &[Vec<CMatrix>]) -> Result<CMatrix> {
    let Some(first_row) = grid.first() else {
        return Ok(CMatrix::zeros(0, 0));
    };
    let widths: Vec<usize> = first_row.iter().map(CMatrix::cols).collect();
    let mut heights = Vec::with_capacity(grid.len());
    for (i, row) in grid.iter().enumerate() {
        if row.len() != widths.len() {
            return Err(LinalgError::RaggedBlocks(format!(
                "block row {i} has {} blocks, expected {}",
                row.len(),
                widths.len()
            )));
        }
        let h = row.first().map_or(0, CMatrix::rows);
        for (j, b) in row.iter().enumerate() {
            if b.rows != h {
                return Err(LinalgError::RaggedBlocks(format!(
                    "block ({i},{j}) has height {}, expected {h}",
                    b.rows
                )));
            }
            if b.cols != widths[j] {
                return Err(LinalgError::RaggedBlocks(format!(
                    "block ({i},{j}) has width {}, expected {}",
                    b.cols, widths[j]
                )));
            }
        }
        heights.push(h);
    }
    let mut out = CMatrix::zeros(heights.iter().sum(), widths.iter().sum());
    let mut r0 = 0;
    for (row, h) in grid.iter().zip(&heights) {
        let mut c0 = 0;
        for (b, w) in row.iter().zip(&widths) {
            out.set_block(r0, c0, b);
            c0 += w;
        }
        r0 += h;
    }
    Ok(out)
}

/// Blocks of an operator relative to `H ⊕ H^⊥`, with `H` spanned by the
/// first `subspace_dim` coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockDecomposition {
    /// The compression `P_H N|_H`.
    pub corner: CMatrix,
    pub upper_right: CMatrix,
    /// The `H → H^⊥` block; zero iff `H` is invariant.
    pub lower_left: CMatrix,
    pub complement: CMatrix,
    pub subspace_dim: usize,
}

impl BlockDecomposition {
    pub fn reassemble(&self) -> CMatrix {
        block_assemble(&[
            vec![self.corner.clone(), self.upper_right.clone()],
            vec![self.lower_left.clone(), self.complement.clone()],
        ])
        .expect("blocks of a decomposition are conformal")
    }
}

pub fn block_decompose(n: &CMatrix, subspace_dim: usize) -> Result<BlockDecomposition> {
    let size = n.require_square()?;
    if subspace_dim > size {
        return Err(LinalgError::SubspaceOutOfRange {
            dim: subspace_dim,
            size,
        });
    }
    let k = subspace_dim;
    let rest = size - k;
    Ok(BlockDecomposition {
        corner: n.submatrix(0, 0, k, k),
        upper_right: n.submatrix(0, k, k, rest),
        lower_left: n.submatrix(k, 0, rest, k),
        complement: n.submatrix(k, k, rest, rest),
        subspace_dim: k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
        CMatrix::from_fn(rows, cols, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
        random_matrix(rng, n, n).hermitian_part()
    }

    #[test]
    fn psd_examples() {
        let v = psd_check(&CMatrix::identity(3), DEFAULT_PSD_TOL).unwrap();
        assert!(v.is_psd);
        assert!((v.min_eigenvalue - 1.0).abs() < 1e-15);

        let v = psd_check(&CMatrix::from_real_diag(&[1.0, -1.0]), DEFAULT_PSD_TOL).unwrap();
        assert!(!v.is_psd);
        assert!((v.min_eigenvalue + 1.0).abs() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let w = random_matrix(&mut rng, 4, 4);
        let gram = &w.adjoint() * &w;
        assert!(psd_check(&gram, DEFAULT_PSD_TOL).unwrap().is_psd);
    }

    #[test]
    fn psd_rejects_non_square_and_non_hermitian() {
        assert!(matches!(
            psd_check(&CMatrix::zeros(2, 3), DEFAULT_PSD_TOL),
            Err(LinalgError::NotSquare { .. })
        ));
        let j = CMatrix::from_real(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(matches!(psd_check(&j, DEFAULT_PSD_TOL), Err(LinalgError::NotHermitian { .. })));
    }

    #[test]
    fn loewner_examples() {
        let a = CMatrix::from_real(&[&[2.0, 1.0], &[1.0, 3.0]]);
        let v = loewner_leq(&a, &a, DEFAULT_PSD_TOL).unwrap();
        assert!(v.is_psd && v.min_eigenvalue == 0.0);
        assert!(loewner_leq(&CMatrix::zeros(2, 2), &CMatrix::identity(2), DEFAULT_PSD_TOL).unwrap().is_psd);
        let v = loewner_leq(
            &CMatrix::from_real_diag(&[1.0, 0.0]),
            &CMatrix::from_real_diag(&[0.0, 1.0]),
            DEFAULT_PSD_TOL,
        )
        .unwrap();
        assert!(!v.is_psd);
        assert!(loewner_leq(&CMatrix::identity(2), &CMatrix::identity(3), 1e-8).is_err());
    }

    #[test]
    fn operator_norm_examples() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let u = CMatrix::from_rows(vec![
            vec![c(h, 0.0), c(0.0, h), c(0.0, 0.0)],
            vec![c(0.0, h), c(h, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)],
        ])
        .unwrap();
        assert!((operator_norm(&u) - 1.0).abs() < 1e-14);
        assert!((operator_norm(&CMatrix::from_real_diag(&[3.0, -4.0])) - 4.0).abs() < 1e-14);
        let j = CMatrix::from_real(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!((operator_norm(&j) - 1.0).abs() < 1e-15);
        assert!((operator_norm(&CMatrix::from_real(&[&[3.0, 4.0]])) - 5.0).abs() < 1e-14);
    }

    #[test]
    fn block_assemble_examples() {
        let s = |x: f64| CMatrix::scalar(c(x, 0.0));
        let m = block_assemble(&[vec![s(1.0), s(2.0)], vec![s(3.0), s(4.0)]]).unwrap();
        assert_eq!(m, CMatrix::from_real(&[&[1.0, 2.0], &[3.0, 4.0]]));

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let vs: Vec<CMatrix> = (0..3).map(|_| random_matrix(&mut rng, 4, 1)).collect();
        let grid: Vec<Vec<CMatrix>> = vs
            .iter()
            .map(|vi| vs.iter().map(|vj| &vi.adjoint() * vj).collect())
            .collect();
        let k = block_assemble(&grid).unwrap();
        assert!(psd_check(&k, DEFAULT_PSD_TOL).unwrap().is_psd);

        let bad = block_assemble(&[vec![CMatrix::zeros(1, 1), CMatrix::zeros(2, 1)]]);
        assert!(matches!(bad, Err(LinalgError::RaggedBlocks(_))));
    }

    #[test]
    fn block_decompose_examples() {
        let d = CMatrix::from_real_diag(&[1.0, 2.0, 3.0]);
        let b = block_decompose(&d, 2).unwrap();
        assert_eq!(b.lower_left, CMatrix::zeros(1, 2));
        assert_eq!(b.corner, CMatrix::from_real_diag(&[1.0, 2.0]));

        let (cs, sn) = (0.6, (1.0f64 - 0.36).sqrt());
        let r = CMatrix::from_real(&[&[cs, -sn], &[sn, cs]]);
        let b = block_decompose(&r, 1).unwrap();
        assert_eq!(b.corner[(0, 0)].re, 0.6);
        assert!((b.lower_left[(0, 0)].re - 0.8).abs() < 1e-15);
        assert_eq!(b.reassemble(), r);

        assert!(matches!(
            block_decompose(&r, 3),
            Err(LinalgError::SubspaceOutOfRange { .. })
        ));
    }

    #[test]
    fn spectral_decomposition_residuals() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [1, 2, 3, 5, 8, 16, 32] {
            let a = random_hermitian(&mut rng, n);
            let eig = hermitian_eigen(&a).unwrap();
            let recon = eig.reconstruct_with(|x| x);
            let scale = a.frobenius_norm();
            assert!((&a - &recon).frobenius_norm() <= 1e-10 * scale, "n = {n}");
            let q = &eig.vectors;
            let ortho = &(&q.adjoint() * q) - &CMatrix::identity(n);
            assert!(ortho.frobenius_norm() <= 1e-10, "n = {n}");
            assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn degenerate_spectra() {
        let a = CMatrix::identity(5).scale_real(2.0);
        let eig = hermitian_eigen(&a).unwrap();
        assert!(eig.values.iter().all(|x| (*x - 2.0).abs() < 1e-15));
        let z = CMatrix::zeros(4, 4);
        assert_eq!(hermitian_eigen(&z).unwrap().values, vec![0.0; 4]);
    }

    /// Cholesky with diagonal pivoting on `A + shift·I`; succeeds iff the
    /// shifted matrix is numerically positive definite.
    fn cholesky_succeeds(a: &CMatrix, shift: f64) -> bool {
        let n = a.rows();
        let mut m = a.hermitian_part();
        for i in 0..n {
            m[(i, i)] += shift;
        }
        let mut active: Vec<usize> = (0..n).collect();
        while !active.is_empty() {
            let (pos, &p) = active
                .iter()
                .enumerate()
                .max_by(|x, y| m[(*x.1, *x.1)].re.total_cmp(&m[(*y.1, *y.1)].re))
                .unwrap();
            let d = m[(p, p)].re;
            if d <= 0.0 {
                return false;
            }
            active.remove(pos);
            for &i in &active {
                for &j in &active {
                    let update = m[(i, p)] * m[(p, j)] / d;
                    m[(i, j)] -= update;
                }
            }
        }
        true
    }

    #[test]
    fn psd_agrees_with_cholesky_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let tol = 1e-8;
        for trial in 0..1000 {
            let n = rng.random_range(1..=6);
            let mut a = random_hermitian(&mut rng, n);
            // Push some samples close to the boundary.
            if trial % 3 == 0 {
                let min = hermitian_eigen(&a).unwrap().values[0];
                for i in 0..n {
                    a[(i, i)] -= min;
                }
            }
            let verdict = psd_check(&a, tol).unwrap();
            let slack = verdict.tolerance_used;
            if verdict.min_eigenvalue.abs() <= 2.0 * slack {
                continue;
            }
            assert_eq!(verdict.is_psd, cholesky_succeeds(&a, slack), "trial {trial}");
        }
    }

    proptest! {
        #[test]
        fn operator_norm_is_submultiplicative(seed in any::<u64>(), n in 1usize..6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_matrix(&mut rng, n, n);
            let b = random_matrix(&mut rng, n, n);
            prop_assert!(operator_norm(&(&a * &b)) <= operator_norm(&a) * operator_norm(&b) + 1e-10);
        }

        #[test]
        fn decompose_then_assemble_is_identity(seed in any::<u64>(), n in 1usize..7, k in 0usize..7) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_matrix(&mut rng, n, n);
            let k = k.min(n);
            prop_assert_eq!(block_decompose(&a, k).unwrap().reassemble(), a);
        }
    }
}
