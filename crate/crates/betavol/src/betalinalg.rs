//! Dense matrices over F_β and the decompositions the estimators rely on.
//!
//! A [`FMatrix`] owns its entries as [`QuatScalar`]s regardless of β, so the
//! same Gram–Schmidt, Gram-matrix, and product code serves all three fields;
//! quaternion entries simply use all four components. Spectral work
//! (singular values, PSD square roots, the polar unitary factor) is done on
//! the complex embedding: β ∈ {1, 2} matrices embed entrywise, β = 4
//! matrices expand each entry into its 2×2 block, doubling both dimensions.
//!
//! Conventions, fixed here and relied on everywhere else:
//!
//! * **Traces.** `trace_gram` sums squared entry norms. For β = 4 this is
//!   *half* the trace of the complexified Gram matrix — the half-trace
//!   convention — so Gaussian weights e^{-tr M†M} mean the same thing for
//!   every β.
//! * **β-determinant magnitude.** `abs_det_beta` is the product of the
//!   β-collapsed singular values: the complex embedding of a quaternion
//!   matrix has every singular value doubly degenerate, and we collapse each
//!   degenerate pair to one value (checked at relative 1e-8). For β ∈ {1, 2}
//!   it is the ordinary |det|.
//! * **Triangular factors.** Gram–Schmidt produces T with a real,
//!   strictly positive diagonal, which makes |det M| = ∏ t_ii exact and
//!   makes the Q factor of a Gaussian matrix Haar-distributed.

use crate::error::{Error, Result};
use crate::numfield::{Beta, QuatScalar, ONE, ZERO};
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Dense row-major matrix over F_β.
#[derive(Clone, Debug, PartialEq)]
pub struct FMatrix {
    beta: Beta,
    rows: usize,
    cols: usize,
    data: Vec<QuatScalar>,
}

impl FMatrix {
    pub fn zeros(beta: Beta, rows: usize, cols: usize) -> Self {
        FMatrix {
            beta,
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(beta: Beta, n: usize) -> Self {
        let mut m = FMatrix::zeros(beta, n, n);
        for i in 0..n {
            m.set(i, i, ONE);
        }
        m
    }

    pub fn from_fn(
        beta: Beta,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> QuatScalar,
    ) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        FMatrix {
            beta,
            rows,
            cols,
            data,
        }
    }

    pub fn beta(&self) -> Beta {
        self.beta
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

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> QuatScalar {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: QuatScalar) {
        self.data[r * self.cols + c] = v;
    }

    /// Checks that every entry belongs to the field selected by this
    /// matrix's β (reals carry no imaginary or j/k parts, and so on).
    pub fn validate_field(&self) -> Result<()> {
        for r in 0..self.rows {
            for c in 0..self.cols {
                if !self.get(r, c).in_field(self.beta) {
                    return Err(Error::FieldMembership {
                        row: r,
                        col: c,
                        beta: self.beta.value(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> FMatrix {
        FMatrix::from_fn(self.beta, self.cols, self.rows, |r, c| self.get(c, r).conj())
    }

    /// Matrix product; entry order follows the operands, so this is valid
    /// over the quaternions. Panics on shape or field mismatch (programming
    /// error, not data error).
    pub fn matmul(&self, rhs: &FMatrix) -> FMatrix {
        assert_eq!(self.beta, rhs.beta, "matmul: mixed fields");
        assert_eq!(self.cols, rhs.rows, "matmul: incompatible shapes");
        let mut out = FMatrix::zeros(self.beta, self.rows, rhs.cols);
        for r in 0..self.rows {
            for c in 0..rhs.cols {
                let mut acc = ZERO;
                for k in 0..self.cols {
                    acc += self.get(r, k) * rhs.get(k, c);
                }
                out.set(r, c, acc);
            }
        }
        out
    }

    pub fn sub(&self, rhs: &FMatrix) -> FMatrix {
        assert_eq!(self.beta, rhs.beta);
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        FMatrix::from_fn(self.beta, self.rows, self.cols, |r, c| {
            self.get(r, c) - rhs.get(r, c)
        })
    }

    pub fn scale(&self, s: f64) -> FMatrix {
        FMatrix::from_fn(self.beta, self.rows, self.cols, |r, c| {
            self.get(r, c).scale(s)
        })
    }

    /// Sum of squared entry norms. Equals tr(M†M) for β ∈ {1, 2} and the
    /// half-trace convention's tr(M†M) for β = 4.
    pub fn trace_gram(&self) -> f64 {
        self.data.iter().map(|q| q.norm_sq()).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.trace_gram().sqrt()
    }

    /// Largest entrywise distance to `rhs`, for closeness assertions.
    pub fn max_abs_diff(&self, rhs: &FMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let mut worst = 0.0_f64;
        for (a, b) in self.data.iter().zip(&rhs.data) {
            worst = worst.max((*a - *b).abs());
        }
        worst
    }

    /// Euclidean norm of column `c` (all β real components included).
    pub fn col_norm(&self, c: usize) -> f64 {
        (0..self.rows)
            .map(|r| self.get(r, c).norm_sq())
            .sum::<f64>()
            .sqrt()
    }

    /// Gram matrix M†M, Hermitian by construction (upper triangle computed,
    /// lower mirrored; the diagonal is exactly real).
    pub fn gram(&self) -> FMatrix {
        let n = self.cols;
        let mut w = FMatrix::zeros(self.beta, n, n);
        for i in 0..n {
            for j in i..n {
                let mut acc = ZERO;
                for k in 0..self.rows {
                    acc += self.get(k, i).conj() * self.get(k, j);
                }
                w.set(i, j, acc);
                if i != j {
                    w.set(j, i, acc.conj());
                }
            }
        }
        w
    }

    /// Complex embedding: the matrix itself for β ∈ {1, 2} (real entries as
    /// complex numbers), the 2n×2N block expansion for β = 4.
    pub fn complexify(&self) -> DMatrix<Complex64> {
        match self.beta {
            Beta::One | Beta::Two => {
                DMatrix::from_fn(self.rows, self.cols, |r, c| self.get(r, c).z)
            }
            Beta::Four => {
                let mut m = DMatrix::zeros(2 * self.rows, 2 * self.cols);
                for r in 0..self.rows {
                    for c in 0..self.cols {
                        let b = self.get(r, c).embed_block();
                        for (dr, row) in b.iter().enumerate() {
                            for (dc, v) in row.iter().enumerate() {
                                m[(2 * r + dr, 2 * c + dc)] = *v;
                            }
                        }
                    }
                }
                m
            }
        }
    }

    /// Inverse of [`FMatrix::complexify`]. The redundant components a complex
    /// matrix must carry to represent an F_β matrix (imaginary parts for
    /// β = 1, the paired block copies for β = 4) are checked against
    /// `rel_tol` times the Frobenius norm and then projected away; a larger
    /// deviation means the matrix does not represent an F_β matrix.
    pub fn from_complex_checked(
        beta: Beta,
        m: &DMatrix<Complex64>,
        rel_tol: f64,
    ) -> Result<FMatrix> {
        let scale = m.norm().max(f64::MIN_POSITIVE);
        let tol = rel_tol * scale;
        match beta {
            Beta::One => {
                let mut worst = 0.0_f64;
                let out = FMatrix::from_fn(beta, m.nrows(), m.ncols(), |r, c| {
                    let v = m[(r, c)];
                    worst = worst.max(v.im.abs());
                    QuatScalar::from_real(v.re)
                });
                if worst > tol {
                    return Err(Error::BlockStructure {
                        deviation: worst,
                        tolerance: tol,
                    });
                }
                Ok(out)
            }
            Beta::Two => Ok(FMatrix::from_fn(beta, m.nrows(), m.ncols(), |r, c| {
                QuatScalar::from_complex(m[(r, c)])
            })),
            Beta::Four => {
                if m.nrows() % 2 != 0 || m.ncols() % 2 != 0 {
                    return Err(Error::Dimension(format!(
                        "{}x{} complex matrix cannot be a quaternion embedding",
                        m.nrows(),
                        m.ncols()
                    )));
                }
                let (rows, cols) = (m.nrows() / 2, m.ncols() / 2);
                let mut worst = 0.0_f64;
                let out = FMatrix::from_fn(beta, rows, cols, |r, c| {
                    let b = [
                        [m[(2 * r, 2 * c)], m[(2 * r, 2 * c + 1)]],
                        [m[(2 * r + 1, 2 * c)], m[(2 * r + 1, 2 * c + 1)]],
                    ];
                    let (q, dev) = QuatScalar::from_embed_block(b);
                    worst = worst.max(dev);
                    q
                });
                if worst > tol {
                    return Err(Error::BlockStructure {
                        deviation: worst,
                        tolerance: tol,
                    });
                }
                Ok(out)
            }
        }
    }
}

/// QR factorization M = Q·T from Gram–Schmidt: `q` has orthonormal columns,
/// `t` is upper triangular with a real, strictly positive diagonal.
#[derive(Clone, Debug)]
pub struct QRPair {
    pub q: FMatrix,
    pub t: FMatrix,
}

/// Polar factorization M = U·H: `unitary` has orthonormal columns and `psd_root`
/// is the positive-semidefinite square root of M†M.
#[derive(Clone, Debug)]
pub struct PolarPair {
    pub unitary: FMatrix,
    pub psd_root: HermPSD,
}

/// Gram–Schmidt orthonormalization in native F_β arithmetic (no embedding),
/// with a second projection pass for numerical orthogonality. Projection
/// coefficients multiply columns from the right, which is what makes the
/// factorization valid over the quaternions.
///
/// Errors with the failing column index when a pivot falls below
/// 1e-12 × (largest column norm).
pub fn gram_schmidt_qr(m: &FMatrix) -> Result<QRPair> {
    let (n, nn) = (m.rows(), m.cols());
    assert!(n >= nn, "gram_schmidt_qr: more columns than rows");
    let mut q = m.clone();
    let mut t = FMatrix::zeros(m.beta(), nn, nn);

    let mut max_col = 0.0_f64;
    for j in 0..nn {
        max_col = max_col.max(m.col_norm(j));
    }
    let threshold = 1e-12 * max_col;

    for j in 0..nn {
        // two passes of projection removal, accumulating the coefficients
        for _pass in 0..2 {
            for i in 0..j {
                let mut c = ZERO;
                for k in 0..n {
                    c += q.get(k, i).conj() * q.get(k, j);
                }
                let prev = t.get(i, j);
                t.set(i, j, prev + c);
                for k in 0..n {
                    let v = q.get(k, j) - q.get(k, i) * c;
                    q.set(k, j, v);
                }
            }
        }
        let norm = q.col_norm(j);
        if norm <= threshold {
            return Err(Error::RankDeficient {
                column: j,
                pivot: norm,
                threshold,
            });
        }
        t.set(j, j, QuatScalar::from_real(norm));
        let inv = 1.0 / norm;
        for k in 0..n {
            q.set(k, j, q.get(k, j).scale(inv));
        }
    }
    Ok(QRPair { q, t })
}

/// Collapses a descending list of spectral values whose complex embedding
/// doubles multiplicities (β = 4): adjacent pairs must agree to relative
/// 1e-8 (or absolutely to 1e-12 of the spectral scale, for values near
/// zero) and are averaged. For β ∈ {1, 2} the list is returned unchanged.
fn collapse_pairs(beta: Beta, mut vals: Vec<f64>, scale: f64) -> Result<Vec<f64>> {
    vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
    if beta != Beta::Four {
        return Ok(vals);
    }
    if vals.len() % 2 != 0 {
        return Err(Error::Dimension(
            "odd spectrum cannot pair up for beta = 4".into(),
        ));
    }
    let mut out = Vec::with_capacity(vals.len() / 2);
    for pair in vals.chunks(2) {
        let (a, b) = (pair[0], pair[1]);
        let mag = a.abs().max(b.abs());
        if (a - b).abs() > 1e-8 * mag && (a - b).abs() > 1e-12 * scale {
            return Err(Error::PairCollapse { a, b });
        }
        out.push(0.5 * (a + b));
    }
    Ok(out)
}

/// Singular values of `m` in the β sense: computed on the complex embedding
/// and, for β = 4, collapsed from doubly degenerate pairs. Descending order;
/// a square matrix of side N yields exactly N values for every β.
pub fn singular_values_beta(m: &FMatrix) -> Result<Vec<f64>> {
    let c = m.complexify();
    let svd = c.svd(false, false);
    let vals: Vec<f64> = svd.singular_values.iter().copied().collect();
    let scale = vals.iter().cloned().fold(0.0_f64, f64::max);
    collapse_pairs(m.beta(), vals, scale)
}

/// |det M| in the β sense (the product of β-collapsed singular values),
/// computed as ∏ t_ii of the Gram–Schmidt triangle. Returns 0 for singular
/// input instead of erroring.
pub fn abs_det_beta(m: &FMatrix) -> f64 {
    assert!(m.is_square(), "abs_det_beta: matrix must be square");
    match gram_schmidt_qr(m) {
        Ok(qr) => {
            let mut p = 1.0;
            for i in 0..m.cols() {
                p *= qr.t.get(i, i).re();
            }
            p
        }
        Err(Error::RankDeficient { .. }) => 0.0,
        Err(_) => unreachable!("gram_schmidt_qr only fails with RankDeficient"),
    }
}

/// Validated Hermitian positive-semidefinite matrix over F_β.
///
/// Construction checks self-adjointness (entrywise, at 1e-10 of the
/// Frobenius scale) and positive semidefiniteness (β-eigenvalues at or above
/// -1e-10 of the spectral radius; small negatives are clamped to zero). The
/// collapsed eigenvalue list is kept alongside the matrix.
#[derive(Clone, Debug)]
pub struct HermPSD {
    mat: FMatrix,
    eigenvalues: Vec<f64>,
}

impl HermPSD {
    pub fn new(mat: FMatrix) -> Result<HermPSD> {
        if !mat.is_square() {
            return Err(Error::Dimension(format!(
                "{}x{} matrix cannot be Hermitian",
                mat.rows(),
                mat.cols()
            )));
        }
        let scale = mat.frobenius_norm().max(f64::MIN_POSITIVE);
        let mut dev = 0.0_f64;
        for i in 0..mat.rows() {
            for j in 0..mat.cols() {
                dev = dev.max((mat.get(i, j) - mat.get(j, i).conj()).abs());
            }
        }
        if dev > 1e-10 * scale {
            return Err(Error::BlockStructure {
                deviation: dev,
                tolerance: 1e-10 * scale,
            });
        }
        let eigenvalues = herm_eigenvalues(&mat)?;
        let spectral = eigenvalues
            .iter()
            .map(|x| x.abs())
            .fold(0.0_f64, f64::max)
            .max(f64::MIN_POSITIVE);
        let tol = 1e-10 * spectral;
        if let Some(&bad) = eigenvalues.iter().find(|&&l| l < -tol) {
            return Err(Error::NotPsd {
                eigenvalue: bad,
                tolerance: tol,
            });
        }
        let eigenvalues = eigenvalues.into_iter().map(|l| l.max(0.0)).collect();
        Ok(HermPSD { mat, eigenvalues })
    }

    pub fn matrix(&self) -> &FMatrix {
        &self.mat
    }

    pub fn beta(&self) -> Beta {
        self.mat.beta()
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    /// β-collapsed eigenvalues, descending, clamped at zero.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// β-determinant: product of collapsed eigenvalues. For a Gram matrix
    /// this equals abs_det_beta(M)² of the generating matrix.
    pub fn det_beta(&self) -> f64 {
        self.eigenvalues.iter().product()
    }
}

/// Eigenvalues of a Hermitian F_β matrix: eigendecomposition of the
/// (symmetrized) complex embedding, β-collapsed. Descending.
fn herm_eigenvalues(mat: &FMatrix) -> Result<Vec<f64>> {
    let c = mat.complexify();
    let sym = (&c + c.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = nalgebra::linalg::SymmetricEigen::new(sym);
    let vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let scale = vals.iter().map(|x| x.abs()).fold(0.0_f64, f64::max);
    collapse_pairs(mat.beta(), vals, scale)
}

/// Positive-semidefinite square root: eigenvalues in [-1e-10·‖w‖, 0) clamp
/// to zero (they are rounding debris on a PSD input), anything lower has
/// already been rejected by [`HermPSD::new`].
pub fn psd_sqrt(w: &HermPSD) -> Result<HermPSD> {
    let h = herm_spectral_map(w, |l| l.max(0.0).sqrt())?;
    HermPSD::new(h)
}

/// Applies `f` to the spectrum of a validated Hermitian matrix through the
/// complex embedding and maps the result back to F_β.
fn herm_spectral_map(w: &HermPSD, f: impl Fn(f64) -> f64) -> Result<FMatrix> {
    let c = w.matrix().complexify();
    let sym = (&c + c.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = nalgebra::linalg::SymmetricEigen::new(sym);
    let dim = eig.eigenvalues.len();
    let mut diag = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        diag[(i, i)] = Complex64::new(f(eig.eigenvalues[i]), 0.0);
    }
    let mapped = &eig.eigenvectors * diag * eig.eigenvectors.adjoint();
    // the spectral map of a structured matrix keeps the block structure up to
    // rounding; allow an order of magnitude over the constructor tolerance
    FMatrix::from_complex_checked(w.beta(), &mapped, 1e-10)
}

/// Polar factorization M = U·H with U an n×N isometry and H = (M†M)^{1/2}.
/// Defined for n ≥ N and full column rank; rank deficiency is reported with
/// the failing column index.
pub fn polar_decompose(m: &FMatrix) -> Result<PolarPair> {
    if m.rows() < m.cols() {
        return Err(Error::Dimension(format!(
            "polar factorization needs rows >= cols, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    // rank gate first: it localizes the failure to a column
    gram_schmidt_qr(m)?;

    let w = HermPSD::new(m.gram())?;
    let c = w.matrix().complexify();
    let sym = (&c + c.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = nalgebra::linalg::SymmetricEigen::new(sym);
    let dim = eig.eigenvalues.len();
    let mut root = DMatrix::zeros(dim, dim);
    let mut inv_root = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        let l = eig.eigenvalues[i].max(0.0);
        let s = l.sqrt();
        root[(i, i)] = Complex64::new(s, 0.0);
        inv_root[(i, i)] = Complex64::new(1.0 / s, 0.0);
    }
    let vecs = &eig.eigenvectors;
    let h_c = vecs * root * vecs.adjoint();
    let hinv_c = vecs * inv_root * vecs.adjoint();
    let u_c = m.complexify() * hinv_c;

    let unitary = FMatrix::from_complex_checked(m.beta(), &u_c, 1e-10)?;
    let h = FMatrix::from_complex_checked(m.beta(), &h_c, 1e-10)?;
    Ok(PolarPair {
        unitary,
        psd_root: HermPSD::new(h)?,
    })
}

/// Difference matrix of a point set: columns 1..=N of `points` minus column
/// 0. Input is n×(N+1), output n×N.
pub fn difference_matrix(points: &FMatrix) -> FMatrix {
    assert!(points.cols() >= 2, "difference_matrix needs at least 2 points");
    let nn = points.cols() - 1;
    FMatrix::from_fn(points.beta(), points.rows(), nn, |r, c| {
        points.get(r, c + 1) - points.get(r, 0)
    })
}

/// N-dimensional volume of the simplex spanned by N+1 points in F_β^n
/// (n ≥ N): ∏ singular values of the difference matrix, divided by N!.
/// Degenerate simplices yield 0.
pub fn simplex_volume(points: &FMatrix) -> f64 {
    let d = difference_matrix(points);
    let vol = match gram_schmidt_qr(&d) {
        Ok(qr) => {
            let mut p = 1.0;
            for i in 0..d.cols() {
                p *= qr.t.get(i, i).re();
            }
            p
        }
        Err(_) => return 0.0,
    };
    let mut fact = 1.0;
    for k in 2..=d.cols() {
        fact *= k as f64;
    }
    vol / fact
}

/// Relative deviation of a β = 4 matrix's complex embedding C from the
/// symplectic conjugation identity C = Z̃ C̄ Z̃⁻¹, where Z̃ is the block
/// diagonal of [[0, -1], [1, 0]]. Zero (to rounding) exactly when the
/// complex matrix carries a genuine quaternion structure.
pub fn symplectic_deviation(m: &FMatrix) -> f64 {
    assert_eq!(m.beta(), Beta::Four, "symplectic structure is a beta = 4 notion");
    let c = m.complexify();
    let z_left = symplectic_unit(c.nrows());
    let z_right_inv = -symplectic_unit(c.ncols());
    let conj = c.map(|v| v.conj());
    let recon = z_left * conj * z_right_inv;
    let dev = (&c - recon).norm();
    dev / c.norm().max(f64::MIN_POSITIVE)
}

fn symplectic_unit(dim: usize) -> DMatrix<Complex64> {
    assert!(dim % 2 == 0);
    let mut z = DMatrix::zeros(dim, dim);
    for b in 0..dim / 2 {
        z[(2 * b, 2 * b + 1)] = Complex64::new(-1.0, 0.0);
        z[(2 * b + 1, 2 * b)] = Complex64::new(1.0, 0.0);
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Deterministic pseudo-random fill so these tests need no RNG machinery.
    fn splitmix_fill(beta: Beta, rows: usize, cols: usize, seed: u64) -> FMatrix {
        let mut state = seed;
        let mut next = move || {
            state = state.wrapping_add(0x9E3779B97F4A7C15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
            z = z ^ (z >> 31);
            (z >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        FMatrix::from_fn(beta, rows, cols, |_, _| match beta {
            Beta::One => QuatScalar::from_real(next()),
            Beta::Two => QuatScalar::from_complex(Complex64::new(next(), next())),
            Beta::Four => QuatScalar::new(
                Complex64::new(next(), next()),
                Complex64::new(next(), next()),
            ),
        })
    }

    fn check_orthonormal(q: &FMatrix, tol: f64) {
        let g = q.gram();
        let id = FMatrix::identity(q.beta(), q.cols());
        assert!(
            g.max_abs_diff(&id) <= tol,
            "columns deviate from orthonormality by {:.3e}",
            g.max_abs_diff(&id)
        );
    }

    #[test]
    fn adjoint_reverses_products() {
        for beta in Beta::ALL {
            let a = splitmix_fill(beta, 4, 3, 11);
            let b = splitmix_fill(beta, 3, 2, 22);
            let lhs = a.matmul(&b).adjoint();
            let rhs = b.adjoint().matmul(&a.adjoint());
            assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        }
    }

    #[test]
    fn gram_is_hermitian_with_real_diagonal() {
        for beta in Beta::ALL {
            let m = splitmix_fill(beta, 5, 3, 7);
            let w = m.gram();
            for i in 0..3 {
                let d = w.get(i, i);
                assert_eq!(d.z.im, 0.0);
                assert_eq!(d.w, Complex64::new(0.0, 0.0));
                for j in 0..3 {
                    assert_eq!(w.get(i, j), w.get(j, i).conj());
                }
            }
        }
    }

    #[test]
    fn trace_convention_halves_the_embedded_trace() {
        let m = splitmix_fill(Beta::Four, 3, 2, 5);
        let w = m.gram().complexify();
        let embedded_trace: f64 = (0..w.nrows()).map(|i| w[(i, i)].re).sum();
        assert_relative_eq!(m.trace_gram(), 0.5 * embedded_trace, max_relative = 1e-12);

        let m2 = splitmix_fill(Beta::Two, 3, 2, 6);
        let w2 = m2.gram().complexify();
        let tr2: f64 = (0..2).map(|i| w2[(i, i)].re).sum();
        assert_relative_eq!(m2.trace_gram(), tr2, max_relative = 1e-12);
    }

    #[test]
    fn complexify_round_trips_bit_exactly() {
        for beta in Beta::ALL {
            let m = splitmix_fill(beta, 4, 2, 99);
            let back = FMatrix::from_complex_checked(beta, &m.complexify(), 1e-12).unwrap();
            assert_eq!(back.max_abs_diff(&m), 0.0);
        }
    }

    #[test]
    fn from_complex_rejects_unstructured_input() {
        // generic complex 2x2 is not a quaternion embedding
        let c = DMatrix::from_fn(2, 2, |r, q| Complex64::new((r + q) as f64 + 1.0, 0.5));
        let err = FMatrix::from_complex_checked(Beta::Four, &c, 1e-12).unwrap_err();
        assert!(matches!(err, Error::BlockStructure { .. }));

        let c1 = DMatrix::from_fn(2, 2, |_, _| Complex64::new(1.0, 0.3));
        let err1 = FMatrix::from_complex_checked(Beta::One, &c1, 1e-12).unwrap_err();
        assert!(matches!(err1, Error::BlockStructure { .. }));
    }

    #[test]
    fn gram_schmidt_factors_and_reconstructs() {
        for beta in Beta::ALL {
            for (n, nn, seed) in [(3, 3, 1u64), (5, 3, 2), (4, 1, 3), (6, 6, 4)] {
                let m = splitmix_fill(beta, n, nn, seed);
                let qr = gram_schmidt_qr(&m).unwrap();
                check_orthonormal(&qr.q, 1e-12);
                // upper triangular, real positive diagonal
                for i in 0..nn {
                    let d = qr.t.get(i, i);
                    assert!(d.re() > 0.0 && d.z.im == 0.0 && d.w == Complex64::new(0.0, 0.0));
                    for j in 0..i {
                        assert!(qr.t.get(i, j).is_zero());
                    }
                }
                let recon = qr.q.matmul(&qr.t);
                let rel = recon.max_abs_diff(&m) / m.frobenius_norm();
                assert!(rel < 1e-12, "beta {beta} reconstruction off by {rel:.3e}");
                // factors stay inside the field
                qr.q.validate_field().unwrap();
                qr.t.validate_field().unwrap();
            }
        }
    }

    #[test]
    fn gram_schmidt_reports_the_failing_column() {
        let mut m = splitmix_fill(Beta::One, 4, 3, 10);
        for r in 0..4 {
            let v = m.get(r, 0);
            m.set(r, 2, v.scale(-2.5)); // column 2 = -2.5 × column 0
        }
        match gram_schmidt_qr(&m) {
            Err(Error::RankDeficient { column, .. }) => assert_eq!(column, 2),
            other => panic!("expected rank deficiency, got {other:?}"),
        }
    }

    #[test]
    fn singular_values_of_diagonal_matrices() {
        // beta = 1
        let mut m1 = FMatrix::zeros(Beta::One, 2, 2);
        m1.set(0, 0, QuatScalar::from_real(3.0));
        m1.set(1, 1, QuatScalar::from_real(-4.0));
        assert_eq!(singular_values_beta(&m1).unwrap(), vec![4.0, 3.0]);

        // beta = 2: |1 + i| = √2
        let mut m2 = FMatrix::zeros(Beta::Two, 1, 1);
        m2.set(0, 0, QuatScalar::from_complex(Complex64::new(1.0, 1.0)));
        let sv2 = singular_values_beta(&m2).unwrap();
        assert_relative_eq!(sv2[0], 2.0_f64.sqrt(), max_relative = 1e-12);

        // beta = 4: |1 + i + j + k| = 2, embedding doubles it, collapse undoes it
        let mut m4 = FMatrix::zeros(Beta::Four, 1, 1);
        m4.set(
            0,
            0,
            QuatScalar::new(Complex64::new(1.0, 1.0), Complex64::new(1.0, 1.0)),
        );
        let sv4 = singular_values_beta(&m4).unwrap();
        assert_eq!(sv4.len(), 1);
        assert_relative_eq!(sv4[0], 2.0, max_relative = 1e-12);
    }

    #[test]
    fn square_matrices_yield_n_values_for_every_beta() {
        for beta in Beta::ALL {
            let m = splitmix_fill(beta, 3, 3, 21);
            assert_eq!(singular_values_beta(&m).unwrap().len(), 3);
        }
    }

    #[test]
    fn abs_det_matches_singular_value_product() {
        for beta in Beta::ALL {
            for seed in 0..5u64 {
                let m = splitmix_fill(beta, 3, 3, 1000 + seed);
                let d = abs_det_beta(&m);
                let p: f64 = singular_values_beta(&m).unwrap().iter().product();
                assert_relative_eq!(d, p, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn abs_det_known_values_and_singular_input() {
        let m = FMatrix::from_fn(Beta::One, 2, 2, |r, c| {
            QuatScalar::from_real([[1.0, 2.0], [3.0, 4.0]][r][c])
        });
        assert_relative_eq!(abs_det_beta(&m), 2.0, max_relative = 1e-12);

        let sing = FMatrix::from_fn(Beta::One, 2, 2, |r, _| QuatScalar::from_real(r as f64 + 1.0));
        assert_eq!(abs_det_beta(&sing), 0.0);
    }

    #[test]
    fn herm_psd_validates_and_rejects() {
        for beta in Beta::ALL {
            let m = splitmix_fill(beta, 4, 3, 77);
            let w = HermPSD::new(m.gram()).unwrap();
            assert_eq!(w.eigenvalues().len(), 3);
            assert!(w.eigenvalues().iter().all(|&l| l >= 0.0));
            assert_relative_eq!(
                w.det_beta(),
                abs_det_beta_sq(&m),
                max_relative = 1e-10
            );
        }

        // indefinite matrix is rejected
        let mut ind = FMatrix::identity(Beta::One, 2);
        ind.set(1, 1, QuatScalar::from_real(-1.0));
        assert!(matches!(HermPSD::new(ind), Err(Error::NotPsd { .. })));

        // non-Hermitian matrix is rejected
        let mut nh = FMatrix::identity(Beta::One, 2);
        nh.set(0, 1, QuatScalar::from_real(1.0));
        assert!(matches!(HermPSD::new(nh), Err(Error::BlockStructure { .. })));
    }

    fn abs_det_beta_sq(m: &FMatrix) -> f64 {
        let sv = singular_values_beta(m).unwrap();
        sv.iter().map(|s| s * s).product()
    }

    #[test]
    fn psd_sqrt_squares_back() {
        for beta in Beta::ALL {
            let m = splitmix_fill(beta, 4, 3, 31);
            let w = HermPSD::new(m.gram()).unwrap();
            let h = psd_sqrt(&w).unwrap();
            let sq = h.matrix().matmul(h.matrix());
            let rel = sq.max_abs_diff(w.matrix()) / w.matrix().frobenius_norm();
            assert!(rel < 1e-10, "beta {beta}: sqrt squared off by {rel:.3e}");
        }
    }

    #[test]
    fn polar_reconstructs_with_isometric_factor() {
        for beta in Beta::ALL {
            for (n, nn, seed) in [(3, 3, 41u64), (5, 2, 42), (4, 4, 43)] {
                let m = splitmix_fill(beta, n, nn, seed);
                let polar = polar_decompose(&m).unwrap();
                check_orthonormal(&polar.unitary, 1e-10);
                let recon = polar.unitary.matmul(polar.psd_root.matrix());
                let rel = recon.max_abs_diff(&m) / m.frobenius_norm();
                assert!(rel < 1e-10, "beta {beta} {n}x{nn}: polar off by {rel:.3e}");
                // the PSD factor squares to the Gram matrix
                let sq = polar.psd_root.matrix().matmul(polar.psd_root.matrix());
                let rel2 = sq.max_abs_diff(&m.gram()) / m.gram().frobenius_norm();
                assert!(rel2 < 1e-10);
            }
        }
    }

    #[test]
    fn polar_rejects_rank_deficiency_and_wide_matrices() {
        let mut m = splitmix_fill(Beta::Two, 3, 2, 50);
        for r in 0..3 {
            m.set(r, 1, m.get(r, 0));
        }
        assert!(matches!(
            polar_decompose(&m),
            Err(Error::RankDeficient { column: 1, .. })
        ));

        let wide = splitmix_fill(Beta::One, 2, 3, 51);
        assert!(matches!(polar_decompose(&wide), Err(Error::Dimension(_))));
    }

    #[test]
    fn simplex_volumes_of_reference_shapes() {
        // right triangle (0,0), (1,0), (0,1): area 1/2
        let mut tri = FMatrix::zeros(Beta::One, 2, 3);
        tri.set(0, 1, QuatScalar::from_real(1.0));
        tri.set(1, 2, QuatScalar::from_real(1.0));
        assert_relative_eq!(simplex_volume(&tri), 0.5, max_relative = 1e-12);

        // unit right tetrahedron: volume 1/6
        let mut tet = FMatrix::zeros(Beta::One, 3, 4);
        for i in 0..3 {
            tet.set(i, i + 1, QuatScalar::from_real(1.0));
        }
        assert_relative_eq!(simplex_volume(&tet), 1.0 / 6.0, max_relative = 1e-12);

        // degenerate: three collinear points
        let mut degen = FMatrix::zeros(Beta::One, 2, 3);
        degen.set(0, 1, QuatScalar::from_real(1.0));
        degen.set(0, 2, QuatScalar::from_real(2.0));
        assert_eq!(simplex_volume(&degen), 0.0);

        // difference matrix shape check: 4 points in F_2^3 -> 3x3
        let pts = splitmix_fill(Beta::Two, 3, 4, 60);
        let d = difference_matrix(&pts);
        assert_eq!((d.rows(), d.cols()), (3, 3));
        let p0 = pts.get(1, 0);
        assert_eq!(d.get(1, 1), pts.get(1, 2) - p0);
    }

    #[test]
    fn quaternion_matrices_satisfy_the_symplectic_identity() {
        let m = splitmix_fill(Beta::Four, 3, 2, 70);
        assert!(symplectic_deviation(&m) < 1e-14);
        let w = m.gram();
        assert!(symplectic_deviation(&w) < 1e-14);
        // spectral functions preserve the structure
        let h = psd_sqrt(&HermPSD::new(w).unwrap()).unwrap();
        assert!(symplectic_deviation(h.matrix()) < 1e-10);
    }
}
