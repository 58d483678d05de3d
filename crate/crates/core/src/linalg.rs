//! Dense complex Hermitian kernels: eigendecomposition, null spaces, rank-one
//! extraction and trace inner products.
//!
//! The heavy lifting is delegated to `nalgebra`'s Hermitian eigensolver and
//! SVD. Everything here works directly on complex matrices.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

/// Absolute entrywise tolerance for the Hermitian check, scaled by the largest
/// entry magnitude when that exceeds one.
const HERMITIAN_TOL: f64 = 1e-12;

/// Default relative threshold for the numerical rank in [`null_space_of_columns`].
pub const DEFAULT_RANK_TOL: f64 = 1e-12;

/// A square complex matrix equal to its conjugate transpose.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(ComplexMatrix);

impl HermitianMatrix {
    /// Validates squareness, finiteness and `A = A^H`.
    pub fn new(a: ComplexMatrix) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::InvalidInput(format!(
                "Hermitian matrix must be square, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        check_finite(&a)?;
        let scale = a.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let n = a.nrows();
        for j in 0..n {
            for i in 0..=j {
                if (a[(i, j)] - a[(j, i)].conj()).norm() > HERMITIAN_TOL * scale {
                    return Err(Error::InvalidInput(format!(
                        "matrix is not Hermitian at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self(a))
    }

    /// Builds `(A + A^H) / 2`. For matrices that are Hermitian up to rounding
    /// (congruence products and the like).
    pub fn symmetrize(a: &ComplexMatrix) -> Self {
        assert_eq!(a.nrows(), a.ncols(), "symmetrize needs a square matrix");
        let sym = (a + a.adjoint()).scale(0.5);
        Self(sym)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(ComplexMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(ComplexMatrix::identity(dim, dim))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self(ComplexMatrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(diag[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        }))
    }

    /// `x x^H`.
    pub fn outer(x: &ComplexVector) -> Self {
        Self(x * x.adjoint())
    }

    /// `Σ_k x_k x_k^H`.
    pub fn sum_of_outers<'a>(dim: usize, xs: impl IntoIterator<Item = &'a ComplexVector>) -> Self {
        let mut acc = ComplexMatrix::zeros(dim, dim);
        for x in xs {
            acc += x * x.adjoint();
        }
        Self(acc)
    }

    /// `B^H A B`, symmetrized.
    pub fn congruence(&self, basis: &ComplexMatrix) -> Self {
        Self::symmetrize(&(basis.adjoint() * &self.0 * basis))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.map(|z| z * s))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(&self.0 - &other.0)
    }

    /// Adds `alpha * other` in place.
    pub fn axpy(&mut self, alpha: f64, other: &Self) {
        self.0.zip_apply(&other.0, |a, b| *a += b * alpha);
    }

    /// `Re(x^H A x)`.
    pub fn quad_form(&self, x: &ComplexVector) -> f64 {
        x.dotc(&(&self.0 * x)).re
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }
}

/// Rejects matrices with NaN or infinite entries.
pub fn check_finite(a: &ComplexMatrix) -> Result<()> {
    if a.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput("matrix has non-finite entries".into()))
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Eigenvalues come back in ascending order; column `k` of the returned matrix
/// is the unit eigenvector for eigenvalue `k`.
pub fn hermitian_eig(a: &HermitianMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    let n = a.dim();
    if n == 0 {
        return Err(Error::InvalidInput("eigendecomposition of an empty matrix".into()));
    }
    check_finite(a.as_matrix())?;
    let eig = a.as_matrix().clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

/// Largest eigenvalue of a Hermitian matrix.
pub fn max_eigenvalue(a: &HermitianMatrix) -> Result<f64> {
    let (values, _) = hermitian_eig(a)?;
    Ok(values[values.len() - 1])
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(a: &HermitianMatrix) -> Result<f64> {
    let (values, _) = hermitian_eig(a)?;
    Ok(values[0])
}

/// Orthonormal basis of the orthogonal complement of the column span of `h`.
///
/// The numerical rank counts singular values at or above
/// `rel_tol * σ_max * max(M, K)`. A matrix with no columns yields the identity.
pub fn null_space_of_columns(h: &ComplexMatrix, rel_tol: f64) -> Result<ComplexMatrix> {
    let m = h.nrows();
    let k = h.ncols();
    if m == 0 {
        return Err(Error::InvalidInput("null space needs at least one row".into()));
    }
    check_finite(h)?;
    if k == 0 {
        return Ok(ComplexMatrix::identity(m, m));
    }
    let range = column_range(h, rel_tol);
    let r = range.ncols();
    if r == m {
        return Ok(ComplexMatrix::zeros(m, 0));
    }
    if r == 0 {
        return Ok(ComplexMatrix::identity(m, m));
    }
    // The complement projector has eigenvalue 1 on the null space and 0 on
    // the range; its top M - r eigenvectors are the basis we want.
    let projector = ComplexMatrix::identity(m, m) - &range * range.adjoint();
    let (_, vectors) = hermitian_eig(&HermitianMatrix::symmetrize(&projector))?;
    Ok(vectors.columns(r, m - r).into_owned())
}

/// Numerical rank of `h` under the same threshold as [`null_space_of_columns`].
pub fn numerical_rank(h: &ComplexMatrix, rel_tol: f64) -> usize {
    if h.ncols() == 0 {
        return 0;
    }
    column_range(h, rel_tol).ncols()
}

/// Orthonormal basis of the column span (left singular vectors above threshold).
fn column_range(h: &ComplexMatrix, rel_tol: f64) -> ComplexMatrix {
    let m = h.nrows();
    let k = h.ncols();
    let svd = h.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let sigma_max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let threshold = rel_tol * sigma_max * m.max(k) as f64;
    let keep: Vec<usize> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > 0.0 && s >= threshold)
        .map(|(i, _)| i)
        .collect();
    ComplexMatrix::from_fn(m, keep.len(), |r, c| u[(r, keep[c])])
}

/// Dominant eigenpair of a PSD matrix plus its distance from rank one.
#[derive(Debug, Clone)]
pub struct RankOne {
    pub lambda_max: f64,
    pub direction: ComplexVector,
    /// `1 - λ_max / tr(A)`: zero for an exactly rank-one matrix.
    pub rank_defect: f64,
}

/// Extracts the dominant eigenpair of a PSD matrix.
///
/// A zero matrix returns `λ_max = 0`, `u = e1` and no rank defect.
pub fn dominant_rank_one(a: &HermitianMatrix) -> Result<RankOne> {
    let n = a.dim();
    let (values, vectors) = hermitian_eig(a)?;
    let trace = a.trace();
    let min_eig = values[0];
    if min_eig < -1e-6 * trace.abs() {
        return Err(Error::NotPsd { min_eig, trace });
    }
    if trace <= 0.0 {
        let mut e1 = ComplexVector::zeros(n);
        e1[0] = C64::new(1.0, 0.0);
        return Ok(RankOne {
            lambda_max: 0.0,
            direction: e1,
            rank_defect: 0.0,
        });
    }
    let lambda_max = values[n - 1];
    Ok(RankOne {
        lambda_max,
        direction: vectors.column(n - 1).into_owned(),
        rank_defect: (1.0 - lambda_max / trace).clamp(0.0, 1.0),
    })
}

/// `Re tr(A B)` for Hermitian `A`, `B`.
pub fn frob_inner(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::InvalidInput(format!(
            "dimension mismatch in trace inner product: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(trace_product(a.as_matrix(), b.as_matrix()))
}

/// `Re tr(A B)` for square matrices without the Hermitian check.
pub(crate) fn trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    // tr(AB) = Σ_ij A_ij B_ji
    let n = a.nrows();
    let mut acc = 0.0;
    for j in 0..n {
        for i in 0..n {
            acc += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn lcg_matrix(rows: usize, cols: usize, seed: u64) -> ComplexMatrix {
        let mut state = seed;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        ComplexMatrix::from_fn(rows, cols, |_, _| c(next(), next()))
    }

    fn random_hermitian(n: usize, seed: u64) -> HermitianMatrix {
        HermitianMatrix::symmetrize(&lcg_matrix(n, n, seed))
    }

    #[test]
    fn identity_eigenvalues() {
        let (vals, _) = hermitian_eig(&HermitianMatrix::identity(3)).unwrap();
        for v in vals {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn diagonal_eigenpairs_sorted() {
        let a = HermitianMatrix::from_real_diagonal(&[3.0, 1.0]);
        let (vals, vecs) = hermitian_eig(&a).unwrap();
        assert!((vals[0] - 1.0).abs() < 1e-14 && (vals[1] - 3.0).abs() < 1e-14);
        assert!((vecs[(1, 0)].norm() - 1.0).abs() < 1e-14);
        assert!((vecs[(0, 1)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn random_eig_residual_and_orthonormality() {
        let a = random_hermitian(8, 7);
        let (vals, v) = hermitian_eig(&a).unwrap();
        let lambda = ComplexMatrix::from_fn(8, 8, |i, j| if i == j { c(vals[i], 0.0) } else { c(0.0, 0.0) });
        let residual = (a.as_matrix() * &v - &v * lambda).norm();
        assert!(residual <= 1e-9 * a.frobenius_norm());
        let gram = v.adjoint() * &v - ComplexMatrix::identity(8, 8);
        assert!(gram.norm() <= 1e-10);
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        let sum: f64 = vals.iter().sum();
        assert!((sum - a.trace()).abs() <= 1e-9 * (1.0 + a.trace().abs()));
    }

    #[test]
    fn non_finite_rejected() {
        let mut m = ComplexMatrix::identity(2, 2);
        m[(0, 1)] = c(f64::NAN, 0.0);
        assert!(matches!(HermitianMatrix::new(m.clone()), Err(Error::InvalidInput(_))));
        assert!(null_space_of_columns(&m, DEFAULT_RANK_TOL).is_err());
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = ComplexMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 1.0), c(0.0, 1.0), c(1.0, 0.0)]);
        assert!(HermitianMatrix::new(m).is_err());
    }

    #[test]
    fn null_space_of_canonical_vector() {
        let h = ComplexMatrix::from_column_slice(2, 1, &[c(1.0, 0.0), c(0.0, 0.0)]);
        let n = null_space_of_columns(&h, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(n.shape(), (2, 1));
        assert!(n[(0, 0)].norm() < 1e-15);
        assert!((n[(1, 0)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn null_space_of_full_rank_square_is_empty() {
        let h = lcg_matrix(4, 4, 3);
        let n = null_space_of_columns(&h, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(n.shape(), (4, 0));
    }

    #[test]
    fn null_space_of_no_columns_is_identity() {
        let h = ComplexMatrix::zeros(3, 0);
        let n = null_space_of_columns(&h, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(n, ComplexMatrix::identity(3, 3));
    }

    #[test]
    fn null_space_random_residual() {
        let h = lcg_matrix(6, 2, 11);
        let n = null_space_of_columns(&h, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(n.shape(), (6, 4));
        assert!((h.adjoint() * &n).norm() <= 1e-10);
        assert!((n.adjoint() * &n - ComplexMatrix::identity(4, 4)).norm() <= 1e-10);
    }

    #[test]
    fn null_space_detects_rank_deficiency() {
        let a = lcg_matrix(5, 1, 5);
        let h = ComplexMatrix::from_fn(5, 2, |i, j| if j == 0 { a[(i, 0)] } else { a[(i, 0)] * c(0.0, 2.0) });
        assert_eq!(numerical_rank(&h, DEFAULT_RANK_TOL), 1);
        assert_eq!(null_space_of_columns(&h, DEFAULT_RANK_TOL).unwrap().ncols(), 4);
    }

    #[test]
    fn rank_one_exact() {
        let u = ComplexVector::from_vec(vec![c(0.6, 0.0), c(0.0, 0.8)]);
        let a = HermitianMatrix::outer(&u).scale(2.0);
        let r = dominant_rank_one(&a).unwrap();
        assert!((r.lambda_max - 2.0).abs() < 1e-12);
        assert!(r.rank_defect < 1e-12);
        assert!((r.direction.dotc(&u).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rank_one_of_identity() {
        let r = dominant_rank_one(&HermitianMatrix::identity(2)).unwrap();
        assert!((r.lambda_max - 1.0).abs() < 1e-14);
        assert!((r.rank_defect - 0.5).abs() < 1e-14);
    }

    #[test]
    fn rank_one_of_zero() {
        let r = dominant_rank_one(&HermitianMatrix::zeros(3)).unwrap();
        assert_eq!(r.lambda_max, 0.0);
        assert_eq!(r.rank_defect, 0.0);
        assert_eq!(r.direction[0], c(1.0, 0.0));
    }

    #[test]
    fn rank_one_rejects_indefinite() {
        let a = HermitianMatrix::from_real_diagonal(&[2.0, -1.0]);
        assert!(matches!(dominant_rank_one(&a), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn rank_one_matches_eig_on_random_psd() {
        let g = lcg_matrix(5, 5, 21);
        let a = HermitianMatrix::symmetrize(&(&g * g.adjoint()));
        let r = dominant_rank_one(&a).unwrap();
        let top = max_eigenvalue(&a).unwrap();
        assert!((r.lambda_max - top).abs() <= 1e-12 * top);
        assert!(r.lambda_max >= a.trace() / 5.0);
    }

    #[test]
    fn frob_inner_examples() {
        let i2 = HermitianMatrix::identity(2);
        assert!((frob_inner(&i2, &i2).unwrap() - 2.0).abs() < 1e-15);
        let a = HermitianMatrix::from_real_diagonal(&[1.0, 2.0]);
        let b = HermitianMatrix::from_real_diagonal(&[3.0, 4.0]);
        assert!((frob_inner(&a, &b).unwrap() - 11.0).abs() < 1e-15);
        assert!(frob_inner(&a, &HermitianMatrix::identity(3)).is_err());
    }

    #[test]
    fn frob_inner_matches_entrywise_sum() {
        let a = random_hermitian(5, 1);
        let b = random_hermitian(5, 2);
        let mut oracle = 0.0;
        for i in 0..5 {
            for j in 0..5 {
                oracle += (a.as_matrix()[(i, j)] * b.as_matrix()[(i, j)].conj()).re;
            }
        }
        let got = frob_inner(&a, &b).unwrap();
        assert!((got - oracle).abs() < 1e-12);
        assert!((got - frob_inner(&b, &a).unwrap()).abs() < 1e-12);
        let aa = frob_inner(&a, &a).unwrap();
        assert!((aa - a.frobenius_norm().powi(2)).abs() < 1e-12);
    }
}
