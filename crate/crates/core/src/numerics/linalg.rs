//! Dense complex linear algebra on top of nalgebra.

use nalgebra as na;

use super::{CMat, C};
use crate::scalar::{lit, to_f64, Real};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinalgError {
    #[error("matrix is not Hermitian (normalized deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },
    #[error("sampled functions do not share the quadrature grid ({expected} nodes, got {found})")]
    GridMismatch { expected: usize, found: usize },
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
}

/// Predicates and norms used throughout for triples of su(n) matrices.
pub trait ComplexMatrixExt<T: Real> {
    /// `‖m + mᴴ‖_F`.
    fn anti_hermitian_deviation(&self) -> T;
    /// `‖m - mᴴ‖_F`.
    fn hermitian_deviation(&self) -> T;
    fn is_anti_hermitian(&self, tol: T) -> bool;
    fn is_traceless(&self, tol: T) -> bool;
    fn frobenius(&self) -> T;
}

impl<T: Real> ComplexMatrixExt<T> for CMat<T> {
    fn anti_hermitian_deviation(&self) -> T {
        (self + self.adjoint()).norm()
    }

    fn hermitian_deviation(&self) -> T {
        (self - self.adjoint()).norm()
    }

    fn is_anti_hermitian(&self, tol: T) -> bool {
        self.is_square() && self.anti_hermitian_deviation() <= tol
    }

    fn is_traceless(&self, tol: T) -> bool {
        self.is_square() && na::ComplexField::modulus(self.trace()) <= tol
    }

    fn frobenius(&self) -> T {
        self.norm()
    }
}

/// `[a, b] = ab - ba`.
pub fn commutator<T: Real>(a: &CMat<T>, b: &CMat<T>) -> CMat<T> {
    a * b - b * a
}

/// Levi-Civita symbol on indices `0..3`.
pub fn levi_civita(i: usize, j: usize, k: usize) -> i32 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1,
        _ => 0,
    }
}

/// Kronecker product, `a` as the outer factor.
pub fn kron<T: Real>(a: &CMat<T>, b: &CMat<T>) -> CMat<T> {
    a.kronecker(b)
}

/// `i·m`.
pub fn times_i<T: Real>(m: &CMat<T>) -> CMat<T> {
    m.map(|z| C::new(-z.im, z.re))
}

pub fn real_scale<T: Real>(m: &CMat<T>, s: T) -> CMat<T> {
    m.map(|z| z * s)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen<T: Real> {
    pub values: Vec<T>,
    /// Columns are the eigenvectors, in the order of `values`.
    pub vectors: CMat<T>,
}

impl<T: Real> HermitianEigen<T> {
    pub fn reconstruct(&self) -> CMat<T> {
        let d = CMat::from_diagonal(&na::DVector::from_iterator(
            self.values.len(),
            self.values.iter().map(|&v| C::new(v, T::zero())),
        ));
        &self.vectors * d * self.vectors.adjoint()
    }
}

pub const TOL_HERM: f64 = 1e-10;

pub fn hermitian_eigen<T: Real>(m: &CMat<T>) -> Result<HermitianEigen<T>, LinalgError> {
    let scale = m.norm().max(T::one());
    let deviation = m.hermitian_deviation() / scale;
    if !m.is_square() || deviation > lit(TOL_HERM) {
        return Err(LinalgError::NotHermitian {
            deviation: to_f64(deviation),
        });
    }
    let sym = (m + m.adjoint()) * C::new(lit::<T>(0.5), T::zero());
    let eig = na::SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMat::from_fn(m.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(HermitianEigen { values, vectors })
}

/// Singular values (descending) and a full right-singular basis.
///
/// Wide matrices are zero-padded to square first so that the returned `v`
/// always has `ncols` columns; padding adds exact zero singular values and
/// leaves the null space unchanged.
pub fn svd_right<T: Real>(m: &CMat<T>) -> (Vec<T>, CMat<T>) {
    let (rows, cols) = m.shape();
    let work = if rows < cols {
        let mut p = CMat::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = work.svd(false, true);
    let vt = svd.v_t.expect("requested v_t");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .unwrap()
    });
    let sigma = order.iter().map(|&i| svd.singular_values[i]).collect();
    let v = CMat::from_fn(cols, order.len(), |r, c| vt[(order[c], r)].conj());
    (sigma, v)
}

/// Orthonormal basis (as columns) of the right null space of `m`.
pub fn nullspace<T: Real>(m: &CMat<T>, tol: T) -> CMat<T> {
    let cols = m.ncols();
    if m.nrows() == 0 {
        return CMat::identity(cols, cols);
    }
    let (sigma, v) = svd_right(m);
    let cutoff = tol * sigma.first().copied().unwrap_or_else(T::zero);
    let null: Vec<usize> = (0..sigma.len()).filter(|&i| sigma[i] <= cutoff).collect();
    CMat::from_fn(cols, null.len(), |r, c| v[(r, null[c])])
}

/// Lower Cholesky factor of a Hermitian positive-definite matrix.
pub fn cholesky<T: Real>(m: &CMat<T>) -> Result<CMat<T>, LinalgError> {
    let sym = (m + m.adjoint()) * C::new(lit::<T>(0.5), T::zero());
    na::Cholesky::new(sym)
        .map(|c| c.l())
        .ok_or(LinalgError::NotPositiveDefinite)
}

/// Solves `l x = b` for lower-triangular `l`.
pub fn solve_lower<T: Real>(l: &CMat<T>, b: &CMat<T>) -> CMat<T> {
    l.solve_lower_triangular(b)
        .expect("nonsingular triangular factor")
}

/// Solves `u x = b` for upper-triangular `u`.
pub fn solve_upper<T: Real>(u: &CMat<T>, b: &CMat<T>) -> CMat<T> {
    u.solve_upper_triangular(b)
        .expect("nonsingular triangular factor")
}

/// Thin QR factorization `m = q r`.
pub fn qr<T: Real>(m: &CMat<T>) -> (CMat<T>, CMat<T>) {
    let qr = m.clone().qr();
    (qr.q(), qr.r())
}

/// Distance of `u` from the unitary group, `‖uuᴴ - I‖_F`.
pub fn unitarity_defect<T: Real>(u: &CMat<T>) -> T {
    let n = u.nrows();
    (u * u.adjoint() - CMat::identity(n, n)).norm()
}
