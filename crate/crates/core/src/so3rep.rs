//! Representations of so(3): irreducible generator triples, direct sums,
//! Casimir operators and decomposition of arbitrary triples.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra as na;
use serde::{Deserialize, Serialize};

use crate::numerics::{
    commutator, hermitian_eigen, nullspace, re, unitarity_defect, CMat, ComplexMatrixExt,
    C,
};
use crate::scalar::{lit, to_f64, Real};

/// A raw triple of square matrices of equal size.
pub type Triple<T> = [CMat<T>; 3];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RepError {
    #[error("triple is not a representation of so(3) (commutator residual {residual:.3e})")]
    NotARepresentation { residual: f64 },
    #[error("Casimir spectrum is inconsistent: {detail}")]
    InconsistentCasimir { detail: String },
    #[error("generator triple is malformed: {0}")]
    Malformed(String),
}

/// `(ρ(X₁), ρ(X₂), ρ(X₃))` for a representation ρ of so(3).
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorTriple<T: Real> {
    y: Triple<T>,
}

impl<T: Real> GeneratorTriple<T> {
    /// Validates commutators, anti-Hermiticity and tracelessness within 1e-10.
    pub fn new(y: Triple<T>) -> Result<Self, RepError> {
        let n = y[0].nrows();
        if y.iter().any(|m| m.nrows() != n || m.ncols() != n) {
            return Err(RepError::Malformed("matrices must be square of equal size".into()));
        }
        let tol: T = lit(1e-10);
        if y.iter().any(|m| !m.is_anti_hermitian(tol) || !m.is_traceless(tol)) {
            return Err(RepError::Malformed("generators must be anti-Hermitian and traceless".into()));
        }
        let residual = check_homomorphism(&y);
        if residual > tol {
            return Err(RepError::NotARepresentation {
                residual: to_f64(residual),
            });
        }
        Ok(Self { y })
    }

    pub fn dim(&self) -> usize {
        self.y[0].nrows()
    }

    pub fn get(&self, i: usize) -> &CMat<T> {
        &self.y[i]
    }

    pub fn as_triple(&self) -> &Triple<T> {
        &self.y
    }

    pub fn into_triple(self) -> Triple<T> {
        self.y
    }

    pub fn casimir(&self) -> CMat<T> {
        casimir(&self.y)
    }
}

/// The irreducible representation of dimension `n`, highest weight first.
///
/// `Y_j = -i J_j` with `J₃ = diag(s, …, -s)` and a real non-negative raising
/// operator, so that `[Y₁, Y₂] = Y₃`.
pub fn irrep_generators<T: Real>(n: usize) -> GeneratorTriple<T> {
    assert!(n >= 1, "irrep dimension must be positive");
    let s = lit::<T>((n as f64 - 1.0) / 2.0);
    let half: T = lit(0.5);
    let m = |k: usize| s - lit::<T>(k as f64);
    let mut jp = CMat::<T>::zeros(n, n);
    for k in 1..n {
        let mk = m(k);
        jp[(k - 1, k)] = re((s * (s + T::one()) - mk * (mk + T::one())).sqrt());
    }
    let jm = jp.adjoint();
    // Y1 = -i (J+ + J-)/2, Y2 = -(J+ - J-)/2, Y3 = -i J3
    let y1 = (&jp + &jm).map(|z| C::new(z.im, -z.re) * half);
    let y2 = (&jp - &jm).map(|z| -z * half);
    let y3 = CMat::from_diagonal(&na::DVector::from_fn(n, |k, _| C::new(T::zero(), -m(k))));
    GeneratorTriple { y: [y1, y2, y3] }
}

/// `(X_i)_{jk} = -ε_ijk`, the defining representation on ℝ³.
pub fn so3_basis<T: Real>() -> Triple<T> {
    std::array::from_fn(|i| {
        CMat::from_fn(3, 3, |j, k| {
            re(lit::<T>(-crate::numerics::levi_civita(i, j, k) as f64))
        })
    })
}

/// Block-diagonal matrix from square blocks.
pub fn block_diag<T: Real>(blocks: &[&CMat<T>]) -> CMat<T> {
    let n = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = CMat::zeros(n, n);
    let mut o = 0;
    for b in blocks {
        let d = b.nrows();
        out.view_mut((o, o), (d, d)).copy_from(*b);
        o += d;
    }
    out
}

pub fn direct_sum<T: Real>(parts: &[GeneratorTriple<T>]) -> GeneratorTriple<T> {
    assert!(!parts.is_empty(), "direct sum of no parts");
    let y = std::array::from_fn(|i| {
        let blocks: Vec<&CMat<T>> = parts.iter().map(|p| &p.y[i]).collect();
        block_diag(&blocks)
    });
    GeneratorTriple { y }
}

/// `max_{i,j} ‖[Y_i, Y_j] - Σ_k ε_ijk Y_k‖_F`.
pub fn check_homomorphism<T: Real>(y: &Triple<T>) -> T {
    let mut worst = T::zero();
    for (i, j, k) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
        let r = (commutator(&y[i], &y[j]) - &y[k]).norm();
        worst = worst.max(r);
    }
    worst
}

/// `-Σ Y_i²`.
pub fn casimir<T: Real>(y: &Triple<T>) -> CMat<T> {
    -(&y[0] * &y[0] + &y[1] * &y[1] + &y[2] * &y[2])
}

/// Multiset of irreducible dimensions, `dim → multiplicity`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RepDecomposition {
    pub parts: BTreeMap<usize, usize>,
}

impl RepDecomposition {
    pub fn from_pairs(pairs: &[(usize, usize)]) -> Self {
        let mut parts = BTreeMap::new();
        for &(d, m) in pairs {
            if m > 0 {
                *parts.entry(d).or_insert(0) += m;
            }
        }
        Self { parts }
    }

    pub fn dim(&self) -> usize {
        self.parts.iter().map(|(d, m)| d * m).sum()
    }

    pub fn multiplicity(&self, dim: usize) -> usize {
        self.parts.get(&dim).copied().unwrap_or(0)
    }
}

impl fmt::Display for RepDecomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body: Vec<String> = self
            .parts
            .iter()
            .rev()
            .map(|(d, m)| format!("{d}:{m}"))
            .collect();
        write!(f, "{{{}}}", body.join(", "))
    }
}

/// Tolerances for [`decompose_rep_with`].
#[derive(Debug, Clone, Copy)]
pub struct DecomposeOptions {
    /// Allowed commutator residual, relative to `max(1, max_i ‖Y_i‖²)`.
    pub homomorphism_tol: f64,
    /// Absolute tolerance on Casimir eigenvalues.
    pub casimir_tol: f64,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        Self {
            homomorphism_tol: 1e-6,
            casimir_tol: 1e-4,
        }
    }
}

pub fn decompose_rep<T: Real>(y: &Triple<T>) -> Result<RepDecomposition, RepError> {
    decompose_rep_with(y, DecomposeOptions::default())
}

/// Decomposes a (numerically extracted) representation by Casimir clustering.
pub fn decompose_rep_with<T: Real>(
    y: &Triple<T>,
    opts: DecomposeOptions,
) -> Result<RepDecomposition, RepError> {
    let scale = y
        .iter()
        .map(|m| m.norm())
        .fold(T::one(), |a, b| a.max(b * b));
    let residual = check_homomorphism(y);
    if to_f64(residual) > opts.homomorphism_tol * to_f64(scale) {
        return Err(RepError::NotARepresentation {
            residual: to_f64(residual),
        });
    }
    let c = casimir(y);
    let herm = (&c + c.adjoint()) * re(lit::<T>(0.5));
    let eig = hermitian_eigen(&herm).map_err(|e| RepError::Malformed(e.to_string()))?;
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for &lambda in &eig.values {
        let l = to_f64(lambda);
        let m = (4.0 * l + 1.0).max(0.0).sqrt().round().max(1.0) as usize;
        let expected = (m as f64 * m as f64 - 1.0) / 4.0;
        if (l - expected).abs() > opts.casimir_tol {
            return Err(RepError::InconsistentCasimir {
                detail: format!("eigenvalue {l} is not of the form (m²-1)/4"),
            });
        }
        *counts.entry(m).or_insert(0) += 1;
    }
    let mut parts = BTreeMap::new();
    for (m, c) in counts {
        if c % m != 0 {
            return Err(RepError::InconsistentCasimir {
                detail: format!("cluster for dimension {m} has size {c}"),
            });
        }
        parts.insert(m, c / m);
    }
    Ok(RepDecomposition { parts })
}

/// Basis of `{U : U a_i = b_i U, i = 1,2,3}`, each column a column-major `vec(U)`.
pub fn intertwining_space<T: Real>(a: &Triple<T>, b: &Triple<T>) -> CMat<T> {
    let (n, m) = (a[0].nrows(), b[0].nrows());
    let mut sys = CMat::<T>::zeros(3 * m * n, m * n);
    for i in 0..3 {
        // vec(U a) = (aᵀ ⊗ I_m) vec(U), vec(b U) = (I_n ⊗ b) vec(U)
        let block = a[i].transpose().kronecker(&CMat::identity(m, m))
            - CMat::identity(n, n).kronecker(&b[i]);
        sys.view_mut((i * m * n, 0), (m * n, m * n)).copy_from(&block);
    }
    nullspace(&sys, lit(1e-8))
}

/// A unitary `U` with `U a_i U⁻¹ = b_i`, if one exists.
pub fn unitary_equivalence<T: Real>(a: &Triple<T>, b: &Triple<T>, tol: T) -> Option<CMat<T>> {
    let n = a[0].nrows();
    if b[0].nrows() != n {
        return None;
    }
    let basis = intertwining_space(a, b);
    if basis.ncols() == 0 {
        return None;
    }
    // a generic combination of intertwiners is invertible; its polar factor
    // is a unitary intertwiner between unitary representations
    let mut best: Option<(T, CMat<T>)> = None;
    for trial in 0..8 {
        let mut v = basis.column(0).into_owned();
        for c in 1..basis.ncols() {
            let w = (1.7 * (trial * basis.ncols() + c) as f64 + 0.3 * c as f64).cos();
            v += basis.column(c) * re(lit::<T>(w));
        }
        let u = CMat::from_column_slice(n, n, v.as_slice());
        let sv = u.singular_values();
        let cond = sv.min() / sv.max();
        if best.as_ref().map_or(true, |(b, _)| cond > *b) {
            best = Some((cond, u));
        }
    }
    let (_, u) = best?;
    // polar factor u (uᴴu)^{-1/2}
    let e = hermitian_eigen(&(u.adjoint() * &u)).ok()?;
    if e.values[0] <= T::zero() {
        return None;
    }
    let inv_sqrt = na::DVector::from_iterator(n, e.values.iter().map(|&l| re(T::one() / l.sqrt())));
    let polar = &u * &e.vectors * CMat::from_diagonal(&inv_sqrt) * e.vectors.adjoint();
    let ok = (0..3).all(|i| (&polar * &a[i] - &b[i] * &polar).norm() <= tol)
        && unitarity_defect(&polar) <= tol;
    ok.then_some(polar)
}
