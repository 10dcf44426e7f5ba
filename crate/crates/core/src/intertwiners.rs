//! Equivariant maps `V_n → V_{n+2}` and the identities they satisfy.

use std::collections::BTreeMap;

use crate::numerics::{levi_civita, nullspace, re, CMat, C};
use crate::scalar::{lit, to_f64, Real};
use crate::so3rep::{irrep_generators, Triple};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IntertwinerError {
    #[error("equivariance system has a {dim}-dimensional null space, expected 1")]
    DegenerateNullSpace { dim: usize },
}

/// `B_i^n`, three `(n+2)×n` matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct IntertwinerTriple<T: Real> {
    n: usize,
    b: Triple<T>,
}

impl<T: Real> IntertwinerTriple<T> {
    /// Wraps matrices without checking any identity.
    pub fn from_raw(n: usize, b: Triple<T>) -> Self {
        assert!(b.iter().all(|m| m.shape() == (n + 2, n)), "intertwiner blocks must be (n+2)×n");
        Self { n, b }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize) -> &CMat<T> {
        &self.b[i]
    }

    pub fn as_triple(&self) -> &Triple<T> {
        &self.b
    }
}

/// Linear system `Y_j⁺ B_k - B_k Y_j⁻ - Σ_i ε_ijk B_i = 0` in the entries of
/// `(B₁, B₂, B₃)`, unknown `(k, a, b)` at column `k·P·Q + a·Q + b` for
/// `P = dim⁺`, `Q = dim⁻`.
pub fn equivariance_system<T: Real>(plus: &Triple<T>, minus: &Triple<T>) -> CMat<T> {
    let p = plus[0].nrows();
    let q = minus[0].nrows();
    let idx = |k: usize, a: usize, b: usize| k * p * q + a * q + b;
    let mut sys = CMat::<T>::zeros(9 * p * q, 3 * p * q);
    for j in 0..3 {
        for k in 0..3 {
            for a in 0..p {
                for b in 0..q {
                    let row = ((j * 3 + k) * p + a) * q + b;
                    for c in 0..p {
                        sys[(row, idx(k, c, b))] += plus[j][(a, c)];
                    }
                    for c in 0..q {
                        sys[(row, idx(k, a, c))] -= minus[j][(c, b)];
                    }
                    for i in 0..3 {
                        let e = levi_civita(i, j, k);
                        if e != 0 {
                            sys[(row, idx(i, a, b))] -= re(lit::<T>(e as f64));
                        }
                    }
                }
            }
        }
    }
    sys
}

/// Dimension of the solution space of the equivariance system between the
/// irreducibles of dimensions `m` (target) and `n` (source).
pub fn equivariance_nullity<T: Real>(m: usize, n: usize) -> usize {
    let plus = irrep_generators::<T>(m).into_triple();
    let minus = irrep_generators::<T>(n).into_triple();
    nullspace(&equivariance_system(&plus, &minus), lit::<T>(1e-8)).ncols()
}

pub fn compute_intertwiner<T: Real>(n: usize) -> Result<IntertwinerTriple<T>, IntertwinerError> {
    assert!(n >= 1);
    let p = n + 2;
    let plus = irrep_generators::<T>(p).into_triple();
    let minus = irrep_generators::<T>(n).into_triple();
    let ns = nullspace(&equivariance_system(&plus, &minus), lit::<T>(1e-8));
    if ns.ncols() != 1 {
        return Err(IntertwinerError::DegenerateNullSpace { dim: ns.ncols() });
    }
    let v = ns.column(0);
    let mut b: Triple<T> = std::array::from_fn(|k| CMat::from_fn(p, n, |a, c| v[k * p * n + a * n + c]));

    // Σ B Bᴴ is a multiple of the identity by Schur's lemma
    let gram = b.iter().fold(CMat::<T>::zeros(p, p), |acc, m| acc + m * m.adjoint());
    let scale = (gram.trace().re / lit::<T>(p as f64)).sqrt();

    let modulus = |z: &C<T>| (z.re * z.re + z.im * z.im).sqrt();
    let max = b[2].iter().map(modulus).fold(T::zero(), |a, x| a.max(x));
    let cut = max * lit(1.0 - 1e-8);
    let pivot = (0..p)
        .flat_map(|r| (0..n).map(move |c| (r, c)))
        .find(|&(r, c)| modulus(&b[2][(r, c)]) >= cut)
        .expect("nonzero intertwiner");
    let z = b[2][pivot];
    let phase = z.conj() / modulus(&z);
    for m in b.iter_mut() {
        *m = m.map(|x| x * phase / scale);
    }
    Ok(IntertwinerTriple { n, b })
}

/// Names of the residuals reported by [`verify_identities`].
pub const IDENTITY_NAMES: [&str; 8] = [
    "equivariance",
    "sum_b_bh",
    "sum_bh_b",
    "bb_commutator_plus",
    "bb_commutator_minus",
    "yb_plus",
    "by_minus",
    "vanishing_contraction",
];

/// Frobenius residuals of the matrix identities, keyed by [`IDENTITY_NAMES`].
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport<T> {
    pub n: usize,
    pub residuals: BTreeMap<&'static str, T>,
}

impl<T: Real> IdentityReport<T> {
    pub fn max_residual(&self) -> T {
        self.residuals.values().fold(T::zero(), |a, &b| a.max(b))
    }
}

fn eps_sum<T: Real>(m: &Triple<T>, j: usize, k: usize) -> CMat<T> {
    let mut out = CMat::zeros(m[0].nrows(), m[0].ncols());
    for (i, mi) in m.iter().enumerate() {
        let e = levi_civita(i, j, k);
        if e != 0 {
            out += mi * re(lit::<T>(e as f64));
        }
    }
    out
}

pub fn verify_identities<T: Real>(b: &IntertwinerTriple<T>) -> IdentityReport<T> {
    let n = b.n;
    let p = n + 2;
    let nf: T = lit(n as f64);
    let yp = irrep_generators::<T>(p).into_triple();
    let ym = irrep_generators::<T>(n).into_triple();
    let bb = &b.b;
    let c = |x: T| re(x);
    let mut worst = [T::zero(); 8];
    let mut bump = |slot: usize, m: CMat<T>| worst[slot] = worst[slot].max(m.norm());

    for j in 0..3 {
        for k in 0..3 {
            bump(0, &yp[j] * &bb[k] - &bb[k] * &ym[j] - eps_sum(bb, j, k));
            if j == k {
                continue;
            }
            let two: T = lit(2.0);
            bump(
                3,
                &bb[j] * bb[k].adjoint() - &bb[k] * bb[j].adjoint()
                    + eps_sum(&yp, j, k) * c(two / (nf + T::one())),
            );
            bump(
                4,
                bb[j].adjoint() * &bb[k] - bb[k].adjoint() * &bb[j]
                    - eps_sum(&ym, j, k) * c(two * (nf + two) / (nf * (nf + T::one()))),
            );
            bump(
                5,
                &yp[j] * &bb[k] - &yp[k] * &bb[j] - eps_sum(bb, j, k) * c((nf + lit(3.0)) / two),
            );
            bump(
                6,
                &bb[j] * &ym[k] - &bb[k] * &ym[j] + eps_sum(bb, j, k) * c((nf - T::one()) / two),
            );
        }
    }
    let sum_bbh = (0..3).fold(CMat::<T>::zeros(p, p), |a, i| a + &bb[i] * bb[i].adjoint());
    bump(1, sum_bbh - CMat::identity(p, p));
    let sum_bhb = (0..3).fold(CMat::<T>::zeros(n, n), |a, i| a + bb[i].adjoint() * &bb[i]);
    bump(2, sum_bhb - CMat::identity(n, n) * c((nf + lit(2.0)) / nf));
    let yb = (0..3).fold(CMat::<T>::zeros(p, n), |a, i| a + &yp[i] * &bb[i]);
    let by = (0..3).fold(CMat::<T>::zeros(p, n), |a, i| a + &bb[i] * &ym[i]);
    bump(7, yb);
    bump(7, by);

    IdentityReport {
        n,
        residuals: IDENTITY_NAMES.iter().copied().zip(worst).collect(),
    }
}

/// Coefficients `α±`, `β±` with `Σ ε_ijk B_j B_kᴴ = α⁺ Y_i⁺`,
/// `Σ ε_ijk B_jᴴ B_k = α⁻ Y_i⁻`, `Σ ε_ijk Y_j⁺ B_k = β⁺ B_i` and
/// `Σ ε_ijk B_j Y_k⁻ = β⁻ B_i`.
///
/// A coefficient is `None` when its reference matrix vanishes (`α⁻` for
/// `n = 1`, where `Y⁻ = 0` and the identity holds for every value).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructureConstants<T> {
    pub alpha_plus: Option<T>,
    pub alpha_minus: Option<T>,
    pub beta_plus: Option<T>,
    pub beta_minus: Option<T>,
}

impl<T: Real> StructureConstants<T> {
    /// `(-2/(n+1), 2(n+2)/(n(n+1)), (n+3)/2, -(n-1)/2)`.
    pub fn expected(n: usize) -> [f64; 4] {
        let n = n as f64;
        [
            -2.0 / (n + 1.0),
            2.0 * (n + 2.0) / (n * (n + 1.0)),
            (n + 3.0) / 2.0,
            -(n - 1.0) / 2.0,
        ]
    }

    pub fn as_array(&self) -> [Option<T>; 4] {
        [self.alpha_plus, self.alpha_minus, self.beta_plus, self.beta_minus]
    }
}

fn projection<T: Real>(target: &Triple<T>, reference: &Triple<T>) -> Option<T> {
    let mut num = T::zero();
    let mut den = T::zero();
    for (t, r) in target.iter().zip(reference) {
        num += r.dotc(t).re;
        den += r.norm_squared();
    }
    (den > lit(1e-24)).then(|| num / den)
}

pub fn structure_constants<T: Real>(b: &IntertwinerTriple<T>) -> StructureConstants<T> {
    let n = b.n;
    let yp = irrep_generators::<T>(n + 2).into_triple();
    let ym = irrep_generators::<T>(n).into_triple();
    let bb = &b.b;
    let contract = |f: &dyn Fn(usize, usize) -> CMat<T>, rows: usize, cols: usize| -> Triple<T> {
        std::array::from_fn(|i| {
            let mut out = CMat::zeros(rows, cols);
            for j in 0..3 {
                for k in 0..3 {
                    let e = levi_civita(i, j, k);
                    if e != 0 {
                        out += f(j, k) * re(lit::<T>(e as f64));
                    }
                }
            }
            out
        })
    };
    let p = n + 2;
    let yt_plus = contract(&|j, k| &bb[j] * bb[k].adjoint(), p, p);
    let yt_minus = contract(&|j, k| bb[j].adjoint() * &bb[k], n, n);
    let bt_plus = contract(&|j, k| &yp[j] * &bb[k], p, n);
    let bt_minus = contract(&|j, k| &bb[j] * &ym[k], p, n);
    StructureConstants {
        alpha_plus: projection(&yt_plus, &yp),
        alpha_minus: projection(&yt_minus, &ym),
        beta_plus: projection(&bt_plus, bb),
        beta_minus: projection(&bt_minus, bb),
    }
}

/// Worst deviation of the computed structure constants from their closed
/// forms, skipping undetermined coefficients.
pub fn structure_constant_error<T: Real>(b: &IntertwinerTriple<T>) -> f64 {
    let got = structure_constants(b).as_array();
    let want = StructureConstants::<T>::expected(b.n);
    got.iter()
        .zip(want)
        .filter_map(|(g, w)| g.map(|g| (to_f64(g) - w).abs()))
        .fold(0.0, f64::max)
}
