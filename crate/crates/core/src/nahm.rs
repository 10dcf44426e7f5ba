//! Nahm triples and solutions: the flow, its conserved quantities and
//! spectral invariant, the SO(3) × SU(n) action, affine reparametrization and
//! residues at simple poles.

use std::sync::Arc;

use nalgebra as na;
use na::Matrix3;
use serde::{Deserialize, Serialize};

use crate::axial::Su3ClosedForm;
use crate::numerics::{
    commutator, integrate_to_blowup, re, unitarity_defect, CMat, CVec, ComplexMatrixExt,
    OdeError, OdeOptions, Outcome, Trajectory, C,
};
use crate::scalar::{lit, to_f64, Real};
use crate::so3rep::{check_homomorphism, decompose_rep, RepDecomposition, RepError, Triple};
use crate::spherical::{ChainBasis, ClosedFormFamily, SphericalError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NahmError {
    #[error("triple is not anti-Hermitian and traceless (deviation {deviation:.3e})")]
    NotSuN { deviation: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not a rotation (orthogonality defect {defect:.3e}, det {det})")]
    NotRotation { defect: f64, det: f64 },
    #[error("matrix is not unitary (defect {defect:.3e})")]
    NotUnitary { defect: f64 },
    #[error("t = {t} lies outside the domain ({lo}, {hi})")]
    OutsideDomain { t: f64, lo: f64, hi: f64 },
    #[error("no simple pole at t = {endpoint}: {reason}")]
    NotSimplePole { endpoint: f64, reason: String },
    #[error("operation needs a closed-form solution")]
    NotClosedForm,
    #[error("malformed solution record: {0}")]
    Malformed(String),
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error(transparent)]
    Rep(#[from] RepError),
    #[error(transparent)]
    Spherical(#[from] SphericalError),
}

/// `(T₁, T₂, T₃)`, a point of `su(n) ⊗ ℝ³`.
#[derive(Debug, Clone, PartialEq)]
pub struct NahmTriple<T: Real> {
    t: Triple<T>,
}

impl<T: Real> NahmTriple<T> {
    /// Checks anti-Hermiticity and tracelessness within `1e-10·max(1, ‖T‖)`.
    pub fn new(t: Triple<T>) -> Result<Self, NahmError> {
        let n = t[0].nrows();
        for m in &t {
            if m.shape() != (n, n) {
                return Err(NahmError::DimensionMismatch {
                    expected: n,
                    found: m.nrows().max(m.ncols()),
                });
            }
        }
        let out = Self { t };
        let dev = out.su_deviation();
        if dev > lit::<T>(1e-10) * out.norm().max(T::one()) {
            return Err(NahmError::NotSuN { deviation: to_f64(dev) });
        }
        Ok(out)
    }

    /// Wraps matrices without validation (residues, intermediate sums).
    pub fn from_raw(t: Triple<T>) -> Self {
        Self { t }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            t: std::array::from_fn(|_| CMat::zeros(n, n)),
        }
    }

    pub fn dim(&self) -> usize {
        self.t[0].nrows()
    }

    pub fn get(&self, i: usize) -> &CMat<T> {
        &self.t[i]
    }

    pub fn as_triple(&self) -> &Triple<T> {
        &self.t
    }

    pub fn into_triple(self) -> Triple<T> {
        self.t
    }

    /// `sqrt(Σ ‖T_i‖²_F)`.
    pub fn norm(&self) -> T {
        self.t.iter().fold(T::zero(), |a, m| a + m.norm_squared()).sqrt()
    }

    /// Largest anti-Hermitian or trace defect over the three components.
    pub fn su_deviation(&self) -> T {
        self.t.iter().fold(T::zero(), |a, m| {
            a.max(m.anti_hermitian_deviation())
                .max(na::ComplexField::modulus(m.trace()))
        })
    }

    pub fn map(&self, f: impl Fn(&CMat<T>) -> CMat<T>) -> Self {
        Self {
            t: std::array::from_fn(|i| f(&self.t[i])),
        }
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|m| m * re(s))
    }

    /// Frobenius distance of the stacked triples.
    pub fn distance(&self, other: &Self) -> T {
        (0..3)
            .fold(T::zero(), |a, i| a + (&self.t[i] - &other.t[i]).norm_squared())
            .sqrt()
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            t: std::array::from_fn(|i| &self.t[i] - &other.t[i]),
        }
    }

    /// Column-major `vec(T₁) ⊕ vec(T₂) ⊕ vec(T₃)`.
    pub fn to_vector(&self) -> CVec<T> {
        let n2 = self.dim() * self.dim();
        CVec::from_fn(3 * n2, |r, _| self.t[r / n2].as_slice()[r % n2])
    }

    pub fn from_vector(n: usize, v: &CVec<T>) -> Self {
        let n2 = n * n;
        assert_eq!(v.len(), 3 * n2, "state length");
        Self {
            t: std::array::from_fn(|i| CMat::from_column_slice(n, n, &v.as_slice()[i * n2..(i + 1) * n2])),
        }
    }

    /// Row-major entries of `T₁, T₂, T₃`, real and imaginary parts interleaved.
    pub fn to_interleaved(&self) -> Vec<f64> {
        let n = self.dim();
        let mut out = Vec::with_capacity(6 * n * n);
        for m in &self.t {
            for r in 0..n {
                for c in 0..n {
                    out.push(to_f64(m[(r, c)].re));
                    out.push(to_f64(m[(r, c)].im));
                }
            }
        }
        out
    }

    pub fn from_interleaved(n: usize, v: &[f64]) -> Result<Self, NahmError> {
        if v.len() != 6 * n * n {
            return Err(NahmError::Malformed(format!("expected {} numbers, got {}", 6 * n * n, v.len())));
        }
        let k = 2 * n * n;
        Ok(Self {
            t: std::array::from_fn(|i| {
                CMat::from_fn(n, n, |r, c| {
                    let o = i * k + 2 * (r * n + c);
                    C::new(lit(v[o]), lit(v[o + 1]))
                })
            }),
        })
    }
}

/// `Ṫ_i = ½ Σ ε_ijk [T_j, T_k]`, i.e. `([T₂,T₃], [T₃,T₁], [T₁,T₂])`.
pub fn nahm_rhs<T: Real>(t: &NahmTriple<T>) -> NahmTriple<T> {
    let m = &t.t;
    NahmTriple {
        t: [
            commutator(&m[1], &m[2]),
            commutator(&m[2], &m[0]),
            commutator(&m[0], &m[1]),
        ],
    }
}

/// `d²T/dt²` along the flow through `t`.
pub fn nahm_second_derivative<T: Real>(t: &NahmTriple<T>) -> NahmTriple<T> {
    let d = nahm_rhs(t);
    let (m, dm) = (&t.t, &d.t);
    NahmTriple {
        t: std::array::from_fn(|i| {
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            commutator(&dm[j], &m[k]) + commutator(&m[j], &dm[k])
        }),
    }
}

/// Quintic Hermite interpolant of flow samples, using the exact first and
/// second derivatives at each sample.
fn flow_interpolant<T: Real>(n: usize, grid: Vec<T>, states: Vec<CVec<T>>) -> Trajectory<T, C<T>> {
    let (mut d1, mut d2) = (Vec::with_capacity(states.len()), Vec::with_capacity(states.len()));
    for v in &states {
        let tr = NahmTriple::from_vector(n, v);
        d1.push(nahm_rhs(&tr).to_vector());
        d2.push(nahm_second_derivative(&tr).to_vector());
    }
    Trajectory::from_quintic_hermite(grid, states, &d1, &d2)
}

/// The five conserved quantities and the traceless matrix `C_ij` built from
/// them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConservedSet<T: Real> {
    /// `C₁ … C₅`.
    pub c: [T; 5],
    /// `tr(T_iT_j) - ⅓ δ_ij Σ_k tr(T_k²)`.
    pub cmatrix: Matrix3<T>,
}

impl<T: Real> ConservedSet<T> {
    /// Recovers `C₁ … C₅` from `C_ij`.
    pub fn from_matrix(cmatrix: Matrix3<T>) -> Self {
        let m = &cmatrix;
        Self {
            c: [
                m[(1, 2)],
                m[(2, 0)],
                m[(0, 1)],
                m[(0, 0)] - m[(1, 1)],
                m[(0, 0)] - m[(2, 2)],
            ],
            cmatrix,
        }
    }

    pub fn max_abs(&self) -> T {
        self.c.iter().fold(T::zero(), |a, c| a.max(c.abs()))
    }

    pub fn max_diff(&self, other: &Self) -> T {
        self.c
            .iter()
            .zip(&other.c)
            .fold(T::zero(), |a, (x, y)| a.max((*x - *y).abs()))
    }
}

pub fn conserved<T: Real>(t: &NahmTriple<T>) -> ConservedSet<T> {
    let tr = |i: usize, j: usize| (&t.t[i] * &t.t[j]).trace().re;
    let mut g = Matrix3::<T>::zeros();
    for i in 0..3 {
        for j in i..3 {
            let v = tr(i, j);
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    let third = g.trace() / lit(3.0);
    for i in 0..3 {
        g[(i, i)] -= third;
    }
    let c = [
        g[(1, 2)],
        g[(2, 0)],
        g[(0, 1)],
        tr(0, 0) - tr(1, 1),
        tr(0, 0) - tr(2, 2),
    ];
    ConservedSet { c, cmatrix: g }
}

/// Coefficients of `tr(T(ζ)²) = Σ_k c_k ζ^k`, `k = 0..4`, where
/// `T(ζ) = (T₁ + iT₂) - 2iT₃ζ + (T₁ - iT₂)ζ²`.
pub fn spectral_coeffs<T: Real>(t: &NahmTriple<T>) -> [C<T>; 5] {
    let s = conserved(t).c;
    let two: T = lit(2.0);
    let four: T = lit(4.0);
    let (c1, c2, c3, c4, c5) = (s[0], s[1], s[2], s[3], s[4]);
    [
        C::new(c4, two * c3),
        C::new(four * c1, -four * c2),
        C::new(four * c5 - two * c4, T::zero()),
        C::new(-four * c1, -four * c2),
        C::new(c4, -two * c3),
    ]
}

fn rotation_defect<T: Real>(a: &Matrix3<T>) -> (T, T) {
    ((a * a.transpose() - Matrix3::identity()).norm(), a.determinant())
}

fn act_unchecked<T: Real>(t: &NahmTriple<T>, a: &Matrix3<T>, u: &CMat<T>) -> NahmTriple<T> {
    let ud = u.adjoint();
    NahmTriple {
        t: std::array::from_fn(|i| {
            let mut m = CMat::zeros(t.dim(), t.dim());
            for j in 0..3 {
                m += &t.t[j] * re(a[(i, j)]);
            }
            u * m * &ud
        }),
    }
}

fn check_unitary<T: Real>(u: &CMat<T>, n: usize) -> Result<(), NahmError> {
    if u.shape() != (n, n) {
        return Err(NahmError::DimensionMismatch {
            expected: n,
            found: u.nrows(),
        });
    }
    let d = unitarity_defect(u);
    if d > lit(1e-10) {
        return Err(NahmError::NotUnitary { defect: to_f64(d) });
    }
    Ok(())
}

/// `(ᴬ_U T)_i = U (Σ_j A_ij T_j) U⁻¹` for `A ∈ SO(3)`, `U` unitary.
pub fn act<T: Real>(t: &NahmTriple<T>, a: &Matrix3<T>, u: &CMat<T>) -> Result<NahmTriple<T>, NahmError> {
    let (defect, det) = rotation_defect(a);
    if defect > lit(1e-10) || (det - T::one()).abs() > lit(1e-10) {
        return Err(NahmError::NotRotation {
            defect: to_f64(defect),
            det: to_f64(det),
        });
    }
    check_unitary(u, t.dim())?;
    Ok(act_unchecked(t, a, u))
}

/// As [`act`] but for all of `O(3)`; orientation-reversing `A` turn Nahm
/// solutions into anti-Nahm solutions.
pub fn act_orthogonal<T: Real>(t: &NahmTriple<T>, a: &Matrix3<T>, u: &CMat<T>) -> Result<NahmTriple<T>, NahmError> {
    let (defect, det) = rotation_defect(a);
    if defect > lit(1e-10) || (det.abs() - T::one()).abs() > lit(1e-10) {
        return Err(NahmError::NotRotation {
            defect: to_f64(defect),
            det: to_f64(det),
        });
    }
    check_unitary(u, t.dim())?;
    Ok(act_unchecked(t, a, u))
}

/// Direction from which an endpoint is approached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Through values `t < t₀`.
    Left,
    /// Through values `t > t₀`.
    Right,
}

impl Side {
    fn flip(self) -> Self {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }

    /// Sign of `t - t₀` on this side.
    fn sign<T: Real>(self) -> T {
        match self {
            Side::Left => -T::one(),
            Side::Right => T::one(),
        }
    }
}

/// How a numerically integrated flow ends on one side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Endpoint {
    /// The requested bound was reached.
    Regular { t: f64 },
    /// The integrator stopped and `‖T‖` exceeded the pole threshold; `t` is
    /// the extrapolated pole location.
    Pole { t: f64 },
    /// The integrator stopped without a clear pole.
    Singular { t: f64 },
}

impl Endpoint {
    pub fn t(&self) -> f64 {
        match *self {
            Endpoint::Regular { t } | Endpoint::Pole { t } | Endpoint::Singular { t } => t,
        }
    }

    pub fn is_pole(&self) -> bool {
        matches!(self, Endpoint::Pole { .. })
    }
}

/// A numerically integrated flow, states stored as [`NahmTriple::to_vector`].
#[derive(Debug, Clone)]
pub struct NumericFlow<T: Real> {
    pub n: usize,
    pub trajectory: Trajectory<T, C<T>>,
    pub left: Endpoint,
    pub right: Endpoint,
}

/// Where the values of a solution come from, before reparametrization.
#[derive(Debug, Clone)]
pub enum Source<T: Real> {
    Chain {
        family: ClosedFormFamily,
        basis: Arc<ChainBasis<T>>,
    },
    Axial(Su3ClosedForm<T>),
    Numeric(Arc<NumericFlow<T>>),
}

/// A solution on an open interval: `τ ↦ U·ᴬ(s·T(sτ + b))·U⁻¹` for a base
/// solution `T`.
#[derive(Debug, Clone)]
pub struct NahmSolution<T: Real> {
    source: Source<T>,
    scale: T,
    shift: T,
    rotation: Matrix3<T>,
    gauge: Option<CMat<T>>,
}

/// Integration settings for [`integrate_flow`].
#[derive(Debug, Clone, Copy)]
pub struct FlowOptions<T> {
    pub ode: OdeOptions<T>,
    /// A stop is classified as a pole only if `‖T‖` exceeds this.
    pub pole_threshold: T,
}

impl<T: Real> Default for FlowOptions<T> {
    fn default() -> Self {
        Self {
            ode: OdeOptions::default()
                .with_tolerances(lit(1e-12), lit(1e-14))
                .with_blowup_norm(lit(1e8)),
            pole_threshold: lit(1e6),
        }
    }
}

fn flow_rhs<T: Real>(n: usize) -> impl Fn(T, &CVec<T>) -> CVec<T> + Clone {
    move |_t, y| nahm_rhs(&NahmTriple::from_vector(n, y)).to_vector()
}

fn classify_end<T: Real>(
    traj: &Trajectory<T, C<T>>,
    outcome: Outcome<T>,
    n: usize,
    bound: T,
    forward: bool,
    opts: &FlowOptions<T>,
) -> Endpoint {
    match outcome {
        Outcome::Completed => Endpoint::Regular { t: to_f64(bound) },
        Outcome::Singular { t_reached } => {
            let y = if forward { traj.last() } else { traj.first() };
            let tr = NahmTriple::from_vector(n, y);
            let norm = tr.norm();
            if norm > opts.pole_threshold {
                // T ≈ R/(t - t₀) gives |t - t₀| ≈ ‖T‖/‖Ṫ‖
                let gap = norm / nahm_rhs(&tr).norm();
                let t0 = if forward { t_reached + gap } else { t_reached - gap };
                Endpoint::Pole { t: to_f64(t0) }
            } else {
                Endpoint::Singular { t: to_f64(t_reached) }
            }
        }
    }
}

/// Integrates Nahm's equations from `seed` at `t_seed` in both directions
/// towards `lo` and `hi`, stopping early at blow-up.
pub fn integrate_flow<T: Real>(
    seed: &NahmTriple<T>,
    t_seed: T,
    lo: T,
    hi: T,
    opts: &FlowOptions<T>,
) -> Result<NahmSolution<T>, NahmError> {
    let n = seed.dim();
    let y0 = seed.to_vector();
    let (fwd, fwd_out) = integrate_to_blowup(flow_rhs(n), t_seed, y0.clone(), hi, &opts.ode)?;
    let (bwd, bwd_out) = integrate_to_blowup(flow_rhs(n), t_seed, y0, lo, &opts.ode)?;
    let right = classify_end(&fwd, fwd_out, n, hi, true, opts);
    let left = classify_end(&bwd, bwd_out, n, lo, false, opts);
    let joined = Trajectory::join(bwd, fwd);
    let trajectory = flow_interpolant(n, joined.grid().to_vec(), joined.states().to_vec());
    Ok(NahmSolution::from_source(Source::Numeric(Arc::new(NumericFlow {
        n,
        trajectory,
        left,
        right,
    }))))
}

/// Residue estimate from samples `ε ↦ R(ε)` on the ladder `ε_k = 10⁻²·2⁻ᵏ`,
/// `k = 0..6`, with a full Richardson tableau in `ε`.
fn richardson<T: Real>(
    endpoint: f64,
    mut sample: impl FnMut(T) -> Result<NahmTriple<T>, NahmError>,
) -> Result<NahmTriple<T>, NahmError> {
    const LEVELS: usize = 7;
    let fail = |reason: String| NahmError::NotSimplePole { endpoint, reason };
    let mut raw = Vec::with_capacity(LEVELS);
    for k in 0..LEVELS {
        raw.push(sample(lit(1e-2 / f64::powi(2.0, k as i32)))?);
    }
    let scale = raw.last().expect("ladder").norm();
    if !(scale > lit(1e-10)) {
        return Err(fail("(t - t0)·T(t) tends to zero".into()));
    }
    // a simple pole makes successive raw estimates differ by O(ε)
    let diffs: Vec<T> = raw.windows(2).map(|w| w[1].distance(&w[0])).collect();
    let floor = scale * lit(1e-12);
    for w in diffs.windows(2) {
        if w[1] > floor && w[1] > w[0] * lit(0.75) {
            return Err(fail(format!(
                "ladder does not converge at first order (differences {:.3e} -> {:.3e})",
                to_f64(w[0]),
                to_f64(w[1])
            )));
        }
    }
    let mut table: Vec<Vec<NahmTriple<T>>> = vec![raw];
    for j in 1..LEVELS {
        let prev = &table[j - 1];
        let p: T = lit(f64::powi(2.0, j as i32));
        let next = (1..prev.len())
            .map(|k| {
                NahmTriple::from_raw(std::array::from_fn(|i| {
                    (prev[k].get(i) * re(p) - prev[k - 1].get(i)) * re(T::one() / (p - T::one()))
                }))
            })
            .collect();
        table.push(next);
    }
    // diagonal entry whose change from its predecessor is smallest
    let diag: Vec<&NahmTriple<T>> = (0..LEVELS).map(|j| table[j].last().expect("row")).collect();
    let best = (1..LEVELS)
        .min_by(|&a, &b| {
            let da = diag[a].distance(diag[a - 1]);
            let db = diag[b].distance(diag[b - 1]);
            da.partial_cmp(&db).expect("finite")
        })
        .expect("levels");
    let r = diag[best].clone();
    // at a regular point (t - t₀)·T(t) is O(ε) and extrapolates to zero
    if r.norm() < table[0][0].norm() * lit(1e-3) {
        return Err(fail("(t - t0)·T(t) tends to zero".into()));
    }
    Ok(r)
}

/// Residue of `f` at a simple pole `t0`, approached from `side`, by
/// Richardson extrapolation of `(t - t₀)·f(t)`.
pub fn extract_residue<T: Real>(
    f: impl Fn(T) -> Result<NahmTriple<T>, NahmError>,
    t0: T,
    side: Side,
) -> Result<NahmTriple<T>, NahmError> {
    let sgn = side.sign::<T>();
    richardson(to_f64(t0), |eps| {
        let t = t0 + sgn * eps;
        Ok(f(t)?.scale(t - t0))
    })
}

/// Residue of a solution of Nahm's equations whose pole location is only
/// approximately known: `t - t₀` is estimated as `∓‖T‖/‖Ṫ‖`.
fn extract_residue_self_located<T: Real>(
    s: &NahmSolution<T>,
    t0: T,
    side: Side,
) -> Result<NahmTriple<T>, NahmError> {
    let sgn = side.sign::<T>();
    richardson(to_f64(t0), |eps| {
        let tr = s.eval(t0 + sgn * eps)?;
        let rate = nahm_rhs(&tr).norm();
        if rate == T::zero() {
            return Ok(NahmTriple::zeros(tr.dim()));
        }
        Ok(tr.scale(sgn * tr.norm() / rate))
    })
}

impl<T: Real> NahmSolution<T> {
    pub fn from_source(source: Source<T>) -> Self {
        Self {
            source,
            scale: T::one(),
            shift: T::zero(),
            rotation: Matrix3::identity(),
            gauge: None,
        }
    }

    pub fn closed_form(family: ClosedFormFamily) -> Self {
        Self::from_source(Source::Chain {
            family,
            basis: Arc::new(ChainBasis::new(family.spec())),
        })
    }

    pub fn axial(form: Su3ClosedForm<T>) -> Self {
        Self::from_source(Source::Axial(form))
    }

    pub fn source(&self) -> &Source<T> {
        &self.source
    }

    pub fn family(&self) -> Option<ClosedFormFamily> {
        match &self.source {
            Source::Chain { family, .. } => Some(*family),
            _ => None,
        }
    }

    pub fn is_closed_form(&self) -> bool {
        !matches!(self.source, Source::Numeric(_))
    }

    pub fn numeric(&self) -> Option<&NumericFlow<T>> {
        match &self.source {
            Source::Numeric(f) => Some(f),
            _ => None,
        }
    }

    pub fn dim(&self) -> usize {
        match &self.source {
            Source::Chain { basis, .. } => basis.spec().total_dim(),
            Source::Axial(_) => 3,
            Source::Numeric(f) => f.n,
        }
    }

    fn base_domain(&self) -> (T, T) {
        match &self.source {
            Source::Chain { family, .. } => {
                let (a, b) = family.domain();
                (lit(a), lit(b))
            }
            Source::Axial(f) => f.domain(),
            Source::Numeric(f) => (lit(f.left.t()), lit(f.right.t())),
        }
    }

    /// Maps a parameter of this solution to the base parameter.
    fn to_base(&self, tau: T) -> T {
        self.scale * tau + self.shift
    }

    fn from_base(&self, t: T) -> T {
        (t - self.shift) / self.scale
    }

    pub fn domain(&self) -> (T, T) {
        let (a, b) = self.base_domain();
        let (x, y) = (self.from_base(a), self.from_base(b));
        if x < y {
            (x, y)
        } else {
            (y, x)
        }
    }

    fn outside(&self, tau: T) -> NahmError {
        let (lo, hi) = self.domain();
        NahmError::OutsideDomain {
            t: to_f64(tau),
            lo: to_f64(lo),
            hi: to_f64(hi),
        }
    }

    fn base_eval(&self, t: T, tau: T) -> Result<NahmTriple<T>, NahmError> {
        match &self.source {
            Source::Chain { family, basis } => {
                let p = family.closed_form(t).map_err(|_| self.outside(tau))?;
                Ok(basis.assemble(&p)?)
            }
            Source::Axial(f) => f.triple(t).map_err(|_| self.outside(tau)),
            Source::Numeric(f) => f
                .trajectory
                .eval(t)
                .map(|v| NahmTriple::from_vector(f.n, &v))
                .ok_or_else(|| self.outside(tau)),
        }
    }

    fn base_derivative(&self, t: T, tau: T) -> Result<NahmTriple<T>, NahmError> {
        match &self.source {
            Source::Chain { family, basis } => {
                let p = family.closed_form_derivative(t).map_err(|_| self.outside(tau))?;
                Ok(basis.assemble(&p)?)
            }
            Source::Axial(f) => f.triple_derivative(t).map_err(|_| self.outside(tau)),
            Source::Numeric(f) => f
                .trajectory
                .derivative(t)
                .map(|v| NahmTriple::from_vector(f.n, &v))
                .ok_or_else(|| self.outside(tau)),
        }
    }

    /// Applies rotation and gauge to a base value (no rescaling).
    fn dress(&self, t: NahmTriple<T>) -> NahmTriple<T> {
        if self.rotation == Matrix3::identity() && self.gauge.is_none() {
            return t;
        }
        let u = self.gauge.clone().unwrap_or_else(|| CMat::identity(t.dim(), t.dim()));
        act_unchecked(&t, &self.rotation, &u)
    }

    pub fn eval(&self, tau: T) -> Result<NahmTriple<T>, NahmError> {
        let (lo, hi) = self.domain();
        if !(tau > lo && tau < hi) {
            return Err(self.outside(tau));
        }
        let base = self.base_eval(self.to_base(tau), tau)?;
        Ok(self.dress(base.scale(self.scale)))
    }

    /// `dT/dτ`: analytic for closed forms, dense output for numeric flows.
    pub fn derivative(&self, tau: T) -> Result<NahmTriple<T>, NahmError> {
        let (lo, hi) = self.domain();
        if !(tau > lo && tau < hi) {
            return Err(self.outside(tau));
        }
        let base = self.base_derivative(self.to_base(tau), tau)?;
        Ok(self.dress(base.scale(self.scale * self.scale)))
    }

    fn residual_with_sign(&self, grid: &[T], sign: T) -> Result<T, NahmError> {
        let mut worst = T::zero();
        for &tau in grid {
            let d = self.derivative(tau)?;
            let r = nahm_rhs(&self.eval(tau)?).scale(sign);
            worst = worst.max(d.distance(&r));
        }
        Ok(worst)
    }

    /// `max_grid ‖dT/dt - nahm_rhs(T)‖`.
    pub fn nahm_residual(&self, grid: &[T]) -> Result<T, NahmError> {
        self.residual_with_sign(grid, T::one())
    }

    /// `max_grid ‖dT/dt + nahm_rhs(T)‖`.
    pub fn anti_nahm_residual(&self, grid: &[T]) -> Result<T, NahmError> {
        self.residual_with_sign(grid, -T::one())
    }

    /// `n` evenly spaced interior points, `margin` away from both ends.
    pub fn interior_grid(&self, points: usize, margin: T) -> Vec<T> {
        let (lo, hi) = self.domain();
        let (a, b) = (lo + margin, hi - margin);
        if points == 1 {
            return vec![(a + b) * lit(0.5)];
        }
        (0..points)
            .map(|i| a + (b - a) * lit(i as f64 / (points - 1) as f64))
            .collect()
    }

    /// `τ ↦ a·T(aτ + b)`.
    pub fn affine_pullback(&self, a: T, b: T) -> Self {
        assert!(a != T::zero(), "affine pullback needs a ≠ 0");
        let mut out = self.clone();
        out.shift = self.scale * b + self.shift;
        out.scale = self.scale * a;
        out
    }

    /// Pullback that puts the domain on `(-1, 1)`.
    pub fn normalized(&self) -> Self {
        let (lo, hi) = self.domain();
        let half: T = lit(0.5);
        self.affine_pullback((hi - lo) * half, (lo + hi) * half)
    }

    fn compose_action(&self, a: &Matrix3<T>, u: &CMat<T>) -> Self {
        let mut out = self.clone();
        out.rotation = a * self.rotation;
        out.gauge = Some(match &self.gauge {
            Some(g) => u * g,
            None => u.clone(),
        });
        out
    }

    /// The solution acted on by `(A, U) ∈ SO(3) × U(n)`.
    pub fn act(&self, a: &Matrix3<T>, u: &CMat<T>) -> Result<Self, NahmError> {
        act(&NahmTriple::zeros(self.dim()), a, u)?;
        Ok(self.compose_action(a, u))
    }

    /// As [`NahmSolution::act`] for any `A ∈ O(3)`.
    pub fn act_orthogonal(&self, a: &Matrix3<T>, u: &CMat<T>) -> Result<Self, NahmError> {
        act_orthogonal(&NahmTriple::zeros(self.dim()), a, u)?;
        Ok(self.compose_action(a, u))
    }

    /// The side of `endpoint` that lies inside the domain.
    pub fn inner_side(&self, endpoint: T) -> Side {
        let (lo, hi) = self.domain();
        if (endpoint - lo).abs() <= (endpoint - hi).abs() {
            Side::Right
        } else {
            Side::Left
        }
    }

    /// Residue at a simple pole: analytic for closed forms, extrapolated for
    /// numeric flows.
    pub fn residue_at(&self, endpoint: T, side: Side) -> Result<NahmTriple<T>, NahmError> {
        let t0 = self.to_base(endpoint);
        let base_side = if self.scale < T::zero() { side.flip() } else { side };
        let not_pole = |reason: &str| NahmError::NotSimplePole {
            endpoint: to_f64(endpoint),
            reason: reason.into(),
        };
        // (τ - τ₀)·s·T(sτ + b) = (t - t₀)·T(t): residues are unchanged
        let base = match &self.source {
            Source::Chain { family, basis } => {
                let p = family
                    .closed_form_residues(to_f64(t0))
                    .map_err(|_| not_pole("not an endpoint of the closed form"))?;
                basis.assemble(&p)?
            }
            Source::Axial(f) => f
                .residue(t0, base_side)
                .map_err(|_| not_pole("not a singular point of the closed form"))?,
            Source::Numeric(_) => {
                let (lo, hi) = self.domain();
                let tol = lit::<T>(1e-6) * (hi - lo);
                let at_pole = |e: Endpoint| e.is_pole() && (lit::<T>(e.t()) - t0).abs() <= tol;
                let f = self.numeric().expect("numeric source");
                if !(at_pole(f.left) || at_pole(f.right)) {
                    return Err(not_pole("the flow has no detected pole there"));
                }
                let r = extract_residue_self_located(self, endpoint, side)?;
                return self.check_residue(endpoint, r);
            }
        };
        Ok(self.dress(base))
    }

    /// Residue by Richardson extrapolation on the solution values, whatever
    /// the source.
    pub fn residue_numeric(&self, endpoint: T, side: Side) -> Result<NahmTriple<T>, NahmError> {
        let r = if self.is_closed_form() {
            extract_residue(|t| self.eval(t), endpoint, side)?
        } else {
            extract_residue_self_located(self, endpoint, side)?
        };
        self.check_residue(endpoint, r)
    }

    fn check_residue(&self, endpoint: T, r: NahmTriple<T>) -> Result<NahmTriple<T>, NahmError> {
        let neg = r.scale(-T::one());
        let res = check_homomorphism(neg.as_triple());
        let bound = lit::<T>(1e-5) * r.norm().powi(2).max(T::one());
        if res > bound {
            return Err(NahmError::NotSimplePole {
                endpoint: to_f64(endpoint),
                reason: format!("residue fails the homomorphism test ({:.3e})", to_f64(res)),
            });
        }
        Ok(r)
    }

    /// Constant term of the Laurent expansion at a pole (closed forms only).
    pub fn laurent_constant(&self, endpoint: T) -> Result<NahmTriple<T>, NahmError> {
        let t0 = self.to_base(endpoint);
        match &self.source {
            Source::Chain { family, basis } => {
                let p = family.laurent_constant(to_f64(t0))?;
                // T(τ) = s·T(t) = R/(τ - τ₀) + s·C₀ + …
                Ok(self.dress(basis.assemble(&p)?.scale(self.scale)))
            }
            _ => Err(NahmError::NotClosedForm),
        }
    }

    /// Decomposition of the so(3) representation `-R` induced at a pole.
    pub fn pole_representation(&self, endpoint: T, side: Side) -> Result<RepDecomposition, NahmError> {
        let r = self.residue_at(endpoint, side)?;
        Ok(decompose_rep(r.scale(-T::one()).as_triple())?)
    }

    /// Conserved quantities at `τ`.
    pub fn conserved_at(&self, tau: T) -> Result<ConservedSet<T>, NahmError> {
        Ok(conserved(&self.eval(tau)?))
    }

    /// Serializable record; numeric flows are sampled on their own grid.
    pub fn to_record(&self) -> SolutionRecord {
        let (lo, hi) = self.domain();
        let mut params = serde_json::Map::new();
        params.insert("scale".into(), to_f64(self.scale).into());
        params.insert("shift".into(), to_f64(self.shift).into());
        if self.rotation != Matrix3::identity() {
            let r: Vec<f64> = (0..9).map(|k| to_f64(self.rotation[(k / 3, k % 3)])).collect();
            params.insert("rotation".into(), r.into());
        }
        if let Some(u) = &self.gauge {
            let v: Vec<f64> = (0..u.nrows())
                .flat_map(|r| (0..u.ncols()).map(move |c| (r, c)))
                .flat_map(|(r, c)| [to_f64(u[(r, c)].re), to_f64(u[(r, c)].im)])
                .collect();
            params.insert("gauge".into(), v.into());
        }
        let (kind, family, grid, samples) = match &self.source {
            Source::Chain { family, .. } => ("closed-form", Some(family.to_string()), None, None),
            Source::Axial(f) => {
                params.insert("K".into(), to_f64(f.k).into());
                params.insert("c".into(), to_f64(f.c).into());
                params.insert("k1".into(), to_f64(f.k1).into());
                params.insert("branch".into(), (f.branch as f64).into());
                ("closed-form", Some("su3-axial".to_string()), None, None)
            }
            Source::Numeric(f) => {
                let mut params = serde_json::Map::new();
                params.insert("left".into(), serde_json::to_value(self.endpoint_in_tau(f.left)).expect("plain data"));
                params.insert("right".into(), serde_json::to_value(self.endpoint_in_tau(f.right)).expect("plain data"));
                let mut grid: Vec<f64> = f.trajectory.grid().iter().map(|&t| to_f64(self.from_base(t))).collect();
                let mut samples: Vec<Vec<f64>> = f
                    .trajectory
                    .states()
                    .iter()
                    .map(|v| self.dress(NahmTriple::from_vector(f.n, v).scale(self.scale)).to_interleaved())
                    .collect();
                if self.scale < T::zero() {
                    grid.reverse();
                    samples.reverse();
                }
                return SolutionRecord {
                    dim: self.dim(),
                    domain: [to_f64(lo), to_f64(hi)],
                    kind: "numeric".into(),
                    family: None,
                    params: Some(serde_json::Value::Object(params)),
                    grid: Some(grid),
                    samples: Some(samples),
                };
            }
        };
        SolutionRecord {
            dim: self.dim(),
            domain: [to_f64(lo), to_f64(hi)],
            kind: kind.into(),
            family,
            params: Some(serde_json::Value::Object(params)),
            grid,
            samples,
        }
    }

    fn endpoint_in_tau(&self, e: Endpoint) -> Endpoint {
        let t = to_f64(self.from_base(lit(e.t())));
        match e {
            Endpoint::Regular { .. } => Endpoint::Regular { t },
            Endpoint::Pole { .. } => Endpoint::Pole { t },
            Endpoint::Singular { .. } => Endpoint::Singular { t },
        }
    }

    /// Rebuilds a solution; numeric records become quintic Hermite
    /// interpolants of the stored samples.
    pub fn from_record(rec: &SolutionRecord) -> Result<Self, NahmError> {
        let bad = |m: &str| NahmError::Malformed(m.into());
        let params = rec.params.as_ref().and_then(|p| p.as_object()).cloned().unwrap_or_default();
        let num = |key: &str| params.get(key).and_then(|v| v.as_f64());
        let vec_of = |key: &str| -> Option<Vec<f64>> {
            params
                .get(key)
                .and_then(|v| v.as_array())
                .map(|a| a.iter().filter_map(|x| x.as_f64()).collect())
        };
        match rec.kind.as_str() {
            "closed-form" => {
                let fam = rec.family.as_deref().ok_or_else(|| bad("closed-form record without family"))?;
                let mut s = if fam == "su3-axial" {
                    let k = num("K").ok_or_else(|| bad("missing K"))?;
                    let c = num("c").ok_or_else(|| bad("missing c"))?;
                    let k1 = num("k1").unwrap_or(0.0);
                    let branch = num("branch").unwrap_or(0.0) as i64;
                    Self::axial(Su3ClosedForm::with_branch(lit(k), lit(c), lit(k1), branch))
                } else {
                    Self::closed_form(fam.parse()?)
                };
                s.scale = lit(num("scale").unwrap_or(1.0));
                s.shift = lit(num("shift").unwrap_or(0.0));
                if let Some(r) = vec_of("rotation") {
                    if r.len() != 9 {
                        return Err(bad("rotation needs 9 entries"));
                    }
                    s.rotation = Matrix3::from_fn(|i, j| lit(r[3 * i + j]));
                }
                if let Some(g) = vec_of("gauge") {
                    let n = s.dim();
                    if g.len() != 2 * n * n {
                        return Err(bad("gauge has the wrong size"));
                    }
                    s.gauge = Some(CMat::from_fn(n, n, |r, c| {
                        let o = 2 * (r * n + c);
                        C::new(lit(g[o]), lit(g[o + 1]))
                    }));
                }
                Ok(s)
            }
            "numeric" => {
                let grid = rec.grid.as_ref().ok_or_else(|| bad("numeric record without grid"))?;
                let samples = rec.samples.as_ref().ok_or_else(|| bad("numeric record without samples"))?;
                if grid.len() != samples.len() || grid.len() < 2 {
                    return Err(bad("grid and samples disagree"));
                }
                let n = rec.dim;
                let states = samples
                    .iter()
                    .map(|s| NahmTriple::<T>::from_interleaved(n, s).map(|tr| tr.to_vector()))
                    .collect::<Result<Vec<_>, _>>()?;
                let endpoint = |key: &str, fallback: f64| -> Endpoint {
                    params
                        .get(key)
                        .and_then(|v| serde_json::from_value(v.clone()).ok())
                        .unwrap_or(Endpoint::Regular { t: fallback })
                };
                let flow = NumericFlow {
                    n,
                    trajectory: flow_interpolant(n, grid.iter().map(|&t| lit(t)).collect(), states),
                    left: endpoint("left", rec.domain[0]),
                    right: endpoint("right", rec.domain[1]),
                };
                Ok(Self::from_source(Source::Numeric(Arc::new(flow))))
            }
            other => Err(bad(&format!("unknown kind `{other}`"))),
        }
    }
}

/// JSON form of a [`NahmSolution`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub dim: usize,
    pub domain: [f64; 2],
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub family: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub params: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub grid: Option<Vec<f64>>,
    /// Per grid point: row-major `T₁, T₂, T₃`, real/imag interleaved.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub samples: Option<Vec<Vec<f64>>>,
}
