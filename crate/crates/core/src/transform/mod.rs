//! Numerical Nahm transform: the cokernel of the Dirac operator of a Nahm
//! solution on `(-1, 1)` and the Higgs field it induces.
//!
//! Solutions of `Λ*u = 0` that are L² near both poles are shot inward from
//! Frobenius data at `t = ±1 ∓ ε` and matched at `t = 0`.

mod reference;
mod sweep;

pub use reference::{reference_eigenvalues, reference_higgs, ReferenceFamily};
pub use sweep::{
    fornberg_weights, profile_sweep, rel_err, sweep_solution, tail_fit, transform_datum,
    SweepFailure, SweepOptions, SweepReport, SweepRow,
};

use nalgebra::{ComplexField, DVector};

use crate::nahm::{NahmError, NahmSolution, NahmTriple, Side};
use crate::numerics::{
    cholesky, hermitian_eigen, l2_inner_product, ode_integrate, qr, solve_lower, solve_upper,
    svd_right, CMat, CVec, HermitianEigen, LinalgError, OdeError, OdeOptions, Quadrature, C,
};
use crate::scalar::{lit, to_f64, Real};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TransformError {
    #[error("cokernel has dimension {found}, expected {expected}")]
    RankMismatch { expected: usize, found: usize },
    #[error("matching at t = 0 is ill-conditioned (smallest unmatched singular value {gap:.3e})")]
    NonConvergent { gap: f64 },
    #[error("not pole data on (-1, 1): {0}")]
    NotPoleData(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error(transparent)]
    Nahm(#[from] NahmError),
}

/// `e_a = -iσ_a`, a basis of imaginary quaternions with `e₁e₂ = e₃`.
pub fn quaternion_units<T: Real>() -> [CMat<T>; 3] {
    let (o, z) = (T::one(), T::zero());
    let c = |re: T, im: T| C::new(re, im);
    [
        CMat::from_row_slice(2, 2, &[c(z, z), c(z, -o), c(z, -o), c(z, z)]),
        CMat::from_row_slice(2, 2, &[c(z, z), c(-o, z), c(o, z), c(z, z)]),
        CMat::from_row_slice(2, 2, &[c(z, -o), c(z, z), c(z, z), c(z, o)]),
    ]
}

/// Which operator's L² kernel is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DiracOperator {
    /// `Λ* = i d/dt - Σ (iT_a + x_a) ⊗ e_a`; its kernel is the monopole fibre.
    #[default]
    Adjoint,
    /// `Λ = i d/dt + Σ (iT_a - x_a) ⊗ e_a`, expected to have trivial kernel.
    Forward,
}

/// Local data at one pole.
#[derive(Debug, Clone)]
pub struct IndicialData<T: Real> {
    pub t0: T,
    /// `M = Σ R_a ⊗ e_a` (Hermitian), with the operator sign.
    pub m: CMat<T>,
    /// Constant term `A₀` of the coefficient at the pole.
    pub a0: CMat<T>,
    /// Eigenvalues of `M` ascending, with eigenvectors.
    pub eigen: HermitianEigen<T>,
}

impl<T: Real> IndicialData<T> {
    /// Local data at `t0` for `T(t) = R/(t - t₀) + C₀ + O(t - t₀)`.
    pub fn new(
        t0: T,
        residue: &NahmTriple<T>,
        laurent_constant: &NahmTriple<T>,
        x: [T; 3],
        operator: DiracOperator,
    ) -> Result<Self, TransformError> {
        let m = dirac_coefficient(residue, [T::zero(); 3], operator);
        let a0 = dirac_coefficient(laurent_constant, x, operator);
        let eigen = hermitian_eigen(&m)?;
        Ok(Self { t0, m, a0, eigen })
    }

    pub fn exponents(&self) -> &[T] {
        &self.eigen.values
    }

    /// Indices of exponents `μ > -1/2`.
    pub fn admissible(&self) -> Vec<usize> {
        let cut: T = lit(-0.5 + 1e-9);
        (0..self.eigen.values.len()).filter(|&i| self.eigen.values[i] > cut).collect()
    }
}

/// A Nahm solution on `(-1, 1)` with poles at both ends and a point `x ∈ ℝ³`.
#[derive(Debug, Clone)]
pub struct DiracProblem<T: Real> {
    solution: NahmSolution<T>,
    x: [T; 3],
    operator: DiracOperator,
    units: [CMat<T>; 3],
    /// Indicial data at `-1` and `+1`.
    ends: [IndicialData<T>; 2],
}

impl<T: Real> DiracProblem<T> {
    pub fn new(solution: NahmSolution<T>, x: [T; 3]) -> Result<Self, TransformError> {
        Self::with_operator(solution, x, DiracOperator::Adjoint)
    }

    pub fn with_operator(
        solution: NahmSolution<T>,
        x: [T; 3],
        operator: DiracOperator,
    ) -> Result<Self, TransformError> {
        let (lo, hi) = solution.domain();
        let tol: T = lit(1e-9);
        if (lo + T::one()).abs() > tol || (hi - T::one()).abs() > tol {
            return Err(TransformError::NotPoleData(format!(
                "domain is ({}, {})",
                to_f64(lo),
                to_f64(hi)
            )));
        }
        let end = |t0: T, side: Side| -> Result<IndicialData<T>, TransformError> {
            let r = solution
                .residue_at(t0, side)
                .map_err(|e| TransformError::NotPoleData(e.to_string()))?;
            let c0 = match solution.laurent_constant(t0) {
                Ok(c) => c,
                Err(_) => laurent_constant_numeric(&solution, &r, t0, side)?,
            };
            IndicialData::new(t0, &r, &c0, x, operator)
        };
        let ends = [end(-T::one(), Side::Right)?, end(T::one(), Side::Left)?];
        Ok(Self {
            solution,
            x,
            operator,
            units: quaternion_units(),
            ends,
        })
    }

    pub fn solution(&self) -> &NahmSolution<T> {
        &self.solution
    }

    pub fn x(&self) -> [T; 3] {
        self.x
    }

    pub fn operator(&self) -> DiracOperator {
        self.operator
    }

    /// Size `2n` of the spinor bundle.
    pub fn spinor_dim(&self) -> usize {
        2 * self.solution.dim()
    }

    /// Indicial data at `-1` and `+1`.
    pub fn indicial_data(&self) -> &[IndicialData<T>; 2] {
        &self.ends
    }

    /// Kernel dimension predicted by counting admissible exponents.
    pub fn bookkeeping_rank(&self) -> isize {
        self.ends.iter().map(|e| e.admissible().len() as isize).sum::<isize>()
            - self.spinor_dim() as isize
    }

    /// Expected cokernel dimension: the monopole rank for closed-form
    /// families, otherwise the admissible count.
    pub fn expected_rank(&self) -> usize {
        match (self.operator, self.solution.family()) {
            (DiracOperator::Adjoint, Some(f)) => f.monopole_rank(),
            _ => self.bookkeeping_rank().max(0) as usize,
        }
    }

    /// `C(t)` in `u' = C(t)u`.
    pub fn coefficient(&self, t: T) -> Result<CMat<T>, TransformError> {
        let tr = self.solution.eval(t)?;
        Ok(coefficient_of(&tr, self.x, &self.units, operator_sign(self.operator)))
    }
}

fn operator_sign<T: Real>(op: DiracOperator) -> T {
    match op {
        DiracOperator::Adjoint => T::one(),
        DiracOperator::Forward => -T::one(),
    }
}

/// `C = Σ_a (T_a + i x_a) ⊗ e_a` for the adjoint operator, so that its
/// kernel is `u' = Cu`; the forward operator gives `-C`.
pub fn dirac_coefficient<T: Real>(tr: &NahmTriple<T>, x: [T; 3], operator: DiracOperator) -> CMat<T> {
    coefficient_of(tr, x, &quaternion_units(), operator_sign(operator))
}

/// `u'` for `u` in the kernel of the problem's operator at `t`.
pub fn dirac_rhs<T: Real>(p: &DiracProblem<T>, t: T, u: &CVec<T>) -> Result<CVec<T>, TransformError> {
    Ok(p.coefficient(t)? * u)
}

/// `sign·Σ_a (T_a + i x_a) ⊗ e_a`.
fn coefficient_of<T: Real>(tr: &NahmTriple<T>, x: [T; 3], e: &[CMat<T>; 3], sign: T) -> CMat<T> {
    let n = tr.dim();
    let mut out = CMat::zeros(2 * n, 2 * n);
    for a in 0..3 {
        let ta = tr.get(a);
        for p in 0..n {
            for q in 0..n {
                let mut v = ta[(p, q)];
                if p == q {
                    v += C::new(T::zero(), x[a]);
                }
                if v == C::new(T::zero(), T::zero()) {
                    continue;
                }
                let v = v * sign;
                for i in 0..2 {
                    for j in 0..2 {
                        out[(2 * p + i, 2 * q + j)] += v * e[a][(i, j)];
                    }
                }
            }
        }
    }
    out
}

/// `T(t) - R/(t - t₀)` extrapolated to `t₀` from two offsets.
fn laurent_constant_numeric<T: Real>(
    sol: &NahmSolution<T>,
    r: &NahmTriple<T>,
    t0: T,
    side: Side,
) -> Result<NahmTriple<T>, TransformError> {
    let dir = match side {
        Side::Left => -T::one(),
        Side::Right => T::one(),
    };
    let at = |d: T| -> Result<NahmTriple<T>, TransformError> {
        let t = t0 + dir * d;
        Ok(sol.eval(t)?.sub(&r.scale(T::one() / (t - t0))))
    };
    let h: T = lit(1e-4);
    let (a, b) = (at(h)?, at(h * lit(0.5))?);
    Ok(b.scale(lit(2.0)).sub(&a))
}

/// Numerical settings for the transform.
#[derive(Debug, Clone, Copy)]
pub struct TransformOptions<T> {
    /// Offset from each pole where Frobenius data start.
    pub epsilon: T,
    /// Singular values below this count as matches at `t = 0`.
    pub match_tol: T,
    /// The smallest unmatched singular value must exceed this.
    pub gap_tol: T,
    pub ode: OdeOptions<T>,
    /// Panels of the geometric part `[ε, 0.01]` of each half interval.
    pub geometric_panels: usize,
    /// Panels of the uniform part `[0.01, 1]`.
    pub uniform_panels: usize,
    /// Gauss–Legendre points per panel.
    pub quadrature_order: usize,
}

impl<T: Real> Default for TransformOptions<T> {
    fn default() -> Self {
        Self {
            epsilon: lit(1e-6),
            match_tol: lit(1e-6),
            gap_tol: lit(1e-4),
            ode: OdeOptions::default().with_tolerances(lit(1e-12), lit(1e-14)),
            geometric_panels: 29,
            uniform_panels: 60,
            quadrature_order: 8,
        }
    }
}

impl<T: Real> TransformOptions<T> {
    pub fn with_epsilon(mut self, epsilon: T) -> Self {
        self.epsilon = epsilon;
        self
    }

    /// Breakpoints in the distance `s = |t - t₀|`.
    fn breakpoints(&self) -> Vec<T> {
        let split: T = lit(0.01);
        let (g, u) = (self.geometric_panels.max(1), self.uniform_panels.max(1));
        let ratio = (split / self.epsilon).ln();
        let mut bp: Vec<T> = (0..g)
            .map(|i| self.epsilon * (ratio * lit(i as f64 / g as f64)).exp())
            .collect();
        bp.extend((0..=u).map(|i| split + (T::one() - split) * lit(i as f64 / u as f64)));
        bp
    }
}

/// Admissible solutions shot from one pole, sampled on quadrature nodes.
struct HalfShot<T: Real> {
    /// Solution basis at `t = 0`, orthonormal columns.
    at_zero: CMat<T>,
    /// Distances `s` of the nodes, ascending.
    s: Vec<T>,
    weights: Vec<T>,
    /// `u` and `du/ds` at the nodes, in the basis that equals `at_zero` at `t = 0`.
    values: Vec<CMat<T>>,
    ds: Vec<CMat<T>>,
}

fn flatten<T: Real>(m: &CMat<T>) -> CVec<T> {
    DVector::from_column_slice(m.as_slice())
}

fn unflatten<T: Real>(v: &CVec<T>, rows: usize) -> CMat<T> {
    CMat::from_column_slice(rows, v.len() / rows, v.as_slice())
}

/// Frobenius data `v + εw` for the admissible exponents at one pole.
fn frobenius_start<T: Real>(end: &IndicialData<T>, ds_sign: T, eps: T) -> CMat<T> {
    let adm = end.admissible();
    let vecs = &end.eigen.vectors;
    let mu = &end.eigen.values;
    let dim = vecs.nrows();
    let mut out = CMat::zeros(dim, adm.len());
    for (col, &k) in adm.iter().enumerate() {
        let v = vecs.column(k).into_owned();
        let b = (&end.a0 * &v) * C::new(ds_sign, T::zero());
        let coeff = vecs.adjoint() * b;
        let mut w = CVec::zeros(dim);
        for j in 0..dim {
            let denom = mu[k] + T::one() - mu[j];
            if denom.abs() < lit(1e-8) {
                continue;
            }
            w += vecs.column(j) * (coeff[j] / C::new(denom, T::zero()));
        }
        out.set_column(col, &(v + w * C::new(eps, T::zero())));
    }
    out
}

fn shoot_half<T: Real>(
    problem: &DiracProblem<T>,
    end: usize,
    opts: &TransformOptions<T>,
) -> Result<HalfShot<T>, TransformError> {
    let data = &problem.ends[end];
    // t = t₀ + ds_sign·s
    let ds_sign = if end == 0 { T::one() } else { -T::one() };
    let dim = problem.spinor_dim();
    let bp = opts.breakpoints();
    let (gx, gw) = crate::numerics::gauss_legendre_unit::<T>(opts.quadrature_order);
    let half: T = lit(0.5);

    let mut y = frobenius_start(data, ds_sign, opts.epsilon);
    let (q0, _) = qr(&y);
    y = q0;
    let k = y.ncols();
    let mut s_nodes = Vec::new();
    let mut weights = Vec::new();
    let mut raw_vals: Vec<(usize, CMat<T>, CMat<T>)> = Vec::new();
    let mut rs: Vec<CMat<T>> = Vec::new();
    for (seg, p) in bp.windows(2).enumerate() {
        let (a, b) = (p[0], p[1]);
        let rhs = |s: T, v: &CVec<T>| -> CVec<T> {
            let t = data.t0 + ds_sign * s;
            let c = problem
                .coefficient(t)
                .expect("interior point of the domain");
            let yv = unflatten(v, dim);
            flatten(&((c * yv) * C::new(ds_sign, T::zero())))
        };
        let traj = ode_integrate(rhs, a, flatten(&y), b, &opts.ode)?;
        let (mid, rad) = ((a + b) * half, (b - a) * half);
        for (xi, wi) in gx.iter().zip(&gw) {
            let s = mid + rad * *xi;
            let v = traj.eval(s).expect("node inside the segment");
            let d = traj.derivative(s).expect("node inside the segment");
            s_nodes.push(s);
            weights.push(rad * *wi);
            raw_vals.push((seg, unflatten(&v, dim), unflatten(&d, dim)));
        }
        let (q, r) = qr(&unflatten(traj.last(), dim));
        y = q;
        rs.push(r);
    }
    // Y_seg · P_seg equals the final basis, P_seg = R_seg⁻¹ ⋯ R_last⁻¹.
    let mut p = vec![CMat::identity(k, k); rs.len()];
    let mut acc = CMat::identity(k, k);
    for seg in (0..rs.len()).rev() {
        acc = solve_upper(&rs[seg], &acc);
        p[seg] = acc.clone();
    }
    let mut values = Vec::with_capacity(raw_vals.len());
    let mut ds = Vec::with_capacity(raw_vals.len());
    for (seg, v, d) in raw_vals {
        values.push(v * &p[seg]);
        ds.push(d * &p[seg]);
    }
    Ok(HalfShot {
        at_zero: y,
        s: s_nodes,
        weights,
        values,
        ds,
    })
}

/// Result of matching the two half-shots at `t = 0`.
#[derive(Debug, Clone)]
pub struct Matching<T: Real> {
    /// Singular values of `[Y₊, -Y₋]` at `t = 0`, descending.
    pub singular_values: Vec<T>,
    /// Number of singular values below the match tolerance.
    pub matched: usize,
    /// Smallest unmatched singular value, if any.
    pub gap: Option<T>,
}

fn match_halves<T: Real>(
    left: &HalfShot<T>,
    right: &HalfShot<T>,
    opts: &TransformOptions<T>,
) -> (Matching<T>, CMat<T>, CMat<T>) {
    let (kl, kr) = (left.at_zero.ncols(), right.at_zero.ncols());
    let dim = left.at_zero.nrows();
    let mut m = CMat::zeros(dim, kl + kr);
    m.view_mut((0, 0), (dim, kl)).copy_from(&left.at_zero);
    m.view_mut((0, kl), (dim, kr)).copy_from(&(-&right.at_zero));
    let (sigma, v) = svd_right(&m);
    let matched = sigma.iter().filter(|&&s| s < opts.match_tol).count();
    let gap = (matched < sigma.len()).then(|| sigma[sigma.len() - matched - 1]);
    let idx: Vec<usize> = (sigma.len() - matched..sigma.len()).collect();
    let cl = CMat::from_fn(kl, matched, |r, c| v[(r, idx[c])]);
    let cr = CMat::from_fn(kr, matched, |r, c| v[(kl + r, idx[c])]);
    (
        Matching {
            singular_values: sigma,
            matched,
            gap,
        },
        cl,
        cr,
    )
}

/// Shoots from both poles and reports the matching, without rank checks.
pub fn shoot<T: Real>(
    problem: &DiracProblem<T>,
    opts: &TransformOptions<T>,
) -> Result<Matching<T>, TransformError> {
    let left = shoot_half(problem, 0, opts)?;
    let right = shoot_half(problem, 1, opts)?;
    Ok(match_halves(&left, &right, opts).0)
}

/// An L²-orthonormal basis of the cokernel, sampled on quadrature nodes.
#[derive(Debug, Clone)]
pub struct CokernelBasis<T: Real> {
    pub x: [T; 3],
    /// Nodes (ascending in `t`) and weights on `(-1, 1)`.
    pub quadrature: Quadrature<T>,
    /// `u(t)` at each node, one column per basis element.
    pub values: Vec<CMat<T>>,
    /// `du/dt` at each node.
    pub derivatives: Vec<CMat<T>>,
    pub matching: Matching<T>,
    /// Local exponents at `-1` and `+1`.
    pub exponents: [Vec<T>; 2],
    /// `max |⟨u_i, u_j⟩ - δ_ij|`.
    pub gram_defect: T,
    /// `max ‖u' - Cu‖ / max(1, ‖Cu‖)` over nodes.
    pub residual: T,
}

impl<T: Real> CokernelBasis<T> {
    pub fn rank(&self) -> usize {
        self.values.first().map_or(0, |v| v.ncols())
    }

    /// Samples of basis element `j`.
    pub fn column(&self, j: usize) -> Vec<CVec<T>> {
        self.values.iter().map(|v| v.column(j).into_owned()).collect()
    }

    /// `⟨u_i, u_j⟩` by quadrature.
    pub fn gram(&self) -> Result<CMat<T>, TransformError> {
        let m = self.rank();
        let cols: Vec<_> = (0..m).map(|j| self.column(j)).collect();
        let mut g = CMat::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                g[(i, j)] = l2_inner_product(&cols[i], &cols[j], &self.quadrature)?;
            }
        }
        Ok(g)
    }

    /// `⟨u_i, t·u_j⟩`, the Higgs field with `i` factored out.
    pub fn position_matrix(&self) -> CMat<T> {
        let m = self.rank();
        let mut h = CMat::zeros(m, m);
        for ((u, t), w) in self.values.iter().zip(&self.quadrature.nodes).zip(&self.quadrature.weights) {
            h += (u.adjoint() * u) * C::new(*t * *w, T::zero());
        }
        h
    }
}

fn sample_gram<T: Real>(values: &[CMat<T>], weights: &[T], t: Option<&[T]>) -> CMat<T> {
    let m = values[0].ncols();
    let mut g = CMat::zeros(m, m);
    for (i, (u, w)) in values.iter().zip(weights).enumerate() {
        let f = t.map_or(*w, |t| *w * t[i]);
        g += (u.adjoint() * u) * C::new(f, T::zero());
    }
    g
}

/// Computes an L²-orthonormal basis of `ker Λ*` at the problem's point.
///
/// Fails with [`TransformError::RankMismatch`] unless the dimension equals
/// [`DiracProblem::expected_rank`].
pub fn solve_cokernel<T: Real>(
    problem: &DiracProblem<T>,
    opts: &TransformOptions<T>,
) -> Result<CokernelBasis<T>, TransformError> {
    let left = shoot_half(problem, 0, opts)?;
    let right = shoot_half(problem, 1, opts)?;
    let (matching, cl, cr) = match_halves(&left, &right, opts);
    let expected = problem.expected_rank();
    if matching.matched != expected {
        return Err(TransformError::RankMismatch {
            expected,
            found: matching.matched,
        });
    }
    if let Some(g) = matching.gap {
        if g < opts.gap_tol {
            return Err(TransformError::NonConvergent { gap: to_f64(g) });
        }
    }
    // t ascending: left half (t = -1 + s), then the right half reversed (t = 1 - s).
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let mut values = Vec::new();
    let mut derivatives = Vec::new();
    for i in 0..left.s.len() {
        nodes.push(-T::one() + left.s[i]);
        weights.push(left.weights[i]);
        values.push(&left.values[i] * &cl);
        derivatives.push(&left.ds[i] * &cl);
    }
    for i in (0..right.s.len()).rev() {
        nodes.push(T::one() - right.s[i]);
        weights.push(right.weights[i]);
        values.push(&right.values[i] * &cr);
        derivatives.push(-(&right.ds[i] * &cr));
    }
    if expected > 0 {
        let l = cholesky(&sample_gram(&values, &weights, None))?;
        // u ← u·L⁻ᴴ
        let m = l.nrows();
        let linv_h = solve_lower(&l, &CMat::identity(m, m)).adjoint();
        for v in values.iter_mut().chain(derivatives.iter_mut()) {
            *v = &*v * &linv_h;
        }
    }
    let quadrature = Quadrature { nodes, weights };
    let mut residual = T::zero();
    for ((t, u), d) in quadrature.nodes.iter().zip(&values).zip(&derivatives) {
        let cu = problem.coefficient(*t)? * u;
        residual = residual.max((d - &cu).norm() / cu.norm().max(T::one()));
    }
    let mut basis = CokernelBasis {
        x: problem.x,
        quadrature,
        values,
        derivatives,
        matching,
        exponents: [
            problem.ends[0].eigen.values.clone(),
            problem.ends[1].eigen.values.clone(),
        ],
        gram_defect: T::zero(),
        residual,
    };
    if expected > 0 {
        let g = basis.gram()?;
        let m = g.nrows();
        basis.gram_defect = (g - CMat::identity(m, m)).iter().fold(T::zero(), |a, z| a.max(z.modulus()));
    }
    Ok(basis)
}

/// Higgs field eigenvalues at one point, `i` factored out.
#[derive(Debug, Clone, PartialEq)]
pub struct HiggsSample<T> {
    pub r: T,
    /// Eigenvalues of `⟨u, t u⟩`, ascending.
    pub raw_eigenvalues: Vec<T>,
    pub trace: T,
    /// Eigenvalues with the trace part removed, ascending.
    pub eigenvalues: Vec<T>,
    /// `Σ λ²` over the traceless eigenvalues.
    pub normsq: T,
    /// `‖H - Hᴴ‖` before symmetrization.
    pub hermiticity_defect: T,
    /// Energy density; filled in by sweeps.
    pub energy: Option<T>,
}

pub fn higgs<T: Real>(basis: &CokernelBasis<T>) -> Result<HiggsSample<T>, TransformError> {
    let h = basis.position_matrix();
    let defect = (&h - h.adjoint()).norm();
    let eig = hermitian_eigen(&((&h + h.adjoint()) * C::new(lit(0.5), T::zero())))?;
    let m = eig.values.len();
    let trace = eig.values.iter().fold(T::zero(), |a, &b| a + b);
    let shift = if m > 0 { trace / lit(m as f64) } else { T::zero() };
    let eigenvalues: Vec<T> = eig.values.iter().map(|&v| v - shift).collect();
    let normsq = eigenvalues.iter().fold(T::zero(), |a, &b| a + b * b);
    let x = basis.x;
    Ok(HiggsSample {
        r: (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt(),
        raw_eigenvalues: eig.values,
        trace,
        eigenvalues,
        normsq,
        hermiticity_defect: defect,
        energy: None,
    })
}

/// `solve_cokernel` followed by `higgs`.
pub fn higgs_at<T: Real>(
    solution: &NahmSolution<T>,
    x: [T; 3],
    opts: &TransformOptions<T>,
) -> Result<HiggsSample<T>, TransformError> {
    let problem = DiracProblem::new(solution.clone(), x)?;
    higgs(&solve_cokernel(&problem, opts)?)
}

/// `max_t |det Φ(t) - 1|` for the fundamental matrix with `Φ(a) = I`, on
/// `points` evenly spaced values of `[a, b]`. `tr C = 0`, so `det Φ ≡ 1`.
pub fn wronskian_drift<T: Real>(
    problem: &DiracProblem<T>,
    a: T,
    b: T,
    points: usize,
    opts: &TransformOptions<T>,
) -> Result<T, TransformError> {
    let dim = problem.spinor_dim();
    let rhs = |t: T, v: &CVec<T>| -> CVec<T> {
        let c = problem.coefficient(t).expect("interior point of the domain");
        flatten(&(c * unflatten(v, dim)))
    };
    let traj = ode_integrate(rhs, a, flatten(&CMat::identity(dim, dim)), b, &opts.ode)?;
    let mut worst = T::zero();
    for i in 0..points {
        let t = if i + 1 == points {
            b
        } else {
            a + (b - a) * lit(i as f64 / (points - 1).max(1) as f64)
        };
        let phi = unflatten(&traj.eval(t).expect("inside the trajectory"), dim);
        worst = worst.max((phi.determinant() - C::new(T::one(), T::zero())).modulus());
    }
    Ok(worst)
}
