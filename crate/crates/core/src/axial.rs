//! Axially symmetric Nahm data: the linearized symmetry condition, the
//! `ad_Y²` criterion, the reduced equations and the SU(3) example with
//! `Y = Y_{½,0}`.

use nalgebra::DVector;

use crate::nahm::{NahmError, NahmTriple, Side};
use crate::numerics::{
    commutator, hermitian_eigen, integrate_to_blowup, im, re, times_i, CMat, ComplexMatrixExt, OdeError,
    OdeOptions, Outcome, Trajectory, C,
};
use crate::scalar::{lit, to_f64, Real};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AxialError {
    #[error("generator is not anti-Hermitian (deviation {0:.3e})")]
    NotAntiHermitian(f64),
    #[error("T3 does not commute with the generator (residual {0:.3e})")]
    GeneratorMismatch(f64),
    #[error("t = {0} is a singular point of the closed form")]
    SingularPoint(f64),
    #[error("state is an equilibrium (z = 0) and fixes no constant of integration")]
    Degenerate,
}

/// `Y ∈ u(n)` generating rotations about the third axis.
#[derive(Debug, Clone, PartialEq)]
pub struct AxialGenerator<T: Real> {
    y: CMat<T>,
}

impl<T: Real> AxialGenerator<T> {
    pub fn new(y: CMat<T>) -> Result<Self, AxialError> {
        let dev = y.anti_hermitian_deviation();
        if !y.is_square() || dev > lit(1e-10) {
            return Err(AxialError::NotAntiHermitian(to_f64(dev)));
        }
        Ok(Self { y })
    }

    pub fn matrix(&self) -> &CMat<T> {
        &self.y
    }

    pub fn dim(&self) -> usize {
        self.y.nrows()
    }
}

/// `Y_{α,β} = diag(αi, βi, -(α+β)i)`.
pub fn y_alpha_beta<T: Real>(alpha: T, beta: T) -> AxialGenerator<T> {
    let d = DVector::from_vec(vec![im(alpha), im(beta), im(-(alpha + beta))]);
    AxialGenerator {
        y: CMat::from_diagonal(&d),
    }
}

/// Max Frobenius residual of `T₁ - [T₂,Y]`, `T₂ - [Y,T₁]` and `[Y,T₃]`.
pub fn check_axial<T: Real>(t: &NahmTriple<T>, y: &AxialGenerator<T>) -> T {
    let y = &y.y;
    let r1 = (t.get(0) - commutator(t.get(1), y)).norm();
    let r2 = (t.get(1) - commutator(y, t.get(0))).norm();
    let r3 = commutator(y, t.get(2)).norm();
    r1.max(r2).max(r3)
}

/// Spectrum of `ad_Y²` on `gl(n, ℂ)`, ascending, and whether `-1` occurs.
///
/// With eigenvalues `iλ_j` of `Y` the spectrum is `{-(λ_i - λ_j)²}`.
pub fn ad_squared_has_minus_one<T: Real>(y: &AxialGenerator<T>) -> (bool, Vec<T>) {
    // Y = iH with H = -iY Hermitian
    let h = times_i(&y.y).map(|z| -z);
    let lambda = hermitian_eigen(&h).expect("anti-Hermitian generator").values;
    let mut spec: Vec<T> = lambda
        .iter()
        .flat_map(|&a| lambda.iter().map(move |&b| -(a - b) * (a - b)))
        .collect();
    spec.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let hit = spec.iter().any(|&v| (v + T::one()).abs() <= lit(1e-10));
    (hit, spec)
}

/// Real dimension of `ker(ad²_{Y_{α,β}} + 1)` on `su(3)`: each of the gaps
/// `α-β`, `2α+β`, `α+2β` of modulus one contributes a complex entry.
pub fn su3_minus_one_dim(alpha: f64, beta: f64) -> usize {
    [alpha - beta, 2.0 * alpha + beta, alpha + 2.0 * beta]
        .iter()
        .filter(|g| (g.abs() - 1.0).abs() <= 1e-10)
        .count()
        * 2
}

/// `(dT₁, dT₃) = ([Y,[T₁,T₃]], [T₁,[Y,T₁]])` with `T₂ = [Y,T₁]` eliminated.
pub fn axial_reduced_rhs<T: Real>(
    t1: &CMat<T>,
    t3: &CMat<T>,
    y: &AxialGenerator<T>,
) -> Result<(CMat<T>, CMat<T>), AxialError> {
    let y = &y.y;
    let mismatch = commutator(y, t3).norm();
    if mismatch > lit::<T>(1e-10) * t3.norm().max(T::one()) {
        return Err(AxialError::GeneratorMismatch(to_f64(mismatch)));
    }
    let d1 = commutator(y, &commutator(t1, t3));
    let d3 = commutator(t1, &commutator(y, t1));
    Ok((d1, d3))
}

/// Reduced SU(3) variables for `Y = Y_{α,β}`. The assembled triple uses
/// the `(½, 0)` Ansatz: `z` in the corner entry of `T₁`, and
/// `T₃ = diag(ai, -(a+b)i, bi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Su3AxialState<T: Real> {
    pub a: T,
    pub b: T,
    pub z: C<T>,
    pub alpha: T,
    pub beta: T,
}

impl<T: Real> Su3AxialState<T> {
    /// State for the `(½, 0)` generator.
    pub fn new(a: T, b: T, z: C<T>) -> Self {
        Self {
            a,
            b,
            z,
            alpha: lit(0.5),
            beta: T::zero(),
        }
    }

    pub fn generator(&self) -> AxialGenerator<T> {
        y_alpha_beta(self.alpha, self.beta)
    }

    pub fn t1(&self) -> CMat<T> {
        let mut m = CMat::zeros(3, 3);
        m[(0, 2)] = self.z;
        m[(2, 0)] = -self.z.conj();
        m
    }

    pub fn t3(&self) -> CMat<T> {
        CMat::from_diagonal(&DVector::from_vec(vec![
            im(self.a),
            im(-(self.a + self.b)),
            im(self.b),
        ]))
    }

    pub fn to_triple(&self) -> NahmTriple<T> {
        let t1 = self.t1();
        let t2 = commutator(self.generator().matrix(), &t1);
        NahmTriple::from_raw([t1, t2, self.t3()])
    }

    /// The gauge-equivalent state with `z ≥ 0`, and the diagonal unitary
    /// `U` with `U·T·U⁻¹` equal to it.
    pub fn canonical(&self) -> (Self, CMat<T>) {
        let r = (self.z.re * self.z.re + self.z.im * self.z.im).sqrt();
        let phi = self.z.im.atan2(self.z.re);
        let half = phi * lit(0.5);
        let u = CMat::from_diagonal(&DVector::from_vec(vec![
            C::new(half.cos(), -half.sin()),
            re(T::one()),
            C::new(half.cos(), half.sin()),
        ]));
        (Self { z: re(r), ..*self }, u)
    }

    pub fn constants(&self) -> AxialConstants<T> {
        AxialConstants::from_state(self)
    }

    /// `(a, b, Re z, Im z)`.
    pub fn to_vec(&self) -> Vec<T> {
        vec![self.a, self.b, self.z.re, self.z.im]
    }

    pub fn from_slice(v: &[T]) -> Self {
        Self::new(v[0], v[1], C::new(v[2], v[3]))
    }
}

/// `(ż, ȧ, ḃ) = ((a-b)z, 2|z|², -2|z|²)`.
pub fn su3_reduced_rhs<T: Real>(s: &Su3AxialState<T>) -> (C<T>, T, T) {
    let z2 = s.z.re * s.z.re + s.z.im * s.z.im;
    let two: T = lit(2.0);
    (s.z * (s.a - s.b), two * z2, -two * z2)
}

/// Integrates the reduced `(½, 0)` system on `(a, b, Re z, Im z)`.
pub fn integrate_su3_reduced<T: Real>(
    seed: &Su3AxialState<T>,
    t0: T,
    t1: T,
    opts: &OdeOptions<T>,
) -> Result<(Trajectory<T, T>, Outcome<T>), OdeError> {
    integrate_to_blowup(
        |_t, y: &DVector<T>| {
            let (dz, da, db) = su3_reduced_rhs(&Su3AxialState::from_slice(y.as_slice()));
            DVector::from_vec(vec![da, db, dz.re, dz.im])
        },
        t0,
        DVector::from_vec(seed.to_vec()),
        t1,
        opts,
    )
}

/// `k₁ = a + b`, `k₂ = a² - k₁a - |z|²` and `K = -4k₂ - k₁²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxialConstants<T> {
    pub k1: T,
    pub k2: T,
    pub big_k: T,
}

impl<T: Real> AxialConstants<T> {
    pub fn from_state(s: &Su3AxialState<T>) -> Self {
        let k1 = s.a + s.b;
        let k2 = s.a * s.a - k1 * s.a - (s.z.re * s.z.re + s.z.im * s.z.im);
        Self {
            k1,
            k2,
            big_k: -lit::<T>(4.0) * k2 - k1 * k1,
        }
    }
}

/// Closed-form solution of the `(½, 0)` system: `A = a - b` solves
/// `Ȧ = A² + K`, `a, b = (k₁ ± A)/2` and `z = ½√(A² + K)`.
///
/// `branch` selects the interval between singular points: for `K > 0` it is
/// `(c + jπ/√K, c + (j+1)π/√K)`; for `K ≤ 0`, `0` is `(c, ∞)` and `-1` is
/// `(-∞, c)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Su3ClosedForm<T> {
    pub k: T,
    pub c: T,
    pub k1: T,
    pub branch: i64,
}

impl<T: Real> Su3ClosedForm<T> {
    pub fn with_branch(k: T, c: T, k1: T, branch: i64) -> Self {
        Self { k, c, k1, branch }
    }

    /// The branch whose interval contains `t`.
    pub fn containing(k: T, c: T, k1: T, t: T) -> Result<Self, AxialError> {
        let mut s = Self::with_branch(k, c, k1, 0);
        if k > T::zero() {
            let period = T::pi() / k.sqrt();
            let x = (t - c) / period;
            let j = x.floor();
            if x - j == T::zero() {
                return Err(AxialError::SingularPoint(to_f64(t)));
            }
            s.branch = to_f64(j) as i64;
        } else if t == c {
            return Err(AxialError::SingularPoint(to_f64(t)));
        } else if t < c {
            s.branch = -1;
        }
        Ok(s)
    }

    /// Recovers `K`, `k₁` and `c` from a state at `t0`.
    pub fn from_state(s: &Su3AxialState<T>, t0: T) -> Result<Self, AxialError> {
        let AxialConstants { k1, big_k: k, .. } = s.constants();
        let a0 = s.a - s.b;
        let c = if k > T::zero() {
            let r = k.sqrt();
            // arccot with values in (0, π)
            let theta = T::frac_pi_2() - (-a0 / r).atan();
            t0 - theta / r
        } else if k == T::zero() {
            if a0 == T::zero() {
                return Err(AxialError::Degenerate);
            }
            t0 + T::one() / a0
        } else {
            let r = (-k).sqrt();
            if a0.abs() <= r {
                return Err(AxialError::Degenerate);
            }
            t0 - (-r / a0).atanh() / r
        };
        Self::containing(k, c, k1, t0)
    }

    pub fn domain(&self) -> (T, T) {
        let j: T = lit(self.branch as f64);
        if self.k > T::zero() {
            let period = T::pi() / self.k.sqrt();
            (self.c + j * period, self.c + (j + T::one()) * period)
        } else if self.branch >= 0 {
            (self.c, lit(f64::INFINITY))
        } else {
            (lit(f64::NEG_INFINITY), self.c)
        }
    }

    fn inside(&self, t: T) -> Result<(), AxialError> {
        let (lo, hi) = self.domain();
        if t > lo && t < hi {
            Ok(())
        } else {
            Err(AxialError::SingularPoint(to_f64(t)))
        }
    }

    /// `A(t)` on any branch (no domain check).
    pub fn big_a(&self, t: T) -> T {
        let x = t - self.c;
        if self.k > T::zero() {
            let r = self.k.sqrt();
            -r / (r * x).tan()
        } else if self.k == T::zero() {
            -T::one() / x
        } else {
            let r = (-self.k).sqrt();
            -r / (r * x).tanh()
        }
    }

    pub fn state(&self, t: T) -> Result<Su3AxialState<T>, AxialError> {
        self.inside(t)?;
        let a = self.big_a(t);
        let half: T = lit(0.5);
        let z = half * (a * a + self.k).max(T::zero()).sqrt();
        Ok(Su3AxialState::new(half * (self.k1 + a), half * (self.k1 - a), re(z)))
    }

    /// `(ż, ȧ, ḃ)` from differentiating the closed form.
    pub fn state_derivative(&self, t: T) -> Result<Su3AxialState<T>, AxialError> {
        let s = self.state(t)?;
        let a = self.big_a(t);
        let da = a * a + self.k;
        let half: T = lit(0.5);
        Ok(Su3AxialState::new(half * da, -half * da, s.z * a))
    }

    pub fn triple(&self, t: T) -> Result<NahmTriple<T>, AxialError> {
        Ok(self.state(t)?.to_triple())
    }

    /// The assembled triple is linear in `(a, b, z)`.
    pub fn triple_derivative(&self, t: T) -> Result<NahmTriple<T>, AxialError> {
        Ok(self.state_derivative(t)?.to_triple())
    }

    /// Residue at a singular point: `A ~ -1/(t - t₀)` on every branch, so
    /// `Res a = -½`, `Res b = ½` and `Res z = ±½` by side.
    pub fn residue(&self, t0: T, side: Side) -> Result<NahmTriple<T>, AxialError> {
        let singular = if self.k > T::zero() {
            let x = (t0 - self.c) * self.k.sqrt() / T::pi();
            (x - x.round()).abs() <= lit(1e-9)
        } else {
            (t0 - self.c).abs() <= lit(1e-12)
        };
        if !singular {
            return Err(AxialError::SingularPoint(to_f64(t0)));
        }
        let half: T = lit(0.5);
        let z = match side {
            Side::Left => -half,
            Side::Right => half,
        };
        Ok(Su3AxialState::new(-half, half, re(z)).to_triple())
    }
}

/// The `(½, 0)` example at `t`: state and assembled triple.
pub fn su3_example_solution<T: Real>(
    k: T,
    c: T,
    t: T,
    k1: T,
) -> Result<(Su3AxialState<T>, NahmTriple<T>), AxialError> {
    let form = Su3ClosedForm::containing(k, c, k1, t)?;
    let s = form.state(t)?;
    Ok((s, s.to_triple()))
}

impl From<AxialError> for NahmError {
    fn from(e: AxialError) -> Self {
        NahmError::Malformed(e.to_string())
    }
}
