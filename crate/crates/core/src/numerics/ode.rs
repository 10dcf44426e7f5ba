//! Dormand–Prince 5(4) integrator with continuous (dense) output.
//!
//! States are `DVector<S>` for any nalgebra field `S` whose real field is the
//! toolkit scalar, so real and complex systems share one implementation.

use nalgebra as na;
use na::{ComplexField, DVector};

use crate::scalar::{lit, to_f64, Real};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OdeError {
    #[error("integration became singular at t = {t_reached}")]
    Singular { t_reached: f64 },
    #[error("integration interval is empty")]
    EmptyInterval,
    #[error("step budget of {0} steps exhausted")]
    TooManySteps(usize),
}

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    pub initial_step: Option<T>,
    pub max_step: Option<T>,
    pub max_steps: usize,
    /// Treat the solution as blown up once its max-norm exceeds this bound.
    pub blowup_norm: Option<T>,
}

impl<T: Real> Default for OdeOptions<T> {
    fn default() -> Self {
        Self {
            rel_tol: lit(1e-10),
            abs_tol: lit(1e-12),
            initial_step: None,
            max_step: None,
            max_steps: 1_000_000,
            blowup_norm: None,
        }
    }
}

impl<T: Real> OdeOptions<T> {
    pub fn with_tolerances(mut self, rel_tol: T, abs_tol: T) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_blowup_norm(mut self, bound: T) -> Self {
        self.blowup_norm = Some(bound);
        self
    }

    pub fn with_max_step(mut self, h: T) -> Self {
        self.max_step = Some(h);
        self
    }
}

/// How an integration run ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome<T> {
    Completed,
    Singular { t_reached: T },
}

/// One step of dense output: `y(θ)` on `t_start + θ·h`, `θ ∈ [0,1]`.
#[derive(Debug, Clone)]
struct Segment<T, S: na::Scalar> {
    t_start: T,
    h: T,
    poly: Poly<S>,
}

#[derive(Debug, Clone)]
enum Poly<S: na::Scalar> {
    /// `r1 + θ(r2 + (1-θ)(r3 + θ(r4 + (1-θ)r5)))`
    Nested([DVector<S>; 5]),
    /// `Σ_k a_k θ^k`
    Monomial(Vec<DVector<S>>),
}

/// Time samples with states and a piecewise polynomial interpolant.
#[derive(Debug, Clone)]
pub struct Trajectory<T: Real, S: ComplexField<RealField = T>> {
    grid: Vec<T>,
    states: Vec<DVector<S>>,
    segments: Vec<Segment<T, S>>,
    order: usize,
}

fn scaled<T: Real, S: ComplexField<RealField = T>>(v: &DVector<S>, s: T) -> DVector<S> {
    v * S::from_real(s)
}

impl<T: Real, S: ComplexField<RealField = T>> Trajectory<T, S> {
    /// Cubic Hermite trajectory from samples and derivatives.
    pub fn from_hermite(grid: Vec<T>, states: Vec<DVector<S>>, derivs: &[DVector<S>]) -> Self {
        assert!(grid.len() >= 2 && grid.len() == states.len() && derivs.len() == states.len());
        assert!(grid.windows(2).all(|w| w[1] > w[0]), "grid must be increasing");
        let segments = (0..grid.len() - 1)
            .map(|i| {
                let h = grid[i + 1] - grid[i];
                let ydiff = &states[i + 1] - &states[i];
                let bspl = scaled(&derivs[i], h) - &ydiff;
                let r4 = &ydiff - scaled(&derivs[i + 1], h) - &bspl;
                let zero = DVector::zeros(ydiff.len());
                Segment {
                    t_start: grid[i],
                    h,
                    poly: Poly::Nested([states[i].clone(), ydiff, bspl, r4, zero]),
                }
            })
            .collect();
        Self {
            grid,
            states,
            segments,
            order: 3,
        }
    }

    /// Quintic Hermite trajectory from samples and first and second
    /// derivatives.
    pub fn from_quintic_hermite(
        grid: Vec<T>,
        states: Vec<DVector<S>>,
        d1: &[DVector<S>],
        d2: &[DVector<S>],
    ) -> Self {
        assert!(grid.len() >= 2 && grid.len() == states.len());
        assert!(d1.len() == states.len() && d2.len() == states.len());
        assert!(grid.windows(2).all(|w| w[1] > w[0]), "grid must be increasing");
        let c = |x: f64| T::from_f64(x).expect("representable");
        let segments = (0..grid.len() - 1)
            .map(|i| {
                let h = grid[i + 1] - grid[i];
                let dy = &states[i + 1] - &states[i];
                let (p0, p1) = (scaled(&d1[i], h), scaled(&d1[i + 1], h));
                let (s0, s1) = (scaled(&d2[i], h * h), scaled(&d2[i + 1], h * h));
                let a3 = scaled(&dy, c(10.0)) - scaled(&p0, c(6.0)) - scaled(&p1, c(4.0))
                    - scaled(&s0, c(1.5))
                    + scaled(&s1, c(0.5));
                let a4 = scaled(&dy, c(-15.0)) + scaled(&p0, c(8.0)) + scaled(&p1, c(7.0))
                    + scaled(&s0, c(1.5))
                    - &s1;
                let a5 = scaled(&dy, c(6.0)) - scaled(&p0, c(3.0)) - scaled(&p1, c(3.0))
                    - scaled(&s0, c(0.5))
                    + scaled(&s1, c(0.5));
                Segment {
                    t_start: grid[i],
                    h,
                    poly: Poly::Monomial(vec![states[i].clone(), p0, scaled(&s0, c(0.5)), a3, a4, a5]),
                }
            })
            .collect();
        Self {
            grid,
            states,
            segments,
            order: 5,
        }
    }

    pub fn grid(&self) -> &[T] {
        &self.grid
    }

    pub fn states(&self) -> &[DVector<S>] {
        &self.states
    }

    pub fn start(&self) -> T {
        self.grid[0]
    }

    pub fn end(&self) -> T {
        *self.grid.last().unwrap()
    }

    pub fn dim(&self) -> usize {
        self.states[0].len()
    }

    /// Polynomial order of the interpolant.
    pub fn interpolation_order(&self) -> usize {
        self.order
    }

    pub fn first(&self) -> &DVector<S> {
        &self.states[0]
    }

    pub fn last(&self) -> &DVector<S> {
        self.states.last().unwrap()
    }

    fn locate(&self, t: T) -> Option<(usize, T)> {
        if self.segments.is_empty() || t < self.start() || t > self.end() {
            return None;
        }
        let idx = self.grid.partition_point(|&g| g <= t);
        let i = idx.saturating_sub(1).min(self.segments.len() - 1);
        let seg = &self.segments[i];
        Some((i, (t - seg.t_start) / seg.h))
    }

    /// Dense-output state at `t`; `None` outside `[start, end]`.
    pub fn eval(&self, t: T) -> Option<DVector<S>> {
        let (i, th) = self.locate(t)?;
        match &self.segments[i].poly {
            Poly::Nested([r1, r2, r3, r4, r5]) => {
                let one = T::one();
                let inner = r4 + scaled(r5, one - th);
                let inner = r3 + scaled(&inner, th);
                let inner = r2 + scaled(&inner, one - th);
                Some(r1 + scaled(&inner, th))
            }
            Poly::Monomial(a) => {
                let mut acc = a.last().expect("coefficients").clone();
                for k in (0..a.len() - 1).rev() {
                    acc = scaled(&acc, th) + &a[k];
                }
                Some(acc)
            }
        }
    }

    /// Time derivative of the dense output at `t`.
    pub fn derivative(&self, t: T) -> Option<DVector<S>> {
        let (i, th) = self.locate(t)?;
        let seg = &self.segments[i];
        let one = T::one();
        let dp = match &seg.poly {
            Poly::Nested([_, r2, r3, r4, r5]) => {
                let a = r4 + scaled(r5, one - th);
                let b = r3 + scaled(&a, th);
                let db = &a - scaled(r5, th);
                let c = scaled(&b, one - th);
                let dc = scaled(&db, one - th) - &b;
                let d = r2 + &c;
                d + scaled(&dc, th)
            }
            Poly::Monomial(a) => {
                let n = a.len() - 1;
                let mut acc = scaled(&a[n], T::from_usize(n).expect("small"));
                for k in (1..n).rev() {
                    acc = scaled(&acc, th) + scaled(&a[k], T::from_usize(k).expect("small"));
                }
                acc
            }
        };
        Some(scaled(&dp, one / seg.h))
    }

    /// Joins a trajectory ending at `t*` with one starting at `t*`.
    pub fn join(left: Self, right: Self) -> Self {
        assert!(left.end() == right.start(), "trajectories must meet");
        let mut out = left;
        out.grid.extend_from_slice(&right.grid[1..]);
        out.states.extend(right.states.into_iter().skip(1));
        out.segments.extend(right.segments);
        out.order = out.order.min(right.order);
        out
    }

    /// Sub-trajectory on the samples lying in `[lo, hi]`.
    pub fn restrict(&self, lo: T, hi: T) -> Self {
        let i0 = self.grid.partition_point(|&g| g < lo);
        let i1 = self.grid.partition_point(|&g| g <= hi);
        assert!(i1 > i0 + 1, "restriction must keep at least one segment");
        Self {
            grid: self.grid[i0..i1].to_vec(),
            states: self.states[i0..i1].to_vec(),
            segments: self.segments[i0..i1 - 1].to_vec(),
            order: self.order,
        }
    }
}

// Dormand–Prince tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

fn combo<T: Real, S: ComplexField<RealField = T>>(
    y: &DVector<S>,
    h: T,
    terms: &[(f64, &DVector<S>)],
) -> DVector<S> {
    let mut out = y.clone();
    for &(c, k) in terms {
        if c != 0.0 {
            out.axpy(S::from_real(h * lit::<T>(c)), k, S::one());
        }
    }
    out
}

fn error_norm<T: Real, S: ComplexField<RealField = T>>(
    err: &DVector<S>,
    y0: &DVector<S>,
    y1: &DVector<S>,
    opts: &OdeOptions<T>,
) -> T {
    let n = err.len().max(1);
    let mut acc = T::zero();
    for i in 0..err.len() {
        let sc = opts.abs_tol + opts.rel_tol * y0[i].clone().modulus().max(y1[i].clone().modulus());
        let q = err[i].clone().modulus() / sc;
        acc += q * q;
    }
    (acc / lit::<T>(n as f64)).sqrt()
}

fn max_norm<T: Real, S: ComplexField<RealField = T>>(y: &DVector<S>) -> T {
    y.iter()
        .map(|z| z.clone().modulus())
        .fold(T::zero(), |a, b| if b > a || b != b { b } else { a })
}

fn all_finite<T: Real, S: ComplexField<RealField = T>>(y: &DVector<S>) -> bool {
    y.iter().all(|z| z.clone().modulus().is_finite())
}

fn initial_step<T, S, F>(rhs: &mut F, t0: T, y0: &DVector<S>, f0: &DVector<S>, dir: T, opts: &OdeOptions<T>) -> T
where
    T: Real,
    S: ComplexField<RealField = T>,
    F: FnMut(T, &DVector<S>) -> DVector<S>,
{
    let zero = DVector::zeros(y0.len());
    let d0 = error_norm(y0, y0, &zero, opts);
    let d1 = error_norm(f0, y0, &zero, opts);
    let h0 = if d0 < lit(1e-5) || d1 < lit(1e-5) {
        lit(1e-6)
    } else {
        lit::<T>(0.01) * d0 / d1
    };
    let y1 = combo(y0, h0 * dir, &[(1.0, f0)]);
    let f1 = rhs(t0 + h0 * dir, &y1);
    let d2 = error_norm(&(f1 - f0), y0, &zero, opts) / h0;
    let m = d1.max(d2);
    let h1 = if m <= lit(1e-15) {
        (h0 * lit(1e-3)).max(lit(1e-6))
    } else {
        (lit::<T>(0.01) / m).powf(lit(0.2))
    };
    (h0 * lit(100.0)).min(h1)
}

/// Integrates until `t1` or until the solution blows up.
///
/// Blow-up (step-size underflow or the optional norm bound) is reported as
/// [`Outcome::Singular`] together with the trajectory reached so far.
pub fn integrate_to_blowup<T, S, F>(
    mut rhs: F,
    t0: T,
    y0: DVector<S>,
    t1: T,
    opts: &OdeOptions<T>,
) -> Result<(Trajectory<T, S>, Outcome<T>), OdeError>
where
    T: Real,
    S: ComplexField<RealField = T>,
    F: FnMut(T, &DVector<S>) -> DVector<S>,
{
    if t0 == t1 {
        return Err(OdeError::EmptyInterval);
    }
    let dir = if t1 > t0 { T::one() } else { -T::one() };
    let span = (t1 - t0).abs();
    let mut t = t0;
    let mut y = y0;
    let mut k1 = rhs(t, &y);
    let mut h = match opts.initial_step {
        Some(h) => h.abs(),
        None => initial_step(&mut rhs, t0, &y, &k1, dir, opts),
    }
    .min(span);
    if let Some(hm) = opts.max_step {
        h = h.min(hm);
    }

    let mut grid = vec![t];
    let mut states = vec![y.clone()];
    let mut segments = Vec::new();
    let mut outcome = Outcome::Completed;
    let mut rejected = false;
    let mut steps = 0usize;

    while (t1 - t) * dir > T::zero() {
        steps += 1;
        if steps > opts.max_steps {
            return Err(OdeError::TooManySteps(opts.max_steps));
        }
        let h_floor = lit::<T>(1e-14) * t.abs().max(T::one());
        if h < h_floor {
            outcome = Outcome::Singular { t_reached: t };
            break;
        }
        let last = (t + h * dir - t1) * dir >= T::zero();
        let hs = if last { t1 - t } else { h * dir };

        let k2 = rhs(t + hs * lit(C2), &combo(&y, hs, &[(A21, &k1)]));
        let k3 = rhs(t + hs * lit(C3), &combo(&y, hs, &[(A31, &k1), (A32, &k2)]));
        let k4 = rhs(
            t + hs * lit(C4),
            &combo(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
        );
        let k5 = rhs(
            t + hs * lit(C5),
            &combo(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = rhs(
            t + hs,
            &combo(&y, hs, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let y_new = combo(&y, hs, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = rhs(t + hs, &y_new);
        let err_vec = combo(
            &DVector::zeros(y.len()),
            hs,
            &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)],
        );
        let err = if all_finite(&y_new) && all_finite(&k7) {
            error_norm(&err_vec, &y, &y_new, opts)
        } else {
            T::max_value().unwrap_or(lit(1e300))
        };

        if err <= T::one() {
            let t_new = if last { t1 } else { t + hs };
            let ydiff = &y_new - &y;
            let bspl = scaled(&k1, hs) - &ydiff;
            let r4 = &ydiff - scaled(&k7, hs) - &bspl;
            let r5 = combo(
                &DVector::zeros(y.len()),
                hs,
                &[(D1, &k1), (D3, &k3), (D4, &k4), (D5, &k5), (D6, &k6), (D7, &k7)],
            );
            segments.push(Segment {
                t_start: t,
                h: hs,
                poly: Poly::Nested([y.clone(), ydiff, bspl, r4, r5]),
            });
            t = t_new;
            y = y_new;
            k1 = k7;
            grid.push(t);
            states.push(y.clone());

            if let Some(bound) = opts.blowup_norm {
                if max_norm(&y) > bound {
                    outcome = Outcome::Singular { t_reached: t };
                    break;
                }
            }
            let fac = if err <= lit(1e-30) {
                lit(5.0)
            } else {
                (lit::<T>(0.9) * err.powf(lit(-0.2))).clamp(lit(0.2), lit(5.0))
            };
            h = if rejected { h.min(h * fac) } else { h * fac };
            rejected = false;
        } else {
            let fac = if err.is_finite() {
                (lit::<T>(0.9) * err.powf(lit(-0.2))).clamp(lit(0.1), lit(0.9))
            } else {
                lit(0.1)
            };
            h *= fac;
            rejected = true;
        }
        if let Some(hm) = opts.max_step {
            h = h.min(hm);
        }
    }

    if dir < T::zero() {
        grid.reverse();
        states.reverse();
        segments.reverse();
    }
    let traj = Trajectory {
        grid,
        states,
        segments,
        order: 4,
    };
    Ok((traj, outcome))
}

/// Integrates `y' = rhs(t, y)` from `t0` to `t1`.
///
/// The trajectory grid is increasing regardless of direction.
pub fn ode_integrate<T, S, F>(
    rhs: F,
    t0: T,
    y0: DVector<S>,
    t1: T,
    opts: &OdeOptions<T>,
) -> Result<Trajectory<T, S>, OdeError>
where
    T: Real,
    S: ComplexField<RealField = T>,
    F: FnMut(T, &DVector<S>) -> DVector<S>,
{
    match integrate_to_blowup(rhs, t0, y0, t1, opts)? {
        (traj, Outcome::Completed) => Ok(traj),
        (_, Outcome::Singular { t_reached }) => Err(OdeError::Singular {
            t_reached: to_f64(t_reached),
        }),
    }
}
