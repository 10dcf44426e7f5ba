//! Spherically symmetric Nahm data: the chain Ansatz on
//! `V_{n+2k} ⊕ … ⊕ V_{n+2} ⊕ V_n`, its reduced ODEs and the closed-form families.

use std::fmt;
use std::str::FromStr;

use crate::intertwiners::{compute_intertwiner, IntertwinerTriple};
use crate::nahm::NahmTriple;
use crate::numerics::{commutator, levi_civita, ode_integrate, re, CMat, OdeError, OdeOptions, Trajectory};
use crate::scalar::{lit, to_f64, Real};
use crate::so3rep::{irrep_generators, GeneratorTriple, Triple};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SphericalError {
    #[error("profile shape ({found_f} f, {found_g} g) does not match the chain ({expected_f} f, {expected_g} g)")]
    ShapeMismatch {
        expected_f: usize,
        expected_g: usize,
        found_f: usize,
        found_g: usize,
    },
    #[error("t = {t} lies outside the domain (-1, 1)")]
    DomainError { t: f64 },
    #[error("unknown closed-form family `{0}`")]
    UnknownFamily(String),
    #[error("residues are only defined at t = ±1, not at {0}")]
    NotAnEndpoint(f64),
}

/// Chain of irreducibles with bottom dimension `n` and `k` couplings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ChainSpec {
    pub n: usize,
    pub k: usize,
}

impl ChainSpec {
    pub fn new(n: usize, k: usize) -> Self {
        assert!(n >= 1, "bottom dimension must be positive");
        Self { n, k }
    }

    /// Block dimensions, largest first: `[n+2k, …, n+2, n]`.
    pub fn dims(&self) -> Vec<usize> {
        (0..=self.k).map(|bi| self.n + 2 * (self.k - bi)).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.dims().iter().sum()
    }

    /// Number of `f` entries: `k + 1`, or `k` when `f₀` is absent (`n = 1`).
    pub fn f_len(&self) -> usize {
        if self.n == 1 {
            self.k
        } else {
            self.k + 1
        }
    }

    /// Position of `f_a` inside [`ChainProfile::f`].
    fn f_slot(&self, a: usize) -> Option<usize> {
        match self.n {
            1 if a == 0 => None,
            1 => Some(a - 1),
            _ => Some(a),
        }
    }

    /// Row offset of the block of dimension `n + 2a`.
    fn offset(&self, a: usize) -> usize {
        self.dims()[..self.k - a].iter().sum()
    }
}

/// `f_a` (`a = 0..=k`, without `f₀` when `n = 1`) and `g_a` (`a = 0..k`).
#[derive(Debug, Clone, PartialEq)]
pub struct ChainProfile<T> {
    pub f: Vec<T>,
    pub g: Vec<T>,
}

impl<T: Real> ChainProfile<T> {
    pub fn new(f: Vec<T>, g: Vec<T>) -> Self {
        Self { f, g }
    }

    pub fn zeros(spec: ChainSpec) -> Self {
        Self {
            f: vec![T::zero(); spec.f_len()],
            g: vec![T::zero(); spec.k],
        }
    }

    fn check(&self, spec: ChainSpec) -> Result<(), SphericalError> {
        if self.f.len() != spec.f_len() || self.g.len() != spec.k {
            return Err(SphericalError::ShapeMismatch {
                expected_f: spec.f_len(),
                expected_g: spec.k,
                found_f: self.f.len(),
                found_g: self.g.len(),
            });
        }
        Ok(())
    }

    /// `f_a`, zero for the absent `f₀`.
    pub fn f_at(&self, spec: ChainSpec, a: usize) -> T {
        spec.f_slot(a).map_or(T::zero(), |i| self.f[i])
    }

    /// `g_a` with `g_{-1} = g_k = 0`.
    pub fn g_at(&self, a: isize) -> T {
        if a < 0 {
            return T::zero();
        }
        self.g.get(a as usize).copied().unwrap_or_else(T::zero)
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.f
            .iter()
            .zip(&other.f)
            .chain(self.g.iter().zip(&other.g))
            .fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()))
    }

    pub fn to_vec(&self) -> Vec<T> {
        self.f.iter().chain(&self.g).copied().collect()
    }

    pub fn from_slice(spec: ChainSpec, v: &[T]) -> Result<Self, SphericalError> {
        let nf = spec.f_len();
        if v.len() != nf + spec.k {
            return Err(SphericalError::ShapeMismatch {
                expected_f: nf,
                expected_g: spec.k,
                found_f: v.len().min(nf),
                found_g: v.len().saturating_sub(nf),
            });
        }
        Ok(Self::new(v[..nf].to_vec(), v[nf..].to_vec()))
    }
}

/// Irreducible generators and intertwiners for every block of a chain.
#[derive(Debug, Clone)]
pub struct ChainBasis<T: Real> {
    spec: ChainSpec,
    /// Indexed by `a`, block dimension `n + 2a`.
    y: Vec<GeneratorTriple<T>>,
    /// `b[a]` maps `V_{n+2a} → V_{n+2a+2}`.
    b: Vec<IntertwinerTriple<T>>,
}

impl<T: Real> ChainBasis<T> {
    pub fn new(spec: ChainSpec) -> Self {
        let y = (0..=spec.k).map(|a| irrep_generators(spec.n + 2 * a)).collect();
        let b = (0..spec.k)
            .map(|a| compute_intertwiner(spec.n + 2 * a).expect("intertwiner exists for every n"))
            .collect();
        Self { spec, y, b }
    }

    pub fn spec(&self) -> ChainSpec {
        self.spec
    }

    /// The generator triple of the whole chain, block diagonal.
    pub fn generators(&self) -> GeneratorTriple<T> {
        let parts: Vec<GeneratorTriple<T>> = (0..=self.spec.k).rev().map(|a| self.y[a].clone()).collect();
        crate::so3rep::direct_sum(&parts)
    }

    /// Assembles the block tridiagonal triple; linear in the profile.
    pub fn assemble(&self, p: &ChainProfile<T>) -> Result<NahmTriple<T>, SphericalError> {
        p.check(self.spec)?;
        let spec = self.spec;
        let total = spec.total_dim();
        let t: Triple<T> = std::array::from_fn(|i| {
            let mut m = CMat::zeros(total, total);
            for a in 0..=spec.k {
                let d = spec.n + 2 * a;
                let o = spec.offset(a);
                let f = re(p.f_at(spec, a));
                m.view_mut((o, o), (d, d)).copy_from(&(self.y[a].get(i) * f));
                if a < spec.k {
                    // couples block a (below) with block a+1 (above)
                    let up = spec.offset(a + 1);
                    let g = re(p.g[a]);
                    let b = self.b[a].get(i);
                    m.view_mut((up, o), (d + 2, d)).copy_from(&(b * g));
                    m.view_mut((o, up), (d, d + 2)).copy_from(&(-b.adjoint() * g));
                }
            }
            m
        });
        Ok(NahmTriple::from_raw(t))
    }
}

pub fn build_chain<T: Real>(spec: ChainSpec, p: &ChainProfile<T>) -> Result<NahmTriple<T>, SphericalError> {
    p.check(spec)?;
    ChainBasis::new(spec).assemble(p)
}

/// Right-hand side of the reduced chain equations.
pub fn chain_rhs<T: Real>(spec: ChainSpec, p: &ChainProfile<T>) -> Result<ChainProfile<T>, SphericalError> {
    p.check(spec)?;
    let nf: T = lit(spec.n as f64);
    let two: T = lit(2.0);
    let mut out = ChainProfile::zeros(spec);
    for a in 0..=spec.k {
        let af: T = lit(a as f64);
        let m = nf + two * af;
        let fa = p.f_at(spec, a);
        if let Some(slot) = spec.f_slot(a) {
            let below = p.g_at(a as isize - 1);
            let above = p.g_at(a as isize);
            let mut d = fa * fa;
            if a > 0 {
                d += two / (m - T::one()) * below * below;
            }
            d -= two * (m + two) / (m * (m + T::one())) * above * above;
            out.f[slot] = d;
        }
        if a < spec.k {
            let next = p.f_at(spec, a + 1);
            let half: T = lit(0.5);
            out.g[a] = ((m + lit(3.0)) * half * next - (m - T::one()) * half * fa) * p.g[a];
        }
    }
    Ok(out)
}

/// Integrates the chain equations as a real system in the layout of
/// [`ChainProfile::to_vec`].
pub fn integrate_chain<T: Real>(
    spec: ChainSpec,
    seed: &ChainProfile<T>,
    t0: T,
    t1: T,
    opts: &OdeOptions<T>,
) -> Result<Trajectory<T, T>, OdeError> {
    seed.check(spec).expect("seed matches the chain");
    let y0 = nalgebra::DVector::from_vec(seed.to_vec());
    ode_integrate(
        move |_t, y: &nalgebra::DVector<T>| {
            let p = ChainProfile::from_slice(spec, y.as_slice()).expect("state layout");
            nalgebra::DVector::from_vec(chain_rhs(spec, &p).expect("state layout").to_vec())
        },
        t0,
        y0,
        t1,
        opts,
    )
}

/// `max_{i,j} ‖[Y_i, T_j] - Σ_k ε_ijk T_k‖_F`.
pub fn check_spherical<T: Real>(t: &NahmTriple<T>, y: &GeneratorTriple<T>) -> T {
    let mut worst = T::zero();
    for i in 0..3 {
        for j in 0..3 {
            let mut r = commutator(y.get(i), t.get(j));
            for k in 0..3 {
                let e = levi_civita(i, j, k);
                if e != 0 {
                    r -= t.get(k) * re(lit::<T>(e as f64));
                }
            }
            worst = worst.max(r.norm());
        }
    }
    worst
}

/// Number of trivial summands of `V_3 ⊗ V_m ⊗ V_n*` that are not forced to
/// vanish: 1 if `m = n ≥ 2` or `|m - n| = 2`, else 0.
pub fn trivial_summand_count(m: usize, n: usize) -> usize {
    usize::from((m == n && n >= 2) || m.abs_diff(n) == 2)
}

/// Irreducible components of a chain, as sets of block indices `a`.
pub fn irreducible_components<T: Real>(
    spec: ChainSpec,
    p: &ChainProfile<T>,
) -> Result<Vec<Vec<usize>>, SphericalError> {
    p.check(spec)?;
    let cut: T = lit(1e-12);
    let mut out: Vec<Vec<usize>> = vec![vec![0]];
    for a in 0..spec.k {
        if p.g[a].abs() > cut {
            out.last_mut().expect("nonempty").push(a + 1);
        } else {
            out.push(vec![a + 1]);
        }
    }
    Ok(out)
}

/// Splits arbitrary block dimensions into even and odd classes; blocks of
/// different parity never couple, so a mixed list is always reducible.
pub fn parity_classes(dims: &[usize]) -> Vec<Vec<usize>> {
    let (even, odd): (Vec<usize>, Vec<usize>) = (0..dims.len()).partition(|&i| dims[i] % 2 == 0);
    [even, odd].into_iter().filter(|c| !c.is_empty()).collect()
}

/// `(p1·t + p0)/(t² - 1)`, the shape of every closed-form profile entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RationalComponent {
    pub p1: f64,
    pub p0: f64,
}

impl RationalComponent {
    pub const fn new(p1: f64, p0: f64) -> Self {
        Self { p1, p0 }
    }

    pub fn value<T: Real>(&self, t: T) -> T {
        (lit::<T>(self.p1) * t + lit(self.p0)) / (t * t - T::one())
    }

    pub fn derivative<T: Real>(&self, t: T) -> T {
        let d = t * t - T::one();
        let (p1, p0): (T, T) = (lit(self.p1), lit(self.p0));
        -(p1 * t * t + lit::<T>(2.0) * p0 * t + p1) / (d * d)
    }

    /// Residue at `t0 = ±1`.
    pub fn residue(&self, t0: f64) -> f64 {
        (self.p1 * t0 + self.p0) / (2.0 * t0)
    }

    /// Constant term of the Laurent expansion at `t0 = ±1`.
    pub fn laurent_constant(&self, t0: f64) -> f64 {
        (2.0 * self.p1 * t0 - (self.p1 * t0 + self.p0)) / 4.0
    }
}

/// The closed-form spherically symmetric families on `(-1, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClosedFormFamily {
    ThreePlusOne,
    FivePlusThreePlusOne,
    /// `V_{n+2} ⊕ V_n`, `n ≥ 2`.
    NPlus2PlusN(usize),
}

impl ClosedFormFamily {
    pub fn spec(&self) -> ChainSpec {
        match *self {
            Self::ThreePlusOne => ChainSpec::new(1, 1),
            Self::FivePlusThreePlusOne => ChainSpec::new(1, 2),
            Self::NPlus2PlusN(n) => {
                assert!(n >= 2, "(n+2)+n family needs n ≥ 2");
                ChainSpec::new(n, 1)
            }
        }
    }

    pub fn domain(&self) -> (f64, f64) {
        (-1.0, 1.0)
    }

    /// Rank of the monopole produced by the Nahm transform.
    pub fn monopole_rank(&self) -> usize {
        match *self {
            Self::ThreePlusOne => 4,
            Self::FivePlusThreePlusOne => 6,
            Self::NPlus2PlusN(n) => n + 3,
        }
    }

    pub fn components(&self) -> ChainProfile<RationalComponent> {
        match *self {
            Self::ThreePlusOne => ChainProfile {
                f: vec![RationalComponent::new(-1.0, 0.0)],
                g: vec![RationalComponent::new(0.0, -1.0)],
            },
            Self::FivePlusThreePlusOne => ChainProfile {
                f: vec![RationalComponent::new(-1.0, 0.0); 2],
                g: vec![
                    RationalComponent::new(0.0, (8.0f64 / 3.0).sqrt()),
                    RationalComponent::new(0.0, 2.0f64.sqrt()),
                ],
            },
            Self::NPlus2PlusN(n) => {
                let n = n as f64;
                ChainProfile {
                    f: vec![
                        RationalComponent::new(-1.0, -(n + 3.0) / (n + 1.0)),
                        RationalComponent::new(-1.0, -(n - 1.0) / (n + 1.0)),
                    ],
                    g: vec![RationalComponent::new(0.0, (2.0 * n / (n + 1.0)).sqrt())],
                }
            }
        }
    }

    fn map<T: Real>(&self, h: impl Fn(&RationalComponent) -> T) -> ChainProfile<T> {
        let c = self.components();
        ChainProfile {
            f: c.f.iter().map(&h).collect(),
            g: c.g.iter().map(&h).collect(),
        }
    }

    fn check_domain<T: Real>(t: T) -> Result<(), SphericalError> {
        if t.abs() < T::one() {
            Ok(())
        } else {
            Err(SphericalError::DomainError { t: to_f64(t) })
        }
    }

    pub fn closed_form<T: Real>(&self, t: T) -> Result<ChainProfile<T>, SphericalError> {
        Self::check_domain(t)?;
        Ok(self.map(|c| c.value(t)))
    }

    pub fn closed_form_derivative<T: Real>(&self, t: T) -> Result<ChainProfile<T>, SphericalError> {
        Self::check_domain(t)?;
        Ok(self.map(|c| c.derivative(t)))
    }

    /// Residues of the profile at `endpoint = ±1`.
    pub fn closed_form_residues<T: Real>(&self, endpoint: f64) -> Result<ChainProfile<T>, SphericalError> {
        let t0 = Self::endpoint(endpoint)?;
        Ok(self.map(|c| lit(c.residue(t0))))
    }

    /// Constant Laurent term of the profile at `endpoint = ±1`.
    pub fn laurent_constant<T: Real>(&self, endpoint: f64) -> Result<ChainProfile<T>, SphericalError> {
        let t0 = Self::endpoint(endpoint)?;
        Ok(self.map(|c| lit(c.laurent_constant(t0))))
    }

    fn endpoint(e: f64) -> Result<f64, SphericalError> {
        if (e - 1.0).abs() < 1e-12 {
            Ok(1.0)
        } else if (e + 1.0).abs() < 1e-12 {
            Ok(-1.0)
        } else {
            Err(SphericalError::NotAnEndpoint(e))
        }
    }
}

impl fmt::Display for ClosedFormFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::ThreePlusOne => write!(f, "3+1"),
            Self::FivePlusThreePlusOne => write!(f, "5+3+1"),
            Self::NPlus2PlusN(n) => write!(f, "{}+{}", n + 2, n),
        }
    }
}

impl FromStr for ClosedFormFamily {
    type Err = SphericalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || SphericalError::UnknownFamily(s.to_string());
        let parts: Vec<usize> = s
            .trim()
            .split('+')
            .map(|p| p.trim().parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad())?;
        match parts.as_slice() {
            [3, 1] => Ok(Self::ThreePlusOne),
            [5, 3, 1] => Ok(Self::FivePlusThreePlusOne),
            &[m, n] if n >= 2 && m == n + 2 => Ok(Self::NPlus2PlusN(n)),
            _ => Err(bad()),
        }
    }
}
