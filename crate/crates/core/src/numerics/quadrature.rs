//! Composite Gauss–Legendre quadrature and the L² pairing of sampled functions.

use super::linalg::LinalgError;
use super::{CVec, C};
use crate::scalar::{lit, Real};

/// Nodes and weights of a composite rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadrature<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

/// `P_n(x)` and `P_n'(x)`.
fn legendre<T: Real>(n: usize, x: T) -> (T, T) {
    let (mut p0, mut p1) = (T::one(), x);
    for k in 2..=n {
        let kf: T = lit(k as f64);
        let p2 = ((kf + kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 1 {
        return (x, T::one());
    }
    (p1, lit::<T>(n as f64) * (x * p1 - p0) / (x * x - T::one()))
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, ascending.
pub fn gauss_legendre_unit<T: Real>(order: usize) -> (Vec<T>, Vec<T>) {
    assert!(order >= 1);
    let n = order;
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    for i in 0..n.div_ceil(2) {
        let guess = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut x: T = if n == 1 { T::zero() } else { lit(guess) };
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() <= lit::<T>(1e-16) * (T::one() + x.abs()) {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        let w = lit::<T>(2.0) / ((T::one() - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

impl<T: Real> Quadrature<T> {
    /// Gauss–Legendre rule of `order` points on every panel between breakpoints.
    pub fn gauss_legendre(breakpoints: &[T], order: usize) -> Self {
        assert!(breakpoints.len() >= 2);
        let (x, w) = gauss_legendre_unit::<T>(order);
        let half: T = lit(0.5);
        let mut nodes = Vec::with_capacity((breakpoints.len() - 1) * order);
        let mut weights = Vec::with_capacity(nodes.capacity());
        for p in breakpoints.windows(2) {
            let (mid, rad) = ((p[0] + p[1]) * half, (p[1] - p[0]) * half);
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(mid + rad * *xi);
                weights.push(rad * *wi);
            }
        }
        Self { nodes, weights }
    }

    /// Uniform panels on `[a, b]`.
    pub fn uniform(a: T, b: T, panels: usize, order: usize) -> Self {
        let h = (b - a) / lit(panels as f64);
        let bp: Vec<T> = (0..=panels).map(|i| a + h * lit(i as f64)).collect();
        Self::gauss_legendre(&bp, order)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `∫ h` for a scalar sampled integrand.
    pub fn integrate(&self, values: &[T]) -> T {
        self.weights
            .iter()
            .zip(values)
            .fold(T::zero(), |acc, (w, v)| acc + *w * *v)
    }
}

/// `∫ f(t)ᴴ g(t) dt` for functions sampled at the quadrature nodes.
pub fn l2_inner_product<T: Real>(
    f: &[CVec<T>],
    g: &[CVec<T>],
    quad: &Quadrature<T>,
) -> Result<C<T>, LinalgError> {
    for s in [f, g] {
        if s.len() != quad.len() {
            return Err(LinalgError::GridMismatch {
                expected: quad.len(),
                found: s.len(),
            });
        }
    }
    let mut acc = C::new(T::zero(), T::zero());
    for ((fi, gi), w) in f.iter().zip(g).zip(&quad.weights) {
        acc += fi.dotc(gi) * *w;
    }
    Ok(acc)
}
