//! Higgs profiles along the positive `x₁`-axis.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::{higgs, solve_cokernel, DiracProblem, HiggsSample, TransformError, TransformOptions};
use super::reference::{reference_eigenvalues, reference_higgs, ReferenceFamily};
use crate::nahm::NahmSolution;
use crate::scalar::{lit, to_f64, Real};
use crate::spherical::ClosedFormFamily;

#[derive(Debug, Clone, Copy)]
pub struct SweepOptions<T> {
    pub transform: TransformOptions<T>,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
    /// Re-solve every point with `ε/2` and record the eigenvalue shift.
    pub epsilon_check: bool,
}

impl<T: Real> Default for SweepOptions<T> {
    fn default() -> Self {
        Self {
            transform: TransformOptions::default(),
            threads: None,
            epsilon_check: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepRow<T: Real> {
    pub r: T,
    pub sample: HiggsSample<T>,
    /// `(F(r), G(r))` when the family has reference curves.
    pub reference: Option<(f64, f64)>,
    pub reference_eigenvalues: Option<Vec<f64>>,
    /// Error of the raw eigenvalues against the reference.
    pub rel_err: Option<f64>,
    /// `max |λ(ε) - λ(ε/2)|`.
    pub epsilon_shift: Option<T>,
    pub gram_defect: T,
    pub residual: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepFailure {
    pub r: f64,
    pub error: TransformError,
}

#[derive(Debug, Clone)]
pub struct SweepReport<T: Real> {
    /// Successful points, ascending in `r`.
    pub rows: Vec<SweepRow<T>>,
    pub failures: Vec<SweepFailure>,
}

impl<T: Real> SweepReport<T> {
    pub fn radii(&self) -> Vec<f64> {
        self.rows.iter().map(|r| to_f64(r.r)).collect()
    }

    /// Traceless eigenvalue `i` (ascending order) across the sweep.
    pub fn eigenvalue_curve(&self, i: usize) -> Vec<f64> {
        self.rows.iter().map(|r| to_f64(r.sample.eigenvalues[i])).collect()
    }

    pub fn max_rel_err(&self) -> Option<f64> {
        self.rows.iter().filter_map(|r| r.rel_err).reduce(f64::max)
    }
}

/// The datum that is transformed in sweeps: the closed form reflected by
/// `t ↦ -t`, which reproduces the reference orientation.
pub fn transform_datum<T: Real>(family: ClosedFormFamily) -> NahmSolution<T> {
    NahmSolution::closed_form(family).affine_pullback(-T::one(), T::zero())
}

/// `max_i |λ_i - ref_i| / max_i |ref_i|`, both ascending.
pub fn rel_err(computed: &[f64], reference: &[f64]) -> f64 {
    let scale = reference.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let diff = computed
        .iter()
        .zip(reference)
        .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
    if computed.len() != reference.len() {
        return f64::INFINITY;
    }
    diff / scale.max(f64::MIN_POSITIVE)
}

/// Finite-difference weights for derivatives `0..=order` at `z` on nodes `x`.
///
/// `w[k][j]` multiplies `f(x_j)` in the `k`-th derivative.
pub fn fornberg_weights(z: f64, x: &[f64], order: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; order + 1];
    if n == 0 {
        return c;
    }
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Least-squares fit `y ≈ Σ_{k < terms} c_k / r^k` over points with `r ≥ r_min`.
pub fn tail_fit(r: &[f64], y: &[f64], r_min: f64, terms: usize) -> Option<Vec<f64>> {
    let pts: Vec<(f64, f64)> = r
        .iter()
        .zip(y)
        .filter(|(r, _)| **r >= r_min)
        .map(|(a, b)| (*a, *b))
        .collect();
    if terms == 0 || pts.len() < terms {
        return None;
    }
    let a = DMatrix::from_fn(pts.len(), terms, |i, j| pts[i].0.powi(-(j as i32)));
    let b = DVector::from_iterator(pts.len(), pts.iter().map(|p| p.1));
    let c = a.svd(true, true).solve(&b, 1e-14).ok()?;
    Some(c.iter().copied().collect())
}

/// `½ (f'' + 2f'/r)` from five-point stencils on a nonuniform grid.
fn radial_laplacian_half(r: &[f64], f: &[f64]) -> Vec<Option<f64>> {
    let n = r.len();
    if n < 5 {
        return vec![None; n];
    }
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(2).min(n - 5);
            let w = fornberg_weights(r[i], &r[lo..lo + 5], 2);
            let d1: f64 = (0..5).map(|j| w[1][j] * f[lo + j]).sum();
            let d2: f64 = (0..5).map(|j| w[2][j] * f[lo + j]).sum();
            Some(0.5 * (d2 + 2.0 * d1 / r[i]))
        })
        .collect()
}

fn sweep_point<T: Real>(
    solution: &NahmSolution<T>,
    r: T,
    opts: &SweepOptions<T>,
    reference: Option<ReferenceFamily>,
) -> Result<SweepRow<T>, TransformError> {
    let x = [r, T::zero(), T::zero()];
    let problem = DiracProblem::new(solution.clone(), x)?;
    let basis = solve_cokernel(&problem, &opts.transform)?;
    let sample = higgs(&basis)?;
    let epsilon_shift = if opts.epsilon_check {
        let half = opts.transform.with_epsilon(opts.transform.epsilon * lit(0.5));
        let other = higgs(&solve_cokernel(&problem, &half)?)?;
        let shift = sample
            .raw_eigenvalues
            .iter()
            .zip(&other.raw_eigenvalues)
            .fold(T::zero(), |a, (x, y)| a.max((*x - *y).abs()));
        Some(shift)
    } else {
        None
    };
    let rf = to_f64(r);
    let reference_eigs = reference.map(|f| reference_eigenvalues(f, rf));
    let rel = reference_eigs.as_ref().map(|re| {
        let raw: Vec<f64> = sample.raw_eigenvalues.iter().map(|v| to_f64(*v)).collect();
        rel_err(&raw, re)
    });
    Ok(SweepRow {
        r,
        reference: reference.map(|f| reference_higgs(f, rf)),
        reference_eigenvalues: reference_eigs,
        rel_err: rel,
        epsilon_shift,
        gram_defect: basis.gram_defect,
        residual: basis.residual,
        sample,
    })
}

/// Transforms `solution` at `(r, 0, 0)` for every `r` in `grid`.
///
/// Points that fail are collected in [`SweepReport::failures`]; the rest
/// of the sweep continues. Energies are filled in once five or more points
/// succeed.
pub fn sweep_solution<T: Real>(
    solution: &NahmSolution<T>,
    grid: &[T],
    opts: &SweepOptions<T>,
    reference: Option<ReferenceFamily>,
) -> SweepReport<T> {
    let run = || -> Vec<Result<SweepRow<T>, TransformError>> {
        grid.par_iter()
            .map(|&r| sweep_point(solution, r, opts, reference))
            .collect()
    };
    let results = match opts.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            Ok(pool) => pool.install(run),
            Err(_) => run(),
        },
        None => run(),
    };
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (r, res) in grid.iter().zip(results) {
        match res {
            Ok(row) => rows.push(row),
            Err(error) => failures.push(SweepFailure { r: to_f64(*r), error }),
        }
    }
    rows.sort_by(|a, b| a.r.partial_cmp(&b.r).unwrap());
    let rs: Vec<f64> = rows.iter().map(|row| to_f64(row.r)).collect();
    let f: Vec<f64> = rows.iter().map(|row| to_f64(row.sample.normsq)).collect();
    for (row, e) in rows.iter_mut().zip(radial_laplacian_half(&rs, &f)) {
        row.sample.energy = e.map(lit);
    }
    SweepReport { rows, failures }
}

/// Sweep of the reflected closed form of `family`, compared with the
/// reference curves when they exist.
pub fn profile_sweep<T: Real>(
    family: ClosedFormFamily,
    grid: &[T],
    opts: &SweepOptions<T>,
) -> SweepReport<T> {
    sweep_solution(&transform_datum(family), grid, opts, ReferenceFamily::of(family))
}
