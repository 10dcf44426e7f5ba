//! Subcommand implementations. Each returns a serializable report and
//! whether its checks passed.

use std::collections::BTreeMap;
use std::path::Path;

use nahm_forge::axial::su3_example_solution;
use nahm_forge::intertwiners::{compute_intertwiner, structure_constant_error, structure_constants, verify_identities};
use nahm_forge::nahm::{integrate_flow, Endpoint, FlowOptions, NahmSolution, NahmTriple};
use nahm_forge::numerics::{CMat, C};
use nahm_forge::so3rep::decompose_rep;
use nahm_forge::spherical::ClosedFormFamily;
use nahm_forge::transform::{profile_sweep, tail_fit, SweepOptions, SweepReport, TransformError, TransformOptions};
use serde::Serialize;

use crate::error::{numerical, CliError};

pub const IDENTITY_TOL: f64 = 1e-10;
pub const CLOSED_FORM_TOL: f64 = 1e-10;
pub const RESIDUE_TOL: f64 = 1e-6;
pub const REL_ERR_TOL: f64 = 1e-6;
pub const EPSILON_SHIFT_TOL: f64 = 1e-7;
pub const TAIL_CONST_TOL: f64 = 1e-3;
pub const TAIL_SLOPE_TOL: f64 = 1e-2;
/// Tail fits use `c₀ + c₁/r + c₂/r² + c₃/r³` on `r ≥ TAIL_R_MIN`.
pub const TAIL_R_MIN: f64 = 5.0;
pub const TAIL_TERMS: usize = 4;

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
    /// Reported only; does not affect the exit code.
    pub informational: bool,
}

impl Check {
    /// Passes when `value < threshold`.
    pub fn below(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            pass: value < threshold,
            informational: false,
        }
    }

    pub fn informational(mut self) -> Self {
        self.informational = true;
        self
    }
}

pub fn parse_family(s: &str) -> Result<ClosedFormFamily, CliError> {
    s.parse()
        .map_err(|_| CliError::Usage(format!("unknown family {s:?} (expected 3+1, 5+3+1 or n+2+n)")))
}

// ---------------------------------------------------------------- identities

#[derive(Debug, Serialize)]
pub struct IdentityRun {
    pub n: usize,
    pub residuals: BTreeMap<String, f64>,
    pub max_residual: f64,
    pub structure_constants: [Option<f64>; 4],
    pub structure_constant_error: f64,
}

#[derive(Debug, Serialize)]
pub struct IdentitiesReport {
    pub command: &'static str,
    pub max_n: usize,
    pub tolerance: f64,
    pub runs: Vec<IdentityRun>,
    pub pass: bool,
}

pub fn verify_identities_cmd(max_n: usize) -> Result<IdentitiesReport, CliError> {
    if max_n == 0 {
        return Err(CliError::Usage("max-n must be at least 1".into()));
    }
    let mut runs = Vec::new();
    for n in 1..=max_n {
        let b = compute_intertwiner::<f64>(n).map_err(numerical)?;
        let rep = verify_identities(&b);
        runs.push(IdentityRun {
            n,
            residuals: rep.residuals.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            max_residual: rep.max_residual(),
            structure_constants: structure_constants(&b).as_array(),
            structure_constant_error: structure_constant_error(&b),
        });
    }
    let pass = runs
        .iter()
        .all(|r| r.max_residual < IDENTITY_TOL && r.structure_constant_error < IDENTITY_TOL);
    Ok(IdentitiesReport {
        command: "verify-identities",
        max_n,
        tolerance: IDENTITY_TOL,
        runs,
        pass,
    })
}

// --------------------------------------------------------------- closed form

#[derive(Debug, Serialize)]
pub struct PoleReport {
    pub endpoint: f64,
    pub representation: String,
    pub residue_error: f64,
}

#[derive(Debug, Serialize)]
pub struct ClosedFormReport {
    pub command: &'static str,
    pub family: String,
    pub points: usize,
    pub margin: f64,
    pub nahm_residual: f64,
    pub conserved_max: f64,
    pub poles: Vec<PoleReport>,
    pub checks: Vec<Check>,
    pub output: Option<String>,
    pub pass: bool,
}

pub fn closed_form_cmd(
    family: ClosedFormFamily,
    points: usize,
    margin: f64,
    out: Option<&Path>,
) -> Result<ClosedFormReport, CliError> {
    if points == 0 || !(0.0..1.0).contains(&margin) {
        return Err(CliError::Usage("points must be positive and margin in [0, 1)".into()));
    }
    let sol = NahmSolution::<f64>::closed_form(family);
    let grid = sol.interior_grid(points, margin);
    let residual = sol.nahm_residual(&grid).map_err(numerical)?;
    let mut conserved_max = 0.0f64;
    for &t in &grid {
        conserved_max = conserved_max.max(sol.conserved_at(t).map_err(numerical)?.max_abs());
    }
    let mut poles = Vec::new();
    let mut residue_worst = 0.0f64;
    for endpoint in [-1.0, 1.0] {
        let side = sol.inner_side(endpoint);
        let exact = sol.residue_at(endpoint, side).map_err(numerical)?;
        let extracted = sol.residue_numeric(endpoint, side).map_err(numerical)?;
        let err = exact.distance(&extracted);
        residue_worst = residue_worst.max(err);
        let rep = decompose_rep(extracted.scale(-1.0).as_triple()).map_err(numerical)?;
        poles.push(PoleReport {
            endpoint,
            representation: rep.to_string(),
            residue_error: err,
        });
    }
    let checks = vec![
        Check::below("nahm_residual", residual, CLOSED_FORM_TOL),
        Check::below("conserved_max", conserved_max, CLOSED_FORM_TOL),
        Check::below("residue_error", residue_worst, RESIDUE_TOL),
    ];
    let output = match out {
        Some(p) => {
            write_json(p, &sol.to_record())?;
            Some(p.display().to_string())
        }
        None => None,
    };
    let pass = checks.iter().all(|c| c.pass);
    Ok(ClosedFormReport {
        command: "closed-form",
        family: family.to_string(),
        points,
        margin,
        nahm_residual: residual,
        conserved_max,
        poles,
        checks,
        output,
        pass,
    })
}

// ---------------------------------------------------------------------- flow

/// Seed for `flow`.
#[derive(Debug, Clone)]
pub enum Seed {
    ClosedForm { family: ClosedFormFamily, t: f64 },
    Axial { k: f64, c: f64, k1: f64, t: f64 },
    Commuting,
    File { path: std::path::PathBuf, t: f64 },
}

/// Seed file contents: `T₁, T₂, T₃` row-major, real/imag interleaved.
#[derive(Debug, serde::Deserialize)]
struct SeedFile {
    dim: usize,
    triple: Vec<f64>,
}

impl Seed {
    fn t(&self) -> f64 {
        match *self {
            Seed::ClosedForm { t, .. } | Seed::Axial { t, .. } | Seed::File { t, .. } => t,
            Seed::Commuting => 0.0,
        }
    }

    fn describe(&self) -> String {
        match self {
            Seed::ClosedForm { family, t } => format!("closed-form {family} at t = {t}"),
            Seed::Axial { k, c, k1, t } => format!("axial K = {k}, c = {c}, k1 = {k1} at t = {t}"),
            Seed::Commuting => "commuting diagonal triple".into(),
            Seed::File { path, t } => format!("{} at t = {t}", path.display()),
        }
    }

    fn triple(&self) -> Result<NahmTriple<f64>, CliError> {
        match self {
            Seed::ClosedForm { family, t } => NahmSolution::closed_form(*family).eval(*t).map_err(numerical),
            Seed::Axial { k, c, k1, t } => Ok(su3_example_solution(*k, *c, *t, *k1).map_err(numerical)?.1),
            Seed::Commuting => {
                let diag = |d: [f64; 3]| CMat::from_fn(3, 3, |i, j| C::new(0.0, if i == j { d[i] } else { 0.0 }));
                NahmTriple::new([diag([1.0, -1.0, 0.0]), diag([0.5, 0.5, -1.0]), diag([-0.3, 0.1, 0.2])])
                    .map_err(numerical)
            }
            Seed::File { path, .. } => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Usage(format!("cannot read seed {}: {e}", path.display())))?;
                let f: SeedFile = serde_json::from_str(&text)
                    .map_err(|e| CliError::Usage(format!("invalid seed {}: {e}", path.display())))?;
                NahmTriple::from_interleaved(f.dim, &f.triple)
                    .map_err(|e| CliError::Usage(format!("invalid seed {}: {e}", path.display())))
            }
        }
    }
}

#[derive(Debug, Serialize)]
pub struct EndpointReport {
    pub side: &'static str,
    pub kind: &'static str,
    pub t: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub representation: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct FlowReport {
    pub command: &'static str,
    pub seed: String,
    pub interval: [f64; 2],
    pub endpoints: Vec<EndpointReport>,
    pub conserved_drift: f64,
    pub nahm_residual: f64,
    pub output: Option<String>,
    pub pass: bool,
}

pub fn flow_cmd(seed: &Seed, lo: f64, hi: f64, out: Option<&Path>) -> Result<FlowReport, CliError> {
    let t0 = seed.t();
    if !(lo < t0 && t0 < hi) {
        return Err(CliError::Usage(format!("need lo < t_seed < hi, got {lo} < {t0} < {hi}")));
    }
    let start = seed.triple()?;
    let sol = integrate_flow(&start, t0, lo, hi, &FlowOptions::default()).map_err(numerical)?;
    let flow = sol.numeric().expect("numeric flow");
    let (a, b) = sol.domain();
    let margin = 0.02 * (b - a);
    let grid = sol.interior_grid(101, margin);
    let c0 = nahm_forge::nahm::conserved(&start);
    let mut drift = 0.0f64;
    for &t in &grid {
        drift = drift.max(sol.conserved_at(t).map_err(numerical)?.max_diff(&c0));
    }
    let residual = sol.nahm_residual(&grid).map_err(numerical)?;
    let mut endpoints = Vec::new();
    for (name, e) in [("left", flow.left), ("right", flow.right)] {
        let (kind, t) = match e {
            Endpoint::Regular { t } => ("regular", t),
            Endpoint::Pole { t } => ("pole", t),
            Endpoint::Singular { t } => ("singular", t),
        };
        let (representation, note) = if e.is_pole() {
            match sol.pole_representation(t, sol.inner_side(t)) {
                Ok(rep) => (Some(rep.to_string()), None),
                Err(err) => (None, Some(err.to_string())),
            }
        } else if kind == "singular" {
            (None, Some(format!("integration stopped at t = {t}")))
        } else {
            (None, None)
        };
        endpoints.push(EndpointReport {
            side: name,
            kind,
            t,
            representation,
            note,
        });
    }
    let output = match out {
        Some(p) => {
            write_json(p, &sol.to_record())?;
            Some(p.display().to_string())
        }
        None => None,
    };
    Ok(FlowReport {
        command: "flow",
        seed: seed.describe(),
        interval: [lo, hi],
        endpoints,
        conserved_drift: drift,
        nahm_residual: residual,
        output,
        pass: true,
    })
}

// ----------------------------------------------------------------- transform

#[derive(Debug, Clone, Copy)]
pub struct Grid {
    pub r_min: f64,
    pub r_max: f64,
    pub points: usize,
}

impl Grid {
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        if !(self.r_min > 0.0 && self.r_max > self.r_min) || self.points < 2 {
            return Err(CliError::Usage("grid needs 0 < r_min < r_max and at least 2 points".into()));
        }
        let ratio = self.r_max / self.r_min;
        Ok((0..self.points)
            .map(|i| self.r_min * ratio.powf(i as f64 / (self.points - 1) as f64))
            .collect())
    }
}

#[derive(Debug, Serialize)]
pub struct FailureReport {
    pub r: f64,
    pub error: String,
}

#[derive(Debug, Serialize)]
pub struct TailReport {
    pub index: usize,
    pub coefficients: Vec<f64>,
    pub expected: [f64; 2],
}

#[derive(Debug, Serialize)]
pub struct TransformReport {
    pub command: &'static str,
    pub family: String,
    pub rank: usize,
    pub points: usize,
    pub failures: Vec<FailureReport>,
    pub max_rel_err: Option<f64>,
    pub max_epsilon_shift: Option<f64>,
    pub max_gram_defect: f64,
    pub max_residual: f64,
    pub tail: Vec<TailReport>,
    pub checks: Vec<Check>,
    pub csv: Option<String>,
    pub pass: bool,
}

/// `(c₀, c₁)` of the traceless eigenvalues (ascending) as `r → ∞`.
pub fn asymptotics(family: ClosedFormFamily) -> Option<Vec<[f64; 2]>> {
    match family {
        ClosedFormFamily::ThreePlusOne => Some(vec![[-1.0, 1.0], [-1.0, 1.0], [1.0, -1.0], [1.0, -1.0]]),
        ClosedFormFamily::NPlus2PlusN(2) => Some(vec![
            [-1.2, 1.5],
            [-1.2, 1.5],
            [0.8, -1.0],
            [0.8, -1.0],
            [0.8, -1.0],
        ]),
        ClosedFormFamily::FivePlusThreePlusOne => Some(
            [[-1.0, 1.5]; 3].into_iter().chain([[1.0, -1.5]; 3]).collect(),
        ),
        _ => None,
    }
}

pub struct TransformRun {
    pub report: TransformReport,
    pub rank_mismatch: bool,
}

pub fn transform_cmd(
    family: ClosedFormFamily,
    grid: Grid,
    opts: SweepOptions<f64>,
    csv_path: Option<&Path>,
) -> Result<TransformRun, CliError> {
    let rs = grid.values()?;
    let sweep = profile_sweep(family, &rs, &opts);
    let rank = family.monopole_rank();
    let failures: Vec<FailureReport> = sweep
        .failures
        .iter()
        .map(|f| FailureReport {
            r: f.r,
            error: f.error.to_string(),
        })
        .collect();
    let rank_mismatch = sweep
        .failures
        .iter()
        .any(|f| matches!(f.error, TransformError::RankMismatch { .. }));
    let max_eps = sweep
        .rows
        .iter()
        .filter_map(|r| r.epsilon_shift)
        .reduce(f64::max);
    let max_gram = sweep.rows.iter().map(|r| r.gram_defect).fold(0.0, f64::max);
    let max_res = sweep.rows.iter().map(|r| r.residual).fold(0.0, f64::max);

    let mut checks = vec![Check::below("failed_points", failures.len() as f64, 0.5)];
    checks.push(Check::below("gram_defect", max_gram, 1e-8));
    checks.push(Check::below("adjoint_residual", max_res, 1e-7));
    if let Some(e) = sweep.max_rel_err() {
        checks.push(Check::below("max_rel_err", e, REL_ERR_TOL));
    }
    if let Some(e) = max_eps {
        checks.push(Check::below("epsilon_shift", e, EPSILON_SHIFT_TOL));
    }
    // 5+3+1 has no reference; its tail fit is reported without gating
    let gate_tail = family != ClosedFormFamily::FivePlusThreePlusOne;
    let mut tail = Vec::new();
    if let (Some(expected), false) = (asymptotics(family), sweep.rows.is_empty()) {
        let radii = sweep.radii();
        for (i, want) in expected.iter().enumerate() {
            if let Some(c) = tail_fit(&radii, &sweep.eigenvalue_curve(i), TAIL_R_MIN, TAIL_TERMS) {
                for (name, err, tol) in [
                    (format!("tail_constant_{i}"), (c[0] - want[0]).abs(), TAIL_CONST_TOL),
                    (format!("tail_slope_{i}"), (c[1] - want[1]).abs(), TAIL_SLOPE_TOL),
                ] {
                    let check = Check::below(name, err, tol);
                    checks.push(if gate_tail { check } else { check.informational() });
                }
                tail.push(TailReport {
                    index: i,
                    coefficients: c,
                    expected: *want,
                });
            }
        }
    }
    if matches!(family, ClosedFormFamily::ThreePlusOne | ClosedFormFamily::NPlus2PlusN(2)) {
        // |Φ|² vanishes only at the origin: small at the first point and increasing
        let nsq: Vec<f64> = sweep.rows.iter().map(|r| r.sample.normsq).collect();
        if let Some(&first) = nsq.first() {
            if rs[0] <= 0.1 + 1e-12 {
                checks.push(Check::below("normsq_first", first, 1e-2));
            }
            let rising = nsq.windows(2).filter(|w| w[1] <= w[0]).count();
            checks.push(Check::below("normsq_not_increasing", rising as f64, 0.5));
        }
    }
    let csv = match csv_path {
        Some(p) => {
            write_csv(p, &sweep, rank)?;
            Some(p.display().to_string())
        }
        None => None,
    };
    let pass = checks.iter().all(|c| c.pass || c.informational);
    let report = TransformReport {
        command: "transform",
        family: family.to_string(),
        rank,
        points: rs.len(),
        failures,
        max_rel_err: sweep.max_rel_err(),
        max_epsilon_shift: max_eps,
        max_gram_defect: max_gram,
        max_residual: max_res,
        tail,
        checks,
        csv,
        pass,
    };
    Ok(TransformRun {
        report,
        rank_mismatch,
    })
}

pub fn sweep_options(threads: Option<usize>, epsilon: Option<f64>, epsilon_check: bool) -> SweepOptions<f64> {
    let mut transform = TransformOptions::default();
    if let Some(e) = epsilon {
        transform = transform.with_epsilon(e);
    }
    SweepOptions {
        transform,
        threads,
        epsilon_check,
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn write_csv(path: &Path, sweep: &SweepReport<f64>, rank: usize) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["r".to_string()];
    header.extend((1..=rank).map(|i| format!("eig_{i}")));
    header.extend(["normsq", "energy", "ref_F", "ref_G", "rel_err"].map(String::from));
    w.write_record(&header)?;
    for row in &sweep.rows {
        let mut rec = vec![row.r.to_string()];
        rec.extend(row.sample.eigenvalues.iter().map(|v| v.to_string()));
        rec.push(row.sample.normsq.to_string());
        rec.push(fmt_opt(row.sample.energy));
        rec.push(fmt_opt(row.reference.map(|r| r.0)));
        rec.push(fmt_opt(row.reference.map(|r| r.1)));
        rec.push(fmt_opt(row.rel_err));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("serializable report");
    std::fs::write(path, text + "\n")?;
    Ok(())
}

// -------------------------------------------------------------------- report

#[derive(Debug, Serialize)]
pub struct Criterion {
    pub name: String,
    pub pass: bool,
    pub detail: serde_json::Value,
}

#[derive(Debug, Serialize)]
pub struct FullReport {
    pub command: &'static str,
    pub criteria: Vec<Criterion>,
    pub pass: bool,
}

fn criterion<T: Serialize>(name: &str, pass: bool, detail: &T) -> Criterion {
    Criterion {
        name: name.into(),
        pass,
        detail: serde_json::to_value(detail).expect("serializable report"),
    }
}

pub fn report_cmd(opts: SweepOptions<f64>, grid: Grid) -> Result<FullReport, CliError> {
    let mut criteria = Vec::new();
    let ids = verify_identities_cmd(10)?;
    criteria.push(criterion("intertwiner identities, n = 1..10", ids.pass, &ids));
    let mut families = vec![ClosedFormFamily::ThreePlusOne, ClosedFormFamily::FivePlusThreePlusOne];
    families.extend((2..=5).map(ClosedFormFamily::NPlus2PlusN));
    for f in families {
        let r = closed_form_cmd(f, 101, 0.1, None)?;
        criteria.push(criterion(&format!("closed form {f}"), r.pass, &r));
    }
    for f in [ClosedFormFamily::ThreePlusOne, ClosedFormFamily::NPlus2PlusN(2)] {
        let run = transform_cmd(f, grid, opts, None)?;
        criteria.push(criterion(&format!("transform {f}"), run.report.pass, &run.report));
    }
    let pass = criteria.iter().all(|c| c.pass);
    Ok(FullReport {
        command: "report",
        criteria,
        pass,
    })
}
