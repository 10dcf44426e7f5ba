//! `nahm-forge`: closed-form Nahm data, flows and the numerical Nahm transform.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use commands::{Grid, Seed};
use config::{pick, RunConfig};
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "nahm-forge", version, about = "Symmetric Nahm data and their Nahm transforms")]
struct Cli {
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Print the report as JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the intertwiner identities and structure constants for n = 1..max-n.
    VerifyIdentities {
        #[arg(long)]
        max_n: Option<usize>,
    },
    /// Validate a closed-form spherically symmetric family.
    ClosedForm {
        #[arg(long)]
        family: Option<String>,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        margin: Option<f64>,
        /// Write the solution record here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate Nahm's equations from a seed and classify the endpoints.
    Flow {
        /// closed-form, axial, commuting or file.
        #[arg(long)]
        seed: Option<String>,
        #[arg(long)]
        family: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        t_seed: Option<f64>,
        #[arg(long = "axial-k", allow_hyphen_values = true)]
        k: Option<f64>,
        #[arg(long = "axial-c", allow_hyphen_values = true)]
        c: Option<f64>,
        #[arg(long = "axial-k1", allow_hyphen_values = true)]
        k1: Option<f64>,
        #[arg(long)]
        seed_file: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        lo: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        hi: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Higgs field profile along an axis, compared with reference curves.
    Transform {
        #[arg(long)]
        family: Option<String>,
        #[command(flatten)]
        sweep: SweepArgs,
        /// Write the profile as CSV here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run the identity, closed-form and transform checks together.
    Report {
        #[command(flatten)]
        sweep: SweepArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long)]
    r_min: Option<f64>,
    #[arg(long)]
    r_max: Option<f64>,
    /// Number of logarithmically spaced radii.
    #[arg(long)]
    points: Option<usize>,
    /// Worker threads (default: NAHM_FORGE_THREADS, else all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Frobenius offset from the poles.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Re-solve with half the offset and report the shift.
    #[arg(long)]
    epsilon_check: bool,
}

impl SweepArgs {
    fn grid(&self, cfg: &RunConfig) -> Grid {
        Grid {
            r_min: pick(self.r_min, cfg.grid.r_min, 0.1),
            r_max: pick(self.r_max, cfg.grid.r_max, 10.0),
            points: pick(self.points, cfg.grid.points, 50),
        }
    }

    fn options(&self, cfg: &RunConfig) -> Result<nahm_forge::transform::SweepOptions<f64>, CliError> {
        let threads = config::threads(self.threads, cfg.threads)?;
        let check = self.epsilon_check || cfg.epsilon_check.unwrap_or(false);
        Ok(commands::sweep_options(threads, self.epsilon.or(cfg.epsilon), check))
    }
}

/// A finished command: its report, pass flag and human-readable summary.
struct Finished {
    json: serde_json::Value,
    pass: bool,
    text: String,
}

fn finish<T: Serialize>(report: &T, pass: bool, text: String) -> Finished {
    Finished {
        json: serde_json::to_value(report).expect("serializable report"),
        pass,
        text,
    }
}

fn status(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn seed_from(
    kind: Option<String>,
    family: Option<String>,
    t: Option<f64>,
    k: Option<f64>,
    c: Option<f64>,
    k1: Option<f64>,
    path: Option<PathBuf>,
    cfg: &RunConfig,
) -> Result<Seed, CliError> {
    let s = &cfg.seed;
    let kind = pick(kind, s.kind.clone(), "closed-form".into());
    let t = t.or(s.t);
    match kind.as_str() {
        "closed-form" => {
            let fam = pick(family, s.family.clone().or(cfg.family.clone()), "3+1".into());
            Ok(Seed::ClosedForm {
                family: commands::parse_family(&fam)?,
                t: t.unwrap_or(0.0),
            })
        }
        "axial" => {
            let c = pick(c, s.c, 0.0);
            Ok(Seed::Axial {
                k: pick(k, s.k, 0.0),
                c,
                k1: pick(k1, s.k1, 0.0),
                t: t.unwrap_or(c + 1.0),
            })
        }
        "commuting" => Ok(Seed::Commuting),
        "file" => {
            let path = path
                .or(s.path.clone())
                .ok_or_else(|| CliError::Usage("seed kind file needs --seed-file".into()))?;
            Ok(Seed::File {
                path,
                t: t.unwrap_or(0.0),
            })
        }
        other => Err(CliError::Usage(format!(
            "unknown seed kind {other:?} (closed-form, axial, commuting, file)"
        ))),
    }
}

fn run(cli: Cli) -> Result<Finished, CliError> {
    let cfg = RunConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::VerifyIdentities { max_n } => {
            let r = commands::verify_identities_cmd(pick(max_n, cfg.max_n, 8))?;
            let mut text = String::new();
            for run in &r.runs {
                text += &format!(
                    "n = {:2}  max identity residual {:.3e}  structure constant error {:.3e}\n",
                    run.n, run.max_residual, run.structure_constant_error
                );
            }
            text += &format!("{} (tolerance {:e})", status(r.pass), r.tolerance);
            Ok(finish(&r, r.pass, text))
        }
        Command::ClosedForm {
            family,
            points,
            margin,
            out,
        } => {
            let fam = commands::parse_family(&pick(family, cfg.family.clone(), "3+1".into()))?;
            let r = commands::closed_form_cmd(
                fam,
                pick(points, cfg.points, 101),
                pick(margin, cfg.margin, 0.1),
                out.or(cfg.out.clone()).as_deref(),
            )?;
            let mut text = format!(
                "{}: Nahm residual {:.3e}, conserved max {:.3e}\n",
                r.family, r.nahm_residual, r.conserved_max
            );
            for p in &r.poles {
                text += &format!(
                    "pole at {:+}: representation {}, residue error {:.3e}\n",
                    p.endpoint, p.representation, p.residue_error
                );
            }
            text += status(r.pass);
            Ok(finish(&r, r.pass, text))
        }
        Command::Flow {
            seed,
            family,
            t_seed,
            k,
            c,
            k1,
            seed_file,
            lo,
            hi,
            out,
        } => {
            let seed = seed_from(seed, family, t_seed, k, c, k1, seed_file, &cfg)?;
            let t0 = match &seed {
                Seed::ClosedForm { t, .. } | Seed::Axial { t, .. } | Seed::File { t, .. } => *t,
                Seed::Commuting => 0.0,
            };
            let r = commands::flow_cmd(
                &seed,
                pick(lo, cfg.lo, t0 - 2.0),
                pick(hi, cfg.hi, t0 + 2.0),
                out.or(cfg.out.clone()).as_deref(),
            )?;
            let mut text = format!("seed: {}\n", r.seed);
            for e in &r.endpoints {
                text += &format!("{} end: {} at t = {}", e.side, e.kind, e.t);
                if let Some(rep) = &e.representation {
                    text += &format!(", representation {rep}");
                }
                if let Some(n) = &e.note {
                    text += &format!(" ({n})");
                }
                text += "\n";
            }
            text += &format!(
                "conserved drift {:.3e}, Nahm residual {:.3e}",
                r.conserved_drift, r.nahm_residual
            );
            Ok(finish(&r, r.pass, text))
        }
        Command::Transform { family, sweep, csv } => {
            let fam = commands::parse_family(&pick(family, cfg.family.clone(), "3+1".into()))?;
            let opts = sweep.options(&cfg)?;
            let run = commands::transform_cmd(fam, sweep.grid(&cfg), opts, csv.or(cfg.csv.clone()).as_deref())?;
            let r = &run.report;
            let mut text = format!("{} transform at {} radii, expected rank {}\n", r.family, r.points, r.rank);
            for f in &r.failures {
                text += &format!("r = {}: {}\n", f.r, f.error);
            }
            for c in &r.checks {
                let tag = match (c.pass, c.informational) {
                    (false, true) => "FAIL (informational)",
                    (p, _) => status(p),
                };
                text += &format!("{:<24} {:.3e}  (< {:e})  {}\n", c.name, c.value, c.threshold, tag);
            }
            text += status(r.pass);
            let pass = r.pass && !run.rank_mismatch;
            Ok(finish(r, pass, text))
        }
        Command::Report { sweep, out } => {
            let opts = sweep.options(&cfg)?;
            let r = commands::report_cmd(opts, sweep.grid(&cfg))?;
            if let Some(p) = out.or(cfg.out.clone()) {
                std::fs::write(&p, serde_json::to_string_pretty(&r).expect("serializable report") + "\n")?;
            }
            let mut text = String::new();
            for c in &r.criteria {
                text += &format!("{}  {}\n", status(c.pass), c.name);
            }
            text += status(r.pass);
            Ok(finish(&r, r.pass, text))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let json = cli.json;
    match run(cli) {
        Ok(done) => {
            if json {
                println!("{}", serde_json::to_string_pretty(&done.json).expect("serializable report"));
            } else {
                println!("{}", done.text);
            }
            if done.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            if json {
                let v = serde_json::json!({ "error": e.to_string(), "exit_code": e.exit_code() });
                println!("{}", serde_json::to_string_pretty(&v).expect("serializable report"));
            }
            eprintln!("nahm-forge: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
