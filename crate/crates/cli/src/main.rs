use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use epr_coupling::lp::{feasible, optimize_detailed, witness_reproduces, LpError};
use epr_coupling::model::{connection_marginals, parse_marginals_json, ConnectionVector, OutcomeVector};
use epr_coupling::qm::{maximize_chsh, qm_outcomes, Angle, Settings};
use epr_coupling::regions::{membership_grid, region_file_name, Slice};
use epr_coupling::scalar::Scalar;
use epr_coupling::stats::{
    chsh_expressions, chsh_satisfied, compatible, qm_compliant, s_pair_connection, s_pair_outcome, tsirelson_satisfied,
    tsirelson_upper,
};
use epr_coupling::verify::{
    verify_e0, verify_fine, verify_lemma1, verify_noforcing, verify_nomatching, verify_tsirelson, Report, SuiteReport,
    DEFAULT_DENSITY,
};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "epr-coupling", version, about = "Compatibility of EPR outcome vectors with imposed marginals")]
struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form compatibility of an outcome vector with a connection vector.
    Compat {
        /// p11,p12,p21,p22
        #[arg(long)]
        p: String,
        /// e11,e12,e21,e22
        #[arg(long)]
        eps: String,
        /// Also decide by exact LP and report whether the two agree.
        #[arg(long)]
        lp_crosscheck: bool,
    },
    /// LP feasibility of a set of marginals, optionally with an outcome vector.
    Feasible {
        #[arg(long)]
        marginals: PathBuf,
        #[arg(long)]
        p: Option<String>,
        /// Write the coupling found to this file.
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Maximum of direction·p over couplings with the given marginals.
    Support {
        #[arg(long)]
        marginals: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        direction: String,
    },
    /// Singlet outcome vector for planar settings a1,a2,b1,b2.
    Qm {
        #[arg(long, allow_hyphen_values = true)]
        angles: String,
    },
    /// Numerical maximum of the CHSH expression over planar settings.
    QmMaxChsh {
        #[arg(long, default_value_t = 64)]
        resolution: usize,
        #[arg(long, default_value_t = 40)]
        refine: usize,
    },
    /// Region membership on the slice with p11, p12 fixed.
    Regions {
        #[arg(long)]
        fix: String,
        #[arg(long, default_value_t = 201)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Seeded verification suites.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Grid points per axis for the no-forcing sweep.
        #[arg(long, default_value_t = DEFAULT_DENSITY)]
        density: usize,
        /// Slice p11,p12 for the no-matching suite.
        #[arg(long, default_value = "1/4,1/4")]
        fix: String,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    Lemma1,
    Fine,
    E0,
    Tsirelson,
    Noforcing,
    Nomatching,
    All,
}

/// Input problems exit with 2, everything else reports through the verdict.
struct InputError(anyhow::Error);

impl<E: Into<anyhow::Error>> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.into())
    }
}

type Outcome = std::result::Result<bool, InputError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(InputError(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("COUPLING_THREADS") else {
        return Ok(());
    };
    let threads: usize =
        raw.trim().parse().with_context(|| format!("COUPLING_THREADS must be a count, got `{raw}`"))?;
    if threads == 0 {
        bail!("COUPLING_THREADS must be positive");
    }
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    Ok(())
}

fn run(cli: &Cli) -> Outcome {
    if cli.format == Format::Csv && !matches!(cli.command, Command::Regions { .. }) {
        return Err(anyhow!("--format csv is only available for `regions`").into());
    }
    match &cli.command {
        Command::Compat { p, eps, lp_crosscheck } => compat(p, eps, *lp_crosscheck),
        Command::Feasible { marginals, p, witness } => feasible_cmd(marginals, p.as_deref(), witness.as_ref()),
        Command::Support { marginals, direction } => support(marginals, direction),
        Command::Qm { angles } => qm(angles),
        Command::QmMaxChsh { resolution, refine } => qm_max(*resolution, *refine),
        Command::Regions { fix, grid, out } => regions(fix, *grid, out.as_ref(), cli.format),
        Command::Verify { suite, trials, seed, density, fix } => verify(*suite, *trials, *seed, *density, fix),
    }
}

fn emit(value: &Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("JSON values serialize"));
}

fn scalars<const N: usize>(text: &str, what: &str) -> Result<[Scalar; N]> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != N {
        bail!("{what}: expected {N} comma-separated values, got {}", parts.len());
    }
    let values = parts
        .iter()
        .map(|s| s.parse::<Scalar>().with_context(|| format!("{what}: cannot parse `{s}`")))
        .collect::<Result<Vec<_>>>()?;
    if values.iter().any(|v| !v.is_exact()) {
        eprintln!("warning: {what} contains decimals; computing in approximate mode");
    }
    Ok(values.try_into().expect("length checked"))
}

fn outcome_arg(text: &str) -> Result<OutcomeVector> {
    Ok(OutcomeVector::new(scalars(text, "--p")?)?)
}

fn read_marginals(path: &PathBuf) -> Result<Vec<epr_coupling::model::MarginalSpec>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let specs = parse_marginals_json(&text).with_context(|| format!("parsing {}", path.display()))?;
    if specs.iter().flat_map(|s| s.all_plus()).any(|v| !v.is_exact()) {
        eprintln!("warning: {} contains decimals, which the exact solver rejects", path.display());
    }
    Ok(specs)
}

fn compat(p: &str, eps: &str, lp_crosscheck: bool) -> Outcome {
    let p = outcome_arg(p)?;
    let eps = ConnectionVector::new(scalars(eps, "--eps")?)?;
    let verdict = compatible(&p, &eps);
    let mut out = json!({
        "compatible": verdict,
        "p": p,
        "eps": eps,
        "s_p": s_pair_outcome(&p),
        "s_eps": s_pair_connection(&eps),
    });
    let mut ok = verdict;
    if lp_crosscheck {
        let lp = feasible(&connection_marginals(&eps), Some(&p))?;
        let reproduced = lp.witness.as_ref().map(|w| witness_reproduces(&connection_marginals(&eps), Some(&p), w));
        out["lp_feasible"] = json!(lp.feasible);
        out["agree"] = json!(lp.feasible == verdict);
        if let Some(r) = reproduced {
            out["witness_verified"] = json!(r);
        }
        ok &= lp.feasible == verdict && reproduced != Some(false);
    }
    emit(&out);
    Ok(ok)
}

fn feasible_cmd(marginals: &PathBuf, p: Option<&str>, witness: Option<&PathBuf>) -> Outcome {
    let specs = read_marginals(marginals)?;
    let p = p.map(outcome_arg).transpose()?;
    let result = match feasible(&specs, p.as_ref()) {
        Ok(r) => r,
        Err(LpError::Conflict { subset, first, second }) => {
            emit(&json!({
                "feasible": false,
                "reason": format!("conflicting values for Pr[{subset} all +1]: {first} vs {second}"),
            }));
            return Ok(false);
        }
        Err(e) => return Err(e.into()),
    };
    let mut out = json!({ "feasible": result.feasible, "marginals": specs.len() });
    if let Some(table) = &result.witness {
        out["witness_verified"] = json!(witness_reproduces(&specs, p.as_ref(), table));
        out["outcome_vector"] = json!(table.outcome_vector().ok());
        if let Some(path) = witness {
            let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            serde_json::to_writer_pretty(BufWriter::new(file), table)?;
            out["witness"] = json!(path.display().to_string());
        }
    }
    emit(&out);
    Ok(result.feasible)
}

fn support(marginals: &PathBuf, direction: &str) -> Outcome {
    let specs = read_marginals(marginals)?;
    let direction: [Scalar; 4] = scalars(direction, "--direction")?;
    if direction.iter().any(|d| d.as_rational().is_none()) {
        return Err(anyhow!("--direction must be rational").into());
    }
    match optimize_detailed(&specs, &direction) {
        Ok(s) => {
            emit(&json!({
                "feasible": true,
                "direction": direction,
                "value": s.value,
                "value_f64": s.value.to_f64(),
                "maximizer": s.maximizer,
            }));
            Ok(true)
        }
        Err(LpError::Infeasible | LpError::Conflict { .. }) => {
            emit(&json!({ "feasible": false, "direction": direction }));
            Ok(false)
        }
        Err(e) => Err(e.into()),
    }
}

fn qm(angles: &str) -> Outcome {
    let parts: Vec<&str> = angles.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err(anyhow!("--angles: expected 4 comma-separated angles, got {}", parts.len()).into());
    }
    let parsed = parts
        .iter()
        .map(|s| s.parse::<Angle>().with_context(|| format!("--angles: cannot parse `{s}`")))
        .collect::<Result<Vec<_>>>()?;
    let settings = Settings::Planar(parsed.try_into().map_err(|_| anyhow!("four angles"))?);
    let p = qm_outcomes(&settings);
    if !p.is_exact() {
        eprintln!("warning: angles are not exact multiples of pi/4 or pi/3; results are approximate");
    }
    emit(&json!({
        "settings": settings,
        "p": p,
        "chsh": chsh_expressions(&p),
        "chsh_satisfied": chsh_satisfied(&p),
        "tsirelson_satisfied": tsirelson_satisfied(&p),
        "cosphericity": qm_compliant(&p),
    }));
    Ok(true)
}

fn qm_max(resolution: usize, refine: usize) -> Outcome {
    let m = maximize_chsh(resolution, refine)?;
    let bound = tsirelson_upper();
    emit(&json!({
        "resolution": resolution,
        "refine": refine,
        "settings": m.settings,
        "value": m.value,
        "value_f64": m.value.to_f64(),
        "bound": bound,
        "gap": bound.to_f64() - m.value.to_f64(),
    }));
    Ok(true)
}

fn regions(fix: &str, resolution: usize, out: Option<&PathBuf>, format: Format) -> Outcome {
    let [p11, p12] = scalars::<2>(fix, "--fix")?;
    let slice = Slice::with_first_row(p11.clone(), p12.clone())?;
    let grid = membership_grid(&slice, resolution)?;
    let holds = grid.inclusion_holds();
    if format == Format::Csv && out.is_none() {
        let stdout = io::stdout();
        let mut lock = stdout.lock();
        grid.write_csv(&mut lock)?;
        lock.flush()?;
        return Ok(holds);
    }
    let path = out.cloned().unwrap_or_else(|| PathBuf::from(region_file_name(p11.to_f64(), p12.to_f64(), resolution)));
    let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    let mut writer = BufWriter::new(file);
    grid.write_csv(&mut writer)?;
    writer.flush()?;
    let count = |f: fn(&epr_coupling::regions::Cell) -> bool| grid.cells.iter().filter(|c| f(c)).count();
    emit(&json!({
        "slice": slice,
        "resolution": resolution,
        "cells": grid.cells.len(),
        "chsh": count(|c| c.membership.chsh),
        "qm": count(|c| c.membership.qm),
        "tsirelson": count(|c| c.membership.tsirelson),
        "inclusion_holds": holds,
        "inclusion_failures": grid.inclusion_failures.len(),
        "out": path.display().to_string(),
    }));
    Ok(holds)
}

fn verify(suite: Suite, trials: u64, seed: u64, density: usize, fix: &str) -> Outcome {
    let [p11, p12] = scalars::<2>(fix, "--fix")?;
    let one = |s: Suite| -> Result<Report> {
        Ok(match s {
            Suite::Lemma1 => Report::Lemma1(verify_lemma1(trials, seed)),
            Suite::Fine => Report::Fine(verify_fine(trials, seed)),
            Suite::E0 => Report::E0(verify_e0(trials, seed)),
            Suite::Tsirelson => Report::Tsirelson(verify_tsirelson(trials, seed)),
            Suite::Noforcing => Report::Noforcing(verify_noforcing(density, seed)?),
            Suite::Nomatching => Report::Nomatching(verify_nomatching(&p11, &p12, seed)?),
            Suite::All => unreachable!("expanded by the caller"),
        })
    };
    let value = if suite == Suite::All {
        let suites = [Suite::Lemma1, Suite::Fine, Suite::E0, Suite::Tsirelson, Suite::Noforcing, Suite::Nomatching];
        let reports = suites.into_iter().map(one).collect::<Result<Vec<_>>>()?;
        let report = SuiteReport { passed: reports.iter().all(Report::passed), reports };
        let passed = report.passed;
        (serde_json::to_value(report)?, passed)
    } else {
        let report = one(suite)?;
        let passed = report.passed();
        (serde_json::to_value(report)?, passed)
    };
    emit(&value.0);
    Ok(value.1)
}
