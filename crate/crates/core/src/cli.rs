//! The `grasspack` command line.
//!
//! Exit codes: 0 on success or a positive verdict, 1 on a negative verdict,
//! 2 on usage, parse or input errors.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::constructions::{
    chordal_lift, icosahedral_lines, lift_lines_to_subspaces, orthonormal_lines,
    plucker_line_family, simplex_lines, SubspaceFamily, LINE_SET_TOLERANCE,
};
use crate::distances::{evaluate, Metric};
use crate::error::{Error, Result};
use crate::grassmann::principal_angles;
use crate::io::{history_csv, to_json_string, CertificateRecord, FamilyFile, PackingRecord};
use crate::linalg::TolerancePolicy;
use crate::optimizer::{solve, PackingProblem, DEFAULT_SEED};
use crate::verification::{
    bounds_table, certify_theorem1, check_equiangular, CERTIFICATE_TOLERANCE,
};

pub const SEED_ENV: &str = "GRASSPACK_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum OutputFormat {
    #[default]
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "grasspack", version, about = "Principal angles and equiangular subspace families")]
pub struct Cli {
    /// Angle threshold (radians) below which principal angles count as zero.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub eps_orth: Option<f64>,
    #[arg(long, global = true)]
    pub eps_eig: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,
    /// RNG seed; overrides the problem file and GRASSPACK_SEED.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Principal angles between two members of a family file.
    Angles {
        file: PathBuf,
        #[arg(long, num_args = 2, value_names = ["I", "J"], default_values_t = [0, 1])]
        pair: Vec<usize>,
    },
    /// Distance between two members under one metric.
    Distance {
        file: PathBuf,
        #[arg(long)]
        metric: String,
        #[arg(long, num_args = 2, value_names = ["I", "J"], default_values_t = [0, 1])]
        pair: Vec<usize>,
    },
    /// Check that all pairwise distances agree (exit 1 if not).
    Verify {
        file: PathBuf,
        #[arg(long)]
        metric: String,
        /// Allowed deviation from the mean distance; defaults to the angle threshold.
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Build a line set or family and write it to a file.
    Construct {
        /// simplex-lines | icosahedral-lines | orthonormal-lines | lift | chordal-lift | plucker
        kind: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate the polynomial certificate for common angle alpha (exit 1 if it fails).
    Certify {
        file: PathBuf,
        /// Radians; accepts `pi/3`, `acos(0.5)` and the like. Defaults to the
        /// file's recorded common angle.
        #[arg(long)]
        alpha: Option<String>,
        #[arg(long, default_value_t = CERTIFICATE_TOLERANCE)]
        tolerance: f64,
    },
    /// Print every bound applicable to Gr(k, n).
    Bounds {
        #[arg(long)]
        k: u64,
        #[arg(long)]
        n: u64,
    },
    /// Run the packing optimizer on a problem file.
    Pack {
        problem: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        history: Option<PathBuf>,
    },
    /// Replace every member by its orthogonal complement.
    Complement {
        file: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// List the built-in equiangular line sets.
    LinesCatalog,
}

/// Resolved global settings.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub tol: TolerancePolicy,
    pub format: OutputFormat,
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> Result<Self> {
        let defaults = TolerancePolicy::default();
        let tol = TolerancePolicy::new(
            cli.eps_orth.unwrap_or(defaults.eps_orth),
            cli.eps_eig.unwrap_or(defaults.eps_eig),
            cli.tol.unwrap_or(defaults.eps_angle),
        )?;
        Ok(Self {
            tol,
            format: cli.format,
            seed: cli.seed,
        })
    }
}

/// Seed from the environment, if set.
pub fn env_seed() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::Parse(format!("{SEED_ENV}='{s}' is not an unsigned integer"))),
        Err(_) => Ok(None),
    }
}

/// Parses radians: a number, `pi`, `pi/x`, `x*pi`, or `acos(x)`.
pub fn parse_angle(text: &str) -> Result<f64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let s = s.to_ascii_lowercase();
    let number = |t: &str| {
        t.parse::<f64>()
            .map_err(|_| Error::Parse(format!("cannot parse angle '{text}'")))
    };
    let pi = std::f64::consts::PI;
    if let Some(inner) = s.strip_prefix("acos(").and_then(|r| r.strip_suffix(')')) {
        return Ok(number(inner)?.acos());
    }
    if s == "pi" {
        return Ok(pi);
    }
    if let Some(d) = s.strip_prefix("pi/") {
        return Ok(pi / number(d)?);
    }
    if let Some(f) = s.strip_suffix("*pi") {
        return Ok(number(f)? * pi);
    }
    number(&s)
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    let cfg = RunConfig::from_cli(cli)?;
    match &cli.command {
        Command::Angles { file, pair } => cmd_angles(&cfg, file, (pair[0], pair[1]), out),
        Command::Distance { file, metric, pair } => {
            cmd_distance(&cfg, file, metric.parse()?, (pair[0], pair[1]), out)
        }
        Command::Verify {
            file,
            metric,
            tolerance,
        } => cmd_verify(&cfg, file, metric.parse()?, *tolerance, out),
        Command::Construct {
            kind,
            n,
            k,
            input,
            out: path,
        } => cmd_construct(&cfg, kind, *n, *k, input.as_deref(), path, out),
        Command::Certify {
            file,
            alpha,
            tolerance,
        } => {
            let alpha = alpha.as_deref().map(parse_angle).transpose()?;
            cmd_certify(&cfg, file, alpha, *tolerance, out)
        }
        Command::Bounds { k, n } => cmd_bounds(&cfg, *k, *n, out),
        Command::Pack {
            problem,
            out: path,
            history,
        } => cmd_pack(&cfg, problem, path, history.as_deref(), out),
        Command::Complement { file, out: path } => cmd_complement(&cfg, file, path, out),
        Command::LinesCatalog => cmd_lines_catalog(&cfg, out),
    }
}

fn emit(cfg: &RunConfig, out: &mut dyn Write, json: &Value, text: &str) -> Result<()> {
    match cfg.format {
        OutputFormat::Json => out.write_all(to_json_string(json)?.as_bytes())?,
        OutputFormat::Text => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn load_family(cfg: &RunConfig, path: &Path) -> Result<SubspaceFamily> {
    FamilyFile::read(path)?.to_family(&cfg.tol)
}

pub fn cmd_angles(
    cfg: &RunConfig,
    file: &Path,
    (i, j): (usize, usize),
    out: &mut dyn Write,
) -> Result<i32> {
    let family = load_family(cfg, file)?;
    let spectrum = principal_angles(family.get(i)?, family.get(j)?)?;
    let degrees: Vec<f64> = spectrum.angles().iter().map(|a| a.to_degrees()).collect();
    let mut text = format!(
        "principal angles between members {i} and {j} in Gr({},{})\n",
        family.dim(),
        family.ambient_dim()
    );
    for (idx, (r, d)) in spectrum.angles().iter().zip(&degrees).enumerate() {
        text.push_str(&format!("theta_{} = {r:.6} rad ({d:.6} deg)\n", idx + 1));
    }
    let json = json!({
        "pair": [i, j],
        "k": family.dim(),
        "n": family.ambient_dim(),
        "radians": spectrum.angles(),
        "degrees": degrees,
    });
    emit(cfg, out, &json, &text)?;
    Ok(0)
}

pub fn cmd_distance(
    cfg: &RunConfig,
    file: &Path,
    metric: Metric,
    (i, j): (usize, usize),
    out: &mut dyn Write,
) -> Result<i32> {
    let family = load_family(cfg, file)?;
    let value = evaluate(metric, family.get(i)?, family.get(j)?, &cfg.tol)?;
    let unit = if metric.is_angular() { " rad" } else { "" };
    let text = format!("{metric}({i}, {j}) = {value:.9}{unit}\n");
    let json = json!({ "metric": metric, "pair": [i, j], "value": value });
    emit(cfg, out, &json, &text)?;
    Ok(0)
}

pub fn cmd_verify(
    cfg: &RunConfig,
    file: &Path,
    metric: Metric,
    tolerance: Option<f64>,
    out: &mut dyn Write,
) -> Result<i32> {
    let family = load_family(cfg, file)?;
    let tolerance = tolerance.unwrap_or(cfg.tol.eps_angle);
    let report = check_equiangular(&family, metric, &cfg.tol, tolerance)?;
    let text = format!(
        "{} members, {} pairs, metric {metric}\nmean distance {:.9}, max deviation {:e} (tolerance {:e})\n{}\n",
        family.len(),
        report.pair_count,
        report.mean_value,
        report.max_deviation,
        tolerance,
        match report.common_value {
            Some(v) => format!("equiangular, common value {v:.9}"),
            None => "not equiangular".to_string(),
        }
    );
    emit(cfg, out, &serde_json::to_value(&report)?, &text)?;
    Ok(if report.verdict { 0 } else { 1 })
}

fn require_input(input: Option<&Path>, kind: &str) -> Result<PathBuf> {
    input
        .map(Path::to_path_buf)
        .ok_or_else(|| Error::BadParams(format!("'{kind}' needs --in <file>")))
}

pub fn cmd_construct(
    cfg: &RunConfig,
    kind: &str,
    n: Option<usize>,
    k: Option<usize>,
    input: Option<&Path>,
    path: &Path,
    out: &mut dyn Write,
) -> Result<i32> {
    let need = |v: Option<usize>, name: &str| {
        v.ok_or_else(|| Error::BadParams(format!("'{kind}' needs --{name}")))
    };
    let file = match kind {
        "simplex-lines" => FamilyFile::from_line_set(&simplex_lines(need(n, "n")?)?, kind),
        "icosahedral-lines" => FamilyFile::from_line_set(&icosahedral_lines(), kind),
        "orthonormal-lines" => FamilyFile::from_line_set(&orthonormal_lines(need(n, "n")?)?, kind),
        "lift" => {
            let lines = FamilyFile::read(&require_input(input, kind)?)?.to_line_set(LINE_SET_TOLERANCE)?;
            FamilyFile::from_family(&lift_lines_to_subspaces(&lines, need(k, "k")?, &cfg.tol)?)
        }
        "chordal-lift" => {
            let family = load_family(cfg, &require_input(input, kind)?)?;
            FamilyFile::from_family(&chordal_lift(&family, &cfg.tol)?)
        }
        "plucker" => {
            let family = load_family(cfg, &require_input(input, kind)?)?;
            let lines = plucker_line_family(&family, &cfg.tol, cfg.tol.eps_angle)?;
            FamilyFile::from_line_set(&lines, kind)
        }
        other => return Err(Error::UnknownKind(other.to_string())),
    };
    file.write(path)?;

    let written = file.to_family(&cfg.tol)?;
    let reloaded = load_family(cfg, path)?;
    let consistent = written
        .members()
        .iter()
        .zip(reloaded.members())
        .all(|(a, b)| a.projection_matrix().max_abs_diff(&b.projection_matrix()) <= 1e-12);
    if !consistent || written.len() != reloaded.len() {
        return Err(Error::Parse(format!("{} did not reload consistently", path.display())));
    }

    let text = format!(
        "wrote {} members of Gr({},{}) to {}\n",
        reloaded.len(),
        file.k,
        file.n,
        path.display()
    );
    let json = json!({
        "kind": kind,
        "members": reloaded.len(),
        "k": file.k,
        "n": file.n,
        "out": path.display().to_string(),
    });
    emit(cfg, out, &json, &text)?;
    Ok(0)
}

pub fn cmd_certify(
    cfg: &RunConfig,
    file: &Path,
    alpha: Option<f64>,
    tolerance: f64,
    out: &mut dyn Write,
) -> Result<i32> {
    let family = load_family(cfg, file)?;
    let alpha = alpha.or(family.common_angle).ok_or_else(|| {
        Error::BadParams("no --alpha given and the file records no common angle".into())
    })?;
    let cert = certify_theorem1(&family, alpha, &cfg.tol, tolerance)?;
    let mut text = format!(
        "m = {}, Gr({},{}), alpha = {:.9}, lambda = cos^2 alpha = {:.9}\n\
         diagonal target (1-lambda)^k = {:.9}, max diagonal deviation {:e}\n\
         max |off-diagonal| {:e} (tolerance {:e})\n\
         bound C(C(n+1,2)+k-1, k) = {}; m <= bound: {}\n",
        cert.m,
        cert.k,
        cert.n,
        cert.alpha,
        cert.lambda,
        cert.expected_diagonal,
        cert.max_diagonal_deviation,
        cert.max_off_diagonal,
        cert.tolerance,
        cert.bound,
        cert.m as u64 <= cert.bound
    );
    text.push_str(if cert.verdict {
        "certificate holds\n"
    } else {
        "certificate fails\n"
    });
    emit(
        cfg,
        out,
        &serde_json::to_value(CertificateRecord::from(&cert))?,
        &text,
    )?;
    Ok(if cert.verdict { 0 } else { 1 })
}

pub fn cmd_bounds(cfg: &RunConfig, k: u64, n: u64, out: &mut dyn Write) -> Result<i32> {
    let t = bounds_table(k, n)?;
    let mut rows: Vec<(String, u64)> = Vec::new();
    if let Some(g) = t.gerzon {
        rows.push(("gerzon".into(), g));
    }
    if let Some((tp, b)) = t.decaen {
        rows.push((format!("de-caen (t={tp}, lower)"), b));
    }
    rows.push(("theorem1".into(), t.theorem1));
    if let Some(b) = t.blokhuis {
        rows.push(("blokhuis".into(), b));
    }
    rows.push(("chordal".into(), t.chordal));
    if let Some(c) = t.chrss {
        rows.push(("chrss (exact)".into(), c));
    }
    rows.push(("fubini-study".into(), t.fubini_study));
    rows.push(("lemmens-seidel".into(), t.lemmens_seidel));
    let mut text = format!("bounds for Gr({k},{n})\n");
    for (name, v) in &rows {
        text.push_str(&format!("{name:<24} {v}\n"));
    }
    emit(cfg, out, &serde_json::to_value(&t)?, &text)?;
    Ok(0)
}

pub fn cmd_pack(
    cfg: &RunConfig,
    problem_path: &Path,
    path: &Path,
    history: Option<&Path>,
    out: &mut dyn Write,
) -> Result<i32> {
    let text = std::fs::read_to_string(problem_path)?;
    let mut raw: Value = serde_json::from_str(&text)
        .map_err(|e| Error::Parse(format!("{}: {e}", problem_path.display())))?;
    let obj = raw
        .as_object_mut()
        .ok_or_else(|| Error::Parse("problem file must be a JSON object".into()))?;
    if let Some(seed) = cfg.seed {
        obj.insert("seed".into(), seed.into());
    } else if !obj.contains_key("seed") {
        obj.insert("seed".into(), env_seed()?.unwrap_or(DEFAULT_SEED).into());
    }
    let problem: PackingProblem = serde_json::from_value(raw)
        .map_err(|e| Error::InvalidProblem(e.to_string()))?;
    let result = solve(&problem, &cfg.tol)?;
    std::fs::write(path, to_json_string(&PackingRecord::new(&problem, &result))?)?;
    if let Some(h) = history {
        std::fs::write(h, history_csv(&result.history))?;
    }
    let text = format!(
        "objective {:.9} (restart {}, iteration {}), wrote {}\n",
        result.objective_value,
        result.best_restart,
        result.best_iteration,
        path.display()
    );
    let json = json!({
        "objective_value": result.objective_value,
        "best_restart": result.best_restart,
        "best_iteration": result.best_iteration,
        "out": path.display().to_string(),
    });
    emit(cfg, out, &json, &text)?;
    Ok(0)
}

pub fn cmd_complement(cfg: &RunConfig, file: &Path, path: &Path, out: &mut dyn Write) -> Result<i32> {
    let family = load_family(cfg, file)?;
    let comp = family.complement(&cfg.tol)?;
    FamilyFile::from_family(&comp).write(path)?;
    let text = format!(
        "wrote {} complements in Gr({},{}) to {}\n",
        comp.len(),
        comp.dim(),
        comp.ambient_dim(),
        path.display()
    );
    let json = json!({
        "members": comp.len(),
        "k": comp.dim(),
        "n": comp.ambient_dim(),
        "out": path.display().to_string(),
    });
    emit(cfg, out, &json, &text)?;
    Ok(0)
}

pub fn cmd_lines_catalog(cfg: &RunConfig, out: &mut dyn Write) -> Result<i32> {
    let ico = icosahedral_lines();
    let entries = vec![
        json!({"kind": "simplex-lines", "n": "n >= 2", "lines": "n + 1", "common_cos": "1/n"}),
        json!({
            "kind": "icosahedral-lines",
            "n": 3,
            "lines": ico.len(),
            "common_cos": ico.common_cos(),
            "common_angle": ico.common_angle(),
        }),
        json!({"kind": "orthonormal-lines", "n": "n >= 1", "lines": "n", "common_cos": 0.0}),
    ];
    let text = format!(
        "simplex-lines      n+1 lines in R^n, |cos| = 1/n\n\
         icosahedral-lines  6 lines in R^3, |cos| = 1/sqrt(5) = {:.10}\n\
         orthonormal-lines  n lines in R^n, |cos| = 0\n",
        ico.common_cos()
    );
    emit(cfg, out, &Value::Array(entries), &text)?;
    Ok(0)
}
