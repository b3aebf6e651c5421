//! `kirchfem` command line: `solve | convergence | decay | eigen`.
//!
//! Exit status is 0 on success, 1 on usage errors (bad flags, unknown
//! problem, unwritable output) and 2 on numerical failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use super::convergence::{convergence_study, DtRule, StudyOptions};
use super::decay::decay_study;
use super::output::{write_convergence_csv, write_decay_csv};
use super::discrete_eigenvalue;
use crate::assembly::error_norms;
use crate::assembly::QuadratureRule;
use crate::error::FemError;
use crate::mesh::{uniform_spacing, Mesh};
use crate::problems::{self, ProblemSpec};
use crate::schemes::{run_simulation, SchemeConfig, SchemeKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "kirchfem", version, about = "P1 finite element experiments for the nonlocal Kirchhoff parabolic equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one simulation and report final norms and errors
    Solve(Flags),
    /// Error table over a range of mesh levels
    Convergence(Flags),
    /// Fit exponential decay rates of ‖U‖ and ‖∇U‖
    Decay(Flags),
    /// Smallest discrete Dirichlet eigenvalue of the unit square
    Eigen(Flags),
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
struct Flags {
    /// Problem name (ex1, ex2, ex3)
    #[arg(long)]
    problem: Option<String>,
    /// Uniform mesh level (n = 2^(level+1) cells per side)
    #[arg(long)]
    level: Option<u32>,
    /// Inclusive level range, e.g. 0..4
    #[arg(long)]
    levels: Option<String>,
    /// be | mbe
    #[arg(long)]
    scheme: Option<String>,
    /// Time step k
    #[arg(long)]
    dt: Option<f64>,
    /// h2 | fixed (convergence only)
    #[arg(long)]
    #[serde(alias = "dt-rule")]
    dt_rule: Option<String>,
    /// Multiplier c in k = c·h² (convergence only)
    #[arg(long)]
    #[serde(alias = "dt-scale")]
    dt_scale: Option<f64>,
    /// Final time
    #[arg(long)]
    #[serde(alias = "t-end")]
    t_end: Option<f64>,
    /// Output CSV path; a gnuplot script is written next to it
    #[arg(long)]
    out: Option<PathBuf>,
    /// Linear solver relative tolerance
    #[arg(long)]
    tol: Option<f64>,
    /// Decay fit window, e.g. 2..6 (default: latter half of the run)
    #[arg(long)]
    window: Option<String>,
    /// JSON file with the same keys as the flags; flags take precedence
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

impl Flags {
    fn merged_with(self, file: Flags) -> Flags {
        Flags {
            problem: self.problem.or(file.problem),
            level: self.level.or(file.level),
            levels: self.levels.or(file.levels),
            scheme: self.scheme.or(file.scheme),
            dt: self.dt.or(file.dt),
            dt_rule: self.dt_rule.or(file.dt_rule),
            dt_scale: self.dt_scale.or(file.dt_scale),
            t_end: self.t_end.or(file.t_end),
            out: self.out.or(file.out),
            tol: self.tol.or(file.tol),
            window: self.window.or(file.window),
            config: self.config,
        }
    }

    fn problem(&self) -> Result<ProblemSpec, CliError> {
        let name = self.problem.as_deref().ok_or_else(|| usage("--problem is required"))?;
        problems::by_name(name).ok_or_else(|| {
            usage(format!("unknown problem `{name}` (available: {})", problems::NAMES.join(", ")))
        })
    }

    fn scheme(&self) -> Result<SchemeKind, CliError> {
        self.scheme.as_deref().unwrap_or("mbe").parse().map_err(CliError::Usage)
    }

    fn level(&self) -> u32 {
        self.level.unwrap_or(4)
    }

    fn tol(&self) -> Result<f64, CliError> {
        let tol = self.tol.unwrap_or(1e-10);
        if tol > 0.0 && tol < 1.0 {
            Ok(tol)
        } else {
            Err(usage(format!("--tol must lie in (0, 1), got {tol}")))
        }
    }
}

#[derive(Debug)]
enum CliError {
    Usage(FemError),
    Numerical(FemError),
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(FemError::InvalidConfig(msg.into()))
}

impl From<FemError> for CliError {
    fn from(e: FemError) -> Self {
        match e {
            FemError::InvalidConfig(_)
            | FemError::NoExactSolution(_)
            | FemError::LevelTooLarge { .. }
            | FemError::MeshParse { .. }
            | FemError::Io(_)
            | FemError::Csv(_) => CliError::Usage(e),
            _ => CliError::Numerical(e),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(FemError::Io(e))
    }
}

/// Parses `a..b` (inclusive) or a single level.
fn parse_range_u32(s: &str) -> Result<(u32, u32), CliError> {
    let bad = || usage(format!("expected a range like 0..4, got `{s}`"));
    match s.split_once("..") {
        Some((a, b)) => {
            let a: u32 = a.trim().parse().map_err(|_| bad())?;
            let b: u32 = b.trim_start_matches('=').trim().parse().map_err(|_| bad())?;
            if a > b {
                return Err(bad());
            }
            Ok((a, b))
        }
        None => {
            let a = s.trim().parse().map_err(|_| bad())?;
            Ok((a, a))
        }
    }
}

fn parse_window(s: &str) -> Result<(f64, f64), CliError> {
    let bad = || usage(format!("expected a window like 2..6, got `{s}`"));
    let (a, b) = s.split_once("..").ok_or_else(bad)?;
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    if !(a < b) {
        return Err(bad());
    }
    Ok((a, b))
}

fn load_config(path: &Path) -> Result<Flags, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("bad config {}: {e}", path.display())))
}

/// Runs the CLI on `args` (including the program name) and returns the exit status.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    cli_main_with_output(args, &mut out)
}

/// [`cli_main`] with an explicit sink for the report text.
pub fn cli_main_with_output<I, T, W>(args: I, out: &mut W) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
    W: Write,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli, out) {
        Ok(()) => EXIT_OK,
        Err(CliError::Usage(e)) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
        Err(CliError::Numerical(e)) => {
            eprintln!("numerical failure: {e}");
            EXIT_NUMERICAL
        }
    }
}

fn dispatch<W: Write>(cli: Cli, out: &mut W) -> Result<(), CliError> {
    type Handler<W> = fn(Flags, &mut W) -> Result<(), CliError>;
    let (command, flags): (Handler<W>, Flags) = match cli.command {
        Command::Solve(f) => (solve, f),
        Command::Convergence(f) => (convergence, f),
        Command::Decay(f) => (decay, f),
        Command::Eigen(f) => (eigen, f),
    };
    let flags = match flags.config.clone() {
        Some(path) => flags.merged_with(load_config(&path)?),
        None => flags,
    };
    command(flags, out)
}

fn solve<W: Write>(flags: Flags, out: &mut W) -> Result<(), CliError> {
    let problem = flags.problem()?;
    let level = flags.level();
    let dt = flags.dt.unwrap_or(1e-3);
    let t_end = flags.t_end.unwrap_or(1.0);
    let mut cfg = SchemeConfig::new(flags.scheme()?, dt, t_end);
    cfg.linear_tol = flags.tol()?;
    cfg.validate()?;

    let sim = run_simulation(&problem, Arc::new(Mesh::uniform(level)?), &cfg)?;
    let last = sim.series.last().expect("validated configs run at least one step");
    writeln!(out, "problem {} scheme {} level {level} dt {dt:e} steps {}", problem.name, cfg.kind.short_name(), sim.series.len())?;
    writeln!(out, "t = {:.6}  ||U|| = {:.6e}  ||grad U|| = {:.6e}  mu = {:.6}", last.t, last.l2_norm, last.h1_seminorm, last.mu)?;
    if let (Some(u), Some(g)) = (problem.exact_u, problem.exact_grad) {
        let e = error_norms(u, g, &sim.final_field, last.t, &QuadratureRule::dunavant4())?;
        writeln!(out, "L2 error = {:.6e}  H1 seminorm error = {:.6e}  H1 error = {:.6e}", e.l2, e.h1_semi, e.h1_full)?;
    }
    writeln!(
        out,
        "stability slack min = {:.3e}  gradient inequality slack min = {:.3e} ({})",
        sim.stability.min_stability_slack,
        sim.stability.min_gradient_slack,
        if sim.stability.gradient_asserted { "asserted" } else { "monitored" }
    )?;
    if let Some(path) = &flags.out {
        let script = write_decay_csv(&sim.series, path)?;
        writeln!(out, "wrote {} and {}", path.display(), script.display())?;
    }
    Ok(())
}

fn convergence<W: Write>(flags: Flags, out: &mut W) -> Result<(), CliError> {
    let problem = flags.problem()?;
    let (lo, hi) = parse_range_u32(flags.levels.as_deref().unwrap_or("0..4"))?;
    let rule = match (flags.dt_rule.as_deref(), flags.dt, flags.dt_scale) {
        (Some("fixed"), Some(k), _) | (None, Some(k), None) => DtRule::Fixed(k),
        (Some("fixed"), None, _) => return Err(usage("--dt-rule fixed needs --dt")),
        (Some("h2") | None, None, None) => DtRule::HSquared,
        (Some("h2") | None, None, Some(c)) => DtRule::ScaledHSquared(c),
        (Some("h2"), Some(_), _) | (None, Some(_), Some(_)) => {
            return Err(usage("--dt conflicts with --dt-rule h2; use --dt-scale"))
        }
        (Some(other), _, _) => return Err(usage(format!("unknown dt rule `{other}` (expected h2|fixed)"))),
    };
    if let DtRule::Fixed(k) | DtRule::ScaledHSquared(k) = rule {
        if !(k > 0.0) {
            return Err(usage("time step parameters must be positive"));
        }
    }
    let opts = StudyOptions { t_end: flags.t_end.unwrap_or(1.0), linear_tol: flags.tol()?, ..Default::default() };
    let scheme = flags.scheme()?;
    let rows = convergence_study(&problem, lo..=hi, scheme, rule, &opts)?;

    writeln!(out, "problem {} scheme {} t = {}", problem.name, scheme.short_name(), opts.t_end)?;
    writeln!(out, "{:>5} {:>10} {:>12} {:>13} {:>9} {:>13} {:>9} {:>13}", "level", "h", "dt", "L2 error", "rate", "H1 semi", "rate", "H1 full")?;
    for r in &rows {
        let rate = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
        writeln!(
            out,
            "{:>5} {:>10.6} {:>12.4e} {:>13.6e} {:>9} {:>13.6e} {:>9} {:>13.6e}",
            r.level,
            r.h,
            r.dt,
            r.l2_error,
            rate(r.l2_rate),
            r.h1_error,
            rate(r.h1_rate),
            r.h1_full_error
        )?;
    }
    if let Some(path) = &flags.out {
        let script = write_convergence_csv(&rows, path)?;
        writeln!(out, "wrote {} and {}", path.display(), script.display())?;
    }
    Ok(())
}

fn decay<W: Write>(flags: Flags, out: &mut W) -> Result<(), CliError> {
    let problem = flags.problem()?;
    let level = flags.level();
    let dt = flags.dt.unwrap_or(1e-3);
    let t_end = flags.t_end.unwrap_or(0.5);
    let window = flags.window.as_deref().map(parse_window).transpose()?;
    if !(dt > 0.0) {
        return Err(usage("--dt must be positive"));
    }
    let scheme = flags.scheme()?;
    let (sim, fit) = decay_study(&problem, level, scheme, dt, t_end, window)?;
    let lambda1 = 2.0 * std::f64::consts::PI.powi(2);
    writeln!(out, "problem {} scheme {} level {level} dt {dt:e} t_end {t_end}", problem.name, scheme.short_name())?;
    writeln!(out, "fit window [{}, {}] with {} samples", fit.t_window.0, fit.t_window.1, fit.samples)?;
    writeln!(out, "slope log||U||      = {:.6}  (rms residual {:.2e})", fit.slope, fit.residual)?;
    writeln!(out, "slope log||grad U|| = {:.6}  (rms residual {:.2e})", fit.slope_h1, fit.residual_h1)?;
    writeln!(out, "-lambda_1/2         = {:.6}", -lambda1 / 2.0)?;
    if let Some(path) = &flags.out {
        let script = write_decay_csv(&sim.series, path)?;
        writeln!(out, "wrote {} and {}", path.display(), script.display())?;
    }
    Ok(())
}

fn eigen<W: Write>(flags: Flags, out: &mut W) -> Result<(), CliError> {
    let level = flags.level();
    let tol = flags.tol.unwrap_or(1e-12);
    let lambda = discrete_eigenvalue(level, tol)?;
    let exact = 2.0 * std::f64::consts::PI.powi(2);
    writeln!(out, "level {level} h {}", uniform_spacing(level))?;
    writeln!(out, "lambda_1^h = {lambda:.10}")?;
    writeln!(out, "2 pi^2     = {exact:.10}  (relative excess {:.4e})", (lambda - exact) / exact)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range_u32("0..4").unwrap(), (0, 4));
        assert_eq!(parse_range_u32("2..=3").unwrap(), (2, 3));
        assert_eq!(parse_range_u32("3").unwrap(), (3, 3));
        assert!(parse_range_u32("4..1").is_err());
        assert!(parse_range_u32("a..b").is_err());
        assert_eq!(parse_window("2..6").unwrap(), (2.0, 6.0));
        assert!(parse_window("6..2").is_err());
    }

    #[test]
    fn flags_override_config() {
        let cli = Flags { level: Some(2), ..Default::default() };
        let file: Flags = serde_json::from_str(r#"{"level": 5, "problem": "ex2", "t-end": 0.25}"#).unwrap();
        let m = cli.merged_with(file);
        assert_eq!(m.level, Some(2));
        assert_eq!(m.problem.as_deref(), Some("ex2"));
        assert_eq!(m.t_end, Some(0.25));
    }

    #[test]
    fn unknown_config_key_rejected() {
        assert!(serde_json::from_str::<Flags>(r#"{"levle": 5}"#).is_err());
    }
}
