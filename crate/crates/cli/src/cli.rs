use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use nonsmooth_core::SolverConfig;

use crate::commands::{self, CompareSpec, SweepSpec};
use crate::params::{parse_list, ParamSet};
use crate::spec::{Format, ModelKind, RunSpec, SolverKind};
use crate::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "nonsmooth",
    version,
    about = "Simulate and analyse ODEs with a discontinuous right-hand side"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Integrate one model and write the trajectory plus an events file.
    Simulate(SimulateArgs),
    /// Label post-jump loads of the drilling model.
    Sweep(SweepArgs),
    /// Sup distance between two trajectory files, or Filippov against AP.
    Compare(CompareArgs),
    /// Evaluate the analytic stability conditions.
    Check(CheckArgs),
}

#[derive(Debug, Args)]
struct ParamArgs {
    /// Model parameter, repeatable; overrides --params.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    param: Vec<String>,
    /// File of `key = value` lines.
    #[arg(long, value_name = "FILE")]
    params: Option<PathBuf>,
}

impl ParamArgs {
    fn load(&self) -> Result<ParamSet, CliError> {
        let mut set = match &self.params {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                ParamSet::parse_file(&text)?
            }
            None => ParamSet::default(),
        };
        let mut cli = ParamSet::default();
        for p in &self.param {
            cli.insert_assignment(p)?;
        }
        set.merge(&cli);
        Ok(set)
    }
}

#[derive(Debug, Args)]
struct TolArgs {
    #[arg(long, allow_hyphen_values = true)]
    rel_tol: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    abs_tol: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    max_step: Option<f64>,
}

impl TolArgs {
    fn config(&self) -> SolverConfig {
        let mut cfg = SolverConfig::default();
        if let Some(v) = self.rel_tol {
            cfg.rel_tol = v;
        }
        if let Some(v) = self.abs_tol {
            cfg.abs_tol = v;
        }
        if let Some(v) = self.max_step {
            cfg.max_step = v;
        }
        cfg
    }
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long, value_enum)]
    model: ModelKind,
    #[command(flatten)]
    params: ParamArgs,
    /// Initial state, comma separated.
    #[arg(long, allow_hyphen_values = true, value_name = "V,V,...")]
    x0: String,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    t0: f64,
    #[arg(long, allow_hyphen_values = true)]
    t1: f64,
    #[command(flatten)]
    tol: TolArgs,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn spec(&self, solver: SolverKind, eps: Option<&str>) -> Result<RunSpec, CliError> {
        Ok(RunSpec {
            model: self.model,
            params: self.params.load()?,
            x0: parse_list("x0", &self.x0)?,
            t0: self.t0,
            t1: self.t1,
            solver,
            eps: eps
                .map(|e| parse_list("eps", e))
                .transpose()?
                .unwrap_or_default(),
            config: self.tol.config(),
            out: self.out.clone(),
            format: self.format,
        })
    }
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, value_enum, default_value_t = SolverKind::Filippov)]
    solver: SolverKind,
    /// Decreasing eps schedule for --solver ap.
    #[arg(long, value_name = "V,V,...")]
    eps: Option<String>,
    /// Start each AP run from the previous run's final state.
    #[arg(long)]
    continuation: bool,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Only `drilling` is supported.
    #[arg(long, value_enum, default_value_t = ModelKind::Drilling)]
    model: ModelKind,
    #[command(flatten)]
    params: ParamArgs,
    /// Post-jump loads; defaults to 20 interior points of (gamma0, a/2).
    #[arg(long, value_name = "V,V,...")]
    gamma1: Option<String>,
    /// Horizon of each run; defaults to 200/c.
    #[arg(long)]
    t1: Option<f64>,
    #[command(flatten)]
    tol: TolArgs,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CompareArgs {
    /// Two trajectory files; otherwise --model etc. select a solver comparison.
    #[arg(num_args = 2, value_names = ["A", "B"], conflicts_with_all = ["model", "x0", "t1", "eps"])]
    files: Vec<PathBuf>,
    #[arg(long, value_enum, requires_all = ["x0", "t1", "eps"])]
    model: Option<ModelKind>,
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    t0: f64,
    #[arg(long, allow_hyphen_values = true)]
    t1: Option<f64>,
    #[arg(long, value_name = "V,V,...")]
    eps: Option<String>,
    /// Spacing of the comparison grid.
    #[arg(long, default_value_t = 1e-3)]
    grid: f64,
    #[command(flatten)]
    tol: TolArgs,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CheckArgs {
    #[arg(long, value_enum)]
    model: ModelKind,
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

fn dispatch(cmd: Cmd) -> Result<(), CliError> {
    match cmd {
        Cmd::Simulate(a) => {
            let spec = a.run.spec(a.solver, a.eps.as_deref())?;
            let summary = commands::simulate(&spec, a.continuation)?;
            eprintln!("{summary}");
        }
        Cmd::Sweep(a) => {
            if a.model != ModelKind::Drilling {
                return Err(CliError::Spec(format!(
                    "sweep supports drilling, not {}",
                    a.model.name()
                )));
            }
            let spec = SweepSpec {
                params: a.params.load()?,
                gamma1: a
                    .gamma1
                    .as_deref()
                    .map(|g| parse_list("gamma1", g))
                    .transpose()?
                    .unwrap_or_default(),
                horizon: a.t1,
                config: a.tol.config(),
                out: a.out,
                format: a.format,
            };
            let map = commands::sweep(&spec)?;
            eprintln!("{} cells", map.cells.len());
        }
        Cmd::Compare(a) => {
            let spec = match (a.files.as_slice(), a.model) {
                ([x, y], _) => CompareSpec::Files(x.clone(), y.clone()),
                (_, Some(model)) => {
                    let run = RunSpec {
                        model,
                        params: a.params.load()?,
                        x0: parse_list("x0", a.x0.as_deref().unwrap_or_default())?,
                        t0: a.t0,
                        t1: a.t1.unwrap_or_default(),
                        solver: SolverKind::Ap,
                        eps: parse_list("eps", a.eps.as_deref().unwrap_or_default())?,
                        config: a.tol.config(),
                        out: None,
                        format: a.format,
                    };
                    CompareSpec::Solvers(run)
                }
                _ => return Err(CliError::Spec("compare needs two files or --model".into())),
            };
            commands::compare(&spec, a.grid, a.out.as_deref(), a.format)?;
        }
        Cmd::Check(a) => {
            let text = commands::check(a.model, &a.params.load()?, a.format)?;
            print!("{text}");
        }
    }
    Ok(())
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    // reserved; every solver here is deterministic
    let _ = std::env::var_os("NONSMOOTH_SEED");
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.cmd) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("nonsmooth: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn clap_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn bad_flags_exit_with_one() {
        assert_eq!(
            run([
                "nonsmooth",
                "simulate",
                "--model",
                "pendulum",
                "--x0",
                "0",
                "--t1",
                "1"
            ]),
            1
        );
        assert_eq!(run(["nonsmooth", "frobnicate"]), 1);
        assert_eq!(run(["nonsmooth", "check", "--model", "chua"]), 1);
        assert_eq!(run(["nonsmooth", "--help"]), 0);
    }
}
