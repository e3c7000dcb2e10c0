use std::io::Write;
use std::path::{Path, PathBuf};

use nonsmooth_core::analysis::{
    andronov_mayer, default_sweep_horizon, drilling_equilibrium, sweep_cell, theorem_conditions,
    RegionMap,
};
use nonsmooth_core::models::LoadChangeScenario;
use nonsmooth_core::{
    integrate_ap, integrate_filippov, integrate_gly, trajectory_distance, ApOptions,
    EpsilonSchedule, SolverConfig, Trajectory,
};
use rayon::prelude::*;
use serde_json::json;

use crate::output::*;
use crate::params::ParamSet;
use crate::spec::{build_model, Format, ModelKind, RunSpec, SolverKind};
use crate::CliError;

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => write_file(p, text),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(format!("stdout: {e}"))),
    }
}

/// Writes `tr` to `out` and its events next to it (`run.csv` ->
/// `run.events.csv`). Without a path only the samples go to stdout.
fn write_trajectory(tr: &Trajectory, out: Option<&Path>, format: Format) -> Result<(), CliError> {
    let (body, events) = match format {
        Format::Csv => (trajectory_csv(tr), events_csv(tr)),
        Format::Json => (pretty(&trajectory_json(tr)), pretty(&events_json(tr))),
    };
    emit(out, &body)?;
    if let Some(p) = out {
        write_file(&sibling(p, "events"), &events)?;
    }
    Ok(())
}

/// Runs one simulation and returns a one-line summary for stderr.
pub fn simulate(spec: &RunSpec, continuation: bool) -> Result<String, CliError> {
    spec.validate()?;
    let sys = build_model(spec.model, &spec.params)?;
    let out = spec.out.as_deref();
    match spec.solver {
        SolverKind::Filippov | SolverKind::Gly => {
            let res = if spec.solver == SolverKind::Filippov {
                integrate_filippov(&sys, &spec.x0, spec.t0, spec.t1, &spec.config)
            } else {
                integrate_gly(&sys, &spec.x0, spec.t0, spec.t1, &spec.config)
            };
            match res {
                Ok(tr) => {
                    write_trajectory(&tr, out, spec.format)?;
                    Ok(format!(
                        "{} samples, {} events",
                        tr.samples.len(),
                        tr.events.len()
                    ))
                }
                Err(e) => {
                    if let Some(partial) = e.partial_trajectory() {
                        write_trajectory(partial, out, spec.format)?;
                    }
                    Err(e.into())
                }
            }
        }
        SolverKind::Ap => simulate_ap(spec, &sys, continuation),
    }
}

fn simulate_ap(
    spec: &RunSpec,
    sys: &nonsmooth_core::PiecewiseSystem,
    continuation: bool,
) -> Result<String, CliError> {
    let out = spec.out.as_deref().ok_or_else(|| {
        CliError::Spec("--solver ap writes one file per eps and needs --out".into())
    })?;
    // validates ordering and positivity
    EpsilonSchedule::new(spec.eps.clone())?;
    let opts = ApOptions::default();
    let mut runs: Vec<(f64, Trajectory)> = Vec::new();
    let mut failure = None;
    for &eps in &spec.eps {
        let start = match runs.last() {
            Some((_, prev)) if continuation => prev.final_state().to_vec(),
            _ => spec.x0.clone(),
        };
        let sched = EpsilonSchedule::new(vec![eps])?;
        let path = sibling(out, &eps_tag(eps));
        match integrate_ap(sys, &start, spec.t0, spec.t1, &sched, &spec.config, &opts) {
            Ok(mut rep) => {
                let tr = rep.runs.remove(0).trajectory;
                write_trajectory(&tr, Some(&path), spec.format)?;
                runs.push((eps, tr));
            }
            Err(e) => {
                if let Some(partial) = e.partial_trajectory() {
                    write_trajectory(partial, Some(&path), spec.format)?;
                }
                failure = Some(e);
                break;
            }
        }
    }
    let mut distances = Vec::new();
    for w in runs.windows(2) {
        distances.push(trajectory_distance(&w[0].1, &w[1].1, opts.grid)?);
    }
    let converging = distances.windows(2).all(|w| w[1] < w[0]);
    let report = match spec.format {
        Format::Csv => {
            let mut s = String::from("eps_from,eps_to,distance\n");
            for (w, d) in runs.windows(2).zip(&distances) {
                s.push_str(&format!("{:?},{:?},{:?}\n", w[0].0, w[1].0, d));
            }
            s
        }
        Format::Json => pretty(&json!({
            "eps": runs.iter().map(|r| r.0).collect::<Vec<_>>(),
            "distances": distances,
            "converging": converging,
            "continuation": continuation,
        })),
    };
    write_file(&sibling(out, "report"), &report)?;
    match failure {
        Some(e) => Err(e.into()),
        None => Ok(format!(
            "{} eps runs, consecutive distances {:?}, {}",
            runs.len(),
            distances,
            if converging {
                "converging"
            } else {
                "not converging"
            }
        )),
    }
}

/// Parameters of the drilling load sweep.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub params: ParamSet,
    pub gamma1: Vec<f64>,
    pub horizon: Option<f64>,
    pub config: SolverConfig,
    pub out: Option<PathBuf>,
    pub format: Format,
}

pub const SWEEP_KEYS: &[&str] = &["a", "c", "M_lock", "gamma0"];
const DEFAULT_GRID: usize = 20;

/// Labels every `gamma1`; cells run in parallel, output keeps grid order.
pub fn sweep(spec: &SweepSpec) -> Result<RegionMap, CliError> {
    let p = &spec.params;
    p.only(SWEEP_KEYS, "sweep")?;
    let a = p.f64_or("a", 10.0)?;
    let c = p.f64_or("c", 5.0)?;
    let m_lock = p.f64_or("M_lock", 10.0)?;
    let gamma0 = p.f64_or("gamma0", 0.0)?;
    spec.config.validate()?;
    let grid = if spec.gamma1.is_empty() {
        // interior points of (gamma0, a/2)
        let (lo, hi) = (gamma0, 0.5 * a);
        (1..=DEFAULT_GRID)
            .map(|k| lo + (hi - lo) * k as f64 / (DEFAULT_GRID + 1) as f64)
            .collect()
    } else {
        spec.gamma1.clone()
    };
    let horizon = match spec.horizon {
        Some(h) if h > 0.0 && h.is_finite() => h,
        Some(h) => {
            return Err(CliError::Spec(format!(
                "sweep horizon {h} must be positive"
            )))
        }
        None => default_sweep_horizon(c),
    };
    let cells = grid
        .par_iter()
        .map(|&g1| sweep_cell(a, c, m_lock, gamma0, g1, horizon, &spec.config))
        .collect::<Result<Vec<_>, _>>()?;
    let map = RegionMap {
        a,
        c,
        m_lock,
        gamma0,
        cells,
    };
    let text = match spec.format {
        Format::Csv => region_map_csv(&map),
        Format::Json => pretty(&region_map_json(&map)),
    };
    emit(spec.out.as_deref(), &text)?;
    Ok(map)
}

/// Source of the trajectories to compare.
#[derive(Debug, Clone)]
pub enum CompareSpec {
    Files(PathBuf, PathBuf),
    /// Filippov against AP at each `eps` from the same start.
    Solvers(RunSpec),
}

pub fn compare(
    spec: &CompareSpec,
    grid: f64,
    out: Option<&Path>,
    format: Format,
) -> Result<Vec<f64>, CliError> {
    if grid.is_nan() || grid <= 0.0 {
        return Err(CliError::Spec("--grid must be positive".into()));
    }
    match spec {
        CompareSpec::Files(a, b) => {
            let (ta, tb) = (read_trajectory_file(a)?, read_trajectory_file(b)?);
            let d = trajectory_distance(&ta, &tb, grid)?;
            let text = match format {
                Format::Csv => format!("distance\n{d:?}\n"),
                Format::Json => pretty(&json!({ "distance": d })),
            };
            emit(out, &text)?;
            Ok(vec![d])
        }
        CompareSpec::Solvers(run) => {
            run.validate()?;
            let sys = build_model(run.model, &run.params)?;
            let sched = EpsilonSchedule::new(run.eps.clone())?;
            let fil = integrate_filippov(&sys, &run.x0, run.t0, run.t1, &run.config)?;
            let rep = integrate_ap(
                &sys,
                &run.x0,
                run.t0,
                run.t1,
                &sched,
                &run.config,
                &ApOptions::default(),
            )?;
            let dists = rep
                .runs
                .iter()
                .map(|r| trajectory_distance(&fil, &r.trajectory, grid))
                .collect::<Result<Vec<_>, _>>()?;
            let decreasing = dists.windows(2).all(|w| w[1] < w[0]);
            let text = match format {
                Format::Csv => {
                    let mut s = String::from("eps,distance\n");
                    for (e, d) in run.eps.iter().zip(&dists) {
                        s.push_str(&format!("{e:?},{d:?}\n"));
                    }
                    s
                }
                Format::Json => pretty(&json!({
                    "eps": run.eps,
                    "distances": dists,
                    "decreasing": decreasing,
                })),
            };
            emit(out, &text)?;
            Ok(dists)
        }
    }
}

pub const CHECK_DRILLING_KEYS: &[&str] = &["a", "c", "M_lock", "gamma0", "gamma1"];

/// Evaluates the load-jump conditions (drilling) or the Andronov-Mayer
/// condition (watt). Returns the rendered report.
pub fn check(model: ModelKind, params: &ParamSet, format: Format) -> Result<String, CliError> {
    let fields: Vec<(&str, serde_json::Value)> = match model {
        ModelKind::Drilling => {
            params.only(CHECK_DRILLING_KEYS, "check drilling")?;
            let a = params.f64_or("a", 10.0)?;
            let c = params.f64_or("c", 5.0)?;
            let m = params.f64_or("M_lock", 10.0)?;
            let g0 = params.f64_or("gamma0", 0.0)?;
            let g1 = params.f64_required("gamma1")?;
            let sc = LoadChangeScenario::new(g0, g1, 0.0)?;
            let r = theorem_conditions(a, c, m, &sc);
            let s0 = drilling_equilibrium(a, c, g0)?.s0;
            let s1 = drilling_equilibrium(a, c, g1)?.s0;
            vec![
                ("cond_gamma0", json!(r.cond_gamma0)),
                ("cond_gamma1", json!(r.cond_gamma1)),
                ("cond_m", json!(r.cond_m)),
                ("all", json!(r.all())),
                ("s0_gamma0", json!(s0)),
                ("s0_gamma1", json!(s1)),
            ]
        }
        ModelKind::Watt => {
            let p = crate::spec::watt_params(params)?;
            params.only(ModelKind::Watt.keys(), "check watt")?;
            vec![("andronov_mayer", json!(andronov_mayer(p.a, p.b)))]
        }
        other => {
            return Err(CliError::Spec(format!(
                "check supports drilling and watt, not {}",
                other.name()
            )))
        }
    };
    Ok(match format {
        Format::Csv => {
            let mut s = String::new();
            for (k, v) in &fields {
                s.push_str(&format!("{k} = {v}\n"));
            }
            s
        }
        Format::Json => pretty(&serde_json::Value::Object(
            fields
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
        )),
    })
}
