//! File formats. Floats use the shortest representation that parses back
//! to the same value.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nonsmooth_core::analysis::{RegionLabel, RegionMap};
use nonsmooth_core::{Event, EventKind, Mode, Sample, Trajectory};
use serde_json::{json, Value};

use crate::CliError;

fn num(v: f64) -> String {
    format!("{v:?}")
}

fn json_num(v: f64) -> Value {
    // JSON has no NaN or infinities
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

pub fn trajectory_csv(tr: &Trajectory) -> String {
    let mut s = String::from("t");
    for i in 0..tr.dim {
        write!(s, ",x{i}").unwrap();
    }
    s.push_str(",mode\n");
    for smp in &tr.samples {
        s.push_str(&num(smp.t));
        for v in &smp.x {
            s.push(',');
            s.push_str(&num(*v));
        }
        writeln!(s, ",{}", smp.mode.tag()).unwrap();
    }
    s
}

pub fn events_csv(tr: &Trajectory) -> String {
    let mut s = String::from("t,kind");
    for i in 0..tr.dim {
        write!(s, ",x{i}").unwrap();
    }
    s.push('\n');
    for e in &tr.events {
        write!(s, "{},{}", num(e.t), e.kind.name()).unwrap();
        for v in &e.x {
            s.push(',');
            s.push_str(&num(*v));
        }
        s.push('\n');
    }
    s
}

pub fn trajectory_json(tr: &Trajectory) -> Value {
    let samples: Vec<Value> = tr
        .samples
        .iter()
        .map(|s| json!({"t": json_num(s.t), "x": s.x.iter().map(|v| json_num(*v)).collect::<Vec<_>>(), "mode": s.mode.tag()}))
        .collect();
    json!({"dim": tr.dim, "samples": samples})
}

pub fn events_json(tr: &Trajectory) -> Value {
    let events: Vec<Value> = tr
        .events
        .iter()
        .map(|e| json!({"t": json_num(e.t), "kind": e.kind.name(), "x": e.x.iter().map(|v| json_num(*v)).collect::<Vec<_>>()}))
        .collect();
    json!({"dim": tr.dim, "events": events})
}

pub fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values always serialize");
    s.push('\n');
    s
}

fn bad(what: &str) -> CliError {
    CliError::Spec(format!("malformed trajectory file: {what}"))
}

fn cell(field: &str) -> Result<f64, CliError> {
    field
        .parse()
        .map_err(|_| bad(&format!("`{field}` is not a number")))
}

/// Reads a trajectory written by [`trajectory_csv`], plus its events file
/// when given.
pub fn read_trajectory_csv(text: &str, events: Option<&str>) -> Result<Trajectory, CliError> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad("empty"))?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() < 3 || cols[0] != "t" || cols[cols.len() - 1] != "mode" {
        return Err(bad("header must be t,x0,...,mode"));
    }
    let dim = cols.len() - 2;
    let mut tr = Trajectory::new(dim);
    for line in lines.filter(|l| !l.is_empty()) {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != dim + 2 {
            return Err(bad("row width"));
        }
        let mode = Mode::from_tag(f[dim + 1]).ok_or_else(|| bad("mode tag"))?;
        let x = f[1..=dim]
            .iter()
            .map(|v| cell(v))
            .collect::<Result<Vec<_>, _>>()?;
        tr.samples.push(Sample {
            t: cell(f[0])?,
            x,
            mode,
        });
    }
    if let Some(ev) = events {
        let mut lines = ev.lines();
        lines.next().ok_or_else(|| bad("empty events file"))?;
        for line in lines.filter(|l| !l.is_empty()) {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != dim + 2 {
                return Err(bad("event row width"));
            }
            let kind = EventKind::from_name(f[1]).ok_or_else(|| bad("event kind"))?;
            let x = f[2..]
                .iter()
                .map(|v| cell(v))
                .collect::<Result<Vec<_>, _>>()?;
            tr.events.push(Event {
                t: cell(f[0])?,
                kind,
                x,
            });
        }
    }
    Ok(tr)
}

fn json_f64(v: &Value) -> Result<f64, CliError> {
    match v {
        Value::Null => Ok(f64::NAN),
        v => v.as_f64().ok_or_else(|| bad("expected a number")),
    }
}

fn json_vec(v: &Value) -> Result<Vec<f64>, CliError> {
    v.as_array()
        .ok_or_else(|| bad("expected an array"))?
        .iter()
        .map(json_f64)
        .collect()
}

pub fn read_trajectory_json(text: &str, events: Option<&str>) -> Result<Trajectory, CliError> {
    let v: Value = serde_json::from_str(text).map_err(|e| bad(&e.to_string()))?;
    let dim = v["dim"].as_u64().ok_or_else(|| bad("dim"))? as usize;
    let mut tr = Trajectory::new(dim);
    for s in v["samples"].as_array().ok_or_else(|| bad("samples"))? {
        let mode = s["mode"]
            .as_str()
            .and_then(Mode::from_tag)
            .ok_or_else(|| bad("mode tag"))?;
        tr.samples.push(Sample {
            t: json_f64(&s["t"])?,
            x: json_vec(&s["x"])?,
            mode,
        });
    }
    if let Some(ev) = events {
        let v: Value = serde_json::from_str(ev).map_err(|e| bad(&e.to_string()))?;
        for e in v["events"].as_array().ok_or_else(|| bad("events"))? {
            let kind = e["kind"]
                .as_str()
                .and_then(EventKind::from_name)
                .ok_or_else(|| bad("event kind"))?;
            tr.events.push(Event {
                t: json_f64(&e["t"])?,
                kind,
                x: json_vec(&e["x"])?,
            });
        }
    }
    Ok(tr)
}

/// Reads a trajectory file written in either format.
pub fn read_trajectory_file(path: &Path) -> Result<Trajectory, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    if text.trim_start().starts_with('{') {
        read_trajectory_json(&text, None)
    } else {
        read_trajectory_csv(&text, None)
    }
}

pub fn region_map_csv(map: &RegionMap) -> String {
    let mut s = String::from("gamma1,label,terminal_distance\n");
    for c in &map.cells {
        writeln!(
            s,
            "{},{},{}",
            num(c.gamma1),
            c.label.name(),
            num(c.terminal_distance)
        )
        .unwrap();
    }
    s
}

pub fn region_map_json(map: &RegionMap) -> Value {
    let cells: Vec<Value> = map
        .cells
        .iter()
        .map(|c| {
            json!({
                "gamma1": json_num(c.gamma1),
                "label": c.label.name(),
                "terminal_distance": json_num(c.terminal_distance),
                "simulated_converged": c.simulated_converged,
                "diagnostic": c.diagnostic,
            })
        })
        .collect();
    json!({"a": map.a, "c": map.c, "M_lock": map.m_lock, "gamma0": map.gamma0, "cells": cells})
}

/// `(gamma1, label, terminal_distance)` rows of a region map CSV.
pub fn read_region_map_csv(text: &str) -> Result<Vec<(f64, RegionLabel, f64)>, CliError> {
    let mut lines = text.lines();
    if lines.next() != Some("gamma1,label,terminal_distance") {
        return Err(bad("region map header"));
    }
    lines
        .filter(|l| !l.is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != 3 {
                return Err(bad("region map row width"));
            }
            let label = RegionLabel::from_name(f[1]).ok_or_else(|| bad("region label"))?;
            Ok((cell(f[0])?, label, cell(f[2])?))
        })
        .collect()
}

/// `run.csv` -> `run.<tag>.csv`.
pub fn sibling(out: &Path, tag: &str) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match out.extension() {
        Some(ext) => format!("{stem}.{tag}.{}", ext.to_string_lossy()),
        None => format!("{stem}.{tag}"),
    };
    out.with_file_name(name)
}

/// Tag used for the per-`eps` files of an AP run.
pub fn eps_tag(eps: f64) -> String {
    format!("eps{eps:e}")
}
