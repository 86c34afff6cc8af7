//! Per-outer-iteration traces shared by every solver.
//!
//! JSON lines layout: one `meta` line (solver, version, effective config,
//! setup time), one `iter` line per outer iteration, one `end` line with the
//! stop reason. The CSV layout carries the same iteration columns with the
//! meta line as a leading `#` comment.

use std::io::{BufRead, Write};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub elapsed_s: f64,
    pub epsilon: f64,
    pub tol: f64,
    pub inner_iterations: usize,
    #[serde(default)]
    pub rel_error: Option<f64>,
    pub objective: f64,
}

/// Why the outer loop ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OuterStop {
    /// `y = 0`, nothing to do.
    ZeroData,
    /// The smoothing parameter reached exactly zero (a K-sparse iterate).
    EpsilonZero,
    /// Smoothing at its floor and iterates no longer moving.
    Stagnation,
    /// Relative change below the solver's stop tolerance (IHT, FISTA).
    SmallChange,
    MaxIter,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterateTrace {
    pub solver: String,
    pub setup_seconds: f64,
    pub records: Vec<TraceRecord>,
    pub stop: OuterStop,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum Line {
    Meta { solver: String, version: String, setup_seconds: f64, config: serde_json::Value },
    Iter(TraceRecord),
    End { stop: OuterStop, iterations: usize },
}

/// Columns of the CSV trace.
pub const CSV_HEADER: [&str; 7] = ["iteration", "elapsed_s", "epsilon", "tol", "inner_iterations", "rel_error", "objective"];

impl IterateTrace {
    pub fn new(solver: impl Into<String>) -> Self {
        Self { solver: solver.into(), setup_seconds: 0.0, records: Vec::new(), stop: OuterStop::MaxIter }
    }

    pub fn iterations(&self) -> usize {
        self.records.last().map_or(0, |r| r.iteration)
    }

    pub fn total_inner(&self) -> usize {
        self.records.iter().map(|r| r.inner_iterations).sum()
    }

    /// First record whose relative error is at most `threshold`.
    pub fn first_below(&self, threshold: f64) -> Option<&TraceRecord> {
        self.records.iter().find(|r| r.rel_error.is_some_and(|e| e <= threshold))
    }

    pub fn write_jsonl(&self, mut w: impl Write, config: &serde_json::Value) -> Result<()> {
        let meta = Line::Meta {
            solver: self.solver.clone(),
            version: crate::VERSION.into(),
            setup_seconds: self.setup_seconds,
            config: config.clone(),
        };
        writeln!(w, "{}", serde_json::to_string(&meta)?)?;
        for r in &self.records {
            writeln!(w, "{}", serde_json::to_string(&Line::Iter(r.clone()))?)?;
        }
        writeln!(w, "{}", serde_json::to_string(&Line::End { stop: self.stop, iterations: self.iterations() })?)?;
        Ok(())
    }

    /// Parse a JSON lines trace; returns the trace and the embedded config.
    pub fn read_jsonl(r: impl BufRead) -> Result<(Self, serde_json::Value)> {
        let mut trace = None;
        let mut config = serde_json::Value::Null;
        for line in r.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str::<Line>(&line)? {
                Line::Meta { solver, setup_seconds, config: c, .. } => {
                    let mut t = IterateTrace::new(solver);
                    t.setup_seconds = setup_seconds;
                    trace = Some(t);
                    config = c;
                }
                Line::Iter(rec) => trace
                    .as_mut()
                    .ok_or_else(|| Error::InvalidParameter("trace record before meta line".into()))?
                    .records
                    .push(rec),
                Line::End { stop, .. } => {
                    trace.as_mut().ok_or_else(|| Error::InvalidParameter("end line before meta line".into()))?.stop = stop
                }
            }
        }
        let t = trace.ok_or_else(|| Error::InvalidParameter("empty trace".into()))?;
        Ok((t, config))
    }

    pub fn write_csv(&self, mut w: impl Write, config: &serde_json::Value) -> Result<()> {
        let meta = serde_json::json!({
            "solver": self.solver, "version": crate::VERSION, "setup_seconds": self.setup_seconds,
            "stop": self.stop, "config": config,
        });
        writeln!(w, "# {meta}")?;
        let mut c = csv::Writer::from_writer(w);
        c.write_record(CSV_HEADER)?;
        for r in &self.records {
            c.write_record([
                r.iteration.to_string(),
                r.elapsed_s.to_string(),
                r.epsilon.to_string(),
                r.tol.to_string(),
                r.inner_iterations.to_string(),
                r.rel_error.map_or(String::new(), |v| v.to_string()),
                r.objective.to_string(),
            ])?;
        }
        c.flush()?;
        Ok(())
    }

    pub fn read_csv(r: impl BufRead) -> Result<(Self, serde_json::Value)> {
        let mut lines = r.lines();
        let first = lines.next().ok_or_else(|| Error::InvalidParameter("empty csv trace".into()))??;
        let meta: serde_json::Value = serde_json::from_str(first.trim_start_matches('#').trim())?;
        let rest: Vec<String> = lines.collect::<std::io::Result<_>>()?;
        let body = rest.join("\n");
        let mut rdr = csv::Reader::from_reader(body.as_bytes());
        let mut t = IterateTrace::new(meta["solver"].as_str().unwrap_or_default());
        t.setup_seconds = meta["setup_seconds"].as_f64().unwrap_or(0.0);
        t.stop = serde_json::from_value(meta["stop"].clone())?;
        for rec in rdr.records() {
            let rec = rec?;
            let f = |i: usize| -> Result<f64> {
                rec[i].parse().map_err(|e| Error::InvalidParameter(format!("bad csv field {:?}: {e}", &rec[i])))
            };
            let u = |i: usize| -> Result<usize> {
                rec[i].parse().map_err(|e| Error::InvalidParameter(format!("bad csv field {:?}: {e}", &rec[i])))
            };
            t.records.push(TraceRecord {
                iteration: u(0)?,
                elapsed_s: f(1)?,
                epsilon: f(2)?,
                tol: f(3)?,
                inner_iterations: u(4)?,
                rel_error: if rec[5].is_empty() { None } else { Some(f(5)?) },
                objective: f(6)?,
            });
        }
        Ok((t, meta["config"].clone()))
    }
}

/// Wall clock started when the solver's timed region begins.
pub(crate) struct Clock(Instant);

impl Clock {
    pub fn start() -> Self {
        Self(Instant::now())
    }
    pub fn elapsed(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

pub(crate) fn rel_error(x: &[f64], reference: Option<&[f64]>) -> Option<f64> {
    reference.map(|r| crate::linalg::relative_error(x, r))
}

/// Snapshot handed to solver observers after each outer iteration
/// `n -> n+1`. Lets callers check invariants without the solver paying for
/// them.
pub struct OuterStep<'a> {
    /// `n + 1`.
    pub iteration: usize,
    /// `x~^n`, the starting point of this step.
    pub x_prev: &'a [f64],
    /// `x~^{n+1}`.
    pub x_new: &'a [f64],
    /// `w^n`, the weights of the solved system.
    pub w_prev: &'a [f64],
    /// `w^{n+1}`.
    pub w_new: &'a [f64],
    pub eps_prev: f64,
    pub eps_new: f64,
    /// Accuracy requested of the inner solve.
    pub tol: f64,
    pub inner: crate::krylov::KrylovReport,
}

pub type Observer<'a> = &'a mut dyn FnMut(&OuterStep);
