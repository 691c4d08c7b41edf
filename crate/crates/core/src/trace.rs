//! Per-iteration solver records and their CSV form.

use std::io::{BufRead, Write};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const CSV_HEADER: [&str; 8] = [
    "k",
    "objective",
    "gap",
    "step",
    "grad_calls",
    "prox_calls",
    "lo_calls",
    "wall_ns",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub k: u64,
    pub objective: f64,
    /// Merit or certificate value where the solver computes one.
    pub gap: Option<f64>,
    pub step: f64,
    pub grad_calls: u64,
    pub prox_calls: u64,
    pub lo_calls: u64,
    pub wall_ns: u64,
    /// Restart epoch, for restarted methods.
    #[serde(skip)]
    pub epoch: Option<u32>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleCounts {
    pub grad: u64,
    pub prox: u64,
    pub lo: u64,
    /// Function-value evaluations made by line searches and acceptance tests.
    pub value: u64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolverTrace {
    pub solver: String,
    pub rows: Vec<TraceRow>,
    /// `Ψ_min` when known; rate fitting uses `objective − reference_value`.
    pub reference_value: Option<f64>,
    pub metadata: Vec<(String, String)>,
    pub warnings: Vec<String>,
}

impl SolverTrace {
    pub fn new(solver: impl Into<String>) -> Self {
        Self {
            solver: solver.into(),
            ..Default::default()
        }
    }

    pub fn last(&self) -> Option<&TraceRow> {
        self.rows.last()
    }

    pub fn push_meta(&mut self, key: impl Into<String>, value: impl ToString) {
        self.metadata.push((key.into(), value.to_string()));
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// Gap used for rate fitting at row `i`.
    pub fn fit_gap(&self, i: usize) -> Option<f64> {
        let row = &self.rows[i];
        match self.reference_value {
            Some(v) => Some(row.objective - v),
            None => row.gap,
        }
    }

    /// Checks that `k` strictly increases and counters never decrease.
    pub fn check_invariants(&self) -> Result<()> {
        for w in self.rows.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            if b.k <= a.k
                || b.grad_calls < a.grad_calls
                || b.prox_calls < a.prox_calls
                || b.lo_calls < a.lo_calls
            {
                return Err(Error::InternalFault(format!(
                    "trace rows {} → {} are not ordered",
                    a.k, b.k
                )));
            }
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let io = |e: std::io::Error| Error::InvalidArgument(format!("trace write failed: {e}"));
        writeln!(out, "# solver={}", self.solver).map_err(io)?;
        if let Some(v) = self.reference_value {
            writeln!(out, "# reference_value={v:?}").map_err(io)?;
        }
        for (k, v) in &self.metadata {
            writeln!(out, "# {k}={v}").map_err(io)?;
        }
        for w in &self.warnings {
            writeln!(out, "# warning={w}").map_err(io)?;
        }
        let epochs: Vec<String> = self
            .rows
            .iter()
            .filter_map(|r| r.epoch.map(|e| format!("{}:{}", r.k, e)))
            .collect();
        if !epochs.is_empty() {
            writeln!(out, "# epochs={}", epochs.join(",")).map_err(io)?;
        }
        let mut w = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| Error::InvalidArgument(format!("trace write failed: {e}"));
        w.write_record(CSV_HEADER).map_err(csv_err)?;
        for r in &self.rows {
            w.write_record([
                r.k.to_string(),
                format!("{:?}", r.objective),
                r.gap.map(|g| format!("{g:?}")).unwrap_or_default(),
                format!("{:?}", r.step),
                r.grad_calls.to_string(),
                r.prox_calls.to_string(),
                r.lo_calls.to_string(),
                r.wall_ns.to_string(),
            ])
            .map_err(csv_err)?;
        }
        w.flush()
            .map_err(|e| Error::InvalidArgument(format!("trace write failed: {e}")))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let bad = |msg: String| Error::InvalidArgument(format!("malformed trace: {msg}"));
        let mut trace = SolverTrace::default();
        let mut body = String::new();
        let mut epochs: Vec<(u64, u32)> = Vec::new();
        for line in input.lines() {
            let line = line.map_err(|e| bad(e.to_string()))?;
            if let Some(meta) = line.strip_prefix("# ") {
                let (k, v) = meta.split_once('=').ok_or_else(|| bad(line.clone()))?;
                match k {
                    "solver" => trace.solver = v.to_string(),
                    "reference_value" => {
                        trace.reference_value = Some(v.parse().map_err(|_| bad(line.clone()))?)
                    }
                    "warning" => trace.warnings.push(v.to_string()),
                    "epochs" => {
                        for item in v.split(',') {
                            let (k, e) =
                                item.split_once(':').ok_or_else(|| bad(item.to_string()))?;
                            epochs.push((
                                k.parse().map_err(|_| bad(item.to_string()))?,
                                e.parse().map_err(|_| bad(item.to_string()))?,
                            ));
                        }
                    }
                    _ => trace.metadata.push((k.to_string(), v.to_string())),
                }
            } else {
                body.push_str(&line);
                body.push('\n');
            }
        }
        let mut reader = csv::Reader::from_reader(body.as_bytes());
        let header = reader.headers().map_err(|e| bad(e.to_string()))?;
        if header.iter().collect::<Vec<_>>() != CSV_HEADER {
            return Err(bad("unexpected header".into()));
        }
        for rec in reader.records() {
            let rec = rec.map_err(|e| bad(e.to_string()))?;
            let field = |i: usize| rec.get(i).ok_or_else(|| bad(format!("missing column {i}")));
            let float = |i: usize| -> Result<f64> {
                field(i)?.parse().map_err(|_| bad(format!("column {i}")))
            };
            let int = |i: usize| -> Result<u64> {
                field(i)?.parse().map_err(|_| bad(format!("column {i}")))
            };
            let gap = match field(2)? {
                "" => None,
                s => Some(s.parse().map_err(|_| bad("gap".into()))?),
            };
            let k = int(0)?;
            trace.rows.push(TraceRow {
                k,
                objective: float(1)?,
                gap,
                step: float(3)?,
                grad_calls: int(4)?,
                prox_calls: int(5)?,
                lo_calls: int(6)?,
                wall_ns: int(7)?,
                epoch: epochs.iter().find(|(ek, _)| *ek == k).map(|(_, e)| *e),
            });
        }
        Ok(trace)
    }
}

/// Accumulates rows with wall-clock stamps and running oracle counters.
#[derive(Debug)]
pub struct TraceRecorder {
    start: Instant,
    trace: SolverTrace,
    pub counts: OracleCounts,
    pub epoch: Option<u32>,
}

impl TraceRecorder {
    pub fn new(solver: &str, reference_value: Option<f64>) -> Self {
        let mut trace = SolverTrace::new(solver);
        trace.reference_value = reference_value;
        Self {
            start: Instant::now(),
            trace,
            counts: OracleCounts::default(),
            epoch: None,
        }
    }

    pub fn record(&mut self, k: u64, objective: f64, gap: Option<f64>, step: f64) {
        self.trace.rows.push(TraceRow {
            k,
            objective,
            gap,
            step,
            grad_calls: self.counts.grad,
            prox_calls: self.counts.prox,
            lo_calls: self.counts.lo,
            wall_ns: self.start.elapsed().as_nanos() as u64,
            epoch: self.epoch,
        });
    }

    pub fn warn(&mut self, msg: impl Into<String>) {
        let msg = msg.into();
        if !self.trace.warnings.contains(&msg) {
            self.trace.warnings.push(msg);
        }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) {
        self.trace.push_meta(key, value);
    }

    pub fn rows(&self) -> &[TraceRow] {
        &self.trace.rows
    }

    pub fn finish(self) -> SolverTrace {
        self.trace
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SolverTrace {
        let mut rec = TraceRecorder::new("demo", Some(0.125));
        rec.meta("seed", 42);
        rec.record(0, f64::INFINITY, None, 0.0);
        rec.counts.grad += 1;
        rec.epoch = Some(1);
        rec.record(1, 0.1 + 0.2, Some(1e-300), 0.5);
        rec.warn("line search fell back to adaptive");
        rec.finish()
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let t = sample();
        let text = t.to_csv_string();
        let back = SolverTrace::read_csv(text.as_bytes()).unwrap();
        assert_eq!(back, t);
        assert!(text.lines().any(|l| l == CSV_HEADER.join(",")));
    }

    #[test]
    fn rejects_foreign_header() {
        assert!(SolverTrace::read_csv("a,b\n1,2\n".as_bytes()).is_err());
    }

    #[test]
    fn invariants_catch_disorder() {
        let mut t = sample();
        assert!(t.check_invariants().is_ok());
        t.rows.swap(0, 1);
        assert!(t.check_invariants().is_err());
    }
}
