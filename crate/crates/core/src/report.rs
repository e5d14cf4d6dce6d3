//! Run reports: named checks of an observed value against a bound,
//! emitted as JSON lines.

use std::time::Instant;

use serde::Serialize;

/// Parameters a run was made with.
#[derive(Clone, Debug, Default, Serialize, PartialEq)]
pub struct ParamRecord {
    pub lambda: Option<f64>,
    pub tau: Option<f64>,
    pub m: Option<f64>,
    pub s: Option<f64>,
    pub h: Option<Vec<f64>>,
}

/// `observed <= bound` (up to `slack`) for one named property. Pointwise
/// checks keep the node with the least margin.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Check {
    pub name: String,
    pub bound: f64,
    pub observed: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub node: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<f64>>,
    /// Values the observation was computed from, e.g. approximant and data.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    pub fn scalar(name: impl Into<String>, observed: f64, bound: f64) -> Self {
        Check {
            name: name.into(),
            bound,
            observed,
            pass: observed <= bound,
            node: None,
            coords: None,
            values: None,
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// Accumulates `observed <= bound` over many nodes and keeps the worst one.
#[derive(Clone, Debug)]
pub struct PointwiseCheck {
    name: String,
    count: usize,
    violations: usize,
    worst: Option<(f64, Check)>,
}

impl PointwiseCheck {
    pub fn new(name: impl Into<String>) -> Self {
        PointwiseCheck {
            name: name.into(),
            count: 0,
            violations: 0,
            worst: None,
        }
    }

    pub fn observe(&mut self, node: usize, coords: &[f64], observed: f64, bound: f64, values: &[f64]) {
        self.count += 1;
        let pass = observed <= bound;
        if !pass {
            self.violations += 1;
        }
        let margin = observed - bound;
        if self.worst.as_ref().is_none_or(|(m, _)| margin > *m) {
            let check = Check {
                name: self.name.clone(),
                bound,
                observed,
                pass,
                node: Some(node),
                coords: Some(coords.to_vec()),
                values: Some(values.to_vec()),
                note: None,
            };
            self.worst = Some((margin, check));
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn violations(&self) -> usize {
        self.violations
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// The worst node, with pass = no violation anywhere.
    pub fn finish(self) -> Check {
        let (count, violations) = (self.count, self.violations);
        match self.worst {
            Some((_, mut c)) => {
                c.pass = violations == 0;
                c.note = Some(format!("{violations} violations over {count} nodes"));
                c
            }
            None => Check::scalar(self.name, 0.0, 0.0).with_note("no nodes checked"),
        }
    }
}

#[derive(Serialize)]
struct Header<'a> {
    command: &'a [String],
    seed: u64,
    params: &'a ParamRecord,
}

#[derive(Serialize)]
struct Summary<'a> {
    checks: usize,
    failed: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    timings_ms: Option<&'a [(String, f64)]>,
}

/// A command's record: header line, one line per check, summary line.
#[derive(Clone, Debug)]
pub struct RunReport {
    pub command: Vec<String>,
    pub seed: u64,
    pub params: ParamRecord,
    pub checks: Vec<Check>,
    pub timings_ms: Vec<(String, f64)>,
    /// Timings make output nondeterministic, so they are opt-in.
    pub record_timings: bool,
}

impl RunReport {
    pub fn new(command: Vec<String>, seed: u64, params: ParamRecord) -> Self {
        RunReport {
            command,
            seed,
            params,
            checks: Vec::new(),
            timings_ms: Vec::new(),
            record_timings: false,
        }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    /// Runs `f`, recording its wall time under `label` if timings are on.
    pub fn timed<T>(&mut self, label: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        if self.record_timings {
            self.timings_ms
                .push((label.to_string(), start.elapsed().as_secs_f64() * 1e3));
        }
        out
    }

    pub fn failed(&self) -> usize {
        self.checks.iter().filter(|c| !c.pass).count()
    }

    pub fn all_passed(&self) -> bool {
        self.failed() == 0
    }

    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        let header = Header {
            command: &self.command,
            seed: self.seed,
            params: &self.params,
        };
        out.push_str(&serde_json::to_string(&header).expect("header serialises"));
        out.push('\n');
        for c in &self.checks {
            out.push_str(&serde_json::to_string(c).expect("check serialises"));
            out.push('\n');
        }
        let summary = Summary {
            checks: self.checks.len(),
            failed: self.failed(),
            timings_ms: self.record_timings.then_some(self.timings_ms.as_slice()),
        };
        out.push_str(&serde_json::to_string(&summary).expect("summary serialises"));
        out.push('\n');
        out
    }
}
