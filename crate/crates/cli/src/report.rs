use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::time::Duration;

/// Outcome of one simulation run inside `detsim run`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunSummary {
    pub index: usize,
    pub finished: bool,
    pub exit_code: i32,
    pub executed_events: u64,
    pub wall: Duration,
    pub final_states: BTreeMap<String, u64>,
    /// Kernel error message, for runs that did not finish.
    pub error: Option<String>,
}

/// Aggregate over all runs of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub runs: Vec<RunSummary>,
    /// Every trace compared equal to the first one.
    pub all_identical: bool,
    /// First divergence, as (run index, line), if any.
    pub divergence: Option<(usize, usize)>,
    pub sim_duration_ns: u64,
    pub exit_code: i32,
}

impl RunReport {
    pub fn mean_wall(&self) -> Duration {
        if self.runs.is_empty() {
            return Duration::ZERO;
        }
        self.runs.iter().map(|r| r.wall).sum::<Duration>() / self.runs.len() as u32
    }

    /// Simulated time per unit of wall time, averaged over runs.
    pub fn speedup(&self) -> f64 {
        let wall = self.mean_wall().as_nanos() as f64;
        if wall == 0.0 {
            return f64::INFINITY;
        }
        self.sim_duration_ns as f64 / wall
    }

    /// Contents of `report.txt`.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "runs: {}", self.runs.len());
        let _ = writeln!(out, "all_identical: {}", self.all_identical);
        let _ = writeln!(out, "exit_code: {}", self.exit_code);
        let _ = writeln!(out, "sim_duration_ns: {}", self.sim_duration_ns);
        let _ = writeln!(out, "mean_wall_ns: {}", self.mean_wall().as_nanos());
        let _ = writeln!(out, "speedup: {:.1}", self.speedup());
        if let Some((run, line)) = self.divergence {
            let _ = writeln!(out, "first_divergence: run_{run:03} line {line}");
        }
        for r in &self.runs {
            let _ = write!(
                out,
                "run_{:03}: finished={} exit_code={} executed_events={} wall_ns={}",
                r.index,
                r.finished,
                r.exit_code,
                r.executed_events,
                r.wall.as_nanos()
            );
            for (node, state) in &r.final_states {
                let _ = write!(out, " {node}={state:016x}");
            }
            if let Some(err) = &r.error {
                let _ = write!(out, " error=\"{err}\"");
            }
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for RunReport {
    /// One-line stdout summary.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "runs={} all_identical={} speedup={:.1}x exit_code={}",
            self.runs.len(),
            self.all_identical,
            self.speedup(),
            self.exit_code
        )
    }
}
