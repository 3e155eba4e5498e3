use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Duration;

use sha2::{Digest, Sha256};

use crate::graph::{ParameterSet, PublisherKey};
use crate::time::{SimDuration, SimTime};
use crate::trace::TraceLog;

pub const DEFAULT_LIVELOCK_THRESHOLD: u64 = 1_000_000;

/// One node of a job, in registration order.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSpec {
    pub type_name: String,
    pub name: String,
    pub params: ParameterSet,
}

impl NodeSpec {
    pub fn new(
        type_name: impl Into<String>,
        name: impl Into<String>,
        params: ParameterSet,
    ) -> Self {
        NodeSpec {
            type_name: type_name.into(),
            name: name.into(),
            params,
        }
    }
}

/// Everything needed to execute one simulation run.
///
/// A job finishes when simulated time would pass `start_time + duration`,
/// or, for `max_events`, once that many callbacks have executed and the
/// system is idle. At least one of the two must be set.
#[derive(Debug, Clone, PartialEq)]
pub struct JobSpec {
    /// Absolute timestamp mapped to the start of the simulated timeline.
    pub start_time: SimTime,
    pub duration: Option<SimDuration>,
    pub max_events: Option<u64>,
    pub nodes: Vec<NodeSpec>,
    pub delays: BTreeMap<PublisherKey, SimDuration>,
    /// Maximum callback executions in one drain of the ready queue.
    pub livelock_threshold: u64,
    /// Upper bound of the wall-clock sleep injected before each callback.
    /// Never influences simulated state.
    pub jitter_max: Duration,
}

impl JobSpec {
    pub fn new(start_time: SimTime, duration: SimDuration) -> Self {
        JobSpec {
            start_time,
            duration: Some(duration),
            max_events: None,
            nodes: Vec::new(),
            delays: BTreeMap::new(),
            livelock_threshold: DEFAULT_LIVELOCK_THRESHOLD,
            jitter_max: Duration::ZERO,
        }
    }

    /// A job bounded only by the number of executed callbacks.
    pub fn with_event_limit(start_time: SimTime, max_events: u64) -> Self {
        JobSpec {
            duration: None,
            max_events: Some(max_events),
            ..Self::new(start_time, SimDuration::ZERO)
        }
    }

    pub fn node(mut self, type_name: &str, name: &str, params: ParameterSet) -> Self {
        self.nodes.push(NodeSpec::new(type_name, name, params));
        self
    }

    pub fn delay(mut self, node: &str, topic: &str, delay: SimDuration) -> Self {
        self.delays.insert(PublisherKey::new(node, topic), delay);
        self
    }

    /// SHA-256 over a canonical rendering of every field that can influence
    /// simulated behavior. `jitter_max` is excluded.
    pub fn digest(&self) -> String {
        let mut text = String::new();
        let _ = writeln!(text, "start_time={}", self.start_time.as_nanos());
        let _ = writeln!(
            text,
            "duration={:?}",
            self.duration.map(SimDuration::as_nanos)
        );
        let _ = writeln!(text, "max_events={:?}", self.max_events);
        let _ = writeln!(text, "livelock_threshold={}", self.livelock_threshold);
        for node in &self.nodes {
            let _ = writeln!(text, "node type={:?} name={:?}", node.type_name, node.name);
            for (key, value) in node.params.iter() {
                let kind = match value {
                    crate::graph::ParamValue::Str(_) => "s",
                    crate::graph::ParamValue::Int(_) => "i",
                    crate::graph::ParamValue::Float(_) => "f",
                    crate::graph::ParamValue::Bool(_) => "b",
                };
                let _ = writeln!(text, "  {key:?}:{kind}={value}");
            }
        }
        for (key, delay) in &self.delays {
            let _ = writeln!(
                text,
                "delay {:?} {:?}={}",
                key.node,
                key.topic,
                delay.as_nanos()
            );
        }
        Sha256::digest(text.as_bytes())
            .iter()
            .fold(String::with_capacity(64), |mut hex, b| {
                let _ = write!(hex, "{b:02x}");
                hex
            })
    }
}

/// Outcome of a completed run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JobResult {
    pub finished: bool,
    /// 0 on success.
    pub exit_code: i32,
    pub final_sim_time: SimTime,
    pub executed_events: u64,
    pub trace: TraceLog,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_ignores_jitter_only() {
        let base = JobSpec::new(SimTime::from_nanos(1), SimDuration::from_secs(1)).node(
            "t",
            "n",
            ParameterSet::new().with("k", 1),
        );
        let mut jittered = base.clone();
        jittered.jitter_max = Duration::from_millis(2);
        assert_eq!(base.digest(), jittered.digest());
        assert_eq!(base.digest().len(), 64);

        let mut longer = base.clone();
        longer.duration = Some(SimDuration::from_secs(2));
        assert_ne!(base.digest(), longer.digest());

        // A string "1" and an integer 1 are different parameters.
        let retyped = JobSpec::new(SimTime::from_nanos(1), SimDuration::from_secs(1)).node(
            "t",
            "n",
            ParameterSet::new().with("k", "1"),
        );
        assert_ne!(base.digest(), retyped.digest());
    }
}
