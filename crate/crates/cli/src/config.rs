//! Job configuration files.
//!
//! A job is a TOML document:
//!
//! ```toml
//! start_time_ns = 1700000000000000000
//! duration_ns = 10000000000      # and/or max_events = <n>
//! livelock_threshold = 1000000   # optional
//! jitter_max_ms = 0              # optional
//!
//! [[nodes]]                      # registration order = file order
//! type = "bench_source"
//! name = "node_a"
//! [nodes.params]
//! publish_topic = "/a"
//! timer0_period_ms = 100
//! timer0_id = "0x37393e32a514c8af"
//!
//! [delays]                       # optional, "<node>/<topic>" = ns
//! "node_a//a" = 5000000
//! ```
//!
//! Unknown keys anywhere are an error.

use std::collections::BTreeMap;
use std::time::Duration;

use detsim_core::{
    GraphError, JobSpec, Kernel, KernelError, NodeFactory, NodeSpec, ParamValue, ParameterSet,
    PublisherKey, SimDuration, SimTime,
};
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("validation failed ({rule}): {detail}")]
    Validation { rule: &'static str, detail: String },
}

impl ConfigError {
    fn validation(rule: &'static str, detail: impl Into<String>) -> Self {
        ConfigError::Validation {
            rule,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    start_time_ns: u64,
    duration_ns: Option<u64>,
    max_events: Option<u64>,
    livelock_threshold: Option<u64>,
    jitter_max_ms: Option<f64>,
    nodes: Vec<NodeEntry>,
    #[serde(default)]
    delays: BTreeMap<String, u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeEntry {
    #[serde(rename = "type")]
    type_name: String,
    name: String,
    #[serde(default)]
    params: toml::Table,
}

/// Parses and validates a job configuration against `factory`.
pub fn parse_config(text: &str, factory: &NodeFactory) -> Result<JobSpec, ConfigError> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| {
        let (line, column) = e
            .span()
            .map(|span| line_col(text, span.start))
            .unwrap_or((0, 0));
        ConfigError::Parse {
            line,
            column,
            message: e.message().to_owned(),
        }
    })?;

    let mut job = JobSpec::new(SimTime::from_nanos(file.start_time_ns), SimDuration::ZERO);
    job.duration = file.duration_ns.map(SimDuration::from_nanos);
    job.max_events = file.max_events;
    if let Some(threshold) = file.livelock_threshold {
        job.livelock_threshold = threshold;
    }
    if let Some(ms) = file.jitter_max_ms {
        job.jitter_max = jitter_from_ms(ms)?;
    }
    for entry in file.nodes {
        let params = params_from_table(&entry.name, entry.params)?;
        job.nodes
            .push(NodeSpec::new(entry.type_name, entry.name, params));
    }
    for (key, ns) in file.delays {
        let (node, topic) = key
            .split_once('/')
            .filter(|(node, topic)| !node.is_empty() && !topic.is_empty())
            .ok_or_else(|| {
                ConfigError::validation("delay_key", format!("`{key}` is not `<node>/<topic>`"))
            })?;
        job.delays
            .insert(PublisherKey::new(node, topic), SimDuration::from_nanos(ns));
    }

    validate(&job, factory)?;
    Ok(job)
}

/// Converts a jitter bound in milliseconds. Must be finite and non-negative.
pub fn jitter_from_ms(ms: f64) -> Result<Duration, ConfigError> {
    if !ms.is_finite() || ms < 0.0 {
        return Err(ConfigError::validation(
            "jitter_max_ms",
            format!("{ms} is not a non-negative number of milliseconds"),
        ));
    }
    Ok(Duration::from_secs_f64(ms / 1000.0))
}

/// Builds the job's graph once, which runs every construction-time check.
fn validate(job: &JobSpec, factory: &NodeFactory) -> Result<(), ConfigError> {
    Kernel::new(job, factory).map(drop).map_err(|e| {
        let rule = match &e {
            KernelError::Graph(g) => match g {
                GraphError::UnknownNodeType(_) => "unknown_node_type",
                GraphError::DuplicateNodeName(_) => "duplicate_node_name",
                GraphError::InvalidName(_) => "node_name",
                GraphError::InvalidTopic(_) => "topic_name",
                GraphError::DuplicateService(_) => "duplicate_service",
                GraphError::DuplicateCallbackId(_) => "duplicate_callback_id",
                GraphError::ZeroPeriod => "timer_period",
                GraphError::ZeroDepth => "queue_depth",
                GraphError::UnknownService { .. } => "unknown_service",
                GraphError::UnmatchedDelay { .. } => "delay_target",
                GraphError::MissingParameter(_)
                | GraphError::UnknownParameter(_)
                | GraphError::InvalidParameter { .. } => "node_params",
            },
            KernelError::Time(_) => "time_range",
            KernelError::InvalidJob(_) => "job",
            _ => "job",
        };
        ConfigError::validation(rule, e.to_string())
    })
}

fn params_from_table(node: &str, table: toml::Table) -> Result<ParameterSet, ConfigError> {
    let mut params = ParameterSet::new();
    for (key, value) in table {
        let value = match value {
            toml::Value::String(s) => ParamValue::Str(s),
            toml::Value::Integer(i) => ParamValue::Int(i),
            toml::Value::Float(x) => ParamValue::Float(x),
            toml::Value::Boolean(b) => ParamValue::Bool(b),
            other => {
                return Err(ConfigError::validation(
                    "node_params",
                    format!(
                        "node `{node}`: parameter `{key}` has unsupported type {}",
                        other.type_str()
                    ),
                ))
            }
        };
        params.insert(key, value);
    }
    Ok(params)
}

/// 1-based line and column of a byte offset.
fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}
