use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use detsim_core::{
    compare, JobSpec, Kernel, KernelError, KernelOptions, NodeFactory, TieBreak, Verdict,
};
use rayon::prelude::*;

use crate::config::{jitter_from_ms, parse_config};
use crate::report::{RunReport, RunSummary};
use crate::{exit, CliError};

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub config: PathBuf,
    pub runs: usize,
    pub trace_dir: PathBuf,
    /// Overrides the config's `jitter_max_ms`.
    pub jitter_max_ms: Option<f64>,
    /// Number of worker threads; `None` runs sequentially.
    pub parallel: Option<usize>,
    pub tie_break: TieBreak,
}

impl RunOptions {
    pub fn new(config: impl Into<PathBuf>, runs: usize, trace_dir: impl Into<PathBuf>) -> Self {
        RunOptions {
            config: config.into(),
            runs,
            trace_dir: trace_dir.into(),
            jitter_max_ms: None,
            parallel: None,
            tie_break: TieBreak::Normative,
        }
    }
}

pub fn exit_code_for(err: &KernelError) -> i32 {
    match err {
        KernelError::LivelockDetected { .. } => exit::LIVELOCK,
        KernelError::StarvedClock { .. } => exit::STARVED,
        _ => exit::FAILURE,
    }
}

pub fn trace_file_name(index: usize) -> String {
    format!("run_{index:03}.trace")
}

struct RunArtifact {
    summary: RunSummary,
    trace: Vec<u8>,
    reached_ns: u64,
}

fn run_once(
    index: usize,
    job: &JobSpec,
    factory: &NodeFactory,
    options: KernelOptions,
) -> RunArtifact {
    let started = Instant::now();
    let mut kernel = Kernel::with_options(job, factory, options)
        .expect("job was validated when the config was parsed");
    let outcome = kernel.run();
    let wall = started.elapsed();
    let (finished, exit_code, error) = match &outcome {
        Ok(result) => (result.finished, result.exit_code, None),
        Err(e) => (false, exit_code_for(e), Some(e.to_string())),
    };
    RunArtifact {
        summary: RunSummary {
            index,
            finished,
            exit_code,
            executed_events: kernel.executed_events(),
            wall,
            final_states: kernel.final_states().unwrap_or_default(),
            error,
        },
        trace: kernel.trace().serialize(),
        reached_ns: kernel.now().as_nanos() - job.start_time.as_nanos(),
    }
}

/// Executes `runs` fresh kernels for one job and compares their traces.
/// Writes `run_NNN.trace` files and `report.txt` into the trace directory.
pub fn cmd_run(options: &RunOptions) -> Result<RunReport, CliError> {
    let text = fs::read_to_string(&options.config).map_err(|e| CliError::io(&options.config, e))?;
    let factory = NodeFactory::with_benchmark_nodes();
    let mut job = parse_config(&text, &factory)?;
    if let Some(ms) = options.jitter_max_ms {
        job.jitter_max = jitter_from_ms(ms)?;
    }
    run_job(&job, &factory, options)
}

/// Same as [`cmd_run`] for an already parsed job.
pub fn run_job(
    job: &JobSpec,
    factory: &NodeFactory,
    options: &RunOptions,
) -> Result<RunReport, CliError> {
    if options.runs == 0 {
        return Err(CliError::Usage("--runs must be at least 1".into()));
    }
    fs::create_dir_all(&options.trace_dir).map_err(|e| CliError::io(&options.trace_dir, e))?;
    let kernel_options = KernelOptions {
        tie_break: options.tie_break,
    };

    let artifacts: Vec<RunArtifact> = match options.parallel {
        None | Some(0) | Some(1) => (0..options.runs)
            .map(|i| run_once(i, job, factory, kernel_options))
            .collect(),
        Some(threads) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| CliError::Usage(format!("cannot start {threads} threads: {e}")))?;
            pool.install(|| {
                (0..options.runs)
                    .into_par_iter()
                    .map(|i| run_once(i, job, factory, kernel_options))
                    .collect()
            })
        }
    };

    let mut divergence = None;
    for artifact in &artifacts {
        let path = options
            .trace_dir
            .join(trace_file_name(artifact.summary.index));
        fs::write(&path, &artifact.trace).map_err(|e| CliError::io(&path, e))?;
        if divergence.is_none() {
            if let Verdict::FirstDivergence { line, .. } =
                compare(&artifacts[0].trace, &artifact.trace, false)
            {
                divergence = Some((artifact.summary.index, line));
            }
        }
    }

    let all_identical = divergence.is_none();
    let failed = artifacts
        .iter()
        .map(|a| a.summary.exit_code)
        .find(|&code| code != exit::OK);
    let exit_code = match failed {
        Some(code) => code,
        None if !all_identical => exit::DIVERGENCE,
        None => exit::OK,
    };
    let sim_duration_ns = job
        .duration
        .map_or(artifacts[0].reached_ns, |d| d.as_nanos());

    let report = RunReport {
        runs: artifacts.into_iter().map(|a| a.summary).collect(),
        all_identical,
        divergence,
        sim_duration_ns,
        exit_code,
    };
    let path = options.trace_dir.join("report.txt");
    fs::write(&path, report.render()).map_err(|e| CliError::io(&path, e))?;
    Ok(report)
}

/// Compares two trace files.
pub fn cmd_compare(a: &Path, b: &Path, strict_header: bool) -> Result<Verdict, CliError> {
    let left = fs::read(a).map_err(|e| CliError::io(a, e))?;
    let right = fs::read(b).map_err(|e| CliError::io(b, e))?;
    Ok(compare(&left, &right, strict_header))
}
