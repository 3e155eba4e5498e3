//! Deterministic discrete-event simulation kernel for callback-based node
//! graphs.
//!
//! All nodes of a simulation live in one [`Kernel`], which runs every
//! callback on a single thread in first-in-first-out order and only moves
//! simulated time once the ready queue is empty. Time then jumps straight to
//! the next timer deadline or delayed publication, so a run's wall-clock cost
//! is independent of its simulated duration.
//!
//! ```
//! use detsim_core::{benchmark, Kernel, NodeFactory, SimDuration, SimTime};
//!
//! let job = benchmark::default_job(SimTime::from_nanos(0), SimDuration::from_secs(1));
//! let factory = NodeFactory::with_benchmark_nodes();
//! let mut kernel = Kernel::new(&job, &factory).unwrap();
//! let result = kernel.run().unwrap();
//! assert!(result.finished);
//! assert_eq!(result.exit_code, 0);
//! ```

pub mod benchmark;
pub mod executor;
pub mod graph;
pub mod time;
pub mod trace;

pub use executor::{
    Context, EventKind, JobResult, JobSpec, Kernel, KernelError, KernelOptions, NodeSpec,
    ReadyEvent, TieBreak,
};
pub use graph::{
    CallbackId, ClientId, EntityId, Graph, GraphError, Node, NodeBuilder, NodeFactory, NodeId,
    ParamValue, ParameterSet, Payload, PublisherId, PublisherKey, ServiceId, SubscriptionId,
    SubscriptionStats, TimerId,
};
pub use time::{SimClock, SimDuration, SimTime, TimeError};
pub use trace::{compare, TraceError, TraceHeader, TraceLog, TraceRecord, Verdict};
