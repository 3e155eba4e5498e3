//! Synthetic determinism benchmark.
//!
//! Every benchmark node keeps a 64-bit hash state. Each callback folds its
//! own callback id, the absolute execution timestamp and its input word (if
//! any) into that state with [`mix_state`], and most callbacks then publish
//! the new state to other nodes. Any change in execution order or timing
//! therefore shows up in the final states.
//!
//! All four node types share one parameter scheme:
//!
//! | key | meaning |
//! |-----|---------|
//! | `initial_state` | starting hash state (default 0) |
//! | `publish_topic` | topic the node publishes its state to |
//! | `timer{i}_period_ms`, `timer{i}_id` | timer `i`, publishes if `publish_topic` is set and calls the service if the node has a client |
//! | `sub{i}_topic`, `sub{i}_id`, `sub{i}_depth` (default 1), `sub{i}_forward` (default false) | subscription `i`; forwarding republishes the state |
//! | `service_name`, `service_id` | service answering with the updated state |
//! | `client_service`, `client_id` | client sending the state as request; `client_id` identifies the response handler |
//!
//! Indices start at 0 and must be contiguous. Ids accept integers or
//! `0x`-prefixed hex strings. Unknown keys are rejected.

use std::collections::{BTreeMap, BTreeSet};

use crate::executor::{Context, JobSpec, Kernel, KernelError, NodeSpec};
use crate::graph::{
    CallbackId, ClientId, GraphError, Node, NodeBuilder, NodeFactory, ParameterSet, Payload,
    PublisherId, ServiceId, SubscriptionId, TimerId,
};
use crate::graph::{Graph, NodeId};
use crate::time::{SimDuration, SimTime};

pub const SOURCE: &str = "bench_source";
pub const RELAY: &str = "bench_relay";
pub const SERVICE: &str = "bench_service";
pub const CLIENT: &str = "bench_client";

/// SplitMix64 output function applied to `x + golden gamma`.
pub fn sm64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds one callback execution into a node's hash state. `input` is 0 for
/// callbacks without input data.
pub fn mix_state(state: u64, callback_id: u64, t_ns: u64, input: u64) -> u64 {
    sm64(state ^ sm64(callback_id ^ sm64(t_ns ^ input)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    Source,
    Relay,
    Service,
    Client,
}

struct BenchNode {
    state: u64,
    publisher: Option<PublisherId>,
    /// Subscriptions that republish the state after mixing.
    forwarding: BTreeSet<SubscriptionId>,
    client: Option<ClientId>,
}

impl BenchNode {
    fn mix(&mut self, cx: &Context<'_>, input: u64) -> u64 {
        self.state = mix_state(self.state, cx.callback_id().0, cx.now().as_nanos(), input);
        self.state
    }
}

impl Node for BenchNode {
    fn on_timer(&mut self, cx: &mut Context<'_>, _timer: TimerId) {
        let state = self.mix(cx, 0);
        if let Some(p) = self.publisher {
            cx.publish(p, state);
        }
        if let Some(c) = self.client {
            cx.call(c, state);
        }
    }

    fn on_message(&mut self, cx: &mut Context<'_>, sub: SubscriptionId, msg: &Payload) {
        let state = self.mix(cx, msg.value);
        if self.forwarding.contains(&sub) {
            let p = self.publisher.expect("forwarding requires a publisher");
            cx.publish(p, state);
        }
    }

    fn on_request(&mut self, cx: &mut Context<'_>, _service: ServiceId, request: u64) -> u64 {
        self.mix(cx, request)
    }

    fn on_response(&mut self, cx: &mut Context<'_>, _client: ClientId, response: u64) {
        self.mix(cx, response);
    }

    fn state(&self) -> Option<u64> {
        Some(self.state)
    }
}

/// Tracks which parameters a constructor consumed.
struct Params<'p> {
    params: &'p ParameterSet,
    used: BTreeSet<String>,
}

impl<'p> Params<'p> {
    fn u64(&mut self, key: &str) -> Result<Option<u64>, GraphError> {
        self.used.insert(key.to_owned());
        self.params.get_u64(key)
    }

    fn str(&mut self, key: &str) -> Result<Option<&'p str>, GraphError> {
        self.used.insert(key.to_owned());
        self.params.get_str(key)
    }

    fn bool(&mut self, key: &str) -> Result<Option<bool>, GraphError> {
        self.used.insert(key.to_owned());
        self.params.get_bool(key)
    }

    fn required_u64(&mut self, key: &str) -> Result<u64, GraphError> {
        self.u64(key)?
            .ok_or_else(|| GraphError::MissingParameter(key.to_owned()))
    }

    fn finish(self) -> Result<(), GraphError> {
        match self.params.iter().find(|(k, _)| !self.used.contains(*k)) {
            Some((key, _)) => Err(GraphError::UnknownParameter(key.to_owned())),
            None => Ok(()),
        }
    }
}

fn build(
    role: Role,
    b: &mut NodeBuilder<'_>,
    params: &ParameterSet,
) -> Result<Box<dyn Node>, GraphError> {
    let mut p = Params {
        params,
        used: BTreeSet::new(),
    };
    let state = p.u64("initial_state")?.unwrap_or(0);
    let publisher = match p.str("publish_topic")? {
        Some(topic) => Some(b.publisher(topic)?),
        None => None,
    };

    let mut timers = 0;
    while params.contains(&format!("timer{timers}_period_ms")) {
        let period = p.required_u64(&format!("timer{timers}_period_ms"))?;
        let period = period
            .checked_mul(1_000_000)
            .map(SimDuration::from_nanos)
            .ok_or(GraphError::InvalidParameter {
                key: format!("timer{timers}_period_ms"),
                expected: "period below 2^64 ns",
            })?;
        let id = p.required_u64(&format!("timer{timers}_id"))?;
        b.timer(period, CallbackId(id))?;
        timers += 1;
    }

    let mut subs = 0;
    let mut forwarding = BTreeSet::new();
    while params.contains(&format!("sub{subs}_topic")) {
        let topic = p
            .str(&format!("sub{subs}_topic"))?
            .expect("presence checked");
        let id = p.required_u64(&format!("sub{subs}_id"))?;
        let depth = p.u64(&format!("sub{subs}_depth"))?.unwrap_or(1);
        let depth = usize::try_from(depth).map_err(|_| GraphError::InvalidParameter {
            key: format!("sub{subs}_depth"),
            expected: "queue depth",
        })?;
        let sub = b.subscription(topic, depth, CallbackId(id))?;
        if p.bool(&format!("sub{subs}_forward"))?.unwrap_or(false) {
            if publisher.is_none() {
                return Err(GraphError::MissingParameter("publish_topic".into()));
            }
            forwarding.insert(sub);
        }
        subs += 1;
    }

    let service = match p.str("service_name")? {
        Some(name) => {
            let id = p.required_u64("service_id")?;
            Some(b.service(name, CallbackId(id))?)
        }
        None => None,
    };
    let client = match p.str("client_service")? {
        Some(name) => {
            let id = p.required_u64("client_id")?;
            Some(b.client(name, CallbackId(id))?)
        }
        None => None,
    };
    p.finish()?;

    let missing = |key: &str| Err(GraphError::MissingParameter(key.to_owned()));
    match role {
        Role::Source if timers == 0 => return missing("timer0_period_ms"),
        Role::Source if publisher.is_none() => return missing("publish_topic"),
        Role::Relay if subs == 0 => return missing("sub0_topic"),
        Role::Service if service.is_none() => return missing("service_name"),
        Role::Client if client.is_none() => return missing("client_service"),
        Role::Client if timers == 0 => return missing("timer0_period_ms"),
        _ => {}
    }

    Ok(Box::new(BenchNode {
        state,
        publisher,
        forwarding,
        client,
    }))
}

pub fn register_node_types(factory: &mut NodeFactory) {
    factory.register(SOURCE, |b, p| build(Role::Source, b, p));
    factory.register(RELAY, |b, p| build(Role::Relay, b, p));
    factory.register(SERVICE, |b, p| build(Role::Service, b, p));
    factory.register(CLIENT, |b, p| build(Role::Client, b, p));
}

// Fixed once when the topology was authored; drawn from a SplitMix64 stream.
const ID_A_T100: &str = "0x37393e32a514c8af";
const ID_A_T150: &str = "0x882c86dce57fb3b5";
const ID_B_T200: &str = "0x5950c0edf5023d1f";
const ID_B_SUB_A: &str = "0xbab76b883b7397c0";
const ID_C_SUB_A: &str = "0x2287af9694c9deb7";
const ID_C_SUB_B: &str = "0x998304a6a24b2cf7";
const ID_C_SUM: &str = "0xc72f60ed78635187";
const ID_D_T500: &str = "0x99b4a7a073152ce1";
const ID_D_RESPONSE: &str = "0x712337c0c6452b0f";
const ID_D_SUB_C: &str = "0xc27e5f436e3f55aa";

/// Nodes of the default topology, in registration order.
///
/// * `node_a`: timers at 100 ms and 150 ms, both publishing to `/a`
///   (both due together every 300 ms).
/// * `node_b`: 200 ms timer publishing to `/b`; subscribes to `/a`.
/// * `node_c`: subscribes to `/a` and `/b`, republishing to `/c` on `/b`;
///   serves `sum`.
/// * `node_d`: 500 ms timer calling `sum`; subscribes to `/c`.
///
/// Every 600 ms all three timers of `node_a` and `node_b` coincide.
pub fn default_nodes() -> Vec<NodeSpec> {
    vec![
        NodeSpec::new(
            SOURCE,
            "node_a",
            ParameterSet::new()
                .with("initial_state", "0x816597d382302f98")
                .with("publish_topic", "/a")
                .with("timer0_period_ms", 100)
                .with("timer0_id", ID_A_T100)
                .with("timer1_period_ms", 150)
                .with("timer1_id", ID_A_T150),
        ),
        NodeSpec::new(
            RELAY,
            "node_b",
            ParameterSet::new()
                .with("initial_state", "0xcf7b3aaee0dee29e")
                .with("publish_topic", "/b")
                .with("timer0_period_ms", 200)
                .with("timer0_id", ID_B_T200)
                .with("sub0_topic", "/a")
                .with("sub0_id", ID_B_SUB_A)
                .with("sub0_depth", 1),
        ),
        NodeSpec::new(
            SERVICE,
            "node_c",
            ParameterSet::new()
                .with("initial_state", "0x97a6647477ea6b0a")
                .with("publish_topic", "/c")
                .with("sub0_topic", "/a")
                .with("sub0_id", ID_C_SUB_A)
                .with("sub0_depth", 1)
                .with("sub1_topic", "/b")
                .with("sub1_id", ID_C_SUB_B)
                .with("sub1_depth", 1)
                .with("sub1_forward", true)
                .with("service_name", "sum")
                .with("service_id", ID_C_SUM),
        ),
        NodeSpec::new(
            CLIENT,
            "node_d",
            ParameterSet::new()
                .with("initial_state", "0xcb0c84d9158970d7")
                .with("timer0_period_ms", 500)
                .with("timer0_id", ID_D_T500)
                .with("client_service", "sum")
                .with("client_id", ID_D_RESPONSE)
                .with("sub0_topic", "/c")
                .with("sub0_id", ID_D_SUB_C)
                .with("sub0_depth", 1),
        ),
    ]
}

pub fn default_job(start_time: SimTime, duration: SimDuration) -> JobSpec {
    JobSpec {
        nodes: default_nodes(),
        ..JobSpec::new(start_time, duration)
    }
}

/// Registers the default topology into an empty graph.
pub fn build_benchmark(
    graph: &mut Graph,
    factory: &NodeFactory,
) -> Result<Vec<NodeId>, GraphError> {
    default_nodes()
        .iter()
        .map(|n| graph.register_node(factory, &n.type_name, &n.name, &n.params))
        .collect()
}

/// Terminal hash state of every benchmark node.
pub fn final_states(kernel: &Kernel) -> Result<BTreeMap<String, u64>, KernelError> {
    kernel.final_states()
}
