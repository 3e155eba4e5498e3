//! Node graph: nodes, the entities that own their callbacks, topic and
//! service registries, node parameters, and the name-keyed node factory.
//!
//! Every index in here (node, entity) is handed out in registration order, so
//! building the same job twice gives the same tables. That is what lets the
//! executor break ties by index without losing reproducibility.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::executor::Context;
use crate::time::{SimDuration, SimTime};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("unknown node type `{0}`")]
    UnknownNodeType(String),
    #[error("duplicate node name `{0}`")]
    DuplicateNodeName(String),
    #[error("invalid name `{0}`: must be non-empty ASCII alphanumerics, `_`, `-` or `.`")]
    InvalidName(String),
    #[error("invalid topic or service name `{0}`")]
    InvalidTopic(String),
    #[error("duplicate service `{0}`")]
    DuplicateService(String),
    #[error("duplicate callback id {0}")]
    DuplicateCallbackId(CallbackId),
    #[error("timer period must be positive")]
    ZeroPeriod,
    #[error("subscription depth must be positive")]
    ZeroDepth,
    #[error("node `{node}`: client references unknown service `{service}`")]
    UnknownService { node: String, service: String },
    #[error("delay configured for `{node}` on `{topic}` but no such publisher exists")]
    UnmatchedDelay { node: String, topic: String },
    #[error("missing parameter `{0}`")]
    MissingParameter(String),
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
    #[error("parameter `{key}`: expected {expected}")]
    InvalidParameter { key: String, expected: &'static str },
}

/// Dense node index, assigned in registration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Dense entity index shared by all entity kinds, assigned in registration
/// order. This is the `reg_index` used for same-instant tie-breaking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EntityId(pub u32);

impl EntityId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Job-wide unique callback identifier, fixed in configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CallbackId(pub u64);

impl fmt::Display for CallbackId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#018x}", self.0)
    }
}

macro_rules! entity_handle {
    ($(#[$m:meta])* $name:ident) => {
        $(#[$m])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub(crate) EntityId);

        impl $name {
            pub fn entity(self) -> EntityId {
                self.0
            }
        }
    };
}

entity_handle!(TimerId);
entity_handle!(SubscriptionId);
entity_handle!(PublisherId);
entity_handle!(ServiceId);
entity_handle!(ClientId);

/// A published message. Immutable once created.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Payload {
    pub value: u64,
    pub origin: NodeId,
    /// Absolute simulated time of the `publish` call (not of delivery).
    pub publish_time: SimTime,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParamValue {
    Str(String),
    Int(i64),
    Float(f64),
    Bool(bool),
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Str(s) => write!(f, "{s:?}"),
            ParamValue::Int(i) => write!(f, "{i}"),
            ParamValue::Float(x) => write!(f, "{x:?}"),
            ParamValue::Bool(b) => write!(f, "{b}"),
        }
    }
}

/// Per-node launch parameters.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParameterSet(BTreeMap<String, ParamValue>);

impl ParameterSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: impl Into<String>, value: impl Into<ParamValue>) -> Self {
        self.insert(key, value);
        self
    }

    pub fn insert(&mut self, key: impl Into<String>, value: impl Into<ParamValue>) {
        self.0.insert(key.into(), value.into());
    }

    pub fn get(&self, key: &str) -> Option<&ParamValue> {
        self.0.get(key)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.0.contains_key(key)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &ParamValue)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Reads an unsigned 64-bit value. Accepts a non-negative integer or a
    /// string holding a decimal or `0x`-prefixed hexadecimal number, since
    /// many config formats cap integers at 63 bits.
    pub fn get_u64(&self, key: &str) -> Result<Option<u64>, GraphError> {
        let invalid = || GraphError::InvalidParameter {
            key: key.to_owned(),
            expected: "unsigned 64-bit integer",
        };
        match self.0.get(key) {
            None => Ok(None),
            Some(ParamValue::Int(i)) => u64::try_from(*i).map(Some).map_err(|_| invalid()),
            Some(ParamValue::Str(s)) => {
                let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
                    Some(hex) => u64::from_str_radix(&hex.replace('_', ""), 16),
                    None => s.replace('_', "").parse(),
                };
                parsed.map(Some).map_err(|_| invalid())
            }
            Some(_) => Err(invalid()),
        }
    }

    pub fn get_str(&self, key: &str) -> Result<Option<&str>, GraphError> {
        match self.0.get(key) {
            None => Ok(None),
            Some(ParamValue::Str(s)) => Ok(Some(s)),
            Some(_) => Err(GraphError::InvalidParameter {
                key: key.to_owned(),
                expected: "string",
            }),
        }
    }

    pub fn get_bool(&self, key: &str) -> Result<Option<bool>, GraphError> {
        match self.0.get(key) {
            None => Ok(None),
            Some(ParamValue::Bool(b)) => Ok(Some(*b)),
            Some(_) => Err(GraphError::InvalidParameter {
                key: key.to_owned(),
                expected: "boolean",
            }),
        }
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>, GraphError> {
        match self.0.get(key) {
            None => Ok(None),
            Some(ParamValue::Float(x)) => Ok(Some(*x)),
            Some(ParamValue::Int(i)) => Ok(Some(*i as f64)),
            Some(_) => Err(GraphError::InvalidParameter {
                key: key.to_owned(),
                expected: "number",
            }),
        }
    }
}

impl From<&str> for ParamValue {
    fn from(s: &str) -> Self {
        ParamValue::Str(s.to_owned())
    }
}

impl From<String> for ParamValue {
    fn from(s: String) -> Self {
        ParamValue::Str(s)
    }
}

impl From<i32> for ParamValue {
    fn from(i: i32) -> Self {
        ParamValue::Int(i64::from(i))
    }
}

impl From<i64> for ParamValue {
    fn from(i: i64) -> Self {
        ParamValue::Int(i)
    }
}

impl From<f64> for ParamValue {
    fn from(x: f64) -> Self {
        ParamValue::Float(x)
    }
}

impl From<bool> for ParamValue {
    fn from(b: bool) -> Self {
        ParamValue::Bool(b)
    }
}

/// User logic of one node. The kernel calls exactly one method per executed
/// event; all methods run on the kernel thread and must not block.
///
/// There is no way to wait for a service response inside a callback: a
/// request is issued with [`Context::call`] and its response arrives later
/// through [`Node::on_response`].
pub trait Node: Send {
    fn on_timer(&mut self, cx: &mut Context<'_>, timer: TimerId) {
        let _ = (cx, timer);
    }

    fn on_message(&mut self, cx: &mut Context<'_>, sub: SubscriptionId, msg: &Payload) {
        let _ = (cx, sub, msg);
    }

    /// Handles a service request; the return value is sent back as the
    /// response.
    fn on_request(&mut self, cx: &mut Context<'_>, service: ServiceId, request: u64) -> u64 {
        let _ = (cx, service, request);
        0
    }

    fn on_response(&mut self, cx: &mut Context<'_>, client: ClientId, response: u64) {
        let _ = (cx, client, response);
    }

    /// Observable internal state, recorded in the trace after every callback.
    fn state(&self) -> Option<u64> {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimerEntity {
    pub owner: NodeId,
    pub period: SimDuration,
    /// Next expiry, relative to the job's start.
    pub next_deadline: SimTime,
    pub callback: CallbackId,
    pub reg_index: EntityId,
}

/// Delivery counters of one subscription.
///
/// `received + buffered + dropped == published` holds at every point between
/// callbacks.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SubscriptionStats {
    pub published: u64,
    pub received: u64,
    pub dropped: u64,
    pub buffered: u64,
    /// Delivery events that found the buffer already emptied by eviction.
    pub no_op_deliveries: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubscriptionEntity {
    pub owner: NodeId,
    pub topic: String,
    pub depth: usize,
    pub buffer: VecDeque<Payload>,
    pub published: u64,
    pub received: u64,
    pub dropped: u64,
    pub no_op_deliveries: u64,
    pub callback: CallbackId,
    pub reg_index: EntityId,
}

impl SubscriptionEntity {
    pub fn stats(&self) -> SubscriptionStats {
        SubscriptionStats {
            published: self.published,
            received: self.received,
            dropped: self.dropped,
            buffered: self.buffer.len() as u64,
            no_op_deliveries: self.no_op_deliveries,
        }
    }

    pub(crate) fn push(&mut self, payload: Payload) {
        self.published += 1;
        self.buffer.push_back(payload);
        if self.buffer.len() > self.depth {
            self.buffer.pop_front();
            self.dropped += 1;
        }
    }

    pub(crate) fn pop(&mut self) -> Option<Payload> {
        let payload = self.buffer.pop_front();
        match payload {
            Some(_) => self.received += 1,
            None => self.no_op_deliveries += 1,
        }
        payload
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublisherEntity {
    pub owner: NodeId,
    pub topic: String,
    /// Zero publishes immediately.
    pub delay: SimDuration,
    pub reg_index: EntityId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServiceEntity {
    pub owner: NodeId,
    pub service: String,
    pub callback: CallbackId,
    pub reg_index: EntityId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClientEntity {
    pub owner: NodeId,
    pub service: String,
    /// Response handler.
    pub callback: CallbackId,
    pub reg_index: EntityId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Entity {
    Timer(TimerEntity),
    Subscription(SubscriptionEntity),
    Publisher(PublisherEntity),
    Service(ServiceEntity),
    Client(ClientEntity),
}

impl Entity {
    pub fn owner(&self) -> NodeId {
        match self {
            Entity::Timer(e) => e.owner,
            Entity::Subscription(e) => e.owner,
            Entity::Publisher(e) => e.owner,
            Entity::Service(e) => e.owner,
            Entity::Client(e) => e.owner,
        }
    }

    pub fn reg_index(&self) -> EntityId {
        match self {
            Entity::Timer(e) => e.reg_index,
            Entity::Subscription(e) => e.reg_index,
            Entity::Publisher(e) => e.reg_index,
            Entity::Service(e) => e.reg_index,
            Entity::Client(e) => e.reg_index,
        }
    }

    /// Publishers own no callback.
    pub fn callback(&self) -> Option<CallbackId> {
        match self {
            Entity::Timer(e) => Some(e.callback),
            Entity::Subscription(e) => Some(e.callback),
            Entity::Publisher(_) => None,
            Entity::Service(e) => Some(e.callback),
            Entity::Client(e) => Some(e.callback),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Entity::Timer(_) => "timer",
            Entity::Subscription(_) => "subscription",
            Entity::Publisher(_) => "publisher",
            Entity::Service(_) => "service",
            Entity::Client(_) => "client",
        }
    }
}

#[derive(Debug, Default)]
pub(crate) struct EntityTable {
    pub(crate) entities: Vec<Entity>,
    /// Subscriptions per topic, ascending by registration index.
    pub(crate) topics: BTreeMap<String, Vec<EntityId>>,
    pub(crate) services: BTreeMap<String, EntityId>,
    callbacks: BTreeSet<CallbackId>,
}

impl EntityTable {
    pub(crate) fn get(&self, id: EntityId) -> &Entity {
        &self.entities[id.index()]
    }

    pub(crate) fn subscription_mut(&mut self, id: EntityId) -> &mut SubscriptionEntity {
        match &mut self.entities[id.index()] {
            Entity::Subscription(s) => s,
            other => panic!("entity {id:?} is a {}, not a subscription", other.kind()),
        }
    }

    pub(crate) fn timer_mut(&mut self, id: EntityId) -> &mut TimerEntity {
        match &mut self.entities[id.index()] {
            Entity::Timer(t) => t,
            other => panic!("entity {id:?} is a {}, not a timer", other.kind()),
        }
    }
}

pub(crate) struct NodeSlot {
    pub(crate) name: String,
    pub(crate) type_name: String,
    pub(crate) node: Box<dyn Node>,
}

/// Registers the entities of one node under construction.
///
/// Entities are staged and only committed to the graph once the node's
/// constructor succeeds, so a failed construction leaves the graph untouched.
pub struct NodeBuilder<'g> {
    table: &'g EntityTable,
    node: NodeId,
    node_name: &'g str,
    staged: Vec<Entity>,
}

impl<'g> NodeBuilder<'g> {
    pub fn node_id(&self) -> NodeId {
        self.node
    }

    pub fn node_name(&self) -> &str {
        self.node_name
    }

    fn next_id(&self) -> EntityId {
        EntityId((self.table.entities.len() + self.staged.len()) as u32)
    }

    fn claim_callback(&self, callback: CallbackId) -> Result<(), GraphError> {
        let staged = self.staged.iter().any(|e| e.callback() == Some(callback));
        if staged || self.table.callbacks.contains(&callback) {
            return Err(GraphError::DuplicateCallbackId(callback));
        }
        Ok(())
    }

    /// First expiry is one period after the job start.
    pub fn timer(
        &mut self,
        period: SimDuration,
        callback: CallbackId,
    ) -> Result<TimerId, GraphError> {
        if period.is_zero() {
            return Err(GraphError::ZeroPeriod);
        }
        self.claim_callback(callback)?;
        let id = self.next_id();
        self.staged.push(Entity::Timer(TimerEntity {
            owner: self.node,
            period,
            next_deadline: SimTime::ZERO.checked_add(period).expect("period fits"),
            callback,
            reg_index: id,
        }));
        Ok(TimerId(id))
    }

    pub fn subscription(
        &mut self,
        topic: &str,
        depth: usize,
        callback: CallbackId,
    ) -> Result<SubscriptionId, GraphError> {
        validate_topic(topic)?;
        if depth == 0 {
            return Err(GraphError::ZeroDepth);
        }
        self.claim_callback(callback)?;
        let id = self.next_id();
        self.staged.push(Entity::Subscription(SubscriptionEntity {
            owner: self.node,
            topic: topic.to_owned(),
            depth,
            buffer: VecDeque::with_capacity(depth.min(64) + 1),
            published: 0,
            received: 0,
            dropped: 0,
            no_op_deliveries: 0,
            callback,
            reg_index: id,
        }));
        Ok(SubscriptionId(id))
    }

    /// Publication delay comes from the job's delay table, not from the node.
    pub fn publisher(&mut self, topic: &str) -> Result<PublisherId, GraphError> {
        validate_topic(topic)?;
        let id = self.next_id();
        self.staged.push(Entity::Publisher(PublisherEntity {
            owner: self.node,
            topic: topic.to_owned(),
            delay: SimDuration::ZERO,
            reg_index: id,
        }));
        Ok(PublisherId(id))
    }

    pub fn service(&mut self, name: &str, callback: CallbackId) -> Result<ServiceId, GraphError> {
        validate_topic(name)?;
        let staged = self
            .staged
            .iter()
            .any(|e| matches!(e, Entity::Service(s) if s.service == name));
        if staged || self.table.services.contains_key(name) {
            return Err(GraphError::DuplicateService(name.to_owned()));
        }
        self.claim_callback(callback)?;
        let id = self.next_id();
        self.staged.push(Entity::Service(ServiceEntity {
            owner: self.node,
            service: name.to_owned(),
            callback,
            reg_index: id,
        }));
        Ok(ServiceId(id))
    }

    /// The service may be registered later; it is resolved when the graph is
    /// validated.
    pub fn client(&mut self, service: &str, callback: CallbackId) -> Result<ClientId, GraphError> {
        validate_topic(service)?;
        self.claim_callback(callback)?;
        let id = self.next_id();
        self.staged.push(Entity::Client(ClientEntity {
            owner: self.node,
            service: service.to_owned(),
            callback,
            reg_index: id,
        }));
        Ok(ClientId(id))
    }
}

type Constructor =
    dyn Fn(&mut NodeBuilder<'_>, &ParameterSet) -> Result<Box<dyn Node>, GraphError> + Send + Sync;

/// Node constructors keyed by type name.
#[derive(Default)]
pub struct NodeFactory {
    constructors: BTreeMap<String, Box<Constructor>>,
}

impl NodeFactory {
    pub fn new() -> Self {
        Self::default()
    }

    /// A factory preloaded with the synthetic benchmark node types.
    pub fn with_benchmark_nodes() -> Self {
        let mut factory = Self::new();
        crate::benchmark::register_node_types(&mut factory);
        factory
    }

    /// Registers `constructor` under `type_name`, replacing any previous one.
    pub fn register<F>(&mut self, type_name: impl Into<String>, constructor: F)
    where
        F: Fn(&mut NodeBuilder<'_>, &ParameterSet) -> Result<Box<dyn Node>, GraphError>
            + Send
            + Sync
            + 'static,
    {
        self.constructors
            .insert(type_name.into(), Box::new(constructor));
    }

    pub fn contains(&self, type_name: &str) -> bool {
        self.constructors.contains_key(type_name)
    }

    pub fn type_names(&self) -> impl Iterator<Item = &str> {
        self.constructors.keys().map(String::as_str)
    }
}

impl fmt::Debug for NodeFactory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.constructors.keys()).finish()
    }
}

/// Identifies a publisher by owning node and topic, for delay configuration.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PublisherKey {
    pub node: String,
    pub topic: String,
}

impl PublisherKey {
    pub fn new(node: impl Into<String>, topic: impl Into<String>) -> Self {
        PublisherKey {
            node: node.into(),
            topic: topic.into(),
        }
    }
}

impl fmt::Display for PublisherKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.node, self.topic)
    }
}

#[derive(Default)]
pub struct Graph {
    pub(crate) nodes: Vec<NodeSlot>,
    pub(crate) table: EntityTable,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register_node(
        &mut self,
        factory: &NodeFactory,
        type_name: &str,
        node_name: &str,
        params: &ParameterSet,
    ) -> Result<NodeId, GraphError> {
        let constructor = factory
            .constructors
            .get(type_name)
            .ok_or_else(|| GraphError::UnknownNodeType(type_name.to_owned()))?;
        validate_node_name(node_name)?;
        if self.node_id(node_name).is_some() {
            return Err(GraphError::DuplicateNodeName(node_name.to_owned()));
        }

        let id = NodeId(self.nodes.len() as u32);
        let mut builder = NodeBuilder {
            table: &self.table,
            node: id,
            node_name,
            staged: Vec::new(),
        };
        let node = constructor(&mut builder, params)?;
        let staged = builder.staged;

        for entity in staged {
            let reg = entity.reg_index();
            debug_assert_eq!(reg.index(), self.table.entities.len());
            if let Some(cb) = entity.callback() {
                self.table.callbacks.insert(cb);
            }
            match &entity {
                Entity::Subscription(s) => {
                    self.table
                        .topics
                        .entry(s.topic.clone())
                        .or_default()
                        .push(reg);
                }
                Entity::Service(s) => {
                    self.table.services.insert(s.service.clone(), reg);
                }
                _ => {}
            }
            self.table.entities.push(entity);
        }
        self.nodes.push(NodeSlot {
            name: node_name.to_owned(),
            type_name: type_name.to_owned(),
            node,
        });
        Ok(id)
    }

    /// Attaches publication delays. Every key must name an existing publisher.
    pub fn apply_delays(
        &mut self,
        delays: &BTreeMap<PublisherKey, SimDuration>,
    ) -> Result<(), GraphError> {
        for (key, delay) in delays {
            let owner = self.node_id(&key.node);
            let mut matched = false;
            for entity in &mut self.table.entities {
                if let Entity::Publisher(p) = entity {
                    if Some(p.owner) == owner && p.topic == key.topic {
                        p.delay = *delay;
                        matched = true;
                    }
                }
            }
            if !matched {
                return Err(GraphError::UnmatchedDelay {
                    node: key.node.clone(),
                    topic: key.topic.clone(),
                });
            }
        }
        Ok(())
    }

    /// Checks cross-node references: every client must name a registered
    /// service.
    pub fn validate(&self) -> Result<(), GraphError> {
        for entity in &self.table.entities {
            if let Entity::Client(c) = entity {
                if !self.table.services.contains_key(&c.service) {
                    return Err(GraphError::UnknownService {
                        node: self.nodes[c.owner.index()].name.clone(),
                        service: c.service.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node_id(&self, name: &str) -> Option<NodeId> {
        self.nodes
            .iter()
            .position(|n| n.name == name)
            .map(|i| NodeId(i as u32))
    }

    pub fn node_name(&self, id: NodeId) -> &str {
        &self.nodes[id.index()].name
    }

    pub fn node_type(&self, id: NodeId) -> &str {
        &self.nodes[id.index()].type_name
    }

    pub fn node_state(&self, id: NodeId) -> Option<u64> {
        self.nodes[id.index()].node.state()
    }

    pub fn entities(&self) -> &[Entity] {
        &self.table.entities
    }

    pub fn entity(&self, id: EntityId) -> &Entity {
        self.table.get(id)
    }

    /// Entities owned by `node`, in registration order.
    pub fn node_entities(&self, node: NodeId) -> impl Iterator<Item = &Entity> {
        self.table
            .entities
            .iter()
            .filter(move |e| e.owner() == node)
    }

    pub fn subscribers(&self, topic: &str) -> &[EntityId] {
        self.table.topics.get(topic).map_or(&[], Vec::as_slice)
    }

    /// Delivery counters of the subscription registered as `id`; `None` if
    /// `id` is not a subscription.
    pub fn subscription_stats(&self, id: EntityId) -> Option<SubscriptionStats> {
        match self.table.entities.get(id.index())? {
            Entity::Subscription(s) => Some(s.stats()),
            _ => None,
        }
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field(
                "nodes",
                &self
                    .nodes
                    .iter()
                    .map(|n| (&n.name, &n.type_name))
                    .collect::<Vec<_>>(),
            )
            .field("entities", &self.table.entities)
            .finish()
    }
}

/// Node names end up verbatim in trace lines, so they are restricted to a
/// delimiter-free alphabet.
fn validate_node_name(name: &str) -> Result<(), GraphError> {
    let ok = !name.is_empty()
        && name
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || matches!(b, b'_' | b'-' | b'.'));
    if ok {
        Ok(())
    } else {
        Err(GraphError::InvalidName(name.to_owned()))
    }
}

fn validate_topic(topic: &str) -> Result<(), GraphError> {
    let ok = !topic.is_empty() && topic.bytes().all(|b| b.is_ascii_graphic() && b != b'|');
    if ok {
        Ok(())
    } else {
        Err(GraphError::InvalidTopic(topic.to_owned()))
    }
}
