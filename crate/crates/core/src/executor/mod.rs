//! The deterministic event loop.
//!
//! A [`Kernel`] owns one node graph and runs it on a single thread:
//!
//! 1. drain the ready queue in first-in-first-out order (the clock is frozen
//!    while draining, and callbacks may append further events);
//! 2. stop if the job is complete;
//! 3. otherwise jump the clock to the earliest timer deadline or delayed
//!    publication;
//! 4. release everything due at that instant, delayed publications first
//!    (ascending schedule order), then timers (ascending registration index);
//! 5. repeat.
//!
//! Completion is checked after draining and before time moves, so a job
//! never executes anything past its horizon.

mod job;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::time::Duration;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use thiserror::Error;

use crate::graph::{
    CallbackId, ClientId, Entity, EntityId, EntityTable, Graph, GraphError, NodeFactory, NodeId,
    Payload, PublisherId, ServiceId, SubscriptionId, TimerId,
};
use crate::time::{SimClock, SimDuration, SimTime, TimeError};
use crate::trace::{TraceError, TraceHeader, TraceLog, TraceRecord};

pub use job::{JobResult, JobSpec, NodeSpec, DEFAULT_LIVELOCK_THRESHOLD};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KernelError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Time(#[from] TimeError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error("invalid job: {0}")]
    InvalidJob(&'static str),
    #[error("livelock at {at}: {threshold} callbacks executed without the system becoming idle")]
    LivelockDetected { at: SimTime, threshold: u64 },
    #[error("starved clock at {at}: nothing left to activate and the job has no duration bound")]
    StarvedClock { at: SimTime },
    #[error("job has not finished")]
    JobNotFinished,
    #[error("ready queue is not empty")]
    NotIdle,
    #[error("clock is at {now}, not {requested}")]
    ClockMismatch { now: SimTime, requested: SimTime },
    #[error("cannot advance to {target}: an activation is pending at {pending}")]
    SkippedActivation { target: SimTime, pending: SimTime },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EventKind {
    TimerFire,
    TopicDelivery,
    ServiceRequest,
    ClientResponse,
}

impl EventKind {
    pub const ALL: [EventKind; 4] = [
        EventKind::TimerFire,
        EventKind::TopicDelivery,
        EventKind::ServiceRequest,
        EventKind::ClientResponse,
    ];

    /// Tag used in serialized traces.
    pub fn tag(self) -> &'static str {
        match self {
            EventKind::TimerFire => "timer",
            EventKind::TopicDelivery => "topic",
            EventKind::ServiceRequest => "request",
            EventKind::ClientResponse => "response",
        }
    }

    pub fn from_tag(tag: &str) -> Option<EventKind> {
        Self::ALL.into_iter().find(|k| k.tag() == tag)
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// One queued callback activation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReadyEvent {
    /// Global enqueue counter; the queue is consumed in `seq` order.
    pub seq: u64,
    pub kind: EventKind,
    pub target: EntityId,
    pub callback: CallbackId,
    /// Request or response word. Topic payloads live in the subscription
    /// buffer instead.
    pub payload: Option<u64>,
    pub reply_to: Option<ClientId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct DelayedPublication {
    publisher: EntityId,
    payload: Payload,
}

/// Ordering of activations that fall on the same instant.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum TieBreak {
    /// Delayed publications (ascending schedule order), then timers
    /// (ascending registration index).
    #[default]
    Normative,
    /// Timers in descending registration index, then delayed publications in
    /// descending schedule order. Only useful to show that traces notice a
    /// different same-instant order.
    Inverted,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct KernelOptions {
    pub tie_break: TieBreak,
}

#[derive(Debug)]
pub(crate) struct Scheduler {
    /// Relative to the job start.
    clock: SimClock,
    start: SimTime,
    queue: VecDeque<ReadyEvent>,
    next_seq: u64,
    /// Keyed by (due, schedule_seq).
    delayed: BTreeMap<(SimTime, u64), DelayedPublication>,
    next_schedule_seq: u64,
    /// (next_deadline, reg_index) of every timer.
    timers: BTreeSet<(SimTime, EntityId)>,
    /// Error raised inside a callback, surfaced once the callback returns.
    fault: Option<KernelError>,
}

impl Scheduler {
    fn enqueue(
        &mut self,
        kind: EventKind,
        target: EntityId,
        callback: CallbackId,
        payload: Option<u64>,
        reply_to: Option<ClientId>,
    ) {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.queue.push_back(ReadyEvent {
            seq,
            kind,
            target,
            callback,
            payload,
            reply_to,
        });
    }

    fn absolute(&self, relative: SimTime) -> Result<SimTime, TimeError> {
        self.start
            .checked_add(SimDuration::from_nanos(relative.as_nanos()))
    }

    fn next_activation(&self) -> Option<SimTime> {
        let timer = self.timers.first().map(|&(t, _)| t);
        let delayed = self.delayed.keys().next().map(|&(t, _)| t);
        match (timer, delayed) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }

    fn raise(&mut self, err: KernelError) {
        self.fault.get_or_insert(err);
    }
}

/// Pushes `payload` into every subscription of the publisher's topic, in
/// ascending registration order, and queues one delivery event per
/// subscription.
fn fan_out(table: &mut EntityTable, sched: &mut Scheduler, publisher: EntityId, payload: Payload) {
    let EntityTable {
        entities, topics, ..
    } = table;
    let topic = match &entities[publisher.index()] {
        Entity::Publisher(p) => p.topic.as_str(),
        other => unreachable!("entity {publisher:?} is a {}", other.kind()),
    };
    let Some(subscribers) = topics.get(topic) else {
        return;
    };
    for &id in subscribers {
        let Entity::Subscription(sub) = &mut entities[id.index()] else {
            unreachable!("topic registry holds only subscriptions");
        };
        sub.push(payload);
        sched.enqueue(EventKind::TopicDelivery, id, sub.callback, None, None);
    }
}

/// Kernel access handed to a running callback.
pub struct Context<'a> {
    table: &'a mut EntityTable,
    sched: &'a mut Scheduler,
    node: NodeId,
    callback: CallbackId,
    now: SimTime,
}

impl Context<'_> {
    /// Absolute simulated time of the running callback.
    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn callback_id(&self) -> CallbackId {
        self.callback
    }

    pub fn node_id(&self) -> NodeId {
        self.node
    }

    /// Publishes `value` on the publisher's topic. With a zero delay every
    /// subscriber receives it right away and a delivery event is queued per
    /// subscriber; otherwise the publication is held back by the kernel and
    /// fanned out once its delay has elapsed in simulated time.
    ///
    /// Panics if the publisher belongs to another node.
    pub fn publish(&mut self, publisher: PublisherId, value: u64) {
        let (owner, delay) = match self.table.get(publisher.0) {
            Entity::Publisher(p) => (p.owner, p.delay),
            other => panic!("entity {:?} is a {}", publisher.0, other.kind()),
        };
        assert_eq!(owner, self.node, "{publisher:?} is owned by another node");
        let payload = Payload {
            value,
            origin: self.node,
            publish_time: self.now,
        };
        if delay.is_zero() {
            fan_out(self.table, self.sched, publisher.0, payload);
            return;
        }
        match self.sched.clock.now().checked_add(delay) {
            Ok(due) => {
                let seq = self.sched.next_schedule_seq;
                self.sched.next_schedule_seq += 1;
                self.sched.delayed.insert(
                    (due, seq),
                    DelayedPublication {
                        publisher: publisher.0,
                        payload,
                    },
                );
            }
            Err(e) => self.sched.raise(e.into()),
        }
    }

    /// Sends `request` to the client's service. The service handler runs as
    /// its own event; its return value comes back through
    /// [`Node::on_response`](crate::graph::Node::on_response).
    ///
    /// Panics if the client belongs to another node.
    pub fn call(&mut self, client: ClientId, request: u64) {
        let (owner, service) = match self.table.get(client.0) {
            Entity::Client(c) => (c.owner, c.service.as_str()),
            other => panic!("entity {:?} is a {}", client.0, other.kind()),
        };
        assert_eq!(owner, self.node, "{client:?} is owned by another node");
        let target = *self
            .table
            .services
            .get(service)
            .expect("clients are validated before the run");
        let callback = self
            .table
            .get(target)
            .callback()
            .expect("services own a callback");
        self.sched.enqueue(
            EventKind::ServiceRequest,
            target,
            callback,
            Some(request),
            Some(client),
        );
    }
}

struct Jitter {
    max: Duration,
    rng: StdRng,
}

impl Jitter {
    fn sleep(&mut self) {
        std::thread::sleep(self.rng.gen_range(Duration::ZERO..=self.max));
    }
}

/// A single simulation instance: graph, clock, queues and trace.
pub struct Kernel {
    graph: Graph,
    sched: Scheduler,
    trace: TraceLog,
    /// Relative horizon.
    end: Option<SimTime>,
    max_events: Option<u64>,
    livelock_threshold: u64,
    jitter: Option<Jitter>,
    tie_break: TieBreak,
    executed: u64,
    finished: bool,
}

impl Kernel {
    pub fn new(job: &JobSpec, factory: &NodeFactory) -> Result<Kernel, KernelError> {
        Self::with_options(job, factory, KernelOptions::default())
    }

    /// Builds the job's graph and validates it. Nothing executes until
    /// [`Kernel::run`] (or the step-wise methods) are called.
    pub fn with_options(
        job: &JobSpec,
        factory: &NodeFactory,
        options: KernelOptions,
    ) -> Result<Kernel, KernelError> {
        if job.duration.is_none() && job.max_events.is_none() {
            return Err(KernelError::InvalidJob(
                "job needs a duration or an event limit",
            ));
        }
        if job.livelock_threshold == 0 {
            return Err(KernelError::InvalidJob(
                "livelock threshold must be positive",
            ));
        }
        let end = match job.duration {
            Some(d) => {
                job.start_time.checked_add(d)?;
                Some(SimTime::ZERO.checked_add(d)?)
            }
            None => None,
        };

        let mut graph = Graph::new();
        for node in &job.nodes {
            graph.register_node(factory, &node.type_name, &node.name, &node.params)?;
        }
        graph.apply_delays(&job.delays)?;
        graph.validate()?;

        let timers = graph
            .entities()
            .iter()
            .filter_map(|e| match e {
                Entity::Timer(t) => Some((t.next_deadline, t.reg_index)),
                _ => None,
            })
            .collect();

        Ok(Kernel {
            graph,
            sched: Scheduler {
                clock: SimClock::default(),
                start: job.start_time,
                queue: VecDeque::new(),
                next_seq: 0,
                delayed: BTreeMap::new(),
                next_schedule_seq: 0,
                timers,
                fault: None,
            },
            trace: TraceLog::new(TraceHeader::new(job.digest(), job.start_time)),
            end,
            max_events: job.max_events,
            livelock_threshold: job.livelock_threshold,
            jitter: (!job.jitter_max.is_zero()).then(|| Jitter {
                max: job.jitter_max,
                rng: StdRng::from_entropy(),
            }),
            tie_break: options.tie_break,
            executed: 0,
            finished: false,
        })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn trace(&self) -> &TraceLog {
        &self.trace
    }

    /// Absolute simulated time.
    pub fn now(&self) -> SimTime {
        self.sched
            .absolute(self.sched.clock.now())
            .expect("the clock only moves to representable instants")
    }

    pub fn executed_events(&self) -> u64 {
        self.executed
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    pub fn ready_events(&self) -> impl Iterator<Item = &ReadyEvent> {
        self.sched.queue.iter()
    }

    /// Pending delayed publications as (absolute due time, schedule seq), in
    /// release order.
    pub fn pending_publications(&self) -> Vec<(SimTime, u64)> {
        self.sched
            .delayed
            .keys()
            .filter_map(|&(due, seq)| self.sched.absolute(due).ok().map(|t| (t, seq)))
            .collect()
    }

    /// Executes the event at the front of the ready queue, if any.
    pub fn step(&mut self) -> Result<bool, KernelError> {
        match self.sched.queue.pop_front() {
            Some(event) => {
                self.execute(event)?;
                Ok(true)
            }
            None => Ok(false),
        }
    }

    /// Runs ready events until the queue is empty and returns how many were
    /// executed. The clock does not move.
    pub fn drain(&mut self) -> Result<u64, KernelError> {
        let mut executed = 0;
        while !self.sched.queue.is_empty() {
            if executed >= self.livelock_threshold {
                return Err(KernelError::LivelockDetected {
                    at: self.now(),
                    threshold: self.livelock_threshold,
                });
            }
            self.step()?;
            executed += 1;
        }
        Ok(executed)
    }

    /// Earliest absolute instant at which a timer expires or a delayed
    /// publication is due. `None` if neither exists.
    pub fn next_activation_time(&self) -> Option<SimTime> {
        let next = self.sched.next_activation()?;
        self.sched.absolute(next).ok()
    }

    /// Moves the idle clock to `target` without releasing anything. Refuses
    /// to jump over a pending activation.
    pub fn advance_to(&mut self, target: SimTime) -> Result<(), KernelError> {
        if !self.sched.queue.is_empty() {
            return Err(KernelError::NotIdle);
        }
        let relative = self.relative(target)?;
        if let Some(pending) = self.sched.next_activation() {
            if pending < relative {
                return Err(KernelError::SkippedActivation {
                    target,
                    pending: self.sched.absolute(pending)?,
                });
            }
        }
        self.sched.clock.advance(relative)?;
        Ok(())
    }

    /// Releases everything due at `t`, which must be the current time, onto
    /// the empty ready queue.
    pub fn release_due(&mut self, t: SimTime) -> Result<(), KernelError> {
        if !self.sched.queue.is_empty() {
            return Err(KernelError::NotIdle);
        }
        if t != self.now() {
            return Err(KernelError::ClockMismatch {
                now: self.now(),
                requested: t,
            });
        }
        self.release_due_at(self.sched.clock.now())
    }

    /// Runs the job to completion.
    pub fn run(&mut self) -> Result<JobResult, KernelError> {
        loop {
            self.drain()?;
            if self.max_events.is_some_and(|max| self.executed >= max) {
                break;
            }
            let Some(next) = self.sched.next_activation() else {
                if self.end.is_some() {
                    break;
                }
                return Err(KernelError::StarvedClock { at: self.now() });
            };
            if self.end.is_some_and(|end| next > end) {
                break;
            }
            self.sched.absolute(next)?;
            self.sched.clock.advance(next)?;
            self.release_due_at(next)?;
        }
        self.finished = true;
        Ok(JobResult {
            finished: true,
            exit_code: 0,
            final_sim_time: self.now(),
            executed_events: self.executed,
            trace: self.trace.clone(),
        })
    }

    /// Terminal state of every node that exposes one, keyed by node name.
    pub fn final_states(&self) -> Result<BTreeMap<String, u64>, KernelError> {
        if !self.finished {
            return Err(KernelError::JobNotFinished);
        }
        Ok(self
            .graph
            .nodes
            .iter()
            .filter_map(|slot| slot.node.state().map(|s| (slot.name.clone(), s)))
            .collect())
    }

    fn relative(&self, absolute: SimTime) -> Result<SimTime, KernelError> {
        absolute
            .checked_since(self.sched.start)
            .map(|d| SimTime::from_nanos(d.as_nanos()))
            .ok_or(KernelError::Time(TimeError::BackwardTime {
                now: self.now(),
                target: absolute,
            }))
    }

    fn release_due_at(&mut self, now: SimTime) -> Result<(), KernelError> {
        let publications: Vec<DelayedPublication> = {
            let keys: Vec<_> = self
                .sched
                .delayed
                .range((now, 0)..=(now, u64::MAX))
                .map(|(k, _)| *k)
                .collect();
            keys.iter()
                .filter_map(|k| self.sched.delayed.remove(k))
                .collect()
        };
        let timers: Vec<EntityId> = self
            .sched
            .timers
            .range((now, EntityId(0))..=(now, EntityId(u32::MAX)))
            .map(|&(_, id)| id)
            .collect();

        match self.tie_break {
            TieBreak::Normative => {
                self.release_publications(publications);
                self.fire_timers(now, timers)?;
            }
            TieBreak::Inverted => {
                self.fire_timers(now, timers.into_iter().rev())?;
                self.release_publications(publications.into_iter().rev());
            }
        }
        Ok(())
    }

    fn release_publications(&mut self, publications: impl IntoIterator<Item = DelayedPublication>) {
        for publication in publications {
            fan_out(
                &mut self.graph.table,
                &mut self.sched,
                publication.publisher,
                publication.payload,
            );
        }
    }

    fn fire_timers(
        &mut self,
        now: SimTime,
        timers: impl IntoIterator<Item = EntityId>,
    ) -> Result<(), KernelError> {
        for id in timers {
            self.sched.timers.remove(&(now, id));
            let timer = self.graph.table.timer_mut(id);
            let next = timer.next_deadline.checked_add(timer.period)?;
            timer.next_deadline = next;
            let callback = timer.callback;
            self.sched.timers.insert((next, id));
            self.sched
                .enqueue(EventKind::TimerFire, id, callback, None, None);
        }
        Ok(())
    }

    fn execute(&mut self, event: ReadyEvent) -> Result<(), KernelError> {
        let now = self.now();
        let Graph { nodes, table } = &mut self.graph;
        let owner = table.get(event.target).owner();
        let slot = &mut nodes[owner.index()];

        let mut input = event.payload.unwrap_or(0);
        let delivered = match event.kind {
            EventKind::TopicDelivery => {
                let payload = table.subscription_mut(event.target).pop();
                if let Some(p) = &payload {
                    input = p.value;
                }
                payload
            }
            _ => None,
        };
        let no_op = event.kind == EventKind::TopicDelivery && delivered.is_none();

        let mut response = None;
        if !no_op {
            if let Some(jitter) = &mut self.jitter {
                jitter.sleep();
            }
            let mut cx = Context {
                table: &mut *table,
                sched: &mut self.sched,
                node: owner,
                callback: event.callback,
                now,
            };
            let node = &mut slot.node;
            match event.kind {
                EventKind::TimerFire => node.on_timer(&mut cx, TimerId(event.target)),
                EventKind::TopicDelivery => {
                    let msg = delivered.as_ref().expect("checked above");
                    node.on_message(&mut cx, SubscriptionId(event.target), msg);
                }
                EventKind::ServiceRequest => {
                    response = Some(node.on_request(&mut cx, ServiceId(event.target), input));
                }
                EventKind::ClientResponse => {
                    node.on_response(&mut cx, ClientId(event.target), input)
                }
            }
        }

        if let (Some(response), Some(client)) = (response, event.reply_to) {
            let callback = table
                .get(client.0)
                .callback()
                .expect("clients own a callback");
            self.sched.enqueue(
                EventKind::ClientResponse,
                client.0,
                callback,
                Some(response),
                None,
            );
        }
        if let Some(fault) = self.sched.fault.take() {
            return Err(fault);
        }

        self.trace.record(TraceRecord {
            seq: self.trace.len() as u64,
            sim_time_ns: now.as_nanos(),
            node_name: slot.name.clone(),
            event_kind: event.kind,
            entity_reg_index: u64::from(event.target.0),
            callback_id: event.callback.0,
            input_word: input,
            state_after: slot.node.state().unwrap_or(0),
            no_op_delivery: no_op,
        })?;
        self.executed += 1;
        Ok(())
    }
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Kernel")
            .field("now", &self.now())
            .field("queued", &self.sched.queue.len())
            .field("delayed", &self.sched.delayed.len())
            .field("executed", &self.executed)
            .field("finished", &self.finished)
            .finish_non_exhaustive()
    }
}
