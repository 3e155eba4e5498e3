#![allow(dead_code)]

pub mod oracle;

use detsim_core::{
    CallbackId, ClientId, Context, Node, NodeFactory, ParameterSet, Payload, PublisherId,
    ServiceId, SimDuration, SubscriptionId, TimerId,
};

/// Timer that sends a fixed request through every one of its clients, in
/// order, and records the responses it gets back.
struct Asker {
    clients: Vec<ClientId>,
    request: u64,
    last: u64,
}

impl Node for Asker {
    fn on_timer(&mut self, cx: &mut Context<'_>, _timer: TimerId) {
        for &c in &self.clients {
            cx.call(c, self.request);
        }
    }

    fn on_response(&mut self, _cx: &mut Context<'_>, _client: ClientId, response: u64) {
        self.last = response;
    }

    fn state(&self) -> Option<u64> {
        Some(self.last)
    }
}

/// Answers every request with `request + offset`.
struct Adder {
    offset: u64,
    handled: u64,
}

impl Node for Adder {
    fn on_request(&mut self, _cx: &mut Context<'_>, _service: ServiceId, request: u64) -> u64 {
        self.handled += 1;
        request + self.offset
    }

    fn state(&self) -> Option<u64> {
        Some(self.handled)
    }
}

/// Publishes an incrementing counter on each timer expiry.
struct Counter {
    publisher: PublisherId,
    count: u64,
}

impl Node for Counter {
    fn on_timer(&mut self, cx: &mut Context<'_>, _timer: TimerId) {
        self.count += 1;
        cx.publish(self.publisher, self.count);
    }

    fn state(&self) -> Option<u64> {
        Some(self.count)
    }
}

/// Records the last payload received.
struct Sink {
    last: u64,
}

impl Node for Sink {
    fn on_message(&mut self, _cx: &mut Context<'_>, _sub: SubscriptionId, msg: &Payload) {
        self.last = msg.value;
    }

    fn state(&self) -> Option<u64> {
        Some(self.last)
    }
}

fn id(p: &ParameterSet, key: &str) -> CallbackId {
    CallbackId(
        p.get_u64(key)
            .unwrap()
            .unwrap_or_else(|| panic!("missing {key}")),
    )
}

/// Benchmark node types plus `asker`, `adder`, `counter` and `sink`.
pub fn factory() -> NodeFactory {
    let mut f = NodeFactory::with_benchmark_nodes();
    f.register("asker", |b, p| {
        let period = p.get_u64("period_ms")?.unwrap_or(100);
        b.timer(SimDuration::from_millis(period), id(p, "timer_id"))?;
        let service = p.get_str("service")?.unwrap_or("sum").to_owned();
        let clients = (0..p.get_u64("clients")?.unwrap_or(1))
            .map(|i| b.client(&service, CallbackId(id(p, "client_id").0 + i)))
            .collect::<Result<_, _>>()?;
        Ok(Box::new(Asker {
            clients,
            request: p.get_u64("request")?.unwrap_or(42),
            last: 0,
        }))
    });
    f.register("adder", |b, p| {
        b.service(p.get_str("service")?.unwrap_or("sum"), id(p, "service_id"))?;
        Ok(Box::new(Adder {
            offset: p.get_u64("offset")?.unwrap_or(1),
            handled: 0,
        }))
    });
    f.register("counter", |b, p| {
        let publisher = b.publisher(p.get_str("topic")?.unwrap())?;
        let period = SimDuration::from_nanos(p.get_u64("period_ns")?.unwrap());
        b.timer(period, id(p, "timer_id"))?;
        Ok(Box::new(Counter {
            publisher,
            count: 0,
        }))
    });
    f.register("sink", |b, p| {
        let depth = p.get_u64("depth")?.unwrap_or(1) as usize;
        b.subscription(p.get_str("topic")?.unwrap(), depth, id(p, "sub_id"))?;
        Ok(Box::new(Sink { last: 0 }))
    });
    f
}
