mod support;

use std::collections::{BTreeSet, HashMap};

use detsim_core::graph::Entity;
use detsim_core::{
    benchmark, EventKind, JobSpec, Kernel, KernelOptions, ParameterSet, SimDuration, SimTime,
    TieBreak,
};
use proptest::prelude::*;

use support::oracle;

const MS: u64 = 1_000_000;
const START: u64 = 1_700_000_000_000_000_000;

fn run(job: &JobSpec) -> Kernel {
    let mut k = Kernel::new(job, &support::factory()).unwrap();
    k.run().unwrap();
    k
}

#[test]
fn three_node_graph_matches_hand_enumeration() {
    for (start, duration_ms) in [(0, 1000), (START, 1000), (0, 3000), (7, 299)] {
        let k = run(&oracle::job(start, duration_ms));
        let text = k.trace().to_text();
        let actual: Vec<_> = text.lines().skip(1).collect();
        let expected = oracle::expected_lines(start, duration_ms);
        assert_eq!(actual, expected, "start={start} duration={duration_ms}ms");
    }
    // 1 s: 10 + 6 timer fires, 13 instants with a delivery, 3 coincident.
    assert_eq!(oracle::expected_rows(0, 1000).len(), 10 + 6 + 13 + 3);
}

#[test]
fn identical_jobs_give_identical_traces() {
    let job = benchmark::default_job(SimTime::from_nanos(START), SimDuration::from_secs(10));
    let a = run(&job);
    let b = run(&job);
    assert_eq!(a.trace().serialize(), b.trace().serialize());
    assert_eq!(a.final_states().unwrap(), b.final_states().unwrap());
}

#[test]
fn entity_layout_is_deterministic() {
    let job = benchmark::default_job(SimTime::ZERO, SimDuration::from_secs(1));
    let a = Kernel::new(&job, &support::factory()).unwrap();
    let b = Kernel::new(&job, &support::factory()).unwrap();
    assert_eq!(a.graph().entities(), b.graph().entities());
    assert!(!a.graph().entities().is_empty());
}

#[test]
fn clock_is_frozen_within_a_drain_and_only_jumps_to_activations() {
    let job = benchmark::default_job(SimTime::from_nanos(START), SimDuration::from_secs(10));
    let mut k = Kernel::new(&job, &support::factory()).unwrap();
    let periods: Vec<u64> = k
        .graph()
        .entities()
        .iter()
        .filter_map(|e| match e {
            Entity::Timer(t) => Some(t.period.as_nanos()),
            _ => None,
        })
        .collect();
    let end = SimTime::from_nanos(START + 10_000 * MS);
    let mut seen_times = BTreeSet::new();
    loop {
        let before = k.trace().len();
        let now = k.now();
        let n = k.drain().unwrap() as usize;
        assert_eq!(k.trace().len(), before + n);
        assert!(k.trace().records()[before..]
            .iter()
            .all(|r| r.sim_time_ns == now.as_nanos()));
        seen_times.insert(now.as_nanos());
        match k.next_activation_time() {
            Some(next) if next <= end => {
                k.advance_to(next).unwrap();
                k.release_due(next).unwrap();
            }
            _ => break,
        }
    }
    for time in seen_times {
        let offset = time - START;
        assert!(
            offset == 0 || periods.iter().any(|p| offset.is_multiple_of(*p)),
            "clock visited {offset} which is no activation"
        );
    }
}

#[test]
fn subscription_counters_balance_after_every_event() {
    let job = benchmark::default_job(SimTime::ZERO, SimDuration::from_secs(3));
    let mut k = Kernel::new(&job, &support::factory()).unwrap();
    let subs: Vec<_> = k
        .graph()
        .entities()
        .iter()
        .filter(|e| matches!(e, Entity::Subscription(_)))
        .map(|e| e.reg_index())
        .collect();
    let end = SimTime::from_nanos(3_000 * MS);
    let mut dropped = 0;
    loop {
        while k.step().unwrap() {
            for &s in &subs {
                let st = k.graph().subscription_stats(s).unwrap();
                assert_eq!(st.received + st.buffered + st.dropped, st.published);
                assert!(st.buffered <= 1);
            }
        }
        match k.next_activation_time() {
            Some(next) if next <= end => {
                k.advance_to(next).unwrap();
                k.release_due(next).unwrap();
            }
            _ => break,
        }
    }
    for &s in &subs {
        dropped += k.graph().subscription_stats(s).unwrap().dropped;
    }
    assert!(dropped > 0, "the benchmark exercises eviction");
}

#[test]
fn delayed_deliveries_arrive_exactly_one_delay_later() {
    let delay = 5 * MS;
    let job = JobSpec::new(SimTime::from_nanos(START), SimDuration::from_secs(2))
        .node(
            benchmark::SOURCE,
            "src",
            ParameterSet::new()
                .with("publish_topic", "/t")
                .with("timer0_period_ms", 10)
                .with("timer0_id", 1)
                .with("timer1_period_ms", 15)
                .with("timer1_id", 2),
        )
        .node(
            benchmark::RELAY,
            "dst",
            ParameterSet::new()
                .with("sub0_topic", "/t")
                .with("sub0_id", 3)
                .with("sub0_depth", 4),
        )
        .delay("src", "/t", SimDuration::from_nanos(delay));
    let k = run(&job);
    let mut published = HashMap::new();
    let mut deliveries = 0;
    for r in k.trace().records() {
        match r.event_kind {
            EventKind::TimerFire => {
                published.insert(r.state_after, r.sim_time_ns);
            }
            EventKind::TopicDelivery => {
                let sent = published[&r.input_word];
                assert_eq!(r.sim_time_ns - sent, delay);
                deliveries += 1;
            }
            _ => unreachable!(),
        }
    }
    assert!(deliveries >= 100, "{deliveries} deliveries");
}

#[test]
fn inverted_tie_break_changes_final_states() {
    let job = benchmark::default_job(SimTime::from_nanos(START), SimDuration::from_secs(10));
    let normal = run(&job);
    let mut inverted = Kernel::with_options(
        &job,
        &support::factory(),
        KernelOptions {
            tie_break: TieBreak::Inverted,
        },
    )
    .unwrap();
    inverted.run().unwrap();
    assert_ne!(
        normal.final_states().unwrap(),
        inverted.final_states().unwrap()
    );
    assert_ne!(normal.trace().serialize(), inverted.trace().serialize());
    assert_eq!(normal.executed_events(), inverted.executed_events());
}

#[test]
fn start_time_is_observable_in_states() {
    let a = run(&benchmark::default_job(
        SimTime::ZERO,
        SimDuration::from_secs(1),
    ));
    let b = run(&benchmark::default_job(
        SimTime::from_nanos(1),
        SimDuration::from_secs(1),
    ));
    assert_ne!(a.final_states().unwrap(), b.final_states().unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn timer_fires_floor_duration_over_period(
        period in 1u64..=5_000_000_000,
        ratio in 0u64..2_000,
        extra in 0u64..5_000_000_000,
        start in 0u64..1u64 << 62,
    ) {
        let duration = period * ratio + extra % period;
        let job = JobSpec::new(SimTime::from_nanos(start), SimDuration::from_nanos(duration)).node(
            "counter",
            "c",
            ParameterSet::new()
                .with("topic", "/t")
                .with("period_ns", period as i64)
                .with("timer_id", 1),
        );
        let k = run(&job);
        prop_assert_eq!(k.executed_events(), duration / period);
        for (i, r) in k.trace().records().iter().enumerate() {
            prop_assert_eq!(r.sim_time_ns, start + (i as u64 + 1) * period);
        }
    }

    #[test]
    fn fan_out_follows_registration_order(subscribers in 1usize..8, depth in 1u64..4) {
        let mut job = JobSpec::new(SimTime::ZERO, SimDuration::from_millis(100)).node(
            "counter",
            "src",
            ParameterSet::new()
                .with("topic", "/t")
                .with("period_ns", (100 * MS) as i64)
                .with("timer_id", 1),
        );
        for i in 0..subscribers {
            job = job.node(
                "sink",
                &format!("s{i}"),
                ParameterSet::new()
                    .with("topic", "/t")
                    .with("sub_id", 10 + i as i64)
                    .with("depth", depth as i64),
            );
        }
        let k = run(&job);
        let regs: Vec<u64> = k
            .trace()
            .records()
            .iter()
            .filter(|r| r.event_kind == EventKind::TopicDelivery)
            .map(|r| r.entity_reg_index)
            .collect();
        let mut sorted = regs.clone();
        sorted.sort_unstable();
        prop_assert_eq!(regs.len(), subscribers);
        prop_assert_eq!(regs, sorted);
    }
}
