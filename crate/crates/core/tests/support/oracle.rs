//! Hand-enumerated expected trace for a three-node graph:
//!
//! * `node_a`: 100 ms timer publishing its state to `/t`
//! * `node_b`: 150 ms timer publishing its state to `/t`
//! * `node_c`: depth-1 subscription to `/t`
//!
//! The event loop is worked out by hand for this topology instead of being
//! simulated. At every instant the due timers fire in registration order
//! (a before b), each appending one delivery for `node_c` behind the timer
//! events already queued. When both timers fire, b's publication evicts a's
//! from the depth-1 buffer, so the first delivery carries b's state and the
//! second finds the buffer empty.
//!
//! Hashing and line formatting are re-derived here from their definitions.

#![allow(dead_code)]

use detsim_core::{benchmark, JobSpec, ParameterSet, SimDuration, SimTime};

pub const A_TIMER_ID: u64 = 0x1111_0000_0000_00a1;
pub const B_TIMER_ID: u64 = 0x2222_0000_0000_00b1;
pub const C_SUB_ID: u64 = 0x3333_0000_0000_00c1;
pub const A_INIT: u64 = 0xa;
pub const B_INIT: u64 = 0xb;
pub const C_INIT: u64 = 0xc;

// Registration indices: a = [publisher 0, timer 1], b = [publisher 2,
// timer 3], c = [subscription 4].
const A_TIMER_REG: u64 = 1;
const B_TIMER_REG: u64 = 3;
const C_SUB_REG: u64 = 4;

pub fn job(start: u64, duration_ms: u64) -> JobSpec {
    JobSpec::new(
        SimTime::from_nanos(start),
        SimDuration::from_millis(duration_ms),
    )
    .node(
        benchmark::SOURCE,
        "node_a",
        ParameterSet::new()
            .with("initial_state", A_INIT as i64)
            .with("publish_topic", "/t")
            .with("timer0_period_ms", 100)
            .with("timer0_id", format!("{A_TIMER_ID:#x}")),
    )
    .node(
        benchmark::SOURCE,
        "node_b",
        ParameterSet::new()
            .with("initial_state", B_INIT as i64)
            .with("publish_topic", "/t")
            .with("timer0_period_ms", 150)
            .with("timer0_id", format!("{B_TIMER_ID:#x}")),
    )
    .node(
        benchmark::RELAY,
        "node_c",
        ParameterSet::new()
            .with("initial_state", C_INIT as i64)
            .with("sub0_topic", "/t")
            .with("sub0_id", format!("{C_SUB_ID:#x}"))
            .with("sub0_depth", 1),
    )
}

fn splitmix(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn mix(state: u64, id: u64, t: u64, input: u64) -> u64 {
    splitmix(state ^ splitmix(id ^ splitmix(t ^ input)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    pub time: u64,
    pub node: &'static str,
    pub kind: &'static str,
    pub reg: u64,
    pub callback: u64,
    pub input: u64,
    pub state: u64,
    pub no_op: bool,
}

/// Expected rows for a job starting at `start` lasting `duration_ms`.
pub fn expected_rows(start: u64, duration_ms: u64) -> Vec<Row> {
    let (mut a, mut b, mut c) = (A_INIT, B_INIT, C_INIT);
    let mut rows = Vec::new();
    let mut ms = 50;
    while ms <= duration_ms {
        let t = start + ms * 1_000_000;
        let a_due = ms % 100 == 0;
        let b_due = ms % 150 == 0;
        ms += 50;
        if !a_due && !b_due {
            continue;
        }
        if a_due {
            a = mix(a, A_TIMER_ID, t, 0);
            rows.push(Row {
                time: t,
                node: "node_a",
                kind: "timer",
                reg: A_TIMER_REG,
                callback: A_TIMER_ID,
                input: 0,
                state: a,
                no_op: false,
            });
        }
        if b_due {
            b = mix(b, B_TIMER_ID, t, 0);
            rows.push(Row {
                time: t,
                node: "node_b",
                kind: "timer",
                reg: B_TIMER_REG,
                callback: B_TIMER_ID,
                input: 0,
                state: b,
                no_op: false,
            });
        }
        // The buffer holds whichever value was published last.
        let delivered = if b_due { b } else { a };
        c = mix(c, C_SUB_ID, t, delivered);
        rows.push(Row {
            time: t,
            node: "node_c",
            kind: "topic",
            reg: C_SUB_REG,
            callback: C_SUB_ID,
            input: delivered,
            state: c,
            no_op: false,
        });
        if a_due && b_due {
            rows.push(Row {
                time: t,
                node: "node_c",
                kind: "topic",
                reg: C_SUB_REG,
                callback: C_SUB_ID,
                input: 0,
                state: c,
                no_op: true,
            });
        }
    }
    rows
}

/// Expected record lines (without the header).
pub fn expected_lines(start: u64, duration_ms: u64) -> Vec<String> {
    expected_rows(start, duration_ms)
        .iter()
        .enumerate()
        .map(|(seq, r)| {
            format!(
                "{:016x}|{:016x}|{}|{}|{:016x}|{:016x}|{:016x}|{:016x}|{}",
                seq,
                r.time,
                r.node,
                r.kind,
                r.reg,
                r.callback,
                r.input,
                r.state,
                if r.no_op { "01" } else { "00" }
            )
        })
        .collect()
}
