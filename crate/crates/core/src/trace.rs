//! Canonical execution traces.
//!
//! A trace is a header line followed by one line per executed callback:
//!
//! ```text
//! #detsim-trace-v1|digest=<sha256 hex>|tool=<name/version>|start=<16 hex>
//! <seq>|<sim_time_ns>|<node>|<kind>|<reg_index>|<callback_id>|<input>|<state_after>|<flags>
//! ```
//!
//! 64-bit fields are 16 lowercase hex digits, `flags` is 2 hex digits, and
//! every line ends in `\n`. The output depends only on the log's contents, so
//! two traces are logically equal exactly when their bytes are.

use std::fmt::Write as _;

use thiserror::Error;

use crate::executor::EventKind;
use crate::time::SimTime;

const MAGIC: &str = "#detsim-trace-v1";
pub const TOOL_VERSION: &str = concat!("detsim/", env!("CARGO_PKG_VERSION"));

const FLAG_NO_OP_DELIVERY: u8 = 0x01;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("record seq {got} does not follow {expected}")]
    SeqGap { expected: u64, got: u64 },
    #[error("record time {got:#x} precedes previous record time {previous:#x}")]
    TimeRegression { previous: u64, got: u64 },
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceHeader {
    /// Digest of the job that produced the trace.
    pub digest: String,
    pub tool: String,
    pub start_time: SimTime,
}

impl TraceHeader {
    pub fn new(digest: String, start_time: SimTime) -> Self {
        TraceHeader {
            digest,
            tool: TOOL_VERSION.to_owned(),
            start_time,
        }
    }
}

/// One executed callback.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRecord {
    pub seq: u64,
    /// Absolute simulated time.
    pub sim_time_ns: u64,
    pub node_name: String,
    pub event_kind: EventKind,
    pub entity_reg_index: u64,
    pub callback_id: u64,
    /// Delivered payload, request or response word; 0 for timers.
    pub input_word: u64,
    pub state_after: u64,
    /// The delivery found its payload already evicted; no callback ran.
    pub no_op_delivery: bool,
}

impl TraceRecord {
    fn write_line(&self, out: &mut String) {
        let flags = if self.no_op_delivery {
            FLAG_NO_OP_DELIVERY
        } else {
            0
        };
        let _ = writeln!(
            out,
            "{:016x}|{:016x}|{}|{}|{:016x}|{:016x}|{:016x}|{:016x}|{:02x}",
            self.seq,
            self.sim_time_ns,
            self.node_name,
            self.event_kind.tag(),
            self.entity_reg_index,
            self.callback_id,
            self.input_word,
            self.state_after,
            flags
        );
    }

    fn parse_line(line: &str, lineno: usize) -> Result<TraceRecord, TraceError> {
        let malformed = |reason: String| TraceError::Malformed {
            line: lineno,
            reason,
        };
        let fields: Vec<&str> = line.split('|').collect();
        let [seq, time, node, kind, reg, cb, input, state, flags] = fields[..] else {
            return Err(malformed(format!(
                "expected 9 fields, found {}",
                fields.len()
            )));
        };
        let word = |name: &str, s: &str| {
            parse_hex(s, 16).ok_or_else(|| malformed(format!("bad {name} `{s}`")))
        };
        let flags = parse_hex(flags, 2).ok_or_else(|| malformed(format!("bad flags `{flags}`")))?;
        if flags & !u64::from(FLAG_NO_OP_DELIVERY) != 0 {
            return Err(malformed(format!("unknown flags {flags:#x}")));
        }
        if node.is_empty() {
            return Err(malformed("empty node name".into()));
        }
        Ok(TraceRecord {
            seq: word("seq", seq)?,
            sim_time_ns: word("sim time", time)?,
            node_name: node.to_owned(),
            event_kind: EventKind::from_tag(kind)
                .ok_or_else(|| malformed(format!("unknown event kind `{kind}`")))?,
            entity_reg_index: word("reg index", reg)?,
            callback_id: word("callback id", cb)?,
            input_word: word("input", input)?,
            state_after: word("state", state)?,
            no_op_delivery: flags != 0,
        })
    }
}

/// Parses exactly `width` lowercase hex digits.
fn parse_hex(s: &str, width: usize) -> Option<u64> {
    let canonical = s.len() == width && s.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f'));
    if canonical {
        u64::from_str_radix(s, 16).ok()
    } else {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceLog {
    header: TraceHeader,
    records: Vec<TraceRecord>,
}

impl TraceLog {
    pub fn new(header: TraceHeader) -> Self {
        TraceLog {
            header,
            records: Vec::new(),
        }
    }

    pub fn header(&self) -> &TraceHeader {
        &self.header
    }

    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Appends `rec`, whose `seq` must equal the current length.
    pub fn record(&mut self, rec: TraceRecord) -> Result<(), TraceError> {
        let expected = self.records.len() as u64;
        if rec.seq != expected {
            return Err(TraceError::SeqGap {
                expected,
                got: rec.seq,
            });
        }
        if let Some(last) = self.records.last() {
            if rec.sim_time_ns < last.sim_time_ns {
                return Err(TraceError::TimeRegression {
                    previous: last.sim_time_ns,
                    got: rec.sim_time_ns,
                });
            }
        }
        self.records.push(rec);
        Ok(())
    }

    pub fn serialize(&self) -> Vec<u8> {
        self.to_text().into_bytes()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(64 * (self.records.len() + 2));
        let _ = writeln!(
            out,
            "{MAGIC}|digest={}|tool={}|start={:016x}",
            self.header.digest,
            self.header.tool,
            self.header.start_time.as_nanos()
        );
        for rec in &self.records {
            rec.write_line(&mut out);
        }
        out
    }

    pub fn parse(bytes: &[u8]) -> Result<TraceLog, TraceError> {
        let text = std::str::from_utf8(bytes).map_err(|e| TraceError::Malformed {
            line: 1 + bytes[..e.valid_up_to()]
                .iter()
                .filter(|&&b| b == b'\n')
                .count(),
            reason: "not UTF-8".into(),
        })?;
        let Some(body) = text.strip_suffix('\n') else {
            return Err(TraceError::Malformed {
                line: text.lines().count().max(1),
                reason: "missing final newline".into(),
            });
        };
        let mut lines = body.split('\n');
        let header = parse_header(lines.next().unwrap_or_default())?;
        let mut log = TraceLog::new(header);
        for (i, line) in lines.enumerate() {
            let lineno = i + 2;
            let rec = TraceRecord::parse_line(line, lineno)?;
            log.record(rec).map_err(|e| TraceError::Malformed {
                line: lineno,
                reason: e.to_string(),
            })?;
        }
        Ok(log)
    }
}

fn parse_header(line: &str) -> Result<TraceHeader, TraceError> {
    let malformed = |reason: &str| TraceError::Malformed {
        line: 1,
        reason: reason.to_owned(),
    };
    let mut fields = line.split('|');
    if fields.next() != Some(MAGIC) {
        return Err(malformed("not a detsim trace header"));
    }
    let mut field = |name: &str| {
        fields
            .next()
            .and_then(|f| f.strip_prefix(name))
            .and_then(|f| f.strip_prefix('='))
            .ok_or_else(|| malformed(&format!("missing header field `{name}`")))
    };
    let digest = field("digest")?.to_owned();
    let tool = field("tool")?.to_owned();
    let start = field("start")?;
    let start = parse_hex(start, 16).ok_or_else(|| malformed("bad start time"))?;
    if fields.next().is_some() {
        return Err(malformed("trailing header fields"));
    }
    Ok(TraceHeader {
        digest,
        tool,
        start_time: SimTime::from_nanos(start),
    })
}

/// Result of comparing two serialized traces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Equal,
    /// First differing line (1-based). `None` marks a missing line.
    FirstDivergence {
        line: usize,
        left: Option<String>,
        right: Option<String>,
    },
}

impl Verdict {
    pub fn is_equal(&self) -> bool {
        matches!(self, Verdict::Equal)
    }
}

/// Compares two serialized traces line by line. The header line only takes
/// part when `strict_header` is set, so traces written by different builds of
/// the tool still compare equal.
pub fn compare(a: &[u8], b: &[u8], strict_header: bool) -> Verdict {
    if a == b {
        return Verdict::Equal;
    }
    let mut left = a.split(|&c| c == b'\n');
    let mut right = b.split(|&c| c == b'\n');
    let mut line = 0;
    loop {
        line += 1;
        match (left.next(), right.next()) {
            (None, None) => return Verdict::Equal,
            (l, r) if l == r => continue,
            _ if line == 1 && !strict_header => continue,
            (l, r) => {
                let show = |s: &[u8]| String::from_utf8_lossy(s).into_owned();
                return Verdict::FirstDivergence {
                    line,
                    left: l.map(show),
                    right: r.map(show),
                };
            }
        }
    }
}
