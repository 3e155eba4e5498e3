//! Simulated time.
//!
//! The kernel never reads the wall clock. [`SimTime`] is an instant on the
//! simulated timeline and [`SimDuration`] a span on it, both in unsigned
//! 64-bit nanoseconds. Arithmetic is checked: overflow is reported, never
//! wrapped.

use std::fmt;

use thiserror::Error;

const NANOS_PER_MILLI: u64 = 1_000_000;
const NANOS_PER_SEC: u64 = 1_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum TimeError {
    #[error("clock cannot move backwards from {now} to {target}")]
    BackwardTime { now: SimTime, target: SimTime },
    #[error("simulated time overflow")]
    Overflow,
}

/// An instant on the simulated timeline, in nanoseconds.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SimTime(u64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);

    pub const fn from_nanos(ns: u64) -> Self {
        SimTime(ns)
    }

    pub const fn as_nanos(self) -> u64 {
        self.0
    }

    pub fn checked_add(self, d: SimDuration) -> Result<SimTime, TimeError> {
        self.0
            .checked_add(d.0)
            .map(SimTime)
            .ok_or(TimeError::Overflow)
    }

    /// Span from `earlier` to `self`, or `None` if `earlier` is later.
    pub fn checked_since(self, earlier: SimTime) -> Option<SimDuration> {
        self.0.checked_sub(earlier.0).map(SimDuration)
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}ns", self.0)
    }
}

/// A non-negative span of simulated time, in nanoseconds.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SimDuration(u64);

impl SimDuration {
    pub const ZERO: SimDuration = SimDuration(0);

    pub const fn from_nanos(ns: u64) -> Self {
        SimDuration(ns)
    }

    /// Panics if the result does not fit in 64-bit nanoseconds.
    pub const fn from_millis(ms: u64) -> Self {
        match ms.checked_mul(NANOS_PER_MILLI) {
            Some(ns) => SimDuration(ns),
            None => panic!("duration overflow"),
        }
    }

    /// Panics if the result does not fit in 64-bit nanoseconds.
    pub const fn from_secs(s: u64) -> Self {
        match s.checked_mul(NANOS_PER_SEC) {
            Some(ns) => SimDuration(ns),
            None => panic!("duration overflow"),
        }
    }

    pub const fn as_nanos(self) -> u64 {
        self.0
    }

    pub const fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn checked_add(self, other: SimDuration) -> Result<SimDuration, TimeError> {
        self.0
            .checked_add(other.0)
            .map(SimDuration)
            .ok_or(TimeError::Overflow)
    }
}

impl fmt::Display for SimDuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}ns", self.0)
    }
}

/// The kernel's simulated clock. Its value never decreases.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct SimClock {
    now: SimTime,
}

impl SimClock {
    pub fn new(now: SimTime) -> Self {
        SimClock { now }
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    /// Jumps the clock to `target`. Advancing to the current value is a no-op.
    pub fn advance(&mut self, target: SimTime) -> Result<(), TimeError> {
        if target < self.now {
            return Err(TimeError::BackwardTime {
                now: self.now,
                target,
            });
        }
        self.now = target;
        Ok(())
    }
}
