//! Integer microsecond simulation clock.
//!
//! The microsecond is the base unit: the 16 µs radio symbol, millisecond
//! sampling periods and second-scale schedule points are all exact
//! multiples, so no floating-point time ever enters the event queue.

use core::fmt;
use core::ops::{Add, Sub};

/// A point in simulated time, in microseconds since run start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SimTime(u64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);

    pub const fn from_micros(us: u64) -> Self {
        SimTime(us)
    }

    pub const fn from_millis(ms: u64) -> Self {
        SimTime(ms * 1_000)
    }

    pub const fn from_secs(s: u64) -> Self {
        SimTime(s * 1_000_000)
    }

    pub const fn micros(self) -> u64 {
        self.0
    }

    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 / 1e6
    }

    pub fn saturating_sub(self, us: u64) -> SimTime {
        SimTime(self.0.saturating_sub(us))
    }
}

impl Add<u64> for SimTime {
    type Output = SimTime;

    /// Advances the time by a duration in microseconds.
    fn add(self, us: u64) -> SimTime {
        SimTime(self.0 + us)
    }
}

impl Sub<SimTime> for SimTime {
    type Output = u64;

    /// Duration in microseconds between two instants; panics if `rhs > self`.
    fn sub(self, rhs: SimTime) -> u64 {
        self.0 - rhs.0
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_conversions_are_exact() {
        assert_eq!(SimTime::from_millis(10).micros(), 10_000);
        assert_eq!(SimTime::from_secs(1).micros(), 1_000_000);
        assert_eq!(SimTime::from_secs(20).micros(), 20_000_000);
    }

    #[test]
    fn arithmetic() {
        let t = SimTime::from_micros(5) + 7;
        assert_eq!(t.micros(), 12);
        assert_eq!(t - SimTime::from_micros(2), 10);
        assert_eq!(SimTime::from_micros(3).saturating_sub(10), SimTime::ZERO);
    }
}
