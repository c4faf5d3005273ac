//! Per-flow QoS managers: the open-loop null manager and the fuzzy
//! feedback scheduler.
//!
//! The feedback scheduler is a sampled control loop: the controlled
//! variable is a flow's windowed deadline miss ratio, the manipulated
//! variable is its sampling period, and the reference is the miss-ratio
//! setpoint. Each tick feeds the normalized error and error delta to the
//! Mamdani engine in [`crate::fuzzy`] and applies the inferred relative
//! period step.

use crate::fuzzy;

#[derive(Debug, Clone, PartialEq)]
pub struct ControllerParams {
    /// Desired deadline miss ratio.
    pub setpoint: f64,
    /// Manager invocation interval, µs.
    pub interval_us: u64,
    /// Scale from raw DMR error to the [-1, 1] input universe.
    pub e_gain: f64,
    /// Scale from raw error delta to the [-1, 1] input universe.
    pub de_gain: f64,
    /// Maximum relative period change per tick.
    pub u_gain: f64,
}

impl Default for ControllerParams {
    fn default() -> Self {
        ControllerParams {
            setpoint: 0.10,
            interval_us: 1_000_000,
            // an error of 0.5 saturates the input universe
            e_gain: 2.0,
            de_gain: 2.0,
            u_gain: 0.5,
        }
    }
}

/// Mutable state of one flow's fuzzy feedback scheduler.
#[derive(Debug, Clone, Default)]
pub struct FuzzyState {
    pub last_error: f64,
}

impl FuzzyState {
    /// One controller invocation: maps the measured miss ratio to a new
    /// sampling period in `[period_min, period_max]`. The new period
    /// takes effect from the flow's next release.
    pub fn tick(
        &mut self,
        params: &ControllerParams,
        dmr: f64,
        period_us: u64,
        period_min_us: u64,
        period_max_us: u64,
    ) -> u64 {
        let e = dmr - params.setpoint;
        let e_norm = (e * params.e_gain).clamp(-1.0, 1.0);
        let de_norm = ((e - self.last_error) * params.de_gain).clamp(-1.0, 1.0);
        let delta = fuzzy::infer(e_norm, de_norm);
        self.last_error = e;
        let raw = period_us as f64 * (1.0 + params.u_gain * delta);
        // round half-up; raw >= 0 because u_gain * delta >= -1 is clamped below
        let rounded = if raw <= 0.0 { 0 } else { (raw + 0.5) as u64 };
        rounded.clamp(period_min_us, period_max_us)
    }
}

/// Open-loop manager: leaves the period untouched, always.
pub fn null_tick(period_us: u64) -> u64 {
    period_us
}

#[cfg(test)]
mod tests {
    use super::*;

    const MIN: u64 = 10_000;
    const MAX: u64 = 500_000;

    #[test]
    fn fixed_point_at_setpoint() {
        let p = ControllerParams::default();
        let mut st = FuzzyState::default();
        // measured DMR equals the setpoint and the previous error is zero
        assert_eq!(st.tick(&p, 0.10, 10_000, MIN, MAX), 10_000);
        assert_eq!(st.last_error, 0.0);
    }

    #[test]
    fn saturated_error_applies_full_step() {
        let p = ControllerParams::default();
        let mut st = FuzzyState::default();
        // dmr 1.0 -> e = 0.9, e_norm = de_norm = 1 -> delta = 5/6
        let next = st.tick(&p, 1.0, 12_000, MIN, MAX);
        let want = (12_000.0 * (1.0 + 0.5 * (5.0 / 6.0)) + 0.5) as u64;
        assert_eq!(next, want);
    }

    #[test]
    fn full_positive_delta_scales_by_u_gain() {
        // delta = +1 cannot be produced by inference (centroid of the
        // outer set is 5/6) so drive the update law directly
        let raw = 10_000.0f64 * (1.0 + 0.5 * 1.0);
        assert_eq!((raw + 0.5) as u64, 15_000);
    }

    #[test]
    fn period_clamps_at_bounds() {
        let p = ControllerParams::default();
        let mut st = FuzzyState::default();
        assert_eq!(st.tick(&p, 1.0, 400_000, MIN, MAX), MAX);
        let mut st = FuzzyState::default();
        assert_eq!(st.tick(&p, 0.0, 11_000, MIN, MAX), MIN);
    }

    #[test]
    fn null_manager_never_changes_anything() {
        for period in [10_000u64, 123_456, 500_000] {
            assert_eq!(null_tick(period), period);
        }
    }

    #[test]
    fn one_tick_step_is_bounded_by_u_gain() {
        let p = ControllerParams::default();
        for dmr_milli in 0..=100 {
            let mut st = FuzzyState::default();
            let dmr = dmr_milli as f64 / 100.0;
            let next = st.tick(&p, dmr, 100_000, 1, 10_000_000);
            assert!((50_000..=150_000).contains(&next), "dmr {dmr} -> {next}");
        }
    }
}
