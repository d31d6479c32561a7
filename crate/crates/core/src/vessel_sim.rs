//! Time-stepped water level in the measurement vessel.
//!
//! Rain caught by the funnel raises the vessel level by the amplification
//! factor. A fitted siphon empties the vessel completely whenever the level
//! reaches the trigger height; without one, water above the rim is counted
//! as overflow.

use chrono::{Duration, NaiveDateTime};

use crate::error::{Error, Result};
use crate::geometry::{GaugeGeometry, MM_PER_CM};

pub const SECONDS_PER_HOUR: f64 = 3600.0;

/// Default simulation step, one firmware sample interval.
pub const DEFAULT_STEP_SECS: u32 = 60;

// Relative slack on the trigger comparison so a fill that lands on the
// trigger height up to rounding still fires.
const TRIGGER_REL_EPS: f64 = 1e-9;

/// Piecewise-constant rainfall intensity, one value per step.
#[derive(Debug, Clone, PartialEq)]
pub struct RainTrace {
    start: NaiveDateTime,
    step_secs: u32,
    intensities: Vec<f64>,
}

impl RainTrace {
    pub fn new(start: NaiveDateTime, step_secs: u32, intensities: Vec<f64>) -> Result<Self> {
        if step_secs == 0 {
            return Err(Error::InvalidTrace("step must be positive".into()));
        }
        if let Some((i, v)) = intensities
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(Error::InvalidTrace(format!(
                "intensity {v} at step {i} is not a finite non-negative rate"
            )));
        }
        Ok(Self {
            start,
            step_secs,
            intensities,
        })
    }

    /// `hours` of constant rain at `mm_per_hr`, sampled every `step_secs`.
    pub fn constant(start: NaiveDateTime, step_secs: u32, mm_per_hr: f64, hours: u32) -> Result<Self> {
        if step_secs == 0 || 3600 % step_secs != 0 {
            return Err(Error::InvalidTrace(format!(
                "step {step_secs} s does not divide an hour"
            )));
        }
        let n = (hours * (3600 / step_secs)) as usize;
        Self::new(start, step_secs, vec![mm_per_hr; n])
    }

    pub fn start(&self) -> NaiveDateTime {
        self.start
    }

    pub fn step_secs(&self) -> u32 {
        self.step_secs
    }

    pub fn intensities(&self) -> &[f64] {
        &self.intensities
    }

    pub fn len(&self) -> usize {
        self.intensities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intensities.is_empty()
    }

    pub fn duration_secs(&self) -> u64 {
        self.step_secs as u64 * self.intensities.len() as u64
    }

    /// Time at the start of step `i`.
    pub fn time_at(&self, i: usize) -> NaiveDateTime {
        self.start + Duration::seconds(self.step_secs as i64 * i as i64)
    }

    /// Same rainfall on a finer grid. `step_secs` must divide the current step.
    pub fn resample(&self, step_secs: u32) -> Result<Self> {
        if step_secs == 0 || !self.step_secs.is_multiple_of(step_secs) {
            return Err(Error::InvalidTrace(format!(
                "cannot resample a {} s trace onto a {step_secs} s grid",
                self.step_secs
            )));
        }
        let k = (self.step_secs / step_secs) as usize;
        let intensities = self
            .intensities
            .iter()
            .flat_map(|&v| std::iter::repeat_n(v, k))
            .collect();
        Self::new(self.start, step_secs, intensities)
    }

    /// Rain depth (mm) delivered by the whole trace.
    pub fn total_rain_mm(&self) -> f64 {
        self.intensities.iter().sum::<f64>() * self.step_secs as f64 / SECONDS_PER_HOUR
    }

    /// Rain depth (mm) in each whole hour counted from the trace start.
    /// A trailing partial hour is dropped.
    pub fn hourly_totals_mm(&self) -> Result<Vec<f64>> {
        if 3600 % self.step_secs != 0 {
            return Err(Error::InvalidTrace(format!(
                "step {} s does not divide an hour",
                self.step_secs
            )));
        }
        let per_hour = (3600 / self.step_secs) as usize;
        let dt_hr = self.step_secs as f64 / SECONDS_PER_HOUR;
        Ok(self
            .intensities
            .chunks_exact(per_hour)
            .map(|c| c.iter().sum::<f64>() * dt_hr)
            .collect())
    }

    /// Volume (cm³) the funnel delivers to the vessel over the whole trace.
    pub fn inflow_volume(&self, catch_area_cm2: f64) -> f64 {
        self.total_rain_mm() / MM_PER_CM * catch_area_cm2
    }
}

/// Vessel contents at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VesselState {
    pub time: NaiveDateTime,
    pub level_cm: f64,
    pub cumulative_drained_cm3: f64,
    /// Water lost over the rim of a vessel with no siphon.
    pub overflow_cm3: f64,
    /// A siphon with finite drain duration is still emptying.
    pub draining: bool,
}

impl VesselState {
    pub fn empty(time: NaiveDateTime) -> Self {
        Self {
            time,
            level_cm: 0.0,
            cumulative_drained_cm3: 0.0,
            overflow_cm3: 0.0,
            draining: false,
        }
    }
}

/// One siphon firing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrainEvent {
    pub time: NaiveDateTime,
    pub volume_released_cm3: f64,
}

/// Result of a full simulation: one state per trace step, plus events.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationRun {
    pub initial: VesselState,
    pub states: Vec<VesselState>,
    pub events: Vec<DrainEvent>,
}

impl SimulationRun {
    pub fn final_state(&self) -> &VesselState {
        self.states.last().unwrap_or(&self.initial)
    }
}

/// Physics parameters for a vessel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VesselModel {
    pub geometry: GaugeGeometry,
    pub catch_area_cm2: f64,
    /// Time for the siphon to empty a full vessel. Zero drains within the
    /// triggering step.
    pub drain_duration_secs: f64,
}

impl VesselModel {
    pub fn new(geometry: GaugeGeometry) -> Self {
        Self {
            geometry,
            catch_area_cm2: geometry.effective_catch_area(),
            drain_duration_secs: 0.0,
        }
    }

    pub fn with_catch_area(mut self, catch_area_cm2: f64) -> Self {
        self.catch_area_cm2 = catch_area_cm2;
        self
    }

    pub fn with_drain_duration(mut self, secs: f64) -> Self {
        self.drain_duration_secs = secs.max(0.0);
        self
    }

    /// Advances the vessel by `dt_secs` of rain at `intensity_mm_per_hr`.
    ///
    /// With an instantaneous siphon the level is always strictly below the
    /// trigger afterwards; inflow past the trigger carries over into the
    /// freshly emptied vessel, so one step can fire more than once.
    pub fn step(
        &self,
        state: &VesselState,
        intensity_mm_per_hr: f64,
        dt_secs: f64,
    ) -> (VesselState, Vec<DrainEvent>) {
        let g = &self.geometry;
        let area = g.meas_cross_section();
        let mut next = *state;
        next.time = state.time + Duration::milliseconds((dt_secs * 1000.0).round() as i64);
        let mut events = Vec::new();

        let rain_cm = intensity_mm_per_hr.max(0.0) * dt_secs / SECONDS_PER_HOUR / MM_PER_CM;
        next.level_cm += rain_cm * self.catch_area_cm2 / area;

        if next.draining {
            let capacity = self.drain_rate_cm3_per_s() * dt_secs;
            let held = next.level_cm * area;
            if capacity >= held * (1.0 - TRIGGER_REL_EPS) {
                next.cumulative_drained_cm3 += held;
                next.level_cm = 0.0;
                next.draining = false;
            } else {
                next.level_cm -= capacity / area;
                next.cumulative_drained_cm3 += capacity;
            }
        } else if let Some(trigger) = g.siphon_trigger_cm() {
            let trigger_volume = area * trigger;
            if self.drain_duration_secs > 0.0 {
                if next.level_cm >= trigger * (1.0 - TRIGGER_REL_EPS) {
                    next.draining = true;
                    events.push(DrainEvent {
                        time: next.time,
                        volume_released_cm3: trigger_volume,
                    });
                }
            } else {
                while next.level_cm >= trigger * (1.0 - TRIGGER_REL_EPS) {
                    next.level_cm = (next.level_cm - trigger).max(0.0);
                    next.cumulative_drained_cm3 += trigger_volume;
                    events.push(DrainEvent {
                        time: next.time,
                        volume_released_cm3: trigger_volume,
                    });
                }
            }
        }

        let rim = g.meas_height_cm();
        if next.level_cm > rim {
            next.overflow_cm3 += (next.level_cm - rim) * area;
            next.level_cm = rim;
        }
        (next, events)
    }

    fn drain_rate_cm3_per_s(&self) -> f64 {
        let full = self.geometry.trigger_volume().unwrap_or(0.0);
        if self.drain_duration_secs > 0.0 {
            full / self.drain_duration_secs
        } else {
            f64::INFINITY
        }
    }

    /// Folds [`VesselModel::step`] over a trace, starting from an empty vessel.
    pub fn simulate(&self, trace: &RainTrace) -> Result<SimulationRun> {
        if trace.is_empty() {
            return Err(Error::InvalidTrace("trace has no steps".into()));
        }
        let initial = VesselState::empty(trace.start());
        let dt = trace.step_secs() as f64;
        let mut states = Vec::with_capacity(trace.len());
        let mut events = Vec::new();
        let mut state = initial;
        for &intensity in trace.intensities() {
            let (next, fired) = self.step(&state, intensity, dt);
            events.extend(fired);
            states.push(next);
            state = next;
        }
        Ok(SimulationRun {
            initial,
            states,
            events,
        })
    }

    /// Inflow minus (retained + drained + overflow), relative to inflow.
    pub fn conservation_residual(&self, trace: &RainTrace, run: &SimulationRun) -> f64 {
        let inflow = trace.inflow_volume(self.catch_area_cm2);
        let last = run.final_state();
        let accounted = last.level_cm * self.geometry.meas_cross_section()
            + last.cumulative_drained_cm3
            + last.overflow_cm3;
        if inflow == 0.0 {
            accounted
        } else {
            (inflow - accounted) / inflow
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use chrono::NaiveDate;
    use proptest::prelude::*;

    fn t0() -> NaiveDateTime {
        NaiveDate::from_ymd_opt(2024, 1, 1)
            .unwrap()
            .and_hms_opt(20, 45, 0)
            .unwrap()
    }

    fn field_reference() -> Vec<f64> {
        vec![0.041, 0.12, 0.23, 0.12, 0.1, 0.14, 0.12, 0.1, 0.061, 0.02, 0.0, 0.0]
    }

    #[test]
    fn no_rain_leaves_state_unchanged() {
        let m = VesselModel::new(GaugeGeometry::siphon());
        let mut s = VesselState::empty(t0());
        s.level_cm = 12.3;
        let (next, events) = m.step(&s, 0.0, 600.0);
        assert_eq!(next.level_cm, 12.3);
        assert_eq!(next.cumulative_drained_cm3, 0.0);
        assert!(events.is_empty());
    }

    #[test]
    fn crossing_trigger_drains_whole_vessel() {
        let g = GaugeGeometry::siphon();
        let m = VesselModel::new(g);
        let trigger = g.siphon_trigger_cm().unwrap();
        let mut s = VesselState::empty(t0());
        // just below, then exactly enough rain to land on the trigger
        s.level_cm = trigger - 0.1;
        let amp = m.catch_area_cm2 / g.meas_cross_section();
        let mm_per_hr = 0.1 / amp * MM_PER_CM * 60.0;
        let (next, events) = m.step(&s, mm_per_hr, 60.0);
        assert_eq!(events.len(), 1);
        let expected = std::f64::consts::PI * 3.25 * 3.25 * trigger;
        assert_relative_eq!(events[0].volume_released_cm3, expected, max_relative = 1e-12);
        assert!(next.level_cm.abs() < 1e-9);
    }

    #[test]
    fn one_hour_of_one_mm_raises_v1_by_amplification() {
        let m = VesselModel::new(GaugeGeometry::v1());
        let (next, _) = m.step(&VesselState::empty(t0()), 1.0, 3600.0);
        assert_relative_eq!(next.level_cm, 0.510, epsilon = 5e-4);
    }

    #[test]
    fn zero_trace_is_flat() {
        let m = VesselModel::new(GaugeGeometry::siphon());
        let trace = RainTrace::constant(t0(), 60, 0.0, 3).unwrap();
        let run = m.simulate(&trace).unwrap();
        assert_eq!(run.states.len(), 180);
        assert!(run.states.iter().all(|s| s.level_cm == 0.0));
        assert!(run.events.is_empty());
    }

    #[test]
    fn field_replay_on_v1_is_monotone() {
        let m = VesselModel::new(GaugeGeometry::v1());
        let trace = RainTrace::new(t0(), 3600, field_reference()).unwrap();
        let run = m.simulate(&trace).unwrap();
        assert_eq!(run.states.len(), 12);
        assert!(run.states.windows(2).all(|w| w[1].level_cm >= w[0].level_cm));
        assert!(run.events.is_empty());
        // 1.052 mm · 5.1003 / 10
        assert_relative_eq!(run.final_state().level_cm, 0.536_5, epsilon = 1e-4);
    }

    #[test]
    fn twice_the_trigger_volume_fires_twice() {
        let g = GaugeGeometry::siphon();
        let m = VesselModel::new(g);
        let trigger_volume = g.trigger_volume().unwrap();
        // 2 · V_trigger spread over 10 one-hour steps
        let total_mm = 2.0 * trigger_volume / m.catch_area_cm2 * MM_PER_CM;
        let trace = RainTrace::new(t0(), 3600, vec![total_mm / 10.0; 10]).unwrap();
        let run = m.simulate(&trace).unwrap();
        assert_eq!(run.events.len(), 2);
        assert!(m.conservation_residual(&trace, &run).abs() < 1e-9);
    }

    #[test]
    fn v1_overflow_is_counted() {
        let m = VesselModel::new(GaugeGeometry::v1());
        let trace = RainTrace::new(t0(), 3600, vec![100.0; 3]).unwrap();
        let run = m.simulate(&trace).unwrap();
        let last = run.final_state();
        assert_eq!(last.level_cm, 89.0);
        assert!(last.overflow_cm3 > 0.0);
        assert!(m.conservation_residual(&trace, &run).abs() < 1e-12);
    }

    #[test]
    fn huge_step_can_fire_repeatedly() {
        let m = VesselModel::new(GaugeGeometry::siphon());
        let (next, events) = m.step(&VesselState::empty(t0()), 1000.0, 3600.0);
        // 100 cm of rain · 30.14 ≈ 3013 cm of level, trigger 84.55
        assert_eq!(events.len(), 35);
        assert!(next.level_cm < 84.55);
    }

    #[test]
    fn finite_drain_duration_spreads_release() {
        let g = GaugeGeometry::siphon();
        let m = VesselModel::new(g).with_drain_duration(300.0);
        let mut s = VesselState::empty(t0());
        s.level_cm = g.siphon_trigger_cm().unwrap();
        let (s1, ev) = m.step(&s, 0.0, 60.0);
        assert_eq!(ev.len(), 1);
        assert!(s1.draining);
        let mut s = s1;
        for _ in 0..5 {
            s = m.step(&s, 0.0, 60.0).0;
        }
        assert!(!s.draining);
        assert_eq!(s.level_cm, 0.0);
        assert_relative_eq!(s.cumulative_drained_cm3, g.trigger_volume().unwrap(), max_relative = 1e-9);
    }

    #[test]
    fn empty_trace_rejected() {
        let m = VesselModel::new(GaugeGeometry::v1());
        let trace = RainTrace::new(t0(), 60, vec![]).unwrap();
        assert!(m.simulate(&trace).is_err());
        assert!(RainTrace::new(t0(), 60, vec![-1.0]).is_err());
        assert!(RainTrace::new(t0(), 0, vec![1.0]).is_err());
    }

    #[test]
    fn resample_preserves_totals() {
        let trace = RainTrace::new(t0(), 3600, field_reference()).unwrap();
        let fine = trace.resample(60).unwrap();
        assert_eq!(fine.len(), 720);
        assert_relative_eq!(fine.total_rain_mm(), 1.052, max_relative = 1e-12);
        let hourly = fine.hourly_totals_mm().unwrap();
        for (a, b) in hourly.iter().zip(field_reference()) {
            assert_relative_eq!(*a, b, epsilon = 1e-12);
        }
        assert!(trace.resample(7).is_err());
    }

    fn model() -> impl Strategy<Value = VesselModel> {
        prop_oneof![
            Just(VesselModel::new(GaugeGeometry::v1())),
            Just(VesselModel::new(GaugeGeometry::siphon())),
            (0.0f64..600.0).prop_map(|d| VesselModel::new(GaugeGeometry::siphon()).with_drain_duration(d)),
        ]
    }

    proptest! {
        #[test]
        fn siphon_level_stays_below_trigger(intensities in prop::collection::vec(0.0f64..500.0, 1..200)) {
            let g = GaugeGeometry::siphon();
            let m = VesselModel::new(g);
            let trace = RainTrace::new(t0(), 60, intensities).unwrap();
            let run = m.simulate(&trace).unwrap();
            let trigger = g.siphon_trigger_cm().unwrap();
            prop_assert!(run.states.iter().all(|s| s.level_cm < trigger));
            let tv = g.trigger_volume().unwrap();
            prop_assert!(run.events.iter().all(|e| e.volume_released_cm3 == tv));
        }

        #[test]
        fn drained_and_overflow_never_decrease(m in model(), intensities in prop::collection::vec(0.0f64..3000.0, 1..100)) {
            let trace = RainTrace::new(t0(), 60, intensities).unwrap();
            let run = m.simulate(&trace).unwrap();
            for w in run.states.windows(2) {
                prop_assert!(w[1].cumulative_drained_cm3 >= w[0].cumulative_drained_cm3);
                prop_assert!(w[1].overflow_cm3 >= w[0].overflow_cm3);
            }
            for s in &run.states {
                prop_assert!(s.level_cm >= 0.0 && s.level_cm <= m.geometry.meas_height_cm());
            }
            prop_assert!(m.conservation_residual(&trace, &run).abs() < 1e-6);
        }

        #[test]
        fn simulation_is_deterministic(intensities in prop::collection::vec(0.0f64..300.0, 1..100)) {
            let m = VesselModel::new(GaugeGeometry::siphon());
            let trace = RainTrace::new(t0(), 60, intensities).unwrap();
            prop_assert_eq!(m.simulate(&trace).unwrap(), m.simulate(&trace).unwrap());
        }
    }
}
