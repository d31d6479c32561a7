//! Firmware-equivalent sampling loop.
//!
//! Once a minute the true vessel level is read through the sensor chain and
//! converted to a stored volume. Each hour the endpoint difference of the
//! stored volume, plus whatever the siphon released in between, becomes the
//! hourly rainfall.

use chrono::NaiveDateTime;

use crate::error::{Error, Result};
use crate::geometry::{GaugeGeometry, MM_PER_CM};
use crate::sensor_chain::{self, DividerCircuit, SensorCalibration};
use crate::vessel_sim::{RainTrace, SimulationRun, VesselModel};

pub const SAMPLE_INTERVAL_SECS: u32 = 60;
pub const SAMPLES_PER_HOUR: usize = 60;
/// Records in one hourly window, both endpoints included.
pub const WINDOW_LEN: usize = SAMPLES_PER_HOUR + 1;
pub const DEFAULT_DRAIN_THRESHOLD: f64 = 0.5;

/// One minute-sample through the full chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TelemetryRecord {
    pub time: NaiveDateTime,
    pub adc_code: u32,
    pub voltage: f64,
    pub resistance_ohms: f64,
    pub depth_cm: f64,
    pub volume_cm3: f64,
    pub drain_detected: bool,
    /// ADC read full scale; depth and volume are carried forward.
    pub bad: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HourlyReading {
    /// End of the hour.
    pub time: NaiveDateTime,
    pub rainfall_mm: f64,
}

/// How the true level is turned into a reading.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Sensing {
    /// Quantized sensor, divider and ADC.
    #[default]
    Chain,
    /// True depth passes straight through; electrical fields are still
    /// filled in for display.
    Ideal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorModel {
    pub calibration: SensorCalibration,
    pub circuit: DividerCircuit,
    pub sensing: Sensing,
}

impl Default for SensorModel {
    fn default() -> Self {
        Self {
            calibration: SensorCalibration::synthetic_89(),
            circuit: DividerCircuit::default(),
            sensing: Sensing::Chain,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    pub geometry: GaugeGeometry,
    pub catch_area_cm2: f64,
    pub sensor: SensorModel,
    pub drain_threshold_fraction: f64,
    pub drain_duration_secs: f64,
}

impl PipelineConfig {
    pub fn new(geometry: GaugeGeometry) -> Self {
        Self {
            geometry,
            catch_area_cm2: geometry.effective_catch_area(),
            sensor: SensorModel::default(),
            drain_threshold_fraction: DEFAULT_DRAIN_THRESHOLD,
            drain_duration_secs: 0.0,
        }
    }

    pub fn with_sensor(mut self, sensor: SensorModel) -> Self {
        self.sensor = sensor;
        self
    }

    pub fn with_sensing(mut self, sensing: Sensing) -> Self {
        self.sensor.sensing = sensing;
        self
    }

    pub fn vessel_model(&self) -> VesselModel {
        VesselModel::new(self.geometry)
            .with_catch_area(self.catch_area_cm2)
            .with_drain_duration(self.drain_duration_secs)
    }

    /// Rain resolution (mm) of this gauge with its sensor step.
    pub fn resolution_mm(&self) -> Result<f64> {
        crate::geometry::rain_resolution(
            &self.geometry,
            self.sensor.calibration.depth_step_cm,
            self.catch_area_cm2,
        )
    }

    /// Worst-case ADC contribution to one reading, as rain depth (mm).
    pub fn adc_error_mm(&self) -> f64 {
        let eps_cm = sensor_chain::adc_depth_error_bound(&self.sensor.calibration, &self.sensor.circuit);
        eps_cm * self.geometry.meas_cross_section() / self.catch_area_cm2 * MM_PER_CM
    }

    fn validate(&self) -> Result<()> {
        if !(self.drain_threshold_fraction > 0.0 && self.drain_threshold_fraction < 1.0) {
            return Err(Error::Config(format!(
                "drain threshold fraction {} must lie in (0, 1)",
                self.drain_threshold_fraction
            )));
        }
        crate::error::ensure_positive("catch_area_cm2", self.catch_area_cm2)
    }
}

/// Reads the vessel at `true_depth_cm`.
///
/// A full-scale ADC code marks the record bad; its depth and volume are NaN
/// until [`run`] carries the last good values forward.
pub fn sample(
    true_depth_cm: f64,
    time: NaiveDateTime,
    sensor: &SensorModel,
    g: &GaugeGeometry,
) -> TelemetryRecord {
    let cal = &sensor.calibration;
    let circuit = &sensor.circuit;
    let cross = g.meas_cross_section();
    let volume = |depth: f64| cross * depth.min(g.meas_height_cm());

    match sensor.sensing {
        Sensing::Ideal => {
            let r = (true_depth_cm - cal.intercept_cm) / cal.slope_cm_per_ohm;
            let v = sensor_chain::divider_voltage(r, circuit);
            TelemetryRecord {
                time,
                adc_code: sensor_chain::adc_encode(v, circuit),
                voltage: v,
                resistance_ohms: r,
                depth_cm: true_depth_cm,
                volume_cm3: volume(true_depth_cm),
                drain_detected: false,
                bad: false,
            }
        }
        Sensing::Chain => {
            // a fully submerged sensor reads its top segment
            let wetted = sensor_chain::quantize_depth(true_depth_cm.clamp(0.0, cal.max_depth_cm), cal);
            let r_true = (wetted - cal.intercept_cm) / cal.slope_cm_per_ohm;
            let code = sensor_chain::adc_encode(sensor_chain::divider_voltage(r_true, circuit), circuit);
            let voltage = sensor_chain::voltage_from_code(code, circuit);
            let reading = if code == circuit.full_scale() {
                None
            } else {
                sensor_chain::resistance_from_code(code, circuit).ok()
            };
            match reading {
                Some(r) => {
                    let depth = sensor_chain::depth_from_resistance(r, cal);
                    TelemetryRecord {
                        time,
                        adc_code: code,
                        voltage,
                        resistance_ohms: r,
                        depth_cm: depth,
                        volume_cm3: volume(depth),
                        drain_detected: false,
                        bad: false,
                    }
                }
                None => TelemetryRecord {
                    time,
                    adc_code: code,
                    voltage,
                    resistance_ohms: f64::INFINITY,
                    depth_cm: f64::NAN,
                    volume_cm3: f64::NAN,
                    drain_detected: false,
                    bad: true,
                },
            }
        }
    }
}

/// Recognises a siphon firing between two consecutive samples.
///
/// A drop larger than `threshold_fraction` of the trigger volume cannot be
/// quantization noise. The reported release is the full trigger volume.
pub fn detect_drain(
    prev_volume_cm3: f64,
    cur_volume_cm3: f64,
    threshold_fraction: f64,
    trigger_volume_cm3: f64,
) -> Option<f64> {
    (cur_volume_cm3 - prev_volume_cm3 < -threshold_fraction * trigger_volume_cm3).then_some(trigger_volume_cm3)
}

/// Sliding-difference rainfall over one 61-record window.
///
/// `drains_cm3` are the volumes released by siphon events detected inside
/// the window.
pub fn hourly_rainfall(window: &[TelemetryRecord], catch_area_cm2: f64, drains_cm3: &[f64]) -> Result<HourlyReading> {
    if window.len() != WINDOW_LEN {
        return Err(Error::Window(format!(
            "expected {WINDOW_LEN} records, got {}",
            window.len()
        )));
    }
    for pair in window.windows(2) {
        let gap = (pair[1].time - pair[0].time).num_seconds();
        if gap != SAMPLE_INTERVAL_SECS as i64 {
            return Err(Error::Window(format!(
                "records at {} and {} are {gap} s apart",
                pair[0].time, pair[1].time
            )));
        }
    }
    let first = &window[0];
    let last = &window[WINDOW_LEN - 1];
    let released: f64 = drains_cm3.iter().sum();
    let gained = (last.volume_cm3 - first.volume_cm3 + released).max(0.0);
    Ok(HourlyReading {
        time: last.time,
        rainfall_mm: gained / catch_area_cm2 * MM_PER_CM,
    })
}

/// Everything one pipeline run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineRun {
    /// One record per minute, including the initial reading at the trace start.
    pub telemetry: Vec<TelemetryRecord>,
    /// Volume credited to a detected drain at each record, if any.
    pub drains_cm3: Vec<Option<f64>>,
    pub hourly: Vec<HourlyReading>,
    /// Ground-truth vessel simulation the readings were taken from.
    pub truth: SimulationRun,
}

impl PipelineRun {
    pub fn total_rain_mm(&self) -> f64 {
        self.hourly.iter().map(|h| h.rainfall_mm).sum()
    }
}

/// Couples the vessel simulation to the sensor chain at one sample a minute.
pub fn run(trace: &RainTrace, config: &PipelineConfig) -> Result<PipelineRun> {
    config.validate()?;
    let fine = trace.resample(SAMPLE_INTERVAL_SECS)?;
    let truth = config.vessel_model().simulate(&fine)?;
    let g = &config.geometry;
    let cross = g.meas_cross_section();
    let trigger_volume = g.trigger_volume();

    let levels = std::iter::once(&truth.initial).chain(truth.states.iter());
    let mut telemetry = Vec::with_capacity(truth.states.len() + 1);
    let mut drains = Vec::with_capacity(truth.states.len() + 1);
    let mut last_good_depth = 0.0;

    for state in levels {
        let mut rec = sample(state.level_cm, state.time, &config.sensor, g);
        if rec.bad {
            rec.depth_cm = last_good_depth;
            rec.volume_cm3 = cross * last_good_depth;
        } else {
            last_good_depth = rec.depth_cm;
        }
        let drained = match (telemetry.last(), trigger_volume) {
            (Some(prev), Some(tv)) => {
                let prev: &TelemetryRecord = prev;
                detect_drain(prev.volume_cm3, rec.volume_cm3, config.drain_threshold_fraction, tv)
            }
            _ => None,
        };
        rec.drain_detected = drained.is_some();
        telemetry.push(rec);
        drains.push(drained);
    }

    let hours = (telemetry.len() - 1) / SAMPLES_PER_HOUR;
    let mut hourly = Vec::with_capacity(hours);
    for h in 0..hours {
        let lo = h * SAMPLES_PER_HOUR;
        let hi = lo + SAMPLES_PER_HOUR;
        let released: Vec<f64> = drains[lo + 1..=hi].iter().flatten().copied().collect();
        hourly.push(hourly_rainfall(&telemetry[lo..=hi], config.catch_area_cm2, &released)?);
    }

    Ok(PipelineRun {
        telemetry,
        drains_cm3: drains,
        hourly,
        truth,
    })
}
