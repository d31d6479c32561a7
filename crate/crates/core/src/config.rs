//! Key-value configuration files.
//!
//! A config names a geometry preset and a calibration preset, then
//! overrides individual values:
//!
//! ```toml
//! preset = "siphon"
//! calibration = "bench-21"
//! meas_radius_cm = 3.0
//! siphon_trigger_cm = 80.0   # 0 removes the siphon
//! known_ohm = 4700
//! adc_bits = 12
//! sensing = "ideal"
//! ```

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::geometry::GaugeGeometry;
use crate::pipeline::{PipelineConfig, Sensing, SensorModel, DEFAULT_DRAIN_THRESHOLD};
use crate::sensor_chain::{DividerCircuit, SensorCalibration};

pub const DEFAULT_GEOMETRY_PRESET: &str = "v1";
pub const DEFAULT_CALIBRATION_PRESET: &str = "synthetic-89";

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub preset: Option<String>,
    pub calibration: Option<String>,

    pub catch_radius_cm: Option<f64>,
    pub catch_area_cm2: Option<f64>,
    pub meas_radius_cm: Option<f64>,
    pub meas_height_cm: Option<f64>,
    pub siphon_trigger_cm: Option<f64>,

    pub slope_cm_per_ohm: Option<f64>,
    pub intercept_cm: Option<f64>,
    pub depth_step_cm: Option<f64>,
    pub max_depth_cm: Option<f64>,

    pub supply_v: Option<f64>,
    pub known_ohm: Option<f64>,
    pub adc_bits: Option<u32>,
    pub adc_ref_v: Option<f64>,

    pub sensing: Option<String>,
    pub drain_threshold_fraction: Option<f64>,
    pub drain_duration_s: Option<f64>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Resolves presets and overrides into a validated gauge geometry.
    pub fn geometry(&self, preset_override: Option<&str>) -> Result<GaugeGeometry> {
        let name = preset_override
            .or(self.preset.as_deref())
            .unwrap_or(DEFAULT_GEOMETRY_PRESET);
        let base = GaugeGeometry::preset(name)?;
        let trigger = match self.siphon_trigger_cm {
            Some(t) if t <= 0.0 => None,
            Some(t) => Some(t),
            None => base.siphon_trigger_cm(),
        };
        let g = GaugeGeometry::new(
            self.catch_radius_cm.unwrap_or(base.catch_radius_cm()),
            self.meas_radius_cm.unwrap_or(base.meas_radius_cm()),
            self.meas_height_cm.unwrap_or(base.meas_height_cm()),
            trigger,
        )?;
        // an explicit radius without an explicit area means "use π r²"
        let area = match (self.catch_area_cm2, self.catch_radius_cm) {
            (Some(a), _) => Some(a),
            (None, Some(_)) => None,
            (None, None) => Some(base.effective_catch_area()),
        };
        match area {
            Some(a) => g.with_catch_area(a),
            None => Ok(g),
        }
    }

    pub fn calibration(&self) -> Result<SensorCalibration> {
        let base = SensorCalibration::preset(self.calibration.as_deref().unwrap_or(DEFAULT_CALIBRATION_PRESET))?;
        SensorCalibration::new(
            self.slope_cm_per_ohm.unwrap_or(base.slope_cm_per_ohm),
            self.intercept_cm.unwrap_or(base.intercept_cm),
            self.depth_step_cm.unwrap_or(base.depth_step_cm),
            self.max_depth_cm.unwrap_or(base.max_depth_cm),
        )
    }

    pub fn circuit(&self) -> Result<DividerCircuit> {
        let base = DividerCircuit::default();
        DividerCircuit::new(
            self.supply_v.unwrap_or(base.supply_volts),
            self.known_ohm.unwrap_or(base.known_ohms),
            self.adc_bits.unwrap_or(base.adc_bits),
            self.adc_ref_v.unwrap_or(base.adc_ref_volts),
        )
    }

    pub fn sensing(&self) -> Result<Sensing> {
        match self.sensing.as_deref() {
            None | Some("chain") => Ok(Sensing::Chain),
            Some("ideal") => Ok(Sensing::Ideal),
            Some(other) => Err(Error::Config(format!(
                "sensing must be \"chain\" or \"ideal\", got {other:?}"
            ))),
        }
    }

    pub fn pipeline(&self, preset_override: Option<&str>) -> Result<PipelineConfig> {
        let geometry = self.geometry(preset_override)?;
        let mut cfg = PipelineConfig::new(geometry).with_sensor(SensorModel {
            calibration: self.calibration()?,
            circuit: self.circuit()?,
            sensing: self.sensing()?,
        });
        cfg.drain_threshold_fraction = self.drain_threshold_fraction.unwrap_or(DEFAULT_DRAIN_THRESHOLD);
        cfg.drain_duration_secs = self.drain_duration_s.unwrap_or(0.0);
        Ok(cfg)
    }
}
