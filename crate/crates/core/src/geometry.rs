//! Vessel geometry and the area/volume arithmetic behind the gauge's
//! resolution.
//!
//! Lengths are centimetres, areas cm², volumes cm³. Rainfall depths leave
//! this module in millimetres.

use std::f64::consts::PI;

use crate::error::{ensure_positive, Error, Result};

/// Millimetres per centimetre.
pub const MM_PER_CM: f64 = 10.0;

/// Nominal catchment area of the standard large funnel.
pub const NOMINAL_CATCH_AREA_CM2: f64 = 1000.0;

/// Fraction of the vessel height at which the default siphon fires.
pub const DEFAULT_TRIGGER_FRACTION: f64 = 0.95;

/// Collection funnel plus measurement vessel, optionally fitted with a
/// Pythagorean-cup siphon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaugeGeometry {
    catch_radius_cm: f64,
    catch_area_cm2: Option<f64>,
    meas_radius_cm: f64,
    meas_height_cm: f64,
    siphon_trigger_cm: Option<f64>,
}

impl GaugeGeometry {
    pub fn new(
        catch_radius_cm: f64,
        meas_radius_cm: f64,
        meas_height_cm: f64,
        siphon_trigger_cm: Option<f64>,
    ) -> Result<Self> {
        ensure_positive("catch_radius_cm", catch_radius_cm)?;
        ensure_positive("meas_radius_cm", meas_radius_cm)?;
        ensure_positive("meas_height_cm", meas_height_cm)?;
        if catch_radius_cm < meas_radius_cm {
            return Err(Error::InvalidGeometry(format!(
                "catch radius {catch_radius_cm} cm is smaller than measurement radius {meas_radius_cm} cm"
            )));
        }
        if let Some(trigger) = siphon_trigger_cm {
            if !(trigger > 0.0 && trigger <= meas_height_cm) {
                return Err(Error::InvalidGeometry(format!(
                    "siphon trigger {trigger} cm must lie in (0, {meas_height_cm}]"
                )));
            }
        }
        Ok(Self {
            catch_radius_cm,
            catch_area_cm2: None,
            meas_radius_cm,
            meas_height_cm,
            siphon_trigger_cm,
        })
    }

    /// Pins the catchment area to a nominal value instead of π r².
    pub fn with_catch_area(mut self, area_cm2: f64) -> Result<Self> {
        ensure_positive("catch_area_cm2", area_cm2)?;
        if area_cm2 < self.meas_cross_section() {
            return Err(Error::InvalidGeometry(format!(
                "catch area {area_cm2} cm² is smaller than the measurement cross-section"
            )));
        }
        self.catch_area_cm2 = Some(area_cm2);
        Ok(self)
    }

    /// First-iteration gauge: 7.9 cm vessel, no siphon, nominal 1000 cm² funnel.
    pub fn v1() -> Self {
        Self::new(17.8, 7.9, 89.0, None)
            .and_then(|g| g.with_catch_area(NOMINAL_CATCH_AREA_CM2))
            .expect("v1 preset is valid")
    }

    /// Final iteration: 3.25 cm vessel draining through a siphon near the top.
    pub fn siphon() -> Self {
        Self::new(17.8, 3.25, 89.0, Some(DEFAULT_TRIGGER_FRACTION * 89.0))
            .and_then(|g| g.with_catch_area(NOMINAL_CATCH_AREA_CM2))
            .expect("siphon preset is valid")
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "v1" => Ok(Self::v1()),
            "siphon" => Ok(Self::siphon()),
            other => Err(Error::UnknownPreset(other.to_string())),
        }
    }

    pub fn catch_radius_cm(&self) -> f64 {
        self.catch_radius_cm
    }

    pub fn meas_radius_cm(&self) -> f64 {
        self.meas_radius_cm
    }

    pub fn meas_height_cm(&self) -> f64 {
        self.meas_height_cm
    }

    pub fn siphon_trigger_cm(&self) -> Option<f64> {
        self.siphon_trigger_cm
    }

    /// The explicit nominal area if one was set, otherwise π r².
    pub fn effective_catch_area(&self) -> f64 {
        self.catch_area_cm2.unwrap_or_else(|| catchment_area(self))
    }

    /// Horizontal cross-section of the measurement vessel in cm².
    pub fn meas_cross_section(&self) -> f64 {
        PI * self.meas_radius_cm * self.meas_radius_cm
    }

    /// Volume held when the siphon fires, if one is fitted.
    pub fn trigger_volume(&self) -> Option<f64> {
        self.siphon_trigger_cm
            .map(|h| self.meas_cross_section() * h)
    }
}

/// π · catch_radius², ignoring any nominal override.
pub fn catchment_area(g: &GaugeGeometry) -> f64 {
    PI * g.catch_radius_cm * g.catch_radius_cm
}

/// Water volume in the measurement vessel at `depth_cm`.
pub fn volume_from_depth(g: &GaugeGeometry, depth_cm: f64) -> Result<f64> {
    if !(0.0..=g.meas_height_cm).contains(&depth_cm) {
        return Err(Error::OutOfRange {
            what: "depth_cm",
            value: depth_cm,
            min: 0.0,
            max: g.meas_height_cm,
        });
    }
    Ok(g.meas_cross_section() * depth_cm)
}

/// Smallest detectable rainfall (mm): the vessel volume of one depth step
/// spread over the catchment.
pub fn rain_resolution(g: &GaugeGeometry, depth_step_cm: f64, catch_area_cm2: f64) -> Result<f64> {
    ensure_positive("depth_step_cm", depth_step_cm)?;
    ensure_positive("catch_area_cm2", catch_area_cm2)?;
    // Not routed through volume_from_depth: the step may exceed the vessel
    // height in hypothetical what-if calls.
    Ok(g.meas_cross_section() * depth_step_cm / catch_area_cm2 * MM_PER_CM)
}

/// Funnel concentration factor: vessel level rise per unit of rain depth.
pub fn depth_amplification(g: &GaugeGeometry, catch_area_cm2: f64) -> f64 {
    catch_area_cm2 / g.meas_cross_section()
}
