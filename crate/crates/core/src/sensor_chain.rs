//! Resistive level sensor, voltage-divider ohm-meter and ADC.
//!
//! The forward path (depth → resistance → voltage → ADC code) models the
//! hardware; the inverse path (code → resistance → depth) is what the
//! firmware computes.
//!
//! Divider orientation: supply → known resistor → measurement node →
//! sensor → ground, so the node reads `supply · R / (R_known + R)` and a
//! shorted sensor reads 0 V.

use crate::error::{ensure_positive, Error, Result};

// Slack for depth/step ratios that should land exactly on a lattice point.
const LATTICE_EPS: f64 = 1e-9;

/// Linear depth ↔ resistance map of the level sensor plus its depth step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorCalibration {
    pub slope_cm_per_ohm: f64,
    pub intercept_cm: f64,
    pub depth_step_cm: f64,
    pub max_depth_cm: f64,
}

impl SensorCalibration {
    pub fn new(slope_cm_per_ohm: f64, intercept_cm: f64, depth_step_cm: f64, max_depth_cm: f64) -> Result<Self> {
        if slope_cm_per_ohm == 0.0 || !slope_cm_per_ohm.is_finite() {
            return Err(Error::InvalidCalibration("slope must be finite and non-zero".into()));
        }
        ensure_positive("depth_step_cm", depth_step_cm)?;
        ensure_positive("max_depth_cm", max_depth_cm)?;
        let cal = Self {
            slope_cm_per_ohm,
            intercept_cm,
            depth_step_cm,
            max_depth_cm,
        };
        // both ends of the depth span must map to physical resistances
        let (lo, hi) = cal.resistance_span();
        if !(lo >= -1e-9 && hi >= -1e-9) {
            return Err(Error::InvalidCalibration(format!(
                "line maps depth span [0, {max_depth_cm}] cm to negative resistance"
            )));
        }
        Ok(cal)
    }

    /// The multimeter line: depth = −0.004 · R + 21.4, sensor step 0.51 cm.
    pub fn bench_21() -> Self {
        Self::new(-0.004, 21.4, 0.51, 21.4).expect("bench-21 preset is valid")
    }

    /// Self-consistent line covering the full 89 cm sensor: 8900 Ω dry,
    /// 0 Ω fully immersed.
    pub fn synthetic_89() -> Self {
        Self::new(-0.01, 89.0, 0.51, 89.0).expect("synthetic-89 preset is valid")
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "bench-21" => Ok(Self::bench_21()),
            "synthetic-89" => Ok(Self::synthetic_89()),
            other => Err(Error::UnknownPreset(other.to_string())),
        }
    }

    /// Resistances at depth 0 and at max depth, smaller first.
    pub fn resistance_span(&self) -> (f64, f64) {
        let a = (0.0 - self.intercept_cm) / self.slope_cm_per_ohm;
        let b = (self.max_depth_cm - self.intercept_cm) / self.slope_cm_per_ohm;
        (a.min(b), a.max(b))
    }
}

/// Ohm-meter front end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DividerCircuit {
    pub supply_volts: f64,
    pub known_ohms: f64,
    pub adc_bits: u32,
    pub adc_ref_volts: f64,
}

impl DividerCircuit {
    pub fn new(supply_volts: f64, known_ohms: f64, adc_bits: u32, adc_ref_volts: f64) -> Result<Self> {
        ensure_positive("supply_volts", supply_volts)?;
        ensure_positive("known_ohms", known_ohms)?;
        ensure_positive("adc_ref_volts", adc_ref_volts)?;
        if !(1..=32).contains(&adc_bits) {
            return Err(Error::InvalidCircuit(format!("adc_bits {adc_bits} outside 1..=32")));
        }
        Ok(Self {
            supply_volts,
            known_ohms,
            adc_bits,
            adc_ref_volts,
        })
    }

    pub fn full_scale(&self) -> u32 {
        ((1u64 << self.adc_bits) - 1) as u32
    }

    /// Volts per ADC count.
    pub fn lsb_volts(&self) -> f64 {
        self.adc_ref_volts / self.full_scale() as f64
    }

    pub fn with_known_ohms(mut self, known_ohms: f64) -> Self {
        self.known_ohms = known_ohms;
        self
    }

    pub fn with_adc_bits(mut self, adc_bits: u32) -> Self {
        self.adc_bits = adc_bits;
        self
    }
}

impl Default for DividerCircuit {
    /// 5 V microcontroller with a 10-bit ADC and a 4700 Ω known resistor.
    fn default() -> Self {
        Self {
            supply_volts: 5.0,
            known_ohms: 4700.0,
            adc_bits: 10,
            adc_ref_volts: 5.0,
        }
    }
}

pub fn resistance_from_depth(depth_cm: f64, cal: &SensorCalibration) -> Result<f64> {
    if !(0.0..=cal.max_depth_cm).contains(&depth_cm) {
        return Err(Error::OutOfRange {
            what: "depth_cm",
            value: depth_cm,
            min: 0.0,
            max: cal.max_depth_cm,
        });
    }
    Ok((depth_cm - cal.intercept_cm) / cal.slope_cm_per_ohm)
}

/// Snaps down to the last fully wetted sensor segment.
pub fn quantize_depth(depth_cm: f64, cal: &SensorCalibration) -> f64 {
    if depth_cm <= 0.0 {
        return 0.0;
    }
    (depth_cm / cal.depth_step_cm + LATTICE_EPS).floor() * cal.depth_step_cm
}

pub fn divider_voltage(r_unknown_ohms: f64, c: &DividerCircuit) -> f64 {
    let r = r_unknown_ohms.max(0.0);
    c.supply_volts * r / (c.known_ohms + r)
}

pub fn adc_encode(volts: f64, c: &DividerCircuit) -> u32 {
    let fs = c.full_scale() as f64;
    (volts / c.adc_ref_volts * fs).round().clamp(0.0, fs) as u32
}

pub fn voltage_from_code(code: u32, c: &DividerCircuit) -> f64 {
    code as f64 / c.full_scale() as f64 * c.adc_ref_volts
}

/// Ohm's law on the divider: the firmware's resistance estimate.
pub fn resistance_from_code(code: u32, c: &DividerCircuit) -> Result<f64> {
    let fs = c.full_scale();
    if code > fs {
        return Err(Error::OutOfRange {
            what: "adc_code",
            value: code as f64,
            min: 0.0,
            max: fs as f64,
        });
    }
    let v = voltage_from_code(code, c);
    if v >= c.supply_volts {
        return Err(Error::Saturation { code });
    }
    Ok(c.known_ohms * v / (c.supply_volts - v))
}

/// Calibration line, clamped to the sensor's depth span.
pub fn depth_from_resistance(r_ohms: f64, cal: &SensorCalibration) -> f64 {
    (cal.slope_cm_per_ohm * r_ohms + cal.intercept_cm).clamp(0.0, cal.max_depth_cm)
}

/// One reading through the forward and inverse chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SenseResult {
    pub adc_code: u32,
    pub volts: f64,
    pub resistance_ohms: f64,
    pub depth_cm: f64,
}

pub fn sense(true_depth_cm: f64, cal: &SensorCalibration, circuit: &DividerCircuit) -> Result<SenseResult> {
    let wetted = quantize_depth(true_depth_cm, cal);
    let r_true = resistance_from_depth(wetted, cal)?;
    let code = adc_encode(divider_voltage(r_true, circuit), circuit);
    let resistance_ohms = resistance_from_code(code, circuit)?;
    Ok(SenseResult {
        adc_code: code,
        volts: voltage_from_code(code, circuit),
        resistance_ohms,
        depth_cm: depth_from_resistance(resistance_ohms, cal),
    })
}

/// Worst-case depth error (cm) added by ADC rounding over the calibrated
/// span.
///
/// Rounding moves the recovered node voltage by at most half an LSB. The
/// divider inverse `R(v) = K·v/(S − v)` is increasing and convex, so the
/// largest resistance error sits at the top of the span with the voltage
/// pushed upward. That resistance error maps to depth through |slope|.
/// Returns infinity when half an LSB above the top of the span already
/// reaches the supply.
pub fn adc_depth_error_bound(cal: &SensorCalibration, c: &DividerCircuit) -> f64 {
    let (_, r_max) = cal.resistance_span();
    let v_top = divider_voltage(r_max, c);
    let v_hi = (v_top + 0.5 * c.lsb_volts()).min(c.adc_ref_volts);
    if v_hi >= c.supply_volts {
        return f64::INFINITY;
    }
    let r_hi = c.known_ohms * v_hi / (c.supply_volts - v_hi);
    // below the span the downward half-LSB move is the larger one only
    // through clamping, which can only shrink depth error
    cal.slope_cm_per_ohm.abs() * (r_hi - r_max)
}
