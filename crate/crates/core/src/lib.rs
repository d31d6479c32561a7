//! Digital twin of a static siphon rain gauge.
//!
//! Rain falls through a funnel into a narrow measurement vessel. A resistive
//! level sensor, read through a voltage divider and ADC once a minute, tracks
//! the stored volume; the hourly change in volume (plus any siphon drains)
//! is the hourly rainfall. The crate covers:
//!
//! - [`geometry`]: vessel dimensions, volumes and rain resolution
//! - [`vessel_sim`]: water level over time, including siphon drains
//! - [`sensor_chain`]: level sensor, divider and ADC, forward and inverse
//! - [`pipeline`]: the minute-sampling loop and hourly sliding difference
//! - [`calibration_fit`]: least-squares sensor line from bench readings
//! - [`stats`]: two-device t-test comparison
//! - [`config`] and [`io`]: presets, config files and CSV formats

pub mod calibration_fit;
pub mod config;
pub mod error;
pub mod geometry;
pub mod io;
pub mod pipeline;
pub mod sensor_chain;
pub mod stats;
pub mod vessel_sim;

pub use calibration_fit::{fit_line, CalibrationSample, LineFit};
pub use config::ConfigFile;
pub use error::{Error, Result};
pub use geometry::GaugeGeometry;
pub use pipeline::{HourlyReading, PipelineConfig, PipelineRun, Sensing, SensorModel, TelemetryRecord};
pub use sensor_chain::{DividerCircuit, SensorCalibration};
pub use stats::{ComparisonReport, DfMethod, SampleSummary};
pub use vessel_sim::{DrainEvent, RainTrace, SimulationRun, VesselModel, VesselState};
