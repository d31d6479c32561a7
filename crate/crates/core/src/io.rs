//! CSV formats for traces, level series, telemetry, hourly readings and
//! calibration samples.
//!
//! Timestamps are ISO 8601 local times without offset
//! (`2024-01-01T21:45:00`). Numeric columns use fixed precision so that
//! repeated runs produce byte-identical files.

use std::io::{Read, Write};

use chrono::NaiveDateTime;
use csv::{ReaderBuilder, StringRecord, WriterBuilder};

use crate::calibration_fit::CalibrationSample;
use crate::error::{Error, Result};
use crate::pipeline::{HourlyReading, TelemetryRecord, SAMPLE_INTERVAL_SECS};
use crate::vessel_sim::{DrainEvent, RainTrace, SimulationRun};

pub const TIME_FORMAT: &str = "%Y-%m-%dT%H:%M:%S";

pub const TRACE_HEADER: [&str; 2] = ["time_iso8601", "intensity_mm_per_hr"];
pub const LEVEL_HEADER: [&str; 4] = ["time_iso8601", "level_cm", "drained_cm3_cumulative", "event"];
pub const DRAIN_HEADER: [&str; 2] = ["time_iso8601", "volume_released_cm3"];
pub const TELEMETRY_HEADER: [&str; 8] = [
    "time_iso8601",
    "adc_code",
    "voltage_v",
    "resistance_ohm",
    "depth_cm",
    "volume_cm3",
    "drain",
    "bad",
];
pub const HOURLY_HEADER: [&str; 2] = ["time_iso8601", "rain_mm"];
pub const SAMPLES_HEADER: [&str; 2] = ["resistance_ohm", "depth_cm"];

const FIELD_REFERENCE: &str = include_str!("../data/field_reference.csv");
const FIELD_GAUGE: &str = include_str!("../data/field_gauge.csv");
const FIELD_TRACE: &str = include_str!("../data/field_trace.csv");

pub fn format_time(t: NaiveDateTime) -> String {
    t.format(TIME_FORMAT).to_string()
}

pub fn parse_time(s: &str) -> std::result::Result<NaiveDateTime, chrono::ParseError> {
    NaiveDateTime::parse_from_str(s.trim(), TIME_FORMAT)
}

/// Reads every data row after checking the header.
fn read_rows<R: Read>(reader: R, header: &[&str]) -> Result<Vec<(usize, StringRecord)>> {
    let mut rdr = ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let found = rdr.headers()?.clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(Error::Parse {
            line: 1,
            msg: format!("expected header {:?}, found {:?}", header.join(","), found.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != header.len() {
            return Err(Error::Parse {
                line: i + 2,
                msg: format!("expected {} fields, found {}", header.len(), rec.len()),
            });
        }
        rows.push((i + 2, rec));
    }
    Ok(rows)
}

fn field_time(line: usize, rec: &StringRecord, idx: usize) -> Result<NaiveDateTime> {
    parse_time(&rec[idx]).map_err(|e| Error::Parse {
        line,
        msg: format!("bad timestamp {:?}: {e}", &rec[idx]),
    })
}

fn field<T: std::str::FromStr>(line: usize, rec: &StringRecord, idx: usize) -> Result<T> {
    rec[idx].parse().map_err(|_| Error::Parse {
        line,
        msg: format!("bad value {:?} in column {}", &rec[idx], idx + 1),
    })
}

fn field_flag(line: usize, rec: &StringRecord, idx: usize) -> Result<bool> {
    match &rec[idx] {
        "0" => Ok(false),
        "1" => Ok(true),
        other => Err(Error::Parse {
            line,
            msg: format!("flag must be 0 or 1, got {other:?}"),
        }),
    }
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    WriterBuilder::new().has_headers(false).from_writer(w)
}

/// Reads an evenly spaced trace. The step is inferred from the timestamps;
/// a single-row trace uses the one-minute sampling step.
pub fn read_trace<R: Read>(reader: R) -> Result<RainTrace> {
    let rows = read_rows(reader, &TRACE_HEADER)?;
    if rows.is_empty() {
        return Err(Error::InvalidTrace("trace has no rows".into()));
    }
    let mut times = Vec::with_capacity(rows.len());
    let mut intensities = Vec::with_capacity(rows.len());
    for (line, rec) in &rows {
        times.push(field_time(*line, rec, 0)?);
        intensities.push(field::<f64>(*line, rec, 1)?);
    }
    let step = match times.get(1) {
        Some(t1) => (*t1 - times[0]).num_seconds(),
        None => SAMPLE_INTERVAL_SECS as i64,
    };
    if step <= 0 || step > u32::MAX as i64 {
        return Err(Error::InvalidTrace(format!("non-increasing timestamps (step {step} s)")));
    }
    for (i, pair) in times.windows(2).enumerate() {
        if (pair[1] - pair[0]).num_seconds() != step {
            return Err(Error::Parse {
                line: rows[i + 1].0,
                msg: format!("uneven spacing: expected {step} s between rows"),
            });
        }
    }
    RainTrace::new(times[0], step as u32, intensities)
}

pub fn write_trace<W: Write>(w: W, trace: &RainTrace) -> Result<()> {
    let mut wtr = writer(w);
    wtr.write_record(TRACE_HEADER)?;
    for (i, v) in trace.intensities().iter().enumerate() {
        wtr.write_record([format_time(trace.time_at(i)), format!("{v:.3}")])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Level series: the initial state, then one row per step. `event` counts
/// the drains that fired in the step ending at that row.
pub fn write_level_series<W: Write>(w: W, run: &SimulationRun) -> Result<()> {
    let mut wtr = writer(w);
    wtr.write_record(LEVEL_HEADER)?;
    let mut events = run.events.iter().peekable();
    for (i, s) in std::iter::once(&run.initial).chain(&run.states).enumerate() {
        let mut fired = 0usize;
        if i > 0 {
            while events.next_if(|e| e.time == s.time).is_some() {
                fired += 1;
            }
        }
        wtr.write_record([
            format_time(s.time),
            format!("{:.4}", s.level_cm),
            format!("{:.2}", s.cumulative_drained_cm3),
            fired.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_drain_events<W: Write>(w: W, events: &[DrainEvent]) -> Result<()> {
    let mut wtr = writer(w);
    wtr.write_record(DRAIN_HEADER)?;
    for e in events {
        wtr.write_record([format_time(e.time), format!("{:.2}", e.volume_released_cm3)])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_telemetry<W: Write>(w: W, records: &[TelemetryRecord]) -> Result<()> {
    let mut wtr = writer(w);
    wtr.write_record(TELEMETRY_HEADER)?;
    for r in records {
        wtr.write_record([
            format_time(r.time),
            r.adc_code.to_string(),
            format!("{:.4}", r.voltage),
            format!("{:.2}", r.resistance_ohms),
            format!("{:.4}", r.depth_cm),
            format!("{:.2}", r.volume_cm3),
            u8::from(r.drain_detected).to_string(),
            u8::from(r.bad).to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_telemetry<R: Read>(reader: R) -> Result<Vec<TelemetryRecord>> {
    read_rows(reader, &TELEMETRY_HEADER)?
        .into_iter()
        .map(|(line, rec)| {
            Ok(TelemetryRecord {
                time: field_time(line, &rec, 0)?,
                adc_code: field(line, &rec, 1)?,
                voltage: field(line, &rec, 2)?,
                resistance_ohms: field(line, &rec, 3)?,
                depth_cm: field(line, &rec, 4)?,
                volume_cm3: field(line, &rec, 5)?,
                drain_detected: field_flag(line, &rec, 6)?,
                bad: field_flag(line, &rec, 7)?,
            })
        })
        .collect()
}

pub fn write_hourly<W: Write>(w: W, readings: &[HourlyReading]) -> Result<()> {
    let mut wtr = writer(w);
    wtr.write_record(HOURLY_HEADER)?;
    for h in readings {
        wtr.write_record([format_time(h.time), format!("{:.3}", h.rainfall_mm)])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_hourly<R: Read>(reader: R) -> Result<Vec<HourlyReading>> {
    read_rows(reader, &HOURLY_HEADER)?
        .into_iter()
        .map(|(line, rec)| {
            let rainfall_mm: f64 = field(line, &rec, 1)?;
            if rainfall_mm.is_nan() || rainfall_mm < 0.0 {
                return Err(Error::Parse {
                    line,
                    msg: format!("negative rainfall {rainfall_mm}"),
                });
            }
            Ok(HourlyReading {
                time: field_time(line, &rec, 0)?,
                rainfall_mm,
            })
        })
        .collect()
}

pub fn read_calibration_samples<R: Read>(reader: R) -> Result<Vec<CalibrationSample>> {
    read_rows(reader, &SAMPLES_HEADER)?
        .into_iter()
        .map(|(line, rec)| {
            let s = CalibrationSample::new(field(line, &rec, 0)?, field(line, &rec, 1)?);
            if s.resistance_ohms < 0.0 || s.depth_cm < 0.0 {
                return Err(Error::Parse {
                    line,
                    msg: "resistance and depth must be non-negative".into(),
                });
            }
            Ok(s)
        })
        .collect()
}

pub fn write_calibration_samples<W: Write>(w: W, samples: &[CalibrationSample]) -> Result<()> {
    let mut wtr = writer(w);
    wtr.write_record(SAMPLES_HEADER)?;
    for s in samples {
        wtr.write_record([format!("{:.3}", s.resistance_ohms), format!("{:.4}", s.depth_cm)])?;
    }
    wtr.flush()?;
    Ok(())
}

/// The field comparison data: reference tipping-bucket gauge first, the
/// resistive gauge second. Hour "24:45" is stored as 00:45 the next day.
pub fn field_test() -> (Vec<HourlyReading>, Vec<HourlyReading>) {
    let reference = read_hourly(FIELD_REFERENCE.as_bytes()).expect("bundled table is valid");
    let gauge = read_hourly(FIELD_GAUGE.as_bytes()).expect("bundled table is valid");
    (reference, gauge)
}

/// Hourly trace whose ground-truth hourly totals equal the reference
/// column of [`field_test`].
pub fn field_trace() -> RainTrace {
    read_trace(FIELD_TRACE.as_bytes()).expect("bundled trace is valid")
}

pub fn field_reference_csv() -> &'static str {
    FIELD_REFERENCE
}

pub fn field_gauge_csv() -> &'static str {
    FIELD_GAUGE
}

pub fn field_trace_csv() -> &'static str {
    FIELD_TRACE
}

pub fn rain_values(readings: &[HourlyReading]) -> Vec<f64> {
    readings.iter().map(|h| h.rainfall_mm).collect()
}
