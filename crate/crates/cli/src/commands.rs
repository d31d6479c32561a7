//! Subcommand bodies. Each returns the text to print on success.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};

use pluvio_core::config::ConfigFile;
use pluvio_core::geometry::rain_resolution;
use pluvio_core::io;
use pluvio_core::stats::{self, DfMethod};
use pluvio_core::{fit_line, pipeline, RainTrace};

fn load_config(path: Option<&Path>) -> Result<ConfigFile> {
    match path {
        Some(p) => ConfigFile::load(p).with_context(|| format!("reading config {}", p.display())),
        None => Ok(ConfigFile::default()),
    }
}

fn load_trace(path: Option<&Path>) -> Result<RainTrace> {
    match path {
        Some(p) => {
            let f = File::open(p).with_context(|| format!("opening trace {}", p.display()))?;
            io::read_trace(f).with_context(|| format!("reading trace {}", p.display()))
        }
        None => Ok(io::field_trace()),
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

pub fn simulate(preset: Option<&str>, config: Option<&Path>, trace: Option<&Path>, out: &Path) -> Result<String> {
    let cfg = load_config(config)?.pipeline(preset)?;
    let trace = load_trace(trace)?;
    let model = cfg.vessel_model();
    let run = model.simulate(&trace)?;

    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    io::write_level_series(create(out, "level.csv")?, &run)?;
    io::write_drain_events(create(out, "drains.csv")?, &run.events)?;

    let last = run.final_state();
    let mut text = String::new();
    writeln!(text, "steps: {}", run.states.len())?;
    writeln!(text, "drain events: {}", run.events.len())?;
    writeln!(text, "final level: {:.3} cm", last.level_cm)?;
    writeln!(text, "drained: {:.2} cm3", last.cumulative_drained_cm3)?;
    writeln!(text, "overflow: {:.2} cm3", last.overflow_cm3)?;
    writeln!(text, "conservation residual: {:.1e}", model.conservation_residual(&trace, &run))?;
    Ok(text)
}

pub fn run(preset: Option<&str>, config: Option<&Path>, trace: Option<&Path>, out: &Path) -> Result<String> {
    let cfg = load_config(config)?.pipeline(preset)?;
    let trace = load_trace(trace)?;
    let result = pipeline::run(&trace, &cfg)?;

    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    io::write_telemetry(create(out, "telemetry.csv")?, &result.telemetry)?;
    io::write_hourly(create(out, "hourly.csv")?, &result.hourly)?;

    let mut text = String::new();
    writeln!(text, "resolution: {:.3} mm", cfg.resolution_mm()?)?;
    writeln!(text, "samples: {} ({} bad)", result.telemetry.len(), result.telemetry.iter().filter(|r| r.bad).count())?;
    writeln!(text, "drains detected: {}", result.telemetry.iter().filter(|r| r.drain_detected).count())?;
    writeln!(text, "hours: {}", result.hourly.len())?;
    writeln!(text, "total rain: {:.3} mm", result.total_rain_mm())?;
    Ok(text)
}

pub fn compare(files: Option<(&Path, &Path)>, alpha: f64, welch: bool) -> Result<String> {
    let (a, b) = match files {
        Some((pa, pb)) => {
            let read = |p: &Path| -> Result<Vec<pluvio_core::HourlyReading>> {
                let f = File::open(p).with_context(|| format!("opening {}", p.display()))?;
                io::read_hourly(f).with_context(|| format!("reading {}", p.display()))
            };
            (read(pa)?, read(pb)?)
        }
        None => io::field_test(),
    };
    if a.len() != b.len() {
        bail!("hourly files are not aligned: {} vs {} rows", a.len(), b.len());
    }
    if let Some((x, y)) = a.iter().zip(&b).find(|(x, y)| x.time != y.time) {
        bail!("hourly files are not aligned: {} vs {}", io::format_time(x.time), io::format_time(y.time));
    }
    let method = if welch { DfMethod::Welch } else { DfMethod::Pooled };
    let report = stats::compare_with(&io::rain_values(&a), &io::rain_values(&b), alpha, method)?;
    Ok(format!("{report}\n\n{}", report.key_values()))
}

pub fn resolution(preset: Option<&str>, config: Option<&Path>, depth_step: Option<f64>) -> Result<String> {
    let cfg = load_config(config)?.pipeline(preset)?;
    let step = depth_step.unwrap_or(cfg.sensor.calibration.depth_step_cm);
    let mm = rain_resolution(&cfg.geometry, step, cfg.catch_area_cm2)?;
    Ok(format!("{mm:.3} mm\n"))
}

pub fn fit(samples: &Path) -> Result<String> {
    let f = File::open(samples).with_context(|| format!("opening {}", samples.display()))?;
    let samples = io::read_calibration_samples(f)?;
    let line = fit_line(&samples)?;
    Ok(format!(
        "slope_cm_per_ohm = {}\nintercept_cm = {}\nr_squared = {:.6}\n",
        round_to(line.slope_cm_per_ohm, 9),
        round_to(line.intercept_cm, 6),
        line.r_squared
    ))
}

fn round_to(x: f64, places: i32) -> f64 {
    let s = 10f64.powi(places);
    let r = (x * s).round() / s;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

pub fn plotdata(run_dir: &Path, out: Option<&Path>) -> Result<String> {
    let open = |name: &str| -> Result<File> {
        let p = run_dir.join(name);
        File::open(&p).with_context(|| format!("opening {}", p.display()))
    };
    let telemetry = io::read_telemetry(open("telemetry.csv")?)?;
    let hourly = io::read_hourly(open("hourly.csv")?)?;
    let Some(start) = telemetry.first().map(|r| r.time) else {
        bail!("telemetry.csv has no rows");
    };
    let out = out.unwrap_or(run_dir);
    fs::create_dir_all(out)?;

    let mut t = create(out, "telemetry.dat")?;
    writeln!(t, "# minutes depth_cm volume_cm3 drain bad")?;
    for r in &telemetry {
        let minutes = (r.time - start).num_seconds() as f64 / 60.0;
        writeln!(t, "{minutes:.0} {:.4} {:.2} {} {}", r.depth_cm, r.volume_cm3, u8::from(r.drain_detected), u8::from(r.bad))?;
    }
    t.flush()?;

    let mut h = create(out, "hourly.dat")?;
    writeln!(h, "# hours rain_mm")?;
    for r in &hourly {
        let hours = (r.time - start).num_seconds() as f64 / 3600.0;
        writeln!(h, "{hours:.2} {:.3}", r.rainfall_mm)?;
    }
    h.flush()?;

    Ok(format!(
        "wrote {} and {}\n",
        out.join("telemetry.dat").display(),
        out.join("hourly.dat").display()
    ))
}
