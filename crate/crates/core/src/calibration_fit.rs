//! Least-squares recovery of the sensor's depth/resistance line from
//! multimeter readings.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationSample {
    pub resistance_ohms: f64,
    pub depth_cm: f64,
}

impl CalibrationSample {
    pub fn new(resistance_ohms: f64, depth_cm: f64) -> Self {
        Self {
            resistance_ohms,
            depth_cm,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope_cm_per_ohm: f64,
    pub intercept_cm: f64,
    pub r_squared: f64,
}

impl LineFit {
    pub fn predict(&self, resistance_ohms: f64) -> f64 {
        self.slope_cm_per_ohm * resistance_ohms + self.intercept_cm
    }

    /// Residual sum of squares of this line over `samples`.
    pub fn rss(&self, samples: &[CalibrationSample]) -> f64 {
        rss(self.slope_cm_per_ohm, self.intercept_cm, samples)
    }
}

pub fn rss(slope: f64, intercept: f64, samples: &[CalibrationSample]) -> f64 {
    samples
        .iter()
        .map(|s| {
            let e = s.depth_cm - (slope * s.resistance_ohms + intercept);
            e * e
        })
        .sum()
}

/// Ordinary least squares of depth on resistance.
pub fn fit_line(samples: &[CalibrationSample]) -> Result<LineFit> {
    if samples.len() < 2 {
        return Err(Error::InsufficientData {
            need: 2,
            got: samples.len(),
        });
    }
    let n = samples.len() as f64;
    // centred sums; summation order doesn't depend on input order beyond
    // floating-point associativity
    let mean_r = samples.iter().map(|s| s.resistance_ohms).sum::<f64>() / n;
    let mean_d = samples.iter().map(|s| s.depth_cm).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for s in samples {
        let dx = s.resistance_ohms - mean_r;
        let dy = s.depth_cm - mean_d;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::DegenerateFit);
    }
    let slope = sxy / sxx;
    let intercept = mean_d - slope * mean_r;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    };
    Ok(LineFit {
        slope_cm_per_ohm: slope,
        intercept_cm: intercept,
        r_squared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn line_21(r: f64) -> f64 {
        -0.004 * r + 21.4
    }

    #[test]
    fn recovers_exact_line() {
        let samples: Vec<_> = (0..=10).map(|i| {
            let r = i as f64 * 535.0;
            CalibrationSample::new(r, line_21(r))
        }).collect();
        let fit = fit_line(&samples).unwrap();
        assert_relative_eq!(fit.slope_cm_per_ohm, -0.004, max_relative = 1e-9);
        assert_relative_eq!(fit.intercept_cm, 21.4, max_relative = 1e-9);
        assert_relative_eq!(fit.r_squared, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn two_points_interpolate() {
        let fit = fit_line(&[CalibrationSample::new(100.0, 3.0), CalibrationSample::new(300.0, 1.0)]).unwrap();
        assert_relative_eq!(fit.slope_cm_per_ohm, -0.01, max_relative = 1e-12);
        assert_relative_eq!(fit.intercept_cm, 4.0, max_relative = 1e-12);
        assert_eq!(fit.r_squared, 1.0);
    }

    #[test]
    fn degenerate_inputs() {
        let same = [CalibrationSample::new(5.0, 1.0), CalibrationSample::new(5.0, 2.0)];
        assert!(matches!(fit_line(&same), Err(Error::DegenerateFit)));
        assert!(matches!(fit_line(&same[..1]), Err(Error::InsufficientData { .. })));
    }

    #[test]
    fn symmetric_noise_matches_grid_search() {
        // ±δ alternating about the reference line
        let samples: Vec<_> = (0..20)
            .map(|i| {
                let r = 250.0 * i as f64;
                let delta = if i % 2 == 0 { 0.2 } else { -0.2 };
                CalibrationSample::new(r, line_21(r) + delta)
            })
            .collect();
        let fit = fit_line(&samples).unwrap();

        // brute-force least squares on a fine grid around the true line
        let mut best = (f64::INFINITY, 0.0, 0.0);
        for i in -200..=200 {
            let slope = -0.004 + i as f64 * 1e-7;
            for j in -500..=500 {
                let intercept = 21.4 + j as f64 * 1e-4;
                let e = rss(slope, intercept, &samples);
                if e < best.0 {
                    best = (e, slope, intercept);
                }
            }
        }
        assert!(fit.rss(&samples) <= best.0);
        assert!((fit.slope_cm_per_ohm - best.1).abs() <= 2e-7);
        assert!((fit.intercept_cm - best.2).abs() <= 5e-4);
        // frozen from an independent least-squares solve
        assert!((fit.slope_cm_per_ohm - -4.012_030_08e-3).abs() <= 1e-11);
        assert!((fit.intercept_cm - 21.428_571_4).abs() <= 1e-6);
        assert!(fit.r_squared < 1.0 && fit.r_squared > 0.99);
    }

    fn samples() -> impl Strategy<Value = Vec<CalibrationSample>> {
        prop::collection::vec((0.0f64..10_000.0, 0.0f64..100.0), 3..40)
            .prop_map(|v| v.into_iter().map(|(r, d)| CalibrationSample::new(r, d)).collect())
    }

    proptest! {
        #[test]
        fn fit_beats_nearby_lines(s in samples()) {
            let fit = fit_line(&s).unwrap();
            let best = fit.rss(&s);
            for ds in [-1e-4, 0.0, 1e-4] {
                for di in [-0.1, 0.0, 0.1] {
                    let other = rss(fit.slope_cm_per_ohm + ds, fit.intercept_cm + di, &s);
                    prop_assert!(best <= other * (1.0 + 1e-12) + 1e-12);
                }
            }
            prop_assert!((0.0..=1.0).contains(&fit.r_squared));
        }

        #[test]
        fn reordering_does_not_matter(s in samples()) {
            let mut rev = s.clone();
            rev.reverse();
            let a = fit_line(&s).unwrap();
            let b = fit_line(&rev).unwrap();
            prop_assert!((a.slope_cm_per_ohm - b.slope_cm_per_ohm).abs() <= 1e-12 * a.slope_cm_per_ohm.abs().max(1e-9));
            prop_assert!((a.intercept_cm - b.intercept_cm).abs() <= 1e-9 * a.intercept_cm.abs().max(1.0));
        }

        #[test]
        fn scaling_depths_scales_line(s in samples(), k in prop::sample::select(vec![0.5f64, 2.0, 4.0, 10.0])) {
            let scaled: Vec<_> = s.iter().map(|p| CalibrationSample::new(p.resistance_ohms, k * p.depth_cm)).collect();
            let a = fit_line(&s).unwrap();
            let b = fit_line(&scaled).unwrap();
            prop_assert!((b.slope_cm_per_ohm - k * a.slope_cm_per_ohm).abs() <= 1e-12 * (k * a.slope_cm_per_ohm).abs().max(1e-12));
            prop_assert!((b.intercept_cm - k * a.intercept_cm).abs() <= 1e-12 * (k * a.intercept_cm).abs().max(1e-12));
        }
    }
}
