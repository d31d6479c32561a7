//! Two-device comparison: summaries, t statistic and a tabulated two-tailed
//! critical value.
//!
//! The default test pairs the unpooled standard error
//! `sqrt(s1²/n1 + s2²/n2)` with pooled degrees of freedom `n1 + n2 − 2`.
//! Welch–Satterthwaite degrees of freedom are available on request.

use std::fmt;

use crate::error::{Error, Result};

/// Significance levels with a tabulated column.
pub const TABLE_ALPHAS: [f64; 3] = [0.10, 0.05, 0.01];

/// Two-tailed Student t critical values, df 1..=30, columns in
/// [`TABLE_ALPHAS`] order.
const T_TABLE: [[f64; 3]; 30] = [
    [6.314, 12.706, 63.657],
    [2.920, 4.303, 9.925],
    [2.353, 3.182, 5.841],
    [2.132, 2.776, 4.604],
    [2.015, 2.571, 4.032],
    [1.943, 2.447, 3.707],
    [1.895, 2.365, 3.499],
    [1.860, 2.306, 3.355],
    [1.833, 2.262, 3.250],
    [1.812, 2.228, 3.169],
    [1.796, 2.201, 3.106],
    [1.782, 2.179, 3.055],
    [1.771, 2.160, 3.012],
    [1.761, 2.145, 2.977],
    [1.753, 2.131, 2.947],
    [1.746, 2.120, 2.921],
    [1.740, 2.110, 2.898],
    [1.734, 2.101, 2.878],
    [1.729, 2.093, 2.861],
    [1.725, 2.086, 2.845],
    [1.721, 2.080, 2.831],
    [1.717, 2.074, 2.819],
    [1.714, 2.069, 2.807],
    [1.711, 2.064, 2.797],
    [1.708, 2.060, 2.787],
    [1.706, 2.056, 2.779],
    [1.703, 2.052, 2.771],
    [1.701, 2.048, 2.763],
    [1.699, 2.045, 2.756],
    [1.697, 2.042, 2.750],
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleSummary {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (n − 1 denominator).
    pub sd: f64,
}

pub fn summarize(xs: &[f64]) -> Result<SampleSummary> {
    if xs.len() < 2 {
        return Err(Error::InsufficientData { need: 2, got: xs.len() });
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    Ok(SampleSummary {
        n: xs.len(),
        mean,
        sd: (ss / (n - 1.0)).sqrt(),
    })
}

pub fn t_statistic(s1: &SampleSummary, s2: &SampleSummary) -> Result<f64> {
    let se = (s1.sd * s1.sd / s1.n as f64 + s2.sd * s2.sd / s2.n as f64).sqrt();
    let diff = s1.mean - s2.mean;
    if se == 0.0 {
        return if diff == 0.0 { Ok(0.0) } else { Err(Error::InfiniteSeparation) };
    }
    Ok(diff / se)
}

/// Two-tailed critical value from the embedded table.
pub fn critical_value(alpha: f64, df: usize) -> Result<f64> {
    let col = TABLE_ALPHAS.iter().position(|a| (a - alpha).abs() < 1e-12);
    match (col, df) {
        (Some(c), 1..=30) => Ok(T_TABLE[df - 1][c]),
        _ => Err(Error::TableRange { alpha, df }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DfMethod {
    /// n1 + n2 − 2.
    #[default]
    Pooled,
    /// Welch–Satterthwaite, rounded down to a whole table row.
    Welch,
}

pub fn degrees_of_freedom(s1: &SampleSummary, s2: &SampleSummary, method: DfMethod) -> usize {
    let pooled = s1.n + s2.n - 2;
    match method {
        DfMethod::Pooled => pooled,
        DfMethod::Welch => {
            let a = s1.sd * s1.sd / s1.n as f64;
            let b = s2.sd * s2.sd / s2.n as f64;
            let den = a * a / (s1.n as f64 - 1.0) + b * b / (s2.n as f64 - 1.0);
            if den == 0.0 {
                pooled
            } else {
                (((a + b) * (a + b) / den).floor() as usize).max(1)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonReport {
    pub summary_1: SampleSummary,
    pub summary_2: SampleSummary,
    pub t: f64,
    pub df: usize,
    pub alpha: f64,
    pub t_critical: f64,
    pub reject_null: bool,
}

pub fn compare(xs: &[f64], ys: &[f64], alpha: f64) -> Result<ComparisonReport> {
    compare_with(xs, ys, alpha, DfMethod::Pooled)
}

pub fn compare_with(xs: &[f64], ys: &[f64], alpha: f64, method: DfMethod) -> Result<ComparisonReport> {
    let summary_1 = summarize(xs)?;
    let summary_2 = summarize(ys)?;
    let t = t_statistic(&summary_1, &summary_2)?;
    let df = degrees_of_freedom(&summary_1, &summary_2, method);
    let t_critical = critical_value(alpha, df)?;
    Ok(ComparisonReport {
        summary_1,
        summary_2,
        t,
        df,
        alpha,
        t_critical,
        reject_null: t.abs() > t_critical,
    })
}

impl ComparisonReport {
    /// Machine-readable `key=value` block, one pair per line.
    pub fn key_values(&self) -> String {
        format!(
            "t={:.2}\ndf={}\nalpha={}\nt_critical={:.3}\nreject_null={}\nmean_1={:.3}\nsd_1={:.3}\nn_1={}\nmean_2={:.3}\nsd_2={:.3}\nn_2={}\n",
            self.t,
            self.df,
            self.alpha,
            self.t_critical,
            self.reject_null,
            self.summary_1.mean,
            self.summary_1.sd,
            self.summary_1.n,
            self.summary_2.mean,
            self.summary_2.sd,
            self.summary_2.n,
        )
    }
}

impl fmt::Display for ComparisonReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "group 1: n = {}, mean = {:.3} mm, sd = {:.3} mm", self.summary_1.n, self.summary_1.mean, self.summary_1.sd)?;
        writeln!(f, "group 2: n = {}, mean = {:.3} mm, sd = {:.3} mm", self.summary_2.n, self.summary_2.mean, self.summary_2.sd)?;
        writeln!(f, "t = {:.2}, df = {}, alpha = {}, t_critical = {:.3}", self.t, self.df, self.alpha, self.t_critical)?;
        if self.reject_null {
            write!(f, "|t| > t_critical: reject the null hypothesis (difference is significant)")
        } else {
            write!(f, "|t| <= t_critical: fail to reject the null hypothesis (difference is not significant)")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use statrs::distribution::{ContinuousCDF, StudentsT};

    #[test]
    fn table_matches_distribution() {
        // independent oracle: inverse CDF of Student's t
        for df in 1..=30 {
            let dist = StudentsT::new(0.0, 1.0, df as f64).unwrap();
            for alpha in TABLE_ALPHAS {
                let exact = dist.inverse_cdf(1.0 - alpha / 2.0);
                let table = critical_value(alpha, df).unwrap();
                assert!((table - exact).abs() <= 6e-4, "df={df} alpha={alpha}: {table} vs {exact}");
            }
        }
    }

    #[test]
    fn critical_value_examples() {
        assert_eq!(critical_value(0.05, 22).unwrap(), 2.074);
        assert_eq!(critical_value(0.05, 1).unwrap(), 12.706);
        assert!(critical_value(0.01, 22).unwrap() > critical_value(0.05, 22).unwrap());
        assert!(matches!(critical_value(0.05, 31), Err(Error::TableRange { .. })));
        assert!(matches!(critical_value(0.05, 0), Err(Error::TableRange { .. })));
        assert!(matches!(critical_value(0.02, 10), Err(Error::TableRange { .. })));
    }

    #[test]
    fn summarize_examples() {
        let s = summarize(&[2.0, 2.0, 2.0]).unwrap();
        assert_eq!(s.sd, 0.0);
        assert_eq!(s.mean, 2.0);
        assert!(matches!(summarize(&[1.0]), Err(Error::InsufficientData { need: 2, got: 1 })));
        let s = summarize(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_relative_eq!(s.sd, (5.0f64 / 3.0).sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn t_statistic_examples() {
        let a = SampleSummary { n: 2, mean: 1.0, sd: 0.0 };
        let b = SampleSummary { n: 2, mean: 0.0, sd: 1.0 };
        assert_relative_eq!(t_statistic(&a, &b).unwrap(), 2f64.sqrt(), max_relative = 1e-15);
        assert_eq!(t_statistic(&a, &a).unwrap(), 0.0);
        let c = SampleSummary { n: 2, mean: 3.0, sd: 0.0 };
        assert!(matches!(t_statistic(&a, &c), Err(Error::InfiniteSeparation)));
    }

    #[test]
    fn compare_examples() {
        let xs = [0.1, 0.3, 0.2, 0.5];
        let same = compare(&xs, &xs, 0.05).unwrap();
        assert_eq!(same.t, 0.0);
        assert!(!same.reject_null);

        let zeros = [0.0; 6];
        let tens = [10.0, 10.01, 9.99, 10.0, 10.02, 9.98];
        let r = compare(&zeros, &tens, 0.05).unwrap();
        assert!(r.reject_null);
        assert_eq!(r.df, 10);
        assert!(compare(&[1.0], &xs, 0.05).is_err());
    }

    #[test]
    fn welch_df_is_smaller_for_unequal_spreads() {
        let xs = [0.0, 0.1, 0.0, 0.1, 0.0, 0.1];
        let ys = [0.0, 5.0, 1.0, 4.0, 2.0, 3.0];
        let pooled = compare_with(&xs, &ys, 0.05, DfMethod::Pooled).unwrap();
        let welch = compare_with(&xs, &ys, 0.05, DfMethod::Welch).unwrap();
        assert_eq!(pooled.df, 10);
        assert_eq!(welch.df, 5);
        assert_eq!(pooled.t, welch.t);
        assert!(welch.t_critical > pooled.t_critical);
    }

    #[test]
    fn report_formats() {
        let r = compare(&[0.0, 1.0, 2.0], &[0.0, 1.0, 2.5], 0.05).unwrap();
        let kv = r.key_values();
        assert!(kv.contains("df=4\n"));
        assert!(kv.contains("t_critical=2.776\n"));
        assert!(kv.contains("reject_null=false\n"));
        assert!(r.to_string().contains("fail to reject"));
    }

    fn series() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-100.0f64..100.0, 2..16)
    }

    proptest! {
        #[test]
        fn antisymmetric(xs in series(), ys in series()) {
            prop_assume!(xs.len() + ys.len() - 2 <= 30);
            if let (Ok(a), Ok(b)) = (compare(&xs, &ys, 0.05), compare(&ys, &xs, 0.05)) {
                prop_assert_eq!(a.t, -b.t);
                prop_assert_eq!(a.reject_null, b.reject_null);
            }
        }

        #[test]
        fn shift_invariant(xs in series(), ys in series(), c in -50.0f64..50.0) {
            prop_assume!(xs.len() + ys.len() - 2 <= 30);
            let sx: Vec<f64> = xs.iter().map(|x| x + c).collect();
            let sy: Vec<f64> = ys.iter().map(|y| y + c).collect();
            if let (Ok(a), Ok(b)) = (compare(&xs, &ys, 0.05), compare(&sx, &sy, 0.05)) {
                prop_assert!((a.t - b.t).abs() <= 1e-9 * a.t.abs().max(1.0));
            }
        }

        #[test]
        fn sd_scales_with_k(xs in series(), k in -10.0f64..10.0) {
            let scaled: Vec<f64> = xs.iter().map(|x| k * x).collect();
            let a = summarize(&xs).unwrap();
            let b = summarize(&scaled).unwrap();
            prop_assert!((b.sd - k.abs() * a.sd).abs() <= 1e-9 * (k.abs() * a.sd).max(1e-12));
        }
    }
}
