//! Empirical error statistics and grading.
//!
//! The two error processes of interest are `d_i = z_i - u_i` (target minus
//! causal SMA) and `e_i = z_i - y_i` (target minus EMA). This module pairs
//! a target series with an estimate series, accumulates mean, variance,
//! MSE, and MAE over the overlapping steps, and grades the measured MSE
//! against a closed-form variance.
//!
//! [`analyze`] fuses generation output, both filters, and both
//! accumulators into one pass so that benchmark runs over 10^7-sample
//! series never materialize the intermediate estimate vectors.

use serde::{Deserialize, Serialize};

use crate::channel::OutcomeSeries;
use crate::error::{Error, Result};
use crate::filters::{ema_step, EstimateKind, EstimateSeries};

/// Which error process a series of differences represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// `d = z - u`, the window-placement error of the causal SMA.
    D,
    /// `e = z - y`, the EMA tracking error.
    E,
}

impl ErrorKind {
    pub fn name(self) -> &'static str {
        match self {
            ErrorKind::D => "d",
            ErrorKind::E => "e",
        }
    }
}

/// Differences between a target series and an estimate series over their
/// overlapping valid steps.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorSeries {
    pub values: Vec<f64>,
    /// 1-based step of `values[0]`.
    pub first_valid: usize,
    pub last_valid: usize,
    pub kind: ErrorKind,
    /// Last step of the underlying outcome series, used to anchor
    /// postfix skips.
    pub source_len: usize,
}

impl ErrorSeries {
    pub fn get(&self, i: usize) -> Option<f64> {
        if i < self.first_valid || i > self.last_valid {
            None
        } else {
            self.values.get(i - self.first_valid).copied()
        }
    }
}

/// Subtract an estimate from the centered target over their common steps.
///
/// The target must be a Z series; the estimate must be U (giving `d`) or
/// Y (giving `e`).
pub fn error_series(target: &EstimateSeries, estimate: &EstimateSeries) -> Result<ErrorSeries> {
    if target.kind != EstimateKind::Z {
        return Err(Error::IncompatibleSeriesKinds {
            target: target.kind.name(),
            estimate: estimate.kind.name(),
        });
    }
    let kind = match estimate.kind {
        EstimateKind::U => ErrorKind::D,
        EstimateKind::Y => ErrorKind::E,
        EstimateKind::V | EstimateKind::Z => {
            return Err(Error::IncompatibleSeriesKinds {
                target: target.kind.name(),
                estimate: estimate.kind.name(),
            })
        }
    };
    let first = target.first_valid.max(estimate.first_valid);
    let last = target.last_valid.min(estimate.last_valid);
    if first > last {
        return Err(Error::InsufficientOverlap {
            first_a: target.first_valid,
            last_a: target.last_valid,
            first_b: estimate.first_valid,
            last_b: estimate.last_valid,
        });
    }
    let values = (first..=last)
        .map(|i| target.get(i).unwrap() - estimate.get(i).unwrap())
        .collect();
    Ok(ErrorSeries {
        values,
        first_valid: first,
        last_valid: last,
        kind,
        source_len: estimate.last_valid,
    })
}

/// Streaming accumulator for mean, variance, MSE, and MAE.
///
/// The mean and central second moment use Welford updates; the raw
/// second and absolute moments carry Kahan compensation so that 10^7
/// tiny squared errors do not lose digits to a large running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct ErrorAccumulator {
    count: u64,
    mean: f64,
    m2: f64,
    sum_sq: f64,
    c_sq: f64,
    sum_abs: f64,
    c_abs: f64,
}

impl ErrorAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);

        let term = x * x - self.c_sq;
        let t = self.sum_sq + term;
        self.c_sq = (t - self.sum_sq) - term;
        self.sum_sq = t;

        let term = x.abs() - self.c_abs;
        let t = self.sum_abs + term;
        self.c_abs = (t - self.sum_abs) - term;
        self.sum_abs = t;
    }

    /// Combine two accumulators as if their inputs had been concatenated.
    pub fn merge(&mut self, other: &ErrorAccumulator) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n1 = self.count as f64;
        let n2 = other.count as f64;
        let delta = other.mean - self.mean;
        let total = n1 + n2;
        self.mean += delta * n2 / total;
        self.m2 += other.m2 + delta * delta * n1 * n2 / total;
        self.count += other.count;
        self.sum_sq += other.sum_sq;
        self.sum_abs += other.sum_abs;
        self.c_sq = 0.0;
        self.c_abs = 0.0;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn finalize(&self) -> Result<ErrorSummary> {
        if self.count == 0 {
            return Err(Error::EmptySummaryWindow);
        }
        let n = self.count as f64;
        Ok(ErrorSummary {
            mean: self.mean,
            var: self.m2 / n,
            mse: self.sum_sq / n,
            mae: self.sum_abs / n,
            count: self.count,
        })
    }
}

/// Moment summary of one error process over a summary window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorSummary {
    pub mean: f64,
    /// Population variance (uncorrected, divisor `count`).
    pub var: f64,
    /// Mean squared error; equals `var + mean^2` up to rounding.
    pub mse: f64,
    /// Mean absolute error.
    pub mae: f64,
    pub count: u64,
}

/// Summarize an error series, dropping `skip_prefix` steps at the start
/// of the source series and `skip_postfix` steps at its end.
///
/// Skips are counted in source steps: the window is
/// `[max(first_valid, skip_prefix + 1), min(last_valid, source_len - skip_postfix)]`.
pub fn summarize(
    series: &ErrorSeries,
    skip_prefix: usize,
    skip_postfix: usize,
) -> Result<ErrorSummary> {
    let lo = series.first_valid.max(skip_prefix + 1);
    let hi = series
        .last_valid
        .min(series.source_len.saturating_sub(skip_postfix));
    if lo > hi {
        return Err(Error::EmptySummaryWindow);
    }
    let mut acc = ErrorAccumulator::new();
    for i in lo..=hi {
        acc.push(series.get(i).unwrap());
    }
    acc.finalize()
}

/// Traffic-light verdict for how closely a measured MSE tracks theory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Grade {
    Green,
    Yellow,
    Red,
}

impl std::fmt::Display for Grade {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Grade::Green => "green",
            Grade::Yellow => "yellow",
            Grade::Red => "red",
        })
    }
}

impl std::str::FromStr for Grade {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "green" => Ok(Grade::Green),
            "yellow" => Ok(Grade::Yellow),
            "red" => Ok(Grade::Red),
            other => Err(Error::Config(format!("unknown grade {other:?}"))),
        }
    }
}

/// MSE / theory ratio at or below this grades green.
pub const GREEN_MAX_RATIO: f64 = 1.4;
/// MSE / theory ratio at or below this (and above green) grades yellow.
pub const YELLOW_MAX_RATIO: f64 = 10.0;

/// A grade together with the ratio it was derived from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproximationGrade {
    pub grade: Grade,
    pub ratio: f64,
}

/// Grade a measured MSE against a positive closed-form variance.
pub fn classify(mse: f64, theory_var: f64) -> Result<ApproximationGrade> {
    if !(theory_var > 0.0) {
        return Err(Error::InvalidParameter {
            field: "theory_var",
            value: theory_var,
            requirement: "must be positive to form a ratio",
        });
    }
    if !(mse >= 0.0) {
        return Err(Error::InvalidParameter {
            field: "mse",
            value: mse,
            requirement: "must be non-negative",
        });
    }
    let ratio = mse / theory_var;
    let grade = if ratio <= GREEN_MAX_RATIO {
        Grade::Green
    } else if ratio <= YELLOW_MAX_RATIO {
        Grade::Yellow
    } else {
        Grade::Red
    };
    Ok(ApproximationGrade { grade, ratio })
}

/// Like [`classify`], but tolerant of degenerate links where the theory
/// variance is zero (eps of 0 or 1): a zero MSE is the expected perfect
/// outcome and grades green, anything else grades red.
pub fn grade_against_theory(mse: f64, theory_var: f64) -> Result<ApproximationGrade> {
    if theory_var > 0.0 {
        classify(mse, theory_var)
    } else if mse == 0.0 {
        Ok(ApproximationGrade {
            grade: Grade::Green,
            ratio: 0.0,
        })
    } else {
        Ok(ApproximationGrade {
            grade: Grade::Red,
            ratio: f64::INFINITY,
        })
    }
}

/// Default number of steps dropped from each end of a series before
/// summarizing, enough to clear the EMA transient for alpha down to
/// 2/10^4 and the target fringe for m up to 10^4.
pub const DEFAULT_SKIP: usize = 100_000;

/// Filter and summary-window settings for [`analyze`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub m: usize,
    pub alpha: f64,
    pub y0: f64,
    pub skip_prefix: usize,
    pub skip_postfix: usize,
}

impl AnalysisConfig {
    /// Matched-memory configuration: `alpha = 2/m`, `y0 = 1`, default
    /// skips on both ends.
    pub fn matched(m: usize) -> Result<Self> {
        Ok(AnalysisConfig {
            m,
            alpha: crate::theory::matched_alpha(m)?,
            y0: 1.0,
            skip_prefix: DEFAULT_SKIP,
            skip_postfix: DEFAULT_SKIP,
        })
    }
}

/// Summaries of both error processes for one outcome series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutcomeAnalysis {
    pub d: ErrorSummary,
    pub e: ErrorSummary,
    /// Steps that entered the summaries.
    pub n_stats: u64,
    /// Fraction of failed outcomes over the whole series.
    pub empirical_failure_rate: f64,
}

/// Run both filters and both error accumulators over a series in one
/// streaming pass.
///
/// Produces exactly the statistics of building the U, Y, and Z series,
/// subtracting, and summarizing, including bitwise-identical error values:
/// the target is formed as `(u + v) / 2` from the same integer window
/// counts the materialized path uses.
pub fn analyze(series: &OutcomeSeries, config: &AnalysisConfig) -> Result<OutcomeAnalysis> {
    let m = config.m;
    if m == 0 {
        return Err(Error::InvalidParameter {
            field: "m",
            value: 0.0,
            requirement: "window length must be >= 1",
        });
    }
    if !(config.alpha > 0.0 && config.alpha <= 1.0) {
        return Err(Error::InvalidParameter {
            field: "alpha",
            value: config.alpha,
            requirement: "must lie in (0, 1]",
        });
    }
    if !(config.y0 >= 0.0 && config.y0 <= 1.0) {
        return Err(Error::InvalidParameter {
            field: "y0",
            value: config.y0,
            requirement: "must lie in [0, 1]",
        });
    }
    let xs = series.as_slice();
    let n = xs.len();
    // Z is defined on [m, n - m]; clip by the requested skips.
    let lo = m.max(config.skip_prefix + 1);
    let hi = (n.saturating_sub(m)).min(n.saturating_sub(config.skip_postfix));
    if n < 2 * m || lo > hi {
        return Err(Error::InsufficientData {
            required: 2 * m + config.skip_prefix + config.skip_postfix,
            actual: n,
        });
    }

    let m_f = m as f64;
    let alpha = config.alpha;
    let mut cnt_lead: u64 = 0; // window (t, t + m] of the step t being scored
    let mut cnt_lag: u64 = 0; // window (t - m, t]
    let mut y = config.y0;
    let mut acc_d = ErrorAccumulator::new();
    let mut acc_e = ErrorAccumulator::new();

    for k in 1..=n {
        cnt_lead += u64::from(xs[k - 1]);
        if k > m {
            cnt_lead -= u64::from(xs[k - 1 - m]);
            let t = k - m;
            cnt_lag += u64::from(xs[t - 1]);
            if t > m {
                cnt_lag -= u64::from(xs[t - 1 - m]);
            }
            y = ema_step(y, f64::from(xs[t - 1]), alpha);
            if t >= lo && t <= hi {
                let u = cnt_lag as f64 / m_f;
                let v = cnt_lead as f64 / m_f;
                let z = (u + v) / 2.0;
                acc_d.push(z - u);
                acc_e.push(z - y);
            }
        }
    }

    Ok(OutcomeAnalysis {
        d: acc_d.finalize()?,
        e: acc_e.finalize()?,
        n_stats: acc_d.count(),
        empirical_failure_rate: series.empirical_failure_rate(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{generate, FailureProfile, OutcomeSeries};
    use crate::filters;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use num::rational::BigRational;
    use num::{FromPrimitive, ToPrimitive, Zero};
    use proptest::prelude::*;

    fn series_from(bits: &[u8]) -> OutcomeSeries {
        OutcomeSeries::from_external(bits.to_vec(), 0.5, "test").unwrap()
    }

    #[test]
    fn error_series_d_hand_example() {
        // x = [1, 0, 1, 1], m = 1: u = x shifted into [1,4],
        // z_i = (x_i + x_{i+1}) / 2 on [1,3].
        let s = series_from(&[1, 0, 1, 1]);
        let z = filters::target_centered(&s, 1).unwrap();
        let u = filters::sma_past(&s, 1).unwrap();
        let d = error_series(&z, &u).unwrap();
        assert_eq!(d.kind, ErrorKind::D);
        assert_eq!(d.first_valid, 1);
        assert_eq!(d.last_valid, 3);
        assert_eq!(d.source_len, 4);
        assert_eq!(d.values, vec![-0.5, 0.5, 0.0]);
    }

    #[test]
    fn error_series_rejects_wrong_kinds() {
        let s = series_from(&[1, 0, 1, 1, 0, 1]);
        let z = filters::target_centered(&s, 1).unwrap();
        let u = filters::sma_past(&s, 1).unwrap();
        let v = filters::sma_future(&s, 1).unwrap();
        // Estimate in the target slot.
        let err = error_series(&u, &z).unwrap_err();
        assert!(matches!(err, Error::IncompatibleSeriesKinds { .. }));
        // V is not a gradable estimate.
        let err = error_series(&z, &v).unwrap_err();
        assert!(matches!(err, Error::IncompatibleSeriesKinds { .. }));
    }

    #[test]
    fn error_series_requires_overlap() {
        // m = 3 on 7 samples: z valid on [3, 4]. A y series truncated to
        // steps before that window cannot be compared.
        let s = series_from(&[1, 0, 1, 1, 0, 1, 1]);
        let z = filters::target_centered(&s, 3).unwrap();
        let mut y = filters::ema(&s, 0.5, 1.0).unwrap();
        y.values.truncate(2);
        y.last_valid = 2;
        let err = error_series(&z, &y).unwrap_err();
        match err {
            Error::InsufficientOverlap {
                first_a, last_b, ..
            } => {
                assert_eq!(first_a, 3);
                assert_eq!(last_b, 2);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn summarize_two_value_example() {
        let es = ErrorSeries {
            values: vec![0.1, -0.1],
            first_valid: 1,
            last_valid: 2,
            kind: ErrorKind::D,
            source_len: 2,
        };
        let s = summarize(&es, 0, 0).unwrap();
        assert_abs_diff_eq!(s.mean, 0.0, epsilon = 1e-16);
        assert_relative_eq!(s.var, 0.01, max_relative = 1e-12);
        assert_relative_eq!(s.mse, 0.01, max_relative = 1e-12);
        assert_relative_eq!(s.mae, 0.1, max_relative = 1e-12);
        assert_eq!(s.count, 2);
    }

    #[test]
    fn summarize_single_value() {
        let es = ErrorSeries {
            values: vec![0.2],
            first_valid: 5,
            last_valid: 5,
            kind: ErrorKind::E,
            source_len: 10,
        };
        let s = summarize(&es, 0, 0).unwrap();
        assert_eq!(s.count, 1);
        assert_relative_eq!(s.mean, 0.2);
        assert_abs_diff_eq!(s.var, 0.0, epsilon = 1e-17);
        assert_relative_eq!(s.mse, 0.04000000000000001, max_relative = 1e-12);
    }

    #[test]
    fn summarize_honors_skips_and_rejects_empty_window() {
        let es = ErrorSeries {
            values: (0..10).map(|i| i as f64).collect(),
            first_valid: 3,
            last_valid: 12,
            kind: ErrorKind::D,
            source_len: 15,
        };
        // Prefix skip of 5 drops steps 3..=5, postfix skip of 4 drops
        // steps 12.. so the window is [6, 11]: values 3..=8.
        let s = summarize(&es, 5, 4).unwrap();
        assert_eq!(s.count, 6);
        assert_relative_eq!(s.mean, 5.5, max_relative = 1e-12);

        assert!(matches!(
            summarize(&es, 9, 6),
            Err(Error::EmptySummaryWindow)
        ));
    }

    #[test]
    fn accumulator_matches_exact_rational_arithmetic() {
        // Fixed pseudo-random fixture; exact moments via BigRational.
        let mut state = 0x2545F4914F6CDD1Du64;
        let mut values = Vec::with_capacity(10_000);
        for _ in 0..10_000 {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            let r = (state >> 11) as f64 / 9007199254740992.0;
            values.push(r - 0.5);
        }
        let mut acc = ErrorAccumulator::new();
        let mut sum = BigRational::zero();
        let mut sum_sq = BigRational::zero();
        let mut sum_abs = BigRational::zero();
        for &x in &values {
            acc.push(x);
            let q = BigRational::from_f64(x).unwrap();
            sum += &q;
            sum_sq += &q * &q;
            sum_abs += if x < 0.0 { -q } else { q };
        }
        let n = BigRational::from_integer(values.len().into());
        let mean = (&sum / &n).to_f64().unwrap();
        let mse = (&sum_sq / &n).to_f64().unwrap();
        let mae = (&sum_abs / &n).to_f64().unwrap();
        let var = (&sum_sq / &n - (&sum / &n) * (&sum / &n)).to_f64().unwrap();

        let got = acc.finalize().unwrap();
        assert_relative_eq!(got.mean, mean, max_relative = 1e-10);
        assert_relative_eq!(got.var, var, max_relative = 1e-10);
        assert_relative_eq!(got.mse, mse, max_relative = 1e-10);
        assert_relative_eq!(got.mae, mae, max_relative = 1e-10);
    }

    #[test]
    fn finalize_of_empty_accumulator_fails() {
        assert!(matches!(
            ErrorAccumulator::new().finalize(),
            Err(Error::EmptySummaryWindow)
        ));
    }

    #[test]
    fn mean_d_is_bounded_by_fringe_effects() {
        // Telescoping makes sum(d) depend only on the first and last m
        // outcomes, so |mean d| <= 2m / count over every full window.
        for n in 4..=16usize {
            for m in 1..=n / 2 {
                for pattern in 0..(1u32 << n) {
                    let bits: Vec<u8> = (0..n).map(|b| ((pattern >> b) & 1) as u8).collect();
                    let s = series_from(&bits);
                    let z = filters::target_centered(&s, m).unwrap();
                    let u = filters::sma_past(&s, m).unwrap();
                    let d = error_series(&z, &u).unwrap();
                    let sum: f64 = d.values.iter().sum();
                    assert!(
                        sum.abs() <= 2.0 * m as f64 + 1e-9,
                        "n={n} m={m} pattern={pattern:b}: sum(d)={sum}"
                    );
                }
                // Exhaustive over 2^n patterns gets expensive quickly.
                if n > 12 {
                    break;
                }
            }
            if n > 12 {
                break;
            }
        }
    }

    #[test]
    fn classify_examples_and_boundaries() {
        assert_eq!(classify(1.0, 1.0).unwrap().grade, Grade::Green);
        assert_eq!(classify(1.4, 1.0).unwrap().grade, Grade::Green);
        assert_eq!(classify(1.4000001, 1.0).unwrap().grade, Grade::Yellow);
        assert_eq!(classify(10.0, 1.0).unwrap().grade, Grade::Yellow);
        assert_eq!(classify(10.000001, 1.0).unwrap().grade, Grade::Red);
        let g = classify(0.0006, 0.00045).unwrap();
        assert_eq!(g.grade, Grade::Green);
        assert_relative_eq!(g.ratio, 4.0 / 3.0, max_relative = 1e-12);

        assert!(classify(1.0, 0.0).is_err());
        assert!(classify(-0.1, 1.0).is_err());
    }

    #[test]
    fn grade_against_theory_handles_degenerate_links() {
        let g = grade_against_theory(0.0, 0.0).unwrap();
        assert_eq!(g.grade, Grade::Green);
        assert_eq!(g.ratio, 0.0);
        let g = grade_against_theory(1e-9, 0.0).unwrap();
        assert_eq!(g.grade, Grade::Red);
        assert!(g.ratio.is_infinite());
        // Falls through to the ordinary path otherwise.
        let g = grade_against_theory(0.5, 1.0).unwrap();
        assert_eq!(g.grade, Grade::Green);
    }

    #[test]
    fn grades_order_from_best_to_worst() {
        assert!(Grade::Green < Grade::Yellow);
        assert!(Grade::Yellow < Grade::Red);
    }

    #[test]
    fn analyze_matches_materialized_pipeline_bitwise() {
        let profile = FailureProfile::sinusoidal(0.2, 0.1, 0.0004, 0.5).unwrap();
        let s = generate(&profile, 120_000, 77).unwrap();
        let config = AnalysisConfig {
            m: 1000,
            alpha: 0.002,
            y0: 1.0,
            skip_prefix: 5_000,
            skip_postfix: 2_500,
        };
        let fused = analyze(&s, &config).unwrap();

        let z = filters::target_centered(&s, config.m).unwrap();
        let u = filters::sma_past(&s, config.m).unwrap();
        let y = filters::ema(&s, config.alpha, config.y0).unwrap();
        let d = summarize(
            &error_series(&z, &u).unwrap(),
            config.skip_prefix,
            config.skip_postfix,
        )
        .unwrap();
        let e = summarize(
            &error_series(&z, &y).unwrap(),
            config.skip_prefix,
            config.skip_postfix,
        )
        .unwrap();

        assert_eq!(fused.d, d);
        assert_eq!(fused.e, e);
        assert_eq!(fused.n_stats, d.count);
    }

    #[test]
    fn analyze_m_one_hand_example() {
        // x = [1, 0, 1, 1], m = 1, no skips: d = [-0.5, 0.5, 0.0] so the
        // MSE is (0.25 + 0.25 + 0) / 3.
        let s = series_from(&[1, 0, 1, 1]);
        let config = AnalysisConfig {
            m: 1,
            alpha: 1.0,
            y0: 1.0,
            skip_prefix: 0,
            skip_postfix: 0,
        };
        let a = analyze(&s, &config).unwrap();
        assert_eq!(a.n_stats, 3);
        assert_relative_eq!(a.d.mse, 1.0 / 6.0, max_relative = 1e-12);
        // alpha = 1 makes y_t = x_t, which for m = 1 is exactly u_t, so
        // the e process coincides with d here.
        assert_eq!(a.e.mse, a.d.mse);
        assert_eq!(a.e.mean, a.d.mean);
        assert_relative_eq!(a.empirical_failure_rate, 0.25, max_relative = 1e-12);
    }

    #[test]
    fn analyze_rejects_windows_that_leave_no_steps() {
        let s = series_from(&[1, 0, 1, 1, 1, 0]);
        let config = AnalysisConfig {
            m: 3,
            alpha: 0.5,
            y0: 1.0,
            skip_prefix: 0,
            skip_postfix: 0,
        };
        assert!(analyze(&s, &config).is_ok());
        let config = AnalysisConfig {
            m: 4,
            alpha: 0.5,
            y0: 1.0,
            skip_prefix: 0,
            skip_postfix: 0,
        };
        assert!(matches!(
            analyze(&s, &config),
            Err(Error::InsufficientData { .. })
        ));
        let config = AnalysisConfig {
            m: 2,
            alpha: 0.5,
            y0: 1.0,
            skip_prefix: 4,
            skip_postfix: 0,
        };
        assert!(matches!(
            analyze(&s, &config),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn analyze_validates_filter_parameters() {
        let s = series_from(&[1, 0, 1, 1]);
        let bad_alpha = AnalysisConfig {
            m: 1,
            alpha: 0.0,
            y0: 1.0,
            skip_prefix: 0,
            skip_postfix: 0,
        };
        assert!(analyze(&s, &bad_alpha).is_err());
        let bad_y0 = AnalysisConfig {
            m: 1,
            alpha: 0.5,
            y0: 1.5,
            skip_prefix: 0,
            skip_postfix: 0,
        };
        assert!(analyze(&s, &bad_y0).is_err());
        let bad_m = AnalysisConfig {
            m: 0,
            alpha: 0.5,
            y0: 1.0,
            skip_prefix: 0,
            skip_postfix: 0,
        };
        assert!(analyze(&s, &bad_m).is_err());
    }

    proptest! {
        #[test]
        fn merged_accumulators_match_single_pass(
            xs in proptest::collection::vec(-1.0f64..1.0, 1..200),
            split in 0usize..200,
        ) {
            let split = split.min(xs.len());
            let mut whole = ErrorAccumulator::new();
            for &x in &xs {
                whole.push(x);
            }
            let mut left = ErrorAccumulator::new();
            let mut right = ErrorAccumulator::new();
            for &x in &xs[..split] {
                left.push(x);
            }
            for &x in &xs[split..] {
                right.push(x);
            }
            left.merge(&right);
            let a = whole.finalize().unwrap();
            let b = left.finalize().unwrap();
            prop_assert_eq!(a.count, b.count);
            prop_assert!((a.mean - b.mean).abs() <= 1e-12);
            prop_assert!((a.var - b.var).abs() <= 1e-12);
            prop_assert!((a.mse - b.mse).abs() <= 1e-12);
            prop_assert!((a.mae - b.mae).abs() <= 1e-12);
        }

        #[test]
        fn classify_is_monotone_in_mse(
            mse_a in 0.0f64..10.0,
            mse_b in 0.0f64..10.0,
            theory in 0.001f64..10.0,
        ) {
            let (lo, hi) = if mse_a <= mse_b { (mse_a, mse_b) } else { (mse_b, mse_a) };
            let g_lo = classify(lo, theory).unwrap();
            let g_hi = classify(hi, theory).unwrap();
            prop_assert!(g_lo.grade <= g_hi.grade);
            prop_assert!(g_lo.ratio <= g_hi.ratio);
        }

        #[test]
        fn summary_mse_decomposes_into_var_plus_mean_square(
            xs in proptest::collection::vec(-0.5f64..0.5, 2..400),
        ) {
            let mut acc = ErrorAccumulator::new();
            for &x in &xs {
                acc.push(x);
            }
            let s = acc.finalize().unwrap();
            prop_assert!((s.mse - (s.var + s.mean * s.mean)).abs() <= 1e-12);
            prop_assert!(s.mse >= 0.0);
            prop_assert!(s.mae >= 0.0);
            prop_assert!(s.var >= -1e-15);
        }
    }
}
