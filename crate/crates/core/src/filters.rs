//! Delivery-ratio estimators over an outcome series.
//!
//! Three moving-average views of the same outcomes:
//!
//! * `u_i`: causal SMA over the last `m` outcomes, the online estimator;
//! * `v_i`: anti-causal SMA over the next `m` outcomes (`v_i = u_{i+m}`);
//! * `z_i = (u_i + v_i) / 2`: the centered, non-causal target an online
//!   estimator is judged against;
//! * `y_i`: exponential moving average `y_i = alpha x_i + (1 - alpha) y_{i-1}`.
//!
//! Window sums are kept as integers and divided only on emission, so every
//! SMA value is the correctly rounded quotient of an exact count; the
//! incremental implementations therefore agree bit-for-bit with naive
//! recomputation, and `z` equals `(u + v) / 2` exactly by construction.
//!
//! Indices are 1-based to match the outcome series; each estimator carries
//! the range of steps where it is defined.

use crate::channel::OutcomeSeries;
use crate::error::{Error, Result};

/// Which estimator a series of values came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateKind {
    /// Causal simple moving average.
    U,
    /// Anti-causal simple moving average.
    V,
    /// Centered target, mean of U and V.
    Z,
    /// Exponential moving average.
    Y,
}

impl EstimateKind {
    pub fn name(&self) -> &'static str {
        match self {
            EstimateKind::U => "U",
            EstimateKind::V => "V",
            EstimateKind::Z => "Z",
            EstimateKind::Y => "Y",
        }
    }
}

/// Estimator output over its valid range of steps.
///
/// `values[k]` is the estimate at step `first_valid + k`; producers
/// guarantee `values.len() == last_valid - first_valid + 1` and every value
/// in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateSeries {
    pub values: Vec<f64>,
    pub first_valid: usize,
    pub last_valid: usize,
    pub kind: EstimateKind,
}

impl EstimateSeries {
    /// Value at 1-based step `i`, if `i` is within the valid range.
    pub fn get(&self, i: usize) -> Option<f64> {
        if i < self.first_valid || i > self.last_valid {
            None
        } else {
            Some(self.values[i - self.first_valid])
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn require_window(m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidParameter {
            field: "m",
            value: 0.0,
            requirement: "window length must be >= 1",
        });
    }
    Ok(())
}

fn require_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidParameter {
            field: "alpha",
            value: alpha,
            requirement: "must lie in (0, 1]",
        });
    }
    Ok(())
}

fn require_y0(y0: f64) -> Result<()> {
    if !(y0 >= 0.0 && y0 <= 1.0) {
        return Err(Error::InvalidParameter {
            field: "y0",
            value: y0,
            requirement: "must lie in [0, 1]",
        });
    }
    Ok(())
}

/// Causal SMA: `u_i = (1/m) sum_{j=i-m+1..i} x_j`, valid for `i` in `[m, n]`.
pub fn sma_past(series: &OutcomeSeries, m: usize) -> Result<EstimateSeries> {
    require_window(m)?;
    let n = series.len();
    if n < m {
        return Err(Error::InsufficientData {
            required: m,
            actual: n,
        });
    }
    let xs = series.as_slice();
    let m_f = m as f64;
    let mut values = Vec::with_capacity(n - m + 1);
    let mut count: u64 = 0;
    for k in 0..n {
        count += xs[k] as u64;
        if k >= m {
            count -= xs[k - m] as u64;
        }
        if k + 1 >= m {
            values.push(count as f64 / m_f);
        }
    }
    Ok(EstimateSeries {
        values,
        first_valid: m,
        last_valid: n,
        kind: EstimateKind::U,
    })
}

/// Anti-causal SMA: `v_i = (1/m) sum_{j=i+1..i+m} x_j`, valid for `i` in
/// `[1, n-m]`. Identical to the causal SMA shifted by `m`: `v_i = u_{i+m}`.
pub fn sma_future(series: &OutcomeSeries, m: usize) -> Result<EstimateSeries> {
    require_window(m)?;
    let n = series.len();
    if n < m + 1 {
        return Err(Error::InsufficientData {
            required: m + 1,
            actual: n,
        });
    }
    let xs = series.as_slice();
    let m_f = m as f64;
    let mut values = Vec::with_capacity(n - m);
    let mut count: u64 = 0;
    for k in 0..n {
        count += xs[k] as u64;
        if k >= m {
            count -= xs[k - m] as u64;
        }
        // The window ending at step k+1 is the future window of step k+1-m.
        if k + 1 > m {
            values.push(count as f64 / m_f);
        }
    }
    Ok(EstimateSeries {
        values,
        first_valid: 1,
        last_valid: n - m,
        kind: EstimateKind::V,
    })
}

/// Centered target: `z_i = (u_i + v_i) / 2`, valid for `i` in `[m, n-m]`.
///
/// Computed from the two half-window counts so the identity with
/// `(u_i + v_i) / 2` holds bit-for-bit.
pub fn target_centered(series: &OutcomeSeries, m: usize) -> Result<EstimateSeries> {
    require_window(m)?;
    let n = series.len();
    if n < 2 * m {
        return Err(Error::InsufficientData {
            required: 2 * m,
            actual: n,
        });
    }
    let xs = series.as_slice();
    let m_f = m as f64;
    let mut values = Vec::with_capacity(n - 2 * m + 1);
    let mut lead: u64 = 0; // sum over (t, t+m] for t = k-m
    let mut lag: u64 = 0; // sum over (t-m, t]
    for k in 1..=n {
        lead += xs[k - 1] as u64;
        if k > m {
            lead -= xs[k - 1 - m] as u64;
            let t = k - m;
            lag += xs[t - 1] as u64;
            if t > m {
                lag -= xs[t - 1 - m] as u64;
            }
            if t >= m {
                let u = lag as f64 / m_f;
                let v = lead as f64 / m_f;
                values.push((u + v) / 2.0);
            }
        }
    }
    Ok(EstimateSeries {
        values,
        first_valid: m,
        last_valid: n - m,
        kind: EstimateKind::Z,
    })
}

/// One EMA update: `alpha * x + (1 - alpha) * y_prev`.
///
/// Callers guarantee `alpha` in (0, 1] and `x`, `y_prev` in [0, 1]; the
/// result then stays in [0, 1].
#[inline]
pub fn ema_step(y_prev: f64, x: f64, alpha: f64) -> f64 {
    alpha * x + (1.0 - alpha) * y_prev
}

/// Exponential moving average from initial state `y0`, valid for `i` in
/// `[1, n]`.
pub fn ema(series: &OutcomeSeries, alpha: f64, y0: f64) -> Result<EstimateSeries> {
    require_alpha(alpha)?;
    require_y0(y0)?;
    let n = series.len();
    if n == 0 {
        return Err(Error::InsufficientData {
            required: 1,
            actual: 0,
        });
    }
    let mut values = Vec::with_capacity(n);
    let mut y = y0;
    for &x in series.as_slice() {
        y = ema_step(y, x as f64, alpha);
        values.push(y);
    }
    Ok(EstimateSeries {
        values,
        first_valid: 1,
        last_valid: n,
        kind: EstimateKind::Y,
    })
}
