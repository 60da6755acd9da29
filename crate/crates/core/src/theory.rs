//! Closed-form moments for the estimators and their error processes.
//!
//! For a stationary failure probability `eps`, with `Var(x) = eps (1 - eps)`:
//!
//! * centered target:  `E[z] = 1 - eps`, `Var(z) = Var(x) / 2m`
//! * causal SMA error `d = z - u`:  `Var(d) = Var(x) / 2m`
//! * EMA steady state: `Var(y) = Var(x) alpha / (2 - alpha)`
//! * EMA error `e = z - y`:
//!   `Var(e) = Var(x) [alpha/(2-alpha) + (1-alpha)^m / m - 1/(2m)]`
//! * EMA transient from `y_0`:
//!   `E[y_i] = (1-eps) + beta^i (y_0 - (1-eps))`,
//!   `Var(y_i) = Var(x) (1 - beta^{2i}) (1-beta)/(1+beta)`, `beta = 1-alpha`.
//!
//! The matched memory setting `alpha = 2/m` gives the SMA and the EMA the
//! same steady-state estimator variance.
//!
//! For arbitrary profiles the per-step moments follow from independence of
//! the outcomes: window variances are scaled sums of `eps_j (1 - eps_j)`
//! and the EMA moments satisfy one-step recursions. The target variance
//! over a window of length `L = 2m` also decomposes as
//! `Var(z) = [mean(eps)(1 - mean(eps)) - s2(eps)] / 2m`, which shows any
//! in-window variation of `eps` strictly lowers it.

use crate::channel::FailureProfile;
use crate::error::{Error, Result};
use crate::filters::EstimateKind;

/// `beta^k` for `beta = 1 - alpha`, stable for tiny `alpha` and huge `k`.
fn beta_pow(alpha: f64, k: f64) -> f64 {
    if k == 0.0 {
        1.0
    } else {
        ((-alpha).ln_1p() * k).exp()
    }
}

fn require_eps(eps: f64) -> Result<()> {
    if !(eps >= 0.0 && eps <= 1.0) {
        return Err(Error::InvalidParameter {
            field: "eps",
            value: eps,
            requirement: "must lie in [0, 1]",
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

fn require_m(m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidParameter {
            field: "m",
            value: 0.0,
            requirement: "window length must be >= 1",
        });
    }
    Ok(())
}

/// Per-outcome variance `eps (1 - eps)`.
pub fn var_x(eps: f64) -> Result<f64> {
    require_eps(eps)?;
    Ok(eps * (1.0 - eps))
}

/// Variance of the SMA error `d = z - u` under a stationary profile.
pub fn stationary_sma_error_variance(eps: f64, m: usize) -> Result<f64> {
    require_m(m)?;
    Ok(var_x(eps)? / (2.0 * m as f64))
}

/// Variance of the EMA error `e = z - y` under a stationary profile.
pub fn stationary_ema_error_variance(eps: f64, m: usize, alpha: f64) -> Result<f64> {
    require_m(m)?;
    require_alpha(alpha)?;
    let m_f = m as f64;
    let bracket = alpha / (2.0 - alpha) + beta_pow(alpha, m_f) / m_f - 1.0 / (2.0 * m_f);
    Ok(var_x(eps)? * bracket)
}

/// Steady-state EMA variance `Var(x) alpha / (2 - alpha)`.
pub fn stationary_ema_steady_variance(eps: f64, alpha: f64) -> Result<f64> {
    require_alpha(alpha)?;
    Ok(var_x(eps)? * alpha / (2.0 - alpha))
}

/// Mean and variance of the EMA at step `i`, starting from state `y0`.
///
/// `i = 0` returns the initial state `(y0, 0)` exactly; as `i` grows the
/// moments converge to the steady-state values.
pub fn ema_transient(eps: f64, alpha: f64, y0: f64, i: u64) -> Result<(f64, f64)> {
    require_eps(eps)?;
    require_alpha(alpha)?;
    if !(y0 >= 0.0 && y0 <= 1.0) {
        return Err(Error::InvalidParameter {
            field: "y0",
            value: y0,
            requirement: "must lie in [0, 1]",
        });
    }
    let ex = 1.0 - eps;
    let mean = ex + beta_pow(alpha, i as f64) * (y0 - ex);
    let var = var_x(eps)? * (1.0 - beta_pow(alpha, 2.0 * i as f64)) * (alpha / (2.0 - alpha));
    Ok((mean, var))
}

/// Memory-matching smoothing factor `alpha = 2/m`.
///
/// Needs `m >= 2`; smaller windows would put `alpha` above 1.
pub fn matched_alpha(m: usize) -> Result<f64> {
    if m < 2 {
        return Err(Error::InvalidParameter {
            field: "m",
            value: m as f64,
            requirement: "matched alpha = 2/m needs m >= 2",
        });
    }
    Ok(2.0 / m as f64)
}

/// Target variance over one explicit `eps` window, with the decomposition
/// terms that express it through the window mean and spread.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetVarianceDecomposition {
    /// `(1/L^2) sum eps_j (1 - eps_j)` for the window of length `L`.
    pub var_z: f64,
    /// Window mean of `eps`.
    pub mean_eps: f64,
    /// Uncorrected window variance of `eps`.
    pub s2_eps: f64,
}

/// Decompose the target variance for the window of per-step failure
/// probabilities that a single `z` value averages over (length `2m`).
///
/// Satisfies `var_z = [mean(1 - mean) - s2] / L` identically, so a window
/// with any spread has a strictly smaller target variance than a constant
/// window with the same mean.
pub fn target_variance_decomposition(eps_window: &[f64]) -> Result<TargetVarianceDecomposition> {
    if eps_window.is_empty() {
        return Err(Error::InsufficientData {
            required: 1,
            actual: 0,
        });
    }
    for &e in eps_window {
        require_eps(e)?;
    }
    let len = eps_window.len() as f64;
    let sum: f64 = eps_window.iter().sum();
    let sum_sq: f64 = eps_window.iter().map(|&e| e * e).sum();
    let sum_bern: f64 = eps_window.iter().map(|&e| e * (1.0 - e)).sum();
    let mean_eps = sum / len;
    Ok(TargetVarianceDecomposition {
        var_z: sum_bern / (len * len),
        mean_eps,
        s2_eps: sum_sq / len - mean_eps * mean_eps,
    })
}

/// Per-step theoretical mean and variance of one estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSeries {
    pub kind: EstimateKind,
    /// 1-based step of `means[0]` / `variances[0]`.
    pub first_step: usize,
    pub means: Vec<f64>,
    pub variances: Vec<f64>,
}

impl MomentSeries {
    pub fn get(&self, i: usize) -> Option<(f64, f64)> {
        if i < self.first_step {
            return None;
        }
        let k = i - self.first_step;
        Some((*self.means.get(k)?, *self.variances.get(k)?))
    }
}

/// Theoretical moments of U, Z, and Y over a step range.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileMoments {
    pub u: MomentSeries,
    pub z: MomentSeries,
    pub y: MomentSeries,
}

/// Evaluate per-step moments of the estimators under `profile` for steps
/// `first ..= last` (1-based, `first >= m` so the causal window fits).
///
/// U and Z come from window sums of `E[x_j]` and `Var(x_j)`; Y follows the
/// one-step recursions `E[y_i] = beta E[y_{i-1}] + alpha E[x_i]` and
/// `Var(y_i) = beta^2 Var(y_{i-1}) + alpha^2 Var(x_i)` from `(y0, 0)`.
/// Empirical profiles must cover steps up to `last + m` (the Z window).
pub fn profile_moments(
    profile: &FailureProfile,
    first: usize,
    last: usize,
    m: usize,
    alpha: f64,
    y0: f64,
) -> Result<ProfileMoments> {
    require_m(m)?;
    require_alpha(alpha)?;
    if first < m || first == 0 {
        return Err(Error::InvalidParameter {
            field: "first_step",
            value: first as f64,
            requirement: "must be >= m so the causal window fits",
        });
    }
    if last < first {
        return Err(Error::InvalidParameter {
            field: "last_step",
            value: last as f64,
            requirement: "must be >= first_step",
        });
    }

    // Outcome step j (1-based) reads profile step j-1. Z at `last` looks
    // ahead to outcome last + m.
    let lo = first - m + 1;
    let hi = last + m;
    let count = last - first + 1;
    let m_f = m as f64;

    let mut ex = Vec::with_capacity(hi - lo + 1);
    let mut vx = Vec::with_capacity(hi - lo + 1);
    for j in lo..=hi {
        let eps = profile.eval(j - 1)?;
        ex.push(1.0 - eps);
        vx.push(eps * (1.0 - eps));
    }
    let at = |j: usize| j - lo; // logical step -> local offset

    let mut u_means = Vec::with_capacity(count);
    let mut u_vars = Vec::with_capacity(count);
    let mut z_means = Vec::with_capacity(count);
    let mut z_vars = Vec::with_capacity(count);

    // Rolling sums over the causal window (i-m, i] and the centered window
    // (i-m, i+m].
    let mut u_sum_e: f64 = ex[at(first - m + 1)..=at(first)].iter().sum();
    let mut u_sum_v: f64 = vx[at(first - m + 1)..=at(first)].iter().sum();
    let mut z_sum_e: f64 = ex[at(first - m + 1)..=at(first + m)].iter().sum();
    let mut z_sum_v: f64 = vx[at(first - m + 1)..=at(first + m)].iter().sum();
    for i in first..=last {
        if i > first {
            u_sum_e += ex[at(i)] - ex[at(i - m)];
            u_sum_v += vx[at(i)] - vx[at(i - m)];
            z_sum_e += ex[at(i + m)] - ex[at(i - m)];
            z_sum_v += vx[at(i + m)] - vx[at(i - m)];
        }
        u_means.push(u_sum_e / m_f);
        u_vars.push(u_sum_v / (m_f * m_f));
        z_means.push(z_sum_e / (2.0 * m_f));
        z_vars.push(z_sum_v / (4.0 * m_f * m_f));
    }

    let beta = 1.0 - alpha;
    let mut y_means = Vec::with_capacity(count);
    let mut y_vars = Vec::with_capacity(count);
    let mut y_mean = y0;
    let mut y_var = 0.0;
    for j in 1..=last {
        let eps = profile.eval(j - 1)?;
        y_mean = beta * y_mean + alpha * (1.0 - eps);
        y_var = beta * beta * y_var + alpha * alpha * eps * (1.0 - eps);
        if j >= first {
            y_means.push(y_mean);
            y_vars.push(y_var);
        }
    }

    Ok(ProfileMoments {
        u: MomentSeries {
            kind: EstimateKind::U,
            first_step: first,
            means: u_means,
            variances: u_vars,
        },
        z: MomentSeries {
            kind: EstimateKind::Z,
            first_step: first,
            means: z_means,
            variances: z_vars,
        },
        y: MomentSeries {
            kind: EstimateKind::Y,
            first_step: first,
            means: y_means,
            variances: y_vars,
        },
    })
}

/// Closed-form summary for one stationary configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct TheoryReport {
    pub eps: f64,
    pub m: usize,
    pub alpha: f64,
    pub y0: f64,
    pub var_x: f64,
    /// Target mean `E[z] = 1 - eps`.
    pub e_z: f64,
    pub var_u: f64,
    pub var_z: f64,
    pub var_y_steady: f64,
    pub var_d: f64,
    pub var_e: f64,
}

impl TheoryReport {
    pub fn stationary(eps: f64, m: usize, alpha: f64, y0: f64) -> Result<Self> {
        require_m(m)?;
        if !(y0 >= 0.0 && y0 <= 1.0) {
            return Err(Error::InvalidParameter {
                field: "y0",
                value: y0,
                requirement: "must lie in [0, 1]",
            });
        }
        let vx = var_x(eps)?;
        Ok(TheoryReport {
            eps,
            m,
            alpha,
            y0,
            var_x: vx,
            e_z: 1.0 - eps,
            var_u: vx / m as f64,
            var_z: vx / (2.0 * m as f64),
            var_y_steady: stationary_ema_steady_variance(eps, alpha)?,
            var_d: stationary_sma_error_variance(eps, m)?,
            var_e: stationary_ema_error_variance(eps, m, alpha)?,
        })
    }
}
