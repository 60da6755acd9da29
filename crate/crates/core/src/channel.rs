//! Transmission outcome simulation.
//!
//! A link is modeled as a Bernoulli process: attempt `i` fails with
//! probability `eps_i` and succeeds (outcome 1) otherwise. The failure
//! probability is given by a [`FailureProfile`], which is either constant,
//! a sinusoidal disturbance around a background level, or an arbitrary
//! per-step table.
//!
//! Generation is fully deterministic and pinned: outcomes come from a
//! ChaCha8 stream seeded with `seed_from_u64`, one draw per step, mapped to
//! a uniform value in [0, 1) by taking the top 53 bits. The outcome rule is
//! `x = 1 iff r >= eps`. This mapping is part of the crate's compatibility
//! contract; changing it would silently invalidate every recorded trace and
//! report, so it must never change.

use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default sampling interval between attempts, in seconds.
pub const DEFAULT_TS_SECONDS: f64 = 0.5;

fn default_ts() -> f64 {
    DEFAULT_TS_SECONDS
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Stationary {
        eps: f64,
        ts_seconds: f64,
    },
    Sinusoidal {
        eps0: f64,
        delta_eps: f64,
        freq_hz: f64,
        ts_seconds: f64,
    },
    Empirical {
        eps_table: Vec<f64>,
        ts_seconds: f64,
    },
}

/// Failure probability as a function of the attempt step.
///
/// Profiles are validated at construction so that every evaluated
/// probability lies in [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProfile", into = "RawProfile")]
pub struct FailureProfile {
    kind: Kind,
}

impl FailureProfile {
    /// Constant failure probability with the default sampling interval.
    pub fn stationary(eps: f64) -> Result<Self> {
        Self::stationary_with_ts(eps, DEFAULT_TS_SECONDS)
    }

    /// Constant failure probability with an explicit sampling interval.
    pub fn stationary_with_ts(eps: f64, ts_seconds: f64) -> Result<Self> {
        require_unit("eps", eps)?;
        require_positive("ts_seconds", ts_seconds)?;
        Ok(Self {
            kind: Kind::Stationary { eps, ts_seconds },
        })
    }

    /// Sinusoidal disturbance `eps0 + delta_eps * cos(2 pi f ts i)`.
    ///
    /// The cosine has zero phase offset at step 0, so evaluation starts at
    /// the crest `eps0 + delta_eps`. The whole excursion must stay inside
    /// [0, 1].
    // TODO: a phase offset parameter would let callers start elsewhere on
    // the cycle; nothing needs it yet.
    pub fn sinusoidal(eps0: f64, delta_eps: f64, freq_hz: f64, ts_seconds: f64) -> Result<Self> {
        require_unit("eps0", eps0)?;
        require_finite("delta_eps", delta_eps)?;
        if delta_eps < 0.0 {
            return Err(Error::InvalidParameter {
                field: "delta_eps",
                value: delta_eps,
                requirement: "must be >= 0",
            });
        }
        if eps0 - delta_eps < 0.0 || eps0 + delta_eps > 1.0 {
            return Err(Error::InvalidParameter {
                field: "delta_eps",
                value: delta_eps,
                requirement: "eps0 - delta_eps and eps0 + delta_eps must stay within [0, 1]",
            });
        }
        require_positive("freq_hz", freq_hz)?;
        require_positive("ts_seconds", ts_seconds)?;
        Ok(Self {
            kind: Kind::Sinusoidal {
                eps0,
                delta_eps,
                freq_hz,
                ts_seconds,
            },
        })
    }

    /// Arbitrary per-step failure probabilities; step `i` reads `eps_table[i]`.
    pub fn empirical(eps_table: Vec<f64>, ts_seconds: f64) -> Result<Self> {
        require_positive("ts_seconds", ts_seconds)?;
        for &e in &eps_table {
            require_unit("eps_table entry", e)?;
        }
        Ok(Self {
            kind: Kind::Empirical {
                eps_table,
                ts_seconds,
            },
        })
    }

    /// Failure probability at evaluation step `i` (0-based).
    ///
    /// Outcome `x_k` of [`generate`] (1-based) uses step `i = k - 1`, so the
    /// first outcome maps to `eps_table[0]` for empirical profiles and to
    /// the zero-phase point of a sinusoid.
    pub fn eval(&self, i: usize) -> Result<f64> {
        match &self.kind {
            Kind::Stationary { eps, .. } => Ok(*eps),
            Kind::Sinusoidal {
                eps0,
                delta_eps,
                freq_hz,
                ts_seconds,
            } => {
                let phase = std::f64::consts::TAU * freq_hz * ts_seconds * (i as f64);
                Ok(eps0 + delta_eps * phase.cos())
            }
            Kind::Empirical { eps_table, .. } => {
                eps_table
                    .get(i)
                    .copied()
                    .ok_or(Error::ProfileIndexOutOfBounds {
                        index: i,
                        len: eps_table.len(),
                    })
            }
        }
    }

    pub fn ts_seconds(&self) -> f64 {
        match &self.kind {
            Kind::Stationary { ts_seconds, .. }
            | Kind::Sinusoidal { ts_seconds, .. }
            | Kind::Empirical { ts_seconds, .. } => *ts_seconds,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match &self.kind {
            Kind::Stationary { .. } => "stationary",
            Kind::Sinusoidal { .. } => "sinusoidal",
            Kind::Empirical { .. } => "empirical",
        }
    }

    /// Background failure probability used for closed-form comparisons:
    /// `eps` for stationary, `eps0` for sinusoidal, the table mean for
    /// empirical profiles.
    pub fn nominal_eps(&self) -> f64 {
        match &self.kind {
            Kind::Stationary { eps, .. } => *eps,
            Kind::Sinusoidal { eps0, .. } => *eps0,
            Kind::Empirical { eps_table, .. } => {
                if eps_table.is_empty() {
                    0.0
                } else {
                    eps_table.iter().sum::<f64>() / eps_table.len() as f64
                }
            }
        }
    }

    /// `(delta_eps, freq_hz)` for report columns; zero for non-sinusoidal
    /// profiles.
    pub fn shape_params(&self) -> (f64, f64) {
        match &self.kind {
            Kind::Sinusoidal {
                delta_eps, freq_hz, ..
            } => (*delta_eps, *freq_hz),
            _ => (0.0, 0.0),
        }
    }

    /// Steps an empirical table can serve; `None` when unbounded.
    pub fn max_steps(&self) -> Option<usize> {
        match &self.kind {
            Kind::Empirical { eps_table, .. } => Some(eps_table.len()),
            _ => None,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawProfile {
    Stationary {
        eps: f64,
        #[serde(default = "default_ts")]
        ts_seconds: f64,
    },
    Sinusoidal {
        eps0: f64,
        delta_eps: f64,
        freq_hz: f64,
        #[serde(default = "default_ts")]
        ts_seconds: f64,
    },
    Empirical {
        eps_table: Vec<f64>,
        #[serde(default = "default_ts")]
        ts_seconds: f64,
    },
}

impl TryFrom<RawProfile> for FailureProfile {
    type Error = Error;

    fn try_from(raw: RawProfile) -> Result<Self> {
        match raw {
            RawProfile::Stationary { eps, ts_seconds } => {
                require_unit("eps", eps)?;
                require_positive("ts_seconds", ts_seconds)?;
                Ok(Self {
                    kind: Kind::Stationary { eps, ts_seconds },
                })
            }
            RawProfile::Sinusoidal {
                eps0,
                delta_eps,
                freq_hz,
                ts_seconds,
            } => FailureProfile::sinusoidal(eps0, delta_eps, freq_hz, ts_seconds),
            RawProfile::Empirical {
                eps_table,
                ts_seconds,
            } => FailureProfile::empirical(eps_table, ts_seconds),
        }
    }
}

impl From<FailureProfile> for RawProfile {
    fn from(p: FailureProfile) -> Self {
        match p.kind {
            Kind::Stationary { eps, ts_seconds } => RawProfile::Stationary { eps, ts_seconds },
            Kind::Sinusoidal {
                eps0,
                delta_eps,
                freq_hz,
                ts_seconds,
            } => RawProfile::Sinusoidal {
                eps0,
                delta_eps,
                freq_hz,
                ts_seconds,
            },
            Kind::Empirical {
                eps_table,
                ts_seconds,
            } => RawProfile::Empirical {
                eps_table,
                ts_seconds,
            },
        }
    }
}

/// Where a series of outcomes came from.
#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    /// Generated in-process from a profile.
    Synthetic(FailureProfile),
    /// Ingested from a trace file.
    External { ts_seconds: f64, source: String },
}

/// A sequence of transmission outcomes (1 = delivered, 0 = lost).
///
/// Outcomes are logically 1-based: `x_1` is the first attempt. Storage is a
/// plain byte per outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeSeries {
    outcomes: Vec<u8>,
    seed: Option<u64>,
    provenance: Provenance,
}

impl OutcomeSeries {
    /// Wrap outcomes ingested from outside; every byte must be 0 or 1.
    pub fn from_external(
        outcomes: Vec<u8>,
        ts_seconds: f64,
        source: impl Into<String>,
    ) -> Result<Self> {
        require_positive("ts_seconds", ts_seconds)?;
        if let Some(pos) = outcomes.iter().position(|&b| b > 1) {
            return Err(Error::Config(format!(
                "outcome {} is {}, expected 0 or 1",
                pos + 1,
                outcomes[pos]
            )));
        }
        Ok(Self {
            outcomes,
            seed: None,
            provenance: Provenance::External {
                ts_seconds,
                source: source.into(),
            },
        })
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.outcomes
    }

    /// Outcome `x_i` for 1-based `i`.
    pub fn get(&self, i: usize) -> Option<u8> {
        if i == 0 {
            None
        } else {
            self.outcomes.get(i - 1).copied()
        }
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn ts_seconds(&self) -> f64 {
        match &self.provenance {
            Provenance::Synthetic(p) => p.ts_seconds(),
            Provenance::External { ts_seconds, .. } => *ts_seconds,
        }
    }

    /// Human-readable origin, written into the trace header.
    pub fn source_label(&self) -> String {
        match &self.provenance {
            Provenance::Synthetic(p) => match self.seed {
                Some(seed) => format!("synthetic {} seed={}", p.kind_name(), seed),
                None => format!("synthetic {}", p.kind_name()),
            },
            Provenance::External { source, .. } => source.clone(),
        }
    }

    pub fn successes(&self) -> u64 {
        self.outcomes.iter().map(|&b| b as u64).sum()
    }

    /// Fraction of lost frames, `1 - successes / n`.
    pub fn empirical_failure_rate(&self) -> f64 {
        if self.outcomes.is_empty() {
            0.0
        } else {
            (self.len() as u64 - self.successes()) as f64 / self.len() as f64
        }
    }
}

/// Map a raw 64-bit draw to a uniform f64 in [0, 1) using the top 53 bits.
#[inline]
fn unit_f64(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Generate `n` outcomes under `profile` from the pinned deterministic
/// generator.
///
/// Outcome `x_k` (1-based) is 1 iff the k-th draw `r_k >= profile.eval(k-1)`.
/// Generation is prefix-stable: the first `n` outcomes for a given seed do
/// not depend on how many more are requested.
pub fn generate(profile: &FailureProfile, n: usize, seed: u64) -> Result<OutcomeSeries> {
    if let Some(len) = profile.max_steps() {
        if n > len {
            return Err(Error::ProfileIndexOutOfBounds { index: n - 1, len });
        }
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut outcomes = Vec::with_capacity(n);
    for k in 0..n {
        let eps = profile.eval(k)?;
        let r = unit_f64(rng.next_u64());
        outcomes.push(u8::from(r >= eps));
    }
    Ok(OutcomeSeries {
        outcomes,
        seed: Some(seed),
        provenance: Provenance::Synthetic(profile.clone()),
    })
}

fn require_finite(field: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            field,
            value,
            requirement: "must be finite",
        })
    }
}

fn require_unit(field: &'static str, value: f64) -> Result<()> {
    require_finite(field, value)?;
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            field,
            value,
            requirement: "must lie in [0, 1]",
        })
    }
}

fn require_positive(field: &'static str, value: f64) -> Result<()> {
    require_finite(field, value)?;
    if value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            field,
            value,
            requirement: "must be > 0",
        })
    }
}
