//! Simulation and analysis of frame delivery ratio estimators.
//!
//! A wireless link is modeled as a sequence of independent Bernoulli
//! transmission outcomes whose failure probability may drift over time.
//! Two practical estimators of the delivery ratio are implemented: a
//! simple moving average over the last `m` outcomes and an exponential
//! moving average with smoothing factor `alpha`. Both are judged against
//! a non-causal centered moving average, the best window estimate of the
//! instantaneous delivery ratio at each step.
//!
//! The crate pairs every simulation path with closed-form expectations,
//! so measured error statistics can always be checked against theory:
//!
//! * [`channel`]: failure profiles and the pinned outcome generator
//! * [`filters`]: the SMA, EMA, and centered target series
//! * [`theory`]: closed-form means and variances
//! * [`stats`]: streaming error statistics and grading
//! * [`tracefile`]: trace file and report serialization
//! * [`cli`]: the `fdrlab` command line tool
//!
//! ```
//! use fdrlab::channel::{generate, FailureProfile};
//! use fdrlab::stats::{analyze, AnalysisConfig};
//! use fdrlab::theory::stationary_sma_error_variance;
//!
//! let profile = FailureProfile::stationary(0.2)?;
//! let series = generate(&profile, 50_000, 7)?;
//! let config = AnalysisConfig {
//!     m: 100,
//!     alpha: 0.02,
//!     y0: 1.0,
//!     skip_prefix: 1_000,
//!     skip_postfix: 1_000,
//! };
//! let analysis = analyze(&series, &config)?;
//! let theory = stationary_sma_error_variance(0.2, 100)?;
//! assert!((analysis.d.mse - theory).abs() / theory < 0.25);
//! # Ok::<(), fdrlab::Error>(())
//! ```

pub mod channel;
pub mod cli;
pub mod error;
pub mod filters;
pub mod stats;
pub mod theory;
pub mod tracefile;

pub use channel::{generate, FailureProfile, OutcomeSeries};
pub use error::{Error, Result};
pub use stats::{analyze, AnalysisConfig, Grade, OutcomeAnalysis};
pub use tracefile::{ReportFormat, ReportRow};
