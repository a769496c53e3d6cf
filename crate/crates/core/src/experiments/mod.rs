//! Ensemble studies: mean/std approximation-ratio curves, the critical time
//! step below which the mean curve rises monotonically, layers needed to reach
//! a target ratio, and linear fits of that depth against graph size.

mod critical;
mod ensemble;
mod fit;
mod output;
mod studies;

pub use critical::{bracket_dt_c, find_dt_c, CriticalDt, CriticalSearch};
pub use ensemble::{ensemble_curve, is_monotone, probe_monotone, standard_ensemble, EnsembleCurve, EnsembleKind};
pub use fit::{fit_line, ScalingFit};
pub use output::{
    curve_file_name, write_curve_csv, write_scaling_csv, Summary, SummaryDtC, SummarySaturation, SummarySlope,
    SummaryThreshold,
};
pub use studies::{
    appendix_study, layers_to_threshold, scaling_study, AppendixPair, ScalingOptions, ScalingReport, ScalingRow,
};

/// Approximation ratio guaranteed by the Goemans-Williamson algorithm.
pub const R_GW: f64 = 0.932;

/// Default slack for the monotonicity predicate.
pub const DEFAULT_ETA: f64 = 1e-6;
