//! From raw DSCQS votes to screened, bias-corrected DMOS and significance tests.

mod bias;
mod dmos;
mod matrix;
mod screening;
mod significance;
mod ttest;
pub mod votes;

pub use bias::{observer_biases, remove_bias, ObserverBias};
pub use dmos::{dmos, DmosResult, Z_95};
pub use matrix::{differential_score, differential_scores, ScoreMatrix};
pub use screening::{
    kurtosis, outlier_factor, screen_observers, ObserverScreening, PopulationScreening, ScreeningOutcome,
    ScreeningReport, ASYMMETRY_LIMIT, OUTLIER_FRACTION,
};
pub use significance::{
    significance_matrix, SignificanceCell, SignificanceLayout, SignificanceMatrix, SIGNIFICANCE_LEVEL,
};
pub use ttest::{welch_t_test, TTestResult};
pub use votes::VoteRecord;

pub(crate) fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Unbiased (n - 1) variance.
pub(crate) fn sample_variance(values: &[f64]) -> f64 {
    let m = mean(values);
    values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (values.len() - 1) as f64
}

pub(crate) fn sample_std(values: &[f64]) -> f64 {
    sample_variance(values).sqrt()
}
