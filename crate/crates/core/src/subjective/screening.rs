//! BT.500 observer screening on differential scores.
//!
//! For every (scene, config) population the mean, sample standard deviation and
//! kurtosis coefficient (population moments, m4 / m2^2) are computed. A score is
//! an upper outlier above `mean + k*s` and a lower outlier below `mean - k*s`, with
//! `k = 2` when the population is roughly normal (2 <= kurtosis <= 4) and
//! `k = sqrt(20)` otherwise. An observer is rejected when outliers make up more
//! than 5% of their scores and are not lopsided toward one side.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::catalog::PvsKey;
use crate::subjective::{mean, sample_std, ScoreMatrix};
use crate::{Error, Result};

pub const OUTLIER_FRACTION: f64 = 0.05;
pub const ASYMMETRY_LIMIT: f64 = 0.3;

/// Outlier threshold multiplier for a population's kurtosis coefficient.
pub fn outlier_factor(kurtosis: f64) -> f64 {
    if (2.0..=4.0).contains(&kurtosis) {
        2.0
    } else {
        20f64.sqrt()
    }
}

/// Kurtosis coefficient from population central moments. NaN for a constant population.
pub fn kurtosis(values: &[f64]) -> f64 {
    let m = mean(values);
    let n = values.len() as f64;
    let m2 = values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n;
    let m4 = values.iter().map(|v| (v - m).powi(4)).sum::<f64>() / n;
    if m2 == 0.0 {
        f64::NAN
    } else {
        m4 / (m2 * m2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationScreening {
    pub key: PvsKey,
    pub mean: f64,
    pub stddev: f64,
    pub kurtosis: f64,
    pub factor: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObserverScreening {
    pub observer_id: String,
    /// Scores above the upper threshold.
    pub p: usize,
    /// Scores below the lower threshold.
    pub q: usize,
    /// Number of populations the observer scored.
    pub j: usize,
    pub outlier_ratio: f64,
    pub asymmetry: f64,
    pub rejected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreeningReport {
    pub rejected: Vec<String>,
    pub observers: Vec<ObserverScreening>,
    pub populations: Vec<PopulationScreening>,
}

#[derive(Debug, Clone)]
pub struct ScreeningOutcome {
    pub retained: ScoreMatrix,
    pub report: ScreeningReport,
}

pub fn screen_observers(matrix: &ScoreMatrix) -> Result<ScreeningOutcome> {
    let observers = matrix.observers();
    if observers.len() < 3 {
        return Err(Error::Insufficient(format!(
            "screening needs at least 3 observers, got {}",
            observers.len()
        )));
    }

    let mut populations = Vec::new();
    for (key, scores) in matrix.populations() {
        let values: Vec<f64> = scores.values().copied().collect();
        if values.len() < 2 {
            continue;
        }
        let m = mean(&values);
        let s = sample_std(&values);
        let k = kurtosis(&values);
        let factor = outlier_factor(k);
        populations.push(PopulationScreening {
            key: key.clone(),
            mean: m,
            stddev: s,
            kurtosis: k,
            factor,
            lower: m - factor * s,
            upper: m + factor * s,
        });
    }

    let mut diagnostics = Vec::with_capacity(observers.len());
    for observer in &observers {
        let (mut p, mut q, mut j) = (0, 0, 0);
        for pop in &populations {
            if let Some(v) = matrix.get(&pop.key, observer) {
                j += 1;
                if v > pop.upper {
                    p += 1;
                } else if v < pop.lower {
                    q += 1;
                }
            }
        }
        let outlier_ratio = if j == 0 { 0.0 } else { (p + q) as f64 / j as f64 };
        let asymmetry = if p + q == 0 {
            0.0
        } else {
            (p as f64 - q as f64).abs() / (p + q) as f64
        };
        let rejected = p + q > 0 && outlier_ratio > OUTLIER_FRACTION && asymmetry < ASYMMETRY_LIMIT;
        diagnostics.push(ObserverScreening {
            observer_id: observer.clone(),
            p,
            q,
            j,
            outlier_ratio,
            asymmetry,
            rejected,
        });
    }

    let rejected: BTreeSet<String> = diagnostics
        .iter()
        .filter(|d| d.rejected)
        .map(|d| d.observer_id.clone())
        .collect();
    Ok(ScreeningOutcome {
        retained: matrix.without_observers(&rejected),
        report: ScreeningReport {
            rejected: rejected.into_iter().collect(),
            observers: diagnostics,
            populations,
        },
    })
}
