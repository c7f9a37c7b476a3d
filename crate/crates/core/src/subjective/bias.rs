//! Single-pass P.913 observer bias removal.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::subjective::{mean, ScoreMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObserverBias {
    pub observer_id: String,
    pub bias: f64,
}

/// Mean deviation of each observer from the per-population means.
pub fn observer_biases(matrix: &ScoreMatrix) -> Vec<ObserverBias> {
    let means: BTreeMap<_, f64> = matrix
        .populations()
        .map(|(k, p)| (k.clone(), mean(&p.values().copied().collect::<Vec<_>>())))
        .collect();
    matrix
        .observers()
        .into_iter()
        .map(|observer| {
            let deviations: Vec<f64> = matrix
                .observer_entries(&observer)
                .map(|(k, v)| v - means[k])
                .collect();
            ObserverBias {
                bias: mean(&deviations),
                observer_id: observer,
            }
        })
        .collect()
}

/// Subtracts each observer's bias from all of that observer's scores.
pub fn remove_bias(matrix: &ScoreMatrix) -> ScoreMatrix {
    let biases: BTreeMap<String, f64> = observer_biases(matrix)
        .into_iter()
        .map(|b| (b.observer_id, b.bias))
        .collect();
    matrix.map_scores(|_, observer, v| v - biases[observer])
}
