use serde::{Deserialize, Serialize};

use crate::catalog::ConfigId;
use crate::subjective::{mean, sample_std, ScoreMatrix};
use crate::{Error, Result};

/// Normal-approximation multiplier of the 95% confidence interval.
pub const Z_95: f64 = 1.96;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DmosResult {
    pub scene_id: String,
    pub config: ConfigId,
    pub dmos: f64,
    pub stddev: f64,
    pub ci95_half_width: f64,
    pub n: usize,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl DmosResult {
    /// Summary of one score population.
    pub fn from_scores(scene_id: &str, config: ConfigId, scores: &[f64]) -> Result<Self> {
        let n = scores.len();
        if n < 2 {
            return Err(Error::Insufficient(format!(
                "DMOS for {scene_id}/{config} needs n >= 2, got {n}"
            )));
        }
        let dmos = mean(scores);
        let stddev = sample_std(scores);
        let c = Z_95 * stddev / (n as f64).sqrt();
        Ok(DmosResult {
            scene_id: scene_id.to_string(),
            config,
            dmos,
            stddev,
            ci95_half_width: c,
            n,
            ci_low: dmos - c,
            ci_high: dmos + c,
        })
    }
}

pub fn dmos(matrix: &ScoreMatrix) -> Result<Vec<DmosResult>> {
    matrix
        .populations()
        .map(|(key, p)| {
            let scores: Vec<f64> = p.values().copied().collect();
            DmosResult::from_scores(&key.scene_id, key.config.clone(), &scores)
        })
        .collect()
}
