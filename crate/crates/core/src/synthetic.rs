//! Seeded synthetic vote logs and metric tables for demos and end-to-end tests.

use chrono::{DateTime, Duration, TimeZone, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::catalog::{ConfigId, Pvs};
use crate::session::{SessionPlan, VoteRecord};
use crate::table::MetricRecord;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VoteModel {
    pub observers: usize,
    /// Observers that alternate 0/100 marks regardless of content.
    pub adversarial: usize,
    pub noise_std: f64,
    pub bias_std: f64,
    pub reference_mean: f64,
    pub reference_std: f64,
}

impl Default for VoteModel {
    fn default() -> Self {
        VoteModel {
            observers: 22,
            adversarial: 0,
            noise_std: 6.0,
            bias_std: 3.0,
            reference_mean: 78.0,
            reference_std: 6.0,
        }
    }
}

/// Latent differential score of a PVS: 100 for the reference, lower for stronger impairment.
///
/// The second codec (in `codecs` order) is modelled as closing 40% of the first codec's gap.
pub fn latent_quality(scene_index: usize, config: &ConfigId, codecs: &[String]) -> f64 {
    const GAP: [f64; 4] = [55.0, 35.0, 18.0, 7.0];
    let scene_factor = 0.8 + 0.1 * (scene_index % 5) as f64;
    match config {
        ConfigId::Reference => 100.0,
        ConfigId::Downscaled4K => 100.0 - 4.0 * scene_factor,
        ConfigId::Coded { codec, rate_index } => {
            let gap = GAP[(*rate_index as usize).clamp(1, 4) - 1] * scene_factor;
            let second = codecs.get(1).is_some_and(|c| c == codec);
            100.0 - if second { 0.6 * gap } else { gap }
        }
    }
}

fn scene_indices(catalog: &[Pvs]) -> Vec<String> {
    let mut scenes: Vec<String> = Vec::new();
    for p in catalog {
        if !scenes.contains(&p.scene_id) {
            scenes.push(p.scene_id.clone());
        }
    }
    scenes
}

fn codecs(catalog: &[Pvs]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for c in catalog.iter().filter_map(|p| p.config.codec()) {
        if !out.iter().any(|o| o == c) {
            out.push(c.to_string());
        }
    }
    out
}

fn round1(v: f64) -> f64 {
    (v * 10.0).round() / 10.0
}

pub fn observer_id(i: usize) -> String {
    format!("obs{:02}", i + 1)
}

/// One vote per observer per BTC of the plan.
pub fn synthetic_votes(catalog: &[Pvs], plan: &SessionPlan, model: &VoteModel, seed: u64) -> Result<Vec<VoteRecord>> {
    if model.observers < model.adversarial {
        return Err(Error::invalid("adversarial", "exceeds the observer count"));
    }
    let scenes = scene_indices(catalog);
    let codecs = codecs(catalog);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, model.noise_std).map_err(|e| Error::invalid("noise_std", e.to_string()))?;
    let bias = Normal::new(0.0, model.bias_std).map_err(|e| Error::invalid("bias_std", e.to_string()))?;
    let reference = Normal::new(model.reference_mean, model.reference_std)
        .map_err(|e| Error::invalid("reference_std", e.to_string()))?;
    let start: DateTime<Utc> = Utc.with_ymd_and_hms(2026, 1, 12, 9, 0, 0).single().expect("valid date");
    let btc_ms = (plan.timing.btc_seconds() * 1000.0).round() as i64;

    let honest = model.observers - model.adversarial;
    let mut votes = Vec::with_capacity(model.observers * plan.len());
    for o in 0..model.observers {
        let id = observer_id(o);
        let offset = bias.sample(&mut rng);
        for (position, btc) in plan.btcs().enumerate() {
            let timestamp = start + Duration::milliseconds(btc_ms * position as i64 + rng.random_range(0..1000));
            let (score_a, score_b) = if o >= honest {
                if btc.btc_index % 2 == 0 {
                    (0.0, 100.0)
                } else {
                    (100.0, 0.0)
                }
            } else {
                let scene_index = scenes.iter().position(|s| *s == btc.scene_id).unwrap_or(0);
                let latent = latent_quality(scene_index, &btc.test_config, &codecs);
                let y_ref = reference.sample(&mut rng).clamp(0.0, 100.0);
                let y_test = (y_ref - (100.0 - latent) + offset + noise.sample(&mut rng)).clamp(0.0, 100.0);
                let (y_ref, y_test) = (round1(y_ref), round1(y_test));
                if btc.a_is_reference {
                    (y_ref, y_test)
                } else {
                    (y_test, y_ref)
                }
            };
            votes.push(VoteRecord {
                observer_id: id.clone(),
                btc_index: btc.btc_index,
                score_a,
                score_b,
                timestamp,
            });
        }
    }
    votes.sort_by(|a, b| a.timestamp.cmp(&b.timestamp).then(a.observer_id.cmp(&b.observer_id)));
    Ok(votes)
}

/// PSNR, MS-SSIM and VMAF values tracking the latent quality, with a per-scene offset and small per-PVS noise.
///
/// The reference gets PSNR = inf, MS-SSIM = 1 and VMAF = 100.
pub fn synthetic_metrics(catalog: &[Pvs], seed: u64) -> Vec<MetricRecord> {
    let scenes = scene_indices(catalog);
    let codecs = codecs(catalog);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let offsets: Vec<[f64; 3]> = scenes
        .iter()
        .map(|_| [2.0 * unit.sample(&mut rng), 0.002 * unit.sample(&mut rng), 3.0 * unit.sample(&mut rng)])
        .collect();
    let mut out = Vec::with_capacity(catalog.len() * 3);
    for pvs in catalog {
        let scene_index = scenes.iter().position(|s| *s == pvs.scene_id).unwrap_or(0);
        let latent = latent_quality(scene_index, &pvs.config, &codecs);
        let [dp, dm, dv] = offsets[scene_index];
        let (psnr, msssim, vmaf) = if pvs.config == ConfigId::Reference {
            (f64::INFINITY, 1.0, 100.0)
        } else {
            let mut e = || unit.sample(&mut rng);
            (
                28.0 + dp + 0.14 * latent + 0.15 * e(),
                (0.93 + dm + 0.0007 * latent + 0.0005 * e()).min(1.0),
                (dv + 0.97 * latent + 0.8 * e()).clamp(0.0, 100.0),
            )
        };
        for (metric_id, value) in [("psnr", psnr), ("msssim", msssim), ("vmaf", vmaf)] {
            out.push(MetricRecord {
                scene: pvs.scene_id.clone(),
                config: pvs.config.clone(),
                metric_id: metric_id.to_string(),
                value,
            });
        }
    }
    out
}
