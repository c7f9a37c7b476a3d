//! Agreement between objective metrics and DMOS.
//!
//! SROCC and KROCC use the raw metric values. PLCC and RMSE use the logistic
//! prediction `f(x)` unless raw PLCC is requested.

mod logistic;
mod rank;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::{ConfigId, PvsKey};
use crate::table::{DmosRecord, MetricRecord};
use crate::{Error, Result};

pub use logistic::{fit_logistic, LogisticFit, LogisticParams, MAX_ITERATIONS, RELATIVE_TOLERANCE};
pub use rank::{average_ranks, krocc, pearson, srocc};

/// PLCC between `f(xs)` and `ys` and the root mean squared residual.
pub fn plcc_rmse(xs: &[f64], ys: &[f64], fit: &LogisticParams) -> Result<(f64, f64)> {
    if xs.len() != ys.len() {
        return Err(Error::Mismatch(format!("{} xs vs {} ys", xs.len(), ys.len())));
    }
    let predicted: Vec<f64> = xs.iter().map(|&x| fit.eval(x)).collect();
    let plcc = pearson(&predicted, ys).map_err(|_| Error::Insufficient("zero variance in f(xs)".into()))?;
    Ok((plcc, rmse(&predicted, ys)))
}

fn rmse(predicted: &[f64], ys: &[f64]) -> f64 {
    let ms = predicted.iter().zip(ys).map(|(p, y)| (y - p).powi(2)).sum::<f64>() / ys.len() as f64;
    ms.sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationOptions {
    /// Pool the 4K and REF configurations as well as the coded ones.
    pub include_uncoded: bool,
    /// PLCC on raw metric values instead of the logistic prediction.
    pub plcc_raw: bool,
    pub curve_samples: usize,
}

impl Default for CorrelationOptions {
    fn default() -> Self {
        CorrelationOptions {
            include_uncoded: false,
            plcc_raw: false,
            curve_samples: 101,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterPoint {
    pub scene_id: String,
    pub config: ConfigId,
    pub x: f64,
    pub dmos: f64,
}

/// Fitted curve sample with the `f(x) +/- 2 sigma` band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    pub x: f64,
    pub f: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub metric_id: String,
    pub n: usize,
    pub srocc: f64,
    pub plcc: f64,
    pub krocc: f64,
    pub rmse: f64,
    pub fit: LogisticParams,
    pub fit_converged: bool,
    pub fit_iterations: usize,
    pub residual_std: f64,
    pub scatter: Vec<ScatterPoint>,
    pub curve: Vec<CurveSample>,
}

pub fn correlate(metric_id: &str, scatter: Vec<ScatterPoint>, options: &CorrelationOptions) -> Result<CorrelationReport> {
    let xs: Vec<f64> = scatter.iter().map(|p| p.x).collect();
    let ys: Vec<f64> = scatter.iter().map(|p| p.dmos).collect();
    let fit = fit_logistic(&xs, &ys)?;
    let (fitted_plcc, rmse) = plcc_rmse(&xs, &ys, &fit.params)?;
    let plcc = if options.plcc_raw { pearson(&xs, &ys)? } else { fitted_plcc };
    let sigma = rmse;

    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let samples = options.curve_samples.max(2);
    let curve = (0..samples)
        .map(|i| {
            let x = lo + (hi - lo) * i as f64 / (samples - 1) as f64;
            let f = fit.params.eval(x);
            CurveSample {
                x,
                f,
                lower: f - 2.0 * sigma,
                upper: f + 2.0 * sigma,
            }
        })
        .collect();

    Ok(CorrelationReport {
        metric_id: metric_id.to_string(),
        n: xs.len(),
        srocc: srocc(&xs, &ys)?,
        plcc,
        krocc: krocc(&xs, &ys)?,
        rmse,
        fit: fit.params,
        fit_converged: fit.converged,
        fit_iterations: fit.iterations,
        residual_std: sigma,
        scatter,
        curve,
    })
}

/// One report per metric, pooled over every (scene, config) in the DMOS table.
pub fn correlation_report(
    dmos: &[DmosRecord],
    metrics: &[MetricRecord],
    options: &CorrelationOptions,
) -> Result<Vec<CorrelationReport>> {
    let keep = |c: &ConfigId| options.include_uncoded || c.is_coded();
    let mut dmos_by_key = BTreeMap::new();
    for d in dmos.iter().filter(|d| keep(&d.config)) {
        let key = PvsKey::new(&d.scene, d.config.clone());
        if dmos_by_key.insert(key.clone(), d.dmos).is_some() {
            return Err(Error::Duplicate(format!("DMOS for {key}")));
        }
    }

    let mut per_metric: BTreeMap<&str, BTreeMap<PvsKey, f64>> = BTreeMap::new();
    for m in metrics.iter().filter(|m| keep(&m.config)) {
        let key = m.key();
        if !dmos_by_key.contains_key(&key) {
            return Err(Error::Mismatch(format!("{} value for {key} has no DMOS", m.metric_id)));
        }
        if !m.value.is_finite() {
            return Err(Error::invalid("value", format!("{} for {key} is not finite", m.metric_id)));
        }
        if per_metric.entry(&m.metric_id).or_default().insert(key.clone(), m.value).is_some() {
            return Err(Error::Duplicate(format!("{} value for {key}", m.metric_id)));
        }
    }

    let jobs: Vec<(&str, Vec<ScatterPoint>)> = per_metric
        .into_iter()
        .map(|(metric_id, values)| {
            if let Some(key) = dmos_by_key.keys().find(|k| !values.contains_key(*k)) {
                return Err(Error::Mismatch(format!("{metric_id} has no value for {key}")));
            }
            let scatter = values
                .into_iter()
                .map(|(key, x)| ScatterPoint {
                    dmos: dmos_by_key[&key],
                    scene_id: key.scene_id,
                    config: key.config,
                    x,
                })
                .collect();
            Ok((metric_id, scatter))
        })
        .collect::<Result<_>>()?;

    jobs.into_par_iter()
        .map(|(metric_id, scatter)| correlate(metric_id, scatter, options))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(n: usize, metric: impl Fn(f64) -> f64) -> (Vec<DmosRecord>, Vec<MetricRecord>) {
        let mut d = Vec::new();
        let mut m = Vec::new();
        for i in 0..n {
            let scene = format!("S{}", i / 8);
            let config = ConfigId::coded(if i % 2 == 0 { "HEVC" } else { "VVC" }, (i % 8 / 2 + 1) as u8);
            let dmos = 10.0 + 80.0 * i as f64 / n as f64;
            d.push(DmosRecord {
                scene: scene.clone(),
                config: config.clone(),
                dmos,
            });
            m.push(MetricRecord {
                scene,
                config,
                metric_id: "psnr".into(),
                value: metric(dmos),
            });
        }
        (d, m)
    }

    #[test]
    fn perfect_relation() {
        let p = LogisticParams {
            beta1: 100.0,
            beta2: 0.0,
            beta3: 40.0,
            beta4: 3.0,
        };
        let (mut d, m) = table(48, |y| 30.0 + y / 6.0);
        for (di, mi) in d.iter_mut().zip(&m) {
            di.dmos = p.eval(mi.value);
        }
        let r = &correlation_report(&d, &m, &CorrelationOptions::default()).unwrap()[0];
        assert_eq!(r.srocc, 1.0);
        assert!((r.plcc - 1.0).abs() < 1e-9);
        assert!(r.rmse < 1e-6);
        assert_eq!(r.curve.len(), 101);
    }

    #[test]
    fn uncoded_excluded_by_default() {
        let (mut d, mut m) = table(16, |y| y);
        d.push(DmosRecord {
            scene: "S0".into(),
            config: ConfigId::Reference,
            dmos: 100.0,
        });
        m.push(MetricRecord {
            scene: "S0".into(),
            config: ConfigId::Reference,
            metric_id: "psnr".into(),
            value: f64::INFINITY,
        });
        let r = correlation_report(&d, &m, &CorrelationOptions::default()).unwrap();
        assert_eq!(r[0].n, 16);
        let opts = CorrelationOptions {
            include_uncoded: true,
            ..Default::default()
        };
        assert!(correlation_report(&d, &m, &opts).is_err());
    }

    #[test]
    fn mismatched_keys() {
        let (d, mut m) = table(16, |y| y);
        m.pop();
        assert!(matches!(
            correlation_report(&d, &m, &CorrelationOptions::default()),
            Err(Error::Mismatch(_))
        ));
        let (mut d, m) = table(16, |y| y);
        d.pop();
        assert!(matches!(
            correlation_report(&d, &m, &CorrelationOptions::default()),
            Err(Error::Mismatch(_))
        ));
    }

    #[test]
    fn anticorrelated_linear_fit() {
        // wide, centred logistic is close to linear over the data
        let fit = LogisticParams {
            beta1: 1000.0,
            beta2: -1000.0,
            beta3: 3.0,
            beta4: 1000.0,
        };
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
        let ys = [9.0, 7.0, 8.0, 3.0, 1.0];
        let (plcc, _) = plcc_rmse(&xs, &ys, &fit).unwrap();
        let raw = pearson(&xs, &ys).unwrap();
        assert!(plcc < 0.0);
        assert!((plcc - raw).abs() < 1e-4);
    }
}
