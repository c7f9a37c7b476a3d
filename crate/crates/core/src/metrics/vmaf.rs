//! Ingestion of JSON logs written by the VMAF tool.

use std::path::Path;

use serde_json::Value;

use crate::{Error, Result};

/// Pooled VMAF mean, or the mean of the per-frame scores when no pooled block exists.
pub fn vmaf_from_json(log: &Value) -> Result<f64> {
    let pooled = log
        .get("pooled_metrics")
        .and_then(|p| p.get("vmaf"))
        .and_then(|v| v.get("mean"));
    let score = match pooled {
        Some(mean) => mean
            .as_f64()
            .ok_or_else(|| Error::parse("pooled_metrics.vmaf.mean", "not a number"))?,
        None => {
            let frames = log
                .get("frames")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Missing("vmaf score: neither pooled_metrics.vmaf.mean nor frames".into()))?;
            let mut sum = 0.0;
            for (i, f) in frames.iter().enumerate() {
                sum += f
                    .get("metrics")
                    .and_then(|m| m.get("vmaf"))
                    .and_then(Value::as_f64)
                    .ok_or_else(|| Error::parse(format!("frames[{i}]"), "missing metrics.vmaf"))?;
            }
            if frames.is_empty() {
                return Err(Error::Missing("vmaf score: frames array is empty".into()));
            }
            sum / frames.len() as f64
        }
    };
    if !(0.0..=100.0).contains(&score) {
        return Err(Error::invalid("vmaf", format!("{score} outside [0, 100]")));
    }
    Ok(score)
}

pub fn ingest_vmaf_log(path: impl AsRef<Path>) -> Result<f64> {
    let text = std::fs::read_to_string(path)?;
    let value: Value = serde_json::from_str(&text)?;
    vmaf_from_json(&value)
}
