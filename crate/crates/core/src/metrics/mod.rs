//! Full-reference objective metrics and content descriptors on raw video.

mod psnr;
mod siti;
mod ssim;
mod vmaf;

use std::fmt;
use std::io::Read;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::SceneMeta;
use crate::frame::{FramePlanar, FrameReader};
use crate::{Error, Result};

pub use psnr::{luma_mse, psnr_from_mse, psnr_luma};
pub use siti::{si_ti, spatial_information, temporal_information, SitiAccumulator, SitiResult};
pub use ssim::{
    gaussian_window, ms_ssim_frame, ms_ssim_luma, ssim_luma, ssim_planes, FloatPlane, SsimStats,
    K1, K2, MS_SSIM_MIN_DIM, MS_SSIM_WEIGHTS, SIGMA, WINDOW,
};
pub use vmaf::{ingest_vmaf_log, vmaf_from_json};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricId {
    Psnr,
    Ssim,
    MsSsim,
}

impl MetricId {
    pub fn as_str(self) -> &'static str {
        match self {
            MetricId::Psnr => "psnr",
            MetricId::Ssim => "ssim",
            MetricId::MsSsim => "msssim",
        }
    }
}

impl fmt::Display for MetricId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MetricId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "psnr" => Ok(MetricId::Psnr),
            "ssim" => Ok(MetricId::Ssim),
            "msssim" | "ms-ssim" | "ms_ssim" => Ok(MetricId::MsSsim),
            other => Err(Error::Unknown {
                kind: "metric",
                key: other.to_string(),
            }),
        }
    }
}

/// How per-frame PSNR values are combined into a sequence score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pooling {
    /// Arithmetic mean of finite per-frame values.
    #[default]
    Frame,
    /// PSNR of the MSE averaged over all frames.
    Global,
}

impl FromStr for Pooling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "frame" => Ok(Pooling::Frame),
            "global" => Ok(Pooling::Global),
            other => Err(Error::Unknown {
                kind: "pooling",
                key: other.to_string(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceMetricResult {
    pub metric_id: String,
    #[serde(with = "crate::serde_util::float_vec")]
    pub per_frame: Vec<f64>,
    #[serde(with = "crate::serde_util::float")]
    pub aggregate: f64,
    pub frame_count: usize,
    /// Frames with infinite PSNR, excluded from the mean.
    pub infinite_count: usize,
}

/// Mean of the finite per-frame values; infinite only when every frame is infinite.
pub fn aggregate_frames(metric: MetricId, per_frame: Vec<f64>) -> SequenceMetricResult {
    let finite: Vec<f64> = per_frame.iter().copied().filter(|v| v.is_finite()).collect();
    let infinite_count = per_frame.len() - finite.len();
    let aggregate = if finite.is_empty() {
        if per_frame.is_empty() {
            f64::NAN
        } else {
            f64::INFINITY
        }
    } else {
        finite.iter().sum::<f64>() / finite.len() as f64
    };
    SequenceMetricResult {
        metric_id: metric.to_string(),
        frame_count: per_frame.len(),
        per_frame,
        aggregate,
        infinite_count,
    }
}

pub(crate) fn check_geometry(a: &FramePlanar, b: &FramePlanar) -> Result<()> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(Error::Mismatch(format!(
            "geometry {}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    if a.bit_depth != b.bit_depth {
        return Err(Error::Mismatch(format!(
            "bit depth {} vs {}",
            a.bit_depth, b.bit_depth
        )));
    }
    Ok(())
}

fn frame_value(metric: MetricId, a: &FramePlanar, b: &FramePlanar) -> Result<(f64, f64)> {
    match metric {
        MetricId::Psnr => {
            let mse = luma_mse(a, b)?;
            Ok((psnr_from_mse(mse, a.peak()), mse))
        }
        MetricId::Ssim => Ok((ssim_luma(a, b)?, 0.0)),
        MetricId::MsSsim => Ok((ms_ssim_frame(a, b)?, 0.0)),
    }
}

/// Streams both inputs and computes `metric` per frame.
///
/// Frames are processed in parallel batches; `per_frame` keeps presentation order.
pub fn sequence_metric<R1: Read, R2: Read>(
    reference: R1,
    distorted: R2,
    meta: &SceneMeta,
    metric: MetricId,
    pooling: Pooling,
) -> Result<SequenceMetricResult> {
    let mut ref_frames = FrameReader::new(reference, meta)?;
    let mut dist_frames = FrameReader::new(distorted, meta)?;
    let batch = rayon::current_num_threads().max(1);
    let mut per_frame = Vec::new();
    let mut mses = Vec::new();
    let mut peak = 0.0;
    loop {
        let mut pairs = Vec::with_capacity(batch);
        for _ in 0..batch {
            match (ref_frames.next(), dist_frames.next()) {
                (Some(a), Some(b)) => pairs.push((a?, b?)),
                (None, None) => break,
                (Some(a), None) => {
                    a?;
                    return Err(Error::Mismatch("distorted sequence is shorter than reference".into()));
                }
                (None, Some(b)) => {
                    b?;
                    return Err(Error::Mismatch("reference sequence is shorter than distorted".into()));
                }
            }
        }
        if pairs.is_empty() {
            break;
        }
        peak = pairs[0].0.peak();
        let values = pairs
            .par_iter()
            .map(|(a, b)| frame_value(metric, a, b))
            .collect::<Result<Vec<_>>>()?;
        for (v, mse) in values {
            per_frame.push(v);
            mses.push(mse);
        }
    }
    if per_frame.is_empty() {
        return Err(Error::Insufficient("no frames decoded".into()));
    }
    let mut result = aggregate_frames(metric, per_frame);
    if metric == MetricId::Psnr && pooling == Pooling::Global {
        let mean_mse = mses.iter().sum::<f64>() / mses.len() as f64;
        result.aggregate = psnr_from_mse(mean_mse, peak);
    }
    Ok(result)
}
