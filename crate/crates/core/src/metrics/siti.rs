//! Spatial and temporal information.
//!
//! Luma is rescaled to the 8-bit range first (10-bit samples divided by 4).
//! SI of a frame is the population standard deviation of the 3x3 Sobel gradient
//! magnitude over interior pixels; TI is the population standard deviation of the
//! difference to the previous frame over all pixels. Sequence values are maxima.

use serde::{Deserialize, Serialize};

use crate::frame::FramePlanar;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SitiResult {
    pub si: f64,
    pub ti: f64,
    pub per_frame_si: Vec<f64>,
    pub per_frame_ti: Vec<f64>,
}

fn normalized_luma(frame: &FramePlanar) -> Vec<f64> {
    let scale = (1u32 << (frame.bit_depth - 8)) as f64;
    frame.luma.data.iter().map(|&v| v as f64 / scale).collect()
}

fn population_std(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let (n, sum) = values.clone().fold((0usize, 0.0), |(n, s), v| (n + 1, s + v));
    if n == 0 {
        return 0.0;
    }
    let mean = sum / n as f64;
    let ss: f64 = values.map(|v| (v - mean) * (v - mean)).sum();
    (ss / n as f64).sqrt()
}

pub fn spatial_information(frame: &FramePlanar) -> Result<f64> {
    let (w, h) = (frame.width(), frame.height());
    if w < 3 || h < 3 {
        return Err(Error::Insufficient(format!("{w}x{h} frame has no interior for Sobel")));
    }
    let p = normalized_luma(frame);
    let mut mags = Vec::with_capacity((w - 2) * (h - 2));
    for y in 1..h - 1 {
        let up = &p[(y - 1) * w..y * w];
        let mid = &p[y * w..(y + 1) * w];
        let dn = &p[(y + 1) * w..(y + 2) * w];
        for x in 1..w - 1 {
            let gx = (up[x + 1] + 2.0 * mid[x + 1] + dn[x + 1]) - (up[x - 1] + 2.0 * mid[x - 1] + dn[x - 1]);
            let gy = (dn[x - 1] + 2.0 * dn[x] + dn[x + 1]) - (up[x - 1] + 2.0 * up[x] + up[x + 1]);
            mags.push((gx * gx + gy * gy).sqrt());
        }
    }
    Ok(population_std(mags.iter().copied()))
}

pub fn temporal_information(previous: &FramePlanar, current: &FramePlanar) -> Result<f64> {
    if previous.width() != current.width() || previous.height() != current.height() || previous.bit_depth != current.bit_depth {
        return Err(Error::Mismatch("frames differ in geometry".into()));
    }
    let a = normalized_luma(previous);
    let b = normalized_luma(current);
    Ok(population_std(a.iter().zip(&b).map(|(p, c)| c - p)))
}

/// Streaming SI/TI accumulator; holds only the previous frame.
#[derive(Debug, Default)]
pub struct SitiAccumulator {
    previous: Option<FramePlanar>,
    per_frame_si: Vec<f64>,
    per_frame_ti: Vec<f64>,
}

impl SitiAccumulator {
    pub fn push(&mut self, frame: FramePlanar) -> Result<()> {
        self.per_frame_si.push(spatial_information(&frame)?);
        if let Some(prev) = &self.previous {
            self.per_frame_ti.push(temporal_information(prev, &frame)?);
        }
        self.previous = Some(frame);
        Ok(())
    }

    pub fn finish(self) -> Result<SitiResult> {
        if self.per_frame_si.is_empty() {
            return Err(Error::Insufficient("empty sequence".into()));
        }
        if self.per_frame_ti.is_empty() {
            return Err(Error::Insufficient("TI needs at least 2 frames".into()));
        }
        let max = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(SitiResult {
            si: max(&self.per_frame_si),
            ti: max(&self.per_frame_ti),
            per_frame_si: self.per_frame_si,
            per_frame_ti: self.per_frame_ti,
        })
    }
}

pub fn si_ti(frames: &[FramePlanar]) -> Result<SitiResult> {
    let mut acc = SitiAccumulator::default();
    for f in frames {
        acc.push(f.clone())?;
    }
    acc.finish()
}
