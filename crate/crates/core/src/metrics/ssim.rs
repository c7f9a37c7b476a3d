//! Luma SSIM and five-scale MS-SSIM.
//!
//! Local statistics use an 11x11 Gaussian window (sigma 1.5) evaluated only at
//! positions where the window fits entirely inside the plane. The mean of the
//! SSIM map is the frame score.

use rayon::prelude::*;

use crate::frame::FramePlanar;
use crate::metrics::{aggregate_frames, check_geometry, MetricId, SequenceMetricResult};
use crate::{Error, Result};

pub const WINDOW: usize = 11;
pub const SIGMA: f64 = 1.5;
pub const K1: f64 = 0.01;
pub const K2: f64 = 0.03;

/// Canonical five-scale exponents, finest scale first.
pub const MS_SSIM_WEIGHTS: [f64; 5] = [0.0448, 0.2856, 0.3001, 0.2363, 0.1333];

const ROW_BLOCK: usize = 64;

pub fn gaussian_window() -> [f64; WINDOW] {
    let mut w = [0.0; WINDOW];
    let c = (WINDOW / 2) as f64;
    for (i, v) in w.iter_mut().enumerate() {
        let d = i as f64 - c;
        *v = (-d * d / (2.0 * SIGMA * SIGMA)).exp();
    }
    let sum: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= sum);
    w
}

/// Mean SSIM and mean contrast-structure term of two equally sized planes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsimStats {
    pub ssim: f64,
    pub cs: f64,
}

/// A plane of floating-point samples.
#[derive(Debug, Clone)]
pub struct FloatPlane {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl FloatPlane {
    pub fn luma(frame: &FramePlanar) -> Self {
        FloatPlane {
            width: frame.width(),
            height: frame.height(),
            data: frame.luma.to_f64(),
        }
    }

    /// 2x2 box average, dropping a trailing odd row/column.
    pub fn downsample(&self) -> Self {
        let (w, h) = (self.width / 2, self.height / 2);
        let mut data = Vec::with_capacity(w * h);
        for y in 0..h {
            let r0 = &self.data[2 * y * self.width..];
            let r1 = &self.data[(2 * y + 1) * self.width..];
            for x in 0..w {
                data.push((r0[2 * x] + r0[2 * x + 1] + r1[2 * x] + r1[2 * x + 1]) * 0.25);
            }
        }
        FloatPlane {
            width: w,
            height: h,
            data,
        }
    }
}

/// Horizontally filtered moments of one input row: x, y, x², y², xy.
fn filter_row(a: &[f64], b: &[f64], kernel: &[f64; WINDOW], out: &mut [[f64; 5]]) {
    for (ox, slot) in out.iter_mut().enumerate() {
        let mut acc = [0.0; 5];
        for (k, &w) in kernel.iter().enumerate() {
            let x = a[ox + k];
            let y = b[ox + k];
            acc[0] += w * x;
            acc[1] += w * y;
            acc[2] += w * x * x;
            acc[3] += w * y * y;
            acc[4] += w * x * y;
        }
        *slot = acc;
    }
}

pub fn ssim_planes(a: &FloatPlane, b: &FloatPlane, peak: f64) -> Result<SsimStats> {
    if a.width != b.width || a.height != b.height {
        return Err(Error::Mismatch(format!(
            "plane {}x{} vs {}x{}",
            a.width, a.height, b.width, b.height
        )));
    }
    if a.width < WINDOW || a.height < WINDOW {
        return Err(Error::Insufficient(format!(
            "plane {}x{} smaller than {WINDOW}x{WINDOW} window",
            a.width, a.height
        )));
    }
    let kernel = gaussian_window();
    let c1 = (K1 * peak).powi(2);
    let c2 = (K2 * peak).powi(2);
    let ow = a.width - WINDOW + 1;
    let oh = a.height - WINDOW + 1;
    let w = a.width;

    let blocks: Vec<(f64, f64)> = (0..oh.div_ceil(ROW_BLOCK))
        .into_par_iter()
        .map(|blk| {
            let y0 = blk * ROW_BLOCK;
            let y1 = (y0 + ROW_BLOCK).min(oh);
            let rows = y1 - y0 + WINDOW - 1;
            let mut horiz = vec![[0.0; 5]; rows * ow];
            for r in 0..rows {
                let src = (y0 + r) * w;
                filter_row(
                    &a.data[src..src + w],
                    &b.data[src..src + w],
                    &kernel,
                    &mut horiz[r * ow..(r + 1) * ow],
                );
            }
            let mut sum_ssim = 0.0;
            let mut sum_cs = 0.0;
            for oy in 0..(y1 - y0) {
                for ox in 0..ow {
                    let mut m = [0.0; 5];
                    for (k, &wk) in kernel.iter().enumerate() {
                        let h = &horiz[(oy + k) * ow + ox];
                        for c in 0..5 {
                            m[c] += wk * h[c];
                        }
                    }
                    let (mx, my) = (m[0], m[1]);
                    let vx = m[2] - mx * mx;
                    let vy = m[3] - my * my;
                    let cov = m[4] - mx * my;
                    let cs = (2.0 * cov + c2) / (vx + vy + c2);
                    let l = (2.0 * mx * my + c1) / (mx * mx + my * my + c1);
                    sum_ssim += l * cs;
                    sum_cs += cs;
                }
            }
            (sum_ssim, sum_cs)
        })
        .collect();
    let n = (ow * oh) as f64;
    let (s, c) = blocks
        .iter()
        .fold((0.0, 0.0), |acc, &(s, c)| (acc.0 + s, acc.1 + c));
    Ok(SsimStats { ssim: s / n, cs: c / n })
}

/// Mean luma SSIM with dynamic range `2^bit_depth - 1`.
pub fn ssim_luma(reference: &FramePlanar, distorted: &FramePlanar) -> Result<f64> {
    check_geometry(reference, distorted)?;
    if reference.luma == distorted.luma && reference.width() >= WINDOW && reference.height() >= WINDOW {
        return Ok(1.0);
    }
    let stats = ssim_planes(
        &FloatPlane::luma(reference),
        &FloatPlane::luma(distorted),
        reference.peak(),
    )?;
    Ok(stats.ssim)
}

/// Smallest luma dimension that still leaves a full window at the fifth scale.
pub const MS_SSIM_MIN_DIM: usize = WINDOW << (MS_SSIM_WEIGHTS.len() - 1);

/// Five-scale MS-SSIM of a single frame pair.
///
/// Negative contrast-structure means are clamped to zero before exponentiation.
pub fn ms_ssim_frame(reference: &FramePlanar, distorted: &FramePlanar) -> Result<f64> {
    check_geometry(reference, distorted)?;
    let (w, h) = (reference.width(), reference.height());
    let scales = MS_SSIM_WEIGHTS.len();
    if (w >> (scales - 1)) < WINDOW || (h >> (scales - 1)) < WINDOW {
        return Err(Error::Insufficient(format!(
            "{w}x{h} frame too small for {scales} scales (needs at least {MS_SSIM_MIN_DIM} per side)"
        )));
    }
    if reference.luma == distorted.luma {
        return Ok(1.0);
    }
    let peak = reference.peak();
    let mut a = FloatPlane::luma(reference);
    let mut b = FloatPlane::luma(distorted);
    let mut score = 1.0;
    for (scale, &weight) in MS_SSIM_WEIGHTS.iter().enumerate() {
        let stats = ssim_planes(&a, &b, peak)?;
        let term = if scale + 1 == scales { stats.ssim } else { stats.cs };
        score *= term.max(0.0).powf(weight);
        if scale + 1 < scales {
            a = a.downsample();
            b = b.downsample();
        }
    }
    Ok(score)
}

/// Per-frame MS-SSIM over two equal-length sequences, pooled by arithmetic mean.
pub fn ms_ssim_luma(reference: &[FramePlanar], distorted: &[FramePlanar]) -> Result<SequenceMetricResult> {
    if reference.len() != distorted.len() {
        return Err(Error::Mismatch(format!(
            "sequence lengths {} vs {}",
            reference.len(),
            distorted.len()
        )));
    }
    let per_frame = reference
        .par_iter()
        .zip(distorted.par_iter())
        .map(|(a, b)| ms_ssim_frame(a, b))
        .collect::<Result<Vec<_>>>()?;
    Ok(aggregate_frames(MetricId::MsSsim, per_frame))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::Plane;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn frame(w: usize, h: usize, mut f: impl FnMut(usize, usize) -> u16) -> FramePlanar {
        let data = (0..h).flat_map(|y| (0..w).map(move |x| (x, y))).map(|(x, y)| f(x, y)).collect();
        FramePlanar::from_luma(Plane::new(w, h, data).unwrap(), 8).unwrap()
    }

    /// Direct 2-D window sums at every valid position.
    fn naive_ssim(a: &FramePlanar, b: &FramePlanar) -> f64 {
        let g = gaussian_window();
        let peak = a.peak();
        let (c1, c2) = ((K1 * peak).powi(2), (K2 * peak).powi(2));
        let (w, h) = (a.width(), a.height());
        let mut total = 0.0;
        let mut count = 0.0;
        for y0 in 0..=h - WINDOW {
            for x0 in 0..=w - WINDOW {
                let (mut mx, mut my) = (0.0, 0.0);
                for j in 0..WINDOW {
                    for i in 0..WINDOW {
                        let wt = g[i] * g[j];
                        mx += wt * a.luma.at(x0 + i, y0 + j) as f64;
                        my += wt * b.luma.at(x0 + i, y0 + j) as f64;
                    }
                }
                let (mut vx, mut vy, mut cov) = (0.0, 0.0, 0.0);
                for j in 0..WINDOW {
                    for i in 0..WINDOW {
                        let wt = g[i] * g[j];
                        let dx = a.luma.at(x0 + i, y0 + j) as f64 - mx;
                        let dy = b.luma.at(x0 + i, y0 + j) as f64 - my;
                        vx += wt * dx * dx;
                        vy += wt * dy * dy;
                        cov += wt * dx * dy;
                    }
                }
                total += ((2.0 * mx * my + c1) * (2.0 * cov + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
                count += 1.0;
            }
        }
        total / count
    }

    #[test]
    fn identical_is_one() {
        let f = frame(32, 32, |x, y| ((x * 7 + y * 13) % 256) as u16);
        assert_eq!(ssim_luma(&f, &f).unwrap(), 1.0);
        let c = frame(16, 16, |_, _| 128);
        assert_eq!(ssim_luma(&c, &c).unwrap(), 1.0);
    }

    #[test]
    fn inverted_checkerboard_is_dissimilar() {
        let a = frame(32, 32, |x, y| if (x / 2 + y / 2) % 2 == 0 { 255 } else { 0 });
        let b = frame(32, 32, |x, y| 255 - a.luma.at(x, y));
        let s = ssim_luma(&a, &b).unwrap();
        assert!(s < 0.1, "{s}");
        assert!((s - naive_ssim(&a, &b)).abs() < 1e-9);
    }

    #[test]
    fn matches_naive_on_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let a = frame(20, 17, |_, _| rng.random_range(0..256));
            let b = frame(20, 17, |x, y| (a.luma.at(x, y) as i32 + 20).min(255) as u16 ^ 3);
            let fast = ssim_luma(&a, &b).unwrap();
            assert!((fast - naive_ssim(&a, &b)).abs() < 1e-9);
        }
    }

    #[test]
    fn smaller_than_window() {
        let a = frame(10, 30, |x, _| x as u16);
        let b = frame(10, 30, |_, y| y as u16);
        assert!(matches!(ssim_luma(&a, &b), Err(Error::Insufficient(_))));
    }

    #[test]
    fn ms_ssim_too_small() {
        let a = frame(64, 64, |x, _| x as u16);
        let err = ms_ssim_frame(&a, &a).unwrap_err().to_string();
        assert!(err.contains("too small for 5 scales"), "{err}");
    }

    #[test]
    fn ms_ssim_identical_sequence() {
        let a = frame(176, 176, |x, y| ((x * y) % 256) as u16);
        let r = ms_ssim_luma(&[a.clone(), a.clone()], &[a.clone(), a]).unwrap();
        assert_eq!(r.aggregate, 1.0);
        assert_eq!(r.frame_count, 2);
    }

    #[test]
    fn ms_ssim_length_mismatch() {
        let a = frame(176, 176, |_, _| 1);
        assert!(ms_ssim_luma(&[a.clone()], &[]).is_err());
    }

    #[test]
    fn gaussian_sums_to_one() {
        let g = gaussian_window();
        assert!((g.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert_eq!(g[0], g[10]);
    }
}
