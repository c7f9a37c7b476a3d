use crate::frame::FramePlanar;
use crate::metrics::check_geometry;
use crate::Result;

/// Mean squared error over the luma plane.
pub fn luma_mse(reference: &FramePlanar, distorted: &FramePlanar) -> Result<f64> {
    check_geometry(reference, distorted)?;
    let sse: u64 = reference
        .luma
        .data
        .iter()
        .zip(&distorted.luma.data)
        .map(|(&a, &b)| {
            let d = a as i64 - b as i64;
            (d * d) as u64
        })
        .sum();
    Ok(sse as f64 / reference.luma.data.len() as f64)
}

pub fn psnr_from_mse(mse: f64, peak: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (peak * peak / mse).log10()
    }
}

/// Luma PSNR in dB with peak `2^bit_depth - 1`. Identical planes yield `f64::INFINITY`.
pub fn psnr_luma(reference: &FramePlanar, distorted: &FramePlanar) -> Result<f64> {
    let mse = luma_mse(reference, distorted)?;
    Ok(psnr_from_mse(mse, reference.peak()))
}
