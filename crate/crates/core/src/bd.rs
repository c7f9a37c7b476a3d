//! Bjontegaard delta rate and delta quality.
//!
//! Each curve is fitted with a cubic polynomial (exact interpolation for four
//! points, least squares beyond), the fits are integrated analytically over the
//! common interval and the average gap is reported. BD-rate integrates
//! `log10(rate)` as a function of quality; BD-quality integrates quality as a
//! function of `log10(rate)`.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RdPoint {
    pub rate: f64,
    pub quality: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RdCurve {
    pub label: String,
    pub metric_id: String,
    pub points: Vec<RdPoint>,
}

impl RdCurve {
    /// Sorts by rate and checks the curve invariants.
    pub fn new(label: &str, metric_id: &str, mut points: Vec<RdPoint>) -> Result<Self> {
        points.sort_by(|a, b| a.rate.total_cmp(&b.rate));
        for p in &points {
            if !(p.rate > 0.0 && p.rate.is_finite()) {
                return Err(Error::invalid("rate", format!("{} must be positive", p.rate)));
            }
            if !p.quality.is_finite() {
                return Err(Error::invalid("quality", format!("{} is not finite", p.quality)));
            }
        }
        if points.windows(2).any(|w| w[0].rate == w[1].rate) {
            return Err(Error::invalid("rate", format!("curve `{label}` has repeated rates")));
        }
        Ok(RdCurve {
            label: label.to_string(),
            metric_id: metric_id.to_string(),
            points,
        })
    }

    pub fn from_pairs(label: &str, metric_id: &str, pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            label,
            metric_id,
            pairs.iter().map(|&(rate, quality)| RdPoint { rate, quality }).collect(),
        )
    }

    fn log_rates(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.rate.log10()).collect()
    }

    fn qualities(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.quality).collect()
    }
}

/// Cubic in a normalized variable `u = (x - center) / scale`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cubic {
    center: f64,
    scale: f64,
    coef: [f64; 4],
}

impl Cubic {
    pub fn eval(&self, x: f64) -> f64 {
        let u = (x - self.center) / self.scale;
        ((self.coef[3] * u + self.coef[2]) * u + self.coef[1]) * u + self.coef[0]
    }

    fn antiderivative_u(&self, u: f64) -> f64 {
        let c = &self.coef;
        u * (c[0] + u * (c[1] / 2.0 + u * (c[2] / 3.0 + u * c[3] / 4.0)))
    }

    /// Exact integral over [low, high].
    pub fn integrate(&self, low: f64, high: f64) -> f64 {
        let ul = (low - self.center) / self.scale;
        let uh = (high - self.center) / self.scale;
        self.scale * (self.antiderivative_u(uh) - self.antiderivative_u(ul))
    }

    /// Coefficients `[c0, c1, c2, c3]` of `c0 + c1 x + c2 x^2 + c3 x^3`.
    pub fn coefficients(&self) -> [f64; 4] {
        let (m, s) = (self.center, self.scale);
        let a = [
            self.coef[0],
            self.coef[1] / s,
            self.coef[2] / (s * s),
            self.coef[3] / (s * s * s),
        ];
        // expand sum a_k (x - m)^k
        [
            a[0] - a[1] * m + a[2] * m * m - a[3] * m * m * m,
            a[1] - 2.0 * a[2] * m + 3.0 * a[3] * m * m,
            a[2] - 3.0 * a[3] * m,
            a[3],
        ]
    }
}

/// Least squares via Householder QR on the 4-column Vandermonde matrix.
fn solve_least_squares(rows: &mut [[f64; 4]], rhs: &mut [f64]) -> Result<[f64; 4]> {
    let m = rows.len();
    for k in 0..4 {
        let norm = (k..m).map(|i| rows[i][k] * rows[i][k]).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::invalid("xs", "rank-deficient design (repeated x values)"));
        }
        let alpha = if rows[k][k] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (k..m).map(|i| rows[i][k]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        for j in k..4 {
            let dot: f64 = (k..m).map(|i| v[i - k] * rows[i][j]).sum();
            let f = 2.0 * dot / vnorm2;
            for i in k..m {
                rows[i][j] -= f * v[i - k];
            }
        }
        let dot: f64 = (k..m).map(|i| v[i - k] * rhs[i]).sum();
        let f = 2.0 * dot / vnorm2;
        for i in k..m {
            rhs[i] -= f * v[i - k];
        }
    }
    let mut x = [0.0; 4];
    for k in (0..4).rev() {
        let diag = rows[k][k];
        if diag.abs() < 1e-13 * rows[0][0].abs().max(1.0) {
            return Err(Error::invalid("xs", "ill-conditioned cubic fit"));
        }
        let s: f64 = ((k + 1)..4).map(|j| rows[k][j] * x[j]).sum();
        x[k] = (rhs[k] - s) / diag;
    }
    Ok(x)
}

/// Cubic through (or, for more than four points, closest in least squares to) the data.
pub fn fit_cubic(xs: &[f64], ys: &[f64]) -> Result<Cubic> {
    if xs.len() != ys.len() {
        return Err(Error::Mismatch(format!("{} xs vs {} ys", xs.len(), ys.len())));
    }
    if xs.len() < 4 {
        return Err(Error::Insufficient(format!("cubic fit needs 4 points, got {}", xs.len())));
    }
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Duplicate("x value in cubic fit".into()));
    }
    let lo = sorted[0];
    let hi = sorted[sorted.len() - 1];
    let center = 0.5 * (lo + hi);
    let scale = 0.5 * (hi - lo);
    let mut rows: Vec<[f64; 4]> = xs
        .iter()
        .map(|&x| {
            let u = (x - center) / scale;
            [1.0, u, u * u, u * u * u]
        })
        .collect();
    let mut rhs = ys.to_vec();
    let coef = solve_least_squares(&mut rows, &mut rhs)?;
    Ok(Cubic { center, scale, coef })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Overlap {
    pub low: f64,
    pub high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BdWarning {
    NonMonotoneQuality { label: String },
    /// The delta could not be computed (disjoint ranges or repeated values).
    Unavailable { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BdResult {
    /// Negative when the test curve needs less rate for the same quality.
    pub bd_rate_percent: Option<f64>,
    /// Average quality gain of the test curve at equal rate, in metric units.
    pub bd_quality: Option<f64>,
    /// Integration interval: quality for BD-rate, log10(rate) for BD-quality.
    pub overlap: Overlap,
    pub warnings: Vec<BdWarning>,
}

impl BdResult {
    pub fn rate_percent(&self) -> f64 {
        self.bd_rate_percent.expect("BD-rate result")
    }

    pub fn quality(&self) -> f64 {
        self.bd_quality.expect("BD-quality result")
    }
}

fn overlap(a: &[f64], b: &[f64]) -> Result<Overlap> {
    let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    let max = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let low = min(a).max(min(b));
    let high = max(a).min(max(b));
    if !(high > low) {
        return Err(Error::Insufficient(format!("empty overlap [{low}, {high}]")));
    }
    Ok(Overlap { low, high })
}

fn check_points(curve: &RdCurve) -> Result<()> {
    if curve.points.len() < 4 {
        return Err(Error::Insufficient(format!(
            "curve `{}` has {} points, BD needs 4",
            curve.label,
            curve.points.len()
        )));
    }
    Ok(())
}

fn monotone(curve: &RdCurve) -> bool {
    curve.points.windows(2).all(|w| w[1].quality > w[0].quality)
}

/// Average quality difference (test minus anchor) at equal rate.
pub fn bd_quality(anchor: &RdCurve, test: &RdCurve) -> Result<BdResult> {
    check_points(anchor)?;
    check_points(test)?;
    let (xa, xt) = (anchor.log_rates(), test.log_rates());
    let fa = fit_cubic(&xa, &anchor.qualities())?;
    let ft = fit_cubic(&xt, &test.qualities())?;
    let ov = overlap(&xa, &xt)?;
    let diff = (ft.integrate(ov.low, ov.high) - fa.integrate(ov.low, ov.high)) / (ov.high - ov.low);
    Ok(BdResult {
        bd_rate_percent: None,
        bd_quality: Some(diff),
        overlap: ov,
        warnings: Vec::new(),
    })
}

/// Average rate difference of the test curve at equal quality, in percent.
pub fn bd_rate(anchor: &RdCurve, test: &RdCurve) -> Result<BdResult> {
    check_points(anchor)?;
    check_points(test)?;
    let mut warnings = Vec::new();
    for c in [anchor, test] {
        let mut q = c.qualities();
        q.sort_by(f64::total_cmp);
        if q.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Duplicate(format!("quality value in curve `{}`", c.label)));
        }
        if !monotone(c) {
            warnings.push(BdWarning::NonMonotoneQuality { label: c.label.clone() });
        }
    }
    let (qa, qt) = (anchor.qualities(), test.qualities());
    let fa = fit_cubic(&qa, &anchor.log_rates())?;
    let ft = fit_cubic(&qt, &test.log_rates())?;
    let ov = overlap(&qa, &qt)?;
    let delta = (ft.integrate(ov.low, ov.high) - fa.integrate(ov.low, ov.high)) / (ov.high - ov.low);
    Ok(BdResult {
        bd_rate_percent: Some((10f64.powf(delta) - 1.0) * 100.0),
        bd_quality: None,
        overlap: ov,
        warnings,
    })
}

/// One rate point of a DMOS curve with its 95% confidence half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DmosPoint {
    pub rate: f64,
    pub dmos: f64,
    pub ci95_half_width: f64,
}

impl DmosPoint {
    pub fn from_result(rate: f64, r: &crate::subjective::DmosResult) -> Self {
        DmosPoint {
            rate,
            dmos: r.dmos,
            ci95_half_width: r.ci95_half_width,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Bound {
    Mean,
    Low,
    High,
}

fn dmos_curve(label: &str, points: &[DmosPoint], bound: Bound) -> Result<RdCurve> {
    let pairs: Vec<(f64, f64)> = points
        .iter()
        .map(|p| {
            let q = match bound {
                Bound::Mean => p.dmos,
                Bound::Low => p.dmos - p.ci95_half_width,
                Bound::High => p.dmos + p.ci95_half_width,
            };
            (p.rate, q)
        })
        .collect();
    RdCurve::from_pairs(label, "dmos", &pairs)
}

/// Nominal BD result on DMOS means plus the confidence-limit variants.
///
/// `upper` compares the test curve's CI upper bound against the anchor's lower
/// bound (the most favourable case for the test codec); `lower` compares the
/// test lower bound against the anchor upper bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BdLimits {
    pub nominal: BdResult,
    pub upper: BdResult,
    pub lower: BdResult,
}

fn limits(anchor: &[DmosPoint], test: &[DmosPoint], f: fn(&RdCurve, &RdCurve) -> Result<BdResult>) -> Result<BdLimits> {
    Ok(BdLimits {
        nominal: f(&dmos_curve("anchor", anchor, Bound::Mean)?, &dmos_curve("test", test, Bound::Mean)?)?,
        upper: f(&dmos_curve("anchor_min", anchor, Bound::Low)?, &dmos_curve("test_max", test, Bound::High)?)?,
        lower: f(&dmos_curve("anchor_max", anchor, Bound::High)?, &dmos_curve("test_min", test, Bound::Low)?)?,
    })
}

pub fn bd_rate_limits(anchor: &[DmosPoint], test: &[DmosPoint]) -> Result<BdLimits> {
    limits(anchor, test, bd_rate)
}

pub fn bd_quality_limits(anchor: &[DmosPoint], test: &[DmosPoint]) -> Result<BdLimits> {
    limits(anchor, test, bd_quality)
}
