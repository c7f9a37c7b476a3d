//! Acceptance suite: one PASS/FAIL line per criterion.

mod common;

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, StudentsT};

use vqa_core::bd::{bd_quality, bd_rate, RdCurve};
use vqa_core::catalog::{load_encode_manifest, validate_rate_ladder, ConfigId, LadderRules, PvsKey};
use vqa_core::correlation::{fit_logistic, krocc, srocc, LogisticParams};
use vqa_core::frame::{read_frames, FramePlanar, Plane};
use vqa_core::metrics::{gaussian_window, ms_ssim_frame, psnr_luma, si_ti, ssim_luma, K1, K2};
use vqa_core::pipeline::{run_pipeline, RunManifest, RunOptions};
use vqa_core::session::{plan_sessions, BtcTiming, PlanOptions};
use vqa_core::subjective::{
    differential_score, dmos, outlier_factor, remove_bias, screen_observers, welch_t_test, DmosResult, ScoreMatrix,
};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

use common::fixtures;

// ---------------------------------------------------------------- BD

/// Value at `x` of the polynomial through the points (Lagrange form).
fn lagrange(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let mut total = 0.0;
    for i in 0..xs.len() {
        let mut term = ys[i];
        for j in 0..xs.len() {
            if i != j {
                term *= (x - xs[j]) / (xs[i] - xs[j]);
            }
        }
        total += term;
    }
    total
}

fn trapezoid(f: impl Fn(f64) -> f64, a: f64, b: f64, steps: usize) -> f64 {
    let h = (b - a) / steps as f64;
    let mut s = 0.5 * (f(a) + f(b));
    for i in 1..steps {
        s += f(a + h * i as f64);
    }
    s * h
}

fn overlap(a: &[f64], b: &[f64]) -> (f64, f64) {
    let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    let max = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (min(a).max(min(b)), max(a).min(max(b)))
}

fn random_curve(rng: &mut ChaCha8Rng) -> Vec<(f64, f64)> {
    let mut rate = rng.random_range(1.0..20.0);
    let mut q = rng.random_range(28.0..36.0);
    let mut pts = Vec::new();
    for _ in 0..4 {
        pts.push((rate, q));
        rate *= rng.random_range(1.6..2.4);
        q += rng.random_range(1.0..5.0);
    }
    pts
}

fn bd_oracle() -> Check {
    let mut elapsed = std::time::Duration::ZERO;
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let (mut worst_rate, mut worst_quality) = (0.0f64, 0.0f64);
    let mut done = 0;
    while done < 1000 {
        let a = random_curve(&mut rng);
        let shrink = rng.random_range(0.45..0.95);
        let t: Vec<(f64, f64)> = random_curve(&mut rng)
            .iter()
            .zip(&a)
            .map(|(&(_, dq), &(r, q))| (r * shrink, q + (dq - 32.0) * 0.2))
            .collect();
        if t.windows(2).any(|w| w[1].1 <= w[0].1) {
            continue;
        }
        let (qa, qt): (Vec<f64>, Vec<f64>) = (a.iter().map(|p| p.1).collect(), t.iter().map(|p| p.1).collect());
        let (la, lt): (Vec<f64>, Vec<f64>) = (
            a.iter().map(|p| p.0.log10()).collect(),
            t.iter().map(|p| p.0.log10()).collect(),
        );
        let (ql, qh) = overlap(&qa, &qt);
        let (rl, rh) = overlap(&la, &lt);
        if qh <= ql || rh <= rl {
            continue;
        }
        let ca = RdCurve::from_pairs("a", "psnr", &a).map_err(|e| e.to_string())?;
        let ct = RdCurve::from_pairs("t", "psnr", &t).map_err(|e| e.to_string())?;

        let steps = 20_000;
        let delta = trapezoid(|q| lagrange(&qt, &lt, q) - lagrange(&qa, &la, q), ql, qh, steps) / (qh - ql);
        let oracle_rate = (10f64.powf(delta) - 1.0) * 100.0;
        let oracle_quality = trapezoid(|r| lagrange(&lt, &qt, r) - lagrange(&la, &qa, r), rl, rh, steps) / (rh - rl);

        let start = Instant::now();
        let got_rate = bd_rate(&ca, &ct).map_err(|e| e.to_string())?.rate_percent();
        let got_quality = bd_quality(&ca, &ct).map_err(|e| e.to_string())?.quality();
        elapsed += start.elapsed();
        worst_rate = worst_rate.max((got_rate - oracle_rate).abs());
        worst_quality = worst_quality.max((got_quality - oracle_quality).abs());
        done += 1;
    }
    let secs = elapsed.as_secs_f64();
    ensure(worst_rate <= 0.01, || format!("BD-rate deviation {worst_rate:.3e} pp"))?;
    ensure(worst_quality <= 1e-6, || format!("BD-quality deviation {worst_quality:.3e}"))?;
    ensure(secs < 10.0, || format!("took {secs:.2}s"))?;
    Ok(format!(
        "1000 pairs, max |dBD-rate| {worst_rate:.2e} pp, max |dBD-quality| {worst_quality:.2e}, {secs:.3}s in BD code"
    ))
}

fn bd_trivial() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let a = random_curve(&mut rng);
    let ca = RdCurve::from_pairs("a", "psnr", &a).unwrap();
    let same_rate = bd_rate(&ca, &ca).map_err(|e| e.to_string())?.rate_percent();
    let same_quality = bd_quality(&ca, &ca).map_err(|e| e.to_string())?.quality();
    ensure(same_rate == 0.0 && same_quality == 0.0, || {
        format!("identical curves gave {same_rate} / {same_quality}")
    })?;

    let halved: Vec<(f64, f64)> = a.iter().map(|&(r, q)| (r / 2.0, q)).collect();
    let h = bd_rate(&ca, &RdCurve::from_pairs("t", "psnr", &halved).unwrap())
        .map_err(|e| e.to_string())?
        .rate_percent();
    ensure((h + 50.0).abs() <= 1e-9, || format!("halved rates gave {h}"))?;

    let mut worst = 0.0f64;
    for _ in 0..200 {
        let x = RdCurve::from_pairs("x", "psnr", &random_curve(&mut rng)).unwrap();
        let y = RdCurve::from_pairs("y", "psnr", &random_curve(&mut rng)).unwrap();
        let (Ok(xy), Ok(yx)) = (bd_rate(&x, &y), bd_rate(&y, &x)) else {
            continue;
        };
        let prod = (1.0 + xy.rate_percent() / 100.0) * (1.0 + yx.rate_percent() / 100.0);
        worst = worst.max((prod - 1.0).abs());
    }
    ensure(worst <= 1e-9, || format!("antisymmetry residual {worst:.3e}"))?;
    Ok(format!("halved = {h:.12}%, antisymmetry residual {worst:.1e}"))
}

// ---------------------------------------------------------------- Welch

fn oracle_welch(a: &[f64], b: &[f64]) -> (f64, f64, f64) {
    let stats = |v: &[f64]| {
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (n, m, var)
    };
    let (n1, m1, v1) = stats(a);
    let (n2, m2, v2) = stats(b);
    let (s1, s2) = (v1 / n1, v2 / n2);
    let t = (m1 - m2) / (s1 + s2).sqrt();
    let dof = (s1 + s2).powi(2) / (s1 * s1 / (n1 - 1.0) + s2 * s2 / (n2 - 1.0));
    let dist = StudentsT::new(0.0, 1.0, dof).unwrap();
    let p = 2.0 * (1.0 - dist.cdf(t.abs()));
    (t, dof, p)
}

fn welch() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let n1 = rng.random_range(3..30);
        let n2 = rng.random_range(3..30);
        let (mu1, mu2) = (rng.random_range(20.0..90.0), rng.random_range(20.0..90.0));
        let (sd1, sd2) = (rng.random_range(1.0..20.0), rng.random_range(1.0..20.0));
        let a: Vec<f64> = (0..n1).map(|_| mu1 + sd1 * rng.random_range(-1.7..1.7)).collect();
        let b: Vec<f64> = (0..n2).map(|_| mu2 + sd2 * rng.random_range(-1.7..1.7)).collect();
        let r = welch_t_test(&a, &b).map_err(|e| e.to_string())?;
        let (t, dof, p) = oracle_welch(&a, &b);
        worst = worst.max((r.t - t).abs()).max((r.dof - dof).abs()).max((r.p - p).abs());
    }
    ensure(worst <= 1e-6, || format!("max deviation from oracle {worst:.3e}"))?;

    let s = [61.0, 72.5, 58.0, 80.0, 66.5, 70.0];
    let same = welch_t_test(&s, &s).map_err(|e| e.to_string())?;
    ensure(same.p == 1.0, || format!("identical samples p = {}", same.p))?;

    let mut dof_ok = true;
    for n in 2..40 {
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..100.0)).collect();
        let b: Vec<f64> = a.iter().map(|v| -v).collect();
        let r = welch_t_test(&a, &b).map_err(|e| e.to_string())?;
        dof_ok &= r.dof == (2 * (n - 1)) as f64;
    }
    ensure(dof_ok, || "equal-variance dof differs from 2(n-1)".into())?;
    Ok(format!("50 pairs, max deviation {worst:.1e}"))
}

// ---------------------------------------------------------------- DMOS equations

fn dmos_equations() -> Check {
    let r = DmosResult::from_scores("S", ConfigId::Reference, &[70.0, 80.0, 90.0]).map_err(|e| e.to_string())?;
    ensure(r.dmos == 80.0 && (r.stddev - 10.0).abs() < 1e-12 && (r.ci95_half_width - 11.316).abs() <= 1e-3, || {
        format!("({}, {}, {})", r.dmos, r.stddev, r.ci95_half_width)
    })?;
    ensure(differential_score(63.0, 63.0) == 100.0, || "equal marks not 100".into())?;

    let base: Vec<f64> = (0..22).map(|i| 40.0 + ((i * 37) % 23) as f64 * 2.5).collect();
    let doubled: Vec<f64> = base.iter().chain(&base).copied().collect();
    let c1 = DmosResult::from_scores("S", ConfigId::Reference, &base).unwrap().ci95_half_width;
    let c2 = DmosResult::from_scores("S", ConfigId::Reference, &doubled).unwrap().ci95_half_width;
    let ratio = c2 / c1;
    let expected = 1.0 / 2f64.sqrt();
    ensure((ratio - expected).abs() <= 1e-12, || {
        let n = base.len() as f64;
        format!(
            "duplicated population: c ratio {ratio:.6}, expected {expected:.6}; sample stddev changes on duplication, ratio is sqrt((n-1)/(2n-1)) = {:.6}",
            ((n - 1.0) / (2.0 * n - 1.0)).sqrt()
        )
    })?;
    Ok("(80, 10, 11.316)".into())
}

// ---------------------------------------------------------------- screening

fn screening_matrix() -> ScoreMatrix {
    let mut m = ScoreMatrix::new();
    let scenes = ["A", "B", "C", "D", "E", "F"];
    let configs: Vec<ConfigId> = [ConfigId::Reference, ConfigId::Downscaled4K]
        .into_iter()
        .chain((1..=4).map(|r| ConfigId::coded("HEVC", r)))
        .chain((1..=4).map(|r| ConfigId::coded("VVC", r)))
        .collect();
    let mut p = 0usize;
    for s in scenes {
        for c in &configs {
            let key = PvsKey::new(s, c.clone());
            for o in 0..21 {
                let v = 25.0 + 50.0 * ((o + p) % 21) as f64 / 20.0;
                m.insert(key.clone(), &format!("honest{o:02}"), v).unwrap();
            }
            m.insert(key, "adversary", if p % 2 == 0 { 0.0 } else { 100.0 }).unwrap();
            p += 1;
        }
    }
    m
}

fn screening() -> Check {
    let m = screening_matrix();
    let first = screen_observers(&m).map_err(|e| e.to_string())?;
    ensure(first.report.rejected == vec!["adversary".to_string()], || {
        format!("rejected {:?}", first.report.rejected)
    })?;
    let second = screen_observers(&first.retained).map_err(|e| e.to_string())?;
    ensure(second.report.rejected.is_empty(), || {
        format!("re-screening rejected {:?}", second.report.rejected)
    })?;
    let s20 = 20f64.sqrt();
    let bounds = [
        (2.0, 2.0),
        (4.0, 2.0),
        (3.0, 2.0),
        (2.0 - 1e-9, s20),
        (4.0 + 1e-9, s20),
        (1.0, s20),
    ];
    for (k, want) in bounds {
        ensure(outlier_factor(k) == want, || format!("factor({k}) = {}", outlier_factor(k)))?;
    }
    let kurt = first.report.populations.iter().map(|p| p.kurtosis).fold(f64::NAN, f64::max);
    Ok(format!("22 observers, adversary rejected, max kurtosis {kurt:.3}"))
}

fn bias_removal() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(913);
    let mut m = ScoreMatrix::new();
    let offsets: Vec<f64> = (0..22).map(|_| rng.random_range(-12.0..12.0)).collect();
    for s in 0..6 {
        for c in 1..=4 {
            let key = PvsKey::new(&format!("S{s}"), ConfigId::coded("VVC", c));
            let truth = rng.random_range(30.0..95.0);
            for (o, off) in offsets.iter().enumerate() {
                m.insert(key.clone(), &format!("o{o}"), truth + off + rng.random_range(-5.0..5.0)).unwrap();
            }
        }
    }
    let before = dmos(&m).map_err(|e| e.to_string())?;
    let after = dmos(&remove_bias(&m)).map_err(|e| e.to_string())?;
    let worst = before
        .iter()
        .zip(&after)
        .map(|(a, b)| (a.dmos - b.dmos).abs())
        .fold(0.0, f64::max);
    ensure(worst < 1e-9, || format!("DMOS moved by {worst:.3e}"))?;
    Ok(format!("max DMOS change {worst:.1e}"))
}

// ---------------------------------------------------------------- correlation

fn logistic() -> Check {
    let truth = LogisticParams {
        beta1: 100.0,
        beta2: 0.0,
        beta3: 50.0,
        beta4: 10.0,
    };
    let xs: Vec<f64> = (0..=40).map(|i| 2.5 * i as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| truth.eval(x)).collect();
    let fit = fit_logistic(&xs, &ys).map_err(|e| e.to_string())?;
    let worst = (0..=1000)
        .map(|i| i as f64 / 10.0)
        .map(|x| (fit.params.eval(x) - truth.eval(x)).abs())
        .fold(0.0, f64::max);
    ensure(worst <= 1e-6, || format!("f deviation {worst:.3e}"))?;
    ensure(fit.sse_history.windows(2).all(|w| w[1] <= w[0]), || "SSE increased".into())?;

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..100 {
        let p = LogisticParams {
            beta1: rng.random_range(-200.0..200.0),
            beta2: rng.random_range(-200.0..200.0),
            beta3: rng.random_range(-50.0..50.0),
            beta4: rng.random_range(-20.0..20.0),
        };
        ensure(p.eval(p.beta3) == (p.beta1 + p.beta2) / 2.0, || format!("midpoint identity fails for {p:?}"))?;
    }
    let noisy: Vec<f64> = ys.iter().map(|y| y + rng.random_range(-4.0..4.0)).collect();
    let nfit = fit_logistic(&xs, &noisy).map_err(|e| e.to_string())?;
    ensure(nfit.sse_history.windows(2).all(|w| w[1] <= w[0]), || "SSE increased on noisy data".into())?;
    Ok(format!("max |f - f_true| {worst:.1e} after {} iterations", fit.iterations))
}

fn brute_ranks(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|&x| {
            let below = v.iter().filter(|&&y| y < x).count() as f64;
            let equal = v.iter().filter(|&&y| y == x).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect()
}

fn brute_pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    (sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0)
}

fn brute_tau_b(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let (mut c, mut d, mut tx, mut ty) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..n {
        for j in i + 1..n {
            let dx = x[i].partial_cmp(&x[j]).unwrap();
            let dy = y[i].partial_cmp(&y[j]).unwrap();
            use std::cmp::Ordering::Equal;
            if dx == Equal {
                tx += 1;
            }
            if dy == Equal {
                ty += 1;
            }
            if dx != Equal && dy != Equal {
                if dx == dy {
                    c += 1;
                } else {
                    d += 1;
                }
            }
        }
    }
    let n0 = (n * (n - 1) / 2) as i64;
    ((c - d) as f64 / ((n0 - tx) as f64 * (n0 - ty) as f64).sqrt()).clamp(-1.0, 1.0)
}

fn rank_correlations() -> Check {
    let s = srocc(&[1.0, 2.0, 3.0], &[3.0, 1.0, 2.0]).map_err(|e| e.to_string())?;
    let k = krocc(&[1.0, 2.0, 3.0], &[3.0, 1.0, 2.0]).map_err(|e| e.to_string())?;
    ensure(s == -0.5, || format!("SROCC = {s}"))?;
    ensure((k + 1.0 / 3.0).abs() <= f64::EPSILON, || format!("KROCC = {k}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for case in 0..100 {
        let n = rng.random_range(5..60);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(0..12) as f64).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(0..9) as f64 * 0.5).collect();
        let (Ok(s), Ok(k)) = (srocc(&x, &y), krocc(&x, &y)) else {
            return Err(format!("case {case}: degenerate input"));
        };
        let so = brute_pearson(&brute_ranks(&x), &brute_ranks(&y));
        let ko = brute_tau_b(&x, &y);
        ensure(s == so, || format!("case {case}: SROCC {s} vs {so}"))?;
        ensure(k == ko, || format!("case {case}: KROCC {k} vs {ko}"))?;
    }
    Ok("hand values exact, 100 tied vectors identical to brute force".into())
}

// ---------------------------------------------------------------- frame metrics

fn random_frame(rng: &mut ChaCha8Rng, w: usize, h: usize, depth: u8) -> FramePlanar {
    let max = (1u32 << depth) - 1;
    let data = (0..w * h).map(|_| rng.random_range(0..=max) as u16).collect();
    FramePlanar::from_luma(Plane::new(w, h, data).unwrap(), depth).unwrap()
}

fn naive_psnr(a: &FramePlanar, b: &FramePlanar) -> f64 {
    let n = a.luma.data.len() as f64;
    let mse = a
        .luma
        .data
        .iter()
        .zip(&b.luma.data)
        .map(|(&x, &y)| (x as f64 - y as f64).powi(2))
        .sum::<f64>()
        / n;
    let peak = ((1u32 << a.bit_depth) - 1) as f64;
    10.0 * (peak * peak / mse).log10()
}

fn naive_ssim(a: &FramePlanar, b: &FramePlanar) -> f64 {
    let g = gaussian_window();
    let peak = ((1u32 << a.bit_depth) - 1) as f64;
    let (c1, c2) = ((K1 * peak).powi(2), (K2 * peak).powi(2));
    let (w, h) = (a.width(), a.height());
    let px = |f: &FramePlanar, x: usize, y: usize| f.luma.data[y * w + x] as f64;
    let k = g.len();
    let mut total = 0.0;
    let mut count = 0.0;
    for y0 in 0..=h - k {
        for x0 in 0..=w - k {
            let (mut ma, mut mb) = (0.0, 0.0);
            for dy in 0..k {
                for dx in 0..k {
                    let wt = g[dy] * g[dx];
                    ma += wt * px(a, x0 + dx, y0 + dy);
                    mb += wt * px(b, x0 + dx, y0 + dy);
                }
            }
            let (mut va, mut vb, mut cov) = (0.0, 0.0, 0.0);
            for dy in 0..k {
                for dx in 0..k {
                    let wt = g[dy] * g[dx];
                    let (da, db) = (px(a, x0 + dx, y0 + dy) - ma, px(b, x0 + dx, y0 + dy) - mb);
                    va += wt * da * da;
                    vb += wt * db * db;
                    cov += wt * da * db;
                }
            }
            total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
            count += 1.0;
        }
    }
    total / count
}

fn naive_siti(frames: &[FramePlanar]) -> (f64, f64) {
    let std = |v: &[f64]| {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64).sqrt()
    };
    let (w, h) = (frames[0].width(), frames[0].height());
    let scale = (1u32 << (frames[0].bit_depth - 8)) as f64;
    let val = |f: &FramePlanar, x: usize, y: usize| f.luma.data[y * w + x] as f64 / scale;
    let kx = [[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]];
    let mut si: f64 = 0.0;
    let mut ti: f64 = 0.0;
    for (i, f) in frames.iter().enumerate() {
        let mut mags = Vec::new();
        for y in 1..h - 1 {
            for x in 1..w - 1 {
                let (mut gx, mut gy) = (0.0, 0.0);
                for j in 0..3 {
                    for i in 0..3 {
                        let v = val(f, x + i - 1, y + j - 1);
                        gx += kx[j][i] * v;
                        gy += kx[i][j] * v;
                    }
                }
                mags.push((gx * gx + gy * gy).sqrt());
            }
        }
        si = si.max(std(&mags));
        if i > 0 {
            let diff: Vec<f64> = (0..w * h)
                .map(|p| val(f, p % w, p / w) - val(&frames[i - 1], p % w, p / w))
                .collect();
            ti = ti.max(std(&diff));
        }
    }
    (si, ti)
}

fn frame_metrics() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let mut worst = 0.0f64;
    for depth in [8u8, 10] {
        for _ in 0..10 {
            let a = random_frame(&mut rng, 16, 16, depth);
            let b = random_frame(&mut rng, 16, 16, depth);
            let c = random_frame(&mut rng, 16, 16, depth);
            worst = worst.max((psnr_luma(&a, &b).map_err(|e| e.to_string())? - naive_psnr(&a, &b)).abs());
            worst = worst.max((ssim_luma(&a, &b).map_err(|e| e.to_string())? - naive_ssim(&a, &b)).abs());
            let frames = [a, b, c];
            let r = si_ti(&frames).map_err(|e| e.to_string())?;
            let (si, ti) = naive_siti(&frames);
            worst = worst.max((r.si - si).abs()).max((r.ti - ti).abs());
        }
    }
    ensure(worst <= 1e-9, || format!("PSNR/SSIM/SI-TI deviation {worst:.3e}"))?;

    let dir = fixtures().join("msssim");
    let expected: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("expected.json")).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
    let mut ms_worst = 0.0f64;
    let mut cases = 0;
    for (name, case) in expected.as_object().ok_or("expected.json is not an object")? {
        let load = |file: &str| -> Result<Vec<FramePlanar>, String> {
            let meta = vqa_core::catalog::SceneMeta::yuv420(name, 0, 0, 8);
            let f = std::fs::File::open(dir.join(file)).map_err(|e| e.to_string())?;
            read_frames(f, &meta).map_err(|e| e.to_string())
        };
        let refs = load(case["reference"].as_str().unwrap())?;
        let dist = load(case["distorted"].as_str().unwrap())?;
        for (i, want) in case["per_frame"].as_array().unwrap().iter().enumerate() {
            let got = ms_ssim_frame(&refs[i], &dist[i]).map_err(|e| e.to_string())?;
            ms_worst = ms_worst.max((got - want.as_f64().unwrap()).abs());
        }
        cases += 1;
    }
    ensure(cases > 0, || "no MS-SSIM fixtures".into())?;
    ensure(ms_worst <= 1e-4, || format!("MS-SSIM deviation {ms_worst:.3e}"))?;

    let flat = FramePlanar::from_luma(Plane::filled(32, 24, 117), 8).unwrap();
    let r = si_ti(&[flat.clone(), flat.clone(), flat]).map_err(|e| e.to_string())?;
    ensure(r.si == 0.0 && r.ti == 0.0, || format!("constant video SI {} TI {}", r.si, r.ti))?;
    Ok(format!("naive deviation {worst:.1e}, MS-SSIM deviation {ms_worst:.1e} over {cases} fixture pairs"))
}

// ---------------------------------------------------------------- session planning

fn session_planning() -> Check {
    let catalog = common::fixture_catalog();
    ensure(catalog.len() == 60, || format!("catalog has {} PVSs", catalog.len()))?;
    let timing = BtcTiming::default();
    let keys: std::collections::BTreeSet<PvsKey> = catalog.iter().map(|p| p.key()).collect();
    for seed in 0..100u64 {
        let plan = plan_sessions(&catalog, 3, seed, timing, PlanOptions::default()).map_err(|e| e.to_string())?;
        let sizes: Vec<usize> = plan.sessions.iter().map(Vec::len).collect();
        ensure(sizes == vec![20, 20, 20], || format!("seed {seed}: sizes {sizes:?}"))?;
        for minutes in plan.session_seconds().iter().map(|s| s / 60.0) {
            ensure((19.0..=21.0).contains(&minutes), || format!("seed {seed}: {minutes:.2} min"))?;
        }
        let order: Vec<_> = plan.btcs().collect();
        ensure(order.windows(2).all(|w| w[0].scene_id != w[1].scene_id), || {
            format!("seed {seed}: adjacent BTCs share a scene")
        })?;
        let seen: std::collections::BTreeSet<PvsKey> = order.iter().map(|b| b.key()).collect();
        ensure(seen == keys && order.len() == 60, || format!("seed {seed}: coverage broken"))?;
        ensure(
            order.iter().enumerate().all(|(i, b)| b.btc_index as usize == i + 1),
            || format!("seed {seed}: BTC numbering"),
        )?;
        let on_a = order.iter().filter(|b| b.a_is_reference).count();
        ensure(on_a.abs_diff(60 - on_a) <= 1, || format!("seed {seed}: reference side {on_a}/60"))?;
        let again = plan_sessions(&catalog, 3, seed, timing, PlanOptions::default()).map_err(|e| e.to_string())?;
        ensure(again == plan, || format!("seed {seed}: not deterministic"))?;
    }
    let minutes = 20.0 * timing.btc_seconds() / 60.0;
    Ok(format!("100 seeds, 3 x 20 BTCs, {minutes:.2} min per session"))
}

// ---------------------------------------------------------------- fixtures

const LADDER: [(&str, &str, [(u32, f64); 4]); 12] = [
    ("LayeredKimono", "HEVC", [(38, 1.9), (34, 3.2), (29, 6.3), (26, 11.4)]),
    ("LayeredKimono", "VVC", [(37, 1.8), (32, 3.4), (27, 6.5), (24, 10.8)]),
    ("BodeMuseum", "HEVC", [(38, 4.7), (33, 9.8), (28, 22.5), (25, 45.4)]),
    ("BodeMuseum", "VVC", [(37, 4.8), (32, 10.1), (27, 22.6), (24, 42.9)]),
    ("OberbaumSpree", "HEVC", [(38, 3.3), (33, 7.4), (28, 17.5), (24, 40.5)]),
    ("OberbaumSpree", "VVC", [(37, 3.6), (32, 8.1), (27, 18.6), (23, 43.9)]),
    ("Festival2", "HEVC", [(39, 17.5), (34, 32.1), (29, 59.5), (24, 130.4)]),
    ("Festival2", "VVC", [(37, 17.4), (32, 32.2), (27, 61.1), (22, 135.5)]),
    ("JapaneseMaple", "HEVC", [(43, 15.2), (38, 34.9), (33, 76.1), (28, 168.0)]),
    ("JapaneseMaple", "VVC", [(42, 15.9), (37, 35.7), (32, 79.8), (27, 174.9)]),
    ("SteelPlant", "HEVC", [(42, 19.6), (38, 40.5), (33, 86.9), (28, 175.5)]),
    ("SteelPlant", "VVC", [(42, 18.0), (37, 42.9), (32, 91.1), (27, 180.5)]),
];

fn fixture_manifest() -> Check {
    let manifest = load_encode_manifest(fixtures().join("table2_manifest.csv")).map_err(|e| e.to_string())?;
    ensure(manifest.rows().len() == 48, || format!("{} rows", manifest.rows().len()))?;
    for (scene, codec, points) in LADDER {
        for (i, (qp, rate)) in points.iter().enumerate() {
            let row = manifest
                .row(scene, codec, i as u8 + 1)
                .ok_or_else(|| format!("missing ({scene}, {codec}, {})", i + 1))?;
            ensure(row.qp == *qp && row.bitrate_mbps == *rate, || {
                format!("({scene}, {codec}, {}) = {}/{}", i + 1, row.qp, row.bitrate_mbps)
            })?;
        }
    }
    let warnings = validate_rate_ladder(&manifest, LadderRules::default());
    ensure(warnings.is_empty(), || format!("{} ladder warnings: {warnings:?}", warnings.len()))?;
    Ok("48 rows verbatim, 0 ladder warnings".into())
}

// ---------------------------------------------------------------- end to end

fn end_to_end() -> Check {
    let start = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let files = common::write_run(dir.path(), 2024, true, "");
    let run = RunManifest::load(files.manifest).map_err(|e| e.to_string())?;
    ensure(run.options == RunOptions { seed: 2024, ..Default::default() }, || "options not read".into())?;
    let first = run_pipeline(&run).map_err(|e| e.to_string())?;
    let second = run_pipeline(&run).map_err(|e| e.to_string())?;
    let (a, b) = (first.to_json().unwrap(), second.to_json().unwrap());
    ensure(a == b, || "bundles differ between runs".into())?;
    ensure(first.observers == 22, || format!("{} observers", first.observers))?;

    let rows = ["R1", "R2", "R3", "R4", "4K", "REF"];
    ensure(first.significance.len() == 6, || format!("{} matrices", first.significance.len()))?;
    for m in &first.significance {
        ensure(m.shape() == (6, 6), || format!("{}: shape {:?}", m.scene_id, m.shape()))?;
        ensure(m.row_labels == rows && m.column_labels == rows, || {
            format!("{}: labels {:?} / {:?}", m.scene_id, m.row_labels, m.column_labels)
        })?;
        ensure(m.anchor_codec == "HEVC" && m.test_codec == "VVC", || "codec axes".into())?;
        let cell = m.cell(&ConfigId::Reference, &ConfigId::Reference).ok_or("no REF/REF cell")?;
        ensure(cell.p == 1.0 && cell.p_display == "1.00", || format!("{}: REF/REF p = {}", m.scene_id, cell.p))?;
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 30.0, || format!("took {secs:.2}s"))?;
    let unavailable = first.bd.iter().filter(|r| r.bd_rate_percent.is_none()).count();
    ensure(unavailable == 0, || format!("{unavailable} BD rows unavailable"))?;
    let dmos_bd: BTreeMap<&str, f64> = first
        .bd_average
        .iter()
        .filter_map(|r| Some((r.metric_id.as_str(), r.bd_rate_percent?)))
        .collect();
    Ok(format!(
        "6 matrices 6x6, REF/REF p = 1.00, bundle {} bytes identical, mean BD-DMOS {:.2}%, {secs:.2}s",
        a.len(),
        dmos_bd.get("dmos").copied().unwrap_or(f64::NAN)
    ))
}

fn main() {
    let checks: [(&str, fn() -> Check); 12] = [
        ("BD oracle equivalence", bd_oracle),
        ("BD trivial anchors", bd_trivial),
        ("Welch t-test", welch),
        ("DMOS, deviation and confidence interval", dmos_equations),
        ("BT.500 screening", screening),
        ("P.913 bias removal", bias_removal),
        ("Logistic fit", logistic),
        ("Rank correlations", rank_correlations),
        ("Frame metrics", frame_metrics),
        ("Session planning", session_planning),
        ("Fixtures", fixture_manifest),
        ("End-to-end", end_to_end),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        match check() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!("{} passed, {failed} failed", checks.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
