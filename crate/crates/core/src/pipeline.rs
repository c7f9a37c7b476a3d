//! End-to-end report assembly: votes and metric tables in, one report bundle out.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bd::{bd_quality, bd_quality_limits, bd_rate, bd_rate_limits, BdWarning, DmosPoint, RdCurve};
use crate::catalog::{
    build_pvs_catalog, load_encode_manifest, load_scene_table, validate_rate_ladder, ConfigId, EncodeManifest,
    LadderRules, LadderWarning, PvsKey, RATE_POINTS,
};
use crate::correlation::{correlation_report, CorrelationOptions, CorrelationReport};
use crate::session::{import_votes, SessionPlan};
use crate::subjective::{
    differential_scores, dmos, observer_biases, remove_bias, screen_observers, significance_matrix, DmosResult,
    ObserverBias, ScreeningReport, SignificanceLayout, SignificanceMatrix,
};
use crate::table::{load_metric_table, DmosRecord, MetricRecord, Provenance};
use crate::{Error, Result};

pub const BUNDLE_VERSION: u32 = 1;
pub const DMOS_METRIC: &str = "dmos";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunOptions {
    pub seed: u64,
    pub screening: bool,
    pub bias_correction: bool,
    pub anchor_codec: String,
    pub test_codec: String,
    pub include_uncoded_in_correlation: bool,
    pub plcc_raw: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            seed: 0,
            screening: true,
            bias_correction: true,
            anchor_codec: "HEVC".into(),
            test_codec: "VVC".into(),
            include_uncoded_in_correlation: false,
            plcc_raw: false,
        }
    }
}

/// All inputs of a run. Relative paths are resolved against the manifest's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub scenes: PathBuf,
    pub manifest: PathBuf,
    pub plan: PathBuf,
    pub votes: PathBuf,
    #[serde(default)]
    pub metrics: Vec<PathBuf>,
    #[serde(default)]
    pub options: RunOptions,
}

impl RunManifest {
    pub fn from_toml(text: &str, base: &Path) -> Result<Self> {
        let mut m: RunManifest = toml::from_str(text)?;
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        resolve(&mut m.scenes);
        resolve(&mut m.manifest);
        resolve(&mut m.plan);
        resolve(&mut m.votes);
        m.metrics.iter_mut().for_each(resolve);
        Ok(m)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|_| Error::Missing(format!("run manifest `{}`", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, base)
    }

    fn check_inputs(&self) -> Result<()> {
        let mut missing = Vec::new();
        let named = [
            ("scenes", &self.scenes),
            ("manifest", &self.manifest),
            ("plan", &self.plan),
            ("votes", &self.votes),
        ];
        for (name, p) in named.into_iter().chain(self.metrics.iter().map(|p| ("metrics", p))) {
            if !p.is_file() {
                missing.push(format!("{name} `{}`", p.display()));
            }
        }
        if missing.is_empty() {
            Ok(())
        } else {
            Err(Error::Missing(format!("input files: {}", missing.join(", "))))
        }
    }
}

/// Already-loaded inputs, for callers that do not work from files.
#[derive(Debug, Clone)]
pub struct RunInputs {
    pub scenes: Vec<crate::catalog::SceneMeta>,
    pub manifest: EncodeManifest,
    pub plan: SessionPlan,
    pub votes: Vec<crate::session::VoteRecord>,
    pub metrics: Vec<MetricRecord>,
}

impl RunInputs {
    pub fn load(run: &RunManifest) -> Result<Self> {
        run.check_inputs()?;
        let mut metrics = Vec::new();
        for p in &run.metrics {
            metrics.extend(load_metric_table(p)?);
        }
        Ok(RunInputs {
            scenes: load_scene_table(&run.scenes)?,
            manifest: load_encode_manifest(&run.manifest)?,
            plan: SessionPlan::load(&run.plan)?,
            votes: import_votes(&run.votes)?,
            metrics,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DmosRow {
    #[serde(flatten)]
    pub result: DmosResult,
    pub provenance: Provenance,
}

/// One Table III style line: one scene, one quality measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BdRow {
    pub scene_id: String,
    pub metric_id: String,
    /// `None` when the curves cannot be compared; `warnings` says why.
    pub bd_rate_percent: Option<f64>,
    pub bd_quality: Option<f64>,
    /// Confidence-limit variants; DMOS rows only.
    pub bd_rate_upper: Option<f64>,
    pub bd_rate_lower: Option<f64>,
    pub bd_quality_upper: Option<f64>,
    pub bd_quality_lower: Option<f64>,
    pub warnings: Vec<BdWarning>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BdAverage {
    pub metric_id: String,
    /// Scenes contributing to the BD-rate mean.
    pub scenes: usize,
    pub bd_rate_percent: Option<f64>,
    pub bd_quality: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RdPointSeries {
    pub rate_mbps: f64,
    pub quality: f64,
    pub ci_half_width: Option<f64>,
}

/// One codec's rate-quality curve for one scene and measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RdSeries {
    pub scene_id: String,
    pub metric_id: String,
    pub codec: String,
    pub points: Vec<RdPointSeries>,
}

/// Horizontal DMOS band of an uncoded configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DmosBand {
    pub scene_id: String,
    pub config: ConfigId,
    pub dmos: f64,
    pub ci95_half_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub version: u32,
    pub options: RunOptions,
    pub observers: usize,
    pub votes: usize,
    pub ladder_warnings: Vec<LadderWarning>,
    pub screening: Option<ScreeningReport>,
    pub biases: Vec<ObserverBias>,
    pub dmos: Vec<DmosRow>,
    pub significance: Vec<SignificanceMatrix>,
    pub bd: Vec<BdRow>,
    pub bd_average: Vec<BdAverage>,
    pub correlation: Vec<CorrelationReport>,
    pub rd_series: Vec<RdSeries>,
    pub dmos_bands: Vec<DmosBand>,
}

impl ReportBundle {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn dmos_records(&self) -> Vec<DmosRecord> {
        self.dmos
            .iter()
            .map(|r| DmosRecord {
                scene: r.result.scene_id.clone(),
                config: r.result.config.clone(),
                dmos: r.result.dmos,
            })
            .collect()
    }
}

pub fn run_pipeline(run: &RunManifest) -> Result<ReportBundle> {
    let inputs = RunInputs::load(run)?;
    run_with_inputs(&inputs, &run.options)
}

/// Turns a curve-comparison failure (no overlap, repeated values) into a warning.
fn usable<T>(r: Result<T>, warnings: &mut Vec<BdWarning>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(e @ (Error::Insufficient(_) | Error::Duplicate(_))) => {
            let reason = e.to_string();
            if !warnings.iter().any(|w| matches!(w, BdWarning::Unavailable { reason: r } if *r == reason)) {
                warnings.push(BdWarning::Unavailable { reason });
            }
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

fn curve_rates(manifest: &EncodeManifest, scene: &str, codec: &str) -> Result<Vec<f64>> {
    (1..=RATE_POINTS)
        .map(|i| {
            manifest
                .row(scene, codec, i)
                .map(|r| r.bitrate_mbps)
                .ok_or_else(|| Error::Missing(format!("manifest row ({scene}, {codec}, {i})")))
        })
        .collect()
}

pub fn run_with_inputs(inputs: &RunInputs, options: &RunOptions) -> Result<ReportBundle> {
    let catalog = build_pvs_catalog(&inputs.scenes, &inputs.manifest)?;
    let known: std::collections::BTreeSet<PvsKey> = catalog.iter().map(|p| p.key()).collect();
    for btc in inputs.plan.btcs() {
        if !known.contains(&btc.key()) {
            return Err(Error::Unknown {
                kind: "PVS",
                key: format!("{} (BTC {})", btc.key(), btc.btc_index),
            });
        }
    }
    for codec in [&options.anchor_codec, &options.test_codec] {
        if !inputs.manifest.codecs().contains(codec) {
            return Err(Error::Unknown {
                kind: "codec",
                key: codec.clone(),
            });
        }
    }

    let raw = differential_scores(&inputs.votes, &inputs.plan)?;
    let observers = raw.observers().len();
    let (screened, screening) = if options.screening {
        let out = screen_observers(&raw)?;
        (out.retained, Some(out.report))
    } else {
        (raw, None)
    };
    let (biases, matrix) = if options.bias_correction {
        (observer_biases(&screened), remove_bias(&screened))
    } else {
        (Vec::new(), screened)
    };

    let dmos_results = dmos(&matrix)?;
    let by_key: BTreeMap<PvsKey, &DmosResult> = dmos_results
        .iter()
        .map(|d| (PvsKey::new(&d.scene_id, d.config.clone()), d))
        .collect();
    let dmos_rows: Vec<DmosRow> = dmos_results
        .iter()
        .map(|d| DmosRow {
            provenance: Provenance::new("dmos", PvsKey::new(&d.scene_id, d.config.clone()).to_string()),
            result: d.clone(),
        })
        .collect();

    let scene_ids: Vec<String> = inputs.scenes.iter().map(|s| s.scene_id.clone()).collect();
    let layout = SignificanceLayout {
        anchor_codec: options.anchor_codec.clone(),
        test_codec: options.test_codec.clone(),
    };
    let significance = scene_ids
        .par_iter()
        .map(|s| significance_matrix(&matrix, s, &layout))
        .collect::<Result<Vec<_>>>()?;

    let mut metric_values: BTreeMap<(String, PvsKey), f64> = BTreeMap::new();
    for m in &inputs.metrics {
        if metric_values.insert((m.metric_id.clone(), m.key()), m.value).is_some() {
            return Err(Error::Duplicate(format!("{} value for {}", m.metric_id, m.key())));
        }
    }
    let metric_ids: Vec<String> = {
        let mut ids: Vec<String> = metric_values.keys().map(|(m, _)| m.clone()).collect();
        ids.dedup();
        ids
    };

    let codecs = [options.anchor_codec.as_str(), options.test_codec.as_str()];
    let mut rd_series = Vec::new();
    let mut dmos_bands = Vec::new();
    let mut bd_rows = Vec::new();
    for scene in &scene_ids {
        let key = |config: ConfigId| PvsKey::new(scene, config);
        let lookup_dmos = |config: ConfigId| {
            by_key
                .get(&key(config.clone()))
                .copied()
                .ok_or_else(|| Error::Missing(format!("DMOS for {scene}/{config}")))
        };

        let mut dmos_points: Vec<Vec<DmosPoint>> = Vec::new();
        for codec in codecs {
            let rates = curve_rates(&inputs.manifest, scene, codec)?;
            let mut pts = Vec::new();
            for (i, rate) in rates.iter().enumerate() {
                let d = lookup_dmos(ConfigId::coded(codec, i as u8 + 1))?;
                pts.push(DmosPoint::from_result(*rate, d));
            }
            rd_series.push(RdSeries {
                scene_id: scene.clone(),
                metric_id: DMOS_METRIC.into(),
                codec: codec.to_string(),
                points: pts
                    .iter()
                    .map(|p| RdPointSeries {
                        rate_mbps: p.rate,
                        quality: p.dmos,
                        ci_half_width: Some(p.ci95_half_width),
                    })
                    .collect(),
            });
            dmos_points.push(pts);
        }
        for config in [ConfigId::Downscaled4K, ConfigId::Reference] {
            let d = lookup_dmos(config.clone())?;
            dmos_bands.push(DmosBand {
                scene_id: scene.clone(),
                config,
                dmos: d.dmos,
                ci95_half_width: d.ci95_half_width,
            });
        }

        for metric_id in &metric_ids {
            let mut curves = Vec::new();
            for codec in codecs {
                let rates = curve_rates(&inputs.manifest, scene, codec)?;
                let mut pairs = Vec::new();
                for (i, rate) in rates.iter().enumerate() {
                    let k = (metric_id.clone(), key(ConfigId::coded(codec, i as u8 + 1)));
                    let v = metric_values
                        .get(&k)
                        .ok_or_else(|| Error::Missing(format!("{metric_id} value for {}", k.1)))?;
                    pairs.push((*rate, *v));
                }
                rd_series.push(RdSeries {
                    scene_id: scene.clone(),
                    metric_id: metric_id.clone(),
                    codec: codec.to_string(),
                    points: pairs
                        .iter()
                        .map(|&(rate_mbps, quality)| RdPointSeries {
                            rate_mbps,
                            quality,
                            ci_half_width: None,
                        })
                        .collect(),
                });
                curves.push(RdCurve::from_pairs(codec, metric_id, &pairs)?);
            }
            let mut warnings = Vec::new();
            let rate = usable(bd_rate(&curves[0], &curves[1]), &mut warnings)?;
            let quality = usable(bd_quality(&curves[0], &curves[1]), &mut warnings)?;
            bd_rows.push(BdRow {
                scene_id: scene.clone(),
                metric_id: metric_id.clone(),
                bd_rate_percent: rate.as_ref().map(|r| r.rate_percent()),
                bd_quality: quality.map(|q| q.quality()),
                bd_rate_upper: None,
                bd_rate_lower: None,
                bd_quality_upper: None,
                bd_quality_lower: None,
                warnings: rate.map(|r| r.warnings).unwrap_or_default().into_iter().chain(warnings).collect(),
                provenance: Provenance::new("bd_rate", format!("{scene}/{metric_id}")),
            });
        }

        let mut warnings = Vec::new();
        let rate = usable(bd_rate_limits(&dmos_points[0], &dmos_points[1]), &mut warnings)?;
        let quality = usable(bd_quality_limits(&dmos_points[0], &dmos_points[1]), &mut warnings)?;
        bd_rows.push(BdRow {
            scene_id: scene.clone(),
            metric_id: DMOS_METRIC.into(),
            bd_rate_percent: rate.as_ref().map(|r| r.nominal.rate_percent()),
            bd_quality: quality.as_ref().map(|q| q.nominal.quality()),
            bd_rate_upper: rate.as_ref().map(|r| r.upper.rate_percent()),
            bd_rate_lower: rate.as_ref().map(|r| r.lower.rate_percent()),
            bd_quality_upper: quality.as_ref().map(|q| q.upper.quality()),
            bd_quality_lower: quality.as_ref().map(|q| q.lower.quality()),
            warnings: rate.map(|r| r.nominal.warnings).unwrap_or_default().into_iter().chain(warnings).collect(),
            provenance: Provenance::new("bd_rate_limits", format!("{scene}/{DMOS_METRIC}")),
        });
    }

    let mut bd_average = Vec::new();
    for metric_id in metric_ids.iter().map(String::as_str).chain([DMOS_METRIC]) {
        let rows: Vec<&BdRow> = bd_rows.iter().filter(|r| r.metric_id == metric_id).collect();
        if rows.is_empty() {
            continue;
        }
        let rates: Vec<f64> = rows.iter().filter_map(|r| r.bd_rate_percent).collect();
        let qualities: Vec<f64> = rows.iter().filter_map(|r| r.bd_quality).collect();
        let mean = |v: &[f64]| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
        bd_average.push(BdAverage {
            metric_id: metric_id.to_string(),
            scenes: rates.len(),
            bd_rate_percent: mean(&rates),
            bd_quality: mean(&qualities),
        });
    }

    let dmos_records: Vec<DmosRecord> = dmos_results
        .iter()
        .map(|d| DmosRecord {
            scene: d.scene_id.clone(),
            config: d.config.clone(),
            dmos: d.dmos,
        })
        .collect();
    let correlation = if inputs.metrics.is_empty() {
        Vec::new()
    } else {
        correlation_report(
            &dmos_records,
            &inputs.metrics,
            &CorrelationOptions {
                include_uncoded: options.include_uncoded_in_correlation,
                plcc_raw: options.plcc_raw,
                ..Default::default()
            },
        )?
    };

    Ok(ReportBundle {
        version: BUNDLE_VERSION,
        options: options.clone(),
        observers,
        votes: inputs.votes.len(),
        ladder_warnings: validate_rate_ladder(&inputs.manifest, LadderRules::default()),
        screening,
        biases,
        dmos: dmos_rows,
        significance,
        bd: bd_rows,
        bd_average,
        correlation,
        rd_series,
        dmos_bands,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::invalid("format", format!("`{other}` (expected csv or json)"))),
        }
    }
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}

fn file_stem(metric_id: &str) -> String {
    metric_id
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
        .collect()
}

#[derive(Debug, Serialize)]
struct RdRow<'a> {
    scene: &'a str,
    series: &'a str,
    rate_mbps: f64,
    quality: f64,
    ci_low: Option<f64>,
    ci_high: Option<f64>,
}

#[derive(Debug, Serialize)]
struct ScatterRow<'a> {
    scene: &'a str,
    config: String,
    x: f64,
    dmos: f64,
}

#[derive(Debug, Serialize)]
struct FitRow {
    x: f64,
    f: f64,
    lower: f64,
    upper: f64,
    band_half_width: f64,
}

/// Writes plot-ready series: RD curves per measure, DMOS curves with REF/4K
/// bands, and scatter plus fitted curve per correlated metric.
pub fn emit_plots(bundle: &ReportBundle, out_dir: &Path, format: OutputFormat) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir)?;
    let ext = match format {
        OutputFormat::Csv => "csv",
        OutputFormat::Json => "json",
    };
    let mut written = Vec::new();

    let mut by_metric: BTreeMap<&str, Vec<&RdSeries>> = BTreeMap::new();
    for s in &bundle.rd_series {
        by_metric.entry(&s.metric_id).or_default().push(s);
    }
    for (metric_id, series) in &by_metric {
        let mut rows = Vec::new();
        for s in series {
            for p in &s.points {
                rows.push(RdRow {
                    scene: &s.scene_id,
                    series: &s.codec,
                    rate_mbps: p.rate_mbps,
                    quality: p.quality,
                    ci_low: p.ci_half_width.map(|c| p.quality - c),
                    ci_high: p.ci_half_width.map(|c| p.quality + c),
                });
            }
        }
        if *metric_id == DMOS_METRIC {
            // bands span the scene's plotted rate range
            for band in &bundle.dmos_bands {
                let rates = series
                    .iter()
                    .filter(|s| s.scene_id == band.scene_id)
                    .flat_map(|s| s.points.iter().map(|p| p.rate_mbps));
                let (lo, hi) = rates.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| (a.min(r), b.max(r)));
                if !lo.is_finite() {
                    continue;
                }
                for rate in [lo, hi] {
                    rows.push(RdRow {
                        scene: &band.scene_id,
                        series: if band.config == ConfigId::Reference { "REF" } else { "4K" },
                        rate_mbps: rate,
                        quality: band.dmos,
                        ci_low: Some(band.dmos - band.ci95_half_width),
                        ci_high: Some(band.dmos + band.ci95_half_width),
                    });
                }
            }
        }
        let path = out_dir.join(format!("rd_{}.{ext}", file_stem(metric_id)));
        match format {
            OutputFormat::Csv => write_csv(&path, &rows)?,
            OutputFormat::Json => write_json(&path, &rows)?,
        }
        written.push(path);
    }

    for report in &bundle.correlation {
        let stem = file_stem(&report.metric_id);
        let points: Vec<ScatterRow> = report
            .scatter
            .iter()
            .map(|p| ScatterRow {
                scene: &p.scene_id,
                config: p.config.to_string(),
                x: p.x,
                dmos: p.dmos,
            })
            .collect();
        let band_half_width = 2.0 * report.residual_std;
        let fit: Vec<FitRow> = report
            .curve
            .iter()
            .map(|c| FitRow {
                x: c.x,
                f: c.f,
                lower: c.lower,
                upper: c.upper,
                band_half_width,
            })
            .collect();
        match format {
            OutputFormat::Csv => {
                let p = out_dir.join(format!("scatter_{stem}_points.csv"));
                write_csv(&p, &points)?;
                written.push(p);
                let p = out_dir.join(format!("scatter_{stem}_fit.csv"));
                write_csv(&p, &fit)?;
                written.push(p);
            }
            OutputFormat::Json => {
                let p = out_dir.join(format!("scatter_{stem}.json"));
                write_json(
                    &p,
                    &serde_json::json!({
                        "metric_id": report.metric_id,
                        "fit": report.fit,
                        "residual_std": report.residual_std,
                        "band_half_width": band_half_width,
                        "points": points,
                        "curve": fit,
                    }),
                )?;
                written.push(p);
            }
        }
    }
    Ok(written)
}

/// Writes `report.json` plus the flat tables in the requested format.
pub fn write_bundle(bundle: &ReportBundle, out_dir: &Path, format: OutputFormat) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    let report = out_dir.join("report.json");
    std::fs::write(&report, bundle.to_json()?)?;
    written.push(report);
    if format == OutputFormat::Csv {
        let dmos: Vec<&DmosResult> = bundle.dmos.iter().map(|r| &r.result).collect();
        let p = out_dir.join("dmos.csv");
        write_csv(&p, &dmos)?;
        written.push(p);

        #[derive(Serialize)]
        struct BdCsv<'a> {
            scene: &'a str,
            metric_id: &'a str,
            bd_rate_percent: Option<f64>,
            bd_rate_upper: Option<f64>,
            bd_rate_lower: Option<f64>,
            bd_quality: Option<f64>,
            bd_quality_upper: Option<f64>,
            bd_quality_lower: Option<f64>,
        }
        let bd: Vec<BdCsv> = bundle
            .bd
            .iter()
            .map(|r| BdCsv {
                scene: &r.scene_id,
                metric_id: &r.metric_id,
                bd_rate_percent: r.bd_rate_percent,
                bd_rate_upper: r.bd_rate_upper,
                bd_rate_lower: r.bd_rate_lower,
                bd_quality: r.bd_quality,
                bd_quality_upper: r.bd_quality_upper,
                bd_quality_lower: r.bd_quality_lower,
            })
            .collect();
        let p = out_dir.join("bd.csv");
        write_csv(&p, &bd)?;
        written.push(p);

        #[derive(Serialize)]
        struct SigCsv<'a> {
            scene: &'a str,
            row: String,
            column: String,
            p: f64,
            p_display: &'a str,
            significant: bool,
        }
        let mut sig = Vec::new();
        for m in &bundle.significance {
            for c in m.cells.iter().flatten() {
                sig.push(SigCsv {
                    scene: &m.scene_id,
                    row: c.row.to_string(),
                    column: c.column.to_string(),
                    p: c.p,
                    p_display: &c.p_display,
                    significant: c.significant,
                });
            }
        }
        let p = out_dir.join("significance.csv");
        write_csv(&p, &sig)?;
        written.push(p);

        #[derive(Serialize)]
        struct CorrCsv<'a> {
            metric_id: &'a str,
            n: usize,
            srocc: f64,
            plcc: f64,
            krocc: f64,
            rmse: f64,
        }
        let corr: Vec<CorrCsv> = bundle
            .correlation
            .iter()
            .map(|c| CorrCsv {
                metric_id: &c.metric_id,
                n: c.n,
                srocc: c.srocc,
                plcc: c.plcc,
                krocc: c.krocc,
                rmse: c.rmse,
            })
            .collect();
        let p = out_dir.join("correlation.csv");
        write_csv(&p, &corr)?;
        written.push(p);
    }
    Ok(written)
}
