//! `vqa`: codec quality evaluation from the command line.

mod output;

use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use vqa_core::bd::{bd_quality, bd_quality_limits, bd_rate, bd_rate_limits, DmosPoint, RdCurve};
use vqa_core::catalog::{build_pvs_catalog, load_encode_manifest, load_scene_table, ConfigId, SceneMeta};
use vqa_core::correlation::{correlation_report, CorrelationOptions};
use vqa_core::frame::read_frames;
use vqa_core::metrics::{ingest_vmaf_log, sequence_metric, si_ti, MetricId, Pooling};
use vqa_core::pipeline::{emit_plots, run_pipeline, write_bundle, OutputFormat, RunManifest};
use vqa_core::session::{export_votes, import_votes, plan_sessions, BtcTiming, PlanOptions, SessionPlan};
use vqa_core::subjective::{
    differential_scores, dmos, remove_bias, screen_observers, significance_matrix, welch_t_test, ScoreMatrix,
    SignificanceLayout,
};
use vqa_core::synthetic::{synthetic_metrics, synthetic_votes, VoteModel};
use vqa_core::table::{load_curve_table, load_dmos_table, load_metric_table, MetricRecord};

use output::Sink;

#[derive(Parser)]
#[command(name = "vqa", version, about = "Codec quality evaluation: metrics, DSCQS statistics, BD deltas, correlation")]
struct Cli {
    /// Seed for planning and simulation.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; results go to stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Table format.
    #[arg(long, global = true, default_value = "csv")]
    format: OutputFormat,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a randomized DSCQS session plan.
    Plan(PlanArgs),
    /// Run the vote-collection service.
    Serve(ServeArgs),
    /// Full-reference PSNR / SSIM / MS-SSIM of one processed sequence.
    Metrics(MetricsArgs),
    /// Spatial and temporal information of a sequence.
    Siti(SitiArgs),
    /// Read pooled VMAF scores from libvmaf JSON logs.
    IngestVmaf(VmafArgs),
    /// BT.500 observer screening of a vote log.
    Screen(VotesArgs),
    /// DMOS with 95% confidence intervals.
    Dmos(DmosArgs),
    /// Welch t-tests: per-scene significance grids, or two explicit samples.
    Ttest(TtestArgs),
    /// Bjontegaard delta rate and quality between two curves.
    Bd(BdArgs),
    /// Logistic fit and SROCC/PLCC/KROCC/RMSE of metrics against DMOS.
    Correlate(CorrelateArgs),
    /// Full report bundle and plot series from a run manifest.
    Report(ReportArgs),
    /// Download the vote log from a running service.
    Export(ExportArgs),
    /// Write a synthetic plan, vote log, metric table and run manifest.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct PlanArgs {
    #[arg(long)]
    scenes: PathBuf,
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, default_value_t = 3)]
    sessions: usize,
    #[arg(long)]
    allow_adjacent_scenes: bool,
    #[command(flatten)]
    timing: TimingArgs,
}

#[derive(Args)]
struct TimingArgs {
    #[arg(long, default_value_t = 10.0)]
    clip_seconds: f64,
    #[arg(long, default_value_t = 3.0)]
    grey_seconds: f64,
    #[arg(long, default_value_t = 10.0)]
    vote_seconds: f64,
}

impl TimingArgs {
    fn timing(&self) -> BtcTiming {
        BtcTiming {
            clip_seconds: self.clip_seconds,
            grey_seconds: self.grey_seconds,
            vote_seconds: self.vote_seconds,
        }
    }
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long)]
    plan: PathBuf,
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: std::net::IpAddr,
    /// Append-only vote log.
    #[arg(long)]
    store: PathBuf,
}

#[derive(Args)]
struct Geometry {
    /// Scene table to take geometry from (with --scene).
    #[arg(long, requires = "scene")]
    scenes: Option<PathBuf>,
    #[arg(long)]
    scene: Option<String>,
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    height: Option<usize>,
    #[arg(long)]
    bit_depth: Option<u8>,
}

impl Geometry {
    fn meta(&self) -> Result<SceneMeta> {
        let mut meta = match (&self.scenes, &self.scene) {
            (Some(table), Some(id)) => load_scene_table(table)?
                .into_iter()
                .find(|s| &s.scene_id == id)
                .with_context(|| format!("scene `{id}` not in {}", table.display()))?,
            _ => SceneMeta::yuv420(self.scene.as_deref().unwrap_or("input"), 0, 0, 8),
        };
        if let Some(w) = self.width {
            meta.width = w;
        }
        if let Some(h) = self.height {
            meta.height = h;
        }
        if let Some(b) = self.bit_depth {
            meta.bit_depth = b;
        }
        Ok(meta)
    }
}

#[derive(Args)]
struct MetricsArgs {
    #[arg(long)]
    reference: PathBuf,
    #[arg(long)]
    distorted: PathBuf,
    /// psnr, ssim or msssim; repeatable.
    #[arg(long = "metric", default_values = ["psnr", "ssim", "msssim"])]
    metrics: Vec<MetricId>,
    /// PSNR pooling: frame (mean of per-frame PSNR) or global (PSNR of mean MSE).
    #[arg(long, default_value = "frame")]
    pooling: Pooling,
    /// Configuration label for the metric table rows, e.g. VVC-R2.
    #[arg(long, default_value = "REF")]
    config: ConfigId,
    #[command(flatten)]
    geometry: Geometry,
}

#[derive(Args)]
struct SitiArgs {
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    geometry: Geometry,
}

#[derive(Args)]
struct VmafArgs {
    /// `SCENE:CONFIG=path` entries.
    #[arg(required = true)]
    logs: Vec<String>,
}

#[derive(Args)]
struct VotesArgs {
    #[arg(long)]
    plan: PathBuf,
    #[arg(long)]
    votes: PathBuf,
}

#[derive(Args)]
struct DmosArgs {
    #[command(flatten)]
    votes: VotesArgs,
    #[arg(long)]
    no_screening: bool,
    #[arg(long)]
    no_bias_correction: bool,
}

#[derive(Args)]
struct TtestArgs {
    #[arg(long, requires = "votes", conflicts_with_all = ["sample1", "sample2"])]
    plan: Option<PathBuf>,
    #[arg(long)]
    votes: Option<PathBuf>,
    /// Restrict the grids to one scene.
    #[arg(long)]
    scene: Option<String>,
    #[arg(long, default_value = "HEVC")]
    anchor_codec: String,
    #[arg(long, default_value = "VVC")]
    test_codec: String,
    #[arg(long)]
    no_screening: bool,
    #[arg(long)]
    no_bias_correction: bool,
    /// Comma-separated sample.
    #[arg(long, value_delimiter = ',', requires = "sample2")]
    sample1: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    sample2: Vec<f64>,
}

#[derive(Args)]
struct BdArgs {
    /// Curve table: label,metric_id,rate_mbps,quality[,ci_half_width].
    #[arg(long)]
    curves: PathBuf,
    #[arg(long)]
    anchor: String,
    #[arg(long)]
    test: String,
    /// Only curves of this metric.
    #[arg(long)]
    metric: Option<String>,
    /// Also compute the confidence-limit variants from ci_half_width.
    #[arg(long)]
    limits: bool,
}

#[derive(Args)]
struct CorrelateArgs {
    /// Table scene,config,dmos.
    #[arg(long)]
    dmos: PathBuf,
    /// Tables scene,config,metric_id,value; repeatable.
    #[arg(long = "metrics", required = true)]
    metrics: Vec<PathBuf>,
    /// PLCC on raw metric values instead of the logistic-mapped ones.
    #[arg(long)]
    plcc_raw: bool,
    /// Keep REF and 4K points.
    #[arg(long)]
    include_uncoded: bool,
}

#[derive(Args)]
struct ReportArgs {
    /// Run manifest (TOML).
    #[arg(long)]
    run: PathBuf,
    #[arg(long)]
    no_screening: bool,
    #[arg(long)]
    no_bias_correction: bool,
    #[arg(long)]
    plcc_raw: bool,
}

#[derive(Args)]
struct ExportArgs {
    /// Service base URL.
    #[arg(long, default_value = "http://127.0.0.1:8080")]
    server: String,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    scenes: PathBuf,
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, default_value_t = 3)]
    sessions: usize,
    #[arg(long, default_value_t = 22)]
    observers: usize,
    #[arg(long, default_value_t = 0)]
    adversarial: usize,
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    let sink = Sink::new(cli.out.clone(), cli.format)?;
    let seed = cli.seed.unwrap_or(0);
    match cli.command {
        Command::Plan(a) => plan(&sink, seed, a),
        Command::Serve(a) => serve(a),
        Command::Metrics(a) => metrics(&sink, a),
        Command::Siti(a) => {
            let f = std::fs::File::open(&a.input).with_context(|| a.input.display().to_string())?;
            let meta = a.geometry.meta()?;
            let r = si_ti(&read_frames(f, &meta)?)?;
            if sink.is_json() {
                sink.json("siti", &r)
            } else {
                sink.table("siti", &[output::SitiRow::new(&meta.scene_id, &r)])
            }
        }
        Command::IngestVmaf(a) => vmaf(&sink, a),
        Command::Screen(a) => {
            let (plan, matrix) = scores(&a)?;
            drop(plan);
            let outcome = screen_observers(&matrix)?;
            sink.table("screening", &outcome.report.observers)?;
            sink.note(&format!("rejected: {:?}", outcome.report.rejected))
        }
        Command::Dmos(a) => {
            let (_, matrix) = scores(&a.votes)?;
            let matrix = prepare(matrix, !a.no_screening, !a.no_bias_correction)?;
            sink.table("dmos", &dmos(&matrix)?)
        }
        Command::Ttest(a) => ttest(&sink, a),
        Command::Bd(a) => bd(&sink, a),
        Command::Correlate(a) => correlate(&sink, a),
        Command::Report(a) => report(&sink, cli.seed, a),
        Command::Export(a) => export(&sink, a),
        Command::Simulate(a) => simulate(&sink, seed, a),
    }
}

fn plan(sink: &Sink, seed: u64, a: PlanArgs) -> Result<()> {
    let catalog = build_pvs_catalog(&load_scene_table(&a.scenes)?, &load_encode_manifest(&a.manifest)?)?;
    let options = PlanOptions {
        allow_adjacent_scenes: a.allow_adjacent_scenes,
    };
    let plan = plan_sessions(&catalog, a.sessions, seed, a.timing.timing(), options)?;
    sink.text("plan.json", &plan.to_json()?)?;
    let minutes: Vec<String> = plan.session_seconds().iter().map(|s| format!("{:.1}", s / 60.0)).collect();
    sink.note(&format!("{} BTCs, session minutes: {}", plan.len(), minutes.join(", ")))
}

fn serve(a: ServeArgs) -> Result<()> {
    let plan = SessionPlan::load(&a.plan).with_context(|| format!("plan {}", a.plan.display()))?;
    let state = vqa_service::AppState::open(plan, &a.store)?;
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(SocketAddr::new(a.host, a.port))
            .await
            .with_context(|| format!("binding {}:{}", a.host, a.port))?;
        println!("listening on http://{}", listener.local_addr()?);
        vqa_service::serve_on(state, listener, async {
            tokio::signal::ctrl_c().await.ok();
        })
        .await?;
        Ok(())
    })
}

fn metrics(sink: &Sink, a: MetricsArgs) -> Result<()> {
    let meta = a.geometry.meta()?;
    let mut rows = Vec::new();
    let mut results = Vec::new();
    for metric in &a.metrics {
        let open = |p: &Path| std::fs::File::open(p).with_context(|| p.display().to_string());
        let r = sequence_metric(open(&a.reference)?, open(&a.distorted)?, &meta, *metric, a.pooling)?;
        rows.push(MetricRecord {
            scene: meta.scene_id.clone(),
            config: a.config.clone(),
            metric_id: metric.as_str().to_string(),
            value: r.aggregate,
        });
        results.push(r);
    }
    if sink.is_json() {
        sink.json("metrics", &results)
    } else {
        sink.table("metrics", &rows)
    }
}

fn vmaf(sink: &Sink, a: VmafArgs) -> Result<()> {
    let mut rows = Vec::new();
    for entry in &a.logs {
        let (key, path) = entry
            .split_once('=')
            .with_context(|| format!("`{entry}`: expected SCENE:CONFIG=path"))?;
        let (scene, config) = key
            .split_once(':')
            .with_context(|| format!("`{key}`: expected SCENE:CONFIG"))?;
        rows.push(MetricRecord {
            scene: scene.to_string(),
            config: config.parse()?,
            metric_id: "vmaf".into(),
            value: ingest_vmaf_log(path)?,
        });
    }
    sink.table("vmaf", &rows)
}

fn scores(a: &VotesArgs) -> Result<(SessionPlan, ScoreMatrix)> {
    let plan = SessionPlan::load(&a.plan).with_context(|| format!("plan {}", a.plan.display()))?;
    let votes = import_votes(&a.votes)?;
    let matrix = differential_scores(&votes, &plan)?;
    Ok((plan, matrix))
}

fn prepare(matrix: ScoreMatrix, screening: bool, bias_correction: bool) -> Result<ScoreMatrix> {
    let matrix = if screening {
        screen_observers(&matrix)?.retained
    } else {
        matrix
    };
    Ok(if bias_correction { remove_bias(&matrix) } else { matrix })
}

fn ttest(sink: &Sink, a: TtestArgs) -> Result<()> {
    if let (Some(plan), Some(votes)) = (&a.plan, &a.votes) {
        let (_, matrix) = scores(&VotesArgs {
            plan: plan.clone(),
            votes: votes.clone(),
        })?;
        let matrix = prepare(matrix, !a.no_screening, !a.no_bias_correction)?;
        let layout = SignificanceLayout {
            anchor_codec: a.anchor_codec,
            test_codec: a.test_codec,
        };
        let scenes: Vec<String> = match a.scene {
            Some(s) => vec![s],
            None => matrix.scenes().into_iter().collect(),
        };
        let grids = scenes
            .iter()
            .map(|s| significance_matrix(&matrix, s, &layout))
            .collect::<vqa_core::Result<Vec<_>>>()?;
        if sink.is_json() {
            return sink.json("significance", &grids);
        }
        let cells: Vec<_> = grids
            .iter()
            .flat_map(|g| g.cells.iter().flatten().map(move |c| output::SignificanceRow::new(&g.scene_id, c)))
            .collect();
        return sink.table("significance", &cells);
    }
    if a.sample1.is_empty() {
        bail!("give --plan and --votes, or --sample1 and --sample2");
    }
    sink.table("ttest", &[welch_t_test(&a.sample1, &a.sample2)?])
}

fn bd(sink: &Sink, a: BdArgs) -> Result<()> {
    let records: Vec<_> = load_curve_table(&a.curves)?
        .into_iter()
        .filter(|r| a.metric.as_ref().is_none_or(|m| &r.metric_id == m))
        .collect();
    let pick = |label: &str| -> Result<Vec<_>> {
        let v: Vec<_> = records.iter().filter(|r| r.label == label).cloned().collect();
        if v.is_empty() {
            bail!("no points labelled `{label}` in {}", a.curves.display());
        }
        let metrics: std::collections::BTreeSet<&str> = v.iter().map(|r| r.metric_id.as_str()).collect();
        if metrics.len() > 1 {
            bail!("curve `{label}` mixes metrics {metrics:?}; pick one with --metric");
        }
        Ok(v)
    };
    let (anchor, test) = (pick(&a.anchor)?, pick(&a.test)?);
    let metric_id = anchor[0].metric_id.clone();
    let mut row = output::BdOut {
        anchor: a.anchor.clone(),
        test: a.test.clone(),
        metric_id,
        ..Default::default()
    };
    if a.limits {
        let points = |v: &[vqa_core::table::CurveRecord]| -> Result<Vec<DmosPoint>> {
            v.iter()
                .map(|r| {
                    Ok(DmosPoint {
                        rate: r.rate_mbps,
                        dmos: r.quality,
                        ci95_half_width: r
                            .ci_half_width
                            .with_context(|| format!("--limits needs ci_half_width on every `{}` row", r.label))?,
                    })
                })
                .collect()
        };
        let (pa, pt) = (points(&anchor)?, points(&test)?);
        let rate = bd_rate_limits(&pa, &pt)?;
        let quality = bd_quality_limits(&pa, &pt)?;
        row.bd_rate_percent = Some(rate.nominal.rate_percent());
        row.bd_rate_upper = Some(rate.upper.rate_percent());
        row.bd_rate_lower = Some(rate.lower.rate_percent());
        row.bd_quality = Some(quality.nominal.quality());
        row.bd_quality_upper = Some(quality.upper.quality());
        row.bd_quality_lower = Some(quality.lower.quality());
        row.warnings = rate.nominal.warnings.len();
    } else {
        let curve = |v: &[vqa_core::table::CurveRecord]| {
            let pairs: Vec<(f64, f64)> = v.iter().map(|r| (r.rate_mbps, r.quality)).collect();
            RdCurve::from_pairs(&v[0].label, &v[0].metric_id, &pairs)
        };
        let (ca, ct) = (curve(&anchor)?, curve(&test)?);
        let rate = bd_rate(&ca, &ct)?;
        row.bd_rate_percent = Some(rate.rate_percent());
        row.bd_quality = Some(bd_quality(&ca, &ct)?.quality());
        row.warnings = rate.warnings.len();
        for w in &rate.warnings {
            sink.note(&format!("warning: {w:?}"))?;
        }
    }
    sink.table("bd", &[row])
}

fn correlate(sink: &Sink, a: CorrelateArgs) -> Result<()> {
    let dmos = load_dmos_table(&a.dmos)?;
    let mut metrics = Vec::new();
    for p in &a.metrics {
        metrics.extend(load_metric_table(p)?);
    }
    let options = CorrelationOptions {
        include_uncoded: a.include_uncoded,
        plcc_raw: a.plcc_raw,
        ..Default::default()
    };
    let reports = correlation_report(&dmos, &metrics, &options)?;
    if sink.is_json() {
        return sink.json("correlation", &reports);
    }
    let rows: Vec<_> = reports.iter().map(output::CorrelationRow::new).collect();
    sink.table("correlation", &rows)
}

fn report(sink: &Sink, seed: Option<u64>, a: ReportArgs) -> Result<()> {
    let mut run = RunManifest::load(&a.run)?;
    if let Some(s) = seed {
        run.options.seed = s;
    }
    run.options.screening &= !a.no_screening;
    run.options.bias_correction &= !a.no_bias_correction;
    run.options.plcc_raw |= a.plcc_raw;
    let bundle = run_pipeline(&run)?;
    match sink.dir() {
        Some(dir) => {
            let mut written = write_bundle(&bundle, dir, sink.format())?;
            written.extend(emit_plots(&bundle, &dir.join("plots"), sink.format())?);
            for p in written {
                sink.note(&format!("wrote {}", p.display()))?;
            }
            Ok(())
        }
        None => sink.text("report.json", &bundle.to_json()?),
    }
}

fn export(sink: &Sink, a: ExportArgs) -> Result<()> {
    let client = vqa_client::VqaClient::new(a.server);
    let votes = tokio::runtime::Runtime::new()?.block_on(client.export())?;
    match sink.dir() {
        Some(dir) => {
            let p = dir.join("votes.jsonl");
            export_votes(&p, &votes)?;
            sink.note(&format!("{} votes written to {}", votes.len(), p.display()))
        }
        None => {
            let mut out = Vec::new();
            vqa_core::session::write_votes(&mut out, &votes)?;
            sink.text("votes.jsonl", std::str::from_utf8(&out)?)
        }
    }
}

fn simulate(sink: &Sink, seed: u64, a: SimulateArgs) -> Result<()> {
    let Some(dir) = sink.dir() else {
        bail!("simulate writes several files; give --out <dir>");
    };
    let scenes = std::path::absolute(&a.scenes)?;
    let manifest = std::path::absolute(&a.manifest)?;
    let catalog = build_pvs_catalog(&load_scene_table(&scenes)?, &load_encode_manifest(&manifest)?)?;
    let plan = plan_sessions(&catalog, a.sessions, seed, BtcTiming::default(), PlanOptions::default())?;
    let model = VoteModel {
        observers: a.observers,
        adversarial: a.adversarial,
        ..Default::default()
    };
    let votes = synthetic_votes(&catalog, &plan, &model, seed)?;
    std::fs::write(dir.join("plan.json"), plan.to_json()?)?;
    export_votes(dir.join("votes.jsonl"), &votes)?;
    let mut w = csv::Writer::from_path(dir.join("metrics.csv"))?;
    for m in synthetic_metrics(&catalog, seed) {
        w.serialize(output::MetricRow::from(&m))?;
    }
    w.flush()?;
    let run = format!(
        "scenes = {}\nmanifest = {}\nplan = \"plan.json\"\nvotes = \"votes.jsonl\"\nmetrics = [\"metrics.csv\"]\n\n[options]\nseed = {seed}\n",
        toml_string(&scenes),
        toml_string(&manifest),
    );
    std::fs::write(dir.join("run.toml"), run)?;
    sink.note(&format!(
        "{} votes from {} observers over {} BTCs; run with `vqa report --run {}`",
        votes.len(),
        a.observers,
        plan.len(),
        dir.join("run.toml").display()
    ))
}

fn toml_string(p: &Path) -> String {
    serde_json::to_string(&p.display().to_string()).expect("string serializes")
}
