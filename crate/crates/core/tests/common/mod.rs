#![allow(dead_code)]

use std::path::{Path, PathBuf};

use vqa_core::catalog::{build_pvs_catalog, load_encode_manifest, load_scene_table, Pvs};
use vqa_core::session::{export_votes, plan_sessions, BtcTiming, PlanOptions, SessionPlan, VoteRecord};
use vqa_core::synthetic::{synthetic_metrics, synthetic_votes, VoteModel};

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn fixture_catalog() -> Vec<Pvs> {
    let scenes = load_scene_table(fixtures().join("table1_scenes.csv")).unwrap();
    let manifest = load_encode_manifest(fixtures().join("table2_manifest.csv")).unwrap();
    build_pvs_catalog(&scenes, &manifest).unwrap()
}

pub struct RunFiles {
    pub manifest: PathBuf,
    pub plan: SessionPlan,
    pub votes: Vec<VoteRecord>,
}

/// Plan, synthetic votes, synthetic metrics and a run manifest in `dir`.
pub fn write_run(dir: &Path, seed: u64, with_metrics: bool, extra_options: &str) -> RunFiles {
    let catalog = fixture_catalog();
    let plan = plan_sessions(&catalog, 3, seed, BtcTiming::default(), PlanOptions::default()).unwrap();
    let votes = synthetic_votes(&catalog, &plan, &VoteModel::default(), seed).unwrap();
    std::fs::write(dir.join("plan.json"), plan.to_json().unwrap()).unwrap();
    export_votes(dir.join("votes.jsonl"), &votes).unwrap();
    let mut metrics_line = String::new();
    if with_metrics {
        let mut w = csv::Writer::from_path(dir.join("metrics.csv")).unwrap();
        w.write_record(["scene", "config", "metric_id", "value"]).unwrap();
        for m in synthetic_metrics(&catalog, seed) {
            w.write_record([m.scene, m.config.to_string(), m.metric_id, m.value.to_string()]).unwrap();
        }
        w.flush().unwrap();
        metrics_line = "metrics = [\"metrics.csv\"]\n".into();
    }
    let fx = fixtures();
    let text = format!(
        "scenes = {:?}\nmanifest = {:?}\nplan = \"plan.json\"\nvotes = \"votes.jsonl\"\n{metrics_line}\n[options]\nseed = {seed}\n{extra_options}",
        fx.join("table1_scenes.csv"),
        fx.join("table2_manifest.csv"),
    );
    let manifest = dir.join("run.toml");
    std::fs::write(&manifest, text).unwrap();
    RunFiles { manifest, plan, votes }
}
