//! Where command results go: files under `--out`, or stdout.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Result;
use serde::Serialize;

use vqa_core::correlation::CorrelationReport;
use vqa_core::metrics::SitiResult;
use vqa_core::pipeline::OutputFormat;
use vqa_core::subjective::SignificanceCell;
use vqa_core::table::MetricRecord;

pub struct Sink {
    dir: Option<PathBuf>,
    format: OutputFormat,
}

impl Sink {
    pub fn new(dir: Option<PathBuf>, format: OutputFormat) -> Result<Self> {
        if let Some(d) = &dir {
            std::fs::create_dir_all(d)?;
        }
        Ok(Sink { dir, format })
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn format(&self) -> OutputFormat {
        self.format
    }

    pub fn is_json(&self) -> bool {
        self.format == OutputFormat::Json
    }

    /// Rows as CSV or a JSON array, per `--format`.
    pub fn table<T: Serialize>(&self, name: &str, rows: &[T]) -> Result<()> {
        match self.format {
            OutputFormat::Json => self.json(name, rows),
            OutputFormat::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                for r in rows {
                    w.serialize(r)?;
                }
                let bytes = w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?;
                self.text(&format!("{name}.csv"), std::str::from_utf8(&bytes)?)
            }
        }
    }

    pub fn json<T: Serialize + ?Sized>(&self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.text(&format!("{name}.json"), &text)
    }

    pub fn text(&self, file_name: &str, text: &str) -> Result<()> {
        match &self.dir {
            Some(d) => {
                let p = d.join(file_name);
                std::fs::write(&p, text)?;
                eprintln!("wrote {}", p.display());
            }
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(text.as_bytes())?;
                if !text.ends_with('\n') {
                    out.write_all(b"\n")?;
                }
            }
        }
        Ok(())
    }

    /// Human-oriented status line on stderr.
    pub fn note(&self, line: &str) -> Result<()> {
        eprintln!("{line}");
        Ok(())
    }
}

#[derive(Serialize)]
pub struct MetricRow<'a> {
    scene: &'a str,
    config: String,
    metric_id: &'a str,
    value: f64,
}

impl<'a> From<&'a MetricRecord> for MetricRow<'a> {
    fn from(m: &'a MetricRecord) -> Self {
        MetricRow {
            scene: &m.scene,
            config: m.config.to_string(),
            metric_id: &m.metric_id,
            value: m.value,
        }
    }
}

#[derive(Serialize)]
pub struct SignificanceRow<'a> {
    scene: &'a str,
    row: String,
    column: String,
    t: f64,
    dof: f64,
    p: f64,
    p_display: &'a str,
    significant: bool,
}

impl<'a> SignificanceRow<'a> {
    pub fn new(scene: &'a str, c: &'a SignificanceCell) -> Self {
        SignificanceRow {
            scene,
            row: c.row.to_string(),
            column: c.column.to_string(),
            t: c.t,
            dof: c.dof,
            p: c.p,
            p_display: &c.p_display,
            significant: c.significant,
        }
    }
}

#[derive(Serialize, Default)]
pub struct BdOut {
    pub anchor: String,
    pub test: String,
    pub metric_id: String,
    pub bd_rate_percent: Option<f64>,
    pub bd_rate_upper: Option<f64>,
    pub bd_rate_lower: Option<f64>,
    pub bd_quality: Option<f64>,
    pub bd_quality_upper: Option<f64>,
    pub bd_quality_lower: Option<f64>,
    pub warnings: usize,
}

#[derive(Serialize)]
pub struct CorrelationRow<'a> {
    metric_id: &'a str,
    n: usize,
    srocc: f64,
    plcc: f64,
    krocc: f64,
    rmse: f64,
    beta1: f64,
    beta2: f64,
    beta3: f64,
    beta4: f64,
    fit_converged: bool,
}

impl<'a> CorrelationRow<'a> {
    pub fn new(r: &'a CorrelationReport) -> Self {
        CorrelationRow {
            metric_id: &r.metric_id,
            n: r.n,
            srocc: r.srocc,
            plcc: r.plcc,
            krocc: r.krocc,
            rmse: r.rmse,
            beta1: r.fit.beta1,
            beta2: r.fit.beta2,
            beta3: r.fit.beta3,
            beta4: r.fit.beta4,
            fit_converged: r.fit_converged,
        }
    }
}

#[derive(Serialize)]
pub struct SitiRow<'a> {
    scene: &'a str,
    si: f64,
    ti: f64,
    frames: usize,
}

impl<'a> SitiRow<'a> {
    pub fn new(scene: &'a str, r: &SitiResult) -> Self {
        SitiRow {
            scene,
            si: r.si,
            ti: r.ti,
            frames: r.per_frame_si.len(),
        }
    }
}
