//! Comma-separated table plumbing shared by the scene, manifest, metric and curve readers.

use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::catalog::{ConfigId, PvsKey};
use crate::{Error, Result};

/// One data row with its source location.
#[derive(Debug, Clone)]
pub struct Row {
    pub location: String,
    pub fields: Vec<String>,
}

impl Row {
    pub fn error(&self, message: impl Into<String>) -> Error {
        Error::parse(self.location.clone(), message)
    }

    pub fn expect_len(&self, n: usize) -> Result<()> {
        if self.fields.len() < n {
            return Err(self.error(format!("expected {n} fields, found {}", self.fields.len())));
        }
        Ok(())
    }

    pub fn field<T: FromStr>(&self, idx: usize, name: &str) -> Result<T> {
        let raw = self
            .fields
            .get(idx)
            .ok_or_else(|| self.error(format!("field `{name}`: missing")))?;
        raw.trim()
            .parse()
            .map_err(|_| self.error(format!("field `{name}`: cannot parse `{raw}`")))
    }

    pub fn optional<T: FromStr>(&self, idx: usize, name: &str) -> Result<Option<T>> {
        match self.fields.get(idx).map(|s| s.trim()) {
            None | Some("") => Ok(None),
            Some(_) => self.field(idx, name).map(Some),
        }
    }
}

/// Reads all rows; a first row whose first cell is `header_first` (or `header_first` + `_id`) is skipped.
/// Lines starting with `#` are comments.
pub fn read_rows<R: Read>(reader: R, source: &str, header_first: &str) -> Result<Vec<Row>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::parse(source, e.to_string()))?;
        let line = record.position().map(|p| p.line()).unwrap_or(i as u64 + 1);
        if i == 0 && record.get(0).is_some_and(|c| c == header_first || c.strip_suffix("_id") == Some(header_first)) {
            continue;
        }
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        rows.push(Row {
            location: format!("{source}:{line}"),
            fields: record.iter().map(str::to_string).collect(),
        });
    }
    Ok(rows)
}

fn open(path: &Path) -> Result<(std::fs::File, String)> {
    Ok((std::fs::File::open(path)?, path.display().to_string()))
}

/// `scene,config,metric_id,value`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub scene: String,
    pub config: ConfigId,
    pub metric_id: String,
    pub value: f64,
}

impl MetricRecord {
    pub fn key(&self) -> PvsKey {
        PvsKey::new(&self.scene, self.config.clone())
    }
}

pub fn read_metric_table<R: Read>(reader: R, source: &str) -> Result<Vec<MetricRecord>> {
    read_rows(reader, source, "scene")?
        .iter()
        .map(|row| {
            row.expect_len(4)?;
            Ok(MetricRecord {
                scene: row.field(0, "scene")?,
                config: parse_config(row, 1)?,
                metric_id: row.field(2, "metric_id")?,
                value: row.field(3, "value")?,
            })
        })
        .collect()
}

pub fn load_metric_table(path: impl AsRef<Path>) -> Result<Vec<MetricRecord>> {
    let (f, src) = open(path.as_ref())?;
    read_metric_table(f, &src)
}

/// `scene,config,dmos`; further columns are ignored, so a DMOS report table loads as is.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DmosRecord {
    pub scene: String,
    pub config: ConfigId,
    pub dmos: f64,
}

pub fn read_dmos_table<R: Read>(reader: R, source: &str) -> Result<Vec<DmosRecord>> {
    read_rows(reader, source, "scene")?
        .iter()
        .map(|row| {
            row.expect_len(3)?;
            Ok(DmosRecord {
                scene: row.field(0, "scene")?,
                config: parse_config(row, 1)?,
                dmos: row.field(2, "dmos")?,
            })
        })
        .collect()
}

pub fn load_dmos_table(path: impl AsRef<Path>) -> Result<Vec<DmosRecord>> {
    let (f, src) = open(path.as_ref())?;
    read_dmos_table(f, &src)
}

/// `label,metric_id,rate_mbps,quality[,ci_half_width]`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRecord {
    pub label: String,
    pub metric_id: String,
    pub rate_mbps: f64,
    pub quality: f64,
    pub ci_half_width: Option<f64>,
}

pub fn read_curve_table<R: Read>(reader: R, source: &str) -> Result<Vec<CurveRecord>> {
    read_rows(reader, source, "label")?
        .iter()
        .map(|row| {
            row.expect_len(4)?;
            Ok(CurveRecord {
                label: row.field(0, "label")?,
                metric_id: row.field(1, "metric_id")?,
                rate_mbps: row.field(2, "rate_mbps")?,
                quality: row.field(3, "quality")?,
                ci_half_width: row.optional(4, "ci_half_width")?,
            })
        })
        .collect()
}

pub fn load_curve_table(path: impl AsRef<Path>) -> Result<Vec<CurveRecord>> {
    let (f, src) = open(path.as_ref())?;
    read_curve_table(f, &src)
}

fn parse_config(row: &Row, idx: usize) -> Result<ConfigId> {
    let raw: String = row.field(idx, "config")?;
    raw.parse().map_err(|e: Error| row.error(e.to_string()))
}

/// Where a report cell came from: the producing operation and its input key.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub op: String,
    pub key: String,
}

impl Provenance {
    pub fn new(op: &str, key: impl Into<String>) -> Self {
        Provenance {
            op: op.to_string(),
            key: key.into(),
        }
    }
}
