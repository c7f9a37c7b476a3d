//! Raw DSCQS votes and their line-delimited JSON log.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoteRecord {
    pub observer_id: String,
    pub btc_index: u32,
    pub score_a: f64,
    pub score_b: f64,
    pub timestamp: DateTime<Utc>,
}

impl VoteRecord {
    pub fn validate(&self) -> Result<()> {
        if self.observer_id.trim().is_empty() {
            return Err(Error::invalid("observer_id", "empty"));
        }
        for (name, s) in [("score_a", self.score_a), ("score_b", self.score_b)] {
            if !(0.0..=100.0).contains(&s) {
                return Err(Error::invalid("score", format!("{name} = {s} outside [0, 100]")));
            }
        }
        Ok(())
    }
}

pub fn read_votes<R: Read>(reader: R, source: &str) -> Result<Vec<VoteRecord>> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let location = format!("{source}:{}", i + 1);
        let vote: VoteRecord =
            serde_json::from_str(&line).map_err(|e| Error::parse(location.clone(), e.to_string()))?;
        vote.validate().map_err(|e| Error::parse(location, e.to_string()))?;
        out.push(vote);
    }
    Ok(out)
}

pub fn write_votes<W: Write>(mut writer: W, votes: &[VoteRecord]) -> Result<()> {
    for v in votes {
        serde_json::to_writer(&mut writer, v)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(())
}

pub fn import_votes(path: impl AsRef<Path>) -> Result<Vec<VoteRecord>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)?;
    read_votes(file, &path.display().to_string())
}

pub fn export_votes(path: impl AsRef<Path>, votes: &[VoteRecord]) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_votes(std::io::BufWriter::new(file), votes)
}
