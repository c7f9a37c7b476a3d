//! Append-only vote store backed by a line-delimited JSON file.

use std::collections::{BTreeSet, HashSet};
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use vqa_core::session::{import_votes, VoteRecord};

use crate::ServiceError;

#[derive(Debug)]
pub struct VoteStore {
    path: PathBuf,
    file: File,
    votes: Vec<VoteRecord>,
    cast: HashSet<(String, u32)>,
    observers: BTreeSet<String>,
}

impl VoteStore {
    /// Opens (or creates) the store; existing votes are loaded and their observers count as registered.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, ServiceError> {
        let path = path.as_ref().to_path_buf();
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| ServiceError::Store(format!("{}: {e}", path.display())))?;
        let votes = import_votes(&path).map_err(|e| ServiceError::Store(e.to_string()))?;
        let mut cast = HashSet::new();
        let mut observers = BTreeSet::new();
        for v in &votes {
            if !cast.insert((v.observer_id.clone(), v.btc_index)) {
                return Err(ServiceError::Store(format!(
                    "{}: duplicate vote ({}, {})",
                    path.display(),
                    v.observer_id,
                    v.btc_index
                )));
            }
            observers.insert(v.observer_id.clone());
        }
        Ok(VoteStore {
            path,
            file,
            votes,
            cast,
            observers,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn votes(&self) -> &[VoteRecord] {
        &self.votes
    }

    pub fn is_registered(&self, observer_id: &str) -> bool {
        self.observers.contains(observer_id)
    }

    /// Returns `false` when the observer was already known.
    pub fn register(&mut self, observer_id: &str) -> bool {
        self.observers.insert(observer_id.to_string())
    }

    pub fn has_voted(&self, observer_id: &str, btc_index: u32) -> bool {
        self.cast.contains(&(observer_id.to_string(), btc_index))
    }

    /// Writes the record and syncs it to disk before it becomes visible.
    pub fn append(&mut self, vote: VoteRecord) -> Result<(), ServiceError> {
        let mut line = serde_json::to_vec(&vote).map_err(|e| ServiceError::Store(e.to_string()))?;
        line.push(b'\n');
        self.file
            .write_all(&line)
            .and_then(|_| self.file.sync_data())
            .map_err(|e| ServiceError::Store(format!("{}: {e}", self.path.display())))?;
        self.cast.insert((vote.observer_id.clone(), vote.btc_index));
        self.votes.push(vote);
        Ok(())
    }
}
