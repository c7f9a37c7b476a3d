use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::catalog::{ConfigId, Pvs, PvsKey};
use crate::session::BtcTiming;
use crate::{Error, Result};

/// Presentation phases of one basic test cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    ShowA,
    Grey,
    ShowB,
    Vote,
}

/// A, grey, B, grey, A, grey, B, vote.
pub const BTC_PHASES: [Phase; 8] = [
    Phase::ShowA,
    Phase::Grey,
    Phase::ShowB,
    Phase::Grey,
    Phase::ShowA,
    Phase::Grey,
    Phase::ShowB,
    Phase::Vote,
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Btc {
    /// 1-based position in the whole plan.
    pub btc_index: u32,
    pub scene_id: String,
    pub test_config: ConfigId,
    /// Whether clip A is the hidden reference (otherwise clip B is).
    pub a_is_reference: bool,
}

impl Btc {
    pub fn key(&self) -> PvsKey {
        PvsKey::new(&self.scene_id, self.test_config.clone())
    }

    pub fn phases(&self) -> &'static [Phase; 8] {
        &BTC_PHASES
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionPlan {
    pub seed: u64,
    pub timing: BtcTiming,
    pub sessions: Vec<Vec<Btc>>,
}

impl SessionPlan {
    pub fn btcs(&self) -> impl Iterator<Item = &Btc> {
        self.sessions.iter().flatten()
    }

    pub fn btc(&self, index: u32) -> Option<&Btc> {
        self.btcs().find(|b| b.btc_index == index)
    }

    pub fn len(&self) -> usize {
        self.sessions.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Estimated duration of each session in seconds.
    pub fn session_seconds(&self) -> Vec<f64> {
        self.sessions
            .iter()
            .map(|s| s.len() as f64 * self.timing.btc_seconds())
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PlanOptions {
    /// Drop the rule that consecutive BTCs show different scenes.
    pub allow_adjacent_scenes: bool,
}

/// Whether the remaining per-scene counts can still be laid out with no two
/// neighbours sharing a scene, given the scene placed last.
fn arrangeable(counts: &BTreeMap<&str, usize>, last: Option<&str>) -> bool {
    let total: usize = counts.values().sum();
    counts.iter().all(|(scene, &c)| {
        let others = total - c;
        if Some(*scene) == last {
            c <= others
        } else {
            c <= others + 1
        }
    })
}

/// Orders one BTC per catalog entry and splits the order into `n_sessions`
/// contiguous sessions whose sizes differ by at most one.
///
/// Unless `allow_adjacent_scenes` is set, no two consecutive BTCs share a scene,
/// including across session boundaries. Reference-side assignment is balanced to
/// within one over the plan. The result depends only on the inputs and `seed`.
pub fn plan_sessions(
    catalog: &[Pvs],
    n_sessions: usize,
    seed: u64,
    timing: BtcTiming,
    options: PlanOptions,
) -> Result<SessionPlan> {
    timing.validate()?;
    if n_sessions == 0 {
        return Err(Error::invalid("n_sessions", "must be at least 1"));
    }
    if catalog.is_empty() {
        return Err(Error::Insufficient("empty catalog".into()));
    }
    let mut seen = std::collections::BTreeSet::new();
    for pvs in catalog {
        if !seen.insert(pvs.key()) {
            return Err(Error::Duplicate(format!("catalog entry {}", pvs.key())));
        }
    }

    let mut pending: BTreeMap<&str, Vec<&Pvs>> = BTreeMap::new();
    for pvs in catalog {
        pending.entry(pvs.scene_id.as_str()).or_default().push(pvs);
    }
    let mut counts: BTreeMap<&str, usize> = pending.iter().map(|(s, v)| (*s, v.len())).collect();
    if !options.allow_adjacent_scenes && !arrangeable(&counts, None) {
        let (scene, worst) = counts.iter().max_by_key(|(_, c)| **c).expect("non-empty");
        return Err(Error::Unsatisfiable(format!(
            "scene `{scene}` has {worst} of {} BTCs; no order avoids adjacent repeats (use allow_adjacent_scenes)",
            catalog.len()
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<&Pvs> = Vec::with_capacity(catalog.len());
    let mut last: Option<&str> = None;
    while order.len() < catalog.len() {
        let candidates: Vec<&str> = counts
            .iter()
            .filter(|(_, &c)| c > 0)
            .map(|(s, _)| *s)
            .filter(|s| {
                if options.allow_adjacent_scenes {
                    return true;
                }
                if Some(*s) == last {
                    return false;
                }
                let mut next = counts.clone();
                *next.get_mut(s).expect("present") -= 1;
                arrangeable(&next, Some(s))
            })
            .collect();
        // weight scenes by how many BTCs they still hold
        let weights: Vec<usize> = candidates.iter().map(|s| counts[s]).collect();
        let mut pick = rng.random_range(0..weights.iter().sum::<usize>());
        let mut chosen = candidates[0];
        for (s, w) in candidates.iter().zip(&weights) {
            if pick < *w {
                chosen = s;
                break;
            }
            pick -= w;
        }
        let bucket = pending.get_mut(chosen).expect("present");
        let idx = rng.random_range(0..bucket.len());
        order.push(bucket.swap_remove(idx));
        *counts.get_mut(chosen).expect("present") -= 1;
        last = Some(chosen);
    }

    let n = order.len();
    let mut reference_on_a: Vec<bool> = (0..n).map(|i| i < n / 2).collect();
    reference_on_a.shuffle(&mut rng);

    let btcs: Vec<Btc> = order
        .into_iter()
        .zip(reference_on_a)
        .enumerate()
        .map(|(i, (pvs, a_ref))| Btc {
            btc_index: i as u32 + 1,
            scene_id: pvs.scene_id.clone(),
            test_config: pvs.config.clone(),
            a_is_reference: a_ref,
        })
        .collect();

    let base = n / n_sessions;
    let extra = n % n_sessions;
    let mut sessions = Vec::with_capacity(n_sessions);
    let mut iter = btcs.into_iter();
    for k in 0..n_sessions {
        let size = base + usize::from(k < extra);
        sessions.push(iter.by_ref().take(size).collect());
    }
    Ok(SessionPlan {
        seed,
        timing,
        sessions,
    })
}
