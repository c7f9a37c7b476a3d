//! Observer-facing views of a plan. These never carry scene or configuration identity.

use serde::{Deserialize, Serialize};

use crate::session::{Btc, BtcTiming, Phase, SessionPlan};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseCue {
    pub phase: Phase,
    /// "A" or "B" for clip phases.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clip: Option<String>,
    /// Offset from the start of the BTC.
    pub start_seconds: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BtcDescriptor {
    pub btc_index: u32,
    /// 1-based session number and position inside it.
    pub session: usize,
    pub position: usize,
    /// Offset of the BTC from the start of its session.
    pub start_seconds: f64,
    pub phases: Vec<PhaseCue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Playlist {
    pub session: usize,
    pub timing: BtcTiming,
    pub total_seconds: f64,
    pub btcs: Vec<BtcDescriptor>,
}

fn cues(btc: &Btc, timing: &BtcTiming) -> Vec<PhaseCue> {
    let mut t = 0.0;
    btc.phases()
        .iter()
        .map(|&phase| {
            let clip = match phase {
                Phase::ShowA => Some("A".to_string()),
                Phase::ShowB => Some("B".to_string()),
                _ => None,
            };
            let seconds = timing.phase_seconds(phase);
            let cue = PhaseCue {
                phase,
                clip,
                start_seconds: t,
                seconds,
            };
            t += seconds;
            cue
        })
        .collect()
}

impl SessionPlan {
    /// Blind descriptor of one BTC, or `None` for an unknown index.
    pub fn descriptor(&self, btc_index: u32) -> Option<BtcDescriptor> {
        self.sessions.iter().enumerate().find_map(|(s, btcs)| {
            btcs.iter().position(|b| b.btc_index == btc_index).map(|pos| BtcDescriptor {
                btc_index,
                session: s + 1,
                position: pos + 1,
                start_seconds: pos as f64 * self.timing.btc_seconds(),
                phases: cues(&btcs[pos], &self.timing),
            })
        })
    }

    /// Ordered blind descriptors of session `k` (1-based).
    pub fn playlist(&self, k: usize) -> Option<Playlist> {
        let btcs = self.sessions.get(k.checked_sub(1)?)?;
        Some(Playlist {
            session: k,
            timing: self.timing,
            total_seconds: btcs.len() as f64 * self.timing.btc_seconds(),
            btcs: btcs.iter().filter_map(|b| self.descriptor(b.btc_index)).collect(),
        })
    }
}

/// Body of a vote submission; the server stamps the time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VoteSubmission {
    pub observer_id: String,
    pub btc_index: u32,
    pub score_a: f64,
    pub score_b: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObserverRegistration {
    pub observer_id: String,
}
