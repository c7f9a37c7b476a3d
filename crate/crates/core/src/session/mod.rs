//! DSCQS session planning, rating-scale conversion and the vote log format.

mod descriptor;
mod plan;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use crate::subjective::votes::{export_votes, import_votes, read_votes, write_votes, VoteRecord};
pub use descriptor::{BtcDescriptor, ObserverRegistration, PhaseCue, Playlist, VoteSubmission};
pub use plan::{plan_sessions, Btc, Phase, PlanOptions, SessionPlan, BTC_PHASES};

/// Phase durations of one basic test cell, in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BtcTiming {
    pub clip_seconds: f64,
    pub grey_seconds: f64,
    pub vote_seconds: f64,
}

impl Default for BtcTiming {
    fn default() -> Self {
        BtcTiming {
            clip_seconds: 10.0,
            grey_seconds: 3.0,
            vote_seconds: 10.0,
        }
    }
}

impl BtcTiming {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("clip_seconds", self.clip_seconds),
            ("grey_seconds", self.grey_seconds),
            ("vote_seconds", self.vote_seconds),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid("timing", format!("{name} = {v} must be positive")));
            }
        }
        Ok(())
    }

    pub fn phase_seconds(&self, phase: Phase) -> f64 {
        match phase {
            Phase::ShowA | Phase::ShowB => self.clip_seconds,
            Phase::Grey => self.grey_seconds,
            Phase::Vote => self.vote_seconds,
        }
    }

    /// Four clip showings, three grey screens and one vote slot.
    pub fn btc_seconds(&self) -> f64 {
        BTC_PHASES.iter().map(|&p| self.phase_seconds(p)).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QualityLabel {
    Bad,
    Poor,
    Fair,
    Good,
    Excellent,
}

impl QualityLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            QualityLabel::Bad => "Bad",
            QualityLabel::Poor => "Poor",
            QualityLabel::Fair => "Fair",
            QualityLabel::Good => "Good",
            QualityLabel::Excellent => "Excellent",
        }
    }
}

/// Converts a mark on the continuous scale (fraction from the bottom) to a 0-100
/// score and the label of the equal-height segment it falls in.
pub fn scale_to_score(mark_fraction: f64) -> Result<(f64, QualityLabel)> {
    if !(0.0..=1.0).contains(&mark_fraction) {
        return Err(Error::invalid(
            "mark_fraction",
            format!("{mark_fraction} outside [0, 1]"),
        ));
    }
    // one decimal, half rounded up
    let score = (1000.0 * mark_fraction + 0.5).floor() / 10.0;
    let label = match score {
        s if s < 20.0 => QualityLabel::Bad,
        s if s < 40.0 => QualityLabel::Poor,
        s if s < 60.0 => QualityLabel::Fair,
        s if s < 80.0 => QualityLabel::Good,
        _ => QualityLabel::Excellent,
    };
    Ok((score, label))
}
