use std::collections::{BTreeMap, BTreeSet, HashSet};

use crate::catalog::PvsKey;
use crate::session::{SessionPlan, VoteRecord};
use crate::{Error, Result};

/// Differential scores indexed by (scene, configuration) and observer.
///
/// Scores above 100 are legal: they occur when the test clip outscored the reference.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScoreMatrix {
    scores: BTreeMap<PvsKey, BTreeMap<String, f64>>,
}

impl ScoreMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, key: PvsKey, observer: &str, score: f64) -> Result<()> {
        let population = self.scores.entry(key.clone()).or_default();
        if population.contains_key(observer) {
            return Err(Error::Duplicate(format!("score for observer `{observer}` on {key}")));
        }
        population.insert(observer.to_string(), score);
        Ok(())
    }

    pub fn get(&self, key: &PvsKey, observer: &str) -> Option<f64> {
        self.scores.get(key).and_then(|p| p.get(observer)).copied()
    }

    pub fn keys(&self) -> impl Iterator<Item = &PvsKey> {
        self.scores.keys()
    }

    pub fn contains(&self, key: &PvsKey) -> bool {
        self.scores.contains_key(key)
    }

    /// Scores of one population, ordered by observer id.
    pub fn population(&self, key: &PvsKey) -> Option<Vec<f64>> {
        self.scores.get(key).map(|p| p.values().copied().collect())
    }

    pub fn populations(&self) -> impl Iterator<Item = (&PvsKey, &BTreeMap<String, f64>)> {
        self.scores.iter()
    }

    pub fn observers(&self) -> BTreeSet<String> {
        self.scores.values().flat_map(|p| p.keys().cloned()).collect()
    }

    pub fn scenes(&self) -> BTreeSet<String> {
        self.scores.keys().map(|k| k.scene_id.clone()).collect()
    }

    pub fn observer_entries<'a>(&'a self, observer: &'a str) -> impl Iterator<Item = (&'a PvsKey, f64)> + 'a {
        self.scores
            .iter()
            .filter_map(move |(k, p)| p.get(observer).map(|&v| (k, v)))
    }

    pub fn without_observers(&self, drop: &BTreeSet<String>) -> ScoreMatrix {
        let scores = self
            .scores
            .iter()
            .map(|(k, p)| {
                let kept = p
                    .iter()
                    .filter(|(o, _)| !drop.contains(*o))
                    .map(|(o, &v)| (o.clone(), v))
                    .collect::<BTreeMap<_, _>>();
                (k.clone(), kept)
            })
            .filter(|(_, p)| !p.is_empty())
            .collect();
        ScoreMatrix { scores }
    }

    pub fn map_scores(&self, mut f: impl FnMut(&PvsKey, &str, f64) -> f64) -> ScoreMatrix {
        let scores = self
            .scores
            .iter()
            .map(|(k, p)| {
                let mapped = p.iter().map(|(o, &v)| (o.clone(), f(k, o, v))).collect();
                (k.clone(), mapped)
            })
            .collect();
        ScoreMatrix { scores }
    }

    /// Keeps only the populations of one scene.
    pub fn scene(&self, scene_id: &str) -> ScoreMatrix {
        let scores = self
            .scores
            .iter()
            .filter(|(k, _)| k.scene_id == scene_id)
            .map(|(k, p)| (k.clone(), p.clone()))
            .collect();
        ScoreMatrix { scores }
    }

    pub fn len(&self) -> usize {
        self.scores.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// `x = 100 - (y_ref - y_test)` for each vote, with the hidden-reference side taken from the plan.
pub fn differential_score(reference_score: f64, test_score: f64) -> f64 {
    100.0 - (reference_score - test_score)
}

pub fn differential_scores(votes: &[VoteRecord], plan: &SessionPlan) -> Result<ScoreMatrix> {
    let btcs: BTreeMap<u32, _> = plan.btcs().map(|b| (b.btc_index, b)).collect();
    let mut seen = HashSet::new();
    let mut matrix = ScoreMatrix::new();
    for vote in votes {
        vote.validate()?;
        let btc = btcs.get(&vote.btc_index).ok_or_else(|| Error::Unknown {
            kind: "BTC",
            key: vote.btc_index.to_string(),
        })?;
        if !seen.insert((vote.observer_id.as_str(), vote.btc_index)) {
            return Err(Error::Duplicate(format!(
                "vote by `{}` for BTC {}",
                vote.observer_id, vote.btc_index
            )));
        }
        let (y_ref, y_test) = if btc.a_is_reference {
            (vote.score_a, vote.score_b)
        } else {
            (vote.score_b, vote.score_a)
        };
        matrix.insert(btc.key(), &vote.observer_id, differential_score(y_ref, y_test))?;
    }
    Ok(matrix)
}
