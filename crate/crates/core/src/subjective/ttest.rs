//! Welch's unequal-variance two-sample t-test, two-tailed.

use serde::{Deserialize, Serialize};

use crate::special::student_t_two_tailed;
use crate::subjective::{mean, sample_variance};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    #[serde(with = "crate::serde_util::float")]
    pub t: f64,
    pub dof: f64,
    pub p: f64,
    /// Both samples have zero variance; `p` follows the 1 (equal means) / 0 (different means) convention.
    pub degenerate: bool,
}

pub fn welch_t_test(sample1: &[f64], sample2: &[f64]) -> Result<TTestResult> {
    let (n1, n2) = (sample1.len(), sample2.len());
    if n1 < 2 || n2 < 2 {
        return Err(Error::Insufficient(format!(
            "t-test needs at least 2 values per sample, got {n1} and {n2}"
        )));
    }
    let (m1, m2) = (mean(sample1), mean(sample2));
    let se1 = sample_variance(sample1) / n1 as f64;
    let se2 = sample_variance(sample2) / n2 as f64;
    let denom = se1 + se2;
    if denom == 0.0 {
        let diff = m1 - m2;
        return Ok(TTestResult {
            t: if diff == 0.0 { 0.0 } else { diff.signum() * f64::INFINITY },
            dof: (n1 + n2 - 2) as f64,
            p: if diff == 0.0 { 1.0 } else { 0.0 },
            degenerate: true,
        });
    }
    let t = (m1 - m2) / denom.sqrt();
    let dof = if n1 == n2 && se1 == se2 {
        // the general expression reduces to this; evaluating it directly drifts by an ulp
        (2 * (n1 - 1)) as f64
    } else {
        denom * denom / (se1 * se1 / (n1 - 1) as f64 + se2 * se2 / (n2 - 1) as f64)
    };
    Ok(TTestResult {
        t,
        dof,
        p: student_t_two_tailed(t, dof),
        degenerate: false,
    })
}
