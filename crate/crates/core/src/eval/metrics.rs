//! Success weighted by path length, its baseline-shifted variant, and
//! bootstrap intervals.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::metapolicy::EpisodeTrace;
use crate::world::rng;
use crate::world::{Split, TaskKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub task_id: String,
    pub kind: TaskKind,
    pub split: Split,
    pub success: bool,
    /// Whether the answer was right; `None` for relocation tasks.
    pub correct: Option<bool>,
    /// Primitive steps taken.
    pub path_length: u64,
    /// Oracle shortest-path estimate, at least 1.
    pub oracle_length: u32,
}

impl EpisodeRecord {
    pub fn from_trace(trace: &EpisodeTrace) -> Self {
        EpisodeRecord {
            task_id: trace.task_id.clone(),
            kind: trace.kind,
            split: trace.split,
            success: trace.success,
            correct: trace.kind.is_question().then_some(trace.success),
            path_length: trace.primitive_length,
            oracle_length: trace.oracle_length.max(1),
        }
    }

    /// `S · ℓ / max(p, ℓ)` for this episode.
    pub fn weighted_success(&self) -> f64 {
        if !self.success {
            return 0.0;
        }
        let l = self.oracle_length as f64;
        l / (self.path_length as f64).max(l)
    }
}

/// Fraction of successful episodes.
pub fn accuracy(records: &[EpisodeRecord]) -> Result<f64, EvalError> {
    if records.is_empty() {
        return Err(EvalError::Empty);
    }
    Ok(records.iter().filter(|r| r.success).count() as f64 / records.len() as f64)
}

/// `1/N Σ S_i ℓ_i / max(p_i, ℓ_i)`.
pub fn spl(records: &[EpisodeRecord]) -> Result<f64, EvalError> {
    if records.is_empty() {
        return Err(EvalError::Empty);
    }
    Ok(records.iter().map(EpisodeRecord::weighted_success).sum::<f64>() / records.len() as f64)
}

/// `(μ − b) / (1 − b) · SPL`, where `μ` is the accuracy of `records`.
/// Negative values are returned as they are.
pub fn sspl(records: &[EpisodeRecord], b: f64) -> Result<f64, EvalError> {
    if !(0.0..1.0).contains(&b) {
        return Err(EvalError::InvalidBaseline(b));
    }
    Ok(shift(accuracy(records)?, b, spl(records)?))
}

/// The shift applied by [`sspl`] given `μ`, `b` and SPL.
pub fn shift(mu: f64, b: f64, spl: f64) -> f64 {
    (mu - b) / (1.0 - b) * spl
}

/// Percentile bootstrap 95% interval of the mean of `values`.
pub fn bootstrap_ci(values: &[f64], resamples: usize, seed: u64) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mut rng = rng::stream(seed, "bootstrap");
    let n = values.len();
    let mut means: Vec<f64> = (0..resamples.max(1))
        .map(|_| (0..n).map(|_| values[rng.gen_range(0..n)]).sum::<f64>() / n as f64)
        .collect();
    means.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let at = |q: f64| means[((q * (means.len() - 1) as f64).round() as usize).min(means.len() - 1)];
    (at(0.025), at(0.975))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(success: bool, p: u64, l: u32) -> EpisodeRecord {
        EpisodeRecord {
            task_id: String::new(),
            kind: TaskKind::PutIn,
            split: Split::UnseenTest,
            success,
            correct: None,
            path_length: p,
            oracle_length: l,
        }
    }

    #[test]
    fn bootstrap_brackets_the_mean() {
        let v: Vec<f64> = (0..100).map(|i| (i % 3 == 0) as u8 as f64).collect();
        let (lo, hi) = bootstrap_ci(&v, 2000, 1);
        let mean = v.iter().sum::<f64>() / 100.0;
        assert!(lo < mean && mean < hi);
    }

    #[test]
    fn failures_weigh_nothing() {
        assert_eq!(rec(false, 3, 3).weighted_success(), 0.0);
    }
}
