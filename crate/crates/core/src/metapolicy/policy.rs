//! Linear softmax actor with a linear critic.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::features::{FeatureVector, FEATURE_DIM};
use super::MetaAction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Sample,
    Greedy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaPolicy {
    /// Available meta-actions; row `i` of `actor` scores `actions[i]`.
    pub actions: Vec<MetaAction>,
    pub actor: Vec<Vec<f64>>,
    pub critic: Vec<f64>,
    pub temperature: f64,
}

fn dot(w: &[f64], f: &[f64]) -> f64 {
    w.iter().zip(f).map(|(a, b)| a * b).sum()
}

impl MetaPolicy {
    pub fn zeros(actions: Vec<MetaAction>) -> Self {
        let n = actions.len();
        MetaPolicy { actions, actor: vec![vec![0.0; FEATURE_DIM]; n], critic: vec![0.0; FEATURE_DIM], temperature: 1.0 }
    }

    pub fn logits(&self, f: &FeatureVector) -> Vec<f64> {
        self.actor.iter().map(|w| dot(w, f) / self.temperature).collect()
    }

    pub fn probabilities(&self, f: &FeatureVector) -> Vec<f64> {
        softmax(&self.logits(f))
    }

    pub fn value(&self, f: &FeatureVector) -> f64 {
        dot(&self.critic, f)
    }

    /// Samples from the softmax, or takes the most probable action (earliest
    /// in `actions` on ties).
    pub fn select<R: Rng>(&self, f: &FeatureVector, rng: &mut R, mode: Mode) -> MetaAction {
        let p = self.probabilities(f);
        let i = match mode {
            Mode::Greedy => {
                let mut best = 0;
                for j in 1..p.len() {
                    if p[j] > p[best] {
                        best = j;
                    }
                }
                best
            }
            Mode::Sample => {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                let mut pick = p.len() - 1;
                for (j, &pj) in p.iter().enumerate() {
                    acc += pj;
                    if u < acc {
                        pick = j;
                        break;
                    }
                }
                pick
            }
        };
        self.actions[i]
    }

    pub fn index_of(&self, a: MetaAction) -> Option<usize> {
        self.actions.iter().position(|&x| x == a)
    }

    pub fn max_abs_weight(&self) -> f64 {
        self.actor.iter().flatten().chain(&self.critic).fold(0.0, |m, w| m.max(w.abs()))
    }

    /// Gradient of `advantage · log π(a | f)` with respect to the actor.
    pub fn policy_gradient(&self, f: &FeatureVector, a: usize, advantage: f64) -> Vec<Vec<f64>> {
        let p = self.probabilities(f);
        (0..self.actions.len())
            .map(|j| {
                let coeff = advantage * ((j == a) as u8 as f64 - p[j]) / self.temperature;
                f.iter().map(|x| coeff * x).collect()
            })
            .collect()
    }

    /// Gradient of the policy entropy with respect to the actor.
    pub fn entropy_gradient(&self, f: &FeatureVector) -> Vec<Vec<f64>> {
        let p = self.probabilities(f);
        let h = entropy(&p);
        (0..self.actions.len())
            .map(|j| {
                let coeff = -p[j] * (p[j].ln() + h) / self.temperature;
                f.iter().map(|x| coeff * x).collect()
            })
            .collect()
    }

    /// Gradient of `½ (G − v(f))²` with respect to the critic.
    pub fn critic_gradient(&self, f: &FeatureVector, ret: f64) -> Vec<f64> {
        let err = ret - self.value(f);
        f.iter().map(|x| -err * x).collect()
    }
}

pub fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|x| (x - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

pub fn entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|x| x * x.ln()).sum::<f64>()
}

/// Largest relative error between the analytic actor and critic gradients
/// and central finite differences (step 1e-5). The actor objective is
/// `A · log π(a|f) + β · H(π(·|f))` with `A = G − v(f)` held fixed.
pub fn gradient_check(policy: &MetaPolicy, f: &FeatureVector, a: usize, ret: f64, entropy_weight: f64) -> f64 {
    const H: f64 = 1e-5;
    let advantage = ret - policy.value(f);
    let objective = |p: &MetaPolicy| {
        let probs = p.probabilities(f);
        advantage * probs[a].ln() + entropy_weight * entropy(&probs)
    };
    let critic_loss = |p: &MetaPolicy| 0.5 * (ret - p.value(f)).powi(2);

    let pg = policy.policy_gradient(f, a, advantage);
    let eg = policy.entropy_gradient(f);
    let cg = policy.critic_gradient(f, ret);
    let rel = |analytic: f64, numeric: f64| (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6);

    let mut worst: f64 = 0.0;
    let mut probe = policy.clone();
    for j in 0..policy.actions.len() {
        for i in 0..FEATURE_DIM {
            let w = policy.actor[j][i];
            probe.actor[j][i] = w + H;
            let up = objective(&probe);
            probe.actor[j][i] = w - H;
            let down = objective(&probe);
            probe.actor[j][i] = w;
            let numeric = (up - down) / (2.0 * H);
            worst = worst.max(rel(pg[j][i] + entropy_weight * eg[j][i], numeric));
        }
    }
    for (i, &g) in cg.iter().enumerate() {
        let w = policy.critic[i];
        probe.critic[i] = w + H;
        let up = critic_loss(&probe);
        probe.critic[i] = w - H;
        let down = critic_loss(&probe);
        probe.critic[i] = w;
        worst = worst.max(rel(g, (up - down) / (2.0 * H)));
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn softmax_is_a_distribution() {
        let p = softmax(&[1000.0, 0.0, -3.0, 2.0]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(p.iter().all(|&x| (0.0..=1.0).contains(&x)));
    }
}
