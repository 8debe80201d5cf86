//! Masked REINFORCE with a per-cell EMA baseline, annealed entropy bonus,
//! and Adam updates.

use serde::{Deserialize, Serialize};

use super::adam::{adam_step, AdamState};
use super::curve::CurveRecorder;
use super::logits::{entropy_grad, log_prob_grad, LogitTable};
use super::{TrainObserver, TrainOutput};
use crate::cells::CellSpace;
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::sim::{Simulator, Softmax, Step};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PgConfig {
    pub learning_rate: f64,
    pub batch_size: u64,
    pub entropy_coef: f64,
    /// Multiplier applied to the entropy coefficient after every hand.
    pub entropy_anneal: f64,
    pub baseline_alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub budget_hands: u64,
    pub curve_window: u64,
    pub curve_every: u64,
    pub checkpoint_every: Option<u64>,
}

impl Default for PgConfig {
    fn default() -> Self {
        PgConfig {
            learning_rate: 3e-3,
            batch_size: 64,
            entropy_coef: 0.05,
            entropy_anneal: 0.99995,
            baseline_alpha: 0.02,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            budget_hands: 1_000_000,
            curve_window: 10_000,
            curve_every: 1_000,
            checkpoint_every: None,
        }
    }
}

impl PgConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("learning_rate", self.learning_rate),
            ("entropy_coef", self.entropy_coef),
            ("baseline_alpha", self.baseline_alpha),
            ("eps", self.eps),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("pg.{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("entropy_anneal", self.entropy_anneal), ("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Config(format!("pg.{name} must lie in (0, 1), got {v}")));
            }
        }
        if self.batch_size == 0 || self.budget_hands == 0 || self.curve_window == 0 || self.curve_every == 0 {
            return Err(Error::Config("pg batch size, budget and curve settings must be positive".into()));
        }
        Ok(())
    }

    /// Entropy coefficient after `hands` completed hands.
    pub fn entropy_coef_after(&self, hands: u64) -> f64 {
        self.entropy_coef * self.entropy_anneal.powf(hands as f64)
    }
}

/// Per-cell exponential moving average of returns. Starts at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineTable {
    pub values: Vec<f64>,
    pub visits: Vec<u64>,
    alpha: f64,
}

impl BaselineTable {
    pub fn new(n_cells: usize, alpha: f64) -> BaselineTable {
        BaselineTable { values: vec![0.0; n_cells], visits: vec![0; n_cells], alpha }
    }

    #[inline]
    pub fn get(&self, cell: usize) -> f64 {
        self.values[cell]
    }

    #[inline]
    pub fn update(&mut self, cell: usize, ret: f64) {
        let b = &mut self.values[cell];
        *b = (1.0 - self.alpha) * *b + self.alpha * ret;
        self.visits[cell] += 1;
    }
}

/// Accumulate one hand's contribution to the batch gradient and update the
/// baseline for every visited cell. Returns nothing; `grad` is a summed
/// (not yet averaged) ascent direction.
pub(crate) fn accumulate_hand(
    theta: &LogitTable,
    space: &CellSpace,
    traj: &[Step],
    ret: f64,
    entropy_coef: f64,
    baseline: &mut BaselineTable,
    grad: &mut [[f64; 5]],
) {
    for step in traj {
        let s = step.cell as usize;
        let mask = space.mask(s);
        let p = theta.probs(s, mask);
        let adv = ret - baseline.get(s);
        let lp = log_prob_grad(&p, mask, step.action);
        let eg = entropy_grad(&p, mask);
        let g = &mut grad[s];
        for i in 0..5 {
            g[i] += adv * lp[i] + entropy_coef * eg[i];
        }
    }
    for step in traj {
        baseline.update(step.cell as usize, ret);
    }
}

pub fn pg_train(
    config: &PgConfig,
    space: &CellSpace,
    stream: RngStream,
    observer: &mut impl TrainObserver,
) -> Result<TrainOutput> {
    config.validate()?;
    let n = space.len();
    let sim = Simulator::new(space);
    let mut theta = LogitTable::zeros(n);
    let mut adam = AdamState::new(theta.len());
    let mut baseline = BaselineTable::new(n, config.baseline_alpha);
    let mut grad = vec![[0.0f64; 5]; n];
    let mut neg = vec![0.0f64; theta.len()];
    let mut curve = CurveRecorder::new(config.curve_window, config.curve_every);
    let mut rng = stream.rng();
    let mut traj = Vec::new();
    let mut entropy_coef = config.entropy_coef;
    let mut hands = 0u64;
    let mut next_checkpoint = config.checkpoint_every;

    while hands < config.budget_hands {
        let batch = config.batch_size.min(config.budget_hands - hands);
        grad.iter_mut().for_each(|g| *g = [0.0; 5]);
        for _ in 0..batch {
            let out = sim.play_hand_into(&Softmax(&theta), &mut rng, &mut traj)?;
            accumulate_hand(&theta, space, &traj, out.ret, entropy_coef, &mut baseline, &mut grad);
            entropy_coef *= config.entropy_anneal;
            curve.push(out.ret);
        }
        hands += batch;
        let scale = 1.0 / batch as f64;
        for (dst, g) in neg.iter_mut().zip(grad.as_flattened()) {
            *dst = -g * scale;
        }
        if let Some(i) = neg.iter().position(|g| !g.is_finite()) {
            return Err(Error::NonFiniteGradient {
                hands,
                detail: format!("cell {} action slot {}", i / 5, i % 5),
            });
        }
        adam_step(theta.as_mut_slice(), &neg, &mut adam, config.learning_rate, config.beta1, config.beta2, config.eps);
        if let Some(at) = next_checkpoint {
            if hands >= at {
                observer.checkpoint(hands, &theta)?;
                next_checkpoint = config.checkpoint_every.map(|e| at + e);
            }
        }
    }
    debug_assert!(theta.is_finite());
    Ok(TrainOutput { theta, curve: curve.finish(), hands })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cells::Action;
    use crate::optim::NoCheckpoints;
    use crate::rules::Rules;

    #[test]
    fn zero_advantage_without_entropy_gives_zero_gradient() {
        let space = CellSpace::new(Rules::benchmark());
        let theta = LogitTable::zeros(space.len());
        let mut baseline = BaselineTable::new(space.len(), 0.02);
        let s = 17usize;
        baseline.values[s] = 0.75;
        let mut grad = vec![[0.0; 5]; space.len()];
        let traj = [Step { cell: s as u32, action: Action::Hit }];
        accumulate_hand(&theta, &space, &traj, 0.75, 0.0, &mut baseline, &mut grad);
        assert!(grad.iter().all(|g| g.iter().all(|&x| x == 0.0)));
    }

    #[test]
    fn baseline_replays_ema() {
        let mut b = BaselineTable::new(3, 0.02);
        let rets = [1.0, -1.0, 1.5, -2.0, 0.0, 1.0];
        let mut expect = 0.0;
        for &g in &rets {
            b.update(1, g);
            expect = 0.98 * expect + 0.02 * g;
        }
        assert_eq!(b.get(1), expect);
        assert_eq!(b.visits[1], rets.len() as u64);
        assert_eq!(b.get(0), 0.0);
    }

    #[test]
    fn config_rejects_bad_anneal() {
        let c = PgConfig { entropy_anneal: 1.0, ..PgConfig::default() };
        assert!(c.validate().is_err());
    }

    #[test]
    fn short_run_is_deterministic_and_finite() {
        let space = CellSpace::new(Rules::benchmark());
        let cfg = PgConfig { budget_hands: 5_000, ..PgConfig::default() };
        let a = pg_train(&cfg, &space, RngStream::new(3, 0), &mut NoCheckpoints).unwrap();
        let b = pg_train(&cfg, &space, RngStream::new(3, 0), &mut NoCheckpoints).unwrap();
        assert_eq!(a.theta, b.theta);
        assert_eq!(a.hands, 5_000);
        assert!(a.theta.is_finite());
        // illegal slots never move
        for i in 0..space.len() {
            let m = space.mask(i);
            for (k, &x) in a.theta.row(i).iter().enumerate() {
                if !m.is_legal_index(k) {
                    assert_eq!(x, 0.0);
                }
            }
        }
    }
}
