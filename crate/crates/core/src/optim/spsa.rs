//! Simultaneous-perturbation stochastic approximation on the logit vector.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::curve::CurveRecorder;
use super::logits::LogitTable;
use super::{TrainObserver, TrainOutput};
use crate::cells::CellSpace;
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::sim::{Simulator, Softmax};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpsaConfig {
    pub a: f64,
    pub c: f64,
    pub alpha: f64,
    pub gamma: f64,
    /// Stability constant in the step-size schedule.
    pub stability: f64,
    /// Hands per side of each two-sided comparison.
    pub evals_per_side: u64,
    pub iterations: u64,
    pub curve_window: u64,
    pub curve_every: u64,
    pub checkpoint_every: Option<u64>,
}

impl Default for SpsaConfig {
    fn default() -> Self {
        SpsaConfig {
            a: 0.5,
            c: 0.2,
            alpha: 0.602,
            gamma: 0.101,
            stability: 100.0,
            evals_per_side: 300,
            iterations: 8_000,
            curve_window: 10_000,
            curve_every: 1_000,
            checkpoint_every: None,
        }
    }
}

impl SpsaConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("a", self.a), ("c", self.c), ("alpha", self.alpha), ("gamma", self.gamma)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("spsa.{name} must be positive, got {v}")));
            }
        }
        if !(self.stability >= 0.0) {
            return Err(Error::Config("spsa.stability must be non-negative".into()));
        }
        if self.evals_per_side == 0 || self.iterations == 0 || self.curve_window == 0 || self.curve_every == 0 {
            return Err(Error::Config("spsa evaluation count, iterations and curve settings must be positive".into()));
        }
        Ok(())
    }

    /// Step size for iteration `k` (zero based).
    pub fn gain_a(&self, k: u64) -> f64 {
        self.a / (self.stability + k as f64 + 1.0).powf(self.alpha)
    }

    /// Perturbation size for iteration `k` (zero based).
    pub fn gain_c(&self, k: u64) -> f64 {
        self.c / (k as f64 + 1.0).powf(self.gamma)
    }

    pub fn hands_per_iteration(&self) -> u64 {
        2 * self.evals_per_side
    }

    /// Set `iterations` from a total hand budget, which must divide evenly.
    pub fn with_budget(mut self, budget_hands: u64) -> Result<SpsaConfig> {
        let per = self.hands_per_iteration();
        if per == 0 || budget_hands == 0 || budget_hands % per != 0 {
            return Err(Error::Config(format!(
                "spsa budget of {budget_hands} hands is not a positive multiple of 2 x {} hands per iteration",
                self.evals_per_side
            )));
        }
        self.iterations = budget_hands / per;
        Ok(self)
    }
}

/// Fill `delta` with independent +-1 entries.
pub(crate) fn rademacher(rng: &mut impl RngCore, delta: &mut [f64]) {
    for chunk in delta.chunks_mut(64) {
        let bits = rng.next_u64();
        for (j, d) in chunk.iter_mut().enumerate() {
            *d = if (bits >> j) & 1 == 1 { 1.0 } else { -1.0 };
        }
    }
}

pub fn spsa_train(
    config: &SpsaConfig,
    space: &CellSpace,
    stream: RngStream,
    observer: &mut impl TrainObserver,
) -> Result<TrainOutput> {
    config.validate()?;
    let sim = Simulator::new(space);
    let n = space.len();
    let mut theta = LogitTable::zeros(n);
    let mut plus = theta.clone();
    let mut minus = theta.clone();
    let mut delta = vec![0.0; theta.len()];
    let mut perturb_rng = stream.derive(1).rng();
    let eval_root = stream.derive(2);
    let mut curve = CurveRecorder::new(config.curve_window, config.curve_every);
    let masks = space.masks();
    let mut hands = 0u64;
    let mut next_checkpoint = config.checkpoint_every;

    for k in 0..config.iterations {
        let ck = config.gain_c(k);
        let ak = config.gain_a(k);
        rademacher(&mut perturb_rng, &mut delta);
        for (i, &d) in delta.iter().enumerate() {
            let t = theta.as_slice()[i];
            plus.as_mut_slice()[i] = t + ck * d;
            minus.as_mut_slice()[i] = t - ck * d;
        }
        let es = eval_root.derive(k);
        let mut rets_plus = Vec::with_capacity(config.evals_per_side as usize);
        let mut rets_minus = Vec::with_capacity(config.evals_per_side as usize);
        let (jp, jm) = rayon::join(
            || sim.evaluate_policy_crn(&Softmax(&plus), config.evals_per_side, &es, |r| rets_plus.push(r)),
            || sim.evaluate_policy_crn(&Softmax(&minus), config.evals_per_side, &es, |r| rets_minus.push(r)),
        );
        let (jp, jm) = (jp?.mean, jm?.mean);
        for r in rets_plus.into_iter().chain(rets_minus) {
            curve.push(r);
        }
        hands += config.hands_per_iteration();
        let scale = ak * (jp - jm) / (2.0 * ck);
        if !scale.is_finite() {
            return Err(Error::NonFiniteGradient { hands, detail: format!("iteration {k}") });
        }
        let th = theta.as_mut_slice();
        for (i, &d) in delta.iter().enumerate() {
            // skip illegal slots so they stay at zero
            if masks[i / 5].is_legal_index(i % 5) {
                th[i] += scale * d;
            }
        }
        if let Some(at) = next_checkpoint {
            if hands >= at {
                observer.checkpoint(hands, &theta)?;
                next_checkpoint = config.checkpoint_every.map(|e| at + e);
            }
        }
    }
    Ok(TrainOutput { theta, curve: curve.finish(), hands })
}
