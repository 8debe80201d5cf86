//! Cross-entropy method with a diagonal Gaussian over logits.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
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
pub struct CemConfig {
    pub population: u64,
    pub elite_frac: f64,
    pub evals_per_candidate: u64,
    pub sigma0: f64,
    pub sigma_min: f64,
    pub noise_decay: f64,
    pub generations: u64,
    pub curve_window: u64,
    pub curve_every: u64,
    pub checkpoint_every: Option<u64>,
}

impl Default for CemConfig {
    fn default() -> Self {
        CemConfig {
            population: 50,
            elite_frac: 0.2,
            evals_per_candidate: 500,
            sigma0: 2.0,
            sigma_min: 0.05,
            noise_decay: 0.995,
            generations: 300,
            curve_window: 10_000,
            curve_every: 1_000,
            checkpoint_every: None,
        }
    }
}

impl CemConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population == 0 || self.evals_per_candidate == 0 || self.generations == 0 {
            return Err(Error::Config("cem population, evaluations and generations must be positive".into()));
        }
        if !(self.elite_frac > 0.0 && self.elite_frac <= 1.0) {
            return Err(Error::Config(format!("cem.elite_frac must lie in (0, 1], got {}", self.elite_frac)));
        }
        if !(self.sigma0 > 0.0 && self.sigma_min > 0.0 && self.noise_decay > 0.0 && self.noise_decay <= 1.0) {
            return Err(Error::Config("cem sigma settings must be positive and decay in (0, 1]".into()));
        }
        if self.curve_window == 0 || self.curve_every == 0 {
            return Err(Error::Config("cem curve settings must be positive".into()));
        }
        Ok(())
    }

    pub fn elite_count(&self) -> usize {
        // guard against 0.2 * 50 landing a hair above 10
        let k = (self.elite_frac * self.population as f64 - 1e-9).ceil() as usize;
        k.clamp(1, self.population as usize)
    }

    pub fn hands_per_generation(&self) -> u64 {
        self.population * self.evals_per_candidate
    }

    /// Set `generations` from a total hand budget, which must divide evenly.
    pub fn with_budget(mut self, budget_hands: u64) -> Result<CemConfig> {
        let per = self.hands_per_generation();
        if per == 0 || budget_hands == 0 || budget_hands % per != 0 {
            return Err(Error::Config(format!(
                "cem budget of {budget_hands} hands is not a positive multiple of {} x {} hands per generation",
                self.population, self.evals_per_candidate
            )));
        }
        self.generations = budget_hands / per;
        Ok(self)
    }
}

/// Search distribution between generations.
#[derive(Debug, Clone, PartialEq)]
pub struct CemState {
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
    pub generation: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationStats {
    pub elite_indices: Vec<usize>,
    pub candidate_means: Vec<f64>,
}

impl CemState {
    pub fn new(n_params: usize, sigma0: f64) -> CemState {
        CemState { mu: vec![0.0; n_params], sigma: vec![sigma0; n_params], generation: 0 }
    }

    /// Refit to the elite candidates and apply the noise floor.
    pub fn refit(&mut self, elites: &[&[f64]], config: &CemConfig) {
        let k = elites.len() as f64;
        for i in 0..self.mu.len() {
            let m = elites.iter().map(|e| e[i]).sum::<f64>() / k;
            let var = elites.iter().map(|e| (e[i] - m) * (e[i] - m)).sum::<f64>() / k;
            self.mu[i] = m;
            self.sigma[i] = (var.sqrt() * config.noise_decay).max(config.sigma_min);
        }
        self.generation += 1;
    }
}

/// Indices of the `k` best candidates by mean; ties keep the lower index.
pub fn select_elites(means: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..means.len()).collect();
    idx.sort_by(|&a, &b| means[b].total_cmp(&means[a]).then(a.cmp(&b)));
    idx.truncate(k);
    idx
}

pub(crate) fn run_generation(
    state: &mut CemState,
    config: &CemConfig,
    space: &CellSpace,
    noise: &mut impl Rng,
    eval_stream: &RngStream,
    curve: &mut CurveRecorder,
) -> Result<GenerationStats> {
    let sim = Simulator::new(space);
    let masks = space.masks();
    let n = state.mu.len();
    let mut candidates = Vec::with_capacity(config.population as usize);
    for _ in 0..config.population {
        let mut c = vec![0.0; n];
        for i in 0..n {
            let z: f64 = noise.sample(StandardNormal);
            // illegal slots are irrelevant to the policy; keep them pinned at zero
            c[i] = if masks[i / 5].is_legal_index(i % 5) { state.mu[i] + state.sigma[i] * z } else { 0.0 };
        }
        candidates.push(LogitTable::from_rows(c.chunks(5).map(|r| [r[0], r[1], r[2], r[3], r[4]]).collect()));
    }
    let results: Vec<Result<(f64, Vec<f64>)>> = candidates
        .par_iter()
        .map(|theta| {
            let mut rets = Vec::with_capacity(config.evals_per_candidate as usize);
            let est = sim.evaluate_policy_crn(&Softmax(theta), config.evals_per_candidate, eval_stream, |r| rets.push(r))?;
            Ok((est.mean, rets))
        })
        .collect();
    let mut means = Vec::with_capacity(results.len());
    for r in results {
        let (m, rets) = r?;
        for x in rets {
            curve.push(x);
        }
        means.push(m);
    }
    let elite_indices = select_elites(&means, config.elite_count());
    let elites: Vec<&[f64]> = elite_indices.iter().map(|&i| candidates[i].as_slice()).collect();
    state.refit(&elites, config);
    Ok(GenerationStats { elite_indices, candidate_means: means })
}

pub fn cem_train(
    config: &CemConfig,
    space: &CellSpace,
    stream: RngStream,
    observer: &mut impl TrainObserver,
) -> Result<TrainOutput> {
    config.validate()?;
    let mut state = CemState::new(space.len() * 5, config.sigma0);
    let mut noise = stream.derive(1).rng();
    let eval_root = stream.derive(2);
    let mut curve = CurveRecorder::new(config.curve_window, config.curve_every);
    let mut hands = 0u64;
    let mut next_checkpoint = config.checkpoint_every;
    let to_table = |mu: &[f64]| LogitTable::from_rows(mu.chunks(5).map(|r| [r[0], r[1], r[2], r[3], r[4]]).collect());
    for g in 0..config.generations {
        run_generation(&mut state, config, space, &mut noise, &eval_root.derive(g), &mut curve)?;
        hands += config.hands_per_generation();
        if let Some(at) = next_checkpoint {
            if hands >= at {
                observer.checkpoint(hands, &to_table(&state.mu))?;
                next_checkpoint = config.checkpoint_every.map(|e| at + e);
            }
        }
    }
    Ok(TrainOutput { theta: to_table(&state.mu), curve: curve.finish(), hands })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optim::NoCheckpoints;
    use crate::rules::Rules;

    #[test]
    fn elite_count_matches_fraction() {
        assert_eq!(CemConfig::default().elite_count(), 10);
        let c = CemConfig { population: 7, elite_frac: 0.3, ..CemConfig::default() };
        assert_eq!(c.elite_count(), 3);
    }

    #[test]
    fn budget_must_divide() {
        assert_eq!(CemConfig::default().with_budget(7_500_000).unwrap().generations, 300);
        assert!(CemConfig::default().with_budget(7_500_001).is_err());
    }

    #[test]
    fn elites_sorted_with_stable_ties() {
        assert_eq!(select_elites(&[0.1, 0.5, 0.5, -1.0], 3), vec![1, 2, 0]);
    }

    #[test]
    fn identical_elites_hit_sigma_floor() {
        let cfg = CemConfig::default();
        let mut s = CemState::new(3, 2.0);
        let e = [1.0, 2.0, 3.0];
        s.refit(&[&e, &e, &e], &cfg);
        assert_eq!(s.mu, vec![1.0, 2.0, 3.0]);
        assert_eq!(s.sigma, vec![0.05; 3]);
    }

    #[test]
    fn generation_keeps_sigma_floor_and_elite_size() {
        let space = CellSpace::new(Rules::benchmark());
        let cfg = CemConfig { population: 6, evals_per_candidate: 20, ..CemConfig::default() };
        let mut st = CemState::new(space.len() * 5, cfg.sigma0);
        let mut noise = RngStream::new(1, 1).rng();
        let mut curve = CurveRecorder::new(100, 10);
        let stats = run_generation(&mut st, &cfg, &space, &mut noise, &RngStream::new(1, 2), &mut curve).unwrap();
        assert_eq!(stats.elite_indices.len(), cfg.elite_count());
        assert!(st.sigma.iter().all(|&s| s >= cfg.sigma_min));
        assert_eq!(curve.hands(), 120);
    }

    #[test]
    fn short_run_deterministic() {
        let space = CellSpace::new(Rules::benchmark());
        let cfg = CemConfig { population: 5, evals_per_candidate: 20, generations: 3, ..CemConfig::default() };
        let a = cem_train(&cfg, &space, RngStream::new(2, 0), &mut NoCheckpoints).unwrap();
        let b = cem_train(&cfg, &space, RngStream::new(2, 0), &mut NoCheckpoints).unwrap();
        assert_eq!(a.theta, b.theta);
        assert_eq!(a.hands, 300);
    }
}
