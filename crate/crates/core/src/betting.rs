//! Bet sizing on a negative-edge game: grid search over flat bets, bankroll
//! and ruin simulation, and the bet/bankroll scaling identity.
//!
//! Every round's payoff is linear in the initial wager, so all simulations
//! draw per-unit returns under the oracle policy and scale them by the
//! wager. Strategies compared within one trial share those returns.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cells::{Action, CellSpace};
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::sim::{Estimate, Simulator};

pub const TABLE_MIN: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BetStrategy {
    Fixed { amount: f64 },
    /// A fraction of the current bankroll, floored at the table minimum.
    Proportional { fraction: f64 },
}

impl BetStrategy {
    pub fn fixed(amount: f64) -> Result<BetStrategy> {
        let s = BetStrategy::Fixed { amount };
        s.validate()?;
        Ok(s)
    }

    pub fn proportional(fraction: f64) -> Result<BetStrategy> {
        let s = BetStrategy::Proportional { fraction };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            BetStrategy::Fixed { amount } if !(amount >= TABLE_MIN && amount.is_finite()) => Err(
                Error::InvalidArgument(format!("wager {amount} is below the table minimum of {TABLE_MIN}")),
            ),
            BetStrategy::Proportional { fraction } if !(fraction > 0.0 && fraction <= 1.0) => Err(
                Error::InvalidArgument(format!("bankroll fraction must lie in (0, 1], got {fraction}")),
            ),
            _ => Ok(()),
        }
    }

    #[inline]
    pub fn wager(&self, bankroll: f64) -> f64 {
        match *self {
            BetStrategy::Fixed { amount } => amount,
            BetStrategy::Proportional { fraction } => (fraction * bankroll).max(TABLE_MIN),
        }
    }

    pub fn label(&self) -> String {
        match *self {
            BetStrategy::Fixed { amount } => format!("fixed {amount}"),
            BetStrategy::Proportional { fraction } => format!("proportional {}%", fraction * 100.0),
        }
    }
}

/// The four strategies of the bankroll comparison: min, mid, max, 1%.
pub fn standard_strategies() -> Vec<(&'static str, BetStrategy)> {
    vec![
        ("min", BetStrategy::Fixed { amount: 1.0 }),
        ("mid", BetStrategy::Fixed { amount: 50.5 }),
        ("max", BetStrategy::Fixed { amount: 100.0 }),
        ("proportional", BetStrategy::Proportional { fraction: 0.01 }),
    ]
}

/// Per-unit returns of `n` rounds under `policy`; round `i` uses
/// `stream.hand_rng(i)`.
pub fn unit_returns(space: &CellSpace, policy: &[Action], n: u64, stream: &RngStream) -> Result<Vec<f64>> {
    let sim = Simulator::new(space);
    let mut out = Vec::with_capacity(n as usize);
    sim.evaluate_policy_crn(policy, n, stream, |r| out.push(r))?;
    Ok(out)
}

/// `n` evenly spaced bets from `lo` to `hi` inclusive.
pub fn bet_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2);
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub bet: f64,
    /// Mean monetary return per hand.
    pub mean_return: f64,
    pub stderr: f64,
    /// Mean return per unit wagered.
    pub per_unit: f64,
    pub per_unit_stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub hands_per_bet: u64,
    /// Per-unit edge pooled over every configuration.
    pub pooled_edge: Estimate,
    /// Bet maximizing expected return, where expected return at bet `b` is
    /// `b` times the pooled edge.
    pub chosen_bet: f64,
    /// Bet with the largest raw sample mean, for comparison.
    pub raw_argmax_bet: f64,
    /// Bets whose per-unit mean sits more than 3 standard errors from the pooled edge.
    pub outliers: Vec<f64>,
}

impl SweepResult {
    pub fn ratio_constant(&self) -> bool {
        self.outliers.is_empty()
    }
}

/// Evaluate each bet on its own independent hands.
pub fn bet_sweep(
    space: &CellSpace,
    policy: &[Action],
    bets: &[f64],
    hands_per_bet: u64,
    stream: &RngStream,
) -> Result<SweepResult> {
    if bets.is_empty() || hands_per_bet < 2 {
        return Err(Error::InvalidArgument("bet sweep needs at least one bet and two hands per bet".into()));
    }
    for &b in bets {
        BetStrategy::fixed(b)?;
    }
    let per_bet: Vec<Result<Vec<f64>>> = (0..bets.len())
        .into_par_iter()
        .map(|k| unit_returns(space, policy, hands_per_bet, &stream.derive(k as u64)))
        .collect();
    let mut rows = Vec::with_capacity(bets.len());
    let mut all = Vec::with_capacity(bets.len() * hands_per_bet as usize);
    let mut unit_estimates = Vec::with_capacity(bets.len());
    for (&b, r) in bets.iter().zip(per_bet) {
        let r = r?;
        let unit = Estimate::from_samples(&r);
        rows.push(SweepRow {
            bet: b,
            mean_return: b * unit.mean,
            stderr: b * unit.stderr,
            per_unit: unit.mean,
            per_unit_stderr: unit.stderr,
        });
        unit_estimates.push(unit);
        all.extend(r);
    }
    let pooled_edge = Estimate::from_samples(&all);
    let chosen_bet = if pooled_edge.mean < 0.0 {
        bets.iter().copied().fold(f64::INFINITY, f64::min)
    } else {
        bets.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    };
    let raw_argmax_bet = rows
        .iter()
        .fold(None::<&SweepRow>, |best, r| match best {
            Some(b) if b.mean_return >= r.mean_return => Some(b),
            _ => Some(r),
        })
        .map(|r| r.bet)
        .expect("non-empty grid");
    // difference to the pooled mean; the pooled mean includes this bet's own hands
    let k = bets.len() as f64;
    let outliers = rows
        .iter()
        .zip(&unit_estimates)
        .filter(|(_, u)| {
            let sd = u.stderr * ((k - 1.0) / k).sqrt();
            (u.mean - pooled_edge.mean).abs() > 3.0 * sd
        })
        .map(|(r, _)| r.bet)
        .collect();
    Ok(SweepResult { rows, hands_per_bet, pooled_edge, chosen_bet, raw_argmax_bet, outliers })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BankrollConfig {
    pub starting_bankroll: f64,
    pub hands_per_trial: u64,
    pub trials: u64,
    pub reset_on_ruin: bool,
}

impl Default for BankrollConfig {
    fn default() -> Self {
        BankrollConfig { starting_bankroll: 10_000.0, hands_per_trial: 5_000, trials: 30, reset_on_ruin: true }
    }
}

/// Outcome of one bankroll trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BankrollTrial {
    pub trial: u64,
    pub final_bankroll: f64,
    /// Final bankroll minus the starting bankroll. Resets are not charged.
    pub net_profit: f64,
    /// Sum of every hand's monetary return.
    pub total_return: f64,
    pub total_wagered: f64,
    pub ruin_events: u64,
    /// Hand index (zero based) of the first ruin.
    pub first_ruin: Option<u64>,
}

impl BankrollTrial {
    pub fn ev_per_hand(&self, hands: u64) -> f64 {
        self.total_return / hands as f64
    }

    pub fn ev_per_unit(&self) -> f64 {
        self.total_return / self.total_wagered
    }
}

/// Play one bankroll path over `returns` (per-unit round returns).
pub fn run_path(strategy: &BetStrategy, start: f64, reset_on_ruin: bool, returns: &[f64]) -> BankrollTrial {
    let mut w = start;
    let (mut total_return, mut total_wagered) = (0.0, 0.0);
    let mut ruin_events = 0;
    let mut first_ruin = None;
    for (i, &r) in returns.iter().enumerate() {
        let b = strategy.wager(w);
        let x = b * r;
        w += x;
        total_return += x;
        total_wagered += b;
        if w <= 0.0 {
            ruin_events += 1;
            first_ruin.get_or_insert(i as u64);
            if reset_on_ruin {
                w = start;
            } else {
                break;
            }
        }
    }
    BankrollTrial {
        trial: 0,
        final_bankroll: w,
        net_profit: w - start,
        total_return,
        total_wagered,
        ruin_events,
        first_ruin,
    }
}

/// Bankroll after every hand, without resets; stops at the first ruin.
pub fn bankroll_path(strategy: &BetStrategy, start: f64, returns: &[f64]) -> Vec<f64> {
    let mut w = start;
    let mut out = Vec::with_capacity(returns.len());
    for &r in returns {
        w += strategy.wager(w) * r;
        out.push(w);
        if w <= 0.0 {
            break;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BankrollSummary {
    pub name: String,
    pub strategy: BetStrategy,
    pub config: BankrollConfig,
    /// Mean monetary return per hand.
    pub mean_ev_per_hand: f64,
    /// Mean return per unit wagered.
    pub mean_ev_per_unit: f64,
    pub mean_net_profit: f64,
    pub mean_ruin_events: f64,
    pub trials: Vec<BankrollTrial>,
}

/// Simulate `strategies` over shared per-trial returns. Trial `t` uses the
/// derived stream `t`.
pub fn bankroll_simulate(
    space: &CellSpace,
    policy: &[Action],
    strategies: &[(&str, BetStrategy)],
    config: &BankrollConfig,
    stream: &RngStream,
) -> Result<Vec<BankrollSummary>> {
    for (_, s) in strategies {
        s.validate()?;
    }
    if !(config.starting_bankroll > 0.0) || config.trials == 0 || config.hands_per_trial == 0 {
        return Err(Error::InvalidArgument("bankroll, trials and hands must be positive".into()));
    }
    let per_trial: Vec<Result<Vec<BankrollTrial>>> = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let r = unit_returns(space, policy, config.hands_per_trial, &stream.derive(t))?;
            Ok(strategies
                .iter()
                .map(|(_, s)| BankrollTrial { trial: t, ..run_path(s, config.starting_bankroll, config.reset_on_ruin, &r) })
                .collect())
        })
        .collect();
    let mut by_strategy: Vec<Vec<BankrollTrial>> = vec![Vec::new(); strategies.len()];
    for t in per_trial {
        for (k, tr) in t?.into_iter().enumerate() {
            by_strategy[k].push(tr);
        }
    }
    let n = config.trials as f64;
    Ok(strategies
        .iter()
        .zip(by_strategy)
        .map(|((name, s), trials)| BankrollSummary {
            name: name.to_string(),
            strategy: *s,
            config: *config,
            mean_ev_per_hand: trials.iter().map(|t| t.ev_per_hand(config.hands_per_trial)).sum::<f64>() / n,
            mean_ev_per_unit: trials.iter().map(|t| t.ev_per_unit()).sum::<f64>() / n,
            mean_net_profit: trials.iter().map(|t| t.net_profit).sum::<f64>() / n,
            mean_ruin_events: trials.iter().map(|t| t.ruin_events as f64).sum::<f64>() / n,
            trials,
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuinRow {
    pub bet: f64,
    pub ruined_trials: u64,
    pub frequency: f64,
    /// 95% Wilson interval for the ruin probability.
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub rows: Vec<RuinRow>,
    pub trials: u64,
    pub non_decreasing: bool,
}

pub fn wilson_interval(k: u64, n: u64, z: f64) -> (f64, f64) {
    let (k, n) = (k as f64, n as f64);
    let p = k / n;
    let d = 1.0 + z * z / n;
    let c = (p + z * z / (2.0 * n)) / d;
    let h = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / d;
    ((c - h).max(0.0), (c + h).min(1.0))
}

/// Ruin within a fixed horizon for each bet, on shared per-trial returns.
pub fn ruin_monotonicity_check(
    space: &CellSpace,
    policy: &[Action],
    bets: &[f64],
    start: f64,
    hands: u64,
    trials: u64,
    stream: &RngStream,
) -> Result<MonotonicityReport> {
    let strategies: Vec<BetStrategy> = bets.iter().map(|&b| BetStrategy::fixed(b)).collect::<Result<_>>()?;
    let ruined: Vec<Result<Vec<bool>>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let r = unit_returns(space, policy, hands, &stream.derive(t))?;
            Ok(strategies.iter().map(|s| run_path(s, start, false, &r).ruin_events > 0).collect())
        })
        .collect();
    let mut counts = vec![0u64; bets.len()];
    for r in ruined {
        for (c, hit) in counts.iter_mut().zip(r?) {
            *c += hit as u64;
        }
    }
    let rows: Vec<RuinRow> = bets
        .iter()
        .zip(&counts)
        .map(|(&bet, &k)| {
            let (ci_low, ci_high) = wilson_interval(k, trials, 1.96);
            RuinRow { bet, ruined_trials: k, frequency: k as f64 / trials as f64, ci_low, ci_high }
        })
        .collect();
    let non_decreasing = rows.windows(2).all(|w| w[1].frequency >= w[0].frequency);
    Ok(MonotonicityReport { rows, trials, non_decreasing })
}

/// Compare the ruin indicator of (bet `lambda * b`, bankroll `w0`) with that
/// of (bet `b`, bankroll `w0 / lambda`) on the same returns, and check that
/// the path under (`lambda * b`, `lambda * w0`) is `lambda` times the path
/// under (`b`, `w0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingCheck {
    pub lambda: f64,
    pub ruin_scaled_bet: bool,
    pub ruin_scaled_bankroll: bool,
    pub paths_proportional: bool,
}

impl ScalingCheck {
    pub fn holds(&self) -> bool {
        self.ruin_scaled_bet == self.ruin_scaled_bankroll && self.paths_proportional
    }
}

pub fn scaling_check(b: f64, w0: f64, lambda: f64, returns: &[f64]) -> Result<ScalingCheck> {
    let big = BetStrategy::fixed(lambda * b)?;
    let small = BetStrategy::fixed(b)?;
    let ruin_scaled_bet = run_path(&big, w0, false, returns).ruin_events > 0;
    let ruin_scaled_bankroll = run_path(&small, w0 / lambda, false, returns).ruin_events > 0;
    let p1 = bankroll_path(&big, lambda * w0, returns);
    let p0 = bankroll_path(&small, w0, returns);
    let paths_proportional = p1.len() == p0.len() && p1.iter().zip(&p0).all(|(x, y)| *x == lambda * y);
    Ok(ScalingCheck { lambda, ruin_scaled_bet, ruin_scaled_bankroll, paths_proportional })
}
