//! Oracle-relative scoring of learned policies. Everything here is exact and
//! simulation free.

use serde::{Deserialize, Serialize};

use crate::cells::{Action, ActionMask, CellSpace};
use crate::error::{Error, Result};
use crate::optim::{LogitTable, TrainCurve};
use crate::oracle::{evaluate_actions, evaluate_exact, OracleSolution};

/// Argmax over legal logits. Exact ties keep the earliest action in
/// Stand, Hit, Double, Split, Surrender order.
pub fn greedy_action(logits: &[f64; 5], mask: ActionMask) -> Action {
    let mut best: Option<(Action, f64)> = None;
    for a in mask.iter() {
        let v = logits[a.index()];
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((a, v));
        }
    }
    best.expect("mask has a legal action").0
}

pub fn greedy_policy(theta: &LogitTable, space: &CellSpace) -> Result<Vec<Action>> {
    if theta.n_cells() != space.len() {
        return Err(Error::InvalidArgument(format!(
            "logit table has {} cells, cell space has {}",
            theta.n_cells(),
            space.len()
        )));
    }
    if !theta.is_finite() {
        return Err(Error::InvalidArgument("logit table contains non-finite values".into()));
    }
    Ok((0..space.len()).map(|i| greedy_action(theta.row(i), space.mask(i))).collect())
}

/// Unweighted fraction of cells where `learned` agrees with the oracle.
pub fn action_match_rate(learned: &[Action], oracle: &OracleSolution) -> f64 {
    let n = oracle.optimal_action.len();
    let hits = learned.iter().zip(&oracle.optimal_action).filter(|(a, b)| a == b).count();
    hits as f64 / n as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretReport {
    pub per_cell: Vec<f64>,
    /// Uniform mean over every cell.
    pub mean_regret: f64,
    /// Mean over depth-0 cells only.
    pub mean_regret_depth0: f64,
    pub max_regret: f64,
    pub argmax_cell: usize,
    pub amr: f64,
    pub learned_ev: f64,
    pub oracle_ev: f64,
    pub ev_gap: f64,
}

/// Regret of a deterministic action table. The learned EV is the exact value
/// of that table; use [`score_logits`] to score a softmax policy instead.
pub fn cell_regret(learned: &[Action], oracle: &OracleSolution) -> Result<RegretReport> {
    let space = oracle.space();
    if learned.len() != space.len() {
        return Err(Error::ContractViolation(format!(
            "policy covers {} cells, expected {}",
            learned.len(),
            space.len()
        )));
    }
    let mut per_cell = Vec::with_capacity(learned.len());
    for (i, &a) in learned.iter().enumerate() {
        let q = oracle.q(i, a).ok_or(Error::IllegalAction { cell: i, action: a })?;
        let best = oracle.optimal_value[i];
        // learned == optimal gives exactly zero; otherwise clamp rounding noise
        per_cell.push(if a == oracle.optimal_action[i] { 0.0 } else { (best - q).max(0.0) });
    }
    let learned_ev = evaluate_actions(oracle.model(), learned).game_ev;
    Ok(build_report(per_cell, learned, oracle, learned_ev))
}

fn build_report(per_cell: Vec<f64>, learned: &[Action], oracle: &OracleSolution, learned_ev: f64) -> RegretReport {
    let space = oracle.space();
    let n = per_cell.len() as f64;
    let mean_regret = per_cell.iter().sum::<f64>() / n;
    let (mut sum0, mut n0) = (0.0, 0usize);
    for (i, r) in per_cell.iter().enumerate() {
        if space.cell(i).depth == 0 {
            sum0 += r;
            n0 += 1;
        }
    }
    let (mut argmax_cell, mut max_regret) = (0, 0.0);
    for (i, &r) in per_cell.iter().enumerate() {
        if r > max_regret {
            max_regret = r;
            argmax_cell = i;
        }
    }
    let oracle_ev = oracle.game_ev;
    RegretReport {
        mean_regret,
        mean_regret_depth0: sum0 / n0.max(1) as f64,
        max_regret,
        argmax_cell,
        amr: action_match_rate(learned, oracle),
        learned_ev,
        oracle_ev,
        ev_gap: (learned_ev - oracle_ev).abs(),
        per_cell,
    }
}

/// Score a logit table: regret and AMR of its greedy policy, EV of the
/// softmax policy it defines.
pub fn score_logits(theta: &LogitTable, oracle: &OracleSolution) -> Result<RegretReport> {
    let space = oracle.space();
    let greedy = greedy_policy(theta, space)?;
    let mut report = cell_regret(&greedy, oracle)?;
    let pv = evaluate_exact(oracle.model(), |i| theta.probs(i, space.mask(i)));
    report.learned_ev = pv.game_ev;
    report.ev_gap = (pv.game_ev - report.oracle_ev).abs();
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub initial_gap: f64,
    pub threshold_95: Option<u64>,
    pub threshold_99: Option<u64>,
}

/// First hand counts at which the smoothed curve closes 95% and 99% of the
/// gap between its first point and the oracle EV.
pub fn gap_thresholds(curve: &TrainCurve, oracle_ev: f64) -> Result<ThresholdReport> {
    let first = curve
        .points
        .first()
        .ok_or_else(|| Error::InvalidArgument("training curve is empty".into()))?;
    let initial_gap = oracle_ev - first.smoothed_ev;
    let cross = |q: f64| {
        let target = oracle_ev - (1.0 - q) * initial_gap;
        curve.points.iter().find(|p| p.smoothed_ev >= target).map(|p| p.hands)
    };
    Ok(ThresholdReport { initial_gap, threshold_95: cross(0.95), threshold_99: cross(0.99) })
}

/// One row of the optimizer comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub method: String,
    pub seed: u64,
    pub budget: u64,
    pub final_ev: f64,
    pub oracle_ev: f64,
    pub ev_gap: f64,
    pub amr: f64,
    pub mean_regret: f64,
    pub max_regret: f64,
    pub mean_regret_depth0: f64,
    pub threshold_95: Option<u64>,
    pub threshold_99: Option<u64>,
}

impl SummaryRow {
    pub fn new(method: &str, seed: u64, budget: u64, report: &RegretReport, thresholds: Option<&ThresholdReport>) -> SummaryRow {
        SummaryRow {
            method: method.to_string(),
            seed,
            budget,
            final_ev: report.learned_ev,
            oracle_ev: report.oracle_ev,
            ev_gap: report.ev_gap,
            amr: report.amr,
            mean_regret: report.mean_regret,
            max_regret: report.max_regret,
            mean_regret_depth0: report.mean_regret_depth0,
            threshold_95: thresholds.and_then(|t| t.threshold_95),
            threshold_99: thresholds.and_then(|t| t.threshold_99),
        }
    }

    pub const CSV_HEADER: &'static str =
        "method,seed,budget,final_ev,oracle_ev,ev_gap,amr,mean_regret,max_regret,mean_regret_depth0,threshold_95,threshold_99";

    pub fn csv_line(&self) -> String {
        let opt = |x: Option<u64>| x.map(|v| v.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{:.6},{:.6},{:.6},{:.4},{:.5},{:.5},{:.5},{},{}",
            self.method,
            self.seed,
            self.budget,
            self.final_ev,
            self.oracle_ev,
            self.ev_gap,
            self.amr,
            self.mean_regret,
            self.max_regret,
            self.mean_regret_depth0,
            opt(self.threshold_95),
            opt(self.threshold_99)
        )
    }
}

/// Median of a slice (mean of the middle pair for even lengths).
pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    assert!(n > 0, "median of empty slice");
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optim::CurvePoint;
    use crate::rules::Rules;

    fn curve(vals: &[f64]) -> TrainCurve {
        TrainCurve {
            window: 1,
            every: 1,
            points: vals.iter().enumerate().map(|(i, &v)| CurvePoint { hands: i as u64 + 1, smoothed_ev: v }).collect(),
        }
    }

    #[test]
    fn oracle_self_report_is_zero() {
        let sol = crate::solve(&Rules::benchmark()).unwrap();
        let r = cell_regret(&sol.optimal_action, &sol).unwrap();
        assert_eq!(r.mean_regret, 0.0);
        assert_eq!(r.max_regret, 0.0);
        assert_eq!(r.amr, 1.0);
        assert!(r.ev_gap < 1e-12);
    }

    #[test]
    fn single_cell_error() {
        let sol = crate::solve(&Rules::benchmark()).unwrap();
        let i = (0..sol.space().len()).find(|&i| sol.optimal_action[i] != Action::Hit).unwrap();
        let mut p = sol.optimal_action.clone();
        p[i] = Action::Hit;
        let r = cell_regret(&p, &sol).unwrap();
        let delta = sol.optimal_value[i] - sol.q(i, Action::Hit).unwrap();
        let n = sol.space().len() as f64;
        assert_eq!(r.max_regret, delta);
        assert!((r.mean_regret - delta / n).abs() < 1e-15);
        assert_eq!(r.amr, 1.0 - 1.0 / n);
    }

    #[test]
    fn illegal_learned_action_is_contract_violation() {
        let sol = crate::solve(&Rules::benchmark()).unwrap();
        let i = (0..sol.space().len()).find(|&i| !sol.space().mask(i).contains(Action::Split)).unwrap();
        let mut p = sol.optimal_action.clone();
        p[i] = Action::Split;
        assert!(matches!(cell_regret(&p, &sol), Err(Error::IllegalAction { .. })));
    }

    #[test]
    fn zero_logits_pick_first_legal() {
        let space = CellSpace::new(Rules::benchmark());
        let g = greedy_policy(&LogitTable::zeros(space.len()), &space).unwrap();
        assert!(g.iter().all(|&a| a == Action::Stand));
    }

    #[test]
    fn thresholds() {
        let t = gap_thresholds(&curve(&[0.0, 0.0]), 0.0).unwrap();
        assert_eq!((t.threshold_95, t.threshold_99), (Some(1), Some(1)));
        let t = gap_thresholds(&curve(&[-1.0, -0.5, -0.04, -0.02]), 0.0).unwrap();
        assert_eq!((t.threshold_95, t.threshold_99), (Some(3), None));
        assert!(gap_thresholds(&curve(&[]), 0.0).is_err());
    }

    #[test]
    fn median_even_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
