//! Exact dynamic-programming oracle over the decision-cell space.
//!
//! Stand values come from the peek-conditioned dealer distribution. A hit
//! continues in the Stand/Hit-only cell at the same split depth, a double
//! draws one card and stands, and a split is twice the value of one child
//! hand, since children are i.i.d. under the infinite shoe.

use crate::cards::{HandTotal, ACE, PROBS, VALUES};
use crate::cells::{legal_actions, Action, ActionMask, CellSpace, DecisionCell};
use crate::dealer::{natural_prob, DealerDistribution, BUST};
use crate::error::{Error, Result};
use crate::rules::{Rules, Variant};

/// Per-cell Q-values, one slot per action in `Action::ALL` order.
pub type QRow = [Option<f64>; 5];

/// EV of standing on `total` against the row for `upcard`.
pub fn q_stand(total: u8, upcard: u8, dealer: &DealerDistribution) -> f64 {
    let row = dealer.row(upcard);
    let mut ev = row[BUST];
    for (k, &p) in row[..5].iter().enumerate() {
        let f = 17 + k as u8;
        ev += match total.cmp(&f) {
            std::cmp::Ordering::Greater => p,
            std::cmp::Ordering::Less => -p,
            std::cmp::Ordering::Equal => 0.0,
        };
    }
    ev
}

/// Shared structure for exact evaluation: stand table and child lookups.
#[derive(Debug, Clone)]
pub struct Model {
    space: CellSpace,
    dealer: DealerDistribution,
    /// `stand[u - 2][x - 4]`.
    stand: [[f64; 18]; 10],
    /// Ace split children take one card and stand.
    one_card_aces: bool,
}

impl Model {
    pub fn new(rules: Rules) -> Model {
        let space = CellSpace::new(rules);
        let dealer = DealerDistribution::for_decisions(&rules);
        let stand = std::array::from_fn(|u| std::array::from_fn(|x| q_stand(x as u8 + 4, u as u8 + 2, &dealer)));
        Model { space, dealer, stand, one_card_aces: rules.split_aces_one_card }
    }

    pub fn rules(&self) -> &Rules {
        self.space.rules()
    }

    pub fn space(&self) -> &CellSpace {
        &self.space
    }

    pub fn dealer(&self) -> &DealerDistribution {
        &self.dealer
    }

    #[inline]
    pub fn stand_ev(&self, total: u8, upcard: u8) -> f64 {
        self.stand[usize::from(upcard - 2)][usize::from(total - 4)]
    }

    /// Stand/Hit-only continuation cell after a hit.
    pub fn continuation(&self, next: HandTotal, upcard: u8, depth: u8) -> usize {
        let cell = DecisionCell::plain(next.total, next.soft, upcard, false, depth);
        self.space.index_of(&cell).expect("continuation cell exists")
    }

    /// Child cell created by splitting `rank` when the child draws `v`.
    pub fn split_child(&self, rank: u8, v: u8, upcard: u8, depth: u8) -> DecisionCell {
        let rules = self.rules();
        let d = depth + 1;
        let dbl = rules.double_after_split;
        if v == rank {
            DecisionCell::pair(rank, upcard, dbl, d + 1 < rules.resplit_limit, d)
        } else {
            let t = HandTotal::of(rank).add(v);
            DecisionCell::plain(t.total, t.soft, upcard, dbl, d)
        }
    }

    /// Initial two-card cell, or `None` for a natural.
    pub fn initial_cell(&self, a: u8, b: u8, upcard: u8) -> Option<DecisionCell> {
        let t = HandTotal::of(a).add(b);
        if t.total == 21 {
            return None;
        }
        Some(if a == b {
            DecisionCell::pair(a, upcard, true, self.rules().resplit_limit > 1, 0)
        } else {
            DecisionCell::plain(t.total, t.soft, upcard, true, 0)
        })
    }

    /// Q of one action from child values supplied by `value`.
    fn q_action(&self, idx: usize, action: Action, value: &mut dyn FnMut(usize) -> f64) -> f64 {
        let cell = *self.space.cell(idx);
        let u = cell.upcard;
        let here = HandTotal { total: cell.total, soft: cell.soft };
        match action {
            Action::Stand => self.stand_ev(cell.total, u),
            Action::Hit => VALUES
                .iter()
                .zip(PROBS)
                .map(|(&v, p)| {
                    let next = here.add(v);
                    p * if next.is_bust() { -1.0 } else { value(self.continuation(next, u, cell.depth)) }
                })
                .sum(),
            Action::Double => {
                2.0 * VALUES
                    .iter()
                    .zip(PROBS)
                    .map(|(&v, p)| {
                        let next = here.add(v);
                        p * if next.is_bust() { -1.0 } else { self.stand_ev(next.total, u) }
                    })
                    .sum::<f64>()
            }
            Action::Split => {
                let rank = cell.pair_rank.expect("split on a pair cell");
                let child: f64 = VALUES
                    .iter()
                    .zip(PROBS)
                    .map(|(&v, p)| {
                        if rank == ACE && self.one_card_aces {
                            p * self.stand_ev(HandTotal::of(ACE).add(v).total, u)
                        } else {
                            let c = self.split_child(rank, v, u, cell.depth);
                            p * value(self.space.index_of(&c).expect("split child exists"))
                        }
                    })
                    .sum();
                2.0 * child
            }
            Action::Surrender => -0.5,
        }
    }

    /// Game EV per initial wager given per-cell values.
    pub fn game_ev(&self, values: &[f64]) -> f64 {
        let rules = self.rules();
        let payout = rules.blackjack_payout.as_f64();
        let mut ev = 0.0;
        for (&u, pu) in VALUES.iter().zip(PROBS) {
            let pn = if rules.dealer_peek { natural_prob(u) } else { 0.0 };
            let pn_natural_vs_natural = natural_prob(u);
            let mut row = 0.0;
            for (&a, pa) in VALUES.iter().zip(PROBS) {
                for (&b, pb) in VALUES.iter().zip(PROBS) {
                    let p = pa * pb;
                    row += p * match self.initial_cell(a, b, u) {
                        None => (1.0 - pn_natural_vs_natural) * payout,
                        Some(c) => {
                            let v = values[self.space.index_of(&c).expect("initial cell exists")];
                            -pn + (1.0 - pn) * v
                        }
                    };
                }
            }
            ev += pu * row;
        }
        ev
    }
}

/// How a cell's value is formed from its legal Q-values.
trait Combine {
    /// Returns the cell value and, for greedy combination, the chosen action.
    fn combine(&self, idx: usize, mask: ActionMask, q: &QRow) -> (f64, Option<Action>);
}

struct Greedy;

impl Combine for Greedy {
    fn combine(&self, _idx: usize, mask: ActionMask, q: &QRow) -> (f64, Option<Action>) {
        let a = argmax_q(mask, q);
        (q[a.index()].expect("legal action has a value"), Some(a))
    }
}

struct Stochastic<F>(F);

impl<F: Fn(usize) -> [f64; 5]> Combine for Stochastic<F> {
    fn combine(&self, idx: usize, mask: ActionMask, q: &QRow) -> (f64, Option<Action>) {
        let probs = (self.0)(idx);
        let v = mask.iter().map(|a| probs[a.index()] * q[a.index()].unwrap_or(0.0)).sum();
        (v, None)
    }
}

/// Argmax over legal actions. Ties keep the earliest action in
/// Stand, Hit, Double, Split, Surrender order.
pub fn argmax_q(mask: ActionMask, q: &QRow) -> Action {
    let mut best: Option<(Action, f64)> = None;
    for a in mask.iter() {
        let v = q[a.index()].expect("legal action has a value");
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((a, v));
        }
    }
    best.expect("mask has a legal action").0
}

struct Evaluation<'m, C> {
    model: &'m Model,
    combine: C,
    values: Vec<f64>,
    q: Vec<QRow>,
    chosen: Vec<Option<Action>>,
}

impl<'m, C: Combine> Evaluation<'m, C> {
    fn new(model: &'m Model, combine: C) -> Self {
        let n = model.space.len();
        Evaluation { model, combine, values: vec![f64::NAN; n], q: vec![[None; 5]; n], chosen: vec![None; n] }
    }

    fn value(&mut self, idx: usize) -> f64 {
        if !self.values[idx].is_nan() {
            return self.values[idx];
        }
        let mask = self.model.space.mask(idx);
        let mut row: QRow = [None; 5];
        for a in mask.iter() {
            let model = self.model;
            let mut child = |i: usize| self.value(i);
            row[a.index()] = Some(model.q_action(idx, a, &mut child));
        }
        let (v, chosen) = self.combine.combine(idx, mask, &row);
        self.q[idx] = row;
        self.chosen[idx] = chosen;
        self.values[idx] = v;
        v
    }

    fn run(mut self) -> Self {
        for i in 0..self.model.space.len() {
            self.value(i);
        }
        self
    }
}

/// Exact solution of every cell under one ruleset.
#[derive(Debug, Clone)]
pub struct OracleSolution {
    model: Model,
    pub q_values: Vec<QRow>,
    pub optimal_action: Vec<Action>,
    pub optimal_value: Vec<f64>,
    pub game_ev: f64,
}

/// Solve all cells under `rules`.
pub fn solve(rules: &Rules) -> Result<OracleSolution> {
    rules.validate()?;
    let model = Model::new(*rules);
    let ev = Evaluation::new(&model, Greedy).run();
    let game_ev = model.game_ev(&ev.values);
    let optimal_action = ev.chosen.iter().map(|a| a.expect("greedy records an action")).collect();
    let (q_values, optimal_value) = (ev.q, ev.values);
    Ok(OracleSolution { model, q_values, optimal_action, optimal_value, game_ev })
}

pub fn solve_variant(variant: &str) -> Result<OracleSolution> {
    let v: Variant = variant.parse()?;
    solve(&v.rules())
}

impl OracleSolution {
    pub fn rules(&self) -> &Rules {
        self.model.rules()
    }

    pub fn space(&self) -> &CellSpace {
        self.model.space()
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn q(&self, idx: usize, action: Action) -> Option<f64> {
        self.q_values[idx][action.index()]
    }

    pub fn game_ev(&self) -> f64 {
        self.game_ev
    }

    /// Recompute one Q-value from the stored child values.
    pub fn recompute_q(&self, idx: usize, action: Action) -> Result<f64> {
        if !self.space().mask(idx).contains(action) {
            return Err(Error::IllegalAction { cell: idx, action });
        }
        let mut child = |i: usize| self.optimal_value[i];
        Ok(self.model.q_action(idx, action, &mut child))
    }

    pub fn q_stand(&self, idx: usize) -> f64 {
        let c = self.space().cell(idx);
        self.model.stand_ev(c.total, c.upcard)
    }

    pub fn q_hit(&self, idx: usize) -> f64 {
        self.recompute_q(idx, Action::Hit).expect("hit is always legal")
    }

    pub fn q_double(&self, idx: usize) -> Result<f64> {
        self.recompute_q(idx, Action::Double)
    }

    pub fn q_split(&self, idx: usize) -> Result<f64> {
        self.recompute_q(idx, Action::Split)
    }

    /// Look up or validate a cell and return its index.
    pub fn index(&self, cell: &DecisionCell) -> Result<usize> {
        self.space()
            .index_of(cell)
            .ok_or_else(|| Error::InvalidArgument(format!("{cell} is not in the cell space")))
    }
}

/// Exact values of a stochastic tabular policy under the same model.
#[derive(Debug, Clone)]
pub struct PolicyValue {
    pub values: Vec<f64>,
    pub q_values: Vec<QRow>,
    pub game_ev: f64,
}

/// Evaluate a policy given per-cell action probabilities (zero on illegal slots).
pub fn evaluate_exact<F: Fn(usize) -> [f64; 5]>(model: &Model, probs: F) -> PolicyValue {
    let ev = Evaluation::new(model, Stochastic(probs)).run();
    let game_ev = model.game_ev(&ev.values);
    PolicyValue { values: ev.values, q_values: ev.q, game_ev }
}

/// Evaluate a deterministic per-cell action table.
pub fn evaluate_actions(model: &Model, actions: &[Action]) -> PolicyValue {
    evaluate_exact(model, |i| {
        let mut p = [0.0; 5];
        p[actions[i].index()] = 1.0;
        p
    })
}

/// Mask for a cell that may not be in the space.
pub fn mask_of(cell: &DecisionCell, rules: &Rules) -> ActionMask {
    legal_actions(cell, rules)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bench() -> OracleSolution {
        solve(&Rules::benchmark()).unwrap()
    }

    fn idx(s: &OracleSolution, c: DecisionCell) -> usize {
        s.index(&c).unwrap()
    }

    #[test]
    fn stand_formula_edges() {
        let s = bench();
        let d = s.model().dealer();
        for u in 2..=11u8 {
            let row = d.row(u);
            assert!((q_stand(21, u, d) - (1.0 - row[4])).abs() < 1e-15);
            assert!((q_stand(16, u, d) - (row[BUST] - (1.0 - row[BUST]))).abs() < 1e-15);
        }
    }

    #[test]
    fn hit_edges() {
        let s = bench();
        for u in 2..=11u8 {
            let i = idx(&s, DecisionCell::plain(21, false, u, false, 0));
            assert_eq!(s.q_hit(i), -1.0);
            assert_eq!(s.optimal_action[i], Action::Stand);
        }
    }

    #[test]
    fn double_rejected_without_eligibility() {
        let s = bench();
        let i = idx(&s, DecisionCell::plain(11, false, 6, false, 0));
        assert!(matches!(s.q_double(i), Err(Error::IllegalAction { .. })));
        let j = idx(&s, DecisionCell::plain(11, false, 6, true, 0));
        assert!(s.q_double(j).unwrap() > s.q_hit(j));
        let k = idx(&s, DecisionCell::plain(16, false, 6, true, 0));
        assert!(matches!(s.q_split(k), Err(Error::IllegalAction { .. })));
    }

    #[test]
    fn eight_eight_versus_ten_splits() {
        let s = bench();
        let i = idx(&s, DecisionCell::pair(8, 10, true, true, 0));
        let sp = s.q_split(i).unwrap();
        assert!(sp > s.q_stand(i) && sp > s.q_hit(i));
        assert_eq!(s.optimal_action[i], Action::Split);
    }

    #[test]
    fn values_are_max_of_legal_q() {
        let s = bench();
        for i in 0..s.space().len() {
            let best = s.space().mask(i).iter().map(|a| s.q(i, a).unwrap()).fold(f64::MIN, f64::max);
            assert_eq!(best, s.optimal_value[i]);
            assert_eq!(s.q(i, s.optimal_action[i]).unwrap(), best);
        }
    }

    #[test]
    fn unknown_variant() {
        assert!(matches!(solve_variant("atlantic"), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn oracle_self_evaluation_matches() {
        let s = bench();
        let pv = evaluate_actions(s.model(), &s.optimal_action);
        assert!((pv.game_ev - s.game_ev).abs() < 1e-14);
    }
}
