//! Seeded Monte Carlo round simulator.
//!
//! A round deals the upcard, hole card and two player cards, resolves
//! naturals (peek ends the round on a dealer natural before any decision),
//! then plays hands in queue order. Splits append both children to the back
//! of the queue, up to the ruleset's hand limit. Every decision is recorded
//! as `(cell index, action)` and credited with the round's total return.

use std::collections::VecDeque;

use rand::Rng;

use crate::cards::{self, HandTotal};
use crate::cells::{Action, ActionMask, CellSpace, DecisionCell};
use crate::dealer::{completes_natural, draw_hole, finish_dealer};
use crate::error::{Error, Result};
use crate::hand::{settle, DealerOutcome, HandState, HandStatus};
use crate::optim::LogitTable;
use crate::rng::RngStream;
use crate::rules::Rules;

/// Chooses an action for a presented cell. Must return a legal action.
pub trait Policy {
    fn choose<R: Rng + ?Sized>(&self, cell: usize, mask: ActionMask, rng: &mut R) -> Action;
}

impl Policy for [Action] {
    fn choose<R: Rng + ?Sized>(&self, cell: usize, _mask: ActionMask, _rng: &mut R) -> Action {
        self[cell]
    }
}

impl Policy for Vec<Action> {
    fn choose<R: Rng + ?Sized>(&self, cell: usize, mask: ActionMask, rng: &mut R) -> Action {
        self.as_slice().choose(cell, mask, rng)
    }
}

impl<P: Policy + ?Sized> Policy for &P {
    fn choose<R: Rng + ?Sized>(&self, cell: usize, mask: ActionMask, rng: &mut R) -> Action {
        (**self).choose(cell, mask, rng)
    }
}

/// Uniform over legal actions.
#[derive(Debug, Clone, Copy, Default)]
pub struct UniformRandom;

impl Policy for UniformRandom {
    fn choose<R: Rng + ?Sized>(&self, _cell: usize, mask: ActionMask, rng: &mut R) -> Action {
        let k = rng.random_range(0..mask.count()) as usize;
        mask.iter().nth(k).expect("non-empty mask")
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct AlwaysStand;

impl Policy for AlwaysStand {
    fn choose<R: Rng + ?Sized>(&self, _cell: usize, _mask: ActionMask, _rng: &mut R) -> Action {
        Action::Stand
    }
}

/// Samples from the masked softmax of a logit table.
#[derive(Debug, Clone, Copy)]
pub struct Softmax<'a>(pub &'a LogitTable);

impl Policy for Softmax<'_> {
    #[inline]
    fn choose<R: Rng + ?Sized>(&self, cell: usize, mask: ActionMask, rng: &mut R) -> Action {
        masked_sample(self.0.row(cell), mask, rng).expect("cells always have legal actions")
    }
}

/// Softmax restricted to legal actions; illegal slots are exactly zero.
pub fn masked_softmax(logits: &[f64; 5], mask: ActionMask) -> Result<[f64; 5]> {
    if mask.is_empty() {
        return Err(Error::ContractViolation("softmax over an empty action mask".into()));
    }
    let max = mask.iter().map(|a| logits[a.index()]).fold(f64::NEG_INFINITY, f64::max);
    let mut p = [0.0; 5];
    let mut z = 0.0;
    for a in mask.iter() {
        let e = (logits[a.index()] - max).exp();
        p[a.index()] = e;
        z += e;
    }
    for x in &mut p {
        *x /= z;
    }
    Ok(p)
}

pub fn masked_sample<R: Rng + ?Sized>(logits: &[f64; 5], mask: ActionMask, rng: &mut R) -> Result<Action> {
    let p = masked_softmax(logits, mask)?;
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = None;
    for a in mask.iter() {
        acc += p[a.index()];
        last = Some(a);
        if u < acc {
            return Ok(a);
        }
    }
    Ok(last.expect("non-empty mask"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Step {
    pub cell: u32,
    pub action: Action,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    pub trajectory: Vec<Step>,
    /// Net return of the round in initial-wager units.
    pub ret: f64,
    pub player_natural: bool,
    pub dealer_natural: bool,
    pub n_hands: usize,
}

/// Return of one round with the trajectory written to a caller buffer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundOutcome {
    pub ret: f64,
    pub player_natural: bool,
    pub dealer_natural: bool,
    pub n_hands: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub std: f64,
    pub n: u64,
}

impl Estimate {
    pub fn from_samples(xs: &[f64]) -> Estimate {
        let mut acc = Welford::default();
        xs.iter().for_each(|&x| acc.push(x));
        acc.estimate()
    }
}

/// Running mean and variance.
#[derive(Debug, Clone, Copy, Default)]
pub struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    #[inline]
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    /// Combine with another accumulator.
    pub fn merge(&mut self, o: &Welford) {
        if o.n == 0 {
            return;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        self.mean += d * o.n as f64 / n as f64;
        self.m2 += o.m2 + d * d * self.n as f64 * o.n as f64 / n as f64;
        self.n = n;
    }

    pub fn estimate(&self) -> Estimate {
        let var = if self.n > 1 { self.m2 / (self.n - 1) as f64 } else { 0.0 };
        let std = var.sqrt();
        Estimate { mean: self.mean, stderr: std / (self.n.max(1) as f64).sqrt(), std, n: self.n }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Simulator<'a> {
    space: &'a CellSpace,
    rules: Rules,
}

impl<'a> Simulator<'a> {
    pub fn new(space: &'a CellSpace) -> Simulator<'a> {
        Simulator { space, rules: *space.rules() }
    }

    pub fn space(&self) -> &'a CellSpace {
        self.space
    }

    pub fn rules(&self) -> &Rules {
        &self.rules
    }

    /// Cell presented for `hand` given the number of hands in the round.
    pub fn cell_for(&self, hand: &HandState, upcard: u8, hands_in_round: usize) -> DecisionCell {
        let r = &self.rules;
        let two = hand.n_cards == 2;
        let dbl = two && (hand.split_depth == 0 || r.double_after_split);
        if two && hand.pair {
            let spl = hand.split_depth + 1 < r.resplit_limit && hands_in_round < usize::from(r.resplit_limit);
            DecisionCell::pair(hand.first_card, upcard, dbl, spl, hand.split_depth)
        } else {
            DecisionCell::plain(hand.value.total, hand.value.soft, upcard, dbl, hand.split_depth)
        }
    }

    pub fn play_hand<P: Policy + ?Sized, R: Rng + ?Sized>(&self, policy: &P, rng: &mut R) -> Result<Episode> {
        let mut trajectory = Vec::new();
        let o = self.play_hand_into(policy, rng, &mut trajectory)?;
        Ok(Episode {
            trajectory,
            ret: o.ret,
            player_natural: o.player_natural,
            dealer_natural: o.dealer_natural,
            n_hands: o.n_hands,
        })
    }

    /// Play one full round, appending decisions to `traj` (cleared first).
    pub fn play_hand_into<P: Policy + ?Sized, R: Rng + ?Sized>(
        &self,
        policy: &P,
        rng: &mut R,
        traj: &mut Vec<Step>,
    ) -> Result<RoundOutcome> {
        traj.clear();
        let upcard = cards::draw(rng);
        let hole = cards::draw(rng);
        let (a, b) = (cards::draw(rng), cards::draw(rng));
        let player_natural = HandTotal::of(a).add(b).total == 21;
        let dealer_natural = completes_natural(upcard, hole);
        let mut hand = HandState::new(a, b, 0);
        if self.rules.dealer_peek && dealer_natural {
            hand.status = if player_natural { HandStatus::Natural } else { HandStatus::Stood };
            let ret = settle(&[hand], DealerOutcome::Blackjack, &self.rules)?;
            return Ok(RoundOutcome { ret, player_natural, dealer_natural, n_hands: 1 });
        }
        if player_natural {
            hand.status = HandStatus::Natural;
            let d = if dealer_natural { DealerOutcome::Blackjack } else { DealerOutcome::Total(17) };
            let ret = settle(&[hand], d, &self.rules)?;
            return Ok(RoundOutcome { ret, player_natural, dealer_natural, n_hands: 1 });
        }
        let (ret, n_hands) = self.run_round(hand, None, upcard, hole, policy, rng, traj)?;
        Ok(RoundOutcome { ret, player_natural, dealer_natural, n_hands })
    }

    /// Start a round at an arbitrary cell (after peek), force `first`, then
    /// continue with `policy`. Returns the round's net return.
    pub fn play_from_cell<P: Policy + ?Sized, R: Rng + ?Sized>(
        &self,
        cell_index: usize,
        first: Action,
        policy: &P,
        rng: &mut R,
    ) -> Result<f64> {
        let cell = *self.space.cell(cell_index);
        if !self.space.mask(cell_index).contains(first) {
            return Err(Error::IllegalAction { cell: cell_index, action: first });
        }
        let hand = HandState {
            value: HandTotal { total: cell.total, soft: cell.soft },
            n_cards: if cell.can_double || cell.is_pair() { 2 } else { 3 },
            first_card: cell.pair_rank.unwrap_or(0),
            pair: cell.is_pair(),
            wager_multiplier: 1.0,
            doubled: false,
            split_depth: cell.depth,
            from_split_aces: false,
            status: HandStatus::Open,
        };
        let hole = draw_hole(cell.upcard, self.rules.dealer_peek, rng);
        let mut traj = Vec::new();
        let forced = Some((cell_index, first));
        self.run_round(hand, forced, cell.upcard, hole, policy, rng, &mut traj).map(|(r, _)| r)
    }

    #[allow(clippy::too_many_arguments)]
    fn run_round<P: Policy + ?Sized, R: Rng + ?Sized>(
        &self,
        first_hand: HandState,
        mut forced: Option<(usize, Action)>,
        upcard: u8,
        hole: u8,
        policy: &P,
        rng: &mut R,
        traj: &mut Vec<Step>,
    ) -> Result<(f64, usize)> {
        let limit = usize::from(self.rules.resplit_limit);
        let mut queue = VecDeque::with_capacity(limit);
        queue.push_back(first_hand);
        let mut done: Vec<HandState> = Vec::with_capacity(limit);
        while let Some(mut hand) = queue.pop_front() {
            if hand.n_cards == 1 {
                hand.add_card(cards::draw(rng));
                if hand.from_split_aces && self.rules.split_aces_one_card {
                    hand.status = HandStatus::Stood;
                    done.push(hand);
                    continue;
                }
            }
            let mut split = false;
            while hand.status == HandStatus::Open {
                let in_round = done.len() + queue.len() + 1;
                let (idx, action) = match forced.take() {
                    Some(f) => f,
                    None => {
                        let cell = self.cell_for(&hand, upcard, in_round);
                        let idx = self.space.index_of(&cell).ok_or_else(|| {
                            Error::ContractViolation(format!("hand produced a cell outside the space: {cell}"))
                        })?;
                        let mask = self.space.mask(idx);
                        let action = policy.choose(idx, mask, rng);
                        if !mask.contains(action) {
                            return Err(Error::IllegalAction { cell: idx, action });
                        }
                        (idx, action)
                    }
                };
                traj.push(Step { cell: idx as u32, action });
                match action {
                    Action::Stand => hand.status = HandStatus::Stood,
                    Action::Hit => hand.add_card(cards::draw(rng)),
                    Action::Double => {
                        hand.wager_multiplier *= 2.0;
                        hand.doubled = true;
                        hand.add_card(cards::draw(rng));
                        if hand.status == HandStatus::Open {
                            hand.status = HandStatus::Stood;
                        }
                    }
                    Action::Split => {
                        let d = hand.split_depth + 1;
                        queue.push_back(HandState::split_child(hand.first_card, d));
                        queue.push_back(HandState::split_child(hand.first_card, d));
                        split = true;
                        break;
                    }
                    Action::Surrender => hand.status = HandStatus::Surrendered,
                }
            }
            if !split {
                done.push(hand);
            }
        }
        let needs_dealer = done.iter().any(|h| h.status == HandStatus::Stood);
        let dealer = if needs_dealer { finish_dealer(upcard, hole, &self.rules, rng) } else { DealerOutcome::Bust };
        Ok((settle(&done, dealer, &self.rules)?, done.len()))
    }

    /// Mean and standard error of per-round returns, drawing from one generator.
    pub fn evaluate_policy<P: Policy + ?Sized, R: Rng + ?Sized>(
        &self,
        policy: &P,
        n_hands: u64,
        rng: &mut R,
    ) -> Result<Estimate> {
        let mut acc = Welford::default();
        let mut traj = Vec::new();
        for _ in 0..n_hands {
            acc.push(self.play_hand_into(policy, rng, &mut traj)?.ret);
        }
        Ok(acc.estimate())
    }

    /// Like `evaluate_policy`, but hand `i` always uses `stream.hand_rng(i)`,
    /// so two policies evaluated on the same stream see common random numbers.
    pub fn evaluate_policy_crn<P: Policy + ?Sized>(
        &self,
        policy: &P,
        n_hands: u64,
        stream: &RngStream,
        mut on_return: impl FnMut(f64),
    ) -> Result<Estimate> {
        let mut acc = Welford::default();
        let mut traj = Vec::new();
        for i in 0..n_hands {
            let mut rng = stream.hand_rng(i);
            let r = self.play_hand_into(policy, &mut rng, &mut traj)?.ret;
            on_return(r);
            acc.push(r);
        }
        Ok(acc.estimate())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::solve;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn softmax_examples() {
        let m = ActionMask::from_actions(&[Action::Stand, Action::Hit]);
        let p = masked_softmax(&[0.0; 5], m).unwrap();
        assert_eq!(p, [0.5, 0.5, 0.0, 0.0, 0.0]);
        let p = masked_softmax(&[1.0, 0.0, 7.0, 7.0, 7.0], m).unwrap();
        let e = std::f64::consts::E;
        assert!((p[0] - e / (1.0 + e)).abs() < 1e-15);
        assert!(masked_softmax(&[0.0; 5], ActionMask::NONE).is_err());
        assert!(masked_sample(&[0.0; 5], ActionMask::NONE, &mut ChaCha8Rng::seed_from_u64(1)).is_err());
    }

    #[test]
    fn masked_action_never_sampled() {
        let m = ActionMask::from_actions(&[Action::Hit, Action::Split]);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20_000 {
            let a = masked_sample(&[50.0, -1.0, 50.0, 0.0, 50.0], m, &mut rng).unwrap();
            assert!(m.contains(a));
        }
    }

    #[test]
    fn seeded_episodes_repeat() {
        let sol = solve(&Rules::benchmark()).unwrap();
        let sim = Simulator::new(sol.space());
        let run = || {
            let mut rng = RngStream::new(7, 0).rng();
            (0..200).map(|_| sim.play_hand(&sol.optimal_action, &mut rng).unwrap()).collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn dealer_natural_under_peek_ends_round() {
        let sol = solve(&Rules::benchmark()).unwrap();
        let sim = Simulator::new(sol.space());
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut seen = 0;
        for _ in 0..20_000 {
            let e = sim.play_hand(&UniformRandom, &mut rng).unwrap();
            if e.dealer_natural {
                seen += 1;
                assert!(e.trajectory.is_empty());
                assert_eq!(e.ret, if e.player_natural { 0.0 } else { -1.0 });
            }
            assert!((-8.0..=8.0).contains(&e.ret));
        }
        assert!(seen > 0);
    }

    #[test]
    fn illegal_policy_fails_fast() {
        struct AlwaysSplit;
        impl Policy for AlwaysSplit {
            fn choose<R: Rng + ?Sized>(&self, _: usize, _: ActionMask, _: &mut R) -> Action {
                Action::Split
            }
        }
        let space = CellSpace::new(Rules::benchmark());
        let sim = Simulator::new(&space);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let err = (0..100).find_map(|_| sim.play_hand(&AlwaysSplit, &mut rng).err());
        assert!(matches!(err, Some(Error::IllegalAction { .. })));
    }

    #[test]
    fn trajectories_respect_masks() {
        let space = CellSpace::new(Rules::benchmark());
        let sim = Simulator::new(&space);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50_000 {
            let e = sim.play_hand(&UniformRandom, &mut rng).unwrap();
            for s in &e.trajectory {
                assert!(space.mask(s.cell as usize).contains(s.action));
            }
            assert!(e.n_hands <= 4);
        }
    }
}
