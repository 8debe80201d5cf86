//! Dealer terminal-outcome distribution by memoized recursion, and a
//! sampling playout used by the simulator and as an independent check.

use std::io::Write;

use rand::Rng;

use crate::cards::{self, HandTotal, ACE, PROBS, TEN, VALUES};
use crate::hand::DealerOutcome;
use crate::rules::Rules;

/// Outcome labels in column order.
pub const OUTCOMES: [&str; 6] = ["17", "18", "19", "20", "21", "bust"];
pub const BUST: usize = 5;

/// Probability vector over 17, 18, 19, 20, 21, bust.
pub type OutcomeProbs = [f64; 6];

#[derive(Debug, Clone, PartialEq)]
pub struct DealerDistribution {
    /// Rows indexed by upcard − 2.
    rows: [OutcomeProbs; 10],
    pub peek_conditioned: bool,
    pub hits_soft_17: bool,
}

impl DealerDistribution {
    pub fn new(rules: &Rules, peek: bool) -> DealerDistribution {
        let mut memo = Memo::new(!rules.dealer_stands_soft_17);
        let rows = std::array::from_fn(|i| memo.upcard_row(VALUES[i], peek));
        DealerDistribution { rows, peek_conditioned: peek, hits_soft_17: !rules.dealer_stands_soft_17 }
    }

    /// Distribution the player faces at decision time.
    pub fn for_decisions(rules: &Rules) -> DealerDistribution {
        DealerDistribution::new(rules, rules.dealer_peek)
    }

    #[inline]
    pub fn row(&self, upcard: u8) -> &OutcomeProbs {
        &self.rows[usize::from(upcard - 2)]
    }

    /// Rows of `(upcard, outcome, probability, peek)` for audit dumps.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "upcard,outcome,probability,peek")?;
        for &u in &VALUES {
            for (k, p) in self.row(u).iter().enumerate() {
                writeln!(w, "{},{},{:.17},{}", u, OUTCOMES[k], p, u8::from(self.peek_conditioned))?;
            }
        }
        Ok(())
    }
}

/// Distribution of the dealer's final outcome given the upcard.
pub fn dealer_distribution(upcard: u8, rules: &Rules, peek: bool) -> OutcomeProbs {
    Memo::new(!rules.dealer_stands_soft_17).upcard_row(upcard, peek)
}

/// Probability the hole card completes a natural.
pub fn natural_prob(upcard: u8) -> f64 {
    match upcard {
        ACE => PROBS[usize::from(TEN - 2)],
        TEN => PROBS[usize::from(ACE - 2)],
        _ => 0.0,
    }
}

#[inline]
pub fn completes_natural(upcard: u8, hole: u8) -> bool {
    (upcard == ACE && hole == TEN) || (upcard == TEN && hole == ACE)
}

#[inline]
fn dealer_stands(h: HandTotal, hits_soft_17: bool) -> bool {
    h.total > 17 || (h.total == 17 && !(h.soft && hits_soft_17))
}

/// Memo over dealer `(total, soft)` states.
struct Memo {
    hits_soft_17: bool,
    table: [[Option<OutcomeProbs>; 2]; 22],
}

impl Memo {
    fn new(hits_soft_17: bool) -> Memo {
        Memo { hits_soft_17, table: [[None; 2]; 22] }
    }

    fn from_state(&mut self, h: HandTotal) -> OutcomeProbs {
        if h.is_bust() {
            let mut out = [0.0; 6];
            out[BUST] = 1.0;
            return out;
        }
        if dealer_stands(h, self.hits_soft_17) {
            let mut out = [0.0; 6];
            out[usize::from(h.total - 17)] = 1.0;
            return out;
        }
        let slot = (usize::from(h.total), usize::from(h.soft));
        if let Some(p) = self.table[slot.0][slot.1] {
            return p;
        }
        let mut out = [0.0; 6];
        for (i, &v) in VALUES.iter().enumerate() {
            let next = self.from_state(h.add(v));
            for k in 0..6 {
                out[k] += PROBS[i] * next[k];
            }
        }
        self.table[slot.0][slot.1] = Some(out);
        out
    }

    fn upcard_row(&mut self, upcard: u8, peek: bool) -> OutcomeProbs {
        let mut out = [0.0; 6];
        let mut mass = 0.0;
        for (i, &hole) in VALUES.iter().enumerate() {
            if peek && completes_natural(upcard, hole) {
                continue;
            }
            mass += PROBS[i];
            let next = self.from_state(HandTotal::of(upcard).add(hole));
            for k in 0..6 {
                out[k] += PROBS[i] * next[k];
            }
        }
        for p in &mut out {
            *p /= mass;
        }
        out
    }
}

/// Draw a hole card; under peek it is conditioned on not completing a natural.
pub fn draw_hole<R: Rng + ?Sized>(upcard: u8, peek: bool, rng: &mut R) -> u8 {
    loop {
        let c = cards::draw(rng);
        if !(peek && completes_natural(upcard, c)) {
            return c;
        }
    }
}

/// Finish the dealer's hand from upcard and hole card.
pub fn finish_dealer<R: Rng + ?Sized>(upcard: u8, hole: u8, rules: &Rules, rng: &mut R) -> DealerOutcome {
    if completes_natural(upcard, hole) {
        return DealerOutcome::Blackjack;
    }
    let hits_soft_17 = !rules.dealer_stands_soft_17;
    let mut h = HandTotal::of(upcard).add(hole);
    while !dealer_stands(h, hits_soft_17) {
        h = h.add(cards::draw(rng));
        if h.is_bust() {
            return DealerOutcome::Bust;
        }
    }
    DealerOutcome::Total(h.total)
}

/// Sample one dealer outcome for `upcard`.
pub fn dealer_playout<R: Rng + ?Sized>(upcard: u8, rules: &Rules, peek: bool, rng: &mut R) -> DealerOutcome {
    let hole = draw_hole(upcard, peek, rng);
    finish_dealer(upcard, hole, rules, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rows_normalized() {
        for rules in [Rules::benchmark(), crate::rules::Variant::H17.rules()] {
            for peek in [false, true] {
                let d = DealerDistribution::new(&rules, peek);
                for &u in &VALUES {
                    let s: f64 = d.row(u).iter().sum();
                    assert!((s - 1.0).abs() < 1e-12, "u={u} sum={s}");
                    assert!(d.row(u).iter().all(|&p| (0.0..=1.0).contains(&p)));
                }
            }
        }
    }

    #[test]
    fn peek_only_changes_ten_and_ace() {
        let r = Rules::benchmark();
        let a = DealerDistribution::new(&r, false);
        let b = DealerDistribution::new(&r, true);
        for u in 2..=9 {
            assert_eq!(a.row(u), b.row(u));
        }
        assert!(b.row(ACE)[4] < a.row(ACE)[4]);
        assert!(b.row(TEN)[4] < a.row(TEN)[4]);
        assert!(b.row(ACE)[4] > 0.0);
    }

    #[test]
    fn h17_moves_mass_off_17() {
        let s17 = DealerDistribution::new(&Rules::benchmark(), true);
        let h17 = DealerDistribution::new(&crate::rules::Variant::H17.rules(), true);
        for &u in &VALUES {
            assert!(h17.row(u)[0] <= s17.row(u)[0]);
        }
        assert!(h17.row(ACE)[0] < s17.row(ACE)[0]);
    }

    #[test]
    fn known_bust_rate_upcard_six() {
        // Widely tabulated infinite-deck S17 value.
        let p = dealer_distribution(6, &Rules::benchmark(), false);
        assert!((p[BUST] - 0.4232).abs() < 5e-4, "{}", p[BUST]);
    }

    #[test]
    fn playout_is_seed_deterministic() {
        let r = Rules::benchmark();
        let run = || {
            let mut rng = ChaCha8Rng::seed_from_u64(99);
            (0..50).map(|_| dealer_playout(6, &r, false, &mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn csv_dump_shape() {
        let d = DealerDistribution::new(&Rules::benchmark(), true);
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 60);
    }
}
