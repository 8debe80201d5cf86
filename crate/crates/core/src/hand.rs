//! Runtime hand state and round settlement.

use serde::{Deserialize, Serialize};

use crate::cards::{HandTotal, ACE};
use crate::error::{Error, Result};
use crate::rules::Rules;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HandStatus {
    Open,
    Stood,
    Busted,
    Surrendered,
    /// Untouched two-card 21 on the initial deal.
    Natural,
}

/// A player hand during a round. The card list itself is not kept; the
/// infinite shoe makes total, softness and card count sufficient.
#[derive(Debug, Clone, PartialEq)]
pub struct HandState {
    pub value: HandTotal,
    pub n_cards: u8,
    /// First card's value; a second card of the same value makes a pair.
    pub first_card: u8,
    pub pair: bool,
    pub wager_multiplier: f64,
    pub doubled: bool,
    pub split_depth: u8,
    pub from_split_aces: bool,
    pub status: HandStatus,
}

impl HandState {
    pub fn new(first: u8, second: u8, split_depth: u8) -> HandState {
        HandState {
            value: HandTotal::of(first).add(second),
            n_cards: 2,
            first_card: first,
            pair: first == second,
            wager_multiplier: 1.0,
            doubled: false,
            split_depth,
            from_split_aces: false,
            status: HandStatus::Open,
        }
    }

    /// Child hand created by splitting a pair of `rank`, before its second card.
    pub fn split_child(rank: u8, split_depth: u8) -> HandState {
        HandState {
            value: HandTotal::of(rank),
            n_cards: 1,
            first_card: rank,
            pair: false,
            wager_multiplier: 1.0,
            doubled: false,
            split_depth,
            from_split_aces: rank == ACE,
            status: HandStatus::Open,
        }
    }

    pub fn add_card(&mut self, v: u8) {
        self.value = self.value.add(v);
        self.n_cards += 1;
        self.pair = self.n_cards == 2 && self.first_card == v;
        if self.value.is_bust() {
            self.status = HandStatus::Busted;
        }
    }

    pub fn total(&self) -> u8 {
        self.value.total
    }

    pub fn is_resolved(&self) -> bool {
        self.status != HandStatus::Open
    }
}

/// Dealer's final result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DealerOutcome {
    /// Standing total in 17..=21.
    Total(u8),
    Bust,
    /// Two-card natural (revealed by peek, or at the end without peek).
    Blackjack,
}

impl DealerOutcome {
    /// Column index in 17, 18, 19, 20, 21, bust order. A natural is a 21.
    pub fn slot(self) -> usize {
        match self {
            DealerOutcome::Total(t) => usize::from(t - 17),
            DealerOutcome::Bust => 5,
            DealerOutcome::Blackjack => 4,
        }
    }
}

/// Net payoff of one resolved hand, in initial-wager units.
pub fn settle_hand(hand: &HandState, dealer: DealerOutcome, rules: &Rules) -> Result<f64> {
    let w = hand.wager_multiplier;
    let unit = match hand.status {
        HandStatus::Open => {
            return Err(Error::ContractViolation("settling an unresolved hand".into()));
        }
        HandStatus::Natural => match dealer {
            DealerOutcome::Blackjack => 0.0,
            _ => rules.blackjack_payout.as_f64(),
        },
        HandStatus::Busted => -1.0,
        HandStatus::Surrendered => -0.5,
        HandStatus::Stood => {
            let x = hand.value.total;
            match dealer {
                DealerOutcome::Bust => 1.0,
                DealerOutcome::Blackjack if rules.dealer_peek => -1.0,
                d => {
                    let f = match d {
                        DealerOutcome::Total(f) => f,
                        _ => 21,
                    };
                    match x.cmp(&f) {
                        std::cmp::Ordering::Greater => 1.0,
                        std::cmp::Ordering::Less => -1.0,
                        std::cmp::Ordering::Equal => 0.0,
                    }
                }
            }
        }
    };
    Ok(w * unit)
}

/// Net payoff of a round: the sum over all resolved hands.
pub fn settle(hands: &[HandState], dealer: DealerOutcome, rules: &Rules) -> Result<f64> {
    hands.iter().map(|h| settle_hand(h, dealer, rules)).sum()
}
