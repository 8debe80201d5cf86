//! Infinite-shoe card distribution and hand valuation.
//!
//! Card values run 2..=11, where 11 is an Ace and 10 covers every ten-value
//! rank. Draws are i.i.d. with probability 1/13 per value, 4/13 for tens.

use rand::Rng;

use crate::error::{Error, Result};

pub const ACE: u8 = 11;
pub const TEN: u8 = 10;

/// Every card value in ascending order.
pub const VALUES: [u8; 10] = [2, 3, 4, 5, 6, 7, 8, 9, 10, 11];

/// Probability weight of a value in thirteenths.
pub const fn weight_13(v: u8) -> u32 {
    if v == TEN {
        4
    } else {
        1
    }
}

/// Draw probabilities in `VALUES` order.
pub const PROBS: [f64; 10] = {
    let mut p = [0.0; 10];
    let mut i = 0;
    while i < 10 {
        p[i] = weight_13(VALUES[i]) as f64 / 13.0;
        i += 1;
    }
    p
};

pub fn card_prob(v: u8) -> Result<f64> {
    if !(2..=11).contains(&v) {
        return Err(Error::InvalidArgument(format!("card value {v} outside 2..=11")));
    }
    Ok(PROBS[usize::from(v - 2)])
}

/// Draw one card value from the infinite shoe.
#[inline]
pub fn draw<R: Rng + ?Sized>(rng: &mut R) -> u8 {
    match rng.random_range(0..13u8) {
        k @ 0..=7 => k + 2,
        8..=11 => TEN,
        _ => ACE,
    }
}

/// Running total of a hand: best total with at most one Ace counted as 11.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct HandTotal {
    pub total: u8,
    pub soft: bool,
}

impl HandTotal {
    pub const EMPTY: HandTotal = HandTotal { total: 0, soft: false };

    pub fn of(v: u8) -> HandTotal {
        HandTotal::EMPTY.add(v)
    }

    /// Add one card. A busting soft hand demotes its Ace to 1.
    #[inline]
    pub fn add(self, v: u8) -> HandTotal {
        let (mut total, mut soft) = if v == ACE {
            if self.soft {
                (self.total + 1, true)
            } else {
                (self.total + 11, true)
            }
        } else {
            (self.total + v, self.soft)
        };
        if total > 21 && soft {
            total -= 10;
            soft = false;
        }
        HandTotal { total, soft }
    }

    #[inline]
    pub fn is_bust(self) -> bool {
        self.total > 21
    }
}

/// Value a list of cards. Busted hands report the minimal hard total.
pub fn hand_value(cards: &[u8]) -> (u8, bool) {
    let t = cards.iter().fold(HandTotal::EMPTY, |h, &c| h.add(c));
    (t.total, t.soft)
}
