//! Decision cells, actions, and legality masks.
//!
//! A decision cell is the abstract player state `(total, upcard, soft, pair,
//! pair rank, can double, can split, split depth)`. The cell space is the
//! full product of those fields restricted by the structural invariants:
//!
//! * `soft` implies `12 <= total <= 21`;
//! * a pair of rank `r` has `total = 2r` hard, or soft 12 for Aces;
//! * `can_split` implies a pair at a depth below the deepest split level.
//!
//! Canonical order (stable across runs): split depth, then upcard 2..=11,
//! then hard non-pair totals 4..=21, soft non-pair totals 12..=21, then pair
//! ranks 2..=11. Within each total or rank, `can_double = true` precedes
//! `false`, and for pairs `can_split = true` precedes `false`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cards::ACE;
use crate::rules::Rules;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Stand = 0,
    Hit = 1,
    Double = 2,
    Split = 3,
    Surrender = 4,
}

impl Action {
    /// Fixed order; also the tie-break preference on exact ties.
    pub const ALL: [Action; 5] = [Action::Stand, Action::Hit, Action::Double, Action::Split, Action::Surrender];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Action> {
        Action::ALL.get(i).copied()
    }

    pub fn code(self) -> char {
        match self {
            Action::Stand => 'S',
            Action::Hit => 'H',
            Action::Double => 'D',
            Action::Split => 'P',
            Action::Surrender => 'R',
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Action::Stand => "stand",
            Action::Hit => "hit",
            Action::Double => "double",
            Action::Split => "split",
            Action::Surrender => "surrender",
        };
        f.write_str(s)
    }
}

/// Legal actions of a cell as a 5-bit set in `Action::ALL` order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct ActionMask(u8);

impl ActionMask {
    pub const NONE: ActionMask = ActionMask(0);

    pub fn from_actions(actions: &[Action]) -> ActionMask {
        actions.iter().fold(ActionMask::NONE, |m, &a| m.with(a))
    }

    #[inline]
    pub fn with(self, a: Action) -> ActionMask {
        ActionMask(self.0 | (1 << a.index()))
    }

    #[inline]
    pub fn contains(self, a: Action) -> bool {
        self.0 & (1 << a.index()) != 0
    }

    #[inline]
    pub fn is_legal_index(self, i: usize) -> bool {
        self.0 & (1 << i) != 0
    }

    pub fn count(self) -> u32 {
        self.0.count_ones()
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn to_bools(self) -> [bool; 5] {
        std::array::from_fn(|i| self.is_legal_index(i))
    }

    /// Legal actions in tie-break order.
    pub fn iter(self) -> impl Iterator<Item = Action> {
        Action::ALL.into_iter().filter(move |&a| self.contains(a))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DecisionCell {
    pub total: u8,
    pub upcard: u8,
    pub soft: bool,
    /// Rank of the pair, present only for pair cells.
    pub pair_rank: Option<u8>,
    pub can_double: bool,
    pub can_split: bool,
    pub depth: u8,
}

impl DecisionCell {
    /// Non-pair cell.
    pub fn plain(total: u8, soft: bool, upcard: u8, can_double: bool, depth: u8) -> DecisionCell {
        DecisionCell { total, upcard, soft, pair_rank: None, can_double, can_split: false, depth }
    }

    pub fn pair(rank: u8, upcard: u8, can_double: bool, can_split: bool, depth: u8) -> DecisionCell {
        let (total, soft) = if rank == ACE { (12, true) } else { (2 * rank, false) };
        DecisionCell { total, upcard, soft, pair_rank: Some(rank), can_double, can_split, depth }
    }

    pub fn is_pair(&self) -> bool {
        self.pair_rank.is_some()
    }

    /// Check the structural invariants against `rules`.
    pub fn is_valid(&self, rules: &Rules) -> bool {
        if !(4..=21).contains(&self.total) || !(2..=11).contains(&self.upcard) {
            return false;
        }
        if self.depth > rules.max_depth() {
            return false;
        }
        if self.soft && self.total < 12 {
            return false;
        }
        match self.pair_rank {
            Some(ACE) => {
                if !(self.total == 12 && self.soft) {
                    return false;
                }
            }
            Some(r) => {
                if !(2..=10).contains(&r) || self.total != 2 * r || self.soft {
                    return false;
                }
            }
            None => {
                if self.can_split {
                    return false;
                }
            }
        }
        !(self.can_split && self.depth + 1 >= rules.resplit_limit)
    }

    /// Packed key used by the dense index lookup.
    fn key(&self) -> usize {
        let pair = self.pair_rank.map_or(0, |r| usize::from(r) - 1);
        let mut k = usize::from(self.depth);
        k = k * 10 + usize::from(self.upcard - 2);
        k = k * 18 + usize::from(self.total - 4);
        k = k * 2 + usize::from(self.soft);
        k = k * 11 + pair;
        k = k * 2 + usize::from(self.can_double);
        k * 2 + usize::from(self.can_split)
    }
}

impl fmt::Display for DecisionCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let up = if self.upcard == ACE { "A".to_string() } else { self.upcard.to_string() };
        match self.pair_rank {
            Some(r) => {
                let rk = if r == ACE { "A".to_string() } else { r.to_string() };
                write!(f, "pair {rk},{rk} vs {up}")?;
            }
            None => write!(f, "{} {} vs {up}", if self.soft { "soft" } else { "hard" }, self.total)?,
        }
        write!(
            f,
            " [d={}{}{}]",
            self.depth,
            if self.can_double { " dbl" } else { "" },
            if self.can_split { " spl" } else { "" }
        )
    }
}

const KEY_SPACE: usize = 4 * 10 * 18 * 2 * 11 * 2 * 2;
const NO_CELL: u32 = u32::MAX;

/// Legal-action mask of a cell under `rules`.
pub fn legal_actions(cell: &DecisionCell, rules: &Rules) -> ActionMask {
    let mut m = ActionMask::NONE.with(Action::Stand).with(Action::Hit);
    let double_total_ok =
        rules.double_any_two || (!cell.soft && (9..=11).contains(&cell.total));
    if cell.can_double && (cell.depth == 0 || rules.double_after_split) && double_total_ok {
        m = m.with(Action::Double);
    }
    if cell.can_split && cell.is_pair() && cell.depth + 1 < rules.resplit_limit {
        m = m.with(Action::Split);
    }
    // `can_double` at depth 0 marks an untouched two-card hand.
    if rules.surrender_allowed && cell.depth == 0 && cell.can_double {
        m = m.with(Action::Surrender);
    }
    m
}

/// The enumerated decision cells for a ruleset, their masks, and an index.
#[derive(Debug, Clone)]
pub struct CellSpace {
    rules: Rules,
    cells: Vec<DecisionCell>,
    masks: Vec<ActionMask>,
    lookup: Vec<u32>,
}

impl CellSpace {
    pub fn new(rules: Rules) -> CellSpace {
        let cells = enumerate_cells(&rules);
        let masks = cells.iter().map(|c| legal_actions(c, &rules)).collect();
        let mut lookup = vec![NO_CELL; KEY_SPACE];
        for (i, c) in cells.iter().enumerate() {
            let slot = &mut lookup[c.key()];
            debug_assert_eq!(*slot, NO_CELL, "duplicate cell {c}");
            *slot = i as u32;
        }
        CellSpace { rules, cells, masks, lookup }
    }

    pub fn rules(&self) -> &Rules {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> &[DecisionCell] {
        &self.cells
    }

    #[inline]
    pub fn cell(&self, index: usize) -> &DecisionCell {
        &self.cells[index]
    }

    #[inline]
    pub fn mask(&self, index: usize) -> ActionMask {
        self.masks[index]
    }

    pub fn masks(&self) -> &[ActionMask] {
        &self.masks
    }

    #[inline]
    pub fn index_of(&self, cell: &DecisionCell) -> Option<usize> {
        if !(4..=21).contains(&cell.total) || !(2..=11).contains(&cell.upcard) || cell.depth > 3 {
            return None;
        }
        match self.lookup[cell.key()] {
            NO_CELL => None,
            i => Some(i as usize),
        }
    }
}

/// All cells for `rules`, in canonical order.
pub fn enumerate_cells(rules: &Rules) -> Vec<DecisionCell> {
    let mut out = Vec::new();
    for depth in 0..=rules.max_depth() {
        let split_levels: &[bool] = if depth + 1 < rules.resplit_limit { &[true, false] } else { &[false] };
        for upcard in 2..=11u8 {
            for total in 4..=21u8 {
                for dbl in [true, false] {
                    out.push(DecisionCell::plain(total, false, upcard, dbl, depth));
                }
            }
            for total in 12..=21u8 {
                for dbl in [true, false] {
                    out.push(DecisionCell::plain(total, true, upcard, dbl, depth));
                }
            }
            for rank in 2..=11u8 {
                for dbl in [true, false] {
                    for &spl in split_levels {
                        out.push(DecisionCell::pair(rank, upcard, dbl, spl, depth));
                    }
                }
            }
        }
    }
    out
}
