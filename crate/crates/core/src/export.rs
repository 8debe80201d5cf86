//! Persistent record formats: solution and policy dumps, strategy charts,
//! per-cell regret tables.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::cards::VALUES;
use crate::cells::{Action, CellSpace, DecisionCell};
use crate::error::{Error, Result};
use crate::heatmap::{upcard_label, Chart};
use crate::metrics::RegretReport;
use crate::optim::LogitTable;
use crate::oracle::OracleSolution;
use crate::rules::Rules;

pub const FORMAT_VERSION: u32 = 1;
pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Provenance carried by every result file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub kind: String,
    pub format_version: u32,
    pub artifact_version: String,
    pub config_hash: String,
    pub seed: Option<u64>,
    pub rules: Rules,
    pub game_ev: Option<f64>,
}

impl Header {
    pub fn new(kind: &str, config_hash: &str, seed: Option<u64>, rules: Rules) -> Header {
        Header {
            kind: kind.to_string(),
            format_version: FORMAT_VERSION,
            artifact_version: ARTIFACT_VERSION.to_string(),
            config_hash: config_hash.to_string(),
            seed,
            rules,
            game_ev: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub index: usize,
    pub total: u8,
    pub upcard: u8,
    pub soft: bool,
    pub pair_rank: Option<u8>,
    pub can_double: bool,
    pub can_split: bool,
    pub depth: u8,
    /// Stand, hit, double, split, surrender; null where illegal or unknown.
    pub q: [Option<f64>; 5],
    pub action: Action,
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub logits: Option<[f64; 5]>,
}

impl CellRecord {
    fn from_cell(index: usize, c: &DecisionCell, action: Action) -> CellRecord {
        CellRecord {
            index,
            total: c.total,
            upcard: c.upcard,
            soft: c.soft,
            pair_rank: c.pair_rank,
            can_double: c.can_double,
            can_split: c.can_split,
            depth: c.depth,
            q: [None; 5],
            action,
            value: None,
            logits: None,
        }
    }

    pub fn cell(&self) -> DecisionCell {
        DecisionCell {
            total: self.total,
            upcard: self.upcard,
            soft: self.soft,
            pair_rank: self.pair_rank,
            can_double: self.can_double,
            can_split: self.can_split,
            depth: self.depth,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellDump {
    pub header: Header,
    pub cells: Vec<CellRecord>,
}

impl CellDump {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<CellDump> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn actions(&self) -> Vec<Action> {
        self.cells.iter().map(|r| r.action).collect()
    }

    /// Logit table stored in a policy dump.
    pub fn logits(&self) -> Result<LogitTable> {
        let rows = self
            .cells
            .iter()
            .map(|r| r.logits.ok_or_else(|| Error::InvalidArgument(format!("record {} has no logits", r.index))))
            .collect::<Result<Vec<_>>>()?;
        Ok(LogitTable::from_rows(rows))
    }

    /// Check that records line up with `space` in canonical order.
    pub fn check_space(&self, space: &CellSpace) -> Result<()> {
        if self.cells.len() != space.len() {
            return Err(Error::InvalidArgument(format!(
                "dump has {} records, cell space has {}",
                self.cells.len(),
                space.len()
            )));
        }
        for (i, r) in self.cells.iter().enumerate() {
            if r.index != i || r.cell() != *space.cell(i) {
                return Err(Error::InvalidArgument(format!("record {i} does not match cell {}", space.cell(i))));
            }
        }
        Ok(())
    }
}

pub fn solution_dump(sol: &OracleSolution, mut header: Header) -> CellDump {
    header.game_ev = Some(sol.game_ev);
    let cells = sol
        .space()
        .cells()
        .iter()
        .enumerate()
        .map(|(i, c)| CellRecord {
            q: sol.q_values[i],
            value: Some(sol.optimal_value[i]),
            ..CellRecord::from_cell(i, c, sol.optimal_action[i])
        })
        .collect();
    CellDump { header, cells }
}

/// Dump a learned policy: greedy action and raw logits per cell. `values`
/// optionally carries exact per-cell values of the policy.
pub fn policy_dump(
    theta: &LogitTable,
    greedy: &[Action],
    values: Option<&[f64]>,
    space: &CellSpace,
    header: Header,
) -> CellDump {
    let cells = space
        .cells()
        .iter()
        .enumerate()
        .map(|(i, c)| CellRecord {
            value: values.map(|v| v[i]),
            logits: Some(*theta.row(i)),
            ..CellRecord::from_cell(i, c, greedy[i])
        })
        .collect();
    CellDump { header, cells }
}

/// Classic strategy chart for depth-0, double-eligible cells. Codes: S stand,
/// H hit, D double, P split, R surrender.
pub fn strategy_chart(space: &CellSpace, actions: &[Action]) -> String {
    let mut s = String::new();
    for chart in Chart::ALL {
        write!(s, "{:<6}", chart.name()).unwrap();
        for &u in &VALUES {
            write!(s, "{:>3}", upcard_label(u)).unwrap();
        }
        s.push('\n');
        for k in chart.rows() {
            write!(s, "{:<6}", chart.row_label(k)).unwrap();
            for &u in &VALUES {
                let code = space.index_of(&chart.cell(k, u)).map(|i| actions[i].code()).unwrap_or('.');
                write!(s, "{code:>3}").unwrap();
            }
            s.push('\n');
        }
        s.push('\n');
    }
    s
}

/// One row per cell with the oracle action, learned action, and regret.
pub fn regret_csv(space: &CellSpace, oracle: &OracleSolution, learned: &[Action], report: &RegretReport) -> String {
    let mut s = String::from("index,total,upcard,soft,pair_rank,can_double,can_split,depth,oracle_action,learned_action,regret\n");
    for (i, c) in space.cells().iter().enumerate() {
        writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{:.6}",
            i,
            c.total,
            c.upcard,
            c.soft as u8,
            c.pair_rank.map(|r| r.to_string()).unwrap_or_default(),
            c.can_double as u8,
            c.can_split as u8,
            c.depth,
            oracle.optimal_action[i],
            learned[i],
            report.per_cell[i]
        )
        .unwrap();
    }
    s
}
