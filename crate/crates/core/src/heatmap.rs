//! Regret heatmaps in strategy-chart layout.
//!
//! Rows are player totals (or pair ranks), columns are upcards 2..A. Each
//! entry shows the depth-0, double-eligible variant of the cell; pair rows
//! use the split-eligible variant. Images map regret linearly from white
//! (zero) to dark red (the grid maximum) and carry a legend bar on the right
//! edge running from zero at the bottom to the maximum at the top. Cells with
//! no corresponding decision are drawn grey.

use std::fmt::Write as _;
use std::path::Path;

use image::{Rgb, RgbImage};
use serde::{Deserialize, Serialize};

use crate::cards::{ACE, VALUES};
use crate::cells::{CellSpace, DecisionCell};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Chart {
    Hard,
    Soft,
    Pair,
}

impl Chart {
    pub const ALL: [Chart; 3] = [Chart::Hard, Chart::Soft, Chart::Pair];

    pub fn name(self) -> &'static str {
        match self {
            Chart::Hard => "hard",
            Chart::Soft => "soft",
            Chart::Pair => "pair",
        }
    }

    /// Row keys: totals for hard and soft charts, ranks for pairs.
    pub fn rows(self) -> Vec<u8> {
        match self {
            Chart::Hard => (5..=21).collect(),
            Chart::Soft => (13..=21).collect(),
            Chart::Pair => VALUES.to_vec(),
        }
    }

    pub fn row_label(self, key: u8) -> String {
        match self {
            Chart::Hard => key.to_string(),
            Chart::Soft => format!("A{}", key - 11),
            Chart::Pair if key == ACE => "A,A".to_string(),
            Chart::Pair => format!("{key},{key}"),
        }
    }

    pub fn cell(self, key: u8, upcard: u8) -> DecisionCell {
        match self {
            Chart::Hard => DecisionCell::plain(key, false, upcard, true, 0),
            Chart::Soft => DecisionCell::plain(key, true, upcard, true, 0),
            Chart::Pair => DecisionCell::pair(key, upcard, true, true, 0),
        }
    }
}

pub fn upcard_label(u: u8) -> String {
    if u == ACE {
        "A".to_string()
    } else {
        u.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub chart: Chart,
    pub row_labels: Vec<String>,
    /// `values[row][col]`, columns in upcard order 2..A.
    pub values: Vec<[Option<f64>; 10]>,
}

impl Grid {
    pub fn build(chart: Chart, space: &CellSpace, per_cell: &[f64]) -> Grid {
        let rows = chart.rows();
        let values = rows
            .iter()
            .map(|&k| {
                let mut r = [None; 10];
                for (j, &u) in VALUES.iter().enumerate() {
                    r[j] = space.index_of(&chart.cell(k, u)).map(|i| per_cell[i]);
                }
                r
            })
            .collect();
        Grid { chart, row_labels: rows.iter().map(|&k| chart.row_label(k)).collect(), values }
    }

    pub fn max(&self) -> f64 {
        self.values.iter().flatten().flatten().fold(0.0, |a, &b| a.max(b))
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(self.chart.name());
        for &u in &VALUES {
            s.push(',');
            s.push_str(&upcard_label(u));
        }
        s.push('\n');
        for (label, row) in self.row_labels.iter().zip(&self.values) {
            s.push_str(label);
            for v in row {
                match v {
                    Some(x) => write!(s, ",{x:.6}").unwrap(),
                    None => s.push(','),
                }
            }
            s.push('\n');
        }
        s
    }

    pub fn render(&self) -> RgbImage {
        const CELL: u32 = 32;
        const GAP: u32 = 8;
        const LEGEND: u32 = 16;
        let rows = self.values.len() as u32;
        let w = 10 * CELL + GAP + LEGEND + 1;
        let h = rows * CELL + 1;
        let mut img = RgbImage::from_pixel(w, h, Rgb([255, 255, 255]));
        let scale = self.max();
        for (r, row) in self.values.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                let color = match v {
                    Some(x) => ramp(if scale > 0.0 { x / scale } else { 0.0 }),
                    None => Rgb([200, 200, 200]),
                };
                let (x0, y0) = (c as u32 * CELL, r as u32 * CELL);
                for y in y0..y0 + CELL {
                    for x in x0..x0 + CELL {
                        let edge = x == x0 || y == y0;
                        img.put_pixel(x, y, if edge { Rgb([96, 96, 96]) } else { color });
                    }
                }
            }
        }
        for x in 0..=10 * CELL {
            img.put_pixel(x.min(w - 1), h - 1, Rgb([96, 96, 96]));
        }
        for y in 0..h {
            img.put_pixel(10 * CELL, y, Rgb([96, 96, 96]));
        }
        let lx = 10 * CELL + GAP;
        for y in 0..h {
            let t = 1.0 - y as f64 / (h - 1) as f64;
            for x in lx..lx + LEGEND {
                img.put_pixel(x, y, ramp(t));
            }
        }
        img
    }

    pub fn save_png(&self, path: &Path) -> Result<()> {
        self.render().save_with_format(path, image::ImageFormat::Png)?;
        Ok(())
    }
}

/// White at 0 to dark red at 1.
pub fn ramp(t: f64) -> Rgb<u8> {
    let t = t.clamp(0.0, 1.0);
    let lerp = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    Rgb([lerp(255.0, 140.0), lerp(255.0, 10.0), lerp(255.0, 20.0)])
}
