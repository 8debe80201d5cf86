use serde::{Deserialize, Serialize};

use crate::cells::{Action, ActionMask};
use crate::sim::masked_softmax;

/// Row-major `cells x 5` logit matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogitTable {
    rows: Vec<[f64; 5]>,
}

impl LogitTable {
    pub fn zeros(n_cells: usize) -> LogitTable {
        LogitTable { rows: vec![[0.0; 5]; n_cells] }
    }

    pub fn from_rows(rows: Vec<[f64; 5]>) -> LogitTable {
        LogitTable { rows }
    }

    pub fn n_cells(&self) -> usize {
        self.rows.len()
    }

    /// Number of scalar parameters.
    pub fn len(&self) -> usize {
        self.rows.len() * 5
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    #[inline]
    pub fn row(&self, cell: usize) -> &[f64; 5] {
        &self.rows[cell]
    }

    #[inline]
    pub fn row_mut(&mut self, cell: usize) -> &mut [f64; 5] {
        &mut self.rows[cell]
    }

    pub fn as_slice(&self) -> &[f64] {
        self.rows.as_flattened()
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        self.rows.as_flattened_mut()
    }

    pub fn is_finite(&self) -> bool {
        self.as_slice().iter().all(|x| x.is_finite())
    }

    pub fn probs(&self, cell: usize, mask: ActionMask) -> [f64; 5] {
        masked_softmax(self.row(cell), mask).expect("cells have legal actions")
    }
}

/// Entropy of the masked policy.
pub fn entropy(probs: &[f64; 5]) -> f64 {
    -probs.iter().filter(|&&p| p > 0.0).map(|p| p * p.ln()).sum::<f64>()
}

/// d log pi(a|s) / d theta_s: onehot(a) - pi on legal slots, zero elsewhere.
pub fn log_prob_grad(probs: &[f64; 5], mask: ActionMask, action: Action) -> [f64; 5] {
    let mut g = [0.0; 5];
    for a in mask.iter() {
        let i = a.index();
        g[i] = f64::from(u8::from(a == action)) - probs[i];
    }
    g
}

/// dH / d theta_s = -pi_j (log pi_j + H) on legal slots.
pub fn entropy_grad(probs: &[f64; 5], mask: ActionMask) -> [f64; 5] {
    let h = entropy(probs);
    let mut g = [0.0; 5];
    for a in mask.iter() {
        let i = a.index();
        g[i] = -probs[i] * (probs[i].ln() + h);
    }
    g
}

/// Gradient of `log pi(a|s) + entropy_coef * H(pi(.|s))` w.r.t. the row.
pub fn policy_objective_grad(logits: &[f64; 5], mask: ActionMask, action: Action, entropy_coef: f64) -> [f64; 5] {
    let p = masked_softmax(logits, mask).expect("non-empty mask");
    let lp = log_prob_grad(&p, mask, action);
    let eg = entropy_grad(&p, mask);
    std::array::from_fn(|i| lp[i] + entropy_coef * eg[i])
}
