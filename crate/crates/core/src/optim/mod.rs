//! Model-free trainers over a shared tabular logit parameterization.

mod adam;
mod cem;
mod curve;
mod logits;
mod pg;
mod spsa;

pub use adam::{adam_step, AdamState};
pub use cem::{cem_train, select_elites, CemConfig, CemState, GenerationStats};
pub use curve::{CurvePoint, CurveRecorder, TrainCurve};
pub use logits::{entropy, entropy_grad, log_prob_grad, policy_objective_grad, LogitTable};
pub use pg::{pg_train, BaselineTable, PgConfig};
pub use spsa::{spsa_train, SpsaConfig};

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Receives logit snapshots during training.
pub trait TrainObserver {
    /// Called every `checkpoint_every` consumed hands, when configured.
    fn checkpoint(&mut self, _hands: u64, _theta: &LogitTable) -> Result<()> {
        Ok(())
    }
}

/// Observer that ignores checkpoints.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoCheckpoints;

impl TrainObserver for NoCheckpoints {}

impl<F: FnMut(u64, &LogitTable) -> Result<()>> TrainObserver for F {
    fn checkpoint(&mut self, hands: u64, theta: &LogitTable) -> Result<()> {
        self(hands, theta)
    }
}

/// Result of one training run.
#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub theta: LogitTable,
    pub curve: TrainCurve,
    /// Simulated hands consumed, including every evaluation rollout.
    pub hands: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Pg,
    Spsa,
    Cem,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Pg, Method::Spsa, Method::Cem];

    pub fn name(self) -> &'static str {
        match self {
            Method::Pg => "pg",
            Method::Spsa => "spsa",
            Method::Cem => "cem",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Method::Pg => "PG (REINFORCE)",
            Method::Spsa => "SPSA",
            Method::Cem => "CEM",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Method> {
        match s.to_ascii_lowercase().as_str() {
            "pg" | "reinforce" => Ok(Method::Pg),
            "spsa" => Ok(Method::Spsa),
            "cem" => Ok(Method::Cem),
            _ => Err(crate::Error::InvalidArgument(format!("unknown method {s:?}; expected pg, spsa or cem"))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}
