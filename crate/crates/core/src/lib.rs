//! Exact infinite-shoe blackjack oracle, Monte Carlo simulator, and three
//! model-free policy optimizers scored against the oracle.

pub mod betting;
pub mod cards;
pub mod cells;
pub mod dealer;
pub mod error;
pub mod export;
pub mod hand;
pub mod heatmap;
pub mod metrics;
pub mod optim;
pub mod oracle;
pub mod rng;
pub mod rules;
pub mod sim;

pub use cells::{Action, ActionMask, CellSpace, DecisionCell};
pub use error::{Error, Result};
pub use oracle::{solve, OracleSolution};
pub use rules::{Rules, Variant};
