//! Serialized form of a canonical game, as read from CLI fixtures.
//!
//! ```json
//! {
//!   "id": "BoS",
//!   "players": ["1", "2"],
//!   "strategies": { "1": ["Bx", "Bll"], "2": ["Bx", "Bll"] },
//!   "payoffs": {
//!     "1": { "Bx|Bx": 2.0, "Bx|Bll": 0.0, "Bll|Bx": 0.0, "Bll|Bll": 1.0 },
//!     "2": { "Bx|Bx": 1.0, "Bx|Bll": 0.0, "Bll|Bx": 0.0, "Bll|Bll": 2.0 }
//!   }
//! }
//! ```
//!
//! Outcomes and `rho` are generated canonically: outcome ids are the
//! profile keys (strategy labels joined `|` in player order).

use super::{Game, GameError};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GameDef {
    pub id: String,
    pub players: Vec<String>,
    pub strategies: BTreeMap<String, Vec<String>>,
    pub payoffs: BTreeMap<String, BTreeMap<String, f64>>,
}

impl GameDef {
    pub fn build(&self) -> Result<Game, GameError> {
        Game::from_parts(
            &self.id,
            self.players.clone(),
            self.strategies.clone(),
            self.payoffs.clone(),
        )
    }
}
