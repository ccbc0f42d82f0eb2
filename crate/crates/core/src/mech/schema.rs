//! On-disk form of a mechanism library: environments, game-file
//! references, per-environment payoff overrides, and targets.

use super::{MechError, MechanismLibrary, PayoffDressing};
use crate::games::Game;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MechEntry {
    pub id: String,
    /// Reference resolved by the caller-supplied loader (typically a
    /// path relative to the library file).
    pub game_file: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MechDef {
    pub environments: Vec<String>,
    pub mechanisms: Vec<MechEntry>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub env_payoffs: BTreeMap<String, BTreeMap<String, PayoffDressing>>,
    pub targets: BTreeMap<String, String>,
}

impl MechDef {
    /// Resolve game references through `load` and validate the
    /// resulting library.
    pub fn build<F>(&self, mut load: F) -> Result<MechanismLibrary, MechError>
    where
        F: FnMut(&str) -> Result<Game, String>,
    {
        let mut mechanisms = Vec::with_capacity(self.mechanisms.len());
        for entry in &self.mechanisms {
            let game = load(&entry.game_file).map_err(|detail| MechError::GameLoad {
                file: entry.game_file.clone(),
                detail,
            })?;
            mechanisms.push((entry.id.clone(), game));
        }
        let lib = MechanismLibrary {
            environments: self.environments.clone(),
            mechanisms,
            env_payoffs: self.env_payoffs.clone(),
            targets: self.targets.clone(),
        };
        lib.validate()?;
        Ok(lib)
    }
}
