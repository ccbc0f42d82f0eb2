//! On-disk form of a polynomial: `{ "id", "positions": {pos: [dir, ...]} }`.

use super::{Poly, PolyError};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Input description of a [`Poly`]. Positions are keyed by id with
/// their direction lists; map order (sorted) becomes position order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyDef {
    pub id: String,
    pub positions: BTreeMap<String, Vec<String>>,
}

impl PolyDef {
    pub fn build(&self) -> Result<Poly, PolyError> {
        let positions: Vec<String> = self.positions.keys().cloned().collect();
        Poly::new(self.id.clone(), positions, self.positions.clone())
    }

    pub fn from_poly(p: &Poly) -> PolyDef {
        PolyDef {
            id: p.id.clone(),
            positions: p.directions.clone(),
        }
    }
}
