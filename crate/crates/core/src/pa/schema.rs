//! On-disk form of a Principal–Agent problem: grids, the two utility
//! expressions, and the reservation level.

use super::{PAError, PAProblem};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PADef {
    pub x_grid: Vec<f64>,
    pub y_grid: Vec<f64>,
    pub agent_utility: String,
    pub principal_utility: String,
    pub reservation: f64,
    /// Optional override of the generated Agent-utility grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u_a_grid: Option<Vec<f64>>,
}

impl PADef {
    pub fn build(&self) -> Result<PAProblem, PAError> {
        let pa = PAProblem::new(
            self.x_grid.clone(),
            self.y_grid.clone(),
            &self.agent_utility,
            &self.principal_utility,
            self.reservation,
        )?;
        match &self.u_a_grid {
            Some(grid) => pa.with_u_a_grid(grid.clone()),
            None => Ok(pa),
        }
    }
}
