//! Serialized form of a problem, as read from CLI fixture files.
//!
//! ```json
//! {
//!   "id": "s1",
//!   "ambient_dim": 3,
//!   "subspace": { "normals": [[0, 0, 1]] },
//!   "feasible": {
//!     "params": [{ "name": "t", "min": 0.0, "max": 6.283185307179586 }],
//!     "map": ["cos(t)", "sin(t)", "0"],
//!     "resolution": 720
//!   },
//!   "utility": "3-2*x^2-y^2"
//! }
//! ```
//!
//! The subspace is given either by spanning vectors or by normal
//! vectors; an empty `normals` list means the full ambient space.

use super::{LocalProblem, ProblemError};
use crate::euclid::{Subspace, Vector};
use crate::expr::Expr;
use crate::optimize::{FeasibleSet, Param, DEFAULT_RESOLUTION};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SubspaceDef {
    Spanning { spanning: Vec<Vec<f64>> },
    Normals { normals: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParamDef {
    pub name: String,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeasibleDef {
    pub params: Vec<ParamDef>,
    pub map: Vec<String>,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
}

fn default_resolution() -> usize {
    DEFAULT_RESOLUTION
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemDef {
    pub id: String,
    pub ambient_dim: usize,
    pub subspace: SubspaceDef,
    pub feasible: FeasibleDef,
    pub utility: String,
}

impl ProblemDef {
    pub fn build(&self) -> Result<LocalProblem, ProblemError> {
        let to_vectors = |rows: &[Vec<f64>]| -> Result<Vec<Vector>, ProblemError> {
            rows.iter()
                .map(|r| Vector::new(r.clone()).map_err(ProblemError::from))
                .collect()
        };
        let subspace = match &self.subspace {
            SubspaceDef::Spanning { spanning } => {
                Subspace::from_spanning(&to_vectors(spanning)?)?
            }
            SubspaceDef::Normals { normals } => {
                Subspace::from_normals(self.ambient_dim, &to_vectors(normals)?)?
            }
        };
        let params = self
            .feasible
            .params
            .iter()
            .map(|p| Param::new(&p.name, p.min, p.max).map_err(ProblemError::from))
            .collect::<Result<Vec<_>, _>>()?;
        let maps = self
            .feasible
            .map
            .iter()
            .map(|src| Expr::parse(src).map_err(ProblemError::from))
            .collect::<Result<Vec<_>, _>>()?;
        let feasible = FeasibleSet::new(self.ambient_dim, params, maps, self.feasible.resolution)?;
        let utility = Expr::parse(&self.utility)?;
        LocalProblem::new(&self.id, subspace, feasible, utility)
    }

    /// Serialize a problem back out (subspace rendered as spanning
    /// vectors of its orthonormal basis).
    pub fn from_problem(p: &LocalProblem) -> ProblemDef {
        ProblemDef {
            id: p.id().to_string(),
            ambient_dim: p.subspace().ambient_dim(),
            subspace: SubspaceDef::Spanning {
                spanning: p
                    .subspace()
                    .basis()
                    .iter()
                    .map(|b| b.as_slice().to_vec())
                    .collect(),
            },
            feasible: FeasibleDef {
                params: p
                    .feasible()
                    .params()
                    .iter()
                    .map(|q| ParamDef {
                        name: q.name.clone(),
                        min: q.lo,
                        max: q.hi,
                    })
                    .collect(),
                map: p.feasible().coord_maps().iter().map(|m| m.to_string()).collect(),
                resolution: p.feasible().resolution(),
            },
            utility: p.utility().to_string(),
        }
    }
}
