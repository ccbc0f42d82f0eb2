//! Serde schemas for the input files the CLI defines itself.
//!
//! Single-object files (a game, a polynomial, a Principal–Agent
//! instance, a mechanism library) reuse the library's own schema
//! types directly; the types here wrap or combine them for the verbs
//! that need more than one object per file.

use catecon::poly::schema::PolyDef;
use catecon::poly::OutputTriple;
use catecon::problems::schema::ProblemDef;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// A problem file: the problem definition plus optional expectations.
/// When expectations are present the verb verifies the solve against
/// them (points at `--tol-point`, value at `--tol-value`) instead of
/// just printing it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemFile {
    #[serde(flatten)]
    pub problem: ProblemDef,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_points: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_value: Option<f64>,
}

/// A gluing family: the enclosing problem, the member problems, and
/// optionally a named universe of candidate points.  Without an
/// explicit universe the union of the members' solution points is
/// used, with generated names.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyDef {
    pub global: ProblemDef,
    pub members: Vec<ProblemDef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub universe: Option<BTreeMap<String, Vec<f64>>>,
}

/// One row of a coalgebra's update map: the observed output and the
/// state it leads to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuEntry {
    pub output: OutputTriple,
    pub next: String,
}

/// A coalgebra file: the two polynomials whose internal hom hosts the
/// machine, the state set, the readout map `rho`, the update map
/// `mu`, and the start state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoalgDef {
    pub p: PolyDef,
    pub q: PolyDef,
    pub states: Vec<String>,
    pub rho: BTreeMap<String, OutputTriple>,
    pub mu: Vec<MuEntry>,
    pub start: String,
}
