//! Finite polynomial functors: positions carrying finite direction
//! sets, morphisms with a forward position map and per-position
//! backward direction maps, tensor, a size-bounded internal hom, and
//! coalgebras over a hom.
//!
//! A [`Poly`] packages a family of problems (positions) with their
//! candidate solutions (directions). [`embed_problem`] and
//! [`embed_game`] translate solved optimization problems and games
//! into this interface language: one position, directions given by
//! the solution set or the equilibrium set. [`Coalgebra`] is the
//! dynamic layer — a state machine that emits a (morphism, position,
//! direction) triple and moves on.
//!
//! Everything here is finite and deterministically ordered: positions
//! and directions are kept in explicit vectors, morphism enumeration
//! is an odometer over those vectors, and repeated runs produce
//! identical results.

use crate::equilibria::{dominant_equilibria, pure_nash, Concept};
use crate::games::Game;
use crate::problems::LocalProblem;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

pub mod schema;

/// Materialization budget for [`internal_hom`]: morphism count times
/// direction entries per morphism must stay at or below this.
pub const HOM_SIZE_BOUND: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PolyError {
    #[error("duplicate position `{0}`")]
    DuplicatePosition(String),
    #[error("directions listed for unknown position `{0}`")]
    UnknownPosition(String),
    #[error("duplicate direction `{direction}` at position `{position}`")]
    DuplicateDirection { position: String, direction: String },
    #[error("morphism `{morphism}` expects source `{expected}`, got `{found}`")]
    SourceMismatch {
        morphism: String,
        expected: String,
        found: String,
    },
    #[error("morphism `{morphism}` expects target `{expected}`, got `{found}`")]
    TargetMismatch {
        morphism: String,
        expected: String,
        found: String,
    },
    #[error("morphism `{morphism}` has no forward image for position `{position}`")]
    ForwardNotTotal { morphism: String, position: String },
    #[error("morphism `{morphism}` sends `{position}` to unknown position `{image}`")]
    InvalidForward {
        morphism: String,
        position: String,
        image: String,
    },
    #[error("morphism `{morphism}` has no backward map at position `{position}`")]
    MissingBackward { morphism: String, position: String },
    #[error(
        "morphism `{morphism}`: backward map at `{position}` does not cover \
         exactly the target directions at its image"
    )]
    BackwardDomainMismatch { morphism: String, position: String },
    #[error(
        "morphism `{morphism}`: backward map at `{position}` returns unknown \
         direction `{direction}`"
    )]
    InvalidBackwardValue {
        morphism: String,
        position: String,
        direction: String,
    },
    #[error("cannot compose: left target `{left}` differs from right source `{right}`")]
    ComposeMismatch { left: String, right: String },
    #[error(
        "internal hom refused: {morphisms} morphisms with up to {directions} \
         direction entries each exceeds the {HOM_SIZE_BOUND} budget"
    )]
    HomTooLarge { morphisms: u128, directions: u128 },
    #[error("duplicate state `{0}`")]
    DuplicateState(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("rho is not defined on state `{0}`")]
    RhoNotTotal(String),
    #[error("state `{state}` emits stale morphism `{morphism}` not present in the hom")]
    StaleMorphism { state: String, morphism: String },
    #[error(
        "state `{state}` emits `{position}:{direction}`, which morphism \
         `{morphism}` does not offer"
    )]
    StaleDirection {
        state: String,
        morphism: String,
        position: String,
        direction: String,
    },
    #[error("mu is not defined on emitted output {0:?}")]
    MuNotTotal(OutputTriple),
    #[error("mu sends {0:?} to unknown state `{1}`")]
    MuTargetUnknown(OutputTriple, String),
    #[error("problem `{0}` has no attached solution")]
    Unsolved(String),
}

/// A finite polynomial: ordered position ids, each with an ordered
/// list of direction ids and optional JSON payloads per direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Poly {
    pub id: String,
    pub positions: Vec<String>,
    pub directions: BTreeMap<String, Vec<String>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub payloads: BTreeMap<String, BTreeMap<String, serde_json::Value>>,
}

impl Poly {
    /// Build a polynomial, filling empty direction lists for any
    /// position not mentioned. Direction entries for unknown
    /// positions and duplicate ids are rejected.
    pub fn new(
        id: impl Into<String>,
        positions: Vec<String>,
        directions: BTreeMap<String, Vec<String>>,
    ) -> Result<Poly, PolyError> {
        let mut seen = BTreeSet::new();
        for p in &positions {
            if !seen.insert(p.clone()) {
                return Err(PolyError::DuplicatePosition(p.clone()));
            }
        }
        for key in directions.keys() {
            if !seen.contains(key) {
                return Err(PolyError::UnknownPosition(key.clone()));
            }
        }
        let mut full = directions;
        for p in &positions {
            let dirs = full.entry(p.clone()).or_default();
            let mut dseen = BTreeSet::new();
            for d in dirs.iter() {
                if !dseen.insert(d.clone()) {
                    return Err(PolyError::DuplicateDirection {
                        position: p.clone(),
                        direction: d.clone(),
                    });
                }
            }
        }
        Ok(Poly {
            id: id.into(),
            positions,
            directions: full,
            payloads: BTreeMap::new(),
        })
    }

    /// The monoidal unit: one position, one direction.
    pub fn unit() -> Poly {
        Poly::new(
            "y",
            vec!["*".to_string()],
            [("*".to_string(), vec!["*".to_string()])].into(),
        )
        .expect("unit poly is well formed")
    }

    /// A constant polynomial: the given positions, no directions.
    pub fn constant(id: impl Into<String>, positions: Vec<String>) -> Result<Poly, PolyError> {
        Poly::new(id, positions, BTreeMap::new())
    }

    pub fn position_count(&self) -> usize {
        self.positions.len()
    }

    pub fn direction_count(&self, position: &str) -> Option<usize> {
        self.directions.get(position).map(|d| d.len())
    }

    pub fn total_directions(&self) -> usize {
        self.directions.values().map(|d| d.len()).sum()
    }

    pub fn payload(&self, position: &str, direction: &str) -> Option<&serde_json::Value> {
        self.payloads.get(position)?.get(direction)
    }
}

/// A morphism of polynomials: `fwd` sends source positions to target
/// positions, and for each source position `i`, `bwd[i]` sends every
/// direction of the target at `fwd(i)` back to a direction at `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyMorphism {
    pub id: String,
    pub source: String,
    pub target: String,
    pub fwd: BTreeMap<String, String>,
    pub bwd: BTreeMap<String, BTreeMap<String, String>>,
}

impl PolyMorphism {
    /// Equality of the underlying maps, ignoring the morphism id.
    pub fn eq_action(&self, other: &PolyMorphism) -> bool {
        self.source == other.source
            && self.target == other.target
            && self.fwd == other.fwd
            && self.bwd == other.bwd
    }
}

/// The identity morphism on `p`.
pub fn identity_morphism(p: &Poly) -> PolyMorphism {
    let fwd = p
        .positions
        .iter()
        .map(|i| (i.clone(), i.clone()))
        .collect();
    let bwd = p
        .positions
        .iter()
        .map(|i| {
            let map = p.directions[i]
                .iter()
                .map(|d| (d.clone(), d.clone()))
                .collect();
            (i.clone(), map)
        })
        .collect();
    PolyMorphism {
        id: format!("id_{}", p.id),
        source: p.id.clone(),
        target: p.id.clone(),
        fwd,
        bwd,
    }
}

/// Verify that `f` is a well-formed morphism from `p` to `q`: total
/// forward map into valid positions, and per position a backward map
/// covering exactly the target's directions at the image, landing in
/// the source's directions.
pub fn check_poly_morphism(f: &PolyMorphism, p: &Poly, q: &Poly) -> Result<(), PolyError> {
    if f.source != p.id {
        return Err(PolyError::SourceMismatch {
            morphism: f.id.clone(),
            expected: f.source.clone(),
            found: p.id.clone(),
        });
    }
    if f.target != q.id {
        return Err(PolyError::TargetMismatch {
            morphism: f.id.clone(),
            expected: f.target.clone(),
            found: q.id.clone(),
        });
    }
    for i in &p.positions {
        let image = f
            .fwd
            .get(i)
            .ok_or_else(|| PolyError::ForwardNotTotal {
                morphism: f.id.clone(),
                position: i.clone(),
            })?;
        if !q.directions.contains_key(image) {
            return Err(PolyError::InvalidForward {
                morphism: f.id.clone(),
                position: i.clone(),
                image: image.clone(),
            });
        }
        let back = f
            .bwd
            .get(i)
            .ok_or_else(|| PolyError::MissingBackward {
                morphism: f.id.clone(),
                position: i.clone(),
            })?;
        let expected: BTreeSet<&String> = q.directions[image].iter().collect();
        let got: BTreeSet<&String> = back.keys().collect();
        if expected != got {
            return Err(PolyError::BackwardDomainMismatch {
                morphism: f.id.clone(),
                position: i.clone(),
            });
        }
        for value in back.values() {
            if !p.directions[i].contains(value) {
                return Err(PolyError::InvalidBackwardValue {
                    morphism: f.id.clone(),
                    position: i.clone(),
                    direction: value.clone(),
                });
            }
        }
    }
    Ok(())
}

/// Compose `f: p → q` then `g: q → r` into `p → r`: forward maps
/// chain, and backward maps pull each `r`-direction through `g` and
/// then through `f`.
pub fn poly_compose(f: &PolyMorphism, g: &PolyMorphism) -> Result<PolyMorphism, PolyError> {
    if f.target != g.source {
        return Err(PolyError::ComposeMismatch {
            left: f.target.clone(),
            right: g.source.clone(),
        });
    }
    let mut fwd = BTreeMap::new();
    let mut bwd = BTreeMap::new();
    for (i, j) in &f.fwd {
        let k = g.fwd.get(j).ok_or_else(|| PolyError::ForwardNotTotal {
            morphism: g.id.clone(),
            position: j.clone(),
        })?;
        fwd.insert(i.clone(), k.clone());
        let g_back = g.bwd.get(j).ok_or_else(|| PolyError::MissingBackward {
            morphism: g.id.clone(),
            position: j.clone(),
        })?;
        let f_back = f.bwd.get(i).ok_or_else(|| PolyError::MissingBackward {
            morphism: f.id.clone(),
            position: i.clone(),
        })?;
        let mut composed = BTreeMap::new();
        for (dr, dq) in g_back {
            let dp = f_back
                .get(dq)
                .ok_or_else(|| PolyError::InvalidBackwardValue {
                    morphism: f.id.clone(),
                    position: i.clone(),
                    direction: dq.clone(),
                })?;
            composed.insert(dr.clone(), dp.clone());
        }
        bwd.insert(i.clone(), composed);
    }
    Ok(PolyMorphism {
        id: format!("{};{}", f.id, g.id),
        source: f.source.clone(),
        target: g.target.clone(),
        fwd,
        bwd,
    })
}

/// The tensor of two polynomials: positions pair up, directions pair
/// up per position.
pub fn poly_tensor(a: &Poly, b: &Poly) -> Poly {
    let mut positions = Vec::with_capacity(a.positions.len() * b.positions.len());
    let mut directions = BTreeMap::new();
    for i in &a.positions {
        for j in &b.positions {
            let pos = format!("({i},{j})");
            let mut dirs =
                Vec::with_capacity(a.directions[i].len() * b.directions[j].len());
            for da in &a.directions[i] {
                for db in &b.directions[j] {
                    dirs.push(format!("({da},{db})"));
                }
            }
            directions.insert(pos.clone(), dirs);
            positions.push(pos);
        }
    }
    Poly::new(format!("{}*{}", a.id, b.id), positions, directions)
        .expect("paired ids are unique")
}

/// Morphism count and a per-morphism direction bound for `[p, q]`,
/// computed arithmetically before any materialization. The count is
/// `Π_i Σ_j |p[i]|^|q[j]|` (forward choices are independent per
/// position).
fn hom_size(p: &Poly, q: &Poly) -> (u128, u128) {
    let cap = HOM_SIZE_BOUND + 1;
    let mut morphisms: u128 = 1;
    for i in &p.positions {
        let np = p.directions[i].len() as u128;
        let mut per_position: u128 = 0;
        for j in &q.positions {
            let nq = q.directions[j].len() as u32;
            // np^nq with saturation: 0^0 = 1 (the empty map).
            let choices = if nq == 0 {
                1
            } else {
                let mut acc: u128 = 1;
                for _ in 0..nq {
                    acc = acc.saturating_mul(np);
                    if acc > cap {
                        break;
                    }
                }
                acc
            };
            per_position = per_position.saturating_add(choices);
        }
        morphisms = morphisms.saturating_mul(per_position);
        if morphisms > cap {
            break;
        }
    }
    let max_dirs = (p.positions.len() as u128).saturating_mul(
        q.directions
            .values()
            .map(|d| d.len() as u128)
            .max()
            .unwrap_or(0),
    );
    (morphisms, max_dirs)
}

/// Enumerate every morphism `p → q` in a fixed deterministic order:
/// forward assignments iterate positions of `q` per source position
/// (last source position varies fastest), then backward maps iterate
/// source directions per covered target direction. Ids are `m0`,
/// `m1`, … in that order. Refuses when the hom would exceed
/// [`HOM_SIZE_BOUND`].
pub fn enumerate_morphisms(p: &Poly, q: &Poly) -> Result<Vec<PolyMorphism>, PolyError> {
    let (count, max_dirs) = hom_size(p, q);
    if count.saturating_mul(max_dirs.max(1)) > HOM_SIZE_BOUND {
        return Err(PolyError::HomTooLarge {
            morphisms: count,
            directions: max_dirs,
        });
    }
    let np = p.positions.len();
    let mut out = Vec::new();
    if np > 0 && q.positions.is_empty() {
        return Ok(out);
    }

    let mut fwd_idx = vec![0usize; np];
    'fwd: loop {
        let fwd: BTreeMap<String, String> = p
            .positions
            .iter()
            .zip(&fwd_idx)
            .map(|(i, &j)| (i.clone(), q.positions[j].clone()))
            .collect();

        // Backward odometer cells: one per (source position, target
        // direction at its image); each ranges over the source's
        // directions there.
        let mut cells: Vec<(usize, String, String)> = Vec::new();
        let mut feasible = true;
        for (idx, i) in p.positions.iter().enumerate() {
            let image = &q.positions[fwd_idx[idx]];
            let q_dirs = &q.directions[image];
            if p.directions[i].is_empty() && !q_dirs.is_empty() {
                feasible = false;
                break;
            }
            for d in q_dirs {
                cells.push((idx, i.clone(), d.clone()));
            }
        }
        if feasible {
            let mut bwd_idx = vec![0usize; cells.len()];
            loop {
                let mut bwd: BTreeMap<String, BTreeMap<String, String>> = p
                    .positions
                    .iter()
                    .map(|i| (i.clone(), BTreeMap::new()))
                    .collect();
                for (cell, &choice) in cells.iter().zip(&bwd_idx) {
                    let (idx, ref i, ref d) = *cell;
                    let value = p.directions[&p.positions[idx]][choice].clone();
                    bwd.get_mut(i).unwrap().insert(d.clone(), value);
                }
                out.push(PolyMorphism {
                    id: format!("m{}", out.len()),
                    source: p.id.clone(),
                    target: q.id.clone(),
                    fwd: fwd.clone(),
                    bwd,
                });
                // Advance the backward odometer (last cell fastest).
                let mut pos = cells.len();
                loop {
                    if pos == 0 {
                        break;
                    }
                    pos -= 1;
                    let radix = p.directions[&p.positions[cells[pos].0]].len();
                    bwd_idx[pos] += 1;
                    if bwd_idx[pos] < radix {
                        break;
                    }
                    bwd_idx[pos] = 0;
                    if pos == 0 {
                        pos = usize::MAX;
                        break;
                    }
                }
                if cells.is_empty() || pos == usize::MAX {
                    break;
                }
            }
        }

        // Advance the forward odometer (last source position fastest).
        if np == 0 {
            break;
        }
        let mut pos = np;
        loop {
            if pos == 0 {
                break 'fwd;
            }
            pos -= 1;
            fwd_idx[pos] += 1;
            if fwd_idx[pos] < q.positions.len() {
                break;
            }
            fwd_idx[pos] = 0;
            if pos == 0 {
                break 'fwd;
            }
        }
    }
    Ok(out)
}

/// The internal hom `[p, q]`: one position per morphism `p → q`, with
/// directions the target's directions at each image position, tagged
/// by the source position that sees them (`i:d`).
pub fn internal_hom(p: &Poly, q: &Poly) -> Result<Poly, PolyError> {
    Ok(internal_hom_with(p, q)?.0)
}

/// [`internal_hom`] together with the morphism table backing its
/// positions (same order, same ids).
pub fn internal_hom_with(p: &Poly, q: &Poly) -> Result<(Poly, Vec<PolyMorphism>), PolyError> {
    let morphisms = enumerate_morphisms(p, q)?;
    let mut positions = Vec::with_capacity(morphisms.len());
    let mut directions = BTreeMap::new();
    for m in &morphisms {
        let mut dirs = Vec::new();
        for i in &p.positions {
            for d in &q.directions[&m.fwd[i]] {
                dirs.push(format!("{i}:{d}"));
            }
        }
        directions.insert(m.id.clone(), dirs);
        positions.push(m.id.clone());
    }
    let hom = Poly::new(format!("[{},{}]", p.id, q.id), positions, directions)?;
    Ok((hom, morphisms))
}

/// What a coalgebra emits in one step: the morphism it currently
/// realizes, the source position being answered, and the chosen
/// direction at the image position.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OutputTriple {
    pub morphism: String,
    pub position: String,
    pub direction: String,
}

impl std::fmt::Display for OutputTriple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}@{}:{}", self.morphism, self.position, self.direction)
    }
}

/// A state machine over an internal hom: `rho` reads off the current
/// pattern, `mu` updates the state in response to it.
#[derive(Debug, Clone, PartialEq)]
pub struct Coalgebra {
    pub hom: Poly,
    pub states: Vec<String>,
    pub rho: BTreeMap<String, OutputTriple>,
    pub mu: BTreeMap<OutputTriple, String>,
}

impl Coalgebra {
    /// Validate totality and that every emitted triple references a
    /// live hom position (`rho` pointing at a morphism the hom does
    /// not contain is a construction-time error).
    pub fn new(
        hom: Poly,
        states: Vec<String>,
        rho: BTreeMap<String, OutputTriple>,
        mu: BTreeMap<OutputTriple, String>,
    ) -> Result<Coalgebra, PolyError> {
        let mut seen = BTreeSet::new();
        for s in &states {
            if !seen.insert(s.clone()) {
                return Err(PolyError::DuplicateState(s.clone()));
            }
        }
        for s in rho.keys() {
            if !seen.contains(s) {
                return Err(PolyError::UnknownState(s.clone()));
            }
        }
        for s in &states {
            let out = rho.get(s).ok_or_else(|| PolyError::RhoNotTotal(s.clone()))?;
            let dirs = hom
                .directions
                .get(&out.morphism)
                .ok_or_else(|| PolyError::StaleMorphism {
                    state: s.clone(),
                    morphism: out.morphism.clone(),
                })?;
            let tag = format!("{}:{}", out.position, out.direction);
            if !dirs.contains(&tag) {
                return Err(PolyError::StaleDirection {
                    state: s.clone(),
                    morphism: out.morphism.clone(),
                    position: out.position.clone(),
                    direction: out.direction.clone(),
                });
            }
            let next = mu
                .get(out)
                .ok_or_else(|| PolyError::MuNotTotal(out.clone()))?;
            if !seen.contains(next) {
                return Err(PolyError::MuTargetUnknown(out.clone(), next.clone()));
            }
        }
        Ok(Coalgebra {
            hom,
            states,
            rho,
            mu,
        })
    }
}

/// One coalgebra step: read the output at `s`, then update.
pub fn coalg_step(c: &Coalgebra, s: &str) -> Result<(OutputTriple, String), PolyError> {
    let out = c
        .rho
        .get(s)
        .ok_or_else(|| PolyError::UnknownState(s.to_string()))?;
    let next = c
        .mu
        .get(out)
        .ok_or_else(|| PolyError::MuNotTotal(out.clone()))?;
    Ok((out.clone(), next.clone()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceStep {
    pub step: usize,
    pub state: String,
    pub output: OutputTriple,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FirstRepeat {
    pub step: usize,
    pub state: String,
}

/// The record of a finite coalgebra run, with the first revisited
/// state annotated when the trajectory cycles.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trace {
    pub steps: Vec<TraceStep>,
    pub first_repeat: Option<FirstRepeat>,
}

/// Iterate [`coalg_step`] `n` times from `s0`, recording each
/// (state, output) pair; steps are numbered from 1 and the first
/// repeated state is flagged.
pub fn coalg_run(c: &Coalgebra, s0: &str, n: usize) -> Result<Trace, PolyError> {
    if !c.states.iter().any(|s| s == s0) {
        return Err(PolyError::UnknownState(s0.to_string()));
    }
    let mut state = s0.to_string();
    let mut visited = BTreeSet::new();
    let mut steps = Vec::with_capacity(n);
    let mut first_repeat = None;
    for step in 1..=n {
        if !visited.insert(state.clone()) && first_repeat.is_none() {
            first_repeat = Some(FirstRepeat {
                step,
                state: state.clone(),
            });
        }
        let (output, next) = coalg_step(c, &state)?;
        steps.push(TraceStep {
            step,
            state: state.clone(),
            output,
        });
        state = next;
    }
    Ok(Trace {
        steps,
        first_repeat,
    })
}

/// Interpret a solved problem as a one-position polynomial whose
/// directions are its solution points (coordinates kept as payloads).
pub fn embed_problem(p: &LocalProblem) -> Result<Poly, PolyError> {
    let solution = p
        .require_solution()
        .map_err(|_| PolyError::Unsolved(p.id().to_string()))?;
    let mut dirs = Vec::new();
    let mut payloads = BTreeMap::new();
    for (k, point) in solution.points.points().iter().enumerate() {
        let d = format!("x{k}");
        payloads.insert(d.clone(), serde_json::json!(point.as_slice()));
        dirs.push(d);
    }
    let mut poly = Poly::new(
        format!("p_{}", p.id()),
        vec![p.id().to_string()],
        [(p.id().to_string(), dirs)].into(),
    )?;
    poly.payloads.insert(p.id().to_string(), payloads);
    Ok(poly)
}

/// Interpret a game as a one-position polynomial whose directions are
/// its equilibrium profile keys under the given concept.
pub fn embed_game(g: &Game, concept: Concept) -> Poly {
    let set = match concept {
        Concept::PureNash => pure_nash(g),
        Concept::WeakDominance => dominant_equilibria(g),
    };
    let mut dirs = set.keys(g);
    dirs.sort();
    Poly::new(
        format!("p_{}", g.id),
        vec![g.id.clone()],
        [(g.id.clone(), dirs)].into(),
    )
    .expect("one position with distinct profile keys")
}

/// A seeded small polynomial: 1–3 positions, 0–3 directions each.
pub fn random_poly<R: rand::Rng>(rng: &mut R, id: &str) -> Poly {
    let n_pos = rng.gen_range(1..=3);
    let positions: Vec<String> = (0..n_pos).map(|k| format!("P{k}")).collect();
    let mut directions = BTreeMap::new();
    for p in &positions {
        let n_dir = rng.gen_range(0..=3);
        let dirs: Vec<String> = (0..n_dir).map(|k| format!("d{k}")).collect();
        directions.insert(p.clone(), dirs);
    }
    Poly::new(id, positions, directions).expect("generated ids are unique")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::classic;
    use crate::games::empty_game;
    use crate::problems::catalog;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_position_poly(id: &str, d0: usize, d1: usize) -> Poly {
        let dirs = |n: usize| (0..n).map(|k| format!("d{k}")).collect::<Vec<_>>();
        Poly::new(
            id,
            vec!["A".to_string(), "B".to_string()],
            [("A".to_string(), dirs(d0)), ("B".to_string(), dirs(d1))].into(),
        )
        .unwrap()
    }

    #[test]
    fn construction_fills_missing_directions_and_rejects_junk() {
        let p = Poly::new("p", vec!["A".to_string()], BTreeMap::new()).unwrap();
        assert_eq!(p.direction_count("A"), Some(0));
        let dup = Poly::new("p", vec!["A".to_string(), "A".to_string()], BTreeMap::new());
        assert_eq!(dup.unwrap_err(), PolyError::DuplicatePosition("A".into()));
        let junk = Poly::new(
            "p",
            vec!["A".to_string()],
            [("B".to_string(), vec![])].into(),
        );
        assert_eq!(junk.unwrap_err(), PolyError::UnknownPosition("B".into()));
        let dup_dir = Poly::new(
            "p",
            vec!["A".to_string()],
            [("A".to_string(), vec!["d".to_string(), "d".to_string()])].into(),
        );
        assert!(matches!(
            dup_dir.unwrap_err(),
            PolyError::DuplicateDirection { .. }
        ));
    }

    #[test]
    fn identity_checks_and_composes_as_a_unit() {
        let p = two_position_poly("p", 2, 1);
        let q = two_position_poly("q", 1, 2);
        let id_p = identity_morphism(&p);
        let id_q = identity_morphism(&q);
        check_poly_morphism(&id_p, &p, &p).unwrap();
        for f in enumerate_morphisms(&p, &q).unwrap() {
            check_poly_morphism(&f, &p, &q).unwrap();
            let left = poly_compose(&id_p, &f).unwrap();
            let right = poly_compose(&f, &id_q).unwrap();
            assert!(left.eq_action(&f));
            assert!(right.eq_action(&f));
        }
    }

    #[test]
    fn malformed_morphisms_are_rejected() {
        let p = two_position_poly("p", 1, 1);
        let q = two_position_poly("q", 2, 2);
        let mut f = enumerate_morphisms(&p, &q).unwrap().remove(0);
        check_poly_morphism(&f, &p, &q).unwrap();

        let mut missing_fwd = f.clone();
        missing_fwd.fwd.remove("B");
        assert!(matches!(
            check_poly_morphism(&missing_fwd, &p, &q).unwrap_err(),
            PolyError::ForwardNotTotal { .. }
        ));

        let mut bad_image = f.clone();
        bad_image.fwd.insert("A".to_string(), "Z".to_string());
        assert!(matches!(
            check_poly_morphism(&bad_image, &p, &q).unwrap_err(),
            PolyError::InvalidForward { .. }
        ));

        let mut short_domain = f.clone();
        let image = short_domain.fwd["A"].clone();
        let first_dir = q.directions[&image][0].clone();
        short_domain.bwd.get_mut("A").unwrap().remove(&first_dir);
        assert!(matches!(
            check_poly_morphism(&short_domain, &p, &q).unwrap_err(),
            PolyError::BackwardDomainMismatch { .. }
        ));

        let image = f.fwd["A"].clone();
        let first_dir = q.directions[&image][0].clone();
        f.bwd
            .get_mut("A")
            .unwrap()
            .insert(first_dir, "zzz".to_string());
        assert!(matches!(
            check_poly_morphism(&f, &p, &q).unwrap_err(),
            PolyError::InvalidBackwardValue { .. }
        ));
    }

    #[test]
    fn hand_built_composite_matches_entry_by_entry() {
        // p --f--> q --g--> r on 2-position polys; the composite's
        // backward maps must thread each r-direction through g then f.
        let p = two_position_poly("p", 2, 1);
        let q = two_position_poly("q", 2, 2);
        let r = two_position_poly("r", 1, 2);
        let f = PolyMorphism {
            id: "f".into(),
            source: "p".into(),
            target: "q".into(),
            fwd: [("A".into(), "B".into()), ("B".into(), "A".into())].into(),
            bwd: [
                (
                    "A".to_string(),
                    [("d0".into(), "d1".into()), ("d1".into(), "d0".into())].into(),
                ),
                (
                    "B".to_string(),
                    [("d0".into(), "d0".into()), ("d1".into(), "d0".into())].into(),
                ),
            ]
            .into(),
        };
        let g = PolyMorphism {
            id: "g".into(),
            source: "q".into(),
            target: "r".into(),
            fwd: [("A".into(), "B".into()), ("B".into(), "B".into())].into(),
            bwd: [
                (
                    "A".to_string(),
                    [("d0".into(), "d1".into()), ("d1".into(), "d0".into())].into(),
                ),
                (
                    "B".to_string(),
                    [("d0".into(), "d0".into()), ("d1".into(), "d1".into())].into(),
                ),
            ]
            .into(),
        };
        check_poly_morphism(&f, &p, &q).unwrap();
        check_poly_morphism(&g, &q, &r).unwrap();
        let h = poly_compose(&f, &g).unwrap();
        check_poly_morphism(&h, &p, &r).unwrap();
        // fwd: A →f B →g B; B →f A →g B.
        assert_eq!(h.fwd["A"], "B");
        assert_eq!(h.fwd["B"], "B");
        // bwd at A: r@B d0 →g q@B d0 →f p@A d1; d1 →g d1 →f d0.
        assert_eq!(h.bwd["A"]["d0"], "d1");
        assert_eq!(h.bwd["A"]["d1"], "d0");
        // bwd at B: r@B d0 →g q@A d1 →f p@B d0; d1 →g d0 →f d0.
        assert_eq!(h.bwd["B"]["d0"], "d0");
        assert_eq!(h.bwd["B"]["d1"], "d0");
    }

    #[test]
    fn composition_is_associative_on_small_polys() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let make = |rng: &mut ChaCha8Rng, id: &str| {
            // Keep direction counts at ≤2 so the full triple product
            // of hom sets stays exhaustive-checkable.
            let n_pos = rng.gen_range(1..=2);
            let positions: Vec<String> = (0..n_pos).map(|k| format!("P{k}")).collect();
            let mut directions = BTreeMap::new();
            for p in &positions {
                let n_dir = rng.gen_range(1..=2);
                directions.insert(
                    p.clone(),
                    (0..n_dir).map(|k| format!("d{k}")).collect::<Vec<String>>(),
                );
            }
            Poly::new(id, positions, directions).unwrap()
        };
        use rand::Rng;
        let p = make(&mut rng, "p");
        let q = make(&mut rng, "q");
        let r = make(&mut rng, "r");
        let t = make(&mut rng, "t");
        let fs = enumerate_morphisms(&p, &q).unwrap();
        let gs = enumerate_morphisms(&q, &r).unwrap();
        let hs = enumerate_morphisms(&r, &t).unwrap();
        assert!(!fs.is_empty() && !gs.is_empty() && !hs.is_empty());
        for f in &fs {
            for g in &gs {
                for h in &hs {
                    let left = poly_compose(&poly_compose(f, g).unwrap(), h).unwrap();
                    let right = poly_compose(f, &poly_compose(g, h).unwrap()).unwrap();
                    assert!(left.eq_action(&right));
                }
            }
        }
    }

    #[test]
    fn tensor_multiplies_positions_and_pairs_directions() {
        let a = Poly::new(
            "a",
            vec!["i0".into(), "i1".into()],
            [
                ("i0".to_string(), vec!["α".to_string(), "β".to_string()]),
                ("i1".to_string(), vec![]),
            ]
            .into(),
        )
        .unwrap();
        let b = Poly::new(
            "b",
            vec!["j0".into(), "j1".into(), "j2".into()],
            [("j0".to_string(), vec!["γ".to_string()])].into(),
        )
        .unwrap();
        let t = poly_tensor(&a, &b);
        assert_eq!(t.position_count(), 6);
        assert_eq!(
            t.directions["(i0,j0)"],
            vec!["(α,γ)".to_string(), "(β,γ)".to_string()]
        );
        assert_eq!(t.direction_count("(i1,j0)"), Some(0));
    }

    #[test]
    fn tensor_with_unit_is_an_isomorphic_copy() {
        let p = two_position_poly("p", 2, 3);
        let t = poly_tensor(&p, &Poly::unit());
        assert_eq!(t.position_count(), p.position_count());
        for (i, pos) in p.positions.iter().enumerate() {
            assert_eq!(
                t.direction_count(&t.positions[i]),
                p.direction_count(pos)
            );
        }
    }

    #[test]
    fn hom_of_single_direction_polys() {
        // p = y (one position, one direction), q = y² (one position,
        // two directions): every morphism has one forward choice and
        // a backward map into p's single direction, so the hom has
        // exactly one position carrying q's two directions.
        let p = Poly::new(
            "p",
            vec!["i".into()],
            [("i".to_string(), vec!["s".to_string()])].into(),
        )
        .unwrap();
        let q = Poly::new(
            "q",
            vec!["j".into()],
            [("j".to_string(), vec!["a".to_string(), "b".to_string()])].into(),
        )
        .unwrap();
        let hom = internal_hom(&p, &q).unwrap();
        assert_eq!(hom.position_count(), 1);
        assert_eq!(hom.directions["m0"], vec!["i:a".to_string(), "i:b".to_string()]);
        // [p, p] is the identity alone.
        let hompp = internal_hom(&p, &p).unwrap();
        assert_eq!(hompp.position_count(), 1);
        assert_eq!(hompp.directions["m0"], vec!["i:s".to_string()]);
    }

    #[test]
    fn hom_counts_match_a_brute_force_oracle() {
        // Oracle: try every candidate (fwd, bwd) built from raw index
        // tuples and count those that validate.
        fn oracle_count(p: &Poly, q: &Poly) -> usize {
            let mut count = 0usize;
            let np = p.positions.len();
            let nq = q.positions.len();
            if np == 0 {
                return 1;
            }
            if nq == 0 {
                return 0;
            }
            let mut fwd_choice = vec![0usize; np];
            loop {
                // All backward tables for this forward choice, by
                // recursion over positions.
                fn count_bwd(p: &Poly, q: &Poly, fwd_choice: &[usize], pos: usize) -> usize {
                    if pos == p.positions.len() {
                        return 1;
                    }
                    let i = &p.positions[pos];
                    let image = &q.positions[fwd_choice[pos]];
                    let nd_p = p.directions[i].len();
                    let nd_q = q.directions[image].len();
                    let here = if nd_q == 0 {
                        1
                    } else if nd_p == 0 {
                        0
                    } else {
                        nd_p.pow(nd_q as u32)
                    };
                    here * count_bwd(p, q, fwd_choice, pos + 1)
                }
                count += count_bwd(p, q, &fwd_choice, 0);
                let mut k = np;
                loop {
                    if k == 0 {
                        return count;
                    }
                    k -= 1;
                    fwd_choice[k] += 1;
                    if fwd_choice[k] < nq {
                        break;
                    }
                    fwd_choice[k] = 0;
                    if k == 0 {
                        return count;
                    }
                }
            }
        }

        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for trial in 0..25 {
            let p = random_poly(&mut rng, &format!("p{trial}"));
            let q = random_poly(&mut rng, &format!("q{trial}"));
            match internal_hom(&p, &q) {
                Ok(hom) => {
                    assert_eq!(
                        hom.position_count(),
                        oracle_count(&p, &q),
                        "trial {trial}"
                    );
                }
                Err(PolyError::HomTooLarge { .. }) => {}
                Err(e) => panic!("unexpected error in trial {trial}: {e}"),
            }
        }
    }

    #[test]
    fn oversized_hom_is_refused() {
        let dirs = |n: usize| (0..n).map(|k| format!("d{k}")).collect::<Vec<_>>();
        let p = Poly::new(
            "p",
            vec!["A".into(), "B".into(), "C".into()],
            [
                ("A".to_string(), dirs(9)),
                ("B".to_string(), dirs(9)),
                ("C".to_string(), dirs(9)),
            ]
            .into(),
        )
        .unwrap();
        let q = p.clone();
        assert!(matches!(
            internal_hom(&p, &q).unwrap_err(),
            PolyError::HomTooLarge { .. }
        ));
    }

    fn fixed_point_coalgebra() -> Coalgebra {
        let p = Poly::unit();
        let (hom, _) = internal_hom_with(&p, &p).unwrap();
        let out = OutputTriple {
            morphism: "m0".into(),
            position: "*".into(),
            direction: "*".into(),
        };
        Coalgebra::new(
            hom,
            vec!["s".to_string()],
            [("s".to_string(), out.clone())].into(),
            [(out, "s".to_string())].into(),
        )
        .unwrap()
    }

    #[test]
    fn fixed_point_run_flags_the_cycle_at_step_two() {
        let c = fixed_point_coalgebra();
        let trace = coalg_run(&c, "s", 5).unwrap();
        assert_eq!(trace.steps.len(), 5);
        assert!(trace.steps.iter().all(|t| t.state == "s"));
        assert_eq!(
            trace.first_repeat,
            Some(FirstRepeat {
                step: 2,
                state: "s".to_string()
            })
        );
    }

    #[test]
    fn flip_flop_alternates_with_period_two() {
        let p = Poly::new(
            "p",
            vec!["i".into()],
            [("i".to_string(), vec!["a".to_string(), "b".to_string()])].into(),
        )
        .unwrap();
        let (hom, morphisms) = internal_hom_with(&p, &p).unwrap();
        // Two endomorphisms fix position i; pick the identity-like one
        // and emit different directions from the two states.
        let m = morphisms[0].id.clone();
        let out_a = OutputTriple {
            morphism: m.clone(),
            position: "i".into(),
            direction: "a".into(),
        };
        let out_b = OutputTriple {
            morphism: m,
            position: "i".into(),
            direction: "b".into(),
        };
        let c = Coalgebra::new(
            hom,
            vec!["s0".to_string(), "s1".to_string()],
            [
                ("s0".to_string(), out_a.clone()),
                ("s1".to_string(), out_b.clone()),
            ]
            .into(),
            [(out_a, "s1".to_string()), (out_b, "s0".to_string())].into(),
        )
        .unwrap();
        let trace = coalg_run(&c, "s0", 4).unwrap();
        let states: Vec<&str> = trace.steps.iter().map(|t| t.state.as_str()).collect();
        assert_eq!(states, vec!["s0", "s1", "s0", "s1"]);
        assert_eq!(
            trace.first_repeat,
            Some(FirstRepeat {
                step: 3,
                state: "s0".to_string()
            })
        );
        assert_eq!(trace.steps[0].output.direction, "a");
        assert_eq!(trace.steps[1].output.direction, "b");
    }

    #[test]
    fn stale_references_fail_at_construction() {
        let c = fixed_point_coalgebra();
        let stale = OutputTriple {
            morphism: "m99".into(),
            position: "*".into(),
            direction: "*".into(),
        };
        let err = Coalgebra::new(
            c.hom.clone(),
            vec!["s".to_string()],
            [("s".to_string(), stale.clone())].into(),
            [(stale, "s".to_string())].into(),
        )
        .unwrap_err();
        assert!(matches!(err, PolyError::StaleMorphism { .. }));

        let bad_dir = OutputTriple {
            morphism: "m0".into(),
            position: "*".into(),
            direction: "nope".into(),
        };
        let err = Coalgebra::new(
            c.hom.clone(),
            vec!["s".to_string()],
            [("s".to_string(), bad_dir.clone())].into(),
            [(bad_dir, "s".to_string())].into(),
        )
        .unwrap_err();
        assert!(matches!(err, PolyError::StaleDirection { .. }));
    }

    #[test]
    fn runs_are_deterministic() {
        let c = fixed_point_coalgebra();
        assert_eq!(
            coalg_run(&c, "s", 7).unwrap(),
            coalg_run(&c, "s", 7).unwrap()
        );
        let err = coalg_run(&c, "missing", 1).unwrap_err();
        assert_eq!(err, PolyError::UnknownState("missing".into()));
    }

    #[test]
    fn embedded_circle_problem_has_two_solution_directions() {
        let solved = catalog::circle_problem().solve().unwrap();
        let poly = embed_problem(&solved).unwrap();
        assert_eq!(poly.positions, vec!["s1".to_string()]);
        assert_eq!(poly.direction_count("s1"), Some(2));
        // Payloads carry the coordinates (0, ±1, 0).
        for d in &poly.directions["s1"] {
            let coords: Vec<f64> =
                serde_json::from_value(poly.payload("s1", d).unwrap().clone()).unwrap();
            assert!(coords[0].abs() < 1e-3);
            assert!((coords[1].abs() - 1.0).abs() < 1e-3);
            assert!(coords[2].abs() < 1e-3);
        }
    }

    #[test]
    fn unsolved_problem_cannot_embed_and_unique_optimum_gives_one_direction() {
        let raw = catalog::circle_problem();
        assert_eq!(
            embed_problem(&raw).unwrap_err(),
            PolyError::Unsolved("s1".into())
        );
        let cube = catalog::box_problem().solve().unwrap();
        let poly = embed_problem(&cube).unwrap();
        assert_eq!(poly.direction_count("cube"), Some(1));
    }

    #[test]
    fn embedded_games_expose_equilibrium_profiles() {
        let bos = classic::battle_of_the_sexes();
        let poly = embed_game(&bos, Concept::PureNash);
        assert_eq!(
            poly.directions[&bos.id],
            vec!["Bll|Bll".to_string(), "Bx|Bx".to_string()]
        );
        let pd = classic::prisoners_dilemma();
        let poly = embed_game(&pd, Concept::PureNash);
        assert_eq!(poly.directions[&pd.id], vec!["D|D".to_string()]);
        let nothing = embed_game(&empty_game(), Concept::PureNash);
        assert_eq!(nothing.position_count(), 1);
        assert_eq!(nothing.direction_count("empty"), Some(0));
    }
}
