//! Local optimization problems and their section structure.
//!
//! A [`LocalProblem`] is a compact feasible set inside a linear
//! subspace together with a continuous utility; solving it means
//! finding every global maximizer. Problems are related by
//! *restriction morphisms* (sub-feasible-set, agreeing utility,
//! non-increasing dimension), and solution sets behave like sections
//! of a presheaf: they can be restricted ([`restrict_section`]),
//! checked for functoriality ([`presheaf_laws`]), tested for pairwise
//! compatibility across a cover ([`check_compatibility`]) and glued
//! back together ([`check_glue`]).
//!
//! Membership of an arbitrary ambient point in a problem's section is
//! decided operationally through the projection-then-nearest operator
//! [`gamma`]: the point belongs to the section when its gamma image
//! meets the solution set within [`tol::POINT_MATCH`].

use crate::euclid::{EuclidError, Subspace, Vector};
use crate::expr::{EvalError, Expr, ParseError, Program};
use crate::optimize::{
    coord_names, distance_to_set, grid_maximize, nearest_points, FeasibleSet, OptimizeError,
    PointSet,
};
use crate::tol;
use std::collections::{BTreeMap, BTreeSet};

pub mod catalog;
pub mod schema;

/// Sample budget when checking that a feasible set lies inside its
/// subspace.
const GEOMETRY_SAMPLES: usize = 512;

/// Sample budget for feasible-subset checks in morphisms.
const SUBSET_SAMPLES: usize = 600;

/// Sample budget for coverage checks.
const COVER_SAMPLES: usize = 384;

/// Random-sample count for utility-agreement checks.
const UTILITY_SAMPLES: usize = 1000;

/// Seed for the utility-agreement sampler (fixed: morphism checks are
/// deterministic).
const UTILITY_SEED: u64 = 0x5EC710;

/// Per-query evaluation budget when measuring distance to a feasible
/// set, split across that set's parameter axes.
fn coarse_res(n_params: usize) -> usize {
    match n_params {
        0 | 1 => 2048,
        2 => 64,
        _ => 16,
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProblemError {
    #[error(transparent)]
    Euclid(#[from] EuclidError),
    #[error(transparent)]
    Optimize(#[from] OptimizeError),
    #[error("utility parse error: {0}")]
    Parse(#[from] ParseError),
    #[error("problem `{id}`: feasible set has ambient dimension {feasible}, subspace has {subspace}")]
    AmbientMismatch {
        id: String,
        feasible: usize,
        subspace: usize,
    },
    #[error("problem `{id}`: utility uses unknown coordinate `{var}`")]
    UnknownUtilityVariable { id: String, var: String },
    #[error("problem `{id}`: feasible sample {witness} is {distance:.3e} from the subspace (limit {limit:.1e})")]
    FeasibleOutsideSubspace {
        id: String,
        witness: Vector,
        distance: f64,
        limit: f64,
    },
    #[error("problem `{0}` has not been solved yet")]
    Unsolved(String),
    #[error("universe point `{name}` has dimension {got}, expected {expected}")]
    UniverseDimension {
        name: String,
        got: usize,
        expected: usize,
    },
    #[error("duplicate universe point name `{0}`")]
    DuplicateUniversePoint(String),
    #[error(transparent)]
    Morphism(#[from] MorphismFailure),
}

/// The solved part of a problem: all global maximizers plus the value.
#[derive(Debug, Clone)]
pub struct Solution {
    pub points: PointSet,
    pub value: f64,
}

/// A compact feasible set in a linear subspace with a continuous
/// utility, optionally solved.
#[derive(Debug, Clone)]
pub struct LocalProblem {
    id: String,
    subspace: Subspace,
    feasible: FeasibleSet,
    utility: Expr,
    solution: Option<Solution>,
}

impl LocalProblem {
    /// Build and validate a problem. Checks dimensional coherence,
    /// that the utility only uses ambient coordinate names, and that a
    /// sample of the feasible set lies in the subspace within
    /// [`tol::SUBSPACE_CONTAIN`].
    pub fn new(
        id: &str,
        subspace: Subspace,
        feasible: FeasibleSet,
        utility: Expr,
    ) -> Result<LocalProblem, ProblemError> {
        if subspace.ambient_dim() != feasible.ambient_dim() {
            return Err(ProblemError::AmbientMismatch {
                id: id.to_string(),
                feasible: feasible.ambient_dim(),
                subspace: subspace.ambient_dim(),
            });
        }
        let names = coord_names(subspace.ambient_dim());
        for var in utility.variables() {
            if !names.contains(&var) {
                return Err(ProblemError::UnknownUtilityVariable {
                    id: id.to_string(),
                    var,
                });
            }
        }
        let problem = LocalProblem {
            id: id.to_string(),
            subspace,
            feasible,
            utility,
            solution: None,
        };
        problem.check_geometry()?;
        Ok(problem)
    }

    fn check_geometry(&self) -> Result<(), ProblemError> {
        for sample in self.feasible.sample_grid(GEOMETRY_SAMPLES)? {
            let d = self.subspace.distance(&sample)?;
            if d > tol::SUBSPACE_CONTAIN {
                return Err(ProblemError::FeasibleOutsideSubspace {
                    id: self.id.clone(),
                    witness: sample,
                    distance: d,
                    limit: tol::SUBSPACE_CONTAIN,
                });
            }
        }
        Ok(())
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn subspace(&self) -> &Subspace {
        &self.subspace
    }

    pub fn feasible(&self) -> &FeasibleSet {
        &self.feasible
    }

    pub fn utility(&self) -> &Expr {
        &self.utility
    }

    pub fn solution(&self) -> Option<&Solution> {
        self.solution.as_ref()
    }

    pub fn require_solution(&self) -> Result<&Solution, ProblemError> {
        self.solution
            .as_ref()
            .ok_or_else(|| ProblemError::Unsolved(self.id.clone()))
    }

    /// Maximize the utility over the feasible set and return the
    /// problem with its solution set attached.
    pub fn solve(&self) -> Result<LocalProblem, ProblemError> {
        let (points, value) = grid_maximize(&self.utility, &self.feasible)?;
        let mut solved = self.clone();
        solved.solution = Some(Solution { points, value });
        Ok(solved)
    }

    /// Attach an externally computed solution (used when gluing
    /// materializes restricted problems).
    pub fn with_solution(mut self, solution: Solution) -> LocalProblem {
        self.solution = Some(solution);
        self
    }

    /// Evaluate the utility at an ambient point.
    pub fn utility_at(&self, x: &Vector) -> Result<f64, ProblemError> {
        let program = self.utility_program()?;
        program
            .run(x.as_slice())
            .map_err(|source| self.eval_error(x, source))
    }

    fn utility_program(&self) -> Result<Program, ProblemError> {
        let names = coord_names(self.subspace.ambient_dim());
        Ok(self
            .utility
            .compile(&names)
            .map_err(OptimizeError::Compile)?)
    }

    fn eval_error(&self, x: &Vector, source: EvalError) -> ProblemError {
        ProblemError::Optimize(OptimizeError::Eval {
            params: x.as_slice().to_vec(),
            source,
        })
    }
}

/// Which morphism requirement failed, with a witness where one exists.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("morphism {source_id} -> {target_id} fails the {check} check{}", witness.as_ref().map(|w| format!(" (witness: {w})")).unwrap_or_default())]
pub struct MorphismFailure {
    pub source_id: String,
    pub target_id: String,
    pub check: &'static str,
    pub witness: Option<Vector>,
}

/// A verified restriction morphism between problems.
#[derive(Debug, Clone)]
pub struct ProblemMorphism {
    pub source: String,
    pub target: String,
    pub source_dim: usize,
    pub target_dim: usize,
}

/// Verify the three restriction-morphism requirements from `k` into
/// `j`: the feasible set of `k` is contained in that of `j` (sampled,
/// at [`tol::FEASIBLE_SUBSET`]), the utilities agree on `k`'s feasible
/// set (1000 seeded samples, at [`tol::UTILITY_AGREE`]), and the
/// subspace dimension does not increase.
pub fn check_morphism(
    k: &LocalProblem,
    j: &LocalProblem,
) -> Result<ProblemMorphism, MorphismFailure> {
    let fail = |check: &'static str, witness: Option<Vector>| MorphismFailure {
        source_id: k.id.clone(),
        target_id: j.id.clone(),
        check,
        witness,
    };

    if k.subspace.ambient_dim() != j.subspace.ambient_dim() {
        return Err(fail("ambient dimension", None));
    }
    if k.subspace.dim() > j.subspace.dim() {
        return Err(fail("dimension", None));
    }

    let coarse = coarse_res(j.feasible.params().len());
    let samples = k
        .feasible
        .sample_grid(SUBSET_SAMPLES)
        .map_err(|_| fail("feasible containment", None))?;
    for s in &samples {
        let d = distance_to_set(&j.feasible, s, coarse)
            .map_err(|_| fail("feasible containment", Some(s.clone())))?;
        if d > tol::FEASIBLE_SUBSET {
            return Err(fail("feasible containment", Some(s.clone())));
        }
    }

    let uk = k.utility_program().map_err(|_| fail("utility", None))?;
    let uj = j.utility_program().map_err(|_| fail("utility", None))?;
    let random = k
        .feasible
        .sample_random(UTILITY_SAMPLES, UTILITY_SEED)
        .map_err(|_| fail("utility agreement", None))?;
    for s in &random {
        let a = uk
            .run(s.as_slice())
            .map_err(|_| fail("utility agreement", Some(s.clone())))?;
        let b = uj
            .run(s.as_slice())
            .map_err(|_| fail("utility agreement", Some(s.clone())))?;
        if (a - b).abs() > tol::UTILITY_AGREE {
            return Err(fail("utility agreement", Some(s.clone())));
        }
    }

    Ok(ProblemMorphism {
        source: k.id.clone(),
        target: j.id.clone(),
        source_dim: k.subspace.dim(),
        target_dim: j.subspace.dim(),
    })
}

/// The projection-then-nearest operator: project `x` onto the
/// problem's subspace, then collect every feasible point at minimal
/// distance from the projection. Degenerate inputs (the projection
/// equidistant from a continuum) return a dense sampling of the
/// minimizer set.
pub fn gamma(p: &LocalProblem, x: &Vector) -> Result<PointSet, ProblemError> {
    let projected = p.subspace.project(x)?;
    Ok(nearest_points(&p.feasible, &projected)?)
}

/// Operational section membership: gamma lands on the solution set
/// within [`tol::POINT_MATCH`]. Requires the problem to be solved.
pub fn sigma_member(p: &LocalProblem, x: &Vector) -> Result<bool, ProblemError> {
    let solution = p.require_solution()?;
    let g = gamma(p, x)?;
    Ok(g.iter()
        .any(|pt| solution.points.contains_within(pt, tol::POINT_MATCH)))
}

/// A finite set of named ambient points over which sections are
/// materialized.
#[derive(Debug, Clone)]
pub struct Universe {
    points: BTreeMap<String, Vector>,
    dim: usize,
}

impl Universe {
    pub fn from_points(points: Vec<(String, Vector)>) -> Result<Universe, ProblemError> {
        let dim = points.first().map(|(_, v)| v.dim()).unwrap_or(0);
        let mut map = BTreeMap::new();
        for (name, v) in points {
            if v.dim() != dim {
                return Err(ProblemError::UniverseDimension {
                    name,
                    got: v.dim(),
                    expected: dim,
                });
            }
            if map.insert(name.clone(), v).is_some() {
                return Err(ProblemError::DuplicateUniversePoint(name));
            }
        }
        Ok(Universe { points: map, dim })
    }

    /// Default universe: the union of the problems' solution sets,
    /// with generated point names (`p0`, `p1`, ... in cluster order).
    pub fn from_solutions(problems: &[&LocalProblem]) -> Result<Universe, ProblemError> {
        let mut all: Vec<Vector> = Vec::new();
        for p in problems {
            let s = p.require_solution()?;
            all.extend(s.points.iter().cloned());
        }
        let clustered = PointSet::from_vectors(all, tol::CLUSTER_RADIUS);
        let points = clustered
            .iter()
            .enumerate()
            .map(|(k, v)| (format!("p{}", k), v.clone()))
            .collect();
        Universe::from_points(points)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Vector)> {
        self.points.iter()
    }

    pub fn names(&self) -> Vec<String> {
        self.points.keys().cloned().collect()
    }

    pub fn get(&self, name: &str) -> Option<&Vector> {
        self.points.get(name)
    }
}

/// Sections of each problem over a universe: per problem id, the set
/// of universe point names whose gamma image meets the solution set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectionTable {
    pub point_names: Vec<String>,
    pub rows: BTreeMap<String, BTreeSet<String>>,
}

impl SectionTable {
    pub fn row(&self, problem_id: &str) -> Option<&BTreeSet<String>> {
        self.rows.get(problem_id)
    }

    /// Render as a grid of `X` (member) and `-` (non-member).
    pub fn render(&self) -> String {
        let mut out = String::new();
        let width = self
            .rows
            .keys()
            .map(|k| k.len())
            .chain(self.point_names.iter().map(|n| n.len()))
            .max()
            .unwrap_or(1)
            .max(2);
        out.push_str(&format!("{:width$}", "", width = width + 1));
        for name in &self.point_names {
            out.push_str(&format!("{:>width$}", name, width = width + 1));
        }
        out.push('\n');
        for (id, members) in &self.rows {
            out.push_str(&format!("{:width$}", id, width = width + 1));
            for name in &self.point_names {
                let mark = if members.contains(name) { "X" } else { "-" };
                out.push_str(&format!("{:>width$}", mark, width = width + 1));
            }
            out.push('\n');
        }
        out
    }
}

/// Materialize the section of every problem over the universe.
/// Problems must be solved.
pub fn section_table(
    problems: &[&LocalProblem],
    universe: &Universe,
) -> Result<SectionTable, ProblemError> {
    let mut rows = BTreeMap::new();
    for p in problems {
        let mut members = BTreeSet::new();
        for (name, point) in universe.iter() {
            if sigma_member(p, point)? {
                members.insert(name.clone());
            }
        }
        rows.insert(p.id.clone(), members);
    }
    Ok(SectionTable {
        point_names: universe.names(),
        rows,
    })
}

/// Restrict the section of `j` to the sub-problem `k`: re-solve `j`'s
/// utility over `k`'s feasible set.
pub fn restrict_section(j: &LocalProblem, k: &LocalProblem) -> Result<PointSet, ProblemError> {
    let (points, _) = grid_maximize(&j.utility, &k.feasible)?;
    Ok(points)
}

/// Outcome of the presheaf-law checks on a chain `k -> j -> l`.
#[derive(Debug, Clone)]
pub struct PresheafReport {
    pub identity_ok: bool,
    pub composition_ok: bool,
    pub failures: Vec<String>,
}

impl PresheafReport {
    pub fn pass(&self) -> bool {
        self.identity_ok && self.composition_ok
    }
}

/// Check the presheaf laws on a chain of solved problems
/// `k -> j -> l` (each a sub-problem of the next). The morphisms are
/// verified first; a morphism failure aborts before any law runs.
///
/// * identity: restricting a problem to itself returns its own
///   solution set;
/// * composition: restricting `l`'s section to `k` directly equals
///   restricting through `j` (both at [`tol::POINT_MATCH`]).
pub fn presheaf_laws(
    k: &LocalProblem,
    j: &LocalProblem,
    l: &LocalProblem,
) -> Result<PresheafReport, MorphismFailure> {
    check_morphism(k, j)?;
    check_morphism(j, l)?;
    check_morphism(k, l)?;

    let mut failures = Vec::new();
    let mut identity_ok = true;
    for p in [k, j, l] {
        let own = match (p.require_solution(), restrict_section(p, p)) {
            (Ok(sol), Ok(points)) => sol.points.set_eq(&points, tol::POINT_MATCH),
            _ => false,
        };
        if !own {
            identity_ok = false;
            failures.push(format!("identity law fails on `{}`", p.id));
        }
    }

    let mut composition_ok = true;
    // First leg: the section of `l` restricted to `j` must be `j`'s
    // own solution set (the utilities agree on `j`'s feasible set).
    match (restrict_section(l, j), j.require_solution()) {
        (Ok(via), Ok(sol)) if via.set_eq(&sol.points, tol::POINT_MATCH) => {}
        _ => {
            composition_ok = false;
            failures.push(format!(
                "restriction of `{}` to `{}` does not match the local section",
                l.id, j.id
            ));
        }
    }
    // Second leg vs. direct path down to `k`.
    match (restrict_section(j, k), restrict_section(l, k)) {
        (Ok(through), Ok(direct)) if through.set_eq(&direct, tol::POINT_MATCH) => {}
        (Ok(through), Ok(direct)) => {
            composition_ok = false;
            failures.push(format!(
                "composite restriction to `{}` disagrees: via `{}` {} vs direct {}",
                k.id, j.id, through, direct
            ));
        }
        _ => {
            composition_ok = false;
            failures.push(format!("restriction to `{}` failed to solve", k.id));
        }
    }

    Ok(PresheafReport {
        identity_ok,
        composition_ok,
        failures,
    })
}

/// Outcome of a coverage check.
#[derive(Debug, Clone)]
pub struct CoverReport {
    pub covered: bool,
    pub witness: Option<Vector>,
    pub reason: Option<String>,
}

/// Does the family cover `j`? Every member must admit a verified
/// morphism into `j`, and every sampled point of `j`'s feasible set
/// must lie within [`tol::FEASIBLE_SUBSET`] of some member.
pub fn check_cover(family: &[&LocalProblem], j: &LocalProblem) -> Result<CoverReport, ProblemError> {
    for member in family {
        if let Err(failure) = check_morphism(member, j) {
            return Ok(CoverReport {
                covered: false,
                witness: failure.witness.clone(),
                reason: Some(failure.to_string()),
            });
        }
    }
    let samples = j.feasible.sample_grid(COVER_SAMPLES)?;
    for s in &samples {
        let mut near = false;
        for member in family {
            let coarse = coarse_res(member.feasible.params().len());
            if distance_to_set(&member.feasible, s, coarse)? <= tol::FEASIBLE_SUBSET {
                near = true;
                break;
            }
        }
        if !near {
            return Ok(CoverReport {
                covered: false,
                witness: Some(s.clone()),
                reason: Some("feasible point not covered by any member".to_string()),
            });
        }
    }
    Ok(CoverReport {
        covered: true,
        witness: None,
        reason: None,
    })
}

/// Compatibility of two solved problems over a universe: applying
/// gamma to either problem's universe section and intersecting must
/// give the same set either way (all comparisons at
/// [`tol::POINT_MATCH`]).
pub fn check_compatibility(
    k: &LocalProblem,
    l: &LocalProblem,
    universe: &Universe,
) -> Result<bool, ProblemError> {
    let section_points = |p: &LocalProblem| -> Result<Vec<Vector>, ProblemError> {
        let mut out = Vec::new();
        for (_, x) in universe.iter() {
            if sigma_member(p, x)? {
                out.push(x.clone());
            }
        }
        Ok(out)
    };
    let gamma_union = |p: &LocalProblem, xs: &[Vector]| -> Result<PointSet, ProblemError> {
        let mut all: Vec<Vector> = Vec::new();
        for x in xs {
            all.extend(gamma(p, x)?.iter().cloned());
        }
        Ok(PointSet::from_vectors(all, tol::CLUSTER_RADIUS))
    };

    let xk = section_points(k)?;
    let xl = section_points(l)?;
    let lhs = gamma_union(k, &xk)?.intersect(&gamma_union(l, &xk)?, tol::POINT_MATCH);
    let rhs = gamma_union(k, &xl)?.intersect(&gamma_union(l, &xl)?, tol::POINT_MATCH);
    Ok(lhs.set_eq(&rhs, tol::POINT_MATCH))
}

/// Per-member outcome of the gluing check.
#[derive(Debug, Clone)]
pub struct GlueMember {
    pub id: String,
    pub restriction_matches: bool,
    pub section_matches: bool,
}

/// Outcome of the gluing check of a cover family against `j`.
#[derive(Debug, Clone)]
pub struct GlueReport {
    pub members: Vec<GlueMember>,
    pub failures: Vec<String>,
}

impl GlueReport {
    pub fn pass(&self) -> bool {
        self.members
            .iter()
            .all(|m| m.restriction_matches && m.section_matches)
    }
}

/// Gluing check: the section of `j` restricts to each member's own
/// section. Two comparisons per member `k`:
///
/// * (a) re-solving `j`'s utility over `k`'s feasible set reproduces
///   `k`'s solution set at [`tol::POINT_MATCH`];
/// * (b) over the universe, the restricted problem (`j`'s utility on
///   `k`'s feasible set) has the same section row as `k` itself.
///
/// Uniqueness of the glued section holds by construction: the section
/// of `j` is a single set. Morphisms and coverage are this check's
/// preconditions and are not re-verified here.
pub fn check_glue(
    family: &[&LocalProblem],
    j: &LocalProblem,
    universe: &Universe,
) -> Result<GlueReport, ProblemError> {
    let mut members = Vec::new();
    let mut failures = Vec::new();
    for k in family {
        let solution = k.require_solution()?;
        let (restricted_points, restricted_value) =
            grid_maximize(&j.utility, &k.feasible)?;
        let restriction_matches =
            restricted_points.set_eq(&solution.points, tol::POINT_MATCH);
        if !restriction_matches {
            failures.push(format!(
                "restriction of `{}` to `{}` gives {}, expected {}",
                j.id, k.id, restricted_points, solution.points
            ));
        }

        // The restricted problem, viewed as a problem in its own
        // right, must carve out the same universe section as `k`.
        let restricted_problem = LocalProblem::new(
            &format!("{}|{}", j.id, k.id),
            k.subspace.clone(),
            k.feasible.clone(),
            j.utility.clone(),
        )?
        .with_solution(Solution {
            points: restricted_points,
            value: restricted_value,
        });
        let mut section_matches = true;
        for (name, x) in universe.iter() {
            let via_restriction = sigma_member(&restricted_problem, x)?;
            let local = sigma_member(k, x)?;
            if via_restriction != local {
                section_matches = false;
                failures.push(format!(
                    "universe point `{}` disagrees between `{}` restricted to `{}` and `{}`",
                    name, j.id, k.id, k.id
                ));
            }
        }
        members.push(GlueMember {
            id: k.id.clone(),
            restriction_matches,
            section_matches,
        });
    }
    Ok(GlueReport { members, failures })
}
