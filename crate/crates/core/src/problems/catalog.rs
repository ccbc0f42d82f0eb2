//! Ready-made problems used across tests and CLI fixtures.
//!
//! The trio [`sphere_problem`] / [`circle_problem`] /
//! [`tilted_circle_problem`] shares one quadratic utility on the unit
//! sphere; the two circles are great-circle slices, so they embed into
//! the sphere problem and their solution sets glue. The chain
//! [`segment_problem`] ⊂ [`plane_patch_problem`] ⊂ [`box_problem`]
//! exercises the presheaf laws across one, two and three dimensions.

use super::LocalProblem;
use crate::euclid::{Subspace, Vector};
use crate::expr::Expr;
use crate::optimize::{FeasibleSet, Param};
use std::f64::consts::{PI, TAU};

fn vec3(x: f64, y: f64, z: f64) -> Vector {
    Vector::new(vec![x, y, z]).unwrap()
}

fn parse(src: &str) -> Expr {
    Expr::parse(src).expect("catalog expression parses")
}

fn param(name: &str, lo: f64, hi: f64) -> Param {
    Param::new(name, lo, hi).expect("catalog parameter range is valid")
}

/// Quadratic utility shared by the sphere and its great circles:
/// `3 - 2x^2 - y^2 - 3z^2`.
pub const SPHERE_UTILITY: &str = "3-2*x^2-y^2-3*z^2";

/// The full unit sphere under [`SPHERE_UTILITY`]; maximizers are
/// `(0, ±1, 0)` with value 2.
pub fn sphere_problem() -> LocalProblem {
    let feasible = FeasibleSet::new(
        3,
        vec![param("t", 0.0, PI), param("p", 0.0, TAU)],
        vec![
            parse("sin(t)*cos(p)"),
            parse("sin(t)*sin(p)"),
            parse("cos(t)"),
        ],
        720,
    )
    .unwrap();
    LocalProblem::new("s0", Subspace::full(3), feasible, parse(SPHERE_UTILITY)).unwrap()
}

/// A shrunk sphere (radius 0.9). Not a superset of the unit sphere:
/// useful as a target that fails feasible containment.
pub fn sphere_problem_small() -> LocalProblem {
    let feasible = FeasibleSet::new(
        3,
        vec![param("t", 0.0, PI), param("p", 0.0, TAU)],
        vec![
            parse("0.9*sin(t)*cos(p)"),
            parse("0.9*sin(t)*sin(p)"),
            parse("0.9*cos(t)"),
        ],
        180,
    )
    .unwrap();
    LocalProblem::new("s0small", Subspace::full(3), feasible, parse(SPHERE_UTILITY)).unwrap()
}

/// The equatorial great circle `z = 0` with the sphere utility
/// restricted to its plane; maximizers are `(0, ±1, 0)` with value 2.
pub fn circle_problem() -> LocalProblem {
    circle_problem_with_utility("3-2*x^2-y^2")
}

/// The equatorial circle with a caller-chosen utility.
pub fn circle_problem_with_utility(utility: &str) -> LocalProblem {
    let feasible = FeasibleSet::new(
        3,
        vec![param("t", 0.0, TAU)],
        vec![parse("cos(t)"), parse("sin(t)"), parse("0")],
        720,
    )
    .unwrap();
    let subspace = Subspace::from_normals(3, &[vec3(0.0, 0.0, 1.0)]).unwrap();
    LocalProblem::new("s1", subspace, feasible, parse(utility)).unwrap()
}

/// The great circle cut by the plane `x - y + z = 0`, parameterized in
/// the orthonormal frame `e1 = (1,1,0)/√2`, `e2 = (-1,1,2)/√6`, with
/// the sphere utility rewritten in plane coordinates.
pub fn tilted_circle_problem() -> LocalProblem {
    tilted_circle_problem_with_utility("3-3*x^2-4*z^2-2*x*z")
}

/// The tilted great circle with a caller-chosen utility.
pub fn tilted_circle_problem_with_utility(utility: &str) -> LocalProblem {
    let feasible = FeasibleSet::new(
        3,
        vec![param("t", 0.0, TAU)],
        vec![
            parse("cos(t)/sqrt(2) - sin(t)/sqrt(6)"),
            parse("cos(t)/sqrt(2) + sin(t)/sqrt(6)"),
            parse("2*sin(t)/sqrt(6)"),
        ],
        720,
    )
    .unwrap();
    let subspace = Subspace::from_normals(3, &[vec3(1.0, -1.0, 1.0)]).unwrap();
    LocalProblem::new("s2", subspace, feasible, parse(utility)).unwrap()
}

/// Closed-form maximizers of [`tilted_circle_problem`]: antipodal
/// points `b1 = -b2`, `b2 = (1/√3, 1/(2√3) + 1/2, 1/2 - 1/(2√3))`.
pub fn tilted_circle_solutions() -> (Vector, Vector) {
    let s3 = 3f64.sqrt();
    let b2 = vec3(1.0 / s3, 0.5 / s3 + 0.5, 0.5 - 0.5 / s3);
    let b1 = b2.scale(-1.0);
    (b1, b2)
}

/// Four named reference points: the equatorial maximizers `a1`, `a2`
/// and the tilted-circle maximizers `b1`, `b2`.
pub fn example_universe() -> super::Universe {
    let (b1, b2) = tilted_circle_solutions();
    super::Universe::from_points(vec![
        ("a1".to_string(), vec3(0.0, 1.0, 0.0)),
        ("a2".to_string(), vec3(0.0, -1.0, 0.0)),
        ("b1".to_string(), b1),
        ("b2".to_string(), b2),
    ])
    .unwrap()
}

/// The equatorial circle split at `t = ±π/2` into overlapping halves;
/// together they cover [`circle_problem`].
pub fn half_circle_problems() -> (LocalProblem, LocalProblem) {
    let subspace = Subspace::from_normals(3, &[vec3(0.0, 0.0, 1.0)]).unwrap();
    let make = |id: &str, lo: f64, hi: f64| {
        let feasible = FeasibleSet::new(
            3,
            vec![param("t", lo, hi)],
            vec![parse("cos(t)"), parse("sin(t)"), parse("0")],
            720,
        )
        .unwrap();
        LocalProblem::new(id, subspace.clone(), feasible, parse("3-2*x^2-y^2")).unwrap()
    };
    (
        make("s1-left", PI / 2.0, 1.5 * PI),
        make("s1-right", -PI / 2.0, PI / 2.0),
    )
}

/// Utility shared by the nested chain: a paraboloid peaking at
/// `(0.5, -0.25, 0)`.
pub const CHAIN_UTILITY: &str = "3 - (x-0.5)^2 - (y+0.25)^2 - z^2";

/// The segment `[-1, 1]` on the x-axis under [`CHAIN_UTILITY`];
/// maximizer `(0.5, 0, 0)`.
pub fn segment_problem() -> LocalProblem {
    let feasible = FeasibleSet::new(
        3,
        vec![param("s", -1.0, 1.0)],
        vec![parse("s"), parse("0"), parse("0")],
        720,
    )
    .unwrap();
    let subspace = Subspace::from_spanning(&[vec3(1.0, 0.0, 0.0)]).unwrap();
    LocalProblem::new("line", subspace, feasible, parse(CHAIN_UTILITY)).unwrap()
}

/// The square `[-1, 1]^2` in the plane `z = 0` under
/// [`CHAIN_UTILITY`]; maximizer `(0.5, -0.25, 0)`.
pub fn plane_patch_problem() -> LocalProblem {
    plane_patch_problem_with_utility(CHAIN_UTILITY)
}

/// The plane patch with a caller-chosen utility.
pub fn plane_patch_problem_with_utility(utility: &str) -> LocalProblem {
    let feasible = FeasibleSet::new(
        3,
        vec![param("s", -1.0, 1.0), param("t", -1.0, 1.0)],
        vec![parse("s"), parse("t"), parse("0")],
        181,
    )
    .unwrap();
    let subspace =
        Subspace::from_spanning(&[vec3(1.0, 0.0, 0.0), vec3(0.0, 1.0, 0.0)]).unwrap();
    LocalProblem::new("plane", subspace, feasible, parse(utility)).unwrap()
}

/// The cube `[-1, 1]^3` under [`CHAIN_UTILITY`]; maximizer
/// `(0.5, -0.25, 0)`.
pub fn box_problem() -> LocalProblem {
    let feasible = FeasibleSet::new(
        3,
        vec![
            param("s", -1.0, 1.0),
            param("t", -1.0, 1.0),
            param("w", -1.0, 1.0),
        ],
        vec![parse("s"), parse("t"), parse("w")],
        41,
    )
    .unwrap();
    LocalProblem::new("cube", Subspace::full(3), feasible, parse(CHAIN_UTILITY)).unwrap()
}
