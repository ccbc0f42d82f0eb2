//! Discretized Principal–Agent contracting.
//!
//! A [`PAProblem`] holds grids for the Agent's type `x` and decision
//! `y`, the Agent's utility `Φ(x, y, v)` (strictly decreasing in the
//! transfer variable `v`), the Principal's utility `Π(x, y, v)`
//! (strictly increasing in `v`), and a reservation utility for the
//! Agent. [`pa_inverse`] numerically inverts `Φ` in `v` — the
//! generating-function inverse — and [`pa_solve`] brute-forces the
//! Principal's problem over the grids subject to the participation
//! constraint. [`build_pa_polys`] packages both sides as polynomials:
//! the Principal's optimal tuples per reservation level and the
//! Agent's best responses per transfer level.
//!
//! Monotonicity is checked by sampling at construction time, so a
//! `PAProblem` that exists is one the inverse is defined on. All
//! scans break ties toward the lowest grid index, making every result
//! reproducible.

use crate::expr::{Expr, Program};
use crate::poly::{Poly, PolyError};
use crate::tol;
use serde::Serialize;
use std::collections::BTreeMap;

pub mod schema;

/// Points sampled per (x, y) cell when checking monotonicity in `v`.
const MONOTONE_SAMPLES: usize = 100;
/// Doubling steps allowed while hunting for a straddling bracket.
const MAX_EXPANSIONS: usize = 60;
/// Bisection iterations allowed per inversion.
const MAX_BISECTIONS: usize = 200;
/// Size of the generated Agent-utility grid above the reservation level.
const U_A_GRID_POINTS: usize = 101;
const U_A_GRID_SPAN: f64 = 10.0;
/// Points per axis in [`inverse_round_trip`] sampling.
const ROUND_TRIP_POINTS: usize = 10;
/// Transfer-grid size used for the Agent-side polynomial.
const V_GRID_POINTS: usize = 21;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PAError {
    #[error("{which} does not parse: {detail}")]
    BadExpression { which: &'static str, detail: String },
    #[error("{which} uses unknown variable `{var}` (allowed: x, y, v)")]
    UnknownVariable { which: &'static str, var: String },
    #[error("{0} grid must not be empty")]
    EmptyGrid(&'static str),
    #[error("{0} grid contains a non-finite value")]
    BadGridValue(&'static str),
    #[error("v bracket must satisfy lo < hi")]
    BadBracket,
    #[error(
        "agent utility is not strictly decreasing in v near \
         (x={x}, y={y}, v={v})"
    )]
    PhiNotDecreasing { x: f64, y: f64, v: f64 },
    #[error(
        "principal utility is not strictly increasing in v near \
         (x={x}, y={y}, v={v})"
    )]
    PiNotIncreasing { x: f64, y: f64, v: f64 },
    #[error(
        "bracket expansion exhausted inverting at (x={x}, y={y}, \
         u_a={u_a}): utility does not attain this level"
    )]
    BracketExhausted { x: f64, y: f64, u_a: f64 },
    #[error(
        "bisection did not reach residual {tol} at (x={x}, y={y}, \
         u_a={u_a}); best {residual}"
    )]
    NoConvergence {
        x: f64,
        y: f64,
        u_a: f64,
        residual: f64,
        tol: f64,
    },
    #[error("evaluation failed: {0}")]
    Eval(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// A discretized Principal–Agent problem with validated monotone
/// utilities.
#[derive(Debug, Clone)]
pub struct PAProblem {
    x_grid: Vec<f64>,
    y_grid: Vec<f64>,
    phi_text: String,
    pi_text: String,
    phi: Program,
    pi: Program,
    reservation: f64,
    u_a_grid: Vec<f64>,
    v_bracket: (f64, f64),
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
        .collect()
}

fn compile_utility(which: &'static str, text: &str) -> Result<Program, PAError> {
    let expr = Expr::parse(text).map_err(|e| PAError::BadExpression {
        which,
        detail: e.to_string(),
    })?;
    for var in expr.variables() {
        if var != "x" && var != "y" && var != "v" {
            return Err(PAError::UnknownVariable { which, var });
        }
    }
    expr.compile(&["x".to_string(), "y".to_string(), "v".to_string()])
        .map_err(|e| PAError::BadExpression {
            which,
            detail: e.to_string(),
        })
}

fn check_grid(which: &'static str, grid: &[f64]) -> Result<(), PAError> {
    if grid.is_empty() {
        return Err(PAError::EmptyGrid(which));
    }
    if grid.iter().any(|v| !v.is_finite()) {
        return Err(PAError::BadGridValue(which));
    }
    Ok(())
}

impl PAProblem {
    /// Build and validate a problem. The Agent-utility grid defaults
    /// to 101 points spanning `[u̲, u̲ + 10]` and the transfer
    /// bracket to `[-10, 10]`; both monotonicity invariants are
    /// verified by sampling before the problem is returned.
    pub fn new(
        x_grid: Vec<f64>,
        y_grid: Vec<f64>,
        phi: &str,
        pi: &str,
        reservation: f64,
    ) -> Result<PAProblem, PAError> {
        check_grid("x", &x_grid)?;
        check_grid("y", &y_grid)?;
        let problem = PAProblem {
            x_grid,
            y_grid,
            phi_text: phi.to_string(),
            pi_text: pi.to_string(),
            phi: compile_utility("agent utility", phi)?,
            pi: compile_utility("principal utility", pi)?,
            reservation,
            u_a_grid: linspace(reservation, reservation + U_A_GRID_SPAN, U_A_GRID_POINTS),
            v_bracket: (-10.0, 10.0),
        };
        problem.check_monotone()?;
        Ok(problem)
    }

    /// Replace the Agent-utility grid (for degenerate or custom
    /// scans). Values below the reservation level are skipped by
    /// [`pa_solve`] rather than rejected here.
    pub fn with_u_a_grid(mut self, grid: Vec<f64>) -> Result<PAProblem, PAError> {
        check_grid("u_a", &grid)?;
        self.u_a_grid = grid;
        Ok(self)
    }

    /// The same problem at a different reservation level, with the
    /// default Agent-utility grid rebuilt above it.
    pub fn with_reservation(&self, reservation: f64) -> PAProblem {
        let mut next = self.clone();
        next.reservation = reservation;
        next.u_a_grid = linspace(reservation, reservation + U_A_GRID_SPAN, U_A_GRID_POINTS);
        next
    }

    pub fn x_grid(&self) -> &[f64] {
        &self.x_grid
    }

    pub fn y_grid(&self) -> &[f64] {
        &self.y_grid
    }

    pub fn u_a_grid(&self) -> &[f64] {
        &self.u_a_grid
    }

    pub fn reservation(&self) -> f64 {
        self.reservation
    }

    pub fn v_bracket(&self) -> (f64, f64) {
        self.v_bracket
    }

    pub fn phi_text(&self) -> &str {
        &self.phi_text
    }

    pub fn pi_text(&self) -> &str {
        &self.pi_text
    }

    pub fn phi_at(&self, x: f64, y: f64, v: f64) -> Result<f64, PAError> {
        self.phi
            .run(&[x, y, v])
            .map_err(|e| PAError::Eval(e.to_string()))
    }

    pub fn pi_at(&self, x: f64, y: f64, v: f64) -> Result<f64, PAError> {
        self.pi
            .run(&[x, y, v])
            .map_err(|e| PAError::Eval(e.to_string()))
    }

    fn check_monotone(&self) -> Result<(), PAError> {
        let samples = linspace(self.v_bracket.0, self.v_bracket.1, MONOTONE_SAMPLES);
        for &x in &self.x_grid {
            for &y in &self.y_grid {
                for pair in samples.windows(2) {
                    let phi_step = self.phi_at(x, y, pair[1])? - self.phi_at(x, y, pair[0])?;
                    if phi_step >= -tol::MONOTONE_EPS {
                        return Err(PAError::PhiNotDecreasing { x, y, v: pair[0] });
                    }
                    let pi_step = self.pi_at(x, y, pair[1])? - self.pi_at(x, y, pair[0])?;
                    if pi_step <= tol::MONOTONE_EPS {
                        return Err(PAError::PiNotIncreasing { x, y, v: pair[0] });
                    }
                }
            }
        }
        Ok(())
    }
}

/// Invert the Agent's utility in the transfer: find `v` with
/// `Φ(x, y, v) = u_a` to residual [`tol::PA_BISECT`]. The initial
/// bracket doubles outward (at most 60 times) until it straddles the
/// level, then bisection runs for at most 200 iterations.
pub fn pa_inverse(pa: &PAProblem, y: f64, x: f64, u_a: f64) -> Result<f64, PAError> {
    let (mut lo, mut hi) = pa.v_bracket;
    let mut f_lo = pa.phi_at(x, y, lo)?;
    let mut f_hi = pa.phi_at(x, y, hi)?;
    let mut expansions = 0;
    // Φ is decreasing: the value at `lo` is the bracket maximum.
    while u_a > f_lo || u_a < f_hi {
        if expansions >= MAX_EXPANSIONS {
            return Err(PAError::BracketExhausted { x, y, u_a });
        }
        let width = hi - lo;
        if u_a > f_lo {
            lo -= width;
            f_lo = pa.phi_at(x, y, lo)?;
        } else {
            hi += width;
            f_hi = pa.phi_at(x, y, hi)?;
        }
        expansions += 1;
    }
    let mut best_residual = f64::INFINITY;
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        let f_mid = pa.phi_at(x, y, mid)?;
        let residual = (f_mid - u_a).abs();
        if residual < best_residual {
            best_residual = residual;
        }
        if residual <= tol::PA_BISECT {
            return Ok(mid);
        }
        if f_mid > u_a {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(PAError::NoConvergence {
        x,
        y,
        u_a,
        residual: best_residual,
        tol: tol::PA_BISECT,
    })
}

/// The Principal's optimum: argmax cell and transfer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PASolution {
    pub x: f64,
    pub y: f64,
    pub u_a: f64,
    pub v: f64,
    pub value: f64,
    /// Grid indices (x, y, u_a) of the winning cell.
    pub indices: (usize, usize, usize),
}

/// Brute-force the Principal's problem: over every grid cell
/// `(x, y)` and every Agent-utility level at or above the
/// reservation, invert `Φ` to get the transfer and maximize `Π`.
/// Ties keep the first (lowest-index) winner, scanning x-major.
pub fn pa_solve(pa: &PAProblem) -> Result<PASolution, PAError> {
    let mut best: Option<PASolution> = None;
    for (ix, &x) in pa.x_grid.iter().enumerate() {
        for (iy, &y) in pa.y_grid.iter().enumerate() {
            for (iu, &u_a) in pa.u_a_grid.iter().enumerate() {
                if u_a < pa.reservation {
                    continue;
                }
                let v = pa_inverse(pa, y, x, u_a)?;
                let value = pa.pi_at(x, y, v)?;
                let better = match &best {
                    None => true,
                    Some(b) => value > b.value,
                };
                if better {
                    best = Some(PASolution {
                        x,
                        y,
                        u_a,
                        v,
                        value,
                        indices: (ix, iy, iu),
                    });
                }
            }
        }
    }
    best.ok_or(PAError::EmptyGrid("u_a"))
}

/// Max residuals of the two defining identities of the inverse,
/// sampled on a 10×10×10 grid: `|Φ(x, y, Φ⁻¹(u)) − u|` over utility
/// levels and `|v − Φ⁻¹(Φ(x, y, v))|` over transfers.
pub fn inverse_round_trip(pa: &PAProblem) -> Result<(f64, f64), PAError> {
    let lo = |g: &[f64]| g.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = |g: &[f64]| g.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let xs = linspace(lo(&pa.x_grid), hi(&pa.x_grid), ROUND_TRIP_POINTS);
    let ys = linspace(lo(&pa.y_grid), hi(&pa.y_grid), ROUND_TRIP_POINTS);
    let us = linspace(
        pa.reservation,
        pa.reservation + U_A_GRID_SPAN,
        ROUND_TRIP_POINTS,
    );
    let vs = linspace(pa.v_bracket.0, pa.v_bracket.1, ROUND_TRIP_POINTS);
    let mut max_u = 0.0f64;
    let mut max_v = 0.0f64;
    for &x in &xs {
        for &y in &ys {
            for &u in &us {
                let v = pa_inverse(pa, y, x, u)?;
                max_u = max_u.max((pa.phi_at(x, y, v)? - u).abs());
            }
            for &v in &vs {
                let u = pa.phi_at(x, y, v)?;
                let v_back = pa_inverse(pa, y, x, u)?;
                max_v = max_v.max((v - v_back).abs());
            }
        }
    }
    Ok((max_u, max_v))
}

fn float_id(v: f64) -> String {
    format!("{v}")
}

/// Build the two interface polynomials: `p_P` has one position per
/// reservation level with the Principal's optimal tuple as its
/// direction payload; `p_A` has one position per transfer level, with
/// one direction per Agent type giving the best-response decision and
/// the Principal's resulting utility. Their pairing is the identity
/// on the tensor, witnessed executably by [`inverse_round_trip`].
pub fn build_pa_polys(
    pa: &PAProblem,
    reservation_grid: &[f64],
) -> Result<(Poly, Poly), PAError> {
    check_grid("reservation", reservation_grid)?;

    let mut p_positions = Vec::new();
    let mut p_dirs = BTreeMap::new();
    let mut p_payloads: BTreeMap<String, BTreeMap<String, serde_json::Value>> = BTreeMap::new();
    for &r in reservation_grid {
        let pos = float_id(r);
        let solution = pa_solve(&pa.with_reservation(r))?;
        p_payloads.insert(
            pos.clone(),
            [(
                "opt".to_string(),
                serde_json::json!({
                    "x": solution.x,
                    "y": solution.y,
                    "u_a": solution.u_a,
                    "v": solution.v,
                    "value": solution.value,
                }),
            )]
            .into(),
        );
        p_dirs.insert(pos.clone(), vec!["opt".to_string()]);
        p_positions.push(pos);
    }
    let mut p_p = Poly::new("p_P", p_positions, p_dirs)?;
    p_p.payloads = p_payloads;

    let vs = linspace(pa.v_bracket.0, pa.v_bracket.1, V_GRID_POINTS);
    let mut a_positions = Vec::new();
    let mut a_dirs = BTreeMap::new();
    let mut a_payloads: BTreeMap<String, BTreeMap<String, serde_json::Value>> = BTreeMap::new();
    for &v in &vs {
        let pos = float_id(v);
        let mut dirs = Vec::new();
        let mut payloads = BTreeMap::new();
        for (ix, &x) in pa.x_grid.iter().enumerate() {
            // Best-response decision: maximize the Agent's utility
            // over the decision grid at this transfer, first wins.
            let mut best_iy = 0;
            let mut best = f64::NEG_INFINITY;
            for (iy, &y) in pa.y_grid.iter().enumerate() {
                let u = pa.phi_at(x, y, v)?;
                if u > best {
                    best = u;
                    best_iy = iy;
                }
            }
            let y = pa.y_grid[best_iy];
            let d = format!("x{ix}");
            payloads.insert(
                d.clone(),
                serde_json::json!({
                    "x": x,
                    "y": y,
                    "u_p": pa.pi_at(x, y, v)?,
                }),
            );
            dirs.push(d);
        }
        a_dirs.insert(pos.clone(), dirs);
        a_payloads.insert(pos.clone(), payloads);
        a_positions.push(pos);
    }
    let mut p_a = Poly::new("p_A", a_positions, a_dirs)?;
    p_a.payloads = a_payloads;

    Ok((p_p, p_a))
}

/// The quasilinear reference instance: `Φ = 2 − v − (y−x)²`,
/// `Π = v − y²`, a single Agent type at 0, eleven decisions on
/// [0, 1], reservation utility 1. Its inverse is algebraic
/// (`v = 2 − (y−x)² − u`), making it an exact oracle target.
pub fn quasilinear_fixture() -> PAProblem {
    PAProblem::new(
        vec![0.0],
        linspace(0.0, 1.0, 11),
        "2 - v - (y - x)^2",
        "v - y^2",
        1.0,
    )
    .expect("fixture is monotone")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_builds_with_default_grids() {
        let pa = quasilinear_fixture();
        assert_eq!(pa.u_a_grid().len(), 101);
        assert_eq!(pa.u_a_grid()[0], 1.0);
        assert_eq!(pa.u_a_grid()[100], 11.0);
        assert_eq!(pa.y_grid().len(), 11);
        assert_eq!(pa.v_bracket(), (-10.0, 10.0));
    }

    #[test]
    fn monotonicity_violations_are_rejected() {
        let increasing = PAProblem::new(vec![0.0], vec![0.0], "v", "v", 0.0);
        assert!(matches!(
            increasing.unwrap_err(),
            PAError::PhiNotDecreasing { .. }
        ));
        let flat_pi = PAProblem::new(vec![0.0], vec![0.0], "0 - v", "x", 0.0);
        assert!(matches!(
            flat_pi.unwrap_err(),
            PAError::PiNotIncreasing { .. }
        ));
    }

    #[test]
    fn bad_expressions_and_grids_are_rejected() {
        assert!(matches!(
            PAProblem::new(vec![0.0], vec![0.0], "2 - v +", "v", 0.0).unwrap_err(),
            PAError::BadExpression { .. }
        ));
        assert!(matches!(
            PAProblem::new(vec![0.0], vec![0.0], "2 - v - w", "v", 0.0).unwrap_err(),
            PAError::UnknownVariable { .. }
        ));
        assert!(matches!(
            PAProblem::new(vec![], vec![0.0], "2 - v", "v", 0.0).unwrap_err(),
            PAError::EmptyGrid("x")
        ));
    }

    #[test]
    fn inverse_matches_the_algebraic_form_on_the_quasilinear_fixture() {
        let pa = quasilinear_fixture();
        for &y in pa.y_grid() {
            for u in [1.0, 1.5, 2.0, 5.0] {
                let v = pa_inverse(&pa, y, 0.0, u).unwrap();
                let exact = 2.0 - y * y - u;
                assert!(
                    (v - exact).abs() <= 1e-8,
                    "y={y}, u={u}: {v} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn round_trip_residuals_stay_within_tolerance() {
        let pa = quasilinear_fixture();
        let (max_u, max_v) = inverse_round_trip(&pa).unwrap();
        assert!(max_u <= 1e-8, "u residual {max_u}");
        assert!(max_v <= 1e-8, "v residual {max_v}");
    }

    #[test]
    fn bracket_expands_to_reach_far_levels() {
        let pa = quasilinear_fixture();
        let v = pa_inverse(&pa, 0.5, 0.0, 500.0).unwrap();
        assert!((pa.phi_at(0.0, 0.5, v).unwrap() - 500.0).abs() <= 1e-8);
        assert!(v < -400.0);
    }

    #[test]
    fn unreachable_levels_exhaust_the_bracket() {
        // Φ = exp(−v) is strictly decreasing but bounded below by 0,
        // so a negative target level can never be straddled.
        let pa = PAProblem::new(vec![0.0], vec![0.0], "exp(0 - v)", "v", 0.0).unwrap();
        let err = pa_inverse(&pa, 0.0, 0.0, -1.0).unwrap_err();
        assert!(matches!(err, PAError::BracketExhausted { .. }));
    }

    #[test]
    fn solver_matches_the_exact_quasilinear_optimum() {
        // With u_A at the binding reservation level 1, the transfer
        // is v = 1 − y² and the Principal's value 1 − 2y² peaks at
        // y = 0 with value 1.
        let pa = quasilinear_fixture();
        let sol = pa_solve(&pa).unwrap();
        assert_eq!(sol.indices, (0, 0, 0));
        assert_eq!(sol.x, 0.0);
        assert_eq!(sol.y, 0.0);
        assert_eq!(sol.u_a, 1.0);
        assert!((sol.v - 1.0).abs() <= 1e-8);
        assert!((sol.value - 1.0).abs() <= 1e-8);
    }

    #[test]
    fn solver_matches_an_independent_algebraic_oracle() {
        // The oracle repeats the triple loop but uses the algebraic
        // inverse v = 2 − (y−x)² − u directly, no bisection.
        let pa = quasilinear_fixture();
        let mut best: Option<(usize, usize, usize, f64)> = None;
        for (ix, &x) in pa.x_grid().iter().enumerate() {
            for (iy, &y) in pa.y_grid().iter().enumerate() {
                for (iu, &u) in pa.u_a_grid().iter().enumerate() {
                    let v = 2.0 - (y - x) * (y - x) - u;
                    let value = v - y * y;
                    let better = match best {
                        None => true,
                        Some((_, _, _, b)) => value > b,
                    };
                    if better {
                        best = Some((ix, iy, iu, value));
                    }
                }
            }
        }
        let (ix, iy, iu, value) = best.unwrap();
        let sol = pa_solve(&pa).unwrap();
        assert_eq!(sol.indices, (ix, iy, iu));
        assert!((sol.value - value).abs() <= 1e-9);
    }

    #[test]
    fn participation_constraint_binds_when_pi_increases_in_v() {
        let pa = PAProblem::new(
            vec![0.0, 1.0],
            linspace(-1.0, 1.0, 5),
            "5 - 2*v - y^2",
            "3*v + x",
            0.25,
        )
        .unwrap();
        let sol = pa_solve(&pa).unwrap();
        assert_eq!(sol.u_a, pa.reservation());
        assert_eq!(sol.indices.2, 0);
    }

    #[test]
    fn degenerate_grids_return_the_single_cell() {
        let pa = PAProblem::new(vec![0.5], vec![2.0], "2 - v", "v", 0.0)
            .unwrap()
            .with_u_a_grid(vec![0.75])
            .unwrap();
        let sol = pa_solve(&pa).unwrap();
        assert_eq!(sol.indices, (0, 0, 0));
        assert_eq!(sol.x, 0.5);
        assert_eq!(sol.y, 2.0);
        assert_eq!(sol.u_a, 0.75);
        assert!((sol.v - 1.25).abs() <= 1e-8);
    }

    #[test]
    fn principal_poly_reproduces_per_reservation_optima() {
        let pa = quasilinear_fixture();
        let grid = [0.5, 1.0, 1.5];
        let (p_p, _) = build_pa_polys(&pa, &grid).unwrap();
        assert_eq!(p_p.position_count(), grid.len());
        for &r in &grid {
            let pos = format!("{r}");
            let payload = p_p.payload(&pos, "opt").unwrap();
            let sol = pa_solve(&pa.with_reservation(r)).unwrap();
            assert_eq!(payload["u_a"].as_f64().unwrap(), sol.u_a);
            assert_eq!(payload["y"].as_f64().unwrap(), sol.y);
            assert!((payload["v"].as_f64().unwrap() - sol.v).abs() <= 1e-12);
            assert!((payload["value"].as_f64().unwrap() - sol.value).abs() <= 1e-12);
        }
    }

    #[test]
    fn agent_poly_directions_are_best_responses() {
        let pa = quasilinear_fixture();
        let (_, p_a) = build_pa_polys(&pa, &[1.0]).unwrap();
        assert_eq!(p_a.position_count(), 21);
        for pos in &p_a.positions {
            let v: f64 = pos.parse().unwrap();
            for (ix, &x) in pa.x_grid().iter().enumerate() {
                let payload = p_a.payload(pos, &format!("x{ix}")).unwrap();
                let y = payload["y"].as_f64().unwrap();
                let chosen = pa.phi_at(x, y, v).unwrap();
                for &alt in pa.y_grid() {
                    assert!(
                        chosen >= pa.phi_at(x, alt, v).unwrap() - 1e-12,
                        "y={y} is not a best response at v={v}"
                    );
                }
            }
        }
    }

    #[test]
    fn round_trip_helper_is_deterministic() {
        let pa = quasilinear_fixture();
        assert_eq!(
            inverse_round_trip(&pa).unwrap(),
            inverse_round_trip(&pa).unwrap()
        );
    }
}
