//! Global optimization over parameterized feasible sets.
//!
//! A [`FeasibleSet`] is the image of a closed parameter box under
//! coordinate-map expressions (e.g. a circle as `[cos(t), sin(t), 0]`
//! for `t` in `[0, 2*pi]`). Optimization is exhaustive and
//! derivative-free:
//!
//! 1. evaluate the objective on the full parameter grid
//!    (`resolution` points per axis, endpoints included);
//! 2. refine every near-maximal grid candidate by shrinking-box
//!    coordinate descent (step factor 0.5, 40 rounds), clamped to the
//!    parameter box;
//! 3. keep all refined points within [`tol::VALUE_TIE`] of the best
//!    refined value and cluster them at [`tol::CLUSTER_RADIUS`].
//!
//! Multiple global optimizers are therefore returned as a
//! representative [`PointSet`], including degenerate objectives whose
//! optimizer set is a continuum (the set is then a dense sampling,
//! capped at a fixed candidate budget).

use crate::euclid::Vector;
use crate::expr::{CompileError, EvalError, Expr, Program};
use crate::tol;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use std::collections::HashMap;

/// Default per-axis grid resolution.
pub const DEFAULT_RESOLUTION: usize = 720;

/// Largest permitted total grid size (product over axes).
pub const MAX_GRID: usize = 4_000_000;

/// Cap on the number of near-maximal candidates refined; beyond this
/// the candidate list is thinned by an even stride (degenerate
/// plateaus would otherwise refine the whole grid).
const CANDIDATE_CAP: usize = 4096;

/// Relative margin selecting near-maximal grid candidates for
/// refinement. Wide enough that every optimizer basin on a default
/// grid keeps a representative.
const CANDIDATE_MARGIN: f64 = 1e-2;

const REFINE_ROUNDS: usize = 40;
const REFINE_FACTOR: f64 = 0.5;

/// Relative improvement a refinement step must achieve to be
/// accepted. Keeps plateau candidates pinned to their grid points
/// instead of drifting on float noise.
const REFINE_ACCEPT_REL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OptimizeError {
    #[error("parameter `{name}` has an empty range ({lo} >= {hi})")]
    EmptyRange { name: String, lo: f64, hi: f64 },
    #[error("parameter bounds must be finite")]
    NonFiniteBound,
    #[error("duplicate parameter name `{0}`")]
    DuplicateParam(String),
    #[error("expected {expected} coordinate maps (ambient dimension), got {got}")]
    WrongMapCount { expected: usize, got: usize },
    #[error("resolution must be at least 1")]
    ZeroResolution,
    #[error("parameter grid has {0} points, which exceeds the {MAX_GRID} limit")]
    GridTooLarge(u128),
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error("evaluation failed at parameters {params:?}: {source}")]
    Eval {
        params: Vec<f64>,
        source: EvalError,
    },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// A named parameter with a nonempty closed range.
#[derive(Debug, Clone)]
pub struct Param {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
}

impl Param {
    pub fn new(name: &str, lo: f64, hi: f64) -> Result<Param, OptimizeError> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(OptimizeError::NonFiniteBound);
        }
        if lo >= hi {
            return Err(OptimizeError::EmptyRange {
                name: name.to_string(),
                lo,
                hi,
            });
        }
        Ok(Param {
            name: name.to_string(),
            lo,
            hi,
        })
    }
}

/// Canonical ambient coordinate names: `x, y, z` up to dimension 3,
/// `x1..xn` beyond.
pub fn coord_names(dim: usize) -> Vec<String> {
    if dim <= 3 {
        ["x", "y", "z"][..dim].iter().map(|s| s.to_string()).collect()
    } else {
        (1..=dim).map(|i| format!("x{}", i)).collect()
    }
}

/// The image of a parameter box under coordinate-map expressions.
#[derive(Debug, Clone)]
pub struct FeasibleSet {
    ambient_dim: usize,
    params: Vec<Param>,
    coord_maps: Vec<Expr>,
    resolution: usize,
    programs: Vec<Program>,
}

impl FeasibleSet {
    pub fn new(
        ambient_dim: usize,
        params: Vec<Param>,
        coord_maps: Vec<Expr>,
        resolution: usize,
    ) -> Result<FeasibleSet, OptimizeError> {
        if coord_maps.len() != ambient_dim {
            return Err(OptimizeError::WrongMapCount {
                expected: ambient_dim,
                got: coord_maps.len(),
            });
        }
        if resolution == 0 {
            return Err(OptimizeError::ZeroResolution);
        }
        for (i, p) in params.iter().enumerate() {
            if params[..i].iter().any(|q| q.name == p.name) {
                return Err(OptimizeError::DuplicateParam(p.name.clone()));
            }
        }
        let names: Vec<String> = params.iter().map(|p| p.name.clone()).collect();
        let programs = coord_maps
            .iter()
            .map(|m| m.compile(&names))
            .collect::<Result<Vec<_>, _>>()?;
        let fs = FeasibleSet {
            ambient_dim,
            params,
            coord_maps,
            resolution,
            programs,
        };
        fs.grid_len()?; // enforce the size cap up front
        Ok(fs)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn params(&self) -> &[Param] {
        &self.params
    }

    pub fn coord_maps(&self) -> &[Expr] {
        &self.coord_maps
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// Same set scanned at a different grid resolution.
    pub fn with_resolution(&self, resolution: usize) -> Result<FeasibleSet, OptimizeError> {
        FeasibleSet::new(
            self.ambient_dim,
            self.params.clone(),
            self.coord_maps.clone(),
            resolution,
        )
    }

    /// Total number of grid points.
    pub fn grid_len(&self) -> Result<usize, OptimizeError> {
        let mut total: u128 = 1;
        for _ in &self.params {
            total *= self.resolution as u128;
        }
        if total > MAX_GRID as u128 {
            return Err(OptimizeError::GridTooLarge(total));
        }
        Ok(total as usize)
    }

    /// Grid coordinate along one axis.
    fn tick(&self, axis: usize, k: usize) -> f64 {
        let p = &self.params[axis];
        if self.resolution == 1 {
            0.5 * (p.lo + p.hi)
        } else {
            p.lo + (p.hi - p.lo) * (k as f64) / ((self.resolution - 1) as f64)
        }
    }

    /// Decode a flat grid index (axis 0 most significant).
    fn grid_params(&self, mut idx: usize, out: &mut Vec<f64>) {
        out.clear();
        out.resize(self.params.len(), 0.0);
        for axis in (0..self.params.len()).rev() {
            let k = idx % self.resolution;
            idx /= self.resolution;
            out[axis] = self.tick(axis, k);
        }
    }

    fn spacing(&self, axis: usize) -> f64 {
        let p = &self.params[axis];
        if self.resolution == 1 {
            0.5 * (p.hi - p.lo)
        } else {
            (p.hi - p.lo) / ((self.resolution - 1) as f64)
        }
    }

    /// Map parameters to an ambient point, writing into `scratch`.
    fn write_point(&self, params: &[f64], scratch: &mut Scratch) -> Result<(), OptimizeError> {
        scratch.point.clear();
        for prog in &self.programs {
            let v = prog
                .run_with(params, &mut scratch.stack)
                .map_err(|source| OptimizeError::Eval {
                    params: params.to_vec(),
                    source,
                })?;
            scratch.point.push(v);
        }
        Ok(())
    }

    /// Map parameters to an ambient point.
    pub fn point_at(&self, params: &[f64]) -> Result<Vector, OptimizeError> {
        if params.len() != self.params.len() {
            return Err(OptimizeError::DimensionMismatch {
                expected: self.params.len(),
                got: params.len(),
            });
        }
        let mut scratch = Scratch::new();
        self.write_point(params, &mut scratch)?;
        Ok(Vector::new(scratch.point.clone()).expect("ambient dim >= 1"))
    }

    /// A deterministic subsample of the grid image: at most `cap`
    /// points, taken with an even stride starting at index 0.
    pub fn sample_grid(&self, cap: usize) -> Result<Vec<Vector>, OptimizeError> {
        let total = self.grid_len()?;
        let stride = total.div_ceil(cap.max(1)).max(1);
        let mut scratch = Scratch::new();
        let mut params = Vec::new();
        let mut out = Vec::new();
        let mut idx = 0;
        while idx < total {
            self.grid_params(idx, &mut params);
            self.write_point(&params, &mut scratch)?;
            out.push(Vector::new(scratch.point.clone()).expect("ambient dim >= 1"));
            idx += stride;
        }
        Ok(out)
    }

    /// Seeded uniform samples from the parameter box, mapped to
    /// ambient points.
    pub fn sample_random(&self, n: usize, seed: u64) -> Result<Vec<Vector>, OptimizeError> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut scratch = Scratch::new();
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let params: Vec<f64> = self
                .params
                .iter()
                .map(|p| rng.gen_range(p.lo..=p.hi))
                .collect();
            self.write_point(&params, &mut scratch)?;
            out.push(Vector::new(scratch.point.clone()).expect("ambient dim >= 1"));
        }
        Ok(out)
    }
}

/// Per-thread evaluation scratch (expression stack + point buffer).
struct Scratch {
    stack: Vec<f64>,
    point: Vec<f64>,
}

impl Scratch {
    fn new() -> Scratch {
        Scratch {
            stack: Vec::new(),
            point: Vec::new(),
        }
    }
}

/// A finite, deduplicated set of ambient points (cluster
/// representatives of an optimizer output).
#[derive(Debug, Clone)]
pub struct PointSet {
    points: Vec<Vector>,
    radius: f64,
}

impl PointSet {
    /// Cluster a point list greedily in the given order: a point is
    /// kept if it is at least `radius` away from every kept point.
    pub fn from_vectors(points: Vec<Vector>, radius: f64) -> PointSet {
        let mut kept: Vec<Vector> = Vec::new();
        for p in points {
            if kept.iter().all(|q| q.dist(&p) >= radius) {
                kept.push(p);
            }
        }
        PointSet {
            points: kept,
            radius,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vector] {
        &self.points
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Vector> {
        self.points.iter()
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Smallest distance from `x` to the set (`inf` when empty).
    pub fn min_dist(&self, x: &Vector) -> f64 {
        self.points
            .iter()
            .map(|p| p.dist(x))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains_within(&self, x: &Vector, tolerance: f64) -> bool {
        self.min_dist(x) <= tolerance
    }

    /// Every point of `self` lies within `tolerance` of some point of
    /// `other`.
    pub fn subset_of(&self, other: &PointSet, tolerance: f64) -> bool {
        self.points
            .iter()
            .all(|p| other.contains_within(p, tolerance))
    }

    /// Mutual containment at `tolerance`.
    pub fn set_eq(&self, other: &PointSet, tolerance: f64) -> bool {
        self.subset_of(other, tolerance) && other.subset_of(self, tolerance)
    }

    /// Pairwise intersection at `tolerance`: points of `self` that
    /// match a point of `other`.
    pub fn intersect(&self, other: &PointSet, tolerance: f64) -> PointSet {
        let points: Vec<Vector> = self
            .points
            .iter()
            .filter(|p| other.contains_within(p, tolerance))
            .cloned()
            .collect();
        PointSet {
            points,
            radius: self.radius,
        }
    }

    /// Union with clustering at this set's radius.
    pub fn union(&self, other: &PointSet) -> PointSet {
        let mut all = self.points.clone();
        all.extend(other.points.iter().cloned());
        PointSet::from_vectors(all, self.radius)
    }
}

impl std::fmt::Display for PointSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{{")?;
        for (k, p) in self.points.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", p)?;
        }
        write!(f, "}}")
    }
}

/// Maximize an expression in the ambient coordinates over the set.
/// Returns the co-optimal cluster representatives and the maximum.
pub fn grid_maximize(f: &Expr, fs: &FeasibleSet) -> Result<(PointSet, f64), OptimizeError> {
    // Substitute the coordinate maps into the objective so the whole
    // composition is a single program over the parameters. Unknown
    // ambient variables surface here as compile errors.
    let names = coord_names(fs.ambient_dim);
    let mut map = HashMap::new();
    for (name, m) in names.iter().zip(&fs.coord_maps) {
        map.insert(name.clone(), m.clone());
    }
    let composed = f.substitute(&map);
    let param_names: Vec<String> = fs.params.iter().map(|p| p.name.clone()).collect();
    let program = composed.compile(&param_names)?;

    let outcome = scan_and_refine(fs, &|params, scratch| {
        program
            .run_with(params, &mut scratch.stack)
            .map_err(|source| OptimizeError::Eval {
                params: params.to_vec(),
                source,
            })
    })?;
    finalize(fs, outcome)
}

/// All points of the set at minimal distance from `target` (within
/// [`tol::VALUE_TIE`] of the minimum), clustered.
pub fn nearest_points(fs: &FeasibleSet, target: &Vector) -> Result<PointSet, OptimizeError> {
    if target.dim() != fs.ambient_dim {
        return Err(OptimizeError::DimensionMismatch {
            expected: fs.ambient_dim,
            got: target.dim(),
        });
    }
    let outcome = scan_and_refine(fs, &|params, scratch| {
        fs.write_point(params, scratch)?;
        Ok(-dist_to(&scratch.point, target))
    })?;
    let (points, _neg_dist) = finalize(fs, outcome)?;
    Ok(points)
}

/// Distance from `x` to the set, computed by a coarse grid scan
/// (`coarse` points per axis) plus refinement of the best cell. Used
/// for containment checks where only the distance matters.
pub fn distance_to_set(
    fs: &FeasibleSet,
    x: &Vector,
    coarse: usize,
) -> Result<f64, OptimizeError> {
    if x.dim() != fs.ambient_dim {
        return Err(OptimizeError::DimensionMismatch {
            expected: fs.ambient_dim,
            got: x.dim(),
        });
    }
    let coarse_fs = fs.with_resolution(coarse)?;
    let objective = |params: &[f64], scratch: &mut Scratch| -> Result<f64, OptimizeError> {
        coarse_fs.write_point(params, scratch)?;
        Ok(-dist_to(&scratch.point, x))
    };
    let total = coarse_fs.grid_len()?;
    let mut scratch = Scratch::new();
    let mut params = Vec::new();
    let mut best_idx = 0usize;
    let mut best = f64::NEG_INFINITY;
    for idx in 0..total {
        coarse_fs.grid_params(idx, &mut params);
        let v = objective(&params, &mut scratch)?;
        if v > best {
            best = v;
            best_idx = idx;
        }
    }
    coarse_fs.grid_params(best_idx, &mut params);
    let (_, refined) = refine(&coarse_fs, &objective, &params, best, &mut scratch)?;
    Ok(-refined)
}

fn dist_to(point: &[f64], target: &Vector) -> f64 {
    point
        .iter()
        .zip(target.as_slice())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

struct RefineOutcome {
    /// (parameters, value), ordered by grid index.
    refined: Vec<(Vec<f64>, f64)>,
}

/// Shared engine: full grid scan, candidate selection, per-candidate
/// shrinking-box refinement.
fn scan_and_refine<F>(fs: &FeasibleSet, objective: &F) -> Result<RefineOutcome, OptimizeError>
where
    F: Fn(&[f64], &mut Scratch) -> Result<f64, OptimizeError> + Sync,
{
    let total = fs.grid_len()?;

    // Pass 1: evaluate the whole grid (order-preserving parallel map).
    let values: Vec<f64> = (0..total)
        .into_par_iter()
        .map_init(
            || (Scratch::new(), Vec::new()),
            |(scratch, params), idx| {
                fs.grid_params(idx, params);
                objective(params, scratch)
            },
        )
        .collect::<Result<Vec<_>, _>>()?;

    let grid_max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    // Pass 2: select near-maximal candidates, thinned to the cap.
    let threshold = grid_max - CANDIDATE_MARGIN * (1.0 + grid_max.abs());
    let mut candidates: Vec<usize> = values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v >= threshold)
        .map(|(i, _)| i)
        .collect();
    if candidates.len() > CANDIDATE_CAP {
        let stride = candidates.len().div_ceil(CANDIDATE_CAP);
        candidates = candidates.into_iter().step_by(stride).collect();
    }

    // Pass 3: refine each candidate independently.
    let refined: Vec<(Vec<f64>, f64)> = candidates
        .into_par_iter()
        .map_init(
            || (Scratch::new(), Vec::new()),
            |(scratch, params), idx| {
                fs.grid_params(idx, params);
                refine(fs, objective, params, values[idx], scratch)
            },
        )
        .collect::<Result<Vec<_>, _>>()?;

    Ok(RefineOutcome { refined })
}

/// Shrinking-box coordinate descent: per round, try one step up and
/// down each axis (clamped to the box) and keep strict improvements;
/// halve all steps between rounds.
fn refine<F>(
    fs: &FeasibleSet,
    objective: &F,
    start: &[f64],
    start_value: f64,
    scratch: &mut Scratch,
) -> Result<(Vec<f64>, f64), OptimizeError>
where
    F: Fn(&[f64], &mut Scratch) -> Result<f64, OptimizeError>,
{
    let n = fs.params.len();
    let mut t = start.to_vec();
    let mut best = start_value;
    let mut steps: Vec<f64> = (0..n).map(|axis| fs.spacing(axis)).collect();
    for _ in 0..REFINE_ROUNDS {
        for axis in 0..n {
            let p = &fs.params[axis];
            for dir in [1.0, -1.0] {
                let cand = (t[axis] + dir * steps[axis]).clamp(p.lo, p.hi);
                if cand == t[axis] {
                    continue;
                }
                let prev = t[axis];
                t[axis] = cand;
                let v = objective(&t, scratch)?;
                if v > best + REFINE_ACCEPT_REL * (1.0 + best.abs()) {
                    best = v;
                } else {
                    t[axis] = prev;
                }
            }
        }
        for s in steps.iter_mut() {
            *s *= REFINE_FACTOR;
        }
    }
    Ok((t, best))
}

/// Keep co-optimal refined points, map them to ambient coordinates,
/// and cluster (best value first).
fn finalize(fs: &FeasibleSet, outcome: RefineOutcome) -> Result<(PointSet, f64), OptimizeError> {
    let best = outcome
        .refined
        .iter()
        .map(|(_, v)| *v)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut scratch = Scratch::new();
    let mut winners: Vec<(usize, f64, Vector)> = Vec::new();
    for (idx, (params, value)) in outcome.refined.iter().enumerate() {
        if *value >= best - tol::VALUE_TIE {
            fs.write_point(params, &mut scratch)?;
            winners.push((
                idx,
                *value,
                Vector::new(scratch.point.clone()).expect("ambient dim >= 1"),
            ));
        }
    }
    winners.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let ordered: Vec<Vector> = winners.into_iter().map(|(_, _, p)| p).collect();
    Ok((
        PointSet::from_vectors(ordered, tol::CLUSTER_RADIUS),
        best,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TAU: f64 = std::f64::consts::TAU;

    /// The unit circle in the plane z = 0.
    fn circle() -> FeasibleSet {
        FeasibleSet::new(
            3,
            vec![Param::new("t", 0.0, TAU).unwrap()],
            vec![
                Expr::parse("cos(t)").unwrap(),
                Expr::parse("sin(t)").unwrap(),
                Expr::parse("0").unwrap(),
            ],
            DEFAULT_RESOLUTION,
        )
        .unwrap()
    }

    fn v(entries: &[f64]) -> Vector {
        Vector::new(entries.to_vec()).unwrap()
    }

    #[test]
    fn maximizes_quadratic_on_circle() {
        let u = Expr::parse("3-2*x^2-y^2-3*z^2").unwrap();
        let (points, value) = grid_maximize(&u, &circle()).unwrap();
        assert!((value - 2.0).abs() < 1e-9, "max value was {value}");
        assert_eq!(points.len(), 2, "expected both maximizers: {points}");
        assert!(points.contains_within(&v(&[0.0, 1.0, 0.0]), tol::POINT_MATCH));
        assert!(points.contains_within(&v(&[0.0, -1.0, 0.0]), tol::POINT_MATCH));
    }

    #[test]
    fn constant_objective_returns_a_representative_sampling() {
        let one = Expr::parse("1").unwrap();
        let (points, value) = grid_maximize(&one, &circle()).unwrap();
        assert_eq!(value, 1.0);
        assert!(
            points.len() >= 100,
            "expected a dense sampling, got {} points",
            points.len()
        );
    }

    #[test]
    fn grid_max_dominates_every_grid_sample() {
        let u = Expr::parse("3-2*x^2-y^2-3*z^2").unwrap();
        let fs = circle();
        let (_, value) = grid_maximize(&u, &fs).unwrap();
        let names = coord_names(3);
        let mut bindings = HashMap::new();
        for p in fs.sample_grid(500).unwrap() {
            for (name, c) in names.iter().zip(p.as_slice()) {
                bindings.insert(name.clone(), *c);
            }
            assert!(u.eval(&bindings).unwrap() <= value + tol::VALUE_TIE);
        }
    }

    #[test]
    fn nearest_point_to_external_target_is_unique() {
        let points = nearest_points(&circle(), &v(&[0.0, 2.0, 0.0])).unwrap();
        assert_eq!(points.len(), 1, "got {points}");
        assert!(points.contains_within(&v(&[0.0, 1.0, 0.0]), tol::POINT_MATCH));
    }

    #[test]
    fn nearest_point_matches_radial_oracle() {
        // Oracle: the nearest circle point to an in-plane target is the
        // target normalized to unit length.
        let target = v(&[-0.577, -0.789, 0.0]);
        let norm = (0.577f64 * 0.577 + 0.789 * 0.789).sqrt();
        let oracle = v(&[-0.577 / norm, -0.789 / norm, 0.0]);
        let points = nearest_points(&circle(), &target).unwrap();
        assert_eq!(points.len(), 1, "got {points}");
        assert!(points.contains_within(&oracle, tol::POINT_MATCH));
    }

    #[test]
    fn equidistant_target_yields_dense_minimizer_sampling() {
        // Every circle point is at distance 1 from the origin: the
        // minimizer set is the whole circle, reported as a sampling at
        // grid density.
        let points = nearest_points(&circle(), &v(&[0.0, 0.0, 0.0])).unwrap();
        assert!(points.len() >= 100, "got {} points", points.len());
        // Grid spacing bounds how far the sampling can sit from any
        // circle point.
        let spacing_bound = 5e-3;
        assert!(points.contains_within(&v(&[0.0, 1.0, 0.0]), spacing_bound));
        assert!(points.contains_within(&v(&[0.0, -1.0, 0.0]), spacing_bound));
    }

    #[test]
    fn nearest_beats_every_grid_sample() {
        let fs = circle();
        let target = v(&[0.3, 1.4, 0.2]);
        let points = nearest_points(&fs, &target).unwrap();
        let best = points.min_dist(&target);
        for p in fs.sample_grid(500).unwrap() {
            assert!(best <= p.dist(&target) + tol::VALUE_TIE);
        }
    }

    #[test]
    fn distance_to_set_detects_membership_and_distance() {
        let fs = circle();
        let on = v(&[1.0, 0.0, 0.0]);
        assert!(distance_to_set(&fs, &on, 64).unwrap() < 1e-9);
        let off = v(&[0.0, 0.0, 1.0]);
        let d = distance_to_set(&fs, &off, 64).unwrap();
        assert!((d - 2.0f64.sqrt()).abs() < 1e-6, "got {d}");
    }

    #[test]
    fn evaluation_error_inside_region_is_reported() {
        let u = Expr::parse("sqrt(x - 0.5)").unwrap();
        let err = grid_maximize(&u, &circle()).unwrap_err();
        assert!(matches!(err, OptimizeError::Eval { .. }), "got {err:?}");
    }

    #[test]
    fn unknown_ambient_variable_is_a_compile_error() {
        let u = Expr::parse("q + 1").unwrap();
        let err = grid_maximize(&u, &circle()).unwrap_err();
        assert!(matches!(err, OptimizeError::Compile(_)), "got {err:?}");
    }

    #[test]
    fn empty_parameter_range_is_rejected() {
        let err = Param::new("t", 1.0, 1.0).unwrap_err();
        assert!(matches!(err, OptimizeError::EmptyRange { .. }));
    }

    #[test]
    fn oversized_grid_is_rejected() {
        let err = FeasibleSet::new(
            1,
            vec![
                Param::new("a", 0.0, 1.0).unwrap(),
                Param::new("b", 0.0, 1.0).unwrap(),
                Param::new("c", 0.0, 1.0).unwrap(),
            ],
            vec![Expr::parse("a+b+c").unwrap()],
            720,
        )
        .unwrap_err();
        assert!(matches!(err, OptimizeError::GridTooLarge(_)));
    }

    #[test]
    fn coordinate_map_with_unknown_param_is_rejected() {
        let err = FeasibleSet::new(
            1,
            vec![Param::new("t", 0.0, 1.0).unwrap()],
            vec![Expr::parse("t + u").unwrap()],
            16,
        )
        .unwrap_err();
        assert!(matches!(err, OptimizeError::Compile(_)));
    }

    #[test]
    fn point_set_clusters_at_radius() {
        let ps = PointSet::from_vectors(
            vec![
                v(&[0.0, 0.0, 0.0]),
                v(&[1e-5, 0.0, 0.0]),
                v(&[1.0, 0.0, 0.0]),
            ],
            tol::CLUSTER_RADIUS,
        );
        assert_eq!(ps.len(), 2);
    }

    #[test]
    fn point_set_set_operations() {
        let a = PointSet::from_vectors(vec![v(&[0.0, 1.0]), v(&[1.0, 0.0])], 1e-4);
        let b = PointSet::from_vectors(vec![v(&[1.0, 1e-5]), v(&[0.0, 1.0])], 1e-4);
        assert!(a.set_eq(&b, 1e-3));
        let c = PointSet::from_vectors(vec![v(&[0.0, 1.0])], 1e-4);
        assert!(c.subset_of(&a, 1e-3));
        assert!(!a.subset_of(&c, 1e-3));
        assert_eq!(a.intersect(&c, 1e-3).len(), 1);
    }
}
