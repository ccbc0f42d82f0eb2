//! Default numeric tolerances, shared by every module.
//!
//! Each constant names the comparison it guards. Callers that need a
//! different tolerance (e.g. the CLI's `--tol-point`) pass an explicit
//! value to the function in question; these are only the defaults.

/// Orthonormality of a computed basis: |<b_i, b_j> - delta_ij|.
pub const ORTHONORMAL: f64 = 1e-12;

/// Pivot threshold in Gram–Schmidt: residual norms below this are
/// treated as linearly dependent and dropped.
pub const GS_PIVOT: f64 = 1e-10;

/// Idempotence of projection: |P(P(x)) - P(x)|.
pub const PROJECTION: f64 = 1e-10;

/// Ties between optimizer values: refined points within this of the
/// best value count as co-optimal.
pub const VALUE_TIE: f64 = 1e-9;

/// Cluster radius when deduplicating near-identical optimizer outputs.
pub const CLUSTER_RADIUS: f64 = 1e-4;

/// Point identity against closed-form reference coordinates, and set
/// equality between solution point sets.
pub const POINT_MATCH: f64 = 1e-3;

/// Containment of one feasible set in another (distance from a sample
/// of the smaller set to the larger set).
pub const FEASIBLE_SUBSET: f64 = 1e-6;

/// Distance from a feasible-set sample to its ambient subspace.
pub const SUBSPACE_CONTAIN: f64 = 1e-8;

/// Agreement between a sub-problem utility and the restriction of the
/// super-problem utility, sampled on the sub-feasible set.
pub const UTILITY_AGREE: f64 = 1e-8;

/// Strictness margin in equilibrium deviation checks: a deviation must
/// beat the current payoff by more than this to break an equilibrium.
pub const NASH_EPS: f64 = 1e-12;

/// Residual |phi(x, y, v) - u_A| accepted by the contract-inversion
/// bisection.
pub const PA_BISECT: f64 = 1e-10;

/// Strictness margin for monotonicity checks on contract utilities.
pub const MONOTONE_EPS: f64 = 1e-12;
