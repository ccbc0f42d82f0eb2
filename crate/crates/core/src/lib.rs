//! Categorical toolkit for composing optimization problems and finite games.
//!
//! The crate is organized in three layers:
//!
//! * a numeric substrate: symbolic expressions ([`expr`]), Euclidean
//!   subspaces ([`euclid`]) and grid-based global optimization over
//!   parameterized feasible sets ([`optimize`]);
//! * two concrete categories: local optimization problems with section
//!   restriction and gluing checks ([`problems`]), and finite games in
//!   normal form with coproducts, pushouts and cospans ([`games`]) plus
//!   their pure-strategy equilibria ([`equilibria`]);
//! * polynomial functors and coalgebras ([`poly`]) that embed both
//!   categories, with two worked applications: a principal–agent
//!   contracting solver ([`pa`]) and a mechanism-design selector
//!   ([`mech`]).
//!
//! All numeric checks are tolerance-based; the defaults live in [`tol`].

pub mod equilibria;
pub mod euclid;
pub mod expr;
pub mod games;
pub mod mech;
pub mod optimize;
pub mod pa;
pub mod poly;
pub mod problems;
pub mod tol;
