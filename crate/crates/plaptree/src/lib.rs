//! Principal Dirichlet eigenvalue of the discrete p-Laplacian on finite
//! weighted rooted trees.
//!
//! The eigenvalue is the infimum of the Dirichlet energy over functions of
//! unit weighted p-mass vanishing at the root; equivalently, its reciprocal
//! is the optimal constant of the associated weighted Hardy inequality.
//! This crate provides:
//!
//! * the tree model and its derived aggregates ([`tree`], [`weights`]);
//! * the p-Laplacian, Dirichlet energy, and summation-by-parts pairing
//!   ([`form`]);
//! * three variational functionals whose vertex extrema certify lower and
//!   upper bounds from explicit test functions, plus the double-sum inverse
//!   iteration that tightens them to convergence ([`domains`], [`ops`]);
//! * the closed-form geometric estimate `[1/(p̂^(p-1) c σ), 1/σ]` and the
//!   homogeneous-tree formulas ([`estimates`]);
//! * a certified solver with an independent dense p = 2 route and a
//!   projected-gradient cross-check ([`solver`], [`dense`]).
//!
//! ```
//! use plaptree::{
//!     estimates::basic_bounds, exponent::PExponent, solver::solve_principal,
//!     tree::{VertexSpec, WeightedTree}, weights::derive_weights,
//! };
//!
//! let tree = WeightedTree::build(&[
//!     VertexSpec::new("o", None, 1.0, None),
//!     VertexSpec::new("a", Some("o"), 3.0, Some(2.0)),
//! ])
//! .unwrap();
//! let p = PExponent::new(2.0).unwrap();
//! let weights = derive_weights(&tree, p).unwrap();
//! let est = basic_bounds(&tree, &weights, p);
//! let pair = solve_principal(&tree, p, 1e-10, 1000).unwrap();
//! assert!(est.lower.unwrap() <= pair.lambda && pair.lambda <= est.upper);
//! assert!((pair.lambda - 2.0 / 3.0).abs() < 1e-12);
//! ```
//!
//! Everything is a pure function of its inputs; trees and derived weights
//! are immutable after construction and safe to share across threads.
//! Reductions are serial, so results are bit-reproducible run to run.

pub mod dense;
pub mod domains;
mod error;
pub mod estimates;
pub mod exponent;
pub mod form;
pub mod num;
pub mod ops;
pub mod rng;
pub mod sample;
pub mod solver;
pub mod tree;
pub mod weights;

pub use error::TreeError;
pub use exponent::PExponent;
pub use form::VertexFunction;
pub use tree::{generate_homogeneous, VertexSpec, WeightedTree};
