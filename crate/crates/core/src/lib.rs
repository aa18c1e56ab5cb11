//! Tree-structured Markov random fields with Poisson marginals.
//!
//! The field `N = (N_1, ..., N_d)` lives on a tree with parameters `lambda`
//! and one dependence parameter per edge. This crate computes the exact
//! distribution of `M = N_1 + ... + N_d`, risk allocations, and sufficient
//! criteria for ordering vertices and tree shapes.

pub mod corollary;
pub mod dist;
pub mod error;
pub mod model;
pub mod orders;
pub mod poly;
pub mod poset;
pub mod sample;
pub mod spectral;
pub mod tree;

pub use dist::DiscreteDist;
pub use error::{Error, Result};
pub use model::{AllocationTable, AlphaValue, Closeness, ModelJson, MpmrfModel, DEFAULT_TOL};
pub use orders::{
    cx_check_empirical, shape_compare, single_move, st_compare, synecdochic_compare, OrderVerdict, Relation,
    SingleMove,
};
pub use poly::{psi, Poly};
pub use poset::{build_poset, ShapePoset};
pub use tree::{enumerate_shapes, ShapeCode, Tree};
