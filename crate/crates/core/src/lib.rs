//! Schreier graphs over free products of copies of ℤ and ℤ/2ℤ.
//!
//! The crate builds Schreier graphs from permutation actions, subgroup
//! generators and periodic windows, and analyses them: rooted isomorphism
//! with and without labels, transitivity, length-preserving maps between
//! subgroups, coverings, quasi-isometry bounds and ends.

pub mod corpus;
pub mod cover;
pub mod factorize;
pub mod isoauto;
pub mod lengthiso;
pub mod lgraph;
pub mod perms;
pub mod schreier;
pub mod words;

pub use lgraph::{Edge, EdgeId, GraphBuilder, GraphError, LabeledGraph, PlainGraph, VertexId};
pub use words::{Alphabet, Letter, OrderClass, Sign, Word, WordError};
