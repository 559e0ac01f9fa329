//! Word matrices fitted from corpus statistics, their permutation-invariant
//! observables, and a five-parameter Gaussian matrix model for them.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod corpus;
pub mod counting;
pub mod error;
pub mod invariants;
pub mod matrix;
pub mod model;
pub mod pipeline;
pub mod regression;
pub mod sampler;

pub use error::{Error, Result};
pub use invariants::{InvariantId, InvariantValues};
pub use matrix::{Ensemble, PermutationMap, WordMatrix};
pub use model::GaussParams;
