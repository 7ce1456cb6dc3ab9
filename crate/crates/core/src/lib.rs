//! Rate computations for the two-user Gaussian MIMO broadcast channel
//! with a shared digital relay link, plus an exact finite-alphabet
//! laboratory for its deterministic counterpart.
//!
//! The crate is organized around pure functions over immutable values;
//! everything is safe to evaluate in parallel across sweep points.
//!
//! - [`gaussian`]: mutual-information calculus for complex Gaussian
//!   systems declared via linear structural equations.
//! - [`region`]: two-dimensional rate polytopes (hulls, unions,
//!   Minkowski extension by the relay-rate simplex).
//! - [`bc`]: broadcast scenario types, two-stage signal systems,
//!   dirty-paper baseline rates, and the no-relay capacity region.
//! - [`ghf`]: quantize-and-forward rate evaluators, the relay distortion
//!   solver, and the two-stage relay strategies.
//! - [`three_stage`]: the three-stage dirty-paper construction with the
//!   relay/virtual beamformer solve.
//! - [`detlab`]: exact entropy computations, outer bound, extractor
//!   search, and capacity-match verification for finite deterministic
//!   broadcast-relay channels.
//! - [`fixtures`]: seeded random and pinned scenarios shared by the test
//!   suite and the `check` command.

pub mod bc;
pub mod detlab;
pub mod error;
pub mod fixtures;
pub mod gaussian;
pub mod ghf;
pub mod region;
pub mod three_stage;

pub use error::{Error, Result};
