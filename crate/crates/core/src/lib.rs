//! Chemical Reaction Optimization (CRO) and its application to training
//! single-hidden-layer feedforward networks without backpropagation.
//!
//! The crate is split into a problem-agnostic optimizer and the pieces that
//! specialise it to neural-network training:
//!
//! - [`cro`]: the generic engine. Molecules carry a candidate solution plus
//!   potential energy (objective value) and kinetic energy (tolerance for
//!   uphill moves). Four elementary reactions move energy between molecules
//!   and a central buffer; total energy is conserved.
//! - [`structure`] / [`slfn`]: the four-part weight encoding, forward pass and
//!   the composite NMSE + misclassification fitness.
//! - [`operators`]: initial solution generator, neighbour, decomposition and
//!   synthesis operators over real-valued encodings.
//! - [`data`]: CSV ingestion, min-max normalisation, one-hot targets and
//!   seeded train/validation/test splits.
//! - [`trainer`]: sliding-window overfitting detection, single training runs
//!   and multi-trial statistics.
//!
//! With the default `parallel` feature, independent trials are dispatched
//! across a rayon thread pool; disabling it leaves a purely sequential build.
//!
//! ```
//! use croann::cro::{CroParams, Engine};
//! use croann::operators::OperatorParams;
//! use croann::sphere::SphereProblem;
//! use rand::SeedableRng;
//!
//! let params = CroParams { fe_limit: 5_000, ..CroParams::default() };
//! let problem = SphereProblem::new(3, OperatorParams::default());
//! let rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
//! let mut engine = Engine::new(params, problem, rng).unwrap();
//! let outcome = engine.run(|_| std::ops::ControlFlow::Continue(()));
//! assert!(outcome.best_pe < 0.1);
//! ```

pub mod cro;
pub mod data;
mod error;
pub mod operators;
pub mod slfn;
pub mod sphere;
pub mod stats;
pub mod structure;
pub mod trainer;

pub use error::{Error, Result};
pub use structure::SolutionStructure;
