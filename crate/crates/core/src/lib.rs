//! Reconstruction of a time-independent heat source from noisy final-time
//! measurements.
//!
//! The inverse problem is solved by Tikhonov-regularized conjugate gradients
//! ([`inverse`]). The forward map can be either the full-order P1 finite
//! element / BDF2 solver ([`forward`]) or the Krylov-sequence reduced-order
//! solver ([`rom`]), which reuses a single stiffness factorization and steps a
//! system of dimension at most ℓ.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod artifacts;
pub mod config;
pub mod error;
pub mod fem;
pub mod forward;
pub mod inverse;
pub mod linalg;
pub mod measure;
pub mod oracle;
pub mod pgm;
pub mod pipeline;
pub mod rom;
pub mod sources;

pub use config::{Engine, RunConfig};
pub use error::{Error, Result};
pub use fem::{assemble, build_mesh, FemSystem, Mesh, NodalFunction};
pub use forward::{fem_forward_operator, fem_forward_solve, FemForward, ForwardOperator, TimeGrid};
pub use inverse::{cg_reconstruct, objective_value, InverseConfig, ReconstructionReport};
pub use linalg::{CholeskyFactor, DenseSymMatrix, SparseMatrix};
pub use measure::{empirical_norm, simulate_measurements, MeasurementSet};
pub use pgm::{load_pgm, GrayscaleImage};
pub use rom::{get_matrix_q, reduce, rom_forward_solve, ReducedSystem, RomBasis, RomForward};
pub use sources::{analytic_source, rasterize_image_source, SourceSpec};
