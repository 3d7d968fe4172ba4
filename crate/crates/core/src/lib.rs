//! Numerical toolkit for Stein's exponents in distributed quantum hypothesis
//! testing under zero-rate communication.
//!
//! All logarithms are natural; divergences are in nats.

pub mod blowup;
pub mod entropy;
pub mod error;
pub mod exponents;
pub mod ext;
pub mod io;
pub mod linalg;
pub mod marginal;
pub mod pmf;
pub mod presets;
pub mod protocol;
pub mod pvm_opt;
pub mod random;
pub mod state;

pub use error::{Error, Result};
pub use ext::ExtReal;
pub use pmf::JointPmf;
pub use state::{BipartitePair, DensityOperator, LocalPvm, PvmBasis};
