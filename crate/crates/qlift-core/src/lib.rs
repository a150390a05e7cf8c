//! Numerical dilation theory for q-commuting matrix contractions.
//!
//! Given contractions `T1`, `T2` with `T1 T2 = q T2 T1`, this crate builds
//! truncated Schaeffer dilations and co-isometric extensions, solves the
//! Douglas/Parrott completion problems behind the classical lifting
//! constructions,
//! and produces lifted operators together with residual certificates for
//! every identity they are supposed to satisfy.

pub mod dilation;
pub mod error;
pub mod factorization;
pub mod lifting;
pub mod linalg;
pub mod qalgebra;
pub mod verify;

pub use error::{Error, Result};
pub use linalg::{MatrixOp, Scalar, Subspace, Tolerances};
