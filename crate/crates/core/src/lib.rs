//! Exact optimal polynomial approximants in diagonal reproducing kernel
//! Hilbert spaces on the disk, bidisk and ball.

pub mod closed_forms;
pub mod error;
pub mod filter2d;
pub mod fixtures;
pub mod linalg;
pub mod mpoly;
pub mod opa;
pub mod ortho;
pub mod report;
pub mod scalar;
pub mod shapiro;
pub mod spaces;
pub mod text;
pub mod zero_scan;

pub use error::{Error, Result};
pub use mpoly::{MPoly, MultiIndex};
pub use scalar::{ExactScalar, QuadExt, Rational};
pub use spaces::SpaceSpec;
