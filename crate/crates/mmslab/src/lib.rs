//! Finite-scale laboratory for 1-uniform metric measure spaces.

pub mod error;
pub mod lip_dual;
pub mod mms_core;
pub mod model_spaces;

pub use error::{Error, Result};
pub mod geoprobe;
pub mod besicovitch;
pub mod dstar;
pub mod report;
pub mod acceptance;
