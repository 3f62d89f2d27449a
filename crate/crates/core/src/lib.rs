//! Exact entanglement dynamics of two two-level atoms, each coupled to its
//! own leaky single-mode cavity, and a deterministic W-state preparation
//! built on top of it.

pub mod amplitudes;
pub mod entanglement;
pub mod error;
pub mod events;
pub mod oracle;
pub mod protocol;
pub mod quantum_state;
pub mod roots;

pub use error::{Error, Result};
