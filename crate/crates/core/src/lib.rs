//! Amplitude-damping dynamics of a qubit inside a tripartite purification,
//! the bipartite entanglement quantities that stay conserved along it, and an
//! emulation of the photonic experiment that measures them.
//!
//! Module map:
//! - [`qstate`]: dense states, partial traces, purity and Schmidt weight.
//! - [`channel`]: the damping isometry and closed-form reduced matrices.
//! - [`invariants`]: `W` functions, regimes and the conservation check.
//! - [`tripartite`]: the `M`-`S`-`R` flow and sweeps.
//! - [`ghz`]: the many-qubit GHZ generalization.
//! - [`experiment`]: source model, interferometer, finite-shot estimation.

pub mod channel;
pub mod error;
pub mod experiment;
pub mod ghz;
pub mod invariants;
pub mod qstate;
pub mod tripartite;

pub use error::{Error, Result};
