//! Simulation of singlet-state measurement statistics with a one-parameter
//! family of (possibly signaling) nonlocal boxes `S^p`, together with the
//! information-theoretic bookkeeping that goes with it: local output
//! randomness `R(p) = H(p)`, the box's communication capacity
//! `C(p) = 1 - H(p)`, their ensemble averages, and the average output entropy
//! of a partially polarized local state.
//!
//! Module map:
//!
//! * [`boxes`]: exact 16-entry box tables, sampling, convex decomposition,
//!   signaling and CHSH diagnostics.
//! * [`protocol`]: the shared-randomness protocol on the sphere and one-round
//!   execution.
//! * [`info`]: entropies, channel mutual information and capacity, ensemble
//!   averages, averaged entropy for mixed local states, cone cost.
//! * [`harness`]: seeded, parallel Monte Carlo estimation and sweeps.
//! * [`cli`]: the command-line surface (also usable in-process).

pub mod boxes;
pub mod cli;
pub mod error;
pub mod harness;
pub mod info;
pub mod protocol;
pub mod quadrature;
pub mod rng;

pub use boxes::{BoxTable, Decomposition, SpParameter};
pub use error::{Error, Result};
pub use harness::{CorrelationEstimate, MonteCarlo, SweepResult};
pub use info::{ComplementarityReport, EnsembleDistribution, PolarizationPurity};
pub use protocol::{HiddenVariablePair, RoundTranscript, UnitVector};

/// A classical bit. Always 0 or 1.
pub type Bit = u8;
