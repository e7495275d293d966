//! Injectivity diagnostics and inversion for demand mappings that satisfy
//! the law of demand.
//!
//! The crate is organized bottom-up:
//!
//! * [`domain`]: open convex domains (boxes ∩ half-spaces), segment clipping
//!   and seeded sampling.
//! * [`systems`]: the demand-system catalog (linear, cubic-linear, logit,
//!   indicator, quasilinear argmax, changes of variables, simulated ARUM).
//! * [`differential`]: Jacobians, directional derivatives and small matrix
//!   tests (quasi-definiteness, null directions, P-matrices).
//! * [`diagnostics`]: every testable condition as a [`Verdict`] with
//!   replayable [`Witness`]es.
//! * [`inversion`]: solving `Q(u) = y` and reporting solution multiplicity.
//! * [`config`] and [`report`]: the JSON run specification and report used
//!   by the `demandlens` CLI.
//!
//! A passing verdict is numerical evidence at the sampled resolution, never
//! a proof.

pub mod config;
pub mod diagnostics;
pub mod differential;
pub mod domain;
pub mod error;
pub mod inversion;
pub mod json;
pub mod linalg;
pub mod report;
pub mod systems;

pub use config::{load_config, RunSpec};
pub use diagnostics::{ConstancySegment, Status, Verdict, Witness};
pub use domain::{Domain, Segment};
pub use error::{Error, Result};
pub use inversion::{InversionResult, Multiplicity};
pub use linalg::Matrix;
pub use report::{run, Report};
pub use systems::DemandSystem;
