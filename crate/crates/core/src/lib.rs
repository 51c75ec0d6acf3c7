//! Simulation and verification laboratory for coupon collector learning problems.
//!
//! The crate covers three families of processes:
//!
//! * the quantum coupon collector learner ([`qcc`]), simulated either on an exact
//!   state-vector engine ([`statevec`]) or by sampling its derived one-step
//!   distribution, together with the analytic random-walk oracle ([`markov`]);
//! * classical coupon collection, the hypergeometric random-guess bound and the
//!   mismatch-tolerant set estimation task ([`classical`]);
//! * the padded quantum coupon collector ensemble: modular signatures, block
//!   norms, counting identities, fidelity bounds and density-matrix
//!   reconstruction ([`padded`]).
//!
//! [`harness`] turns all of the above into seeded, reproducible experiments that
//! emit CSV or JSON rows.
//!
//! Ground sets are zero-based: `[n]` is `{0, 1, ..., n-1}` throughout.

pub mod classical;
pub mod combinatorics;
pub mod error;
pub mod harness;
pub mod markov;
pub mod padded;
pub mod qcc;
pub mod rng;
pub mod statevec;
pub mod subset;

pub use error::{Error, Result};
pub use markov::{BoundsReport, LowerBoundCase, TransitionDistribution, WalkState};
pub use padded::{BlockTable, DensityMatrix, ModularSignature, PaddedParams};
pub use qcc::{Branch, Event, LearnerState, QccParams, TrialRecord};
pub use rng::{mix64, stream_for, RandomStream};
pub use statevec::{Projector, StateVector};
pub use subset::Subset;
