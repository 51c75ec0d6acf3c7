//! The padded coupon collector ensemble.
//!
//! Each sample is a uniformly random element `i` of the hidden set `S`
//! together with a pad `f(i)` drawn from a secret uniformly random function
//! `f: [n] -> Z_p`. Averaging over `f` and conjugating the pad registers by the
//! Fourier transform splits the `t`-sample state into orthogonal blocks indexed
//! by a [`ModularSignature`]. This module enumerates those blocks exactly,
//! checks their counting identities, and reconstructs the ensembles densely on
//! tiny instances.

pub mod blocks;
pub mod ensemble;
pub mod signature;
pub mod tasks;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use blocks::{
    block_norms, decay_sweep, fidelity_and_distance, fidelity_by_support_size, verify_counting_identities,
    BlockFidelity, BlockNorms, BlockTable, CountingReport, DecayReport, Identity, Violation,
};
pub use ensemble::{build_ensembles, pure_state_distance_eigen, DensityMatrix, Ensembles};
pub use signature::{modular_signature, ModularSignature};
pub use tasks::{support_size_distribution, t2_optimal_success, t2_optimal_success_exact, Mode, SupportDistribution};

/// Upper limit on `k^t p^t` for exhaustive enumeration.
pub const ENUMERATION_BUDGET: f64 = 1e7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PaddedParams {
    pub n: usize,
    pub k: usize,
    pub t: usize,
    pub p: u32,
    pub l: usize,
    pub delta: f64,
}

impl PaddedParams {
    pub fn new(n: usize, k: usize, t: usize, p: u32, l: usize, delta: f64) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::InvalidParams(format!("need 1 <= k <= n, got n={n}, k={k}")));
        }
        if t == 0 {
            return Err(Error::InvalidParams("need t >= 1".into()));
        }
        if p < 2 {
            return Err(Error::InvalidParams(format!("need p >= 2, got {p}")));
        }
        if !(delta > 0.0 && delta < 0.25) {
            return Err(Error::DeltaOutOfRange(delta));
        }
        Ok(PaddedParams { n, k, t, p, l, delta })
    }

    pub fn within_enumeration_budget(&self) -> bool {
        (self.k as f64).powi(self.t as i32) * (self.p as f64).powi(self.t as i32) <= ENUMERATION_BUDGET
    }

    pub fn within_dense_budget(&self) -> bool {
        (self.n as f64 * self.p as f64).powi(self.t as i32) <= ensemble::MAX_DENSE_DIM as f64
    }

    /// `sqrt(k^t / p)`.
    pub fn error_term(&self) -> f64 {
        ((self.k as f64).powi(self.t as i32) / self.p as f64).sqrt()
    }
}

/// Sample threshold below which no learner succeeds with probability
/// `1 - delta`: `k ln((k+1)/(10l+1)) + k ln(1 - 4 delta)`.
pub fn t0_threshold(k: usize, l: usize, delta: f64) -> Result<f64> {
    if l < 1 {
        return Err(Error::Domain(format!("threshold needs l >= 1, got {l}")));
    }
    if !(delta > 0.0 && delta < 0.25) {
        return Err(Error::Domain(format!("threshold needs delta in (0, 1/4), got {delta}")));
    }
    let kf = k as f64;
    Ok(kf * ((kf + 1.0) / (10.0 * l as f64 + 1.0)).ln() + kf * (1.0 - 4.0 * delta).ln())
}
