//! Minimal dense state-vector engine over `C^dim`.
//!
//! Only what the learners need: uniform superpositions, two-outcome projective
//! measurements against a coordinate projector or a rank-one projector, and
//! computational-basis measurement. Every sampling operation consumes exactly
//! one `f64` draw from the caller's stream.

pub mod exact;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::subset::Subset;

/// Tolerance on the squared norm of a state accepted as normalized.
pub const NORM_TOL: f64 = 1e-9;
/// Branches with smaller squared norm are never sampled.
pub const DEGENERATE_BRANCH: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<Complex64>,
    unnormalized: bool,
}

impl StateVector {
    /// Builds a normalized state; fails if `amps` is empty or its squared norm is
    /// not within [`NORM_TOL`] of one.
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::DimensionMismatch { expected: 1, actual: 0 });
        }
        let state = StateVector { amps, unnormalized: false };
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(state)
    }

    pub fn unnormalized(amps: Vec<Complex64>) -> Self {
        StateVector { amps, unnormalized: true }
    }

    pub fn from_real(amps: &[f64]) -> Result<Self> {
        StateVector::new(amps.iter().map(|&a| Complex64::new(a, 0.0)).collect())
    }

    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::OutOfRange { element: index, n: dim });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector { amps, unnormalized: false })
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn is_flagged_unnormalized(&self) -> bool {
        self.unnormalized
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        check_dim(self.dim(), other.dim())?;
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Rescales to unit norm. Fails on a (numerically) zero vector.
    pub fn normalize(mut self) -> Result<Self> {
        let norm = self.norm_sqr();
        if norm < DEGENERATE_BRANCH {
            return Err(Error::DegenerateBranch(norm));
        }
        let scale = 1.0 / norm.sqrt();
        for a in &mut self.amps {
            *a *= scale;
        }
        self.unnormalized = false;
        Ok(self)
    }

    fn ensure_normalized(&self) -> Result<()> {
        let norm = self.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(())
    }
}

fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch { expected, actual });
    }
    Ok(())
}

/// Uniform superposition over the elements of `x` inside `C^n`.
pub fn uniform_state(x: &Subset, n: usize) -> Result<StateVector> {
    if x.is_empty() {
        return Err(Error::EmptySubset);
    }
    if let Some(&element) = x.elements().iter().find(|&&e| e >= n) {
        return Err(Error::OutOfRange { element, n });
    }
    let amp = Complex64::new(1.0 / (x.len() as f64).sqrt(), 0.0);
    let mut amps = vec![Complex64::new(0.0, 0.0); n];
    for &e in x.elements() {
        amps[e] = amp;
    }
    Ok(StateVector { amps, unnormalized: false })
}

/// The first element of a two-outcome projective measurement; outcome 0
/// corresponds to the projector itself, outcome 1 to its complement.
#[derive(Debug, Clone, PartialEq)]
pub enum Projector {
    /// Projection onto the span of the basis vectors indexed by the subset.
    Subset(Subset),
    /// `|phi><phi|` for a normalized `phi`.
    Rank1(StateVector),
}

impl Projector {
    pub fn subset(x: Subset) -> Self {
        Projector::Subset(x)
    }

    pub fn rank1(phi: StateVector) -> Result<Self> {
        phi.ensure_normalized()?;
        Ok(Projector::Rank1(phi))
    }

    pub fn dim(&self) -> usize {
        match self {
            Projector::Subset(x) => x.ground_size(),
            Projector::Rank1(phi) => phi.dim(),
        }
    }

    /// Unnormalized `P|state>` (outcome 0) or `(I - P)|state>` (outcome 1).
    pub fn apply(&self, state: &StateVector, outcome: u8) -> Result<StateVector> {
        check_dim(self.dim(), state.dim())?;
        let zero = Complex64::new(0.0, 0.0);
        let projected: Vec<Complex64> = match self {
            Projector::Subset(x) => {
                let mask = x.mask();
                state
                    .amps
                    .iter()
                    .zip(mask)
                    .map(|(&a, inside)| if inside == (outcome == 0) { a } else { zero })
                    .collect()
            }
            Projector::Rank1(phi) => {
                let overlap = phi.inner(state)?;
                if outcome == 0 {
                    phi.amps.iter().map(|&p| p * overlap).collect()
                } else {
                    return residual_after_reflection(state, phi);
                }
            }
        };
        Ok(StateVector::unnormalized(projected))
    }

    /// `||P|state>||^2`.
    pub fn probability_zero(&self, state: &StateVector) -> Result<f64> {
        check_dim(self.dim(), state.dim())?;
        Ok(match self {
            Projector::Subset(x) => x.elements().iter().map(|&i| state.amps[i].norm_sqr()).sum(),
            Projector::Rank1(phi) => phi.inner(state)?.norm_sqr(),
        })
    }
}

/// Measures `state` with `(P, I - P)`. Returns the outcome and the renormalized
/// post-measurement state.
pub fn measure<R: Rng + ?Sized>(
    state: &StateVector,
    proj: &Projector,
    rng: &mut R,
) -> Result<(u8, StateVector)> {
    check_dim(proj.dim(), state.dim())?;
    state.ensure_normalized()?;
    let zero_branch = proj.apply(state, 0)?;
    let one_branch = proj.apply(state, 1)?;
    let p0 = zero_branch.norm_sqr();
    let p1 = one_branch.norm_sqr();
    let u: f64 = rng.random();
    let (outcome, branch) = if u * (p0 + p1) < p0 { (0, zero_branch) } else { (1, one_branch) };
    let weight = branch.norm_sqr();
    if weight < DEGENERATE_BRANCH {
        return Err(Error::DegenerateBranch(weight));
    }
    Ok((outcome, branch.normalize()?))
}

/// Computational-basis measurement: index `i` with probability `|amps_i|^2`.
pub fn measure_computational<R: Rng + ?Sized>(state: &StateVector, rng: &mut R) -> Result<usize> {
    state.ensure_normalized()?;
    let probs = state.probabilities();
    let total: f64 = probs.iter().sum();
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last_nonzero = None;
    for (i, &p) in probs.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        acc += p;
        last_nonzero = Some(i);
        if target < acc {
            return Ok(i);
        }
    }
    // Rounding can leave `target` a hair above the final partial sum.
    last_nonzero.ok_or(Error::DegenerateBranch(0.0))
}

/// `(I - |phi><phi|) |state>`, left unnormalized.
pub fn residual_after_reflection(state: &StateVector, phi: &StateVector) -> Result<StateVector> {
    check_dim(phi.dim(), state.dim())?;
    let overlap = phi.inner(state)?;
    Ok(StateVector::unnormalized(
        state.amps.iter().zip(&phi.amps).map(|(&s, &p)| s - p * overlap).collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_for;
    use proptest::prelude::*;

    fn set(n: usize, xs: &[usize]) -> Subset {
        Subset::new(n, xs.iter().copied()).unwrap()
    }

    const TOL: f64 = 1e-12;

    #[test]
    fn uniform_state_examples() {
        let single = uniform_state(&set(2, &[0]), 2).unwrap();
        assert_eq!(single.probabilities(), vec![1.0, 0.0]);
        let pair = uniform_state(&set(2, &[0, 1]), 2).unwrap();
        for a in pair.amplitudes() {
            assert!((a.re - std::f64::consts::FRAC_1_SQRT_2).abs() < TOL);
        }
        assert_eq!(uniform_state(&Subset::empty(3), 3), Err(Error::EmptySubset));
        assert!(matches!(uniform_state(&set(5, &[4]), 3), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn subset_projector_on_uniform_state() {
        // psi_S with S = {0,1,2}, n = 4; projecting onto {0} has probability 1/3.
        let psi = uniform_state(&set(4, &[0, 1, 2]), 4).unwrap();
        let proj = Projector::subset(set(4, &[0]));
        assert!((proj.probability_zero(&psi).unwrap() - 1.0 / 3.0).abs() < TOL);
        let mut seen_zero = false;
        for i in 0..64 {
            let (outcome, residual) = measure(&psi, &proj, &mut stream_for(1, i)).unwrap();
            if outcome == 0 {
                seen_zero = true;
                assert!((residual.probabilities()[0] - 1.0).abs() < TOL);
            }
        }
        assert!(seen_zero);
    }

    #[test]
    fn rank1_projector_complement_probability() {
        // psi_{1,2} measured against psi_{1,2,3}: P[1] = 1 - 2/3.
        let state = uniform_state(&set(4, &[1, 2]), 4).unwrap();
        let phi = uniform_state(&set(4, &[1, 2, 3]), 4).unwrap();
        let proj = Projector::rank1(phi.clone()).unwrap();
        let p0 = proj.probability_zero(&state).unwrap();
        assert!((1.0 - p0 - 1.0 / 3.0).abs() < TOL);
        let residual = residual_after_reflection(&state, &phi).unwrap();
        assert!((residual.norm_sqr() - 1.0 / 3.0).abs() < TOL);
    }

    #[test]
    fn projector_containing_support_is_certain() {
        let x = set(5, &[1, 3]);
        let psi = uniform_state(&x, 5).unwrap();
        let (outcome, residual) =
            measure(&psi, &Projector::subset(x), &mut stream_for(0, 0)).unwrap();
        assert_eq!(outcome, 0);
        assert!((residual.inner(&psi).unwrap().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn computational_measurement() {
        let basis = StateVector::basis(5, 3).unwrap();
        for i in 0..16 {
            assert_eq!(measure_computational(&basis, &mut stream_for(2, i)).unwrap(), 3);
        }
        let pair = uniform_state(&set(3, &[0, 1]), 3).unwrap();
        let trials = 20_000;
        let zeros = (0..trials)
            .filter(|&i| measure_computational(&pair, &mut stream_for(3, i)).unwrap() == 0)
            .count();
        let freq = zeros as f64 / trials as f64;
        assert!((freq - 0.5).abs() < 4.0 * (0.25f64 / trials as f64).sqrt());
    }

    #[test]
    fn residual_of_walk_state_has_expected_weights() {
        // k - j = 2 elements of S inside U, l = 1 uncollected coupon: U = {0,1,2}, C = {2}.
        let n = 4;
        let s_cap_u = uniform_state(&set(n, &[0, 1]), n).unwrap();
        let psi_u = uniform_state(&set(n, &[0, 1, 2]), n).unwrap();
        let phi1 = residual_after_reflection(&s_cap_u, &psi_u).unwrap().normalize().unwrap();
        let probs = phi1.probabilities();
        assert!((probs[2] - 2.0 / 3.0).abs() < TOL);
        assert!((probs[0] - 1.0 / 6.0).abs() < TOL);
        assert!((probs[1] - 1.0 / 6.0).abs() < TOL);
        assert!(probs[3].abs() < TOL);
    }

    #[test]
    fn reflection_fixed_point_and_orthogonal_input() {
        let phi = uniform_state(&set(3, &[0, 1]), 3).unwrap();
        assert!(residual_after_reflection(&phi, &phi).unwrap().norm_sqr() < TOL);
        let orth = StateVector::basis(3, 2).unwrap();
        let out = residual_after_reflection(&orth, &phi).unwrap();
        assert_eq!(out.amplitudes(), orth.amplitudes());
    }

    #[test]
    fn errors() {
        let a = StateVector::basis(3, 0).unwrap();
        let b = StateVector::basis(4, 0).unwrap();
        assert!(matches!(residual_after_reflection(&a, &b), Err(Error::DimensionMismatch { .. })));
        let proj = Projector::subset(set(4, &[0]));
        assert!(matches!(
            measure(&a, &proj, &mut stream_for(0, 0)),
            Err(Error::DimensionMismatch { .. })
        ));
        let drifted = StateVector::unnormalized(vec![Complex64::new(1.1, 0.0)]);
        assert!(matches!(
            measure_computational(&drifted, &mut stream_for(0, 0)),
            Err(Error::NotNormalized(_))
        ));
    }

    fn random_state(raw: &[(f64, f64)]) -> Option<StateVector> {
        let amps: Vec<Complex64> = raw.iter().map(|&(re, im)| Complex64::new(re, im)).collect();
        StateVector::unnormalized(amps).normalize().ok()
    }

    proptest! {
        #[test]
        fn outcome_probabilities_sum_to_one(
            raw in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..9),
            phi_raw in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 9),
            members in prop::collection::vec(any::<bool>(), 9),
        ) {
            let Some(state) = random_state(&raw) else { return Ok(()) };
            let dim = state.dim();
            let x = Subset::new(dim, (0..dim).filter(|&i| members[i])).unwrap();
            let sp = Projector::subset(x);
            let p0 = sp.probability_zero(&state).unwrap();
            let p1 = sp.apply(&state, 1).unwrap().norm_sqr();
            prop_assert!((p0 + p1 - 1.0).abs() < TOL);
            if let Some(phi) = random_state(&phi_raw[..dim]) {
                let rp = Projector::rank1(phi.clone()).unwrap();
                let p0 = rp.probability_zero(&state).unwrap();
                let residual = residual_after_reflection(&state, &phi).unwrap();
                prop_assert!((p0 + residual.norm_sqr() - 1.0).abs() < TOL);
                let overlap = phi.inner(&state).unwrap().norm_sqr();
                prop_assert!((residual.norm_sqr() - (1.0 - overlap)).abs() < TOL);
            }
        }

        #[test]
        fn measurement_is_reproducible(seed in any::<u64>(), members in 1usize..31) {
            let n = 5;
            let s = Subset::new(n, (0..n).filter(|i| members & (1 << i) != 0)).unwrap();
            let psi = uniform_state(&s, n).unwrap();
            let proj = Projector::subset(Subset::new(n, [0, 2]).unwrap());
            let a = measure(&psi, &proj, &mut stream_for(seed, 0));
            let b = measure(&psi, &proj, &mut stream_for(seed, 0));
            prop_assert_eq!(a, b);
        }
    }
}
