//! Analytic oracle for the complement learner's random walk.
//!
//! While learning the complement, the learner's distance from the target is
//! captured by two counters: `j`, the number of rogue coupons (elements of `S`
//! wrongly placed in the guess), and `l`, the number of complement elements not
//! yet collected. One iteration changes at most one of them by one.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qcc::{sample_budget, Branch, QccParams};

/// `(J_t, L_t)` together with the problem sizes it lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct WalkState {
    pub k: usize,
    pub m: usize,
    pub j: usize,
    pub l: usize,
}

impl WalkState {
    pub fn new(k: usize, m: usize, j: usize, l: usize) -> Result<Self> {
        if k == 0 || j > k || l > m {
            return Err(Error::InvalidState { k, j, l });
        }
        Ok(WalkState { k, m, j, l })
    }

    /// `K_t = J_t + L_t`.
    pub fn distance(&self) -> usize {
        self.j + self.l
    }

    pub fn is_solved(&self) -> bool {
        self.j == 0 && self.l == 0
    }
}

/// One-step event probabilities of the complement learner.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitionDistribution<T = f64> {
    pub rogue_removed: T,
    pub rogue_added: T,
    pub coupon_collected: T,
    pub no_op: T,
}

impl<T: Clone> TransitionDistribution<T> {
    /// Probabilities in [`crate::qcc::Event`] order.
    pub fn as_array(&self) -> [T; 4] {
        [
            self.rogue_removed.clone(),
            self.rogue_added.clone(),
            self.coupon_collected.clone(),
            self.no_op.clone(),
        ]
    }
}

fn check_jl(k: usize, j: usize, l: usize) -> Result<()> {
    if k == 0 || j > k {
        return Err(Error::InvalidState { k, j, l });
    }
    Ok(())
}

/// Exact transition probabilities from `(j, l)`:
///
/// * rogue removed: `j/k`
/// * rogue added: `(k-j) l^2 / (k (k-j+l)^2)`
/// * coupon collected: `(k-j)^2 l / (k (k-j+l)^2)`
/// * no-op: the remainder.
///
/// At `j = k, l = 0` the shared denominator vanishes together with both
/// numerators; the walk then removes a rogue coupon with certainty.
pub fn transition_distribution_exact(k: usize, j: usize, l: usize) -> Result<TransitionDistribution<BigRational>> {
    check_jl(k, j, l)?;
    let q = |num: usize, den: usize| BigRational::new(BigInt::from(num), BigInt::from(den));
    let rogue_removed = q(j, k);
    let (rogue_added, coupon_collected) = if k - j + l == 0 {
        (BigRational::zero(), BigRational::zero())
    } else {
        let free = k - j;
        let den = k * (free + l) * (free + l);
        (q(free * l * l, den), q(free * free * l, den))
    };
    let no_op = BigRational::one() - &rogue_removed - &rogue_added - &coupon_collected;
    Ok(TransitionDistribution { rogue_removed, rogue_added, coupon_collected, no_op })
}

/// Floating-point version of [`transition_distribution_exact`].
pub fn transition_distribution(k: usize, j: usize, l: usize) -> Result<TransitionDistribution> {
    check_jl(k, j, l)?;
    let (kf, jf, lf) = (k as f64, j as f64, l as f64);
    let rogue_removed = jf / kf;
    let (rogue_added, coupon_collected) = if k - j + l == 0 {
        (0.0, 0.0)
    } else {
        let free = kf - jf;
        let den = kf * (free + lf) * (free + lf);
        (free * lf * lf / den, free * free * lf / den)
    };
    let no_op = (1.0 - rogue_removed - rogue_added - coupon_collected).max(0.0);
    Ok(TransitionDistribution { rogue_removed, rogue_added, coupon_collected, no_op })
}

/// One-step contraction factor `1 - (1/k)(1 - 3m/n)`.
pub fn contraction_factor(n: usize, k: usize) -> f64 {
    let m = (n - k) as f64;
    1.0 - (1.0 - 3.0 * m / n as f64) / k as f64
}

/// `E[K_{t+1} | J_t = j, L_t = l] = r + P[rogue added] - P[rogue removed] - P[coupon collected]`
/// with `r = j + l`. Also checks the one-step envelope
/// `E[K_{t+1} | j, l] <= r (1 - (1/k)(1 - 3m/n))`.
pub fn expected_k_next(k: usize, n: usize, j: usize, l: usize) -> Result<f64> {
    let state = state_for(n, k, j, l)?;
    let d = transition_distribution(k, j, l)?;
    let r = state.distance() as f64;
    let next = r + d.rogue_added - d.rogue_removed - d.coupon_collected;
    let envelope = r * contraction_factor(n, k);
    if next > envelope + 1e-12 * envelope.max(1.0) {
        return Err(Error::InvariantViolation(format!(
            "E[K'] = {next} exceeds envelope {envelope} at j={j}, l={l}, k={k}, n={n}"
        )));
    }
    Ok(next)
}

pub fn expected_k_next_exact(k: usize, n: usize, j: usize, l: usize) -> Result<BigRational> {
    let state = state_for(n, k, j, l)?;
    let d = transition_distribution_exact(k, j, l)?;
    let r = BigRational::from_integer(BigInt::from(state.distance()));
    Ok(r + d.rogue_added - d.rogue_removed - d.coupon_collected)
}

fn state_for(n: usize, k: usize, j: usize, l: usize) -> Result<WalkState> {
    if k > n {
        return Err(Error::InvalidParams(format!("k={k} exceeds n={n}")));
    }
    WalkState::new(k, n - k, j, l)
}

pub fn in_complement_regime(n: usize, k: usize) -> bool {
    let m = (n - k) as f64;
    3.0 * m * (std::f64::consts::E * m).ln() <= n as f64
}

/// Envelope `m (1 - (1/k)(1 - 3m/n))^t` on `E[K_t]` in the complement regime.
pub fn expected_k_bound(n: usize, k: usize, t: usize) -> Result<f64> {
    if k == 0 || k >= n {
        return Err(Error::InvalidParams(format!("need 0 < k < n, got n={n}, k={k}")));
    }
    if !in_complement_regime(n, k) {
        return Err(Error::RegimeViolation { n, k });
    }
    Ok((n - k) as f64 * contraction_factor(n, k).powi(t as i32))
}

/// Exact `E[K_t]` for `t = 0..=steps`, obtained by propagating the full
/// distribution over `(j, l)` from `(0, m)`.
pub fn expected_k_trajectory(n: usize, k: usize, steps: usize) -> Result<Vec<f64>> {
    if k == 0 || k >= n {
        return Err(Error::InvalidParams(format!("need 0 < k < n, got n={n}, k={k}")));
    }
    let m = n - k;
    let width = m + 1;
    let mut table = Vec::with_capacity((k + 1) * width);
    for j in 0..=k {
        for l in 0..=m {
            table.push(transition_distribution(k, j, l)?);
        }
    }
    let mut mass = vec![0.0; (k + 1) * width];
    mass[m] = 1.0;
    let expectation = |mass: &[f64]| -> f64 {
        mass.iter().enumerate().map(|(idx, &p)| p * (idx / width + idx % width) as f64).sum()
    };
    let mut out = Vec::with_capacity(steps + 1);
    out.push(expectation(&mass));
    for _ in 0..steps {
        let mut next = vec![0.0; mass.len()];
        for (idx, &p) in mass.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let (j, l) = (idx / width, idx % width);
            let d = &table[idx];
            if j > 0 {
                next[idx - width] += p * d.rogue_removed;
            }
            if d.rogue_added > 0.0 {
                next[idx + width] += p * d.rogue_added;
            }
            if l > 0 {
                next[idx - 1] += p * d.coupon_collected;
            }
            next[idx] += p * d.no_op;
        }
        mass = next;
        out.push(expectation(&mass));
    }
    Ok(out)
}

/// Which case of the lower bound applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LowerBoundCase {
    /// `1 <= m <= delta n` and `m ln m <= c0 n / 20`: bound `k ln m + c0 n`.
    SmallM,
    /// Otherwise: leading terms `k ln k - k ln ln k` of a bound with an
    /// unspecified `-O(k)` correction.
    General,
}

/// Upper and lower sample-complexity figures for one `(n, k, delta)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    pub n: usize,
    pub k: usize,
    pub delta: f64,
    pub branch: Branch,
    pub upper_samples: usize,
    pub lower_case: LowerBoundCase,
    pub lower_value: f64,
    /// `false` for [`LowerBoundCase::General`]: the value is a reference curve,
    /// not a certified bound.
    pub lower_certified: bool,
    pub c0: f64,
}

impl BoundsReport {
    /// Reference curve for the expected residual distance after `t` samples: the
    /// complement-regime envelope on `E[K_t]`, or the expected number of
    /// uncollected coupons `k (1 - 1/k)^t` when measuring directly.
    pub fn expected_k_curve(&self, t: usize) -> f64 {
        match self.branch {
            Branch::Complement => expected_k_bound(self.n, self.k, t).unwrap_or(f64::NAN),
            Branch::Classical => crate::classical::expected_uncollected(self.k, t),
        }
    }
}

/// `c0 = (1/2) ln((1 - delta) / (32 delta))`.
pub fn lower_bound_constant(delta: f64) -> f64 {
    0.5 * ((1.0 - delta) / (32.0 * delta)).ln()
}

pub fn lower_bound_reference(n: usize, k: usize, delta: f64) -> Result<BoundsReport> {
    if !(delta > 0.0 && delta <= 1.0 / 40.0) {
        return Err(Error::DeltaOutOfRange(delta));
    }
    let params = QccParams::new(n, k, delta)?;
    let (branch, upper_samples) = sample_budget(&params);
    let c0 = lower_bound_constant(delta);
    let (m, nf, kf) = ((n - k) as f64, n as f64, k as f64);
    let small_m = m >= 1.0 && m <= delta * nf && m * m.ln() <= c0 * nf / 20.0;
    let (lower_case, lower_value) = if small_m {
        (LowerBoundCase::SmallM, kf * m.ln() + c0 * nf)
    } else {
        (LowerBoundCase::General, kf * kf.ln() - kf * kf.ln().ln())
    };
    Ok(BoundsReport {
        n,
        k,
        delta,
        branch,
        upper_samples,
        lower_case,
        lower_value,
        lower_certified: lower_case == LowerBoundCase::SmallM,
        c0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statevec::exact::rational;

    #[test]
    fn transition_examples() {
        let d = transition_distribution_exact(2, 0, 1).unwrap();
        assert_eq!(d.as_array(), [rational(0, 1), rational(1, 9), rational(2, 9), rational(6, 9)]);
        let d = transition_distribution_exact(5, 0, 0).unwrap();
        assert_eq!(d.as_array(), [rational(0, 1), rational(0, 1), rational(0, 1), rational(1, 1)]);
        let d = transition_distribution_exact(3, 1, 0).unwrap();
        assert_eq!(d.as_array(), [rational(1, 3), rational(0, 1), rational(0, 1), rational(2, 3)]);
        let d = transition_distribution_exact(2, 1, 1).unwrap();
        assert_eq!(d.as_array(), [rational(1, 2), rational(1, 8), rational(1, 8), rational(1, 4)]);
        let d = transition_distribution_exact(4, 4, 0).unwrap();
        assert_eq!(d.as_array(), [rational(1, 1), rational(0, 1), rational(0, 1), rational(0, 1)]);
        assert!(matches!(transition_distribution(3, 4, 0), Err(Error::InvalidState { .. })));
    }

    #[test]
    fn distributions_sum_to_one_on_grid() {
        for k in 1..=12 {
            for j in 0..=k {
                for l in 0..=6 {
                    let exact = transition_distribution_exact(k, j, l).unwrap();
                    assert!(exact.as_array().iter().all(|p| *p >= BigRational::zero()));
                    let sum: BigRational = exact.as_array().into_iter().sum();
                    assert_eq!(sum, BigRational::one());
                    let float: f64 = transition_distribution(k, j, l).unwrap().as_array().iter().sum();
                    assert!((float - 1.0).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn expected_next_matches_distribution_exactly() {
        for k in 1..=12 {
            for m in 1..=6 {
                let n = k + m;
                for j in 0..=k {
                    for l in 0..=m {
                        let d = transition_distribution_exact(k, j, l).unwrap();
                        let r = BigRational::from_integer(BigInt::from(j + l));
                        let mut mean = BigRational::zero();
                        // Successor distances for removed, added, collected, no-op.
                        let successors = [
                            if j > 0 { r.clone() - BigRational::one() } else { r.clone() },
                            r.clone() + BigRational::one(),
                            if l > 0 { r.clone() - BigRational::one() } else { r.clone() },
                            r.clone(),
                        ];
                        for (p, next) in d.as_array().into_iter().zip(successors) {
                            mean += p * next;
                        }
                        assert_eq!(mean, expected_k_next_exact(k, n, j, l).unwrap());
                        expected_k_next(k, n, j, l).unwrap();
                    }
                }
            }
        }
    }

    #[test]
    fn expected_next_examples() {
        assert_eq!(expected_k_next(3, 5, 0, 0).unwrap(), 0.0);
        assert_eq!(expected_k_next_exact(2, 3, 0, 1).unwrap(), rational(8, 9));
        assert!((expected_k_next(2, 3, 0, 1).unwrap() - 8.0 / 9.0).abs() < 1e-15);
        // With l = 0 only rogue removal is active: E[K'] = r (1 - 1/k).
        for k in 1..=6 {
            for j in 0..=k {
                assert_eq!(
                    expected_k_next_exact(k, k + 2, j, 0).unwrap(),
                    rational(j as i64, 1) * (BigRational::one() - rational(1, k as i64))
                );
            }
        }
    }

    #[test]
    fn bound_examples() {
        assert_eq!(expected_k_bound(100, 98, 0).unwrap(), 2.0);
        let delta: f64 = 0.1;
        let ell = 98.0 * 2f64.ln() + 98.0 * (std::f64::consts::E / delta).ln();
        assert!(expected_k_bound(100, 98, ell.ceil() as usize).unwrap() <= delta);
        assert!(matches!(expected_k_bound(10, 8, 3), Err(Error::RegimeViolation { .. })));
        // m = 1, t = k: value <= exp(-(1 - 3/n)), which decreases as n grows.
        let mut prev = f64::INFINITY;
        for n in 4..200 {
            let v = expected_k_bound(n, n - 1, n - 1).unwrap();
            let env = (-(1.0 - 3.0 / n as f64)).exp();
            assert!(v <= env + 1e-15);
            assert!(env < prev);
            prev = env;
        }
    }

    #[test]
    fn trajectory_stays_under_envelope() {
        for (n, k) in [(4, 3), (10, 9), (20, 18), (30, 27), (60, 57), (100, 98)] {
            if !in_complement_regime(n, k) {
                continue;
            }
            let traj = expected_k_trajectory(n, k, 400).unwrap();
            for (t, e) in traj.iter().enumerate() {
                assert!(*e <= expected_k_bound(n, k, t).unwrap() + 1e-12, "n={n} k={k} t={t}");
            }
        }
    }

    #[test]
    fn lower_bound_cases() {
        let c0 = lower_bound_constant(1.0 / 40.0);
        assert!((c0 - 0.5 * 1.21875f64.ln()).abs() < 1e-15);
        assert!((c0 - 0.09891).abs() < 1e-5);

        let n = 100_000;
        let r = lower_bound_reference(n, n - 10, 1.0 / 40.0).unwrap();
        assert_eq!(r.lower_case, LowerBoundCase::SmallM);
        assert!(r.lower_certified);
        assert!((r.lower_value - ((n - 10) as f64 * 10f64.ln() + c0 * n as f64)).abs() < 1e-6);

        let r = lower_bound_reference(100, 50, 1.0 / 40.0).unwrap();
        assert_eq!(r.lower_case, LowerBoundCase::General);
        assert!(!r.lower_certified);
        assert!(matches!(lower_bound_reference(100, 50, 0.05), Err(Error::DeltaOutOfRange(_))));
    }
}
