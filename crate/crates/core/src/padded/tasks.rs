//! Support sizes of observed signatures and the restricted-ensemble learning
//! task.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use serde::Serialize;

use super::blocks::{block_norm_formula, check_budget};
use super::signature::{for_each_sequence, modular_signature};
use crate::classical::{fill_success_exact, range_size_distribution_exact};
use crate::combinatorics::{binomial, pow_u, ratio};
use crate::error::{Error, Result};
use crate::rng::stream_for;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Mode {
    Exact,
    Sampled { trials: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupportDistribution {
    pub k: usize,
    pub t: usize,
    pub p: u32,
    /// `P[|supp(ms(I, X))| = s]` for `s = 0..=k`.
    pub support: Vec<f64>,
    /// `P[|range(I)| = r]` for `r = 0..=k`, exact.
    pub range: Vec<f64>,
    /// Exact rational form of `support`, in exact mode.
    #[serde(skip)]
    pub support_exact: Option<Vec<BigRational>>,
    /// Number of samples behind `support`, in sampled mode.
    pub samples: Option<usize>,
}

impl SupportDistribution {
    pub fn support_tail(&self, b: usize) -> f64 {
        self.support.iter().skip(b).sum()
    }

    pub fn range_tail(&self, b: usize) -> f64 {
        self.range.iter().skip(b).sum()
    }

    /// Largest `P[|supp| >= b] - P[|range| >= b]` over thresholds. In sampled
    /// mode each sampled tail is allowed three standard errors of slack.
    pub fn dominance_gap(&self) -> f64 {
        (0..=self.k)
            .map(|b| {
                let tail = self.support_tail(b);
                let slack = match self.samples {
                    Some(n) => 3.0 * (tail * (1.0 - tail) / n as f64).sqrt(),
                    None => 0.0,
                };
                tail - slack - self.range_tail(b)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

fn to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Distribution of the signature support size for `I` uniform on `S^t`,
/// `X` uniform on `N_p^t` and `|S| = k`.
pub fn support_size_distribution(k: usize, t: usize, p: u32, mode: Mode) -> Result<SupportDistribution> {
    if k == 0 || p < 2 {
        return Err(Error::InvalidParams(format!("need k >= 1 and p >= 2, got k={k}, p={p}")));
    }
    let range: Vec<f64> = range_size_distribution_exact(k, t).iter().map(to_f64).collect();
    let mut counts = vec![0u64; k + 1];
    let dist = match mode {
        Mode::Exact => {
            check_budget(k, t, p)?;
            let mut x = vec![0u32; t];
            for_each_sequence(k, t, |i| {
                for_each_sequence(p as usize, t, |pads| {
                    for (slot, &v) in x.iter_mut().zip(pads) {
                        *slot = v as u32;
                    }
                    let b = modular_signature(i, &x, k, p).expect("in range");
                    counts[b.support_size()] += 1;
                });
            });
            let total = pow_u(k as u64, t as u32) * pow_u(p as u64, t as u32);
            let exact: Vec<BigRational> = counts.iter().map(|&c| ratio(BigUint::from(c), total.clone())).collect();
            SupportDistribution {
                k,
                t,
                p,
                support: exact.iter().map(to_f64).collect(),
                range,
                support_exact: Some(exact),
                samples: None,
            }
        }
        Mode::Sampled { trials, seed } => {
            if trials == 0 {
                return Err(Error::InvalidParams("sampled mode needs at least one trial".into()));
            }
            let mut rng = stream_for(seed, 0);
            let mut i = vec![0usize; t];
            let mut x = vec![0u32; t];
            for _ in 0..trials {
                for r in 0..t {
                    i[r] = rng.random_range(0..k);
                    x[r] = rng.random_range(0..p);
                }
                counts[modular_signature(&i, &x, k, p)?.support_size()] += 1;
            }
            SupportDistribution {
                k,
                t,
                p,
                support: counts.iter().map(|&c| c as f64 / trials as f64).collect(),
                range,
                support_exact: None,
                samples: Some(trials),
            }
        }
    };
    Ok(dist)
}

/// Exact support-size distribution from the block norm formula: every
/// signature with a given support of size `s` has the same block norm, and
/// `C(k, s) (p-1)^s` signatures have support size `s`.
pub fn support_size_distribution_closed_form(k: usize, t: usize, p: u32) -> Vec<BigRational> {
    let total = pow_u(k as u64, t as u32) * pow_u(p as u64, t as u32);
    (0..=k)
        .map(|s| {
            let count = binomial(k as u64, s as u64)
                * pow_u(p as u64 - 1, s as u32)
                * block_norm_formula(s, k, t, p);
            ratio(count, total.clone())
        })
        .collect()
}

/// Success probability of the best strategy on the restricted ensemble:
/// observe `b`, then output a uniformly random size-`k` superset of
/// `supp(b)`. Success means at most `l` elements outside `S`.
pub fn t2_optimal_success_exact(n: usize, k: usize, l: usize, t: usize, p: u32) -> Result<BigRational> {
    if k == 0 || k > n || p < 2 {
        return Err(Error::InvalidParams(format!("need 1 <= k <= n and p >= 2, got n={n}, k={k}, p={p}")));
    }
    let mut total = BigRational::zero();
    for (s, prob) in support_size_distribution_closed_form(k, t, p).into_iter().enumerate() {
        if !prob.is_zero() {
            total += prob * fill_success_exact(n, k, l, s)?;
        }
    }
    Ok(total)
}

/// [`t2_optimal_success_exact`] in floating point, with the support-size
/// distribution taken from `mode`.
pub fn t2_optimal_success(n: usize, k: usize, l: usize, t: usize, p: u32, mode: Mode) -> Result<f64> {
    match mode {
        Mode::Exact => Ok(to_f64(&t2_optimal_success_exact(n, k, l, t, p)?)),
        Mode::Sampled { .. } => {
            if k > n {
                return Err(Error::InvalidParams(format!("need k <= n, got n={n}, k={k}")));
            }
            let dist = support_size_distribution(k, t, p, mode)?;
            let mut total = 0.0;
            for (s, prob) in dist.support.iter().enumerate() {
                if *prob > 0.0 {
                    total += prob * to_f64(&fill_success_exact(n, k, l, s)?);
                }
            }
            Ok(total)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statevec::exact::rational;

    #[test]
    fn single_sample_example() {
        let d = support_size_distribution(2, 1, 2, Mode::Exact).unwrap();
        assert_eq!(d.support, vec![0.5, 0.5, 0.0]);
        assert_eq!(d.range, vec![0.0, 1.0, 0.0]);
        assert!(d.dominance_gap() <= 0.0);
        assert_eq!(d.support_tail(0), 1.0);
        assert_eq!(d.range_tail(0), 1.0);
    }

    #[test]
    fn closed_form_matches_enumeration() {
        for k in 1..=4 {
            for t in 0..=4 {
                for p in [2u32, 3, 5] {
                    let d = support_size_distribution(k, t, p, Mode::Exact).unwrap();
                    assert_eq!(d.support_exact.clone().unwrap(), support_size_distribution_closed_form(k, t, p));
                    assert!(d.dominance_gap() <= 1e-15);
                }
            }
        }
    }

    #[test]
    fn large_pad_approaches_range() {
        let d = support_size_distribution(4, 3, 101, Mode::Sampled { trials: 40_000, seed: 5 }).unwrap();
        let gap = (d.support[3] - d.range[3]).abs();
        assert!(gap < 0.05, "gap {gap}");
        assert!(d.dominance_gap() <= 0.0);
    }

    #[test]
    fn t2_trivial_cases() {
        assert_eq!(t2_optimal_success_exact(5, 5, 0, 2, 3).unwrap(), rational(1, 1));
        assert_eq!(fill_success_exact(11, 6, 1, 6).unwrap(), rational(1, 1));
        let exact = t2_optimal_success(11, 6, 1, 3, 3, Mode::Exact).unwrap();
        let sampled = t2_optimal_success(11, 6, 1, 3, 3, Mode::Sampled { trials: 50_000, seed: 9 }).unwrap();
        assert!((exact - sampled).abs() < 0.01);
    }
}
