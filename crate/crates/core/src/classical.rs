//! Classical coupon collection and the set-estimation task with mismatches.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::seq::index;
use rand::Rng;
use serde::Serialize;

use crate::combinatorics::{binomial, pow_u, ratio, surjection_count};
use crate::error::{Error, Result};

/// Result of drawing `samples_used` uniform coupons from a size-`k` set
/// labelled `0..k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CollectionOutcome {
    pub distinct_count: usize,
    pub samples_used: usize,
    pub observed: Vec<usize>,
}

pub fn collect<R: Rng + ?Sized>(k: usize, t: usize, rng: &mut R) -> Result<CollectionOutcome> {
    if k == 0 {
        return Err(Error::InvalidParams("coupon set must be nonempty".into()));
    }
    let mut seen = vec![false; k];
    for _ in 0..t {
        seen[rng.random_range(0..k)] = true;
    }
    let observed: Vec<usize> = (0..k).filter(|&i| seen[i]).collect();
    Ok(CollectionOutcome { distinct_count: observed.len(), samples_used: t, observed })
}

/// `k (1 - 1/k)^t`, the expected number of coupons still missing after `t` draws.
pub fn expected_uncollected(k: usize, t: usize) -> f64 {
    let k = k as f64;
    k * (1.0 - 1.0 / k).powf(t as f64)
}

/// Hoeffding's tail bound `exp(-2 lambda^2 / t)` for a hypergeometric count
/// deviating from its mean by `lambda` after `t` draws.
pub fn hypergeom_hoeffding(t: usize, lambda: f64) -> Result<f64> {
    if t == 0 || lambda < 0.0 {
        return Err(Error::Domain(format!("need t >= 1 and lambda >= 0, got t={t}, lambda={lambda}")));
    }
    Ok((-2.0 * lambda * lambda / t as f64).exp())
}

/// Exact probability that a uniformly random size-`l` subset of a ground set of
/// size `l + 5m` shares at least `l - m` elements with a fixed size-`l` subset:
/// `sum_{i >= l-m} C(l, i) C(5m, l-i) / C(l+5m, l)`.
pub fn guess_success_prob_exact(l: usize, m: usize) -> Result<BigRational> {
    if l == 0 || m == 0 {
        return Err(Error::Domain(format!("need l, m >= 1, got l={l}, m={m}")));
    }
    let (l64, rest) = (l as u64, 5 * m as u64);
    let lo = l.saturating_sub(m) as u64;
    let num = (lo..=l64).map(|i| binomial(l64, i) * binomial(rest, l64 - i)).sum();
    Ok(ratio(num, binomial(l64 + rest, l64)))
}

/// Exact distribution of the number of distinct coupons after `t` draws from
/// `k`: `P[r] = C(k, r) n_{t,r} / k^t`.
pub fn range_size_distribution_exact(k: usize, t: usize) -> Vec<BigRational> {
    let total = pow_u(k as u64, t as u32);
    (0..=k)
        .map(|r| ratio(binomial(k as u64, r as u64) * surjection_count(r as u64, t as u32), total.clone()))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct T3Config {
    pub n: usize,
    pub k: usize,
    /// Allowed mismatches `|S' \ S|`.
    pub l: usize,
    /// Number of samples.
    pub t: usize,
}

impl T3Config {
    pub fn new(n: usize, k: usize, l: usize, t: usize) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::InvalidParams(format!("need 1 <= k <= n, got k={k}, n={n}")));
        }
        Ok(T3Config { n, k, l, t })
    }

    /// The `n = k + 5l` instance used by the lower-bound argument.
    pub fn padded_default(k: usize, l: usize, t: usize) -> Result<Self> {
        T3Config::new(k + 5 * l, k, l, t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct T3Outcome {
    pub success: bool,
    pub mismatches: usize,
    pub distinct_seen: usize,
}

/// One round of the set-estimation task: hidden `S` uniform among size-`k`
/// subsets, `t` uniform samples from `S`, then the estimate is the observed
/// elements plus a uniformly random fill from the unseen part of `[n]`.
pub fn t3_trial<R: Rng + ?Sized>(cfg: &T3Config, rng: &mut R) -> T3Outcome {
    let hidden: Vec<usize> = index::sample(rng, cfg.n, cfg.k).into_vec();
    let mut in_s = vec![false; cfg.n];
    for &x in &hidden {
        in_s[x] = true;
    }
    let mut observed = vec![false; cfg.n];
    let mut distinct = 0;
    for _ in 0..cfg.t {
        let x = hidden[rng.random_range(0..cfg.k)];
        if !observed[x] {
            observed[x] = true;
            distinct += 1;
        }
    }
    let unseen: Vec<usize> = (0..cfg.n).filter(|&x| !observed[x]).collect();
    let fill = index::sample(rng, unseen.len(), cfg.k - distinct);
    let mismatches = fill.iter().filter(|&i| !in_s[unseen[i]]).count();
    T3Outcome { success: mismatches <= cfg.l, mismatches, distinct_seen: distinct }
}

/// Probability that completing `s` known elements of `S` with a uniformly random
/// fill of `k - s` elements from the other `n - s` introduces at most `l`
/// mismatches: `sum_{j <= l} C(k-s, k-s-j) C(n-k, j) / C(n-s, k-s)`.
pub fn fill_success_exact(n: usize, k: usize, l: usize, s: usize) -> Result<BigRational> {
    if s > k || k > n {
        return Err(Error::InvalidParams(format!("need s <= k <= n, got s={s}, k={k}, n={n}")));
    }
    let (free, outside) = ((k - s) as u64, (n - k) as u64);
    let num = (0..=l as u64)
        .filter(|&j| j <= free)
        .map(|j| binomial(free, free - j) * binomial(outside, j))
        .sum();
    Ok(ratio(num, binomial((n - s) as u64, free)))
}

/// Exact success probability of [`t3_trial`]'s strategy.
pub fn t3_success_exact(cfg: &T3Config) -> Result<BigRational> {
    let mut total = BigRational::zero();
    for (r, p) in range_size_distribution_exact(cfg.k, cfg.t).into_iter().enumerate() {
        if !p.is_zero() {
            total += p * fill_success_exact(cfg.n, cfg.k, cfg.l, r)?;
        }
    }
    Ok(total)
}

/// Sample-count lower bounds for collecting at least `k - l` distinct coupons
/// (`k ln((k+1)/(l+1)) + k ln(1-delta)`) and for learning `S` up to `l`
/// mismatches (`k ln((k+1)/(10l+1)) + k ln(1-2 delta)`).
pub fn classical_lower_bounds(k: usize, l: usize, delta: f64) -> Result<(f64, f64)> {
    if !(0.0..0.5).contains(&delta) {
        return Err(Error::Domain(format!("learning bound needs delta in [0, 1/2), got {delta}")));
    }
    let kf = k as f64;
    let collect = kf * ((kf + 1.0) / (l as f64 + 1.0)).ln() + kf * (1.0 - delta).ln();
    let learn = kf * ((kf + 1.0) / (10.0 * l as f64 + 1.0)).ln() + kf * (1.0 - 2.0 * delta).ln();
    Ok((collect, learn))
}

pub fn to_rational(x: usize) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::to_f64;
    use crate::rng::stream_for;
    use crate::statevec::exact::rational;
    use num_traits::One;

    #[test]
    fn collect_examples() {
        for i in 0..20 {
            assert_eq!(collect(1, 1, &mut stream_for(0, i)).unwrap().distinct_count, 1);
            assert_eq!(collect(2, 1, &mut stream_for(0, i)).unwrap().distinct_count, 1);
            let out = collect(5, 3, &mut stream_for(1, i)).unwrap();
            assert!(out.distinct_count <= 3 && out.observed.len() == out.distinct_count);
        }
        assert_eq!(collect(4, 0, &mut stream_for(0, 0)).unwrap().distinct_count, 0);
    }

    #[test]
    fn expected_uncollected_examples() {
        assert_eq!(expected_uncollected(7, 0), 7.0);
        assert_eq!(expected_uncollected(2, 1), 1.0);
        let v = expected_uncollected(8, 36);
        assert!((v - 8.0 * 0.875f64.powi(36)).abs() < 1e-15);
        assert!(v < 0.1 && (v - 0.0655).abs() < 1e-3);
    }

    #[test]
    fn hoeffding_examples() {
        assert_eq!(hypergeom_hoeffding(5, 0.0).unwrap(), 1.0);
        assert!((hypergeom_hoeffding(100, 10.0).unwrap() - (-2f64).exp()).abs() < 1e-15);
        let v = hypergeom_hoeffding(9, 7.0 / 3.0).unwrap();
        assert!((v - (-2.0 * 49.0 / 81.0f64).exp()).abs() < 1e-15);
        // At l = 10m the Hoeffding bound is exp(-98 m / 90).
        let m = 2.0;
        let v = hypergeom_hoeffding(20, 7.0 * m / 3.0).unwrap();
        assert!((v - (-98.0 * m / 90.0f64).exp()).abs() < 1e-12);
        assert!(hypergeom_hoeffding(0, 1.0).is_err());
    }

    #[test]
    fn guessing_probability_exact() {
        assert_eq!(guess_success_prob_exact(10, 1).unwrap(), rational(51, 3003));
        assert_eq!(guess_success_prob_exact(1, 1).unwrap(), BigRational::one());
        let half = rational(1, 2);
        for m in 1..=2 {
            let mut prev: Option<BigRational> = None;
            for l in 10 * m..=20 * m {
                let p = guess_success_prob_exact(l, m).unwrap();
                assert!(p <= half);
                if let Some(prev) = prev {
                    assert!(p <= prev, "not monotone at l={l}, m={m}");
                }
                prev = Some(p);
            }
        }
    }

    #[test]
    fn range_distribution_is_a_distribution() {
        for k in 1..=6 {
            for t in 0..=6 {
                let d = range_size_distribution_exact(k, t);
                assert_eq!(d.iter().sum::<BigRational>(), BigRational::one());
                // Mean distinct count: k - k(1 - 1/k)^t.
                let mean: f64 = d.iter().enumerate().map(|(r, p)| r as f64 * to_f64(p)).sum();
                assert!((mean - (k as f64 - expected_uncollected(k, t))).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn t3_exact_special_cases() {
        // Nothing to learn when n = k.
        let cfg = T3Config::new(6, 6, 0, 0).unwrap();
        assert_eq!(t3_success_exact(&cfg).unwrap(), BigRational::one());
        // Pure guessing with zero mismatches: 1 / C(n, k).
        let cfg = T3Config::new(7, 3, 0, 0).unwrap();
        assert_eq!(t3_success_exact(&cfg).unwrap(), rational(1, 35));
        assert_eq!(fill_success_exact(9, 4, 2, 4).unwrap(), BigRational::one());
    }

    #[test]
    fn t3_trial_matches_exact() {
        let cfg = T3Config::padded_default(6, 1, 8).unwrap();
        let exact = to_f64(&t3_success_exact(&cfg).unwrap());
        let trials = 40_000u64;
        let wins = (0..trials).filter(|&i| t3_trial(&cfg, &mut stream_for(21, i)).success).count();
        let p = wins as f64 / trials as f64;
        let se = (exact * (1.0 - exact) / trials as f64).sqrt();
        assert!((p - exact).abs() < 4.0 * se, "p={p} exact={exact}");
        let all_seen = T3Config::new(10, 3, 0, 200).unwrap();
        for i in 0..20 {
            let out = t3_trial(&all_seen, &mut stream_for(2, i));
            assert!(out.success && out.mismatches == 0);
        }
    }

    #[test]
    fn t3_success_is_monotone() {
        for k in [3usize, 5, 8] {
            for l in 0..=2 {
                let mut prev = BigRational::zero();
                for t in 0..=25 {
                    let p = t3_success_exact(&T3Config::padded_default(k, l.max(1), t).unwrap()).unwrap();
                    assert!(p >= prev);
                    prev = p;
                }
            }
            for t in [0usize, 4, 9] {
                let mut prev = BigRational::zero();
                for l in 0..=k {
                    let p = t3_success_exact(&T3Config::new(k + 5, k, l, t).unwrap()).unwrap();
                    assert!(p >= prev);
                    prev = p;
                }
            }
        }
    }

    #[test]
    fn lower_bound_examples() {
        let (c, _) = classical_lower_bounds(9, 9, 0.0).unwrap();
        assert!(c.abs() < 1e-12);
        let (c, _) = classical_lower_bounds(50, 3, 0.2).unwrap();
        assert!((c - (50.0 * (51.0f64 / 4.0).ln() + 50.0 * 0.8f64.ln())).abs() < 1e-12);
        assert!((c - 116.1).abs() < 0.05);
        let (_, learn) = classical_lower_bounds(50, 1, 0.1).unwrap();
        assert!((learn - 65.5).abs() < 0.05);
        assert!(classical_lower_bounds(50, 1, 0.5).is_err());
    }
}
