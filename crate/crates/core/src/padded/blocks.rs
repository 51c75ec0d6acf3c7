//! Block norms of the Fourier-conjugated ensemble and the counting identities
//! behind them.
//!
//! For a hidden set `S` the ensemble splits into orthogonal blocks indexed by
//! the modular signature `b`. Block `b` is spanned by all `(i, x)` with
//! `i in S^t` and signature `b` (squared norm `norm_s`); its approximation uses
//! only `i in supp(b)^t` (squared norm `norm_restricted`).

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use super::signature::{for_each_sequence, modular_signature, ModularSignature};
use super::ENUMERATION_BUDGET;
use crate::combinatorics::{binomial, pow_u, ratio, surjection_count};
use crate::error::{Error, Result};
use crate::subset::{k_subsets, Subset};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BlockNorms {
    pub norm_s: u64,
    pub norm_restricted: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockTable {
    pub s: Subset,
    pub t: usize,
    pub p: u32,
    pub entries: BTreeMap<ModularSignature, BlockNorms>,
}

impl BlockTable {
    pub fn total_norm(&self) -> u64 {
        self.entries.values().map(|b| b.norm_s).sum()
    }

    pub fn get(&self, b: &ModularSignature) -> BlockNorms {
        self.entries.get(b).copied().unwrap_or(BlockNorms { norm_s: 0, norm_restricted: restricted_norm(b, self.t) })
    }

    /// `k^t p^t`, the total squared norm of all blocks.
    pub fn expected_total(&self) -> u64 {
        (self.s.len() as u64).pow(self.t as u32) * (self.p as u64).pow(self.t as u32)
    }

    /// Probability weight `norm_s / (k^t p^t)` of a block.
    pub fn weight(&self, b: &ModularSignature) -> f64 {
        self.get(b).norm_s as f64 / self.expected_total() as f64
    }
}

pub(crate) fn check_budget(k: usize, t: usize, p: u32) -> Result<()> {
    let pairs = (k as f64).powi(t as i32) * (p as f64).powi(t as i32);
    if pairs > ENUMERATION_BUDGET {
        return Err(Error::BudgetExceeded(format!(
            "k^t p^t = {pairs:e} pairs exceeds {ENUMERATION_BUDGET:e} (k={k}, t={t}, p={p})"
        )));
    }
    Ok(())
}

/// Calls `f(i, x)` for every `i in elems^t` and `x in N_p^t`.
fn for_each_pair(elems: &[usize], t: usize, p: u32, mut f: impl FnMut(&[usize], &[u32])) {
    let mut i = vec![0usize; t];
    let mut x = vec![0u32; t];
    for_each_sequence(elems.len(), t, |pos| {
        for (slot, &q) in i.iter_mut().zip(pos) {
            *slot = elems[q];
        }
        for_each_sequence(p as usize, t, |pads| {
            for (slot, &v) in x.iter_mut().zip(pads) {
                *slot = v as u32;
            }
            f(&i, &x);
        });
    });
}

/// Exact block norms for hidden set `s`, by enumerating all `k^t p^t` pairs.
pub fn block_norms(s: &Subset, t: usize, p: u32, n: usize) -> Result<BlockTable> {
    if s.ground_size() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: s.ground_size() });
    }
    check_budget(s.len(), t, p)?;
    // A pair lies in the restricted block of its own signature exactly when
    // every index it uses carries a nonzero signature coordinate.
    let mut entries: BTreeMap<ModularSignature, BlockNorms> = BTreeMap::new();
    for_each_pair(s.elements(), t, p, |i, x| {
        let b = modular_signature(i, x, n, p).expect("enumerated pairs are in range");
        let restricted = i.iter().all(|&q| b.get(q) != 0);
        let e = entries.entry(b).or_insert(BlockNorms { norm_s: 0, norm_restricted: 0 });
        e.norm_s += 1;
        e.norm_restricted += restricted as u64;
    });
    Ok(BlockTable { s: s.clone(), t, p, entries })
}

/// `#{(i, x) : i in supp(b)^t, x in N_p^t, ms(i, x) = b}` by enumeration.
pub fn restricted_norm(b: &ModularSignature, t: usize) -> u64 {
    let support = b.support();
    let mut count = 0;
    for_each_pair(&support, t, b.modulus(), |i, x| {
        if modular_signature(i, x, b.n(), b.modulus()).map(|c| &c == b).unwrap_or(false) {
            count += 1;
        }
    });
    count
}

/// Right-hand side of the restricted count identity:
/// `p^{t - |supp b|} n_{t, |supp b|}` (zero when `|supp b| > t`).
pub fn restricted_norm_formula(support_size: usize, t: usize, p: u32) -> BigUint {
    if support_size > t {
        return BigUint::zero();
    }
    pow_u(p as u64, (t - support_size) as u32) * surjection_count(support_size as u64, t as u32)
}

/// Right-hand side of the full count identity:
/// `sum_{supp b ⊆ T ⊆ S} p^{t-|T|} n_{t,|T|}`, grouped by `|T|`.
/// Zero unless `supp b ⊆ S`.
pub fn block_norm_formula(support_size: usize, k: usize, t: usize, p: u32) -> BigUint {
    if support_size > k {
        return BigUint::zero();
    }
    (support_size..=k.min(t))
        .map(|size| {
            binomial((k - support_size) as u64, (size - support_size) as u64)
                * restricted_norm_formula(size, t, p)
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Identity {
    /// Total block norm equals `k^t p^t`.
    NormSum,
    /// Every block with nonzero norm has `supp(b) ⊆ S`.
    SupportInS,
    /// Restricted count equals `p^{t-|supp b|} n_{t, supp b}`.
    Restricted,
    /// Full count equals the sum over intermediate supports.
    Full,
    /// `norm_restricted <= norm_s`.
    RestrictedBelowFull,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub identity: Identity,
    pub s: Subset,
    pub b: Option<ModularSignature>,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CountingReport {
    pub checks: usize,
    pub violations: Vec<Violation>,
}

impl CountingReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn merge(&mut self, other: CountingReport) {
        self.checks += other.checks;
        self.violations.extend(other.violations);
    }
}

/// Checks the counting identities for every size-`k` subset of `[n]` and every
/// `b in N_p^n`, with exact integers.
pub fn verify_counting_identities(n: usize, k: usize, t: usize, p: u32) -> Result<CountingReport> {
    verify_counting_identities_impl(n, k, t, p, false)
}

/// Same as [`verify_counting_identities`] but adds one to the first block norm
/// of the first subset, so the report must carry a witness.
#[doc(hidden)]
pub fn verify_counting_identities_with_fault(n: usize, k: usize, t: usize, p: u32) -> Result<CountingReport> {
    verify_counting_identities_impl(n, k, t, p, true)
}

fn all_signatures(n: usize, p: u32) -> Vec<ModularSignature> {
    let mut out = Vec::new();
    for_each_sequence(p as usize, n, |dense| {
        let dense: Vec<u32> = dense.iter().map(|&v| v as u32).collect();
        out.push(ModularSignature::from_dense(p, &dense).expect("in range"));
    });
    out
}

fn verify_counting_identities_impl(n: usize, k: usize, t: usize, p: u32, fault: bool) -> Result<CountingReport> {
    if k > n || p < 2 {
        return Err(Error::InvalidParams(format!("need k <= n and p >= 2, got n={n}, k={k}, p={p}")));
    }
    check_budget(k, t, p)?;
    let signature_count = (p as f64).powi(n as i32);
    if signature_count > ENUMERATION_BUDGET {
        return Err(Error::BudgetExceeded(format!("p^n = {signature_count:e} signatures")));
    }
    let signatures = all_signatures(n, p);
    // The restricted count does not depend on S.
    let restricted: Vec<u64> = signatures.iter().map(|b| restricted_norm(b, t)).collect();
    let subsets = k_subsets(n, k);
    let reports: Vec<Result<CountingReport>> = subsets
        .par_iter()
        .enumerate()
        .map(|(idx, s)| {
            let mut table = block_norms(s, t, p, n)?;
            if fault && idx == 0 {
                if let Some(first) = table.entries.values_mut().next() {
                    first.norm_s += 1;
                }
            }
            Ok(check_subset(&table, &signatures, &restricted))
        })
        .collect();
    let mut report = CountingReport::default();
    for r in reports {
        report.merge(r?);
    }
    Ok(report)
}

fn check_subset(table: &BlockTable, signatures: &[ModularSignature], restricted: &[u64]) -> CountingReport {
    let s = &table.s;
    let (k, t, p) = (s.len(), table.t, table.p);
    let mut report = CountingReport::default();
    let fail = |identity, b: Option<&ModularSignature>, lhs: String, rhs: String| Violation {
        identity,
        s: s.clone(),
        b: b.cloned(),
        lhs,
        rhs,
    };
    report.checks += 1;
    if table.total_norm() != table.expected_total() {
        let v = fail(Identity::NormSum, None, table.total_norm().to_string(), table.expected_total().to_string());
        report.violations.push(v);
    }
    for (b, &restricted_count) in signatures.iter().zip(restricted) {
        let norm_s = table.entries.get(b).map(|e| e.norm_s).unwrap_or(0);
        let support = b.support();
        let inside = support.iter().all(|&q| s.contains(q));
        report.checks += 4;
        if norm_s > 0 && !inside {
            report.violations.push(fail(Identity::SupportInS, Some(b), norm_s.to_string(), "0".into()));
        }
        let rhs = restricted_norm_formula(support.len(), t, p);
        if BigUint::from(restricted_count) != rhs {
            report.violations.push(fail(Identity::Restricted, Some(b), restricted_count.to_string(), rhs.to_string()));
        }
        let rhs = if inside { block_norm_formula(support.len(), k, t, p) } else { BigUint::zero() };
        if BigUint::from(norm_s) != rhs {
            report.violations.push(fail(Identity::Full, Some(b), norm_s.to_string(), rhs.to_string()));
        }
        if inside && restricted_count > norm_s {
            report.violations.push(fail(
                Identity::RestrictedBelowFull,
                Some(b),
                restricted_count.to_string(),
                norm_s.to_string(),
            ));
        }
    }
    report
}

/// Fidelity data for one block.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockFidelity {
    /// `norm_restricted / norm_s`, the squared overlap of the normalized states.
    #[serde(serialize_with = "serialize_rational")]
    pub ratio: BigRational,
    /// `2 sqrt(1 - ratio)`, the trace norm of the difference of the two pure
    /// states.
    pub trace_distance: f64,
    /// No sequence over `supp(b)` has range `supp(b)`, so the restricted state
    /// vanishes (the zero signature for `t >= 1`).
    pub degenerate: bool,
    /// `1 / (1 + k^t / p)`.
    pub ratio_floor: f64,
    /// `2 sqrt(k^t / p)`.
    pub distance_ceiling: f64,
}

fn serialize_rational<S: serde::Serializer>(q: &BigRational, ser: S) -> std::result::Result<S::Ok, S::Error> {
    ser.serialize_str(&q.to_string())
}

fn fidelity_from_norms(k: usize, support_size: usize, t: usize, p: u32, norms: BlockNorms) -> Result<BlockFidelity> {
    if norms.norm_s == 0 {
        return Err(Error::ZeroBlock);
    }
    let ratio = ratio(BigUint::from(norms.norm_restricted), BigUint::from(norms.norm_s));
    let ratio_f = ratio.to_f64().unwrap_or(f64::NAN);
    let degenerate = surjection_count(support_size as u64, t as u32).is_zero();
    let kt = (k as f64).powi(t as i32);
    let fid = BlockFidelity {
        trace_distance: 2.0 * (1.0 - ratio_f).max(0.0).sqrt(),
        degenerate,
        ratio_floor: 1.0 / (1.0 + kt / p as f64),
        distance_ceiling: 2.0 * (kt / p as f64).sqrt(),
        ratio,
    };
    if !degenerate {
        // ratio >= 1/(1 + k^t/p)  <=>  ratio (p + k^t) >= p, checked exactly.
        let kt_int = pow_u(k as u64, t as u32);
        let lhs = fid.ratio.clone() * BigRational::from_integer((kt_int + BigUint::from(p)).into());
        if lhs < BigRational::from_integer(p.into()) || fid.trace_distance > fid.distance_ceiling + 1e-12 {
            return Err(Error::InvariantViolation(format!(
                "fidelity bound fails: ratio {} < {} (k={k}, t={t}, p={p})",
                fid.ratio, fid.ratio_floor
            )));
        }
    }
    Ok(fid)
}

/// Ratio and trace distance between the normalized full and restricted block
/// states for signature `b`, from enumerated counts.
pub fn fidelity_and_distance(s: &Subset, b: &ModularSignature, t: usize, p: u32) -> Result<BlockFidelity> {
    if b.modulus() != p || b.n() != s.ground_size() {
        return Err(Error::InvalidParams("signature does not match (n, p)".into()));
    }
    check_budget(s.len(), t, p)?;
    let mut norm_s = 0;
    for_each_pair(s.elements(), t, p, |i, x| {
        if modular_signature(i, x, b.n(), p).map(|c| &c == b).unwrap_or(false) {
            norm_s += 1;
        }
    });
    let norms = BlockNorms { norm_s, norm_restricted: restricted_norm(b, t) };
    fidelity_from_norms(s.len(), b.support_size(), t, p, norms)
}

/// Same quantity from the closed-form counts, for a block whose support has
/// `support_size` elements inside a size-`k` set. Used where `k^t p^t` is
/// beyond enumeration.
pub fn fidelity_by_support_size(k: usize, support_size: usize, t: usize, p: u32) -> Result<BlockFidelity> {
    let to_u64 = |v: BigUint| {
        v.to_u64().ok_or_else(|| Error::BudgetExceeded("block norm exceeds 64 bits".into()))
    };
    let norms = BlockNorms {
        norm_s: to_u64(block_norm_formula(support_size, k, t, p))?,
        norm_restricted: to_u64(restricted_norm_formula(support_size, t, p))?,
    };
    fidelity_from_norms(k, support_size, t, p, norms)
}

/// Largest block trace distance over non-degenerate blocks for `|S| = k` and
/// `t` samples. Blocks with equal support size are related by a permutation of
/// `S`, so the maximum runs over support sizes `1..=min(k, t)`.
pub fn max_block_distance(k: usize, t: usize, p: u32) -> Result<f64> {
    let mut best: f64 = 0.0;
    for size in 1..=k.min(t) {
        let fid = fidelity_by_support_size(k, size, t, p)?;
        if !fid.degenerate {
            best = best.max(fid.trace_distance);
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayPoint {
    pub p: u32,
    pub max_distance: f64,
    /// `2 sqrt(k_max^t_max / p)` for the largest grid entry.
    pub ceiling: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayReport {
    pub points: Vec<DecayPoint>,
    /// Least-squares slope of `ln max_distance` against `ln p`.
    pub slope: f64,
}

/// Sweeps the padding length and fits the log-log decay of the worst block
/// distance over all `(k, t)` in the grid.
pub fn decay_sweep(ks: &[usize], ts: &[usize], ps: &[u32]) -> Result<DecayReport> {
    let mut points = Vec::with_capacity(ps.len());
    for &p in ps {
        let mut worst: f64 = 0.0;
        let mut ceiling: f64 = 0.0;
        for &k in ks {
            for &t in ts {
                worst = worst.max(max_block_distance(k, t, p)?);
                ceiling = ceiling.max(2.0 * ((k as f64).powi(t as i32) / p as f64).sqrt());
            }
        }
        points.push(DecayPoint { p, max_distance: worst, ceiling });
    }
    let xs: Vec<f64> = points.iter().map(|pt| (pt.p as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|pt| pt.max_distance.ln()).collect();
    Ok(DecayReport { slope: least_squares_slope(&xs, &ys), points })
}

pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    cov / var
}
