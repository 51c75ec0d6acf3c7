//! Exact real-rational vectors for cross-checking the floating-point engine.
//!
//! Every state reachable by the complement learner is a real vector whose
//! squared entries are rational once the uniform superpositions are kept
//! unnormalized (indicator vectors). Projections and reflections then stay in
//! the rationals, and outcome probabilities are ratios of squared norms.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::subset::Subset;

#[derive(Debug, Clone, PartialEq)]
pub struct ExactVector {
    entries: Vec<BigRational>,
}

impl ExactVector {
    /// Unnormalized uniform superposition: the indicator vector of `x`.
    pub fn indicator(x: &Subset) -> Self {
        let mask = x.mask();
        ExactVector {
            entries: mask
                .into_iter()
                .map(|m| if m { BigRational::one() } else { BigRational::zero() })
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[BigRational] {
        &self.entries
    }

    pub fn dot(&self, other: &ExactVector) -> Result<BigRational> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), actual: other.dim() });
        }
        Ok(self.entries.iter().zip(&other.entries).map(|(a, b)| a * b).sum())
    }

    pub fn norm_sqr(&self) -> BigRational {
        self.entries.iter().map(|a| a * a).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    /// Coordinate projection onto `x` (`inside = true`) or its complement.
    pub fn project_subset(&self, x: &Subset, inside: bool) -> Result<ExactVector> {
        if x.ground_size() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), actual: x.ground_size() });
        }
        let mask = x.mask();
        Ok(ExactVector {
            entries: self
                .entries
                .iter()
                .zip(mask)
                .map(|(a, m)| if m == inside { a.clone() } else { BigRational::zero() })
                .collect(),
        })
    }

    /// `(I - |u><u| / <u|u>) self` for an arbitrary nonzero direction `u`.
    pub fn reflect_off(&self, direction: &ExactVector) -> Result<ExactVector> {
        let denom = direction.norm_sqr();
        if denom.is_zero() {
            return Err(Error::DegenerateBranch(0.0));
        }
        let coeff = self.dot(direction)? / denom;
        Ok(ExactVector {
            entries: self
                .entries
                .iter()
                .zip(&direction.entries)
                .map(|(a, d)| a - &coeff * d)
                .collect(),
        })
    }

    /// `P[outcome 0]` for the coordinate projector onto `x`, given this
    /// (unnormalized, nonzero) vector.
    pub fn subset_probability(&self, x: &Subset) -> Result<BigRational> {
        let total = self.norm_sqr();
        if total.is_zero() {
            return Err(Error::DegenerateBranch(0.0));
        }
        Ok(self.project_subset(x, true)?.norm_sqr() / total)
    }

    /// Born-rule distribution of a computational-basis measurement.
    pub fn basis_distribution(&self) -> Result<Vec<BigRational>> {
        let total = self.norm_sqr();
        if total.is_zero() {
            return Err(Error::DegenerateBranch(0.0));
        }
        Ok(self.entries.iter().map(|a| a * a / &total).collect())
    }
}

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subset::k_subsets;

    #[test]
    fn subset_projector_probability_is_overlap_fraction() {
        for n in 1..=6 {
            for k in 1..=n {
                for s in k_subsets(n, k) {
                    let psi = ExactVector::indicator(&s);
                    for size in 0..=n {
                        for x in k_subsets(n, size) {
                            let expected = rational(x.intersection(&s).len() as i64, k as i64);
                            assert_eq!(psi.subset_probability(&x).unwrap(), expected);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn reflection_weight_matches_closed_form() {
        // S ∩ U has k - j = 2 elements, C has l = 1: conditional P[1] = l/(k-j+l).
        let n = 4;
        let s_cap_u = ExactVector::indicator(&Subset::new(n, [0, 1]).unwrap());
        let u = ExactVector::indicator(&Subset::new(n, [0, 1, 2]).unwrap());
        let r = s_cap_u.reflect_off(&u).unwrap();
        assert_eq!(r.norm_sqr() / s_cap_u.norm_sqr(), rational(1, 3));
        let dist = r.basis_distribution().unwrap();
        assert_eq!(dist[2], rational(2, 3));
        assert_eq!(dist[0], rational(1, 6));
        assert_eq!(dist[1], rational(1, 6));
    }
}
