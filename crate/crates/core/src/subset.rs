use std::fmt;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A subset of the ground set `{0, .., n-1}`, stored as a sorted list of
/// distinct elements.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Subset {
    n: usize,
    elems: Vec<usize>,
}

impl Subset {
    pub fn new(n: usize, elems: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut elems: Vec<usize> = elems.into_iter().collect();
        if let Some(&element) = elems.iter().find(|&&e| e >= n) {
            return Err(Error::OutOfRange { element, n });
        }
        elems.sort_unstable();
        elems.dedup();
        Ok(Subset { n, elems })
    }

    pub fn empty(n: usize) -> Self {
        Subset { n, elems: Vec::new() }
    }

    pub fn full(n: usize) -> Self {
        Subset { n, elems: (0..n).collect() }
    }

    /// Uniformly random size-`k` subset of `{0, .., n-1}`.
    pub fn random<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<Self> {
        if k > n {
            return Err(Error::InvalidParams(format!("cannot draw {k} elements out of {n}")));
        }
        Subset::new(n, index::sample(rng, n, k))
    }

    pub fn ground_size(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn elements(&self) -> &[usize] {
        &self.elems
    }

    pub fn contains(&self, x: usize) -> bool {
        self.elems.binary_search(&x).is_ok()
    }

    pub fn complement(&self) -> Subset {
        let mut mask = vec![true; self.n];
        for &e in &self.elems {
            mask[e] = false;
        }
        Subset { n: self.n, elems: (0..self.n).filter(|&i| mask[i]).collect() }
    }

    pub fn intersection(&self, other: &Subset) -> Subset {
        Subset {
            n: self.n,
            elems: self.elems.iter().copied().filter(|&e| other.contains(e)).collect(),
        }
    }

    pub fn difference(&self, other: &Subset) -> Subset {
        Subset {
            n: self.n,
            elems: self.elems.iter().copied().filter(|&e| !other.contains(e)).collect(),
        }
    }

    pub fn is_subset_of(&self, other: &Subset) -> bool {
        self.elems.iter().all(|&e| other.contains(e))
    }

    /// Returns `false` if `x` was already present.
    pub fn insert(&mut self, x: usize) -> Result<bool> {
        if x >= self.n {
            return Err(Error::OutOfRange { element: x, n: self.n });
        }
        match self.elems.binary_search(&x) {
            Ok(_) => Ok(false),
            Err(pos) => {
                self.elems.insert(pos, x);
                Ok(true)
            }
        }
    }

    pub fn remove(&mut self, x: usize) -> bool {
        match self.elems.binary_search(&x) {
            Ok(pos) => {
                self.elems.remove(pos);
                true
            }
            Err(_) => false,
        }
    }

    pub fn mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.n];
        for &e in &self.elems {
            mask[e] = true;
        }
        mask
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, e) in self.elems.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, "}}")
    }
}

/// All size-`k` subsets of `{0, .., n-1}` in lexicographic order.
pub fn k_subsets(n: usize, k: usize) -> Vec<Subset> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Subset>) {
        if cur.len() == k {
            out.push(Subset { n, elems: cur.clone() });
            return;
        }
        for e in start..n {
            if n - e < k - cur.len() {
                break;
            }
            cur.push(e);
            rec(e + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        rec(0, n, k, &mut Vec::with_capacity(k), &mut out);
    }
    out
}
