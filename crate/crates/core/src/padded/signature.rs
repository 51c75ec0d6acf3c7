use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// The modular signature `b in N_p^n` of an index sequence and a pad sequence:
/// `b_q = sum_{r : i_r = q} x_r mod p`. Only nonzero coordinates are stored, as
/// `(position, value)` pairs sorted by position.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ModularSignature {
    n: usize,
    p: u32,
    coords: Vec<(usize, u32)>,
}

impl ModularSignature {
    pub fn zero(n: usize, p: u32) -> Self {
        ModularSignature { n, p, coords: Vec::new() }
    }

    pub fn from_dense(p: u32, dense: &[u32]) -> Result<Self> {
        if let Some(&v) = dense.iter().find(|&&v| v >= p) {
            return Err(Error::InvalidParams(format!("coordinate {v} is not in N_{p}")));
        }
        Ok(ModularSignature {
            n: dense.len(),
            p,
            coords: dense.iter().enumerate().filter(|(_, &v)| v != 0).map(|(q, &v)| (q, v)).collect(),
        })
    }

    pub fn to_dense(&self) -> Vec<u32> {
        let mut dense = vec![0; self.n];
        for &(q, v) in &self.coords {
            dense[q] = v;
        }
        dense
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn modulus(&self) -> u32 {
        self.p
    }

    pub fn entries(&self) -> &[(usize, u32)] {
        &self.coords
    }

    pub fn support(&self) -> Vec<usize> {
        self.coords.iter().map(|&(q, _)| q).collect()
    }

    pub fn support_size(&self) -> usize {
        self.coords.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn get(&self, q: usize) -> u32 {
        self.coords.binary_search_by_key(&q, |&(pos, _)| pos).map(|i| self.coords[i].1).unwrap_or(0)
    }
}

impl fmt::Display for ModularSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dense: Vec<String> = self.to_dense().iter().map(|v| v.to_string()).collect();
        write!(f, "({})", dense.join(","))
    }
}

pub fn modular_signature(i: &[usize], x: &[u32], n: usize, p: u32) -> Result<ModularSignature> {
    if i.len() != x.len() {
        return Err(Error::LengthMismatch(i.len(), x.len()));
    }
    if p < 1 {
        return Err(Error::InvalidParams("modulus must be positive".into()));
    }
    let mut coords: Vec<(usize, u32)> = Vec::with_capacity(i.len());
    for (&q, &v) in i.iter().zip(x) {
        if q >= n {
            return Err(Error::OutOfRange { element: q, n });
        }
        if v >= p {
            return Err(Error::InvalidParams(format!("pad {v} is not in N_{p}")));
        }
        match coords.binary_search_by_key(&q, |&(pos, _)| pos) {
            Ok(idx) => coords[idx].1 = (coords[idx].1 + v) % p,
            Err(idx) => coords.insert(idx, (q, v)),
        }
    }
    coords.retain(|&(_, v)| v != 0);
    Ok(ModularSignature { n, p, coords })
}

/// Calls `f` on every sequence in `{0..base-1}^len`, in lexicographic order.
pub(crate) fn for_each_sequence(base: usize, len: usize, mut f: impl FnMut(&[usize])) {
    if base == 0 && len > 0 {
        return;
    }
    let mut seq = vec![0usize; len];
    loop {
        f(&seq);
        let mut pos = len;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            seq[pos] += 1;
            if seq[pos] < base {
                break;
            }
            seq[pos] = 0;
        }
    }
}
