//! Dense reconstruction of the padded ensembles on tiny instances.
//!
//! Basis states of `t` samples are ordered as all index registers followed by
//! all pad registers: `|i_1 .. i_t>|x_1 .. x_t>`.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use super::blocks::{block_norms, BlockTable};
use super::signature::{for_each_sequence, modular_signature, ModularSignature};
use crate::error::{Error, Result};
use crate::subset::Subset;

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-9;
pub const RECONSTRUCTION_TOL: f64 = 1e-10;
pub const ORTHOGONALITY_TOL: f64 = 1e-12;
pub const MAX_DENSE_DIM: usize = 64;
const MAX_PAD_FUNCTIONS: f64 = 1e6;
const MAX_COMPRESSED_DIM: usize = 512;

/// Hermitian positive semidefinite operator with a known trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: DMatrix<Complex64>,
    trace: f64,
}

impl DensityMatrix {
    /// Validates a unit-trace state.
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        Self::with_trace(entries, 1.0)
    }

    /// Validates an operator whose trace should be `trace` (a sub-normalized
    /// state when `trace < 1`).
    pub fn with_trace(entries: DMatrix<Complex64>, trace: f64) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::DimensionMismatch { expected: entries.nrows(), actual: entries.ncols() });
        }
        let herm_err = (&entries - entries.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm_err > HERMITIAN_TOL {
            return Err(Error::InvariantViolation(format!("not Hermitian: deviation {herm_err:e}")));
        }
        let actual = entries.trace().re;
        if (actual - trace).abs() > TRACE_TOL {
            return Err(Error::InvariantViolation(format!("trace {actual} differs from {trace}")));
        }
        let min_eig = eigenvalues(&entries).into_iter().fold(f64::INFINITY, f64::min);
        if min_eig < -PSD_TOL {
            return Err(Error::InvariantViolation(format!("negative eigenvalue {min_eig:e}")));
        }
        Ok(DensityMatrix { entries, trace })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        self.trace
    }

    pub fn max_entry_diff(&self, other: &DensityMatrix) -> f64 {
        (&self.entries - &other.entries).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `||self - other||_1`, the sum of absolute eigenvalues of the difference.
    pub fn trace_norm_diff(&self, other: &DensityMatrix) -> f64 {
        trace_norm(&(&self.entries - &other.entries))
    }
}

fn eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let herm = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    SymmetricEigen::new(herm).eigenvalues.iter().copied().collect()
}

pub fn trace_norm(m: &DMatrix<Complex64>) -> f64 {
    eigenvalues(m).iter().map(|v| v.abs()).sum()
}

/// Fourier transform over `Z_p`: `F[j][i] = omega^{ij} / sqrt(p)`.
pub fn fourier_matrix(p: u32) -> DMatrix<Complex64> {
    let scale = 1.0 / (p as f64).sqrt();
    DMatrix::from_fn(p as usize, p as usize, |j, i| {
        let phase = TAU * ((i * j) % p as usize) as f64 / p as f64;
        Complex64::from_polar(scale, phase)
    })
}

fn basis_index(i: &[usize], x: &[u32], n: usize, p: u32) -> usize {
    let pads = (p as usize).pow(x.len() as u32);
    let idx = i.iter().fold(0, |acc, &q| acc * n + q);
    let pad = x.iter().fold(0, |acc, &v| acc * p as usize + v as usize);
    idx * pads + pad
}

#[derive(Debug, Clone)]
pub struct Ensembles {
    pub sigma: DensityMatrix,
    pub rho: DensityMatrix,
    pub rho_prime: DensityMatrix,
    pub blocks: BlockTable,
    /// Largest entrywise gap between the conjugated `sigma` and the block form.
    pub reconstruction_error: f64,
    /// Largest `|<phi_{S,b}|phi_{S,b'}>|` over distinct signatures.
    pub max_cross_inner: f64,
    /// Total weight of blocks whose restricted state vanishes.
    pub dropped_weight: f64,
    /// `1/2 ||rho - rho'||_1`.
    pub half_trace_distance: f64,
    /// `sqrt(k^t / p)`.
    pub distance_bound: f64,
}

impl Ensembles {
    /// `1 - tr(rho')`.
    pub fn trace_deficit(&self) -> f64 {
        1.0 - self.rho_prime.entries().trace().re
    }
}

fn block_vectors(
    elems: &[usize],
    t: usize,
    p: u32,
    n: usize,
    dim: usize,
) -> BTreeMap<ModularSignature, DVector<Complex64>> {
    let mut out: BTreeMap<ModularSignature, DVector<Complex64>> = BTreeMap::new();
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
            let b = modular_signature(&i, &x, n, p).expect("in range");
            let v = out.entry(b).or_insert_with(|| DVector::zeros(dim));
            v[basis_index(&i, &x, n, p)] += Complex64::new(1.0, 0.0);
        });
    });
    out
}

fn outer(v: &DVector<Complex64>) -> DMatrix<Complex64> {
    v * v.adjoint()
}

/// Builds `sigma_S`, its Fourier conjugate `rho_S` and the restricted-block
/// approximation `rho'_S`, checking the block decomposition along the way.
pub fn build_ensembles(s: &Subset, t: usize, p: u32, n: usize) -> Result<Ensembles> {
    if s.ground_size() != n || s.is_empty() || p < 2 {
        return Err(Error::InvalidParams(format!("need a nonempty subset of [{n}] and p >= 2")));
    }
    let dim = (n * p as usize).checked_pow(t as u32).unwrap_or(usize::MAX);
    if dim > MAX_DENSE_DIM {
        return Err(Error::BudgetExceeded(format!("(n p)^t = {dim} exceeds {MAX_DENSE_DIM}")));
    }
    if (p as f64).powi(n as i32) > MAX_PAD_FUNCTIONS {
        return Err(Error::BudgetExceeded(format!("p^n pad functions exceed {MAX_PAD_FUNCTIONS:e}")));
    }
    let k = s.len();
    let kt = (k as f64).powi(t as i32);
    let pt = (p as f64).powi(t as i32);

    let mut sigma = DMatrix::<Complex64>::zeros(dim, dim);
    let amp = Complex64::new(kt.sqrt().recip(), 0.0);
    let mut pad_fn_count = 0usize;
    for_each_sequence(p as usize, n, |f| {
        pad_fn_count += 1;
        let mut v = DVector::<Complex64>::zeros(dim);
        let mut x = vec![0u32; t];
        let mut i = vec![0usize; t];
        for_each_sequence(k, t, |pos| {
            for ((slot_i, slot_x), &q) in i.iter_mut().zip(x.iter_mut()).zip(pos) {
                *slot_i = s.elements()[q];
                *slot_x = f[*slot_i] as u32;
            }
            v[basis_index(&i, &x, n, p)] += amp;
        });
        sigma += outer(&v);
    });
    sigma /= Complex64::new(pad_fn_count as f64, 0.0);

    let mut unitary = DMatrix::<Complex64>::identity(n.pow(t as u32), n.pow(t as u32));
    let f = fourier_matrix(p);
    for _ in 0..t {
        unitary = unitary.kronecker(&f);
    }
    let rho_conj = &unitary * &sigma * unitary.adjoint();

    let norm = Complex64::new((kt * pt).recip(), 0.0);
    let full = block_vectors(s.elements(), t, p, n, dim);
    let mut rho_block = DMatrix::<Complex64>::zeros(dim, dim);
    for v in full.values() {
        rho_block += outer(v) * norm;
    }
    let mut max_cross_inner: f64 = 0.0;
    let vecs: Vec<_> = full.values().collect();
    for (a, va) in vecs.iter().enumerate() {
        for vb in &vecs[a + 1..] {
            max_cross_inner = max_cross_inner.max(va.dotc(vb).norm());
        }
    }

    let blocks = block_norms(s, t, p, n)?;
    let mut rho_prime = DMatrix::<Complex64>::zeros(dim, dim);
    let mut dropped_weight = 0.0;
    for (b, norms) in &blocks.entries {
        let weight = norms.norm_s as f64 / (kt * pt);
        if norms.norm_restricted == 0 {
            dropped_weight += weight;
            continue;
        }
        let restricted = block_vectors(&b.support(), t, p, n, dim);
        let v = restricted.get(b).ok_or_else(|| {
            Error::InvariantViolation(format!("restricted block {b} missing from enumeration"))
        })?;
        let scale = norms.norm_s as f64 / norms.norm_restricted as f64;
        rho_prime += outer(v) * norm * Complex64::new(scale, 0.0);
    }

    let sigma = DensityMatrix::new(sigma)?;
    let rho = DensityMatrix::new(rho_conj)?;
    let rho_block = DensityMatrix::new(rho_block)?;
    let rho_prime = DensityMatrix::with_trace(rho_prime, 1.0 - dropped_weight)?;
    let reconstruction_error = rho.max_entry_diff(&rho_block);
    if reconstruction_error > RECONSTRUCTION_TOL {
        return Err(Error::InvariantViolation(format!(
            "Fourier-conjugated ensemble differs from block form by {reconstruction_error:e}"
        )));
    }
    if max_cross_inner > ORTHOGONALITY_TOL {
        return Err(Error::InvariantViolation(format!("blocks overlap: {max_cross_inner:e}")));
    }
    let half_trace_distance = 0.5 * rho.trace_norm_diff(&rho_prime);
    Ok(Ensembles {
        sigma,
        rho,
        rho_prime,
        blocks,
        reconstruction_error,
        max_cross_inner,
        dropped_weight,
        half_trace_distance,
        distance_bound: (kt / p as f64).sqrt(),
    })
}

/// `|| |u><u| - |v><v| ||_1` for the normalized full and restricted states of
/// block `b`, from the eigenvalues of the difference on the coordinates the
/// full block occupies. Fails with [`Error::ZeroBlock`] when either state
/// vanishes.
pub fn pure_state_distance_eigen(s: &Subset, b: &ModularSignature, t: usize, p: u32) -> Result<f64> {
    let n = s.ground_size();
    let mut coords: BTreeMap<(Vec<usize>, Vec<u32>), (f64, f64)> = BTreeMap::new();
    let mut i = vec![0usize; t];
    let mut x = vec![0u32; t];
    let support = b.support();
    for_each_sequence(s.len(), t, |pos| {
        for (slot, &q) in i.iter_mut().zip(pos) {
            *slot = s.elements()[q];
        }
        let in_support = i.iter().all(|q| support.binary_search(q).is_ok());
        for_each_sequence(p as usize, t, |pads| {
            for (slot, &v) in x.iter_mut().zip(pads) {
                *slot = v as u32;
            }
            if modular_signature(&i, &x, n, p).map(|c| &c == b).unwrap_or(false) {
                let restricted = if in_support { 1.0 } else { 0.0 };
                coords.insert((i.clone(), x.clone()), (1.0, restricted));
            }
        });
    });
    let dim = coords.len();
    if dim > MAX_COMPRESSED_DIM {
        return Err(Error::BudgetExceeded(format!("block occupies {dim} coordinates")));
    }
    let u = DVector::from_iterator(dim, coords.values().map(|c| Complex64::new(c.0, 0.0)));
    let v = DVector::from_iterator(dim, coords.values().map(|c| Complex64::new(c.1, 0.0)));
    let (nu, nv) = (u.norm(), v.norm());
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroBlock);
    }
    let diff = outer(&(u / Complex64::new(nu, 0.0))) - outer(&(v / Complex64::new(nv, 0.0)));
    Ok(trace_norm(&diff))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padded::blocks::fidelity_and_distance;

    fn unitary_error(m: &DMatrix<Complex64>) -> f64 {
        let id = DMatrix::<Complex64>::identity(m.nrows(), m.ncols());
        (m * m.adjoint() - id).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn fourier_is_unitary() {
        for p in 2..7 {
            assert!(unitary_error(&fourier_matrix(p)) < 1e-12);
        }
    }

    #[test]
    fn single_sample_block_weights() {
        let s = Subset::new(2, [0, 1]).unwrap();
        let ens = build_ensembles(&s, 1, 2, 2).unwrap();
        assert_eq!(ens.rho.dim(), 4);
        let weights: Vec<f64> = ens.blocks.entries.keys().map(|b| ens.blocks.weight(b)).collect();
        assert_eq!(weights, vec![0.5, 0.25, 0.25]);
        assert!((ens.sigma.entries().trace().re - 1.0).abs() < 1e-12);
        assert!((ens.rho.entries().trace().re - 1.0).abs() < 1e-12);
        assert!(ens.reconstruction_error < RECONSTRUCTION_TOL);
        assert!((ens.dropped_weight - 0.5).abs() < 1e-15);
        assert!(ens.half_trace_distance <= ens.distance_bound);
    }

    #[test]
    fn grid_reconstruction() {
        for n in 1..=3usize {
            for k in 1..=n {
                let s = Subset::new(n, 0..k).unwrap();
                for t in 1..=3usize {
                    for p in [2u32, 3] {
                        if (n * p as usize).pow(t as u32) > MAX_DENSE_DIM {
                            continue;
                        }
                        let ens = build_ensembles(&s, t, p, n).unwrap();
                        assert!(ens.half_trace_distance <= ens.distance_bound + 1e-12);
                        let kt = (k as f64).powi(t as i32);
                        assert!(ens.trace_deficit() <= kt / p as f64 + 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn eigen_distance_matches_ratio() {
        let s = Subset::new(3, [0, 2]).unwrap();
        for t in 1..=3 {
            for p in [2u32, 3] {
                let table = block_norms(&s, t, p, 3).unwrap();
                for b in table.entries.keys() {
                    let fid = fidelity_and_distance(&s, b, t, p).unwrap();
                    if fid.degenerate {
                        assert_eq!(pure_state_distance_eigen(&s, b, t, p), Err(Error::ZeroBlock));
                    } else {
                        let eig = pure_state_distance_eigen(&s, b, t, p).unwrap();
                        assert!((eig - fid.trace_distance).abs() < 1e-10, "{b}: {eig} vs {}", fid.trace_distance);
                    }
                }
            }
        }
    }

    #[test]
    fn budget_and_validation() {
        let s = Subset::new(4, [0, 1]).unwrap();
        assert!(matches!(build_ensembles(&s, 2, 3, 4), Err(Error::BudgetExceeded(_))));
        let bad = DMatrix::from_row_slice(2, 2, &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(0.0, 1.0), Complex64::new(0.0, 0.0)]);
        assert!(DensityMatrix::new(bad).is_err());
        let neg = DMatrix::from_diagonal(&DVector::from_vec(vec![Complex64::new(1.5, 0.0), Complex64::new(-0.5, 0.0)]));
        assert!(DensityMatrix::new(neg).is_err());
    }
}
