//! Exact N-boson dynamics in the symmetric occupation-number sector of a
//! truncated single-particle basis.

pub mod cache;
mod hamiltonian;
mod krylov;
mod spectral;

pub use hamiltonian::{assemble_hamiltonian, assemble_operator, ManyBodyOperator, SparseOperator};
pub use krylov::{energy_moment, evolve_manybody, KrylovStats};
pub use spectral::{
    min_eig_dense, min_eig_lanczos, min_eig_symmetric, smooth_cutoff, smooth_cutoff_chebyshev,
    smooth_cutoff_dense, smooth_step, CutoffCheck, Eigenpair, DENSE_EIG_CAP,
};

use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Default bound on the sector dimension.
pub const DEFAULT_DIM_CAP: usize = 200_000;

/// `binomial(n, k)` in floating point, exact for the sizes used here.
pub fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k.min(n));
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Occupation vectors of `N` bosons in `D` modes, in descending
/// lexicographic order: `(N,0,..)` first, `(..,0,N)` last.
#[derive(Debug, Clone)]
pub struct OccupationBasis {
    d: usize,
    n: usize,
    states: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
}

impl PartialEq for OccupationBasis {
    fn eq(&self, other: &Self) -> bool {
        self.d == other.d && self.n == other.n
    }
}

fn enumerate(d: usize, n: usize, prefix: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
    if prefix.len() + 1 == d {
        prefix.push(n as u8);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for k in (0..=n).rev() {
        prefix.push(k as u8);
        enumerate(d, n - k, prefix, out);
        prefix.pop();
    }
}

impl OccupationBasis {
    pub fn new(d: usize, n: usize) -> Result<Self> {
        Self::with_cap(d, n, DEFAULT_DIM_CAP)
    }

    pub fn with_cap(d: usize, n: usize, cap: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter("need at least one mode".into()));
        }
        if n > u8::MAX as usize {
            return Err(Error::InvalidParameter(format!("particle number {n} exceeds 255")));
        }
        let dim = binomial(d + n - 1, n);
        if dim > cap as f64 {
            return Err(Error::SizeExceeded { dim: dim.min(usize::MAX as f64) as usize, cap });
        }
        let mut states = Vec::with_capacity(dim as usize);
        enumerate(d, n, &mut Vec::with_capacity(d), &mut states);
        let index = states.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        Ok(Self { d, n, states, index })
    }

    pub fn modes(&self) -> usize {
        self.d
    }

    pub fn particles(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[Vec<u8>] {
        &self.states
    }

    pub fn index_of(&self, occupation: &[u8]) -> Option<usize> {
        self.index.get(occupation).copied()
    }

    /// Hex digest identifying `(D, N)` and the ordering convention.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(format!("occupation-desc-lex:D={}:N={}", self.d, self.n).as_bytes());
        hex::encode(h.finalize())
    }
}

/// For each state of `from`, the image under `a_p` in `to` (which must hold
/// one particle fewer) with amplitude `√m_p`.
pub fn annihilation_map(from: &OccupationBasis, to: &OccupationBasis, p: usize) -> Vec<Option<(usize, f64)>> {
    debug_assert_eq!(from.n, to.n + 1);
    let mut scratch = vec![0u8; from.d];
    from.states
        .iter()
        .map(|s| {
            if s[p] == 0 {
                return None;
            }
            scratch.copy_from_slice(s);
            scratch[p] -= 1;
            to.index_of(&scratch).map(|j| (j, (s[p] as f64).sqrt()))
        })
        .collect()
}

/// Apply a precomputed annihilation map.
pub fn apply_map(map: &[Option<(usize, f64)>], target_dim: usize, psi: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); target_dim];
    for (src, m) in map.iter().enumerate() {
        if let Some((j, amp)) = m {
            out[*j] += psi[src] * *amp;
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct BosonicState {
    pub basis: Arc<OccupationBasis>,
    pub coefficients: Vec<Complex64>,
}

impl BosonicState {
    pub fn new(basis: Arc<OccupationBasis>, coefficients: Vec<Complex64>) -> Result<Self> {
        if coefficients.len() != basis.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients for a sector of dimension {}",
                coefficients.len(),
                basis.len()
            )));
        }
        let norm = norm(&coefficients);
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { basis, coefficients })
    }

    pub fn norm(&self) -> f64 {
        norm(&self.coefficients)
    }

    pub fn inner(&self, other: &BosonicState) -> Complex64 {
        self.coefficients.iter().zip(&other.coefficients).map(|(a, b)| a.conj() * b).sum()
    }

    /// Expand into the full `D^N` tensor space, index `i₁·D^{N−1} + … + i_N`.
    pub fn to_first_quantized(&self) -> Vec<Complex64> {
        let (d, n) = (self.basis.d, self.basis.n);
        let total = d.pow(n as u32);
        let mut out = vec![Complex64::new(0.0, 0.0); total];
        let mut occ = vec![0u8; d];
        for (idx, slot) in out.iter_mut().enumerate() {
            occ.iter_mut().for_each(|o| *o = 0);
            let mut rest = idx;
            for _ in 0..n {
                occ[rest % d] += 1;
                rest /= d;
            }
            let k = self.basis.index_of(&occ).expect("tuple occupation lies in the sector");
            // |m⟩ = √(∏m!/N!) Σ over the distinct tuples with occupation m
            let weight = occ.iter().fold(1.0, |acc, &m| acc * factorial(m as usize)) / factorial(n);
            *slot = self.coefficients[k] * weight.sqrt();
        }
        out
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}

pub fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Gaussian random vector in the sector, normalized (Haar distributed).
pub fn random_state(basis: Arc<OccupationBasis>, seed: u64) -> BosonicState {
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let c: Vec<Complex64> = (0..basis.len())
        .map(|_| Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
        .collect();
    let n = norm(&c);
    BosonicState { basis, coefficients: c.iter().map(|z| z / n).collect() }
}

/// `φ^{⊗N}`: coefficient `√(N!/∏m!)·∏φ_i^{m_i}` on occupation `m`.
pub fn product_state(basis: Arc<OccupationBasis>, phi: &[Complex64]) -> Result<BosonicState> {
    if phi.len() != basis.d {
        return Err(Error::DimensionMismatch(format!("{} amplitudes for {} modes", phi.len(), basis.d)));
    }
    let nphi = norm(phi);
    if (nphi - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized(nphi));
    }
    let nf = factorial(basis.n);
    let coefficients = basis
        .states
        .iter()
        .map(|occ| {
            let mut c = Complex64::new(1.0, 0.0);
            let mut denom = 1.0;
            for (amp, &m) in phi.iter().zip(occ) {
                if m > 0 {
                    c *= amp.powu(m as u32);
                    denom *= factorial(m as usize);
                }
            }
            c * (nf / denom).sqrt()
        })
        .collect();
    Ok(BosonicState { basis, coefficients })
}
