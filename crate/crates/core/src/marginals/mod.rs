//! Reduced density matrices of symmetric states and the distances used to
//! compare them with factorized limits.

mod definetti;
mod hierarchy;

pub use definetti::{definetti_distance, definetti_exact_distance, definetti_moment, sample_definetti, DeFinettiReport, DeFinettiSample};
pub use hierarchy::{bbgky_residual, compatibility_check, delta_comparison, pair_operator, DeltaComparison, DeltaRow};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::manybody::{annihilation_map, apply_map, BosonicState, OccupationBasis};

/// Largest `D^k` for which a marginal is formed.
pub const MARGINAL_DIM_CAP: usize = 4096;

const FAMILY_SEED: u64 = 0x6d65_616e_6669_656c;

/// `γ^(k)` on the full `D^k` tensor space, index `i₁·D^{k−1} + … + i_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrixK {
    pub k: usize,
    pub d: usize,
    pub entries: DMatrix<Complex64>,
}

/// Deviations of a marginal from the density-matrix invariants.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MarginalDefects {
    pub hermiticity: f64,
    pub min_eigenvalue: f64,
    pub trace_error: f64,
    pub permutation: f64,
}

impl MarginalDefects {
    pub fn within(&self, tol_hermitian: f64, tol_psd: f64, tol_trace: f64) -> bool {
        self.hermiticity <= tol_hermitian
            && self.min_eigenvalue >= -tol_psd
            && self.trace_error <= tol_trace
            && self.permutation <= tol_hermitian
    }
}

fn tuple_of(mut idx: usize, d: usize, k: usize) -> Vec<usize> {
    let mut t = vec![0; k];
    for slot in t.iter_mut().rev() {
        *slot = idx % d;
        idx /= d;
    }
    t
}

fn index_of_tuple(t: &[usize], d: usize) -> usize {
    t.iter().fold(0, |acc, &i| acc * d + i)
}

impl DensityMatrixK {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    pub fn defects(&self) -> MarginalDefects {
        let a = &self.entries;
        let hermiticity = (a - a.adjoint()).iter().fold(0.0f64, |m, z| m.max(z.norm()));
        let eig = SymmetricEigen::new(hermitian_part(a));
        let min_eigenvalue = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        let trace_error = (self.trace() - 1.0).norm();
        // largest change under each transposition of neighbouring particles
        let mut permutation = 0.0f64;
        let n = self.dim();
        for swap in 0..self.k.saturating_sub(1) {
            let perm: Vec<usize> = (0..n)
                .map(|i| {
                    let mut t = tuple_of(i, self.d, self.k);
                    t.swap(swap, swap + 1);
                    index_of_tuple(&t, self.d)
                })
                .collect();
            for i in 0..n {
                for j in 0..n {
                    permutation = permutation.max((a[(i, j)] - a[(perm[i], perm[j])]).norm());
                }
            }
        }
        MarginalDefects { hermiticity, min_eigenvalue, trace_error, permutation }
    }

    /// `Tr_k γ^(k)`, tracing out the last particle.
    pub fn partial_trace(&self) -> Result<DensityMatrixK> {
        if self.k < 2 {
            return Err(Error::InvalidParameter("cannot trace out the only particle".into()));
        }
        Ok(DensityMatrixK { k: self.k - 1, d: self.d, entries: partial_trace_last(&self.entries, self.d) })
    }
}

fn hermitian_part(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    (a + a.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Trace over the last tensor factor of dimension `d`.
pub fn partial_trace_last(a: &DMatrix<Complex64>, d: usize) -> DMatrix<Complex64> {
    let n = a.nrows() / d;
    DMatrix::from_fn(n, n, |i, j| (0..d).map(|l| a[(i * d + l, j * d + l)]).sum())
}

/// `Tr|A|` of the Hermitian part of `A`.
pub fn trace_norm(a: &DMatrix<Complex64>) -> f64 {
    SymmetricEigen::new(hermitian_part(a)).eigenvalues.iter().map(|v| v.abs()).sum()
}

/// `γ^(k)_{P,R} = ⟨a†_{r₁}⋯a†_{r_k} a_{p_k}⋯a_{p₁}⟩ / (N(N−1)⋯(N−k+1))`.
pub fn reduce(state: &BosonicState, k: usize) -> Result<DensityMatrixK> {
    let occ = &state.basis;
    let (d, n) = (occ.modes(), occ.particles());
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!("marginal order {k} needs 1 <= k <= N = {n}")));
    }
    let size = d.checked_pow(k as u32).filter(|&s| s <= MARGINAL_DIM_CAP);
    let Some(size) = size else {
        return Err(Error::SizeExceeded { dim: d.saturating_pow(k as u32), cap: MARGINAL_DIM_CAP });
    };
    // vectors a_{p_j}⋯a_{p₁}ψ for nondecreasing tuples, built level by level
    let mut level: Vec<(Vec<usize>, Vec<Complex64>)> = vec![(Vec::new(), state.coefficients.clone())];
    let mut from = (**occ).clone();
    for _ in 0..k {
        let to = OccupationBasis::with_cap(d, from.particles() - 1, usize::MAX)?;
        let maps: Vec<_> = (0..d).map(|p| annihilation_map(&from, &to, p)).collect();
        let mut next = Vec::new();
        for (tuple, v) in &level {
            let start = tuple.last().copied().unwrap_or(0);
            for (p, map) in maps.iter().enumerate().skip(start) {
                let mut t = tuple.clone();
                t.push(p);
                next.push((t, apply_map(map, to.len(), v)));
            }
        }
        level = next;
        from = to;
    }
    let lookup: std::collections::HashMap<Vec<usize>, usize> =
        level.iter().enumerate().map(|(i, (t, _))| (t.clone(), i)).collect();
    let m = level.len();
    let mut gram = DMatrix::<Complex64>::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let g: Complex64 = level[j].1.iter().zip(&level[i].1).map(|(a, b)| a.conj() * b).sum();
            gram[(i, j)] = g;
            gram[(j, i)] = g.conj();
        }
    }
    let falling: f64 = (0..k).map(|i| (n - i) as f64).product();
    let slot: Vec<usize> = (0..size)
        .map(|idx| {
            let mut t = tuple_of(idx, d, k);
            t.sort_unstable();
            lookup[&t]
        })
        .collect();
    // gram[(i, j)] = ⟨A_j, A_i⟩ is the (i, j) entry with row tuple i
    let entries = DMatrix::from_fn(size, size, |r, c| gram[(slot[r], slot[c])] / falling);
    Ok(DensityMatrixK { k, d, entries })
}

/// `φ^{⊗k}` as a `D^k` vector.
pub fn tensor_power(phi: &[Complex64], k: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(1.0, 0.0)];
    for _ in 0..k {
        out = out.iter().flat_map(|a| phi.iter().map(move |b| a * b)).collect();
    }
    out
}

fn projector(v: &[Complex64]) -> DMatrix<Complex64> {
    DMatrix::from_fn(v.len(), v.len(), |i, j| v[i] * v[j].conj())
}

/// `Tr|γ − |φ^{⊗k}⟩⟨φ^{⊗k}||` for a unit vector `φ` in the mode space.
pub fn trace_distance_pure_power(gamma: &DensityMatrixK, phi: &[Complex64]) -> Result<f64> {
    let nrm = crate::manybody::norm(phi);
    if (nrm - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized(nrm));
    }
    if phi.len() != gamma.d {
        return Err(Error::DimensionMismatch(format!("{} amplitudes for {} modes", phi.len(), gamma.d)));
    }
    Ok(trace_norm(&(&gamma.entries - projector(&tensor_power(phi, gamma.k)))))
}

/// Trace distance to `|φ⟩⟨φ|^{⊗k}` when only the projection `c` of the unit
/// vector `φ` onto the mode space is known. The remainder is represented by
/// one extra direction of weight `1 − ‖c‖²`, which is exact because every
/// term lives in the span of the modes and that direction.
pub fn trace_distance_truncated(gamma: &DensityMatrixK, c: &[Complex64]) -> Result<f64> {
    let d = gamma.d;
    if c.len() != d {
        return Err(Error::DimensionMismatch(format!("{} amplitudes for {d} modes", c.len())));
    }
    let w = crate::manybody::norm(c);
    if w > 1.0 + 1e-9 {
        return Err(Error::NotNormalized(w));
    }
    // a deficit at rounding level would otherwise surface as its square root
    let deficit = 1.0 - w * w;
    if deficit <= 64.0 * f64::EPSILON {
        return trace_distance_pure_power(gamma, c);
    }
    let e = d + 1;
    let k = gamma.k;
    let mut phi = c.to_vec();
    phi.push(Complex64::new(deficit.sqrt(), 0.0));
    let embed: Vec<usize> = (0..gamma.dim()).map(|i| index_of_tuple(&tuple_of(i, d, k), e)).collect();
    let mut a = -projector(&tensor_power(&phi, k));
    for (i, &ei) in embed.iter().enumerate() {
        for (j, &ej) in embed.iter().enumerate() {
            a[(ei, ej)] += gamma.entries[(i, j)];
        }
    }
    Ok(trace_norm(&a))
}

fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
    let mut a = DMatrix::<Complex64>::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = if i == j { 0.0 } else { StandardNormal.sample(rng) };
            a[(i, j)] = Complex64::new(re, im);
            a[(j, i)] = Complex64::new(re, -im);
        }
    }
    let op_norm = SymmetricEigen::new(a.clone()).eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    a / Complex64::new(op_norm, 0.0)
}

/// Finite surrogate of the weak-* metric: `Σ_{i≤m} 2^{−i} |Tr J_i(γ−σ)|`
/// with a fixed seeded family of Hermitian `J_i`, `‖J_i‖_op = 1`.
pub fn metric_dk(gamma: &DensityMatrixK, sigma: &DensityMatrixK, family_size: usize) -> Result<f64> {
    if gamma.dim() != sigma.dim() || gamma.k != sigma.k {
        return Err(Error::DimensionMismatch(format!("marginals of size {} and {}", gamma.dim(), sigma.dim())));
    }
    let n = gamma.dim();
    let diff = &gamma.entries - &sigma.entries;
    let mut rng = ChaCha8Rng::seed_from_u64(FAMILY_SEED ^ n as u64);
    let mut total = 0.0;
    let mut weight = 1.0;
    for _ in 0..family_size {
        weight *= 0.5;
        let j = random_hermitian(n, &mut rng);
        total += weight * (&j * &diff).trace().norm();
    }
    Ok(total)
}

/// `Tr S² γ^(1) = Σ_p λ_p γ_pp`.
pub fn one_body_energy(gamma1: &DensityMatrixK, eigenvalues: &[f64]) -> f64 {
    eigenvalues.iter().enumerate().map(|(p, l)| l * gamma1.entries[(p, p)].re).sum()
}
