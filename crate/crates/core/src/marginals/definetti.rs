//! Constructive de Finetti measure `dμ(φ) = dim_sym |⟨φ^{⊗N}, ψ⟩|² dφ` on the
//! unit sphere of `C^D`, its Monte Carlo estimate and its exact moment.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{reduce, tensor_power, trace_norm};
use crate::error::{Error, Result};
use crate::manybody::{annihilation_map, binomial, norm, BosonicState, OccupationBasis};

const GROUPS: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct DeFinettiSample {
    pub phi: Vec<Complex64>,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeFinettiReport {
    pub modes: usize,
    pub particles: usize,
    pub samples: usize,
    pub estimate: f64,
    pub mc_error: f64,
    pub bound: f64,
    pub weight_mean: f64,
    pub weight_error: f64,
    pub insufficient_samples: bool,
    pub within_bound: bool,
}

struct Overlap {
    /// `√(N!/∏m!)` per occupation vector
    multinomial: Vec<f64>,
    dim_sym: f64,
}

impl Overlap {
    fn new(basis: &OccupationBasis) -> Self {
        let lf: Vec<f64> = (0..=basis.particles()).scan(0.0, |acc, i| {
            if i > 0 {
                *acc += (i as f64).ln();
            }
            Some(*acc)
        }).collect();
        let n = basis.particles();
        let multinomial = basis
            .states()
            .iter()
            .map(|m| (0.5 * (lf[n] - m.iter().map(|&k| lf[k as usize]).sum::<f64>())).exp())
            .collect();
        Self { multinomial, dim_sym: binomial(basis.modes() + n - 1, n) }
    }

    fn weight(&self, state: &BosonicState, phi: &[Complex64]) -> f64 {
        let n = state.basis.particles();
        let powers: Vec<Vec<Complex64>> = phi
            .iter()
            .map(|z| {
                let c = z.conj();
                (0..=n).scan(Complex64::new(1.0, 0.0), |acc, i| {
                    if i > 0 {
                        *acc *= c;
                    }
                    Some(*acc)
                }).collect()
            })
            .collect();
        let overlap: Complex64 = state
            .basis
            .states()
            .iter()
            .zip(&self.multinomial)
            .zip(&state.coefficients)
            .map(|((m, f), c)| {
                let p = m.iter().enumerate().fold(Complex64::new(1.0, 0.0), |acc, (i, &k)| acc * powers[i][k as usize]);
                p * *f * c
            })
            .sum();
        self.dim_sym * overlap.norm_sqr()
    }
}

fn draw(d: usize, seed: u64, index: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let v: Vec<Complex64> =
        (0..d).map(|_| Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))).collect();
    let n = norm(&v);
    v.iter().map(|z| z / n).collect()
}

/// The `index`-th Haar sample of the stream `seed` with its density weight.
pub fn sample_definetti(state: &BosonicState, seed: u64, index: u64) -> DeFinettiSample {
    let phi = draw(state.basis.modes(), seed, index);
    let weight = Overlap::new(&state.basis).weight(state, &phi);
    DeFinettiSample { phi, weight }
}

/// Monte Carlo estimate of `Tr|γ^(2) − ∫|φ^{⊗2}⟩⟨φ^{⊗2}| dμ(φ)|` with a
/// grouped jackknife error, compared with the bound `8D/N`.
pub fn definetti_distance(state: &BosonicState, samples: usize, seed: u64) -> Result<DeFinettiReport> {
    let (d, n) = (state.basis.modes(), state.basis.particles());
    if n < 2 {
        return Err(Error::InvalidParameter("the de Finetti distance needs N >= 2".into()));
    }
    if samples < GROUPS {
        return Err(Error::InvalidParameter(format!("need at least {GROUPS} samples, got {samples}")));
    }
    let gamma = reduce(state, 2)?;
    let overlap = Overlap::new(&state.basis);
    let dd = d * d;
    let sums: Vec<(DMatrix<Complex64>, f64, usize)> = (0..GROUPS)
        .into_par_iter()
        .map(|g| {
            let lo = g * samples / GROUPS;
            let hi = (g + 1) * samples / GROUPS;
            let mut acc = DMatrix::<Complex64>::zeros(dd, dd);
            let mut wsum = 0.0;
            for idx in lo..hi {
                let phi = draw(d, seed, idx as u64);
                let w = overlap.weight(state, &phi);
                let v = tensor_power(&phi, 2);
                for i in 0..dd {
                    let vi = v[i] * w;
                    for j in 0..dd {
                        acc[(i, j)] += vi * v[j].conj();
                    }
                }
                wsum += w;
            }
            (acc, wsum, hi - lo)
        })
        .collect();
    let mut total = DMatrix::<Complex64>::zeros(dd, dd);
    let mut wtotal = 0.0;
    for (a, w, _) in &sums {
        total += a;
        wtotal += w;
    }
    let distance = |m: &DMatrix<Complex64>, count: usize| {
        trace_norm(&(&gamma.entries - m * Complex64::new(1.0 / count as f64, 0.0)))
    };
    let estimate = distance(&total, samples);
    let leave_out: Vec<f64> = sums.iter().map(|(a, _, c)| distance(&(&total - a), samples - c)).collect();
    let mean = leave_out.iter().sum::<f64>() / GROUPS as f64;
    let g = GROUPS as f64;
    let mc_error = ((g - 1.0) / g * leave_out.iter().map(|v| (v - mean).powi(2)).sum::<f64>()).sqrt();
    let group_means: Vec<f64> = sums.iter().map(|(_, w, c)| w / *c as f64).collect();
    let weight_mean = wtotal / samples as f64;
    let weight_error =
        (group_means.iter().map(|m| (m - weight_mean).powi(2)).sum::<f64>() / (g * (g - 1.0))).sqrt();
    let bound = 8.0 * d as f64 / n as f64;
    let insufficient_samples = mc_error > 0.5 * bound;
    if insufficient_samples {
        log::warn!("de Finetti estimate at D={d}, N={n}: insufficient samples (mc_error {mc_error:e})");
    }
    Ok(DeFinettiReport {
        modes: d,
        particles: n,
        samples,
        estimate,
        mc_error,
        bound,
        weight_mean,
        weight_error,
        insufficient_samples,
        within_bound: estimate <= bound + 3.0 * mc_error,
    })
}

/// `a†_p v`, as the adjoint of the annihilation map `small ← big`.
fn create(big: &OccupationBasis, small: &OccupationBasis, p: usize, v: &[Complex64]) -> Vec<Complex64> {
    annihilation_map(big, small, p)
        .iter()
        .map(|m| match m {
            Some((j, amp)) => v[*j] * *amp,
            None => Complex64::new(0.0, 0.0),
        })
        .collect()
}

/// `∫|φ^{⊗2}⟩⟨φ^{⊗2}| dμ(φ)` in closed form. Averaging over the sphere turns
/// the integrand into the symmetric projector on `N+2` particles, whose
/// matrix elements against `ψ⊗e_a` are `⟨a†_a a†_b ψ, a†_r a†_s ψ⟩/((N+1)(N+2))`.
pub fn definetti_moment(state: &BosonicState) -> Result<DMatrix<Complex64>> {
    let (d, n) = (state.basis.modes(), state.basis.particles());
    let up1 = OccupationBasis::with_cap(d, n + 1, usize::MAX)?;
    let up2 = OccupationBasis::with_cap(d, n + 2, usize::MAX)?;
    let mut lifted: Vec<Vec<Complex64>> = Vec::with_capacity(d * d);
    let singles: Vec<Vec<Complex64>> =
        (0..d).map(|q| create(&up1, &state.basis, q, &state.coefficients)).collect();
    for p in 0..d {
        for single in &singles {
            lifted.push(create(&up2, &up1, p, single));
        }
    }
    let c = binomial(d + n - 1, n) / binomial(d + n + 1, n + 2) / ((n + 1) * (n + 2)) as f64;
    let dd = d * d;
    Ok(DMatrix::from_fn(dd, dd, |a, b| {
        lifted[a].iter().zip(&lifted[b]).map(|(x, y)| x.conj() * y).sum::<Complex64>() * c
    }))
}

/// `Tr|γ^(2) − ∫|φ^{⊗2}⟩⟨φ^{⊗2}| dμ|` without sampling.
pub fn definetti_exact_distance(state: &BosonicState) -> Result<f64> {
    let gamma = reduce(state, 2)?;
    Ok(trace_norm(&(&gamma.entries - definetti_moment(state)?)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manybody::product_state;
    use std::sync::Arc;

    #[test]
    fn samples_are_unit_vectors_and_reproducible() {
        let s = super::super::tests::random_state(3, 4, 2);
        let a = sample_definetti(&s, 7, 11);
        let b = sample_definetti(&s, 7, 11);
        assert_eq!(a, b);
        assert!((norm(&a.phi) - 1.0).abs() < 1e-12);
        assert!(a.weight >= 0.0);
        assert_ne!(sample_definetti(&s, 7, 12).phi, a.phi);
    }

    #[test]
    fn exact_moment_has_unit_trace() {
        for (d, n) in [(2, 2), (3, 4), (4, 3)] {
            let s = super::super::tests::random_state(d, n, 9);
            let m = definetti_moment(&s).unwrap();
            assert!((m.trace() - 1.0).norm() < 1e-12);
        }
    }

    #[test]
    fn monte_carlo_agrees_with_exact_moment() {
        let s = super::super::tests::random_state(2, 3, 4);
        let r = definetti_distance(&s, 40_000, 1).unwrap();
        let exact = definetti_exact_distance(&s).unwrap();
        assert!((r.estimate - exact).abs() < 4.0 * r.mc_error + 1e-3, "{} vs {exact}", r.estimate);
        assert!((r.weight_mean - 1.0).abs() < 4.0 * r.weight_error);
        assert!(r.within_bound);
    }

    #[test]
    fn product_state_distance_decays_like_one_over_n() {
        let phi = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)];
        let mut last = f64::INFINITY;
        for n in [2usize, 4, 8, 16] {
            let occ = Arc::new(OccupationBasis::new(3, n).unwrap());
            let dist = definetti_exact_distance(&product_state(occ, &phi).unwrap()).unwrap();
            assert!(dist < last && dist <= 24.0 / n as f64);
            last = dist;
        }
    }
}
