//! Stability-of-matter inequalities checked as minimum-eigenvalue problems
//! on the truncated spaces, and the divergence counterexample.

mod counterexample;

pub use counterexample::{
    chi, counterexample_trace, psi_eps, gradient_norm_squared, trace_identity_check, CounterexampleRow, CounterexampleTrace,
    FourierProfile, TraceIdentity,
};

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::hermite::{hermite_functions_omega, HermiteBasis, Quadrature1D};
use crate::interaction::{InteractionSpec, PairTable, Profile};
use crate::manybody::{assemble_operator, min_eig_dense, min_eig_symmetric, Eigenpair, OccupationBasis};
use crate::nls::{hartree_energy, random_hartree_trial, threshold_l1};

/// Slack below zero still counted as nonnegative.
pub const EIG_TOLERANCE: f64 = 1e-8;
/// Largest eigenresidual accepted as a certificate.
pub const CERTIFICATE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Fails,
    /// Negative although the hypotheses hold: the statement only covers
    /// `N > N₀`, which is not quantified.
    BelowThresholdN,
    /// The projection hypothesis on `M` is violated.
    BelowThresholdM,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EstimateParams {
    pub n: usize,
    pub k: Option<usize>,
    pub alpha: f64,
    pub c0: Option<f64>,
    pub m: Option<f64>,
    pub epsilon: Option<f64>,
    pub beta: f64,
    pub lambda: f64,
    pub omega: f64,
    pub cutoff_energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub inequality_id: String,
    pub parameters: EstimateParams,
    pub min_eigenvalue: f64,
    pub verdict: Verdict,
    pub certificate: f64,
}

fn lambda_of(spec: &InteractionSpec) -> f64 {
    match spec.profile {
        Profile::Zero => 0.0,
        Profile::Gaussian { lambda } => lambda,
        Profile::RepulsiveGaussian { strength } => -strength,
    }
}

fn base_params(n: usize, alpha: f64, spec: &InteractionSpec, basis: &HermiteBasis) -> EstimateParams {
    EstimateParams {
        n,
        alpha,
        beta: spec.beta,
        lambda: lambda_of(spec),
        omega: basis.omega(),
        cutoff_energy: basis.cutoff_energy(),
        ..Default::default()
    }
}

fn verdict(value: f64, certificate: f64, hypotheses: bool) -> Verdict {
    if value >= -EIG_TOLERANCE && certificate < CERTIFICATE_TOLERANCE {
        Verdict::Holds
    } else if hypotheses {
        Verdict::BelowThresholdN
    } else {
        Verdict::Fails
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}

/// Whether `‖V‖₁ < 2α/C_gn⁴`.
pub fn below_threshold(spec: &InteractionSpec, alpha: f64) -> Result<bool> {
    Ok(spec.l1_norm() < threshold_l1(alpha)?)
}

fn gate(spec: &InteractionSpec, alpha: f64) -> Result<()> {
    if !below_threshold(spec, alpha)? {
        return Err(Error::Precondition(format!(
            "‖V‖₁ = {} is not below 2α/C_gn⁴ = {}",
            spec.l1_norm(),
            threshold_l1(alpha)?
        )));
    }
    Ok(())
}

fn sector(basis: &HermiteBasis, n: usize) -> Result<Arc<OccupationBasis>> {
    Ok(Arc::new(OccupationBasis::new(basis.len(), n)?))
}

fn pair_table(basis: &HermiteBasis, spec: &InteractionSpec) -> Result<Option<PairTable>> {
    if spec.is_zero() {
        Ok(None)
    } else {
        Ok(Some(PairTable::new(basis, spec)?))
    }
}

/// `C₀ + N^{-1}H_{N,α}` on the symmetric sector, with
/// `H_{N,α} = α Σ S_j² + N^{-1} Σ_{i<j} V_N(x_i − x_j)`.
fn lifted_pair_form(basis: &HermiteBasis, spec: &InteractionSpec, alpha: f64, c0: f64) -> Result<Eigenpair> {
    let n = spec.n;
    let occ = sector(basis, n)?;
    let nf = n as f64;
    let one_body: Vec<f64> = basis.eigenvalues().iter().map(|l| alpha * l / nf).collect();
    let table = pair_table(basis, spec)?;
    let op = assemble_operator(&occ, &one_body, table.as_ref(), 1.0 / (nf * nf), c0)?;
    min_eig_symmetric(&op)
}

fn prop23_report(
    id: &str,
    basis: &HermiteBasis,
    spec: &InteractionSpec,
    alpha: f64,
    c0: f64,
    hypotheses: bool,
) -> Result<EstimateReport> {
    if spec.n < 2 {
        return Err(Error::InvalidParameter("pair inequalities need N >= 2".into()));
    }
    // ⟨ψ, (2C₀ + H_{12,α})ψ⟩ = 2⟨ψ, (C₀ + N^{-1}H_{N,α})ψ⟩ for symmetric ψ
    let eig = lifted_pair_form(basis, spec, alpha, c0)?;
    let value = 2.0 * eig.value;
    let certificate = 2.0 * eig.residual;
    Ok(EstimateReport {
        inequality_id: id.into(),
        parameters: EstimateParams { c0: Some(c0), ..base_params(spec.n, alpha, spec, basis) },
        min_eigenvalue: value,
        verdict: verdict(value, certificate, hypotheses),
        certificate,
    })
}

/// Minimum over symmetric `ψ_N` of `⟨ψ_N, (2C₀ + H_{12,α})ψ_N⟩`,
/// `H_{12,α} = αS₁² + αS₂² + ((N−1)/N)V_{N12}`.
pub fn check_prop23(basis: &HermiteBasis, spec: &InteractionSpec, alpha: f64, c0: f64) -> Result<EstimateReport> {
    check_alpha(alpha)?;
    gate(spec, alpha)?;
    prop23_report("prop23", basis, spec, alpha, c0, true)
}

/// `check_prop23` without the `‖V‖₁` gate, for demonstrating what happens
/// above the threshold. Negative values are reported as `Fails`.
pub fn check_prop23_ungated(basis: &HermiteBasis, spec: &InteractionSpec, alpha: f64, c0: f64) -> Result<EstimateReport> {
    check_alpha(alpha)?;
    let ok = below_threshold(spec, alpha)?;
    prop23_report("prop23", basis, spec, alpha, c0, ok)
}

/// Minimum over symmetric `ψ_N` of `⟨ψ_N, (2C₀ + H₁₂)ψ_N⟩ − 2(1−α)‖S₁ψ_N‖²`.
/// After symmetrization this is the same sector operator as in
/// `check_prop23`: `(1−α)(S₁²+S₂²)` and `2(1−α)S₁²` agree on symmetric states.
pub fn check_thm22(basis: &HermiteBasis, spec: &InteractionSpec, alpha: f64, c0: f64) -> Result<EstimateReport> {
    check_alpha(alpha)?;
    gate(spec, alpha)?;
    prop23_report("thm22", basis, spec, alpha, c0, true)
}

/// `c₀ = min((1−α)/√2, 1/2)`.
pub fn main_energy_c0(alpha: f64) -> f64 {
    ((1.0 - alpha) / std::f64::consts::SQRT_2).min(0.5)
}

/// Minimum over symmetric `ψ_N` of
/// `⟨ψ, (N^{-1}H_N + 1)^k ψ⟩ − c₀^k ‖S₁⋯S_kψ‖²` for `k ∈ {1, 2}`.
pub fn check_main_energy(basis: &HermiteBasis, spec: &InteractionSpec, k: usize, alpha: f64) -> Result<EstimateReport> {
    check_alpha(alpha)?;
    if !(1..=2).contains(&k) {
        return Err(Error::InvalidParameter(format!("k must be 1 or 2, got {k}")));
    }
    let n = spec.n;
    if n < k {
        return Err(Error::InvalidParameter(format!("need N >= k, got N = {n}")));
    }
    let hyp = below_threshold(spec, alpha)?;
    let c0 = main_energy_c0(alpha);
    let occ = sector(basis, n)?;
    let nf = n as f64;
    let table = pair_table(basis, spec)?;
    let lam = basis.eigenvalues();
    let eig = if k == 1 {
        let one_body: Vec<f64> = lam.iter().map(|l| (1.0 - c0) * l / nf).collect();
        let op = assemble_operator(&occ, &one_body, table.as_ref(), 1.0 / (nf * nf), 1.0)?;
        min_eig_symmetric(&op)?
    } else {
        if occ.len() > crate::manybody::DENSE_EIG_CAP {
            return Err(Error::SizeExceeded { dim: occ.len(), cap: crate::manybody::DENSE_EIG_CAP });
        }
        let one_body: Vec<f64> = lam.iter().map(|l| l / nf).collect();
        let a = assemble_operator(&occ, &one_body, table.as_ref(), 1.0 / (nf * nf), 1.0)?.to_dense();
        // Sym(S₁²S₂²) = [(Σλn)² − Σλ²n] / (N(N−1)) on occupation vectors
        let sym: Vec<f64> = occ
            .states()
            .iter()
            .map(|m| {
                let s1: f64 = m.iter().zip(lam).map(|(&c, l)| c as f64 * l).sum();
                let s2: f64 = m.iter().zip(lam).map(|(&c, l)| c as f64 * l * l).sum();
                (s1 * s1 - s2) / (nf * (nf - 1.0))
            })
            .collect();
        let op = &a * &a - DMatrix::from_diagonal(&DVector::from_vec(sym)) * (c0 * c0);
        min_eig_dense(&op)
    };
    Ok(EstimateReport {
        inequality_id: format!("main_energy_k{k}"),
        parameters: EstimateParams { k: Some(k), c0: Some(c0), ..base_params(n, alpha, spec, basis) },
        min_eigenvalue: eig.value,
        verdict: verdict(eig.value, eig.residual, hyp),
        certificate: eig.residual,
    })
}

/// `∫ φ_p φ_q φ_r φ_s` over the plane, the matrix elements of `δ(x₁−x₂)`.
fn delta_table(basis: &HermiteBasis) -> DMatrix<f64> {
    let omega = basis.omega();
    let deg = basis.max_degree();
    let q = Quadrature1D::gauss_hermite(2 * deg + 2).scaled(2.0 * omega);
    let h: Vec<Vec<f64>> = q.nodes.iter().map(|&x| hermite_functions_omega(deg, x, omega)).collect();
    let axis = |i: u32, j: u32, k: u32, l: u32| -> f64 {
        q.weights.iter().zip(&h).map(|(w, v)| w * v[i as usize] * v[j as usize] * v[k as usize] * v[l as usize]).sum()
    };
    let modes = basis.modes();
    let d = modes.len();
    DMatrix::from_fn(d * d, d * d, |row, col| {
        let (p, q2, r, s) = (modes[row / d], modes[row % d], modes[col / d], modes[col % d]);
        axis(p.n1, q2.n1, r.n1, s.n1) * axis(p.n2, q2.n2, r.n2, s.n2)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairSweepRow {
    pub cutoff_energy: f64,
    pub pair_dim: usize,
    pub min_eigenvalue: f64,
}

/// Two-particle analogue without symmetrization over many particles: the
/// lowest eigenvalue of `2 + S₁² + S₂² − ((N−1)/N) b₀ δ(x₁−x₂)`, the
/// contact limit of `2 + H₁₂` at `N = 2`, on growing truncations. In the
/// plane the contact operator is unbounded below, so the sequence keeps
/// decreasing as the cutoff grows.
pub fn nonsymmetric_pair_sweep(omega: f64, coupling: f64, cutoffs: &[f64]) -> Result<Vec<PairSweepRow>> {
    let mut rows = Vec::new();
    for &cutoff in cutoffs {
        let basis = HermiteBasis::new(omega, cutoff)?;
        let d = basis.len();
        if d * d > crate::manybody::DENSE_EIG_CAP {
            return Err(Error::SizeExceeded { dim: d * d, cap: crate::manybody::DENSE_EIG_CAP });
        }
        let lam = basis.eigenvalues();
        let mut op = delta_table(&basis) * (-0.5 * coupling);
        for i in 0..d * d {
            op[(i, i)] += 2.0 + lam[i / d] + lam[i % d];
        }
        rows.push(PairSweepRow { cutoff_energy: cutoff, pair_dim: d * d, min_eigenvalue: min_eig_dense(&op).value });
    }
    Ok(rows)
}

/// `4√(‖V‖_∞/α) N^β / ε`, the smallest `M` the projection lemma admits.
pub fn lewin_threshold_m(spec: &InteractionSpec, alpha: f64, epsilon: f64) -> f64 {
    4.0 * (spec.linf_norm() / alpha).sqrt() * spec.length_scale() / epsilon
}

/// Minimum eigenvalue of
/// `H_{12,α} − P H_{12,α} P + 2ε² P|V_{N12}|P` on the full two-particle mode
/// space, `P = P^{(2)}_{≤M}` the projector onto modes with `S ≤ M` in both
/// particles.
pub fn check_lewin_projection(
    basis: &HermiteBasis,
    spec: &InteractionSpec,
    m: f64,
    epsilon: f64,
    alpha: f64,
) -> Result<EstimateReport> {
    check_alpha(alpha)?;
    if !(epsilon > 0.0 && m > 0.0) {
        return Err(Error::InvalidParameter(format!("need M > 0 and ε > 0, got M = {m}, ε = {epsilon}")));
    }
    if basis.cutoff_energy() <= m * m || basis.eigenvalues().iter().all(|&l| l <= m * m) {
        return Err(Error::InvalidParameter(format!(
            "the basis cutoff {} must lie strictly above M² = {}",
            basis.cutoff_energy(),
            m * m
        )));
    }
    let d = basis.len();
    if d * d > crate::manybody::DENSE_EIG_CAP {
        return Err(Error::SizeExceeded { dim: d * d, cap: crate::manybody::DENSE_EIG_CAP });
    }
    let nf = spec.n as f64;
    let lam = basis.eigenvalues();
    let v = match pair_table(basis, spec)? {
        Some(t) => t.two_particle_matrix(),
        None => DMatrix::zeros(d * d, d * d),
    };
    // the Gaussian profiles have constant sign, so |V_N| = sign(V)·V_N
    let abs_v = &v * spec.peak().signum();
    let mut h = v * ((nf - 1.0) / nf);
    for i in 0..d * d {
        h[(i, i)] += alpha * (lam[i / d] + lam[i % d]);
    }
    let low = basis.projector_leq(m);
    let inside: Vec<bool> = (0..d * d).map(|i| low[i / d] && low[i % d]).collect();
    let eps2 = 2.0 * epsilon * epsilon;
    // H − PHP vanishes on the P block, where only 2ε²P|V|P remains
    let op = DMatrix::from_fn(d * d, d * d, |r, c| {
        if inside[r] && inside[c] {
            eps2 * abs_v[(r, c)]
        } else {
            h[(r, c)]
        }
    });
    let eig = min_eig_dense(&op);
    let hyp = m >= lewin_threshold_m(spec, alpha, epsilon);
    let verdict = if hyp { verdict(eig.value, eig.residual, false) } else { Verdict::BelowThresholdM };
    Ok(EstimateReport {
        inequality_id: "lewin_projection".into(),
        parameters: EstimateParams { m: Some(m), epsilon: Some(epsilon), ..base_params(spec.n, alpha, spec, basis) },
        min_eigenvalue: eig.value,
        verdict,
        certificate: eig.residual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HartreeScan {
    pub trials: usize,
    pub nonnegative: usize,
    pub fraction: f64,
    pub min_energy: f64,
    pub epsilon: f64,
    pub below_threshold: bool,
}

/// Evaluate the attenuated Hartree energy on `trials` random normalized
/// fields and count the nonnegative ones (slack `1e-10`). Trial `i` uses
/// its own stream of `seed`, so the result does not depend on scheduling.
pub fn hartree_positivity_scan(
    grid: &GridSpec,
    omega: f64,
    spec: &InteractionSpec,
    alpha: f64,
    epsilon: f64,
    trials: usize,
    seed: u64,
) -> Result<HartreeScan> {
    use rayon::prelude::*;
    check_alpha(alpha)?;
    let energies: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let phi = random_hartree_trial(grid, &mut rng)?;
            hartree_energy(&phi, spec, alpha, epsilon, omega)
        })
        .collect::<Result<_>>()?;
    let nonnegative = energies.iter().filter(|&&e| e >= -1e-10).count();
    Ok(HartreeScan {
        trials,
        nonnegative,
        fraction: nonnegative as f64 / trials.max(1) as f64,
        min_energy: energies.iter().copied().fold(f64::INFINITY, f64::min),
        epsilon,
        below_threshold: below_threshold(spec, alpha)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nls::pinned_epsilon;

    fn gaussian_at(fraction: f64, alpha: f64, n: usize) -> InteractionSpec {
        InteractionSpec::gaussian_with_l1(fraction * threshold_l1(alpha).unwrap(), 0.1, n).unwrap()
    }

    #[test]
    fn free_prop23_is_two_c0_plus_ground_energy() {
        let basis = HermiteBasis::new(1.0, 6.0).unwrap();
        for n in [2usize, 3, 5] {
            let spec = InteractionSpec::new(Profile::Zero, 0.1, n).unwrap();
            let r = check_prop23(&basis, &spec, 0.5, 0.25).unwrap();
            // 2C₀ + 2α·2ω
            assert!((r.min_eigenvalue - (0.5 + 2.0)).abs() < 1e-12, "{}", r.min_eigenvalue);
            assert_eq!(r.verdict, Verdict::Holds);
        }
    }

    #[test]
    fn gate_rejects_strong_coupling() {
        let basis = HermiteBasis::new(1.0, 4.0).unwrap();
        let spec = gaussian_at(5.0, 0.9, 2);
        assert!(matches!(check_prop23(&basis, &spec, 0.9, 0.1), Err(Error::Precondition(_))));
        let r = check_prop23_ungated(&basis, &spec, 0.9, 0.1).unwrap();
        assert!(r.verdict == Verdict::Fails || r.verdict == Verdict::Holds);
    }

    #[test]
    fn free_main_energy_holds() {
        let basis = HermiteBasis::new(1.0, 6.0).unwrap();
        let alpha = 0.5;
        let c0 = main_energy_c0(alpha);
        for n in [2usize, 3, 4] {
            let spec = InteractionSpec::new(Profile::Zero, 0.1, n).unwrap();
            let r1 = check_main_energy(&basis, &spec, 1, alpha).unwrap();
            // 1 + (1 − c₀)·2ω at the ground product
            assert!((r1.min_eigenvalue - (1.0 + (1.0 - c0) * 2.0)).abs() < 1e-12);
            let r2 = check_main_energy(&basis, &spec, 2, alpha).unwrap();
            assert_eq!(r2.verdict, Verdict::Holds, "{r2:?}");
        }
    }

    #[test]
    fn contact_sweep_decreases() {
        let rows = nonsymmetric_pair_sweep(1.0, 5.0, &[4.0, 8.0, 12.0]).unwrap();
        assert!(rows.windows(2).all(|w| w[1].min_eigenvalue < w[0].min_eigenvalue), "{rows:?}");
    }

    #[test]
    fn delta_table_ground_element() {
        // ∫ φ₀⁴ = ω/(2π) in the plane
        let basis = HermiteBasis::new(1.5, 6.0).unwrap();
        let t = delta_table(&basis);
        assert!((t[(0, 0)] - 1.5 / (2.0 * std::f64::consts::PI)).abs() < 1e-13);
    }

    #[test]
    fn lewin_projection_free_case() {
        let basis = HermiteBasis::new(1.0, 10.0).unwrap();
        let spec = InteractionSpec::new(Profile::Zero, 0.1, 4).unwrap();
        let r = check_lewin_projection(&basis, &spec, 2.0, 0.5, 0.9).unwrap();
        assert!(r.min_eigenvalue >= -1e-12);
        assert!(check_lewin_projection(&basis, &spec, 4.0, 0.5, 0.9).is_err());
    }

    #[test]
    fn hartree_scan_free_and_subcritical() {
        let grid = GridSpec::new(8.0, 64).unwrap();
        let zero = InteractionSpec::new(Profile::Zero, 0.1, 100).unwrap();
        assert_eq!(hartree_positivity_scan(&grid, 1.0, &zero, 0.9, 0.5, 20, 1).unwrap().fraction, 1.0);
        let spec = gaussian_at(0.9, 0.9, 100);
        let eps = pinned_epsilon(spec.l1_norm(), 0.9).unwrap().unwrap();
        let scan = hartree_positivity_scan(&grid, 1.0, &spec, 0.9, eps, 20, 2).unwrap();
        assert_eq!(scan.nonnegative, 20);
        assert!(scan.below_threshold);
    }
}
