//! Hierarchy diagnostics: BBGKY residuals along many-body trajectories,
//! marginal compatibility, and the pairing of `γ^(2)` against `V_N` and a
//! mollified delta.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{reduce, trace_norm, tuple_of, DensityMatrixK};
use crate::error::{Error, Result};
use crate::hermite::HermiteBasis;
use crate::interaction::{InteractionSpec, PairTable};
use crate::manybody::BosonicState;

/// `V(x_i − x_j)` on the `m`-particle mode space (particles counted from 0).
pub fn pair_operator(table: &PairTable, m: usize, i: usize, j: usize) -> DMatrix<f64> {
    let d = table.dim();
    let n = d.pow(m as u32);
    let tuples: Vec<Vec<usize>> = (0..n).map(|x| tuple_of(x, d, m)).collect();
    DMatrix::from_fn(n, n, |r, c| {
        let (p, q) = (&tuples[r], &tuples[c]);
        let spectators = (0..m).filter(|&l| l != i && l != j).all(|l| p[l] == q[l]);
        if spectators {
            table.element(p[i], p[j], q[i], q[j])
        } else {
            0.0
        }
    })
}

fn complexify(a: &DMatrix<f64>) -> DMatrix<Complex64> {
    a.map(|v| Complex64::new(v, 0.0))
}

fn commutator(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    a * b - b * a
}

/// Frobenius norm of `i∂_tγ^(k) − [H_k, γ^(k)] − ((N−k)/N) Σ_j Tr_{k+1}[V_{j,k+1}, γ^(k+1)]`
/// at each interior sample, with the time derivative by central differences.
/// `H_k = Σ_j S_j² + (1/N) Σ_{i<j≤k} V_ij`.
pub fn bbgky_residual(
    trajectory: &[(f64, BosonicState)],
    k: usize,
    interaction: &InteractionSpec,
    basis: &HermiteBasis,
) -> Result<Vec<(f64, f64)>> {
    if trajectory.len() < 3 {
        return Err(Error::InvalidParameter("need at least three time samples".into()));
    }
    let h = trajectory[1].0 - trajectory[0].0;
    if !(h > 0.0) || trajectory.windows(2).any(|w| ((w[1].0 - w[0].0) - h).abs() > 1e-9 * h.max(1.0)) {
        return Err(Error::InvalidParameter("time samples must be uniformly spaced".into()));
    }
    let n = trajectory[0].1.basis.particles();
    let d = basis.len();
    if trajectory[0].1.basis.modes() != d {
        return Err(Error::DimensionMismatch(format!("{} modes in state, {d} in basis", trajectory[0].1.basis.modes())));
    }
    let nf = n as f64;
    let table = if interaction.is_zero() { None } else { Some(PairTable::new(basis, interaction)?) };
    let size = d.pow(k as u32);
    let lambda = basis.eigenvalues();
    let mut hk = DMatrix::<f64>::from_fn(size, size, |r, c| {
        if r == c {
            tuple_of(r, d, k).iter().map(|&p| lambda[p]).sum()
        } else {
            0.0
        }
    });
    let mut coupling = Vec::new();
    if let Some(t) = &table {
        for i in 0..k {
            for j in i + 1..k {
                hk += pair_operator(t, k, i, j) / nf;
            }
        }
        if k < n {
            coupling = (0..k).map(|j| complexify(&pair_operator(t, k + 1, j, k))).collect();
        }
    }
    let hk = complexify(&hk);
    let weight = Complex64::new((n - k) as f64 / nf, 0.0);
    let marginals: Vec<DensityMatrixK> = trajectory.iter().map(|(_, s)| reduce(s, k)).collect::<Result<_>>()?;
    let mut out = Vec::new();
    for idx in 1..trajectory.len() - 1 {
        let g = &marginals[idx].entries;
        let dt = (&marginals[idx + 1].entries - &marginals[idx - 1].entries) * Complex64::new(0.0, 1.0 / (2.0 * h));
        let mut rhs = commutator(&hk, g);
        if !coupling.is_empty() {
            let g1 = reduce(&trajectory[idx].1, k + 1)?.entries;
            for v in &coupling {
                rhs += super::partial_trace_last(&commutator(v, &g1), d) * weight;
            }
        }
        out.push((trajectory[idx].0, (dt - rhs).norm()));
    }
    Ok(out)
}

/// `Tr|Tr_{k+1}γ^(k+1) − γ^(k)|`.
pub fn compatibility_check(state: &BosonicState, k: usize) -> Result<f64> {
    let upper = reduce(state, k + 1)?.partial_trace()?;
    let lower = reduce(state, k)?;
    Ok(trace_norm(&(&upper.entries - &lower.entries)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaRow {
    pub n: usize,
    /// `Tr (J⊗1)(−V_N)γ^(2)`
    pub pairing_potential: f64,
    /// `Tr (J⊗1)(b₀ρ_α)γ^(2)`
    pub pairing_delta: f64,
    pub difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaComparison {
    pub alpha: f64,
    pub coupling: f64,
    pub rows: Vec<DeltaRow>,
    /// `p` in a least-squares fit `difference ∝ N^{−p}`.
    pub exponent: Option<f64>,
}

fn pairing(j: &DMatrix<Complex64>, x: &DMatrix<f64>, gamma: &DMatrix<Complex64>) -> f64 {
    let d = j.nrows();
    let jx = j.kronecker(&DMatrix::<Complex64>::identity(d, d)) * complexify(x);
    (jx * gamma).trace().re
}

/// Pair `γ^(2)` with `−V_N(x₁−x₂)` for each interaction in `sequence` and
/// with `b₀ρ_α(x₁−x₂)`, `ρ_α(x) = e^{−|x|²/α²}/(πα²)`, `b₀ = |∫V|`.
pub fn delta_comparison(
    gamma2: &DensityMatrixK,
    j: &DMatrix<Complex64>,
    sequence: &[InteractionSpec],
    basis: &HermiteBasis,
    alpha: f64,
) -> Result<DeltaComparison> {
    if gamma2.k != 2 || gamma2.d != basis.len() || j.nrows() != basis.len() || !j.is_square() {
        return Err(Error::DimensionMismatch("delta comparison needs γ^(2) and J on the basis modes".into()));
    }
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!("mollifier width must be positive, got {alpha}")));
    }
    let Some(first) = sequence.first() else {
        return Err(Error::InvalidParameter("empty interaction sequence".into()));
    };
    let b0 = first.coupling();
    let a = 1.0 / (alpha * alpha);
    let pairing_delta = if b0 == 0.0 {
        0.0
    } else {
        let mollified = PairTable::gaussian(basis, b0 * a / std::f64::consts::PI, a)?;
        pairing(j, &mollified.two_particle_matrix(), &gamma2.entries)
    };
    let mut rows = Vec::new();
    for spec in sequence {
        let pairing_potential = if spec.is_zero() {
            0.0
        } else {
            -pairing(j, &PairTable::new(basis, spec)?.two_particle_matrix(), &gamma2.entries)
        };
        rows.push(DeltaRow {
            n: spec.n,
            pairing_potential,
            pairing_delta,
            difference: (pairing_potential - pairing_delta).abs(),
        });
    }
    let pts: Vec<(f64, f64)> =
        rows.iter().filter(|r| r.difference > 0.0).map(|r| ((r.n as f64).ln(), r.difference.ln())).collect();
    let exponent = (pts.len() >= 2).then(|| {
        let m = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
        let (mx, my) = (sx / m, sy / m);
        let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
        -sxy / sxx
    });
    Ok(DeltaComparison { alpha, coupling: b0, rows, exponent })
}
