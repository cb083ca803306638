use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::{norm, BosonicState, ManyBodyOperator, SparseOperator};
use crate::error::{Error, Result};

const KRYLOV_DIM: usize = 30;
const MAX_SUBSTEPS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct KrylovStats {
    pub substeps: usize,
    pub rejected: usize,
    pub error_estimate: f64,
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Lanczos basis with full reorthogonalization. Returns the basis vectors,
/// the tridiagonal coefficients, and the trailing `β_m` (zero on breakdown).
fn lanczos(op: &SparseOperator, start: &[Complex64], m: usize) -> (Vec<Vec<Complex64>>, Vec<f64>, Vec<f64>, f64) {
    let nrm = norm(start);
    let mut basis = vec![start.iter().map(|v| v / nrm).collect::<Vec<_>>()];
    let mut alpha = Vec::new();
    let mut beta = Vec::new();
    let mut w = vec![Complex64::new(0.0, 0.0); op.dim];
    let scale = op.spectral_bounds();
    let scale = scale.0.abs().max(scale.1.abs()).max(1.0);
    loop {
        let j = basis.len() - 1;
        op.apply_into(&basis[j], &mut w);
        let a = dot(&basis[j], &w).re;
        alpha.push(a);
        for _ in 0..2 {
            for v in &basis {
                let c = dot(v, &w);
                for (wi, vi) in w.iter_mut().zip(v) {
                    *wi -= c * vi;
                }
            }
        }
        let b = norm(&w);
        if b < 1e-12 * scale {
            return (basis, alpha, beta, 0.0);
        }
        if basis.len() == m {
            return (basis, alpha, beta, b);
        }
        beta.push(b);
        basis.push(w.iter().map(|v| v / b).collect());
    }
}

/// `e^{-iτT} e₁` for the real symmetric tridiagonal `T`.
fn tridiagonal_expm_e1(alpha: &[f64], beta: &[f64], tau: f64) -> Vec<Complex64> {
    let m = alpha.len();
    let mut t = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    (0..m)
        .map(|i| {
            (0..m)
                .map(|k| {
                    let v = eig.eigenvectors[(i, k)] * eig.eigenvectors[(0, k)];
                    Complex64::from_polar(v, -tau * eig.eigenvalues[k])
                })
                .sum()
        })
        .collect()
}

/// `e^{-iHt}ψ` by restarted Lanczos with adaptive substeps. Each substep is
/// accepted when `β_m |[e^{-iτT}e₁]_m|` is below `tol·τ/t`.
pub fn evolve_manybody(
    state: &BosonicState,
    h: &ManyBodyOperator,
    t: f64,
    tol: f64,
) -> Result<(BosonicState, KrylovStats)> {
    if state.coefficients.len() != h.dim() {
        return Err(Error::DimensionMismatch(format!("state {} vs operator {}", state.coefficients.len(), h.dim())));
    }
    if !(t >= 0.0) || !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("need t >= 0 and tol > 0, got t = {t}, tol = {tol}")));
    }
    let mut psi = state.coefficients.clone();
    let mut stats = KrylovStats::default();
    let mut elapsed = 0.0;
    let mut tau = t;
    while elapsed < t {
        if stats.substeps + stats.rejected > MAX_SUBSTEPS {
            return Err(Error::Krylov(format!("no convergence after {MAX_SUBSTEPS} substeps")));
        }
        tau = tau.min(t - elapsed);
        let nrm = norm(&psi);
        let (basis, alpha, beta, tail) = lanczos(&h.matrix, &psi, KRYLOV_DIM);
        loop {
            let y = tridiagonal_expm_e1(&alpha, &beta, tau);
            let err = tail * y[y.len() - 1].norm();
            if err <= tol * tau / t.max(f64::MIN_POSITIVE) || tail == 0.0 {
                let mut next = vec![Complex64::new(0.0, 0.0); psi.len()];
                for (v, c) in basis.iter().zip(&y) {
                    for (n, vi) in next.iter_mut().zip(v) {
                        *n += c * vi * nrm;
                    }
                }
                psi = next;
                elapsed += tau;
                stats.substeps += 1;
                stats.error_estimate += err;
                if err < 0.1 * tol * tau / t {
                    tau *= 1.5;
                }
                break;
            }
            stats.rejected += 1;
            tau *= 0.5;
            if tau < 1e-14 * t {
                return Err(Error::Krylov("step size underflow".into()));
            }
        }
    }
    Ok((BosonicState { basis: state.basis.clone(), coefficients: psi }, stats))
}

/// `⟨ψ, H^k ψ⟩`, computed as `⟨H^⌊k/2⌋ψ, H^⌈k/2⌉ψ⟩`.
pub fn energy_moment(state: &BosonicState, h: &ManyBodyOperator, k: u32) -> Result<f64> {
    if k == 0 || k > 4 {
        return Err(Error::InvalidParameter(format!("moment order must be in 1..=4, got {k}")));
    }
    let mut low = state.coefficients.clone();
    for _ in 0..k / 2 {
        low = h.apply(&low);
    }
    let high = if k % 2 == 1 { h.apply(&low) } else { low.clone() };
    let value = dot(&low, &high);
    if value.im.abs() > 1e-9 * value.re.abs().max(1.0) {
        log::warn!("moment {k} has imaginary part {}", value.im);
    }
    Ok(value.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::HermiteBasis;
    use crate::interaction::{InteractionSpec, Profile};
    use crate::manybody::{assemble_hamiltonian, product_state, OccupationBasis};
    use std::sync::Arc;

    fn ground_product(n: usize) -> (BosonicState, ManyBodyOperator) {
        let basis = HermiteBasis::new(1.0, 6.0).unwrap();
        let occ = Arc::new(OccupationBasis::new(basis.len(), n).unwrap());
        let spec = InteractionSpec::new(Profile::Zero, 0.1, n).unwrap();
        let h = assemble_hamiltonian(occ.clone(), &basis, &spec).unwrap();
        let mut phi = vec![Complex64::new(0.0, 0.0); basis.len()];
        phi[0] = Complex64::new(1.0, 0.0);
        (product_state(occ, &phi).unwrap(), h)
    }

    #[test]
    fn free_ground_state_picks_up_phase() {
        let (s, h) = ground_product(3);
        let t = 0.7;
        let (out, _) = evolve_manybody(&s, &h, t, 1e-10).unwrap();
        let phase = Complex64::from_polar(1.0, -2.0 * 3.0 * t);
        let fid = s.inner(&out) * phase.conj();
        assert!((fid.norm() - 1.0).abs() < 1e-9 && (fid - 1.0).norm() < 1e-9);
    }

    #[test]
    fn zero_time_is_identity() {
        let (s, h) = ground_product(2);
        let (out, stats) = evolve_manybody(&s, &h, 0.0, 1e-10).unwrap();
        assert_eq!(out.coefficients, s.coefficients);
        assert_eq!(stats.substeps, 0);
    }

    #[test]
    fn free_moments() {
        for n in [1usize, 3, 5] {
            let (s, h) = ground_product(n);
            let nf = n as f64;
            assert!((energy_moment(&s, &h, 1).unwrap() - 2.0 * nf).abs() < 1e-12);
            assert!((energy_moment(&s, &h, 2).unwrap() - 4.0 * nf * nf).abs() < 1e-10);
        }
    }

    #[test]
    fn krylov_matches_dense_exponential() {
        let basis = HermiteBasis::new(1.0, 6.0).unwrap();
        let occ = Arc::new(OccupationBasis::new(6, 3).unwrap());
        let spec = InteractionSpec::new(Profile::Gaussian { lambda: 1.0 }, 0.1, 3).unwrap();
        let h = assemble_hamiltonian(occ.clone(), &basis, &spec).unwrap();
        let coeffs: Vec<Complex64> = (0..occ.len()).map(|i| Complex64::new((i as f64 * 0.7).cos(), (i as f64).sin())).collect();
        let nrm = norm(&coeffs);
        let s = BosonicState::new(occ, coeffs.iter().map(|c| c / nrm).collect()).unwrap();
        let t = 0.5;
        let (out, _) = evolve_manybody(&s, &h, t, 1e-12).unwrap();
        let eig = SymmetricEigen::new(h.matrix.to_dense());
        let v = &eig.eigenvectors;
        let mut expect = vec![Complex64::new(0.0, 0.0); s.coefficients.len()];
        for k in 0..eig.eigenvalues.len() {
            let c: Complex64 = (0..v.nrows()).map(|i| s.coefficients[i] * v[(i, k)]).sum();
            let c = c * Complex64::from_polar(1.0, -t * eig.eigenvalues[k]);
            for i in 0..v.nrows() {
                expect[i] += c * v[(i, k)];
            }
        }
        let err = out.coefficients.iter().zip(&expect).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        assert!(err < 1e-10, "{err:e}");
    }
}
