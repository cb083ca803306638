use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use super::{norm, BosonicState, ManyBodyOperator, SparseOperator};
use crate::error::{Error, Result};

/// Largest dimension diagonalized densely.
pub const DENSE_EIG_CAP: usize = 3000;
/// Largest dimension for the dense spectral cutoff.
const DENSE_CUTOFF_CAP: usize = 20_000;

#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub value: f64,
    pub vector: Vec<f64>,
    /// `‖Ax − θx‖` for the returned unit vector.
    pub residual: f64,
}

pub fn min_eig_dense(m: &DMatrix<f64>) -> Eigenpair {
    let n = m.nrows();
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let k = eig.eigenvalues.iamin_by(|a, b| a.partial_cmp(b).unwrap());
    let value = eig.eigenvalues[k];
    let v: DVector<f64> = eig.eigenvectors.column(k).into_owned();
    let residual = (m * &v - &v * value).norm();
    debug_assert_eq!(v.len(), n);
    Eigenpair { value, vector: v.iter().copied().collect(), residual }
}

trait ArgMin {
    fn iamin_by<F: Fn(&f64, &f64) -> std::cmp::Ordering>(&self, f: F) -> usize;
}

impl ArgMin for DVector<f64> {
    fn iamin_by<F: Fn(&f64, &f64) -> std::cmp::Ordering>(&self, f: F) -> usize {
        let mut best = 0;
        for i in 1..self.len() {
            if f(&self[i], &self[best]) == std::cmp::Ordering::Less {
                best = i;
            }
        }
        best
    }
}

fn dotr(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Smallest eigenpair by restarted Lanczos (full reorthogonalization),
/// restarting from the current Ritz vector until the residual falls below
/// `tol`.
pub fn min_eig_lanczos(op: &SparseOperator, tol: f64, max_restarts: usize) -> Result<Eigenpair> {
    let n = op.dim;
    let m = n.min(80);
    // deterministic start with weight on every component
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * ((i as f64) * 0.618).sin()).collect();
    let mut best = Eigenpair { value: f64::NAN, vector: Vec::new(), residual: f64::INFINITY };
    for _ in 0..=max_restarts {
        let nx = dotr(&x, &x).sqrt();
        let mut basis: Vec<Vec<f64>> = vec![x.iter().map(|v| v / nx).collect()];
        let mut alpha = Vec::new();
        let mut beta = Vec::new();
        loop {
            let j = basis.len() - 1;
            let mut w = op.apply_real(&basis[j]);
            alpha.push(dotr(&basis[j], &w));
            for _ in 0..2 {
                for v in &basis {
                    let c = dotr(v, &w);
                    w.iter_mut().zip(v).for_each(|(wi, vi)| *wi -= c * vi);
                }
            }
            let b = dotr(&w, &w).sqrt();
            if basis.len() == m || b < 1e-13 {
                break;
            }
            beta.push(b);
            basis.push(w.iter().map(|v| v / b).collect());
        }
        let k = alpha.len();
        let mut t = DMatrix::<f64>::zeros(k, k);
        for i in 0..k {
            t[(i, i)] = alpha[i];
            if i + 1 < k {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let ritz = min_eig_dense(&t);
        let mut y = vec![0.0; n];
        for (v, c) in basis.iter().zip(&ritz.vector) {
            y.iter_mut().zip(v).for_each(|(yi, vi)| *yi += c * vi);
        }
        let ny = dotr(&y, &y).sqrt();
        y.iter_mut().for_each(|v| *v /= ny);
        let hy = op.apply_real(&y);
        let theta = dotr(&y, &hy);
        let residual = hy.iter().zip(&y).map(|(a, b)| (a - theta * b).powi(2)).sum::<f64>().sqrt();
        best = Eigenpair { value: theta, vector: y.clone(), residual };
        if residual < tol {
            return Ok(best);
        }
        x = y;
    }
    Err(Error::NoConvergence { residual: best.residual })
}

/// Smallest eigenvalue of a symmetric sector operator: dense below
/// `DENSE_EIG_CAP`, Lanczos with a residual certificate above.
pub fn min_eig_symmetric(op: &SparseOperator) -> Result<Eigenpair> {
    if op.dim <= DENSE_EIG_CAP {
        Ok(min_eig_dense(&op.to_dense()))
    } else {
        min_eig_lanczos(op, 1e-7, 200)
    }
}

fn bump(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Smooth cutoff: 1 on `s ≤ 1`, 0 on `s ≥ 2`, and
/// `f(2−s)/(f(2−s) + f(s−1))` with `f(t) = e^{−1/t}` in between.
pub fn smooth_step(s: f64) -> f64 {
    if s <= 1.0 {
        1.0
    } else if s >= 2.0 {
        0.0
    } else {
        let a = bump(2.0 - s);
        a / (a + bump(s - 1.0))
    }
}

/// Moment bounds `⟨H^k⟩ ≤ (2N/κ)^k`, `k = 1, 2`, of a smoothed state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffCheck {
    pub moments: [f64; 2],
    pub bounds: [f64; 2],
    pub distance: f64,
}

impl CutoffCheck {
    pub fn holds(&self) -> bool {
        self.moments.iter().zip(&self.bounds).all(|(m, b)| *m <= b * (1.0 + 1e-10))
    }
}

fn finish(state: &BosonicState, h: &ManyBodyOperator, kappa: f64, out: Vec<Complex64>) -> Result<(BosonicState, CutoffCheck)> {
    let nrm = norm(&out);
    if nrm < 1e-12 {
        return Err(Error::NotRenormalizable);
    }
    let coefficients: Vec<Complex64> = out.iter().map(|c| c / nrm).collect();
    let smoothed = BosonicState { basis: state.basis.clone(), coefficients };
    let n = state.basis.particles() as f64;
    let m1 = super::energy_moment(&smoothed, h, 1)?;
    let m2 = super::energy_moment(&smoothed, h, 2)?;
    let distance = norm(
        &smoothed.coefficients.iter().zip(&state.coefficients).map(|(a, b)| a - b).collect::<Vec<_>>(),
    );
    let check = CutoffCheck { moments: [m1, m2], bounds: [2.0 * n / kappa, (2.0 * n / kappa).powi(2)], distance };
    if !check.holds() {
        log::warn!("smoothed moments {:?} exceed {:?}", check.moments, check.bounds);
    }
    Ok((smoothed, check))
}

/// `χ(κH/N)ψ`, renormalized, through a dense eigendecomposition.
pub fn smooth_cutoff_dense(state: &BosonicState, h: &ManyBodyOperator, kappa: f64) -> Result<(BosonicState, CutoffCheck)> {
    if h.dim() > DENSE_CUTOFF_CAP {
        return Err(Error::SizeExceeded { dim: h.dim(), cap: DENSE_CUTOFF_CAP });
    }
    let n = state.basis.particles() as f64;
    let eig = SymmetricEigen::new(h.matrix.to_dense());
    let v = &eig.eigenvectors;
    let dim = h.dim();
    let mut out = vec![Complex64::new(0.0, 0.0); dim];
    for k in 0..dim {
        let w = smooth_step(kappa * eig.eigenvalues[k] / n);
        if w == 0.0 {
            continue;
        }
        let c: Complex64 = (0..dim).map(|i| state.coefficients[i] * v[(i, k)]).sum();
        for i in 0..dim {
            out[i] += c * w * v[(i, k)];
        }
    }
    finish(state, h, kappa, out)
}

/// Chebyshev coefficients of `g` on `[-1, 1]` of the smallest degree whose
/// truncation error on a fine check grid is below `tol`.
fn chebyshev_fit<F: Fn(f64) -> f64>(g: F, tol: f64) -> Result<Vec<f64>> {
    let mut k = 64usize;
    while k <= 1 << 17 {
        let theta: Vec<f64> = (0..k).map(|j| std::f64::consts::PI * (j as f64 + 0.5) / k as f64).collect();
        let vals: Vec<f64> = theta.iter().map(|t| g(t.cos())).collect();
        let coeffs: Vec<f64> = (0..k)
            .map(|j| {
                let s: f64 = vals.iter().zip(&theta).map(|(v, t)| v * (j as f64 * t).cos()).sum();
                let c = 2.0 * s / k as f64;
                if j == 0 {
                    0.5 * c
                } else {
                    c
                }
            })
            .collect();
        let checks = 4 * k;
        let worst = (0..=checks)
            .map(|i| {
                let y = -1.0 + 2.0 * i as f64 / checks as f64;
                let t = y.clamp(-1.0, 1.0).acos();
                let approx: f64 = coeffs.iter().enumerate().map(|(j, c)| c * (j as f64 * t).cos()).sum();
                (approx - g(y)).abs()
            })
            .fold(0.0f64, f64::max);
        if worst < tol {
            return Ok(coeffs);
        }
        k *= 2;
    }
    Err(Error::NoConvergence { residual: tol })
}

/// `χ(κH/N)ψ`, renormalized, by a Chebyshev expansion on the Gershgorin
/// interval with uniform error below `1e-8`.
pub fn smooth_cutoff_chebyshev(
    state: &BosonicState,
    h: &ManyBodyOperator,
    kappa: f64,
) -> Result<(BosonicState, CutoffCheck)> {
    let n = state.basis.particles() as f64;
    let (a, b) = h.matrix.spectral_bounds();
    let (a, b) = if b - a < 1e-12 { (a - 1.0, b + 1.0) } else { (a, b) };
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    let coeffs = chebyshev_fit(|y| smooth_step(kappa * (mid + half * y) / n), 1e-8)?;
    let scaled = |v: &[Complex64]| -> Vec<Complex64> {
        h.apply(v).iter().zip(v).map(|(hv, x)| (hv - x * mid) / half).collect()
    };
    let mut prev = state.coefficients.clone();
    let mut cur = scaled(&prev);
    let mut out: Vec<Complex64> = prev.iter().zip(&cur).map(|(p, c)| p * coeffs[0] + c * coeffs[1]).collect();
    for c in coeffs.iter().skip(2) {
        let next: Vec<Complex64> = scaled(&cur).iter().zip(&prev).map(|(y, p)| y * 2.0 - p).collect();
        out.iter_mut().zip(&next).for_each(|(o, x)| *o += x * c);
        prev = cur;
        cur = next;
    }
    finish(state, h, kappa, out)
}

/// Dense path up to `DENSE_EIG_CAP`, Chebyshev above.
pub fn smooth_cutoff(state: &BosonicState, h: &ManyBodyOperator, kappa: f64) -> Result<(BosonicState, CutoffCheck)> {
    if !(kappa > 0.0) {
        return Err(Error::InvalidParameter(format!("kappa must be positive, got {kappa}")));
    }
    if h.dim() <= DENSE_EIG_CAP {
        smooth_cutoff_dense(state, h, kappa)
    } else {
        smooth_cutoff_chebyshev(state, h, kappa)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::HermiteBasis;
    use crate::interaction::{InteractionSpec, Profile};
    use crate::manybody::{assemble_hamiltonian, product_state, OccupationBasis};
    use std::sync::Arc;

    fn system(lambda: f64, n: usize) -> (Arc<OccupationBasis>, ManyBodyOperator) {
        let basis = HermiteBasis::new(1.0, 6.0).unwrap();
        let occ = Arc::new(OccupationBasis::new(basis.len(), n).unwrap());
        let profile = if lambda == 0.0 { Profile::Zero } else { Profile::Gaussian { lambda } };
        let spec = InteractionSpec::new(profile, 0.1, n).unwrap();
        (occ.clone(), assemble_hamiltonian(occ, &basis, &spec).unwrap())
    }

    #[test]
    fn step_shape() {
        assert_eq!(smooth_step(0.3), 1.0);
        assert_eq!(smooth_step(1.0), 1.0);
        assert_eq!(smooth_step(2.0), 0.0);
        assert!((smooth_step(1.5) - 0.5).abs() < 1e-15);
        let mut prev = 1.0;
        for i in 0..=100 {
            let v = smooth_step(1.0 + i as f64 / 100.0);
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn diagonal_minimum() {
        let op = SparseOperator::diagonal(&[3.0, -1.5, 2.0, 7.0]);
        assert_eq!(min_eig_symmetric(&op).unwrap().value, -1.5);
    }

    #[test]
    fn free_ground_energy() {
        let (_, h) = system(0.0, 3);
        assert!((min_eig_symmetric(&h.matrix).unwrap().value - 6.0).abs() < 1e-12);
    }

    #[test]
    fn dense_and_lanczos_agree() {
        let (_, h) = system(1.0, 3);
        let dense = min_eig_dense(&h.matrix.to_dense());
        let iter = min_eig_lanczos(&h.matrix, 1e-8, 100).unwrap();
        assert!((dense.value - iter.value).abs() < 1e-6);
        assert!(iter.residual < 1e-8 && dense.residual < 1e-8);
        // generic symmetric test matrix
        let d = 56;
        let m = DMatrix::from_fn(d, d, |i, j| ((i * 7 + j * 7 + i * j) as f64).sin() / (1.0 + (i as f64 - j as f64).abs()));
        let m = (&m + m.transpose()) * 0.5;
        let rows = (0..d).map(|i| (0..d).map(|j| (j, m[(i, j)])).collect()).collect();
        let sparse = SparseOperator::from_rows(rows);
        let a = min_eig_dense(&m).value;
        let b = min_eig_lanczos(&sparse, 1e-9, 100).unwrap().value;
        assert!((a - b).abs() < 1e-6);
    }

    #[test]
    fn cutoff_leaves_low_energy_states() {
        let (occ, h) = system(0.0, 3);
        let mut phi = vec![Complex64::new(0.0, 0.0); 6];
        phi[0] = Complex64::new(1.0, 0.0);
        let s = product_state(occ, &phi).unwrap();
        // energy 6 ≤ N/κ = 3/0.4
        let (out, check) = smooth_cutoff(&s, &h, 0.4).unwrap();
        let d = norm(&out.coefficients.iter().zip(&s.coefficients).map(|(a, b)| a - b).collect::<Vec<_>>());
        assert!(d < 1e-12);
        assert!(check.holds());
        let (again, _) = smooth_cutoff(&out, &h, 0.4).unwrap();
        let d = norm(&again.coefficients.iter().zip(&out.coefficients).map(|(a, b)| a - b).collect::<Vec<_>>());
        assert!(d < 1e-12);
    }

    #[test]
    fn cutoff_paths_agree() {
        let (occ, h) = system(1.0, 3);
        let phi: Vec<Complex64> = (0..6).map(|i| Complex64::new(1.0 / (1.0 + i as f64), 0.2 * i as f64)).collect();
        let nrm = norm(&phi);
        let phi: Vec<Complex64> = phi.iter().map(|c| c / nrm).collect();
        let s = product_state(occ, &phi).unwrap();
        let (a, ca) = smooth_cutoff_dense(&s, &h, 0.3).unwrap();
        let (b, cb) = smooth_cutoff_chebyshev(&s, &h, 0.3).unwrap();
        let d = norm(&a.coefficients.iter().zip(&b.coefficients).map(|(x, y)| x - y).collect::<Vec<_>>());
        assert!(d < 1e-7, "{d:e}");
        assert!(ca.holds() && cb.holds());
        assert!(matches!(smooth_cutoff(&s, &h, 100.0), Err(Error::NotRenormalizable)));
    }
}
