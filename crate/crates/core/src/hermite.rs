//! Single-particle basis of the isotropic 2D harmonic oscillator.
//!
//! The Hermite operator `S² = −Δ + ω²|x|²` is diagonal in the product basis
//! `φ_{n1,n2}(x, y) = h_{n1}(x) h_{n2}(y)` with eigenvalue `2ω(n1 + n2 + 1)`,
//! where `h_n` is the normalized 1D Hermite function of frequency `ω`.
//! Modes are admitted by eigenvalue shell, so the spectral projectors
//! `P_{≤M}` act as 0/1 masks on coefficient vectors.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;

/// Relative slack when comparing an eigenvalue against a shell boundary.
const SHELL_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Mode2D {
    pub n1: u32,
    pub n2: u32,
}

impl Mode2D {
    pub fn new(n1: u32, n2: u32) -> Self {
        Self { n1, n2 }
    }

    pub fn shell(&self) -> u32 {
        self.n1 + self.n2
    }
}

/// Eigenvalue of `S²` on a mode: `2ω(n1 + n2 + 1)`.
pub fn mode_eigenvalue(mode: Mode2D, omega: f64) -> f64 {
    2.0 * omega.abs() * (mode.shell() as f64 + 1.0)
}

fn within(value: f64, bound: f64) -> bool {
    value <= bound * (1.0 + SHELL_SLACK)
}

/// All modes with `2ω(n1+n2+1) ≤ cutoff_energy` in graded-lexicographic order
/// (by shell, then by `n1`).
pub fn enumerate_modes(omega: f64, cutoff_energy: f64) -> Result<Vec<Mode2D>> {
    let omega = omega.abs();
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::InvalidParameter(format!("omega must be nonzero, got {omega}")));
    }
    if !within(2.0 * omega, cutoff_energy) {
        return Err(Error::InvalidCutoff(format!(
            "cutoff {cutoff_energy} is below the ground energy {}",
            2.0 * omega
        )));
    }
    let mut modes = Vec::new();
    let mut shell = 0u32;
    while within(2.0 * omega * (shell as f64 + 1.0), cutoff_energy) {
        for n1 in 0..=shell {
            modes.push(Mode2D::new(n1, shell - n1));
        }
        shell += 1;
    }
    Ok(modes)
}

/// `D_M`: number of modes with `S²`-eigenvalue at most `M²`.
pub fn dim_leq(omega: f64, m: f64) -> usize {
    let omega = omega.abs();
    let bound = m * m;
    let mut count = 0usize;
    let mut shell = 0usize;
    while within(2.0 * omega * (shell as f64 + 1.0), bound) {
        count += shell + 1;
        shell += 1;
    }
    count
}

/// Normalized Hermite functions `h_0..h_{n_max}` of unit frequency at `x`,
/// via the three-term recurrence on normalized functions.
pub fn hermite_functions(n_max: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let h0 = std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp();
    out.push(h0);
    if n_max == 0 {
        return out;
    }
    out.push(std::f64::consts::SQRT_2 * x * h0);
    for n in 1..n_max {
        let nf = n as f64;
        let next = (2.0 / (nf + 1.0)).sqrt() * x * out[n] - (nf / (nf + 1.0)).sqrt() * out[n - 1];
        out.push(next);
    }
    out
}

/// Hermite functions of frequency `omega`: `ω^{1/4} h_n(√ω x)`.
pub fn hermite_functions_omega(n_max: usize, x: f64, omega: f64) -> Vec<f64> {
    let scale = omega.sqrt();
    let norm = omega.powf(0.25);
    hermite_functions(n_max, scale * x)
        .into_iter()
        .map(|v| v * norm)
        .collect()
}

/// One-dimensional quadrature rule for plain integrals `∫ f(x) dx` of
/// functions carrying a Gaussian envelope.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Quadrature1D {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Quadrature1D {
    /// Gauss–Hermite rule of the given order, with weights absorbing the
    /// `e^{-x²}` factor: `∫ f ≈ Σ w_i f(x_i)`, exact when `f` is a polynomial of
    /// degree `< 2·order` times `e^{-x²}`.
    pub fn gauss_hermite(order: usize) -> Self {
        assert!(order > 0, "quadrature order must be positive");
        let mut jacobi = DMatrix::<f64>::zeros(order, order);
        for k in 1..order {
            let b = (k as f64 / 2.0).sqrt();
            jacobi[(k, k - 1)] = b;
            jacobi[(k - 1, k)] = b;
        }
        let mut nodes: Vec<f64> = SymmetricEigen::new(jacobi).eigenvalues.iter().copied().collect();
        nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
        // Newton polish on h_order, derivative √(2n) h_{n-1} − x h_n.
        for x in nodes.iter_mut() {
            for _ in 0..3 {
                let h = hermite_functions(order, *x);
                let d = (2.0 * order as f64).sqrt() * h[order - 1] - *x * h[order];
                if d != 0.0 {
                    *x -= h[order] / d;
                }
            }
        }
        // symmetrize to kill roundoff asymmetry
        let n = nodes.len();
        for i in 0..n / 2 {
            let a = 0.5 * (nodes[n - 1 - i] - nodes[i]);
            nodes[i] = -a;
            nodes[n - 1 - i] = a;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        let weights = nodes
            .iter()
            .map(|&x| {
                let h = hermite_functions(order - 1, x);
                1.0 / h.iter().map(|v| v * v).sum::<f64>()
            })
            .collect();
        Self { nodes, weights }
    }

    /// Rescale for functions of `√s·x`: nodes divided by `√s`, weights by `√s`.
    pub fn scaled(&self, s: f64) -> Self {
        let r = s.sqrt();
        Self {
            nodes: self.nodes.iter().map(|x| x / r).collect(),
            weights: self.weights.iter().map(|w| w / r).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Truncated single-particle basis.
#[derive(Debug, Clone)]
pub struct HermiteBasis {
    omega: f64,
    cutoff_energy: f64,
    modes: Vec<Mode2D>,
    eigenvalues: Vec<f64>,
    quadrature: Quadrature1D,
}

#[derive(Serialize, Deserialize)]
struct BasisJson {
    omega: f64,
    cutoff_energy: f64,
    modes: Vec<[u32; 2]>,
}

impl HermiteBasis {
    pub fn new(omega: f64, cutoff_energy: f64) -> Result<Self> {
        let omega = omega.abs();
        let modes = enumerate_modes(omega, cutoff_energy)?;
        let eigenvalues = modes.iter().map(|&m| mode_eigenvalue(m, omega)).collect();
        let max_degree = modes.iter().map(|m| m.shell()).max().unwrap_or(0) as usize;
        let quadrature = Quadrature1D::gauss_hermite(2 * max_degree + 8).scaled(omega);
        Ok(Self { omega, cutoff_energy, modes, eigenvalues, quadrature })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn cutoff_energy(&self) -> f64 {
        self.cutoff_energy
    }

    pub fn modes(&self) -> &[Mode2D] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Largest per-axis quantum number among admitted modes.
    pub fn max_degree(&self) -> usize {
        self.modes.iter().map(|m| m.shell()).max().unwrap_or(0) as usize
    }

    /// `S²` eigenvalues in mode order.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn quadrature(&self) -> &Quadrature1D {
        &self.quadrature
    }

    pub fn index_of(&self, mode: Mode2D) -> Option<usize> {
        self.modes.iter().position(|&m| m == mode)
    }

    /// Mode values at arbitrary points, shape (mode × point).
    pub fn eval_modes(&self, points: &[[f64; 2]]) -> DMatrix<f64> {
        let deg = self.max_degree();
        let mut out = DMatrix::zeros(self.modes.len(), points.len());
        for (j, p) in points.iter().enumerate() {
            let hx = hermite_functions_omega(deg, p[0], self.omega);
            let hy = hermite_functions_omega(deg, p[1], self.omega);
            for (i, m) in self.modes.iter().enumerate() {
                out[(i, j)] = hx[m.n1 as usize] * hy[m.n2 as usize];
            }
        }
        out
    }

    /// Gram matrix of the basis under the tensor quadrature rule.
    pub fn gram(&self) -> DMatrix<f64> {
        let q = &self.quadrature;
        let deg = self.max_degree();
        let table: Vec<Vec<f64>> =
            q.nodes.iter().map(|&x| hermite_functions_omega(deg, x, self.omega)).collect();
        // 1D gram per degree pair, then tensor product.
        let mut g1 = DMatrix::<f64>::zeros(deg + 1, deg + 1);
        for (k, w) in q.weights.iter().enumerate() {
            for a in 0..=deg {
                for b in 0..=deg {
                    g1[(a, b)] += w * table[k][a] * table[k][b];
                }
            }
        }
        let d = self.modes.len();
        DMatrix::from_fn(d, d, |i, j| {
            let (mi, mj) = (self.modes[i], self.modes[j]);
            g1[(mi.n1 as usize, mj.n1 as usize)] * g1[(mi.n2 as usize, mj.n2 as usize)]
        })
    }

    /// Diagonal 0/1 mask of `P_{≤M}`: true iff the eigenvalue is at most `M²`.
    pub fn projector_leq(&self, m: f64) -> Vec<bool> {
        let bound = m * m;
        self.eigenvalues.iter().map(|&e| within(e, bound)).collect()
    }

    /// Multiply coefficient `i` by `λ_i^{p/2}` (action of `S^p`).
    pub fn apply_s_power(&self, coefficients: &[Complex64], p: f64) -> Vec<Complex64> {
        assert_eq!(coefficients.len(), self.modes.len());
        coefficients
            .iter()
            .zip(&self.eigenvalues)
            .map(|(c, &e)| c * e.powf(0.5 * p))
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        let repr = BasisJson {
            omega: self.omega,
            cutoff_energy: self.cutoff_energy,
            modes: self.modes.iter().map(|m| [m.n1, m.n2]).collect(),
        };
        Ok(serde_json::to_string(&repr)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let repr: BasisJson = serde_json::from_str(text)?;
        let basis = Self::new(repr.omega, repr.cutoff_energy)?;
        let modes: Vec<[u32; 2]> = basis.modes.iter().map(|m| [m.n1, m.n2]).collect();
        if modes != repr.modes {
            return Err(Error::InvalidParameter("mode list does not match cutoff".into()));
        }
        Ok(basis)
    }
}

/// Apply a 0/1 mask to a coefficient vector.
pub fn apply_mask(mask: &[bool], coefficients: &[Complex64]) -> Vec<Complex64> {
    mask.iter()
        .zip(coefficients)
        .map(|(&keep, &c)| if keep { c } else { Complex64::new(0.0, 0.0) })
        .collect()
}

/// Transforms between grid samples and basis coefficients.
///
/// Construction fails unless the per-axis grid Gram matrix of all admitted
/// degrees equals the identity to `1e-10`, which covers both tail mass
/// outside the box and under-sampling.
#[derive(Debug, Clone)]
pub struct GridTransform {
    grid: GridSpec,
    modes: Vec<Mode2D>,
    /// `axis[j][n] = h_n(x_j)` for the grid coordinates.
    axis: Vec<Vec<f64>>,
    degree: usize,
}

impl GridTransform {
    pub fn new(basis: &HermiteBasis, grid: &GridSpec) -> Result<Self> {
        let degree = basis.max_degree();
        let xs = grid.coordinates();
        let axis: Vec<Vec<f64>> =
            xs.iter().map(|&x| hermite_functions_omega(degree, x, basis.omega())).collect();
        let h = grid.spacing();
        let mut worst = 0.0f64;
        for a in 0..=degree {
            for b in 0..=a {
                let s: f64 = axis.iter().map(|row| row[a] * row[b]).sum::<f64>() * h;
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((s - target).abs());
            }
        }
        if worst > 1e-10 {
            return Err(Error::UnderResolvedGrid(format!(
                "per-axis grid Gram deviates from identity by {worst:e} (degree {degree}, L = {}, n = {})",
                grid.half_width(),
                grid.points_per_axis()
            )));
        }
        Ok(Self { grid: grid.clone(), modes: basis.modes().to_vec(), axis, degree })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn grid_to_spectral(&self, values: &[Complex64]) -> Vec<Complex64> {
        let n = self.grid.points_per_axis();
        assert_eq!(values.len(), n * n);
        let h = self.grid.spacing();
        let d = self.degree + 1;
        // contract x first: partial[iy][n1]
        let mut partial = vec![Complex64::new(0.0, 0.0); n * d];
        for iy in 0..n {
            let row = &values[iy * n..(iy + 1) * n];
            for (ix, v) in row.iter().enumerate() {
                let hx = &self.axis[ix];
                for k in 0..d {
                    partial[iy * d + k] += v * hx[k];
                }
            }
        }
        self.modes
            .iter()
            .map(|m| {
                let mut acc = Complex64::new(0.0, 0.0);
                for iy in 0..n {
                    acc += partial[iy * d + m.n1 as usize] * self.axis[iy][m.n2 as usize];
                }
                acc * h * h
            })
            .collect()
    }

    pub fn spectral_to_grid(&self, coefficients: &[Complex64]) -> Vec<Complex64> {
        let n = self.grid.points_per_axis();
        assert_eq!(coefficients.len(), self.modes.len());
        let d = self.degree + 1;
        // fold y first: cy[iy][n1] = Σ_{n2} c_{n1,n2} h_{n2}(y)
        let mut cy = vec![Complex64::new(0.0, 0.0); n * d];
        for (c, m) in coefficients.iter().zip(&self.modes) {
            for iy in 0..n {
                cy[iy * d + m.n1 as usize] += c * self.axis[iy][m.n2 as usize];
            }
        }
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        for iy in 0..n {
            for ix in 0..n {
                let hx = &self.axis[ix];
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..d {
                    acc += cy[iy * d + k] * hx[k];
                }
                out[iy * n + ix] = acc;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumerate_small_cutoffs() {
        assert_eq!(enumerate_modes(1.0, 2.0).unwrap(), vec![Mode2D::new(0, 0)]);
        let six = enumerate_modes(1.0, 6.0).unwrap();
        let expected = [(0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (2, 0)];
        assert_eq!(six.len(), 6);
        for (m, e) in six.iter().zip(expected) {
            assert_eq!((m.n1, m.n2), e);
        }
        assert_eq!(enumerate_modes(2.0, 8.0).unwrap().len(), 3);
        assert!(matches!(enumerate_modes(1.0, 1.5), Err(Error::InvalidCutoff(_))));
    }

    #[test]
    fn eigenvalues_follow_shell_formula() {
        assert_eq!(mode_eigenvalue(Mode2D::new(0, 0), 1.0), 2.0);
        assert_eq!(mode_eigenvalue(Mode2D::new(1, 2), 1.0), 8.0);
        assert_eq!(mode_eigenvalue(Mode2D::new(0, 0), 3.0), 6.0);
        // negative omega enters through |omega|
        assert_eq!(mode_eigenvalue(Mode2D::new(0, 0), -3.0), 6.0);
    }

    #[test]
    fn dim_leq_counts() {
        assert_eq!(dim_leq(1.0, 2.0), 3);
        assert!(dim_leq(1.0, 2.0) <= 16);
        assert_eq!(dim_leq(1.0, 2f64.sqrt()), 1);
        assert_eq!(dim_leq(1.0, 1.0), 0);
    }

    #[test]
    fn dim_leq_is_monotone_and_below_fourth_power() {
        let mut prev = 0;
        let mut m = 2f64.sqrt();
        while m < 12.0 {
            let d = dim_leq(1.0, m);
            assert!(d >= prev);
            assert!((d as f64) <= m.powi(4), "D_M = {d} > M^4 at M = {m}");
            prev = d;
            m += 0.05;
        }
        // for omega = 1/2 the bound still holds at the tested range
        for k in 2..40 {
            let m = 0.25 * k as f64;
            assert!((dim_leq(0.5, m) as f64) <= m.powi(4));
        }
    }

    #[test]
    fn ground_mode_at_origin() {
        let basis = HermiteBasis::new(1.0, 6.0).unwrap();
        let vals = basis.eval_modes(&[[0.0, 0.0]]);
        assert!((vals[(0, 0)] - std::f64::consts::PI.powf(-0.5)).abs() < 1e-15);
        let idx = basis.index_of(Mode2D::new(1, 0)).unwrap();
        assert_eq!(vals[(idx, 0)], 0.0);
    }

    #[test]
    fn recurrence_survives_high_degree() {
        let h = hermite_functions(200, 3.0);
        assert!(h.iter().all(|v| v.is_finite()));
        let q = Quadrature1D::gauss_hermite(220);
        let norm: f64 = q
            .nodes
            .iter()
            .zip(&q.weights)
            .map(|(&x, w)| w * hermite_functions(200, x)[200].powi(2))
            .sum();
        assert!((norm - 1.0).abs() < 1e-10, "norm {norm}");
    }

    #[test]
    fn quadrature_gram_is_identity() {
        for &(omega, cutoff) in &[(1.0, 12.0), (0.7, 20.0), (2.5, 40.0)] {
            let basis = HermiteBasis::new(omega, cutoff).unwrap();
            let g = basis.gram();
            let err = (g - DMatrix::identity(basis.len(), basis.len())).abs().max();
            assert!(err < 1e-12, "gram error {err:e}");
        }
    }

    #[test]
    fn projector_masks() {
        let basis = HermiteBasis::new(1.0, 12.0).unwrap();
        assert!(basis.projector_leq(12f64.sqrt()).iter().all(|&b| b));
        assert!(basis.projector_leq(1.0).iter().all(|&b| !b));
        let mask = basis.projector_leq(2.0);
        assert_eq!(mask.iter().filter(|&&b| b).count(), 3);
    }

    #[test]
    fn s_powers() {
        let basis = HermiteBasis::new(1.0, 6.0).unwrap();
        let mut e0 = vec![Complex64::new(0.0, 0.0); basis.len()];
        e0[0] = Complex64::new(1.0, 0.0);
        assert_eq!(basis.apply_s_power(&e0, 2.0)[0], Complex64::new(2.0, 0.0));
        let c: Vec<Complex64> =
            (0..basis.len()).map(|i| Complex64::new(i as f64 + 0.5, -(i as f64))).collect();
        assert_eq!(basis.apply_s_power(&c, 0.0), c);
        let back = basis.apply_s_power(&basis.apply_s_power(&c, 1.0), -1.0);
        for (a, b) in back.iter().zip(&c) {
            assert!((a - b).norm() < 1e-14 * (1.0 + b.norm()));
        }
    }

    #[test]
    fn json_shape() {
        let basis = HermiteBasis::new(1.0, 6.0).unwrap();
        let text = basis.to_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["modes"][1], serde_json::json!([0, 1]));
        let back = HermiteBasis::from_json(&text).unwrap();
        assert_eq!(back.modes(), basis.modes());
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let basis = HermiteBasis::new(1.0, 30.0).unwrap();
        let grid = GridSpec::new(3.0, 16).unwrap();
        assert!(matches!(GridTransform::new(&basis, &grid), Err(Error::UnderResolvedGrid(_))));
    }
}
