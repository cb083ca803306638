//! Scaled pair potentials `V_N(x) = N^{2β} V(N^β x)` and their two-body
//! matrix elements in the Hermite basis.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermite::{hermite_functions_omega, HermiteBasis, Mode2D, Quadrature1D};

/// Potential family. All members are Gaussians `V(x) = -λ e^{-|x|²}`; the
/// repulsive variant flips the sign and exists for sanity checks only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    Zero,
    Gaussian { lambda: f64 },
    RepulsiveGaussian { strength: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InteractionSpec {
    pub profile: Profile,
    pub beta: f64,
    pub n: usize,
}

impl InteractionSpec {
    pub fn new(profile: Profile, beta: f64, n: usize) -> Result<Self> {
        if !(0.0..1.0).contains(&beta) || beta == 0.0 {
            return Err(Error::InvalidParameter(format!("beta must lie in (0, 1), got {beta}")));
        }
        if n == 0 {
            return Err(Error::InvalidParameter("particle number must be positive".into()));
        }
        match profile {
            Profile::Gaussian { lambda } if !(lambda >= 0.0) => {
                return Err(Error::InvalidParameter(format!("lambda must be nonnegative, got {lambda}")))
            }
            Profile::RepulsiveGaussian { strength } if !(strength >= 0.0) => {
                return Err(Error::InvalidParameter(format!(
                    "strength must be nonnegative, got {strength}"
                )))
            }
            _ => {}
        }
        if beta > 1.0 / 6.0 {
            log::warn!("beta = {beta} exceeds 1/6");
        }
        Ok(Self { profile, beta, n })
    }

    /// Gaussian profile whose `L¹` norm equals `l1`.
    pub fn gaussian_with_l1(l1: f64, beta: f64, n: usize) -> Result<Self> {
        Self::new(Profile::Gaussian { lambda: l1 / std::f64::consts::PI }, beta, n)
    }

    pub fn with_n(&self, n: usize) -> Result<Self> {
        Self::new(self.profile, self.beta, n)
    }

    /// `V(0)`, signed.
    pub fn peak(&self) -> f64 {
        match self.profile {
            Profile::Zero => 0.0,
            Profile::Gaussian { lambda } => -lambda,
            Profile::RepulsiveGaussian { strength } => strength,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.peak() == 0.0
    }

    /// `N^{2β}`: the Gaussian exponent of `V_N`.
    pub fn scale(&self) -> f64 {
        (self.n as f64).powf(2.0 * self.beta)
    }

    /// `N^β`.
    pub fn length_scale(&self) -> f64 {
        (self.n as f64).powf(self.beta)
    }

    /// Unscaled profile `V(x)`.
    pub fn value(&self, x: f64, y: f64) -> f64 {
        self.peak() * (-(x * x + y * y)).exp()
    }

    /// Scaled potential `V_N(x)`.
    pub fn scaled_value(&self, x: f64, y: f64) -> f64 {
        let a = self.scale();
        a * self.peak() * (-a * (x * x + y * y)).exp()
    }

    /// Fourier transform `∫ V_N(x) e^{-ik·x} dx` at `|k|² = k2`.
    pub fn scaled_fourier(&self, k2: f64) -> f64 {
        self.peak() * std::f64::consts::PI * (-k2 / (4.0 * self.scale())).exp()
    }

    /// `∫ V` (signed).
    pub fn integral(&self) -> f64 {
        self.peak() * std::f64::consts::PI
    }

    /// `‖V‖_{L¹}`.
    pub fn l1_norm(&self) -> f64 {
        self.integral().abs()
    }

    /// `‖V‖_{L^∞}` of the unscaled profile.
    pub fn linf_norm(&self) -> f64 {
        self.peak().abs()
    }

    /// Coupling of the limiting equation, `b₀ = |∫V|`.
    pub fn coupling(&self) -> f64 {
        self.l1_norm()
    }
}

/// One-dimensional factor `I(i,j,k,l) = ∫∫ h_i(x) h_j(y) e^{-a(x-y)²} h_k(x) h_l(y)`
/// for all degrees up to `degree`, laid out `[(i*(d+1)+k)*(d+1)² + j*(d+1)+l]`.
fn axis_table(degree: usize, omega: f64, a: f64, order: usize) -> Vec<f64> {
    // x - y = √2 u, x + y = √2 v; the four Hermite functions carry e^{-ω(u²+v²)}.
    let qu = Quadrature1D::gauss_hermite(order).scaled(omega + 2.0 * a);
    let qv = Quadrature1D::gauss_hermite(order).scaled(omega);
    let d = degree + 1;
    let nodes = qu.len() * qv.len();
    let mut left = DMatrix::<f64>::zeros(d * d, nodes);
    let mut right = DMatrix::<f64>::zeros(nodes, d * d);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut col = 0;
    for (&u, &wu) in qu.nodes.iter().zip(&qu.weights) {
        let damp = wu * (-2.0 * a * u * u).exp();
        for (&v, &wv) in qv.nodes.iter().zip(&qv.weights) {
            let x = s * (v + u);
            let y = s * (v - u);
            let hx = hermite_functions_omega(degree, x, omega);
            let hy = hermite_functions_omega(degree, y, omega);
            let w = damp * wv;
            for i in 0..d {
                for k in 0..d {
                    left[(i * d + k, col)] = w * hx[i] * hx[k];
                    right[(col, i * d + k)] = hy[i] * hy[k];
                }
            }
            col += 1;
        }
    }
    let product = left * right;
    let mut out = vec![0.0; d * d * d * d];
    for ik in 0..d * d {
        for jl in 0..d * d {
            out[ik * d * d + jl] = product[(ik, jl)];
        }
    }
    out
}

/// Table of two-body elements `W_{pq,rs} = ⟨φ_p φ_q | V_N(x₁-x₂) | φ_r φ_s⟩`
/// for a basis, using the Cartesian separability of the Gaussian.
#[derive(Debug, Clone)]
pub struct PairTable {
    amplitude: f64,
    degree: usize,
    axis: Vec<f64>,
    modes: Vec<Mode2D>,
}

impl PairTable {
    pub fn new(basis: &HermiteBasis, interaction: &InteractionSpec) -> Result<Self> {
        let a = interaction.scale();
        Self::gaussian(basis, a * interaction.peak(), a)
    }

    /// Table for the pair potential `amplitude · e^{-a|x₁-x₂|²}`.
    pub fn gaussian(basis: &HermiteBasis, amplitude: f64, a: f64) -> Result<Self> {
        if !(a > 0.0) {
            return Err(Error::InvalidParameter(format!("Gaussian exponent must be positive, got {a}")));
        }
        let degree = basis.max_degree();
        // the rotated rule is exact for every a: the pair Gaussian only rescales the u-weight
        let order = 2 * degree + 8;
        let axis = axis_table(degree, basis.omega(), a, order);
        let check = axis_table(degree, basis.omega(), a, 2 * order);
        let scale = axis.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let diff = axis.iter().zip(&check).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        if diff > 1e-6 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::Refinement(format!(
                "two-body quadrature changed by {diff:e} under order doubling"
            )));
        }
        Ok(Self { amplitude, degree, axis, modes: basis.modes().to_vec() })
    }

    fn axis_value(&self, i: u32, j: u32, k: u32, l: u32) -> f64 {
        let d = self.degree + 1;
        // swapping the two particles maps (i,j,k,l) to (j,i,l,k); pick one representative
        let (i, j, k, l) = if (i, k) > (j, l) { (j, i, l, k) } else { (i, j, k, l) };
        let (i, j, k, l) = (i as usize, j as usize, k as usize, l as usize);
        self.axis[(i * d + k) * d * d + j * d + l]
    }

    pub fn element_modes(&self, p: Mode2D, q: Mode2D, r: Mode2D, s: Mode2D) -> f64 {
        if self.amplitude == 0.0 {
            return 0.0;
        }
        self.amplitude * self.axis_value(p.n1, q.n1, r.n1, s.n1) * self.axis_value(p.n2, q.n2, r.n2, s.n2)
    }

    /// Element by basis indices.
    pub fn element(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        self.element_modes(self.modes[p], self.modes[q], self.modes[r], self.modes[s])
    }

    pub fn dim(&self) -> usize {
        self.modes.len()
    }

    /// Dense `D² × D²` matrix of the pair operator on the two-particle space,
    /// row index `p·D + q`.
    pub fn two_particle_matrix(&self) -> DMatrix<f64> {
        let d = self.dim();
        DMatrix::from_fn(d * d, d * d, |row, col| self.element(row / d, row % d, col / d, col % d))
    }
}

/// `⟨φ_p(x₁)φ_q(x₂)| V_N(x₁-x₂) |φ_r(x₁)φ_s(x₂)⟩`.
pub fn two_body_element(
    p: Mode2D,
    q: Mode2D,
    r: Mode2D,
    s: Mode2D,
    interaction: &InteractionSpec,
    basis: &HermiteBasis,
) -> Result<f64> {
    for m in [p, q, r, s] {
        if basis.index_of(m).is_none() {
            return Err(Error::InvalidParameter(format!("mode {m:?} is not in the basis")));
        }
    }
    Ok(PairTable::new(basis, interaction)?.element_modes(p, q, r, s))
}
