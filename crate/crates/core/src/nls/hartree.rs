//! Hartree energy of a product state under the attenuated pair operator.

use num_complex::Complex64;
use rand::Rng;

use super::{gn::gn_constant_fourth, gradient_norm_squared, mass, trap_energy, Field2D};
use crate::error::{Error, Result};
use crate::grid::Fft2;
use crate::hermite::hermite_functions_omega;
use crate::interaction::InteractionSpec;

/// `∫∫ V_N(x−y)|φ(x)|²|φ(y)|²`, with the convolution done in Fourier space
/// against the analytic transform of `V_N`.
pub fn pair_integral(phi: &Field2D, interaction: &InteractionSpec) -> f64 {
    if interaction.is_zero() {
        return 0.0;
    }
    let grid = &phi.grid;
    let fft = Fft2::new(grid.points_per_axis());
    let density: Vec<f64> = phi.values.iter().map(|v| v.norm_sqr()).collect();
    let mut hat: Vec<Complex64> = density.iter().map(|&d| Complex64::new(d, 0.0)).collect();
    fft.forward(&mut hat);
    for (v, k2) in hat.iter_mut().zip(grid.wavenumber_squared()) {
        *v *= interaction.scaled_fourier(k2);
    }
    fft.inverse(&mut hat);
    hat.iter().zip(&density).map(|(c, d)| c.re * d).sum::<f64>() * grid.cell_area()
}

/// `2α⟨S²⟩ + ((N−1)/N)∫V_N|φ⊗φ|² − 2ε²∫|V_N||φ⊗φ|²` for unit-mass `φ`.
pub fn hartree_energy(
    phi: &Field2D,
    interaction: &InteractionSpec,
    alpha: f64,
    epsilon: f64,
    omega: f64,
) -> Result<f64> {
    let m = mass(phi);
    if (m.sqrt() - 1.0).abs() > 1e-8 {
        return Err(Error::NotNormalized(m.sqrt()));
    }
    let s2 = gradient_norm_squared(phi) + trap_energy(phi, omega);
    let pair = pair_integral(phi, interaction);
    // the Gaussian family has constant sign, so ∫|V_N||φ⊗φ|² = |pair|
    let n = interaction.n as f64;
    Ok(2.0 * alpha * s2 + (n - 1.0) / n * pair - 2.0 * epsilon * epsilon * pair.abs())
}

/// Largest `ε = 2^{-k}` with `(1 + 2ε²) C⁴ ‖V‖₁ ≤ 2α`, or `None` when even
/// `ε → 0` violates the bound.
pub fn pinned_epsilon(l1: f64, alpha: f64) -> Result<Option<f64>> {
    let c4 = gn_constant_fourth()?;
    for k in 0..60 {
        let eps = 0.5f64.powi(k);
        if (1.0 + 2.0 * eps * eps) * c4 * l1 <= 2.0 * alpha {
            return Ok(Some(eps));
        }
    }
    Ok(None)
}

/// Random normalized trial for Hartree scans: Hermite modes of a random
/// frequency (sets the width) up to total degree 4 with coefficients
/// damped by shell, centered at a random offset.
pub fn random_hartree_trial<R: Rng>(grid: &crate::grid::GridSpec, rng: &mut R) -> Result<Field2D> {
    let width_freq = (rng.random_range(0.3f64.ln()..5.0f64.ln())).exp();
    let center = [rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)];
    let mut coeffs = Vec::new();
    for shell in 0..=4u32 {
        for n1 in 0..=shell {
            let damp = 0.35f64.powi(shell as i32);
            let c = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * damp;
            coeffs.push((n1 as usize, (shell - n1) as usize, c));
        }
    }
    coeffs[0].2 = Complex64::new(1.0, 0.0);
    let field = Field2D::from_fn(grid.clone(), |x, y| {
        let hx = hermite_functions_omega(4, x - center[0], width_freq);
        let hy = hermite_functions_omega(4, y - center[1], width_freq);
        coeffs.iter().map(|(a, b, c)| c * hx[*a] * hy[*b]).sum()
    });
    field.normalized()
}
