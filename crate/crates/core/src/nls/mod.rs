//! Focusing cubic NLS with a harmonic trap,
//! `i∂ₜφ = (−Δ + ω²|x|²)φ − b₀|φ|²φ`, on a periodic square grid.

mod gn;
mod hartree;
mod townes;

pub use gn::{
    cross_validate_gn, gn_constant, gn_constant_fourth, gn_functional, maximize_gn_quotient,
    random_trial_field, threshold_l1, GnAscent,
};
pub use hartree::{hartree_energy, pair_integral, pinned_epsilon, random_hartree_trial};
pub use townes::{townes_profile, RadialProfile};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Fft2, GridSpec};
use crate::hermite::{GridTransform, HermiteBasis};

/// Mass drift beyond which an evolution is declared under-resolved.
const MAX_MASS_DRIFT: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Field2D {
    pub grid: GridSpec,
    pub values: Vec<Complex64>,
}

impl Field2D {
    pub fn new(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonFinite(v.re));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        let n = grid.len();
        Self { grid, values: vec![Complex64::new(0.0, 0.0); n] }
    }

    pub fn from_fn<F: Fn(f64, f64) -> Complex64>(grid: GridSpec, f: F) -> Self {
        let values = grid.sample(f);
        Self { grid, values }
    }

    /// Synthesize a field from Hermite coefficients.
    pub fn from_coefficients(basis: &HermiteBasis, grid: &GridSpec, coefficients: &[Complex64]) -> Result<Self> {
        let transform = GridTransform::new(basis, grid)?;
        Ok(Self { grid: grid.clone(), values: transform.spectral_to_grid(coefficients) })
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|v| v * factor).collect() }
    }

    pub fn normalized(&self) -> Result<Self> {
        let m = mass(self);
        if !(m > 0.0) {
            return Err(Error::NotNormalized(m.sqrt()));
        }
        Ok(self.scaled(Complex64::new(1.0 / m.sqrt(), 0.0)))
    }

    pub fn max_amplitude(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.norm()))
    }

    /// `∫ φ̄ χ`.
    pub fn inner(&self, other: &Field2D) -> Complex64 {
        let s: Complex64 = self.values.iter().zip(&other.values).map(|(a, b)| a.conj() * b).sum();
        s * self.grid.cell_area()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NlsParams {
    pub omega: f64,
    pub b0: f64,
    pub dt: f64,
    pub t_final: f64,
}

impl NlsParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega.abs() > 0.0) {
            return Err(Error::InvalidParameter("omega must be nonzero".into()));
        }
        if !(self.b0 >= 0.0) {
            return Err(Error::InvalidParameter(format!("b0 must be nonnegative, got {}", self.b0)));
        }
        if !(self.dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_final >= 0.0) || (self.t_final > 0.0 && self.dt > self.t_final) {
            return Err(Error::InvalidParameter(format!(
                "need 0 <= dt <= t_final, got dt = {}, t_final = {}",
                self.dt, self.t_final
            )));
        }
        Ok(())
    }
}

/// `mass = ∫|φ|²`.
pub fn mass(field: &Field2D) -> f64 {
    field.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * field.grid.cell_area()
}

/// `∫|∇φ|²` by spectral differentiation.
pub fn gradient_norm_squared(field: &Field2D) -> f64 {
    let n = field.grid.points_per_axis();
    let fft = Fft2::new(n);
    gradient_norm_squared_with(field, &fft, &field.grid.wavenumber_squared())
}

fn gradient_norm_squared_with(field: &Field2D, fft: &Fft2, k2: &[f64]) -> f64 {
    let mut hat = field.values.clone();
    fft.forward(&mut hat);
    let n2 = field.grid.len() as f64;
    hat.iter().zip(k2).map(|(v, k)| k * v.norm_sqr()).sum::<f64>() * field.grid.cell_area() / n2
}

/// `∫ω²|x|²|φ|²`.
pub fn trap_energy(field: &Field2D, omega: f64) -> f64 {
    let r2 = field.grid.radius_squared();
    omega * omega
        * field.values.iter().zip(&r2).map(|(v, r)| r * v.norm_sqr()).sum::<f64>()
        * field.grid.cell_area()
}

/// `∫|φ|⁴`.
pub fn quartic_integral(field: &Field2D) -> f64 {
    field.values.iter().map(|v| v.norm_sqr().powi(2)).sum::<f64>() * field.grid.cell_area()
}

/// `∫(|∇φ|² + ω²|x|²|φ|²) − (b₀/2)∫|φ|⁴`.
pub fn energy_nls(field: &Field2D, params: &NlsParams) -> f64 {
    gradient_norm_squared(field) + trap_energy(field, params.omega) - 0.5 * params.b0 * quartic_integral(field)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    pub max_amplitude: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub rows: Vec<TrajectoryRow>,
    pub snapshots: Vec<(f64, Field2D)>,
}

impl Trajectory {
    pub fn final_field(&self) -> &Field2D {
        &self.snapshots.last().expect("trajectory has at least the initial snapshot").1
    }

    pub fn max_mass_drift(&self) -> f64 {
        let m0 = self.rows[0].mass;
        self.rows.iter().fold(0.0f64, |d, r| d.max((r.mass - m0).abs()))
    }

    pub fn max_energy_drift(&self) -> f64 {
        let e0 = self.rows[0].energy;
        self.rows.iter().fold(0.0f64, |d, r| d.max((r.energy - e0).abs()))
    }
}

/// Strang splitting with an exact harmonic-oscillator step.
///
/// One step is `N(dt/2) L(dt) N(dt/2)` where `N` is the pointwise phase
/// `e^{i b₀|φ|² τ}` and `L(τ) = e^{-iτ(−Δ+ω²|x|²)}` is applied exactly as
/// chirp · free propagator · chirp:
/// `L(τ) = e^{-ic|x|²} e^{-id(−Δ)} e^{-ic|x|²}` with `θ = 2ωτ`,
/// `d = sin θ/(2ω)`, `c = (ω/2) tan(θ/2)`.
#[derive(Debug, Clone)]
pub struct NlsPropagator {
    grid: GridSpec,
    b0: f64,
    dt: f64,
    fft: Fft2,
    chirp: Vec<Complex64>,
    kinetic: Vec<Complex64>,
}

impl NlsPropagator {
    pub fn new(grid: &GridSpec, omega: f64, b0: f64, dt: f64) -> Self {
        let omega = omega.abs();
        let theta = 2.0 * omega * dt;
        let d = theta.sin() / (2.0 * omega);
        let c = 0.5 * omega * (0.5 * theta).tan();
        let chirp = grid.radius_squared().iter().map(|r2| Complex64::from_polar(1.0, -c * r2)).collect();
        let kinetic = grid.wavenumber_squared().iter().map(|k2| Complex64::from_polar(1.0, -d * k2)).collect();
        Self { grid: grid.clone(), b0, dt, fft: Fft2::new(grid.points_per_axis()), chirp, kinetic }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn nonlinear(&self, values: &mut [Complex64], tau: f64) {
        if self.b0 == 0.0 {
            return;
        }
        for v in values.iter_mut() {
            *v *= Complex64::from_polar(1.0, self.b0 * v.norm_sqr() * tau);
        }
    }

    fn linear(&self, values: &mut [Complex64]) {
        for (v, c) in values.iter_mut().zip(&self.chirp) {
            *v *= c;
        }
        self.fft.forward(values);
        for (v, k) in values.iter_mut().zip(&self.kinetic) {
            *v *= k;
        }
        self.fft.inverse(values);
        for (v, c) in values.iter_mut().zip(&self.chirp) {
            *v *= c;
        }
    }

    pub fn step(&self, field: &mut Field2D) {
        debug_assert_eq!(field.grid, self.grid);
        self.nonlinear(&mut field.values, 0.5 * self.dt);
        self.linear(&mut field.values);
        self.nonlinear(&mut field.values, 0.5 * self.dt);
    }
}

/// Evolve to `params.t_final`, recording diagnostics every step and field
/// snapshots every `snapshot_every` steps (plus the initial and final field).
pub fn evolve_nls_with(initial: &Field2D, params: &NlsParams, snapshot_every: Option<usize>) -> Result<Trajectory> {
    params.validate()?;
    let m0 = mass(initial);
    if (m0.sqrt() - 1.0).abs() > 1e-8 {
        return Err(Error::NotNormalized(m0.sqrt()));
    }
    let steps = if params.t_final == 0.0 { 0 } else { (params.t_final / params.dt).round() as usize };
    let dt = if steps == 0 { params.dt } else { params.t_final / steps as f64 };
    let propagator = NlsPropagator::new(&initial.grid, params.omega, params.b0, dt);
    let k2 = initial.grid.wavenumber_squared();
    let row = |t: f64, f: &Field2D| TrajectoryRow {
        t,
        mass: mass(f),
        energy: gradient_norm_squared_with(f, &propagator.fft, &k2) + trap_energy(f, params.omega)
            - 0.5 * params.b0 * quartic_integral(f),
        max_amplitude: f.max_amplitude(),
    };
    let mut field = initial.clone();
    let mut rows = vec![row(0.0, &field)];
    let mut snapshots = vec![(0.0, field.clone())];
    for s in 1..=steps {
        propagator.step(&mut field);
        let t = s as f64 * dt;
        let r = row(t, &field);
        if !r.mass.is_finite() || !r.energy.is_finite() {
            return Err(Error::NonFinite(t));
        }
        let drift = (r.mass - m0).abs();
        if drift > MAX_MASS_DRIFT {
            return Err(Error::UnderResolvedEvolution { drift, t });
        }
        rows.push(r);
        if s == steps || snapshot_every.is_some_and(|k| k > 0 && s % k == 0) {
            snapshots.push((t, field.clone()));
        }
    }
    let drift = rows.iter().fold(0.0f64, |d, r| d.max((r.mass - m0).abs()));
    log::info!("nls evolution: {steps} steps, mass drift {drift:e}");
    Ok(Trajectory { rows, snapshots })
}

/// Evolve to `params.t_final`, keeping only the initial and final fields.
pub fn evolve_nls(initial: &Field2D, params: &NlsParams) -> Result<Trajectory> {
    evolve_nls_with(initial, params, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::Mode2D;

    fn ground(grid: &GridSpec, omega: f64) -> Field2D {
        let norm = (omega / std::f64::consts::PI).sqrt();
        Field2D::from_fn(grid.clone(), |x, y| Complex64::new(norm * (-0.5 * omega * (x * x + y * y)).exp(), 0.0))
    }

    #[test]
    fn mass_basics() {
        let grid = GridSpec::new(8.0, 64).unwrap();
        let g = ground(&grid, 1.0);
        assert!((mass(&g) - 1.0).abs() < 1e-10);
        assert_eq!(mass(&Field2D::zeros(grid.clone())), 0.0);
        assert!((mass(&g.scaled(Complex64::new(2.0, 0.0))) - 4.0 * mass(&g)).abs() < 1e-12);
    }

    #[test]
    fn ground_energy() {
        let grid = GridSpec::new(8.0, 64).unwrap();
        let p = NlsParams { omega: 1.0, b0: 0.0, dt: 1e-3, t_final: 1.0 };
        assert!((energy_nls(&ground(&grid, 1.0), &p) - 2.0).abs() < 1e-8);
        assert_eq!(energy_nls(&Field2D::zeros(grid), &p), 0.0);
    }

    #[test]
    fn linear_eigenstates_pick_up_phases() {
        let grid = GridSpec::new(8.0, 64).unwrap();
        let basis = HermiteBasis::new(1.0, 4.0).unwrap();
        for (mode, energy) in [(Mode2D::new(0, 0), 2.0), (Mode2D::new(1, 0), 4.0)] {
            let mut c = vec![Complex64::new(0.0, 0.0); basis.len()];
            c[basis.index_of(mode).unwrap()] = Complex64::new(1.0, 0.0);
            let f0 = Field2D::from_coefficients(&basis, &grid, &c).unwrap();
            let p = NlsParams { omega: 1.0, b0: 0.0, dt: 1e-3, t_final: 1.0 };
            let traj = evolve_nls(&f0, &p).unwrap();
            let f1 = traj.final_field();
            let phase = Complex64::from_polar(1.0, -energy);
            let dev = f1.values.iter().zip(&f0.values).fold(0.0f64, |m, (a, b)| m.max((a - b * phase).norm()));
            assert!(dev < 1e-8, "{mode:?}: {dev:e}");
            let modulus = f1.values.iter().zip(&f0.values).fold(0.0f64, |m, (a, b)| m.max(a.norm() - b.norm()));
            assert!(modulus.abs() < 1e-7);
        }
    }

    #[test]
    fn rejects_unnormalized_data() {
        let grid = GridSpec::new(8.0, 32).unwrap();
        let f = ground(&grid, 1.0).scaled(Complex64::new(1.1, 0.0));
        let p = NlsParams { omega: 1.0, b0: 1.0, dt: 1e-2, t_final: 0.1 };
        assert!(matches!(evolve_nls(&f, &p), Err(Error::NotNormalized(_))));
    }

    #[test]
    fn nan_fields_are_rejected() {
        let grid = GridSpec::new(8.0, 16).unwrap();
        let mut values = vec![Complex64::new(0.0, 0.0); 256];
        values[3] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(Field2D::new(grid, values), Err(Error::NonFinite(_))));
    }
}
