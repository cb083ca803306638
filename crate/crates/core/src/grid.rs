//! Uniform periodic square grids and the 2D FFT helpers used on them.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Square grid on `[-L, L)²` with `n` points per axis, `x_j = -L + j·2L/n`.
///
/// Field values are stored row-major with `x` fastest: `values[iy * n + ix]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    half_width: f64,
    points_per_axis: usize,
}

impl GridSpec {
    pub fn new(half_width: f64, points_per_axis: usize) -> Result<Self> {
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::InvalidParameter(format!("half width must be positive, got {half_width}")));
        }
        if points_per_axis < 16 || points_per_axis % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "points per axis must be even and at least 16, got {points_per_axis}"
            )));
        }
        Ok(Self { half_width, points_per_axis })
    }

    /// Default grid for trap frequency `omega`: 256², `L = 8 ω^{-1/2}`.
    pub fn default_for(omega: f64) -> Self {
        Self { half_width: 8.0 / omega.abs().sqrt(), points_per_axis: 256 }
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    pub fn len(&self) -> usize {
        self.points_per_axis * self.points_per_axis
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.points_per_axis as f64
    }

    /// Area element `h²`.
    pub fn cell_area(&self) -> f64 {
        self.spacing().powi(2)
    }

    pub fn coordinates(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.points_per_axis).map(|j| -self.half_width + j as f64 * h).collect()
    }

    /// Angular wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.points_per_axis as i64;
        let dk = std::f64::consts::PI / self.half_width;
        (0..n).map(|m| if m < n / 2 { m as f64 * dk } else { (m - n) as f64 * dk }).collect()
    }

    /// `|x|²` at every grid point.
    pub fn radius_squared(&self) -> Vec<f64> {
        let xs = self.coordinates();
        let mut out = Vec::with_capacity(self.len());
        for y in &xs {
            for x in &xs {
                out.push(x * x + y * y);
            }
        }
        out
    }

    /// `|k|²` at every point of the FFT lattice.
    pub fn wavenumber_squared(&self) -> Vec<f64> {
        let ks = self.wavenumbers();
        let mut out = Vec::with_capacity(self.len());
        for ky in &ks {
            for kx in &ks {
                out.push(kx * kx + ky * ky);
            }
        }
        out
    }

    /// Sample a function at every grid point.
    pub fn sample<F: Fn(f64, f64) -> Complex64>(&self, f: F) -> Vec<Complex64> {
        let xs = self.coordinates();
        let mut out = Vec::with_capacity(self.len());
        for &y in &xs {
            for &x in &xs {
                out.push(f(x, y));
            }
        }
        out
    }
}

/// Planned forward/inverse 2D FFT of a fixed size. The inverse includes the
/// `1/n²` normalization.
#[derive(Clone)]
pub struct Fft2 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft2").field("n", &self.n).finish()
    }
}

impl Fft2 {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self { n, forward: planner.plan_fft_forward(n), inverse: planner.plan_fft_inverse(n) }
    }

    fn transform(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        assert_eq!(data.len(), n * n);
        plan.process(data);
        let mut column = vec![Complex64::new(0.0, 0.0); n];
        for ix in 0..n {
            for iy in 0..n {
                column[iy] = data[iy * n + ix];
            }
            plan.process(&mut column);
            for iy in 0..n {
                data[iy * n + ix] = column[iy];
            }
        }
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, &self.forward);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inverse);
        let scale = 1.0 / (self.n * self.n) as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_or_odd_grids() {
        assert!(GridSpec::new(4.0, 8).is_err());
        assert!(GridSpec::new(4.0, 17).is_err());
        assert!(GridSpec::new(-1.0, 32).is_err());
        assert!(GridSpec::new(4.0, 16).is_ok());
    }

    #[test]
    fn fft_round_trip_and_derivative() {
        let grid = GridSpec::new(std::f64::consts::PI, 32).unwrap();
        let fft = Fft2::new(32);
        let f = grid.sample(|x, y| Complex64::new((2.0 * x).sin() * y.cos(), 0.0));
        let mut g = f.clone();
        fft.forward(&mut g);
        let k2 = grid.wavenumber_squared();
        for (v, k) in g.iter_mut().zip(&k2) {
            *v *= k;
        }
        fft.inverse(&mut g);
        // -Δ f = 5 f
        for (a, b) in g.iter().zip(&f) {
            assert!((a - b * 5.0).norm() < 1e-11);
        }
    }
}
