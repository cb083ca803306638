//! The two-body family whose diagonal mass diverges while its one-particle
//! gradient stays bounded, and the Fourier identity `J_V = J_δ` for
//! band-limited pairs.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Fft2, GridSpec};
use crate::manybody::smooth_step;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let step = p1 / dp;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        nodes.push(x);
        weights.push(2.0 / ((1.0 - x * x) * dp * dp));
    }
    (nodes, weights)
}

/// Composite Gauss–Legendre rule on `[a, b]` with `panels` equal panels.
fn composite(a: f64, b: f64, panels: usize, order: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    (0..panels)
        .flat_map(|p| {
            let lo = a + p as f64 * h;
            x.iter().zip(&w).map(move |(xi, wi)| (lo + 0.5 * h * (xi + 1.0), 0.5 * h * wi)).collect::<Vec<_>>()
        })
        .collect()
}

fn bump_exp(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Radial cutoff: 1 on `|x| ≤ 1/4`, 0 on `|x| ≥ 1/2`.
pub fn chi(r: f64) -> f64 {
    smooth_step(4.0 * r)
}

fn chi_prime(r: f64) -> f64 {
    let s = 4.0 * r;
    if s <= 1.0 || s >= 2.0 {
        return 0.0;
    }
    let (a, b) = (2.0 - s, s - 1.0);
    let (fa, fb) = (bump_exp(a), bump_exp(b));
    let (da, db) = (fa / (a * a), fb / (b * b));
    4.0 * (-da * fb - fa * db) / (fa + fb).powi(2)
}

fn log_log(s: f64, eps: f64) -> f64 {
    (-(s + eps).ln()).ln()
}

fn log_log_prime(s: f64, eps: f64) -> f64 {
    let u = s + eps;
    1.0 / (u * u.ln())
}

/// `ψ_ε(x₁, x₂) = χ(x₁−x₂)χ(x₁)χ(x₂) ln(−ln(|x₁−x₂| + ε))`.
pub fn psi_eps(x1: [f64; 2], x2: [f64; 2], eps: f64) -> f64 {
    let r = (x1[0] - x2[0]).hypot(x1[1] - x2[1]);
    if r >= 0.5 {
        return 0.0;
    }
    chi(r) * chi(x1[0].hypot(x1[1])) * chi(x2[0].hypot(x2[1])) * log_log(r, eps)
}

fn diagonal_mass(eps: f64) -> f64 {
    // ψ_ε(x, x) = χ(x)² ln(−ln ε), radial
    let l = log_log(0.0, eps);
    let rule = composite(0.0, 0.25, 4, 16).into_iter().chain(composite(0.25, 0.5, 16, 16));
    2.0 * PI * rule.map(|(r, w)| w * r * (chi(r).powi(2) * l).powi(2)).sum::<f64>()
}

fn gradient_integral(eps: f64, level: usize) -> f64 {
    let scale = 1usize << level;
    // x₂ = (ρ, 0) by rotation invariance; r = x₁ − x₂ = s(cos θ, sin θ), s = e^u
    let rho = composite(0.0, 0.25, 2 * scale, 12).into_iter().chain(composite(0.25, 0.5, 8 * scale, 12)).collect::<Vec<_>>();
    let u_lo = eps.ln() - 25.0;
    let u_mid = 0.25f64.ln();
    let panels = ((u_mid - u_lo).ceil() as usize).max(1) * scale;
    let u_rule: Vec<(f64, f64)> =
        composite(u_lo, u_mid, panels, 12).into_iter().chain(composite(u_mid, 0.5f64.ln(), 4 * scale, 12)).collect();
    let n_theta = 96 * scale;
    let dtheta = 2.0 * PI / n_theta as f64;
    let trig: Vec<(f64, f64)> = (0..n_theta).map(|i| (i as f64 * dtheta).sin_cos()).map(|(s, c)| (c, s)).collect();
    rho.par_iter()
        .map(|&(p, wp)| {
            let c2 = chi(p);
            if c2 == 0.0 {
                return 0.0;
            }
            let mut acc = 0.0;
            for &(u, wu) in &u_rule {
                let s = u.exp();
                let (cs, dcs) = (chi(s), chi_prime(s));
                let (l, dl) = (log_log(s, eps), log_log_prime(s, eps));
                let mut ring = 0.0;
                for &(ct, st) in &trig {
                    let x1 = [p + s * ct, s * st];
                    let r1 = x1[0].hypot(x1[1]);
                    let c1 = chi(r1);
                    let dc1 = chi_prime(r1);
                    // ∇_{x₁} of χ(r)χ(x₁)L(r): radial parts along r̂ and x̂₁
                    let along_r = dcs * c1 * l + cs * c1 * dl;
                    let along_x1 = if r1 > 0.0 { cs * dc1 * l / r1 } else { 0.0 };
                    let gx = along_r * ct + along_x1 * x1[0];
                    let gy = along_r * st + along_x1 * x1[1];
                    ring += gx * gx + gy * gy;
                }
                acc += wu * s * s * ring * dtheta;
            }
            wp * 2.0 * PI * p * c2 * c2 * acc
        })
        .sum()
}

/// `‖∇_{x₁}ψ_ε‖²` by graded quadrature in relative/center coordinates,
/// refined until two successive levels agree to `1e-6` relative.
pub fn gradient_norm_squared(eps: f64) -> Result<f64> {
    let mut prev = gradient_integral(eps, 0);
    for level in 1..=3 {
        let next = gradient_integral(eps, level);
        if (next - prev).abs() <= 1e-6 * next.abs() {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::Refinement(format!("gradient quadrature at ε = {eps:e} did not settle")))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleRow {
    pub epsilon: f64,
    /// `∫|ψ_ε(x, x)|² dx`
    pub diagonal: f64,
    pub gradient_norm_squared: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleTrace {
    pub rows: Vec<CounterexampleRow>,
    pub strictly_increasing: bool,
    pub ratio_last_first: f64,
    /// `(max − min)/min` of the gradient norms.
    pub gradient_variation: f64,
    /// `p` in a fit `J(ε) ∝ (ln ln ε^{-1})^p`.
    pub exponent: Option<f64>,
}

/// Diagonal mass and one-particle gradient of `ψ_ε` along decreasing `ε`.
pub fn counterexample_trace(epsilons: &[f64]) -> Result<CounterexampleTrace> {
    if epsilons.is_empty() {
        return Err(Error::InvalidParameter("empty ε list".into()));
    }
    for w in epsilons.windows(2) {
        if !(w[1] < w[0]) {
            return Err(Error::InvalidParameter("ε list must be strictly decreasing".into()));
        }
    }
    for &e in epsilons {
        if !(e > 1e-12 && e <= (-1.0f64).exp()) {
            return Err(Error::InvalidParameter(format!("ε = {e} outside (1e-12, 1/e]")));
        }
    }
    let rows: Vec<CounterexampleRow> = epsilons
        .iter()
        .map(|&e| Ok(CounterexampleRow { epsilon: e, diagonal: diagonal_mass(e), gradient_norm_squared: gradient_norm_squared(e)? }))
        .collect::<Result<_>>()?;
    let strictly_increasing = rows.windows(2).all(|w| w[1].diagonal > w[0].diagonal);
    let ratio_last_first = rows[rows.len() - 1].diagonal / rows[0].diagonal;
    let (gmin, gmax) = rows
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), r| (a.min(r.gradient_norm_squared), b.max(r.gradient_norm_squared)));
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.diagonal > 0.0)
        .map(|r| ((-r.epsilon.ln()).ln().ln(), r.diagonal.ln()))
        .collect();
    let exponent = (pts.len() >= 2).then(|| {
        let m = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
        let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
        sxy / sxx
    });
    Ok(CounterexampleTrace { rows, strictly_increasing, ratio_last_first, gradient_variation: (gmax - gmin) / gmin, exponent })
}

/// Fourier profile of the unscaled potential in the trace identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FourierProfile {
    /// `V̂ = 1` on `|ξ| ≤ 4`, smoothly down to 0 at `|ξ| = 8`.
    Bump,
    /// `V̂ ≡ 1`, the lattice delta.
    Delta,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceIdentity {
    pub j_v: f64,
    pub j_delta: f64,
    pub difference: f64,
    /// `|J_V − J_δ| / max(J_δ, 1)`
    pub relative: f64,
    /// `M₂ ≤ N^β`
    pub hypothesis: bool,
}

/// `J_V = ∫∫ V_N(x₁−x₂)|ψ|²` against `J_δ = ∫|ψ(x, x)|²` on the periodic box
/// `[−π, π)²` with `points` nodes per axis. `ψ` is a random symmetric pair
/// whose one-particle frequencies lie in the lattice annulus `M₁ ≤ |k| ≤ M₂`.
pub fn trace_identity_check(
    points: usize,
    m1: f64,
    m2: f64,
    n: usize,
    beta: f64,
    profile: FourierProfile,
    seed: u64,
) -> Result<TraceIdentity> {
    let grid = GridSpec::new(PI, points)?;
    let nyquist = (points / 2) as f64;
    let ks = grid.wavenumbers();
    let length = (n as f64).powf(beta);
    if 2.0 * m2 >= nyquist || (profile == FourierProfile::Bump && 8.0 * length >= nyquist) {
        return Err(Error::UnderResolvedGrid(format!(
            "{points} points per axis cannot carry |k| ≤ {m2} pairs and a kernel of radius {}",
            8.0 * length
        )));
    }
    let shell: Vec<[f64; 2]> = ks
        .iter()
        .flat_map(|&ky| ks.iter().map(move |&kx| [kx, ky]))
        .filter(|k| {
            let r = k[0].hypot(k[1]);
            r >= m1 - 1e-12 && r <= m2 + 1e-12
        })
        .collect();
    if shell.is_empty() {
        return Err(Error::InvalidParameter(format!("no lattice frequencies with {m1} ≤ |k| ≤ {m2}")));
    }
    let kk = shell.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = DMatrix::<Complex64>::zeros(kk, kk);
    for i in 0..kk {
        for j in 0..=i {
            let z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            c[(i, j)] = z;
            c[(j, i)] = z;
        }
    }
    // ‖ψ‖² = (2π)⁴ Σ|c|²
    let scale = 1.0 / ((2.0 * PI).powi(2) * c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt());
    let xs = grid.coordinates();
    let np = points * points;
    let u = DMatrix::<Complex64>::from_fn(np, kk, |idx, j| {
        let (x, y) = (xs[idx % points], xs[idx / points]);
        Complex64::from_polar(1.0, shell[j][0] * x + shell[j][1] * y)
    });
    let psi = &u * (c * Complex64::new(scale, 0.0)) * u.transpose();
    let density = psi.map(|z| z.norm_sqr());
    // G(d) = Σ_{x₂} |ψ(x₂ + d, x₂)|², d on the periodic lattice
    let g: Vec<f64> = (0..np)
        .into_par_iter()
        .map(|d| {
            let (dx, dy) = (d % points, d / points);
            (0..np)
                .map(|x2| {
                    let (ix, iy) = (x2 % points, x2 / points);
                    let x1 = (iy + dy) % points * points + (ix + dx) % points;
                    density[(x1, x2)]
                })
                .sum()
        })
        .collect();
    // kernel K(d) = h² V_N(d) from the Fourier series of the periodized V_N
    let kernel: Vec<f64> = match profile {
        FourierProfile::Delta => (0..np).map(|d| if d == 0 { 1.0 } else { 0.0 }).collect(),
        FourierProfile::Bump => {
            let mut hat: Vec<Complex64> = (0..np)
                .map(|idx| {
                    let r = ks[idx % points].hypot(ks[idx / points]) / length;
                    Complex64::new(smooth_step(r / 4.0), 0.0)
                })
                .collect();
            Fft2::new(points).inverse(&mut hat);
            hat.iter().map(|z| z.re).collect()
        }
    };
    let h2 = grid.cell_area();
    let j_v = h2 * kernel.iter().zip(&g).map(|(k, v)| k * v).sum::<f64>();
    let j_delta = h2 * g[0];
    let difference = (j_v - j_delta).abs();
    Ok(TraceIdentity { j_v, j_delta, difference, relative: difference / j_delta.max(1.0), hypothesis: m2 <= length })
}
