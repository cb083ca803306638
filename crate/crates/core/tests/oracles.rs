//! Independent reference computations for values the library derives.

use std::sync::Arc;

use meanfield_core::grid::Fft2;
use meanfield_core::manybody::{assemble_hamiltonian, BosonicState, OccupationBasis};
use meanfield_core::nls::{gn_constant_fourth, townes_profile};
use meanfield_core::{GridSpec, HermiteBasis, InteractionSpec, Profile};
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Ground state of `ΔQ − Q + Q³ = 0` by Petviashvili iteration on a
/// periodic grid.
fn petviashvili(half_width: f64, n: usize) -> (f64, f64) {
    let grid = GridSpec::new(half_width, n).unwrap();
    let fft = Fft2::new(n);
    let symbol: Vec<f64> = grid.wavenumber_squared().iter().map(|k| 1.0 + k).collect();
    let mut q: Vec<Complex64> = grid.sample(|x, y| Complex64::new(2.0 * (-(x * x + y * y)).exp(), 0.0));
    for _ in 0..400 {
        let mut cube: Vec<Complex64> = q.iter().map(|v| Complex64::new(v.re.powi(3), 0.0)).collect();
        let mut hat = q.clone();
        fft.forward(&mut hat);
        fft.forward(&mut cube);
        let num: f64 = hat.iter().zip(&symbol).map(|(h, s)| s * h.norm_sqr()).sum();
        let den: f64 = hat.iter().zip(&cube).map(|(h, c)| (h.conj() * c).re).sum();
        let m = num / den;
        for (c, s) in cube.iter_mut().zip(&symbol) {
            *c *= m.powf(1.5) / s;
        }
        fft.inverse(&mut cube);
        let change = cube.iter().zip(&q).map(|(a, b)| (a.re - b.re).abs()).fold(0.0, f64::max);
        q = cube.iter().map(|v| Complex64::new(v.re, 0.0)).collect();
        if change < 1e-13 {
            break;
        }
    }
    let mass = q.iter().map(|v| v.re * v.re).sum::<f64>() * grid.cell_area();
    (q[n / 2 * n + n / 2].re, mass)
}

#[test]
fn townes_profile_matches_petviashvili() {
    let (q0, mass) = petviashvili(16.0, 256);
    let shot = townes_profile(1e-12).unwrap();
    assert!((shot.mass - mass).abs() < 1e-7 * mass, "{} vs {mass}", shot.mass);
    assert!((shot.q0 - q0).abs() < 1e-6, "{} vs {q0}", shot.q0);
    assert!((gn_constant_fourth().unwrap() * mass - 2.0).abs() < 1e-6);
}

fn h(n: usize, x: f64) -> f64 {
    let g = std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp();
    match n {
        0 => g,
        1 => std::f64::consts::SQRT_2 * x * g,
        _ => unreachable!(),
    }
}

/// `∫∫ h_i(x)h_j(y)h_k(x)h_l(y) e^{−a(x−y)²}` by the trapezoid rule.
fn axis_integral(i: usize, j: usize, k: usize, l: usize, a: f64) -> f64 {
    let (lim, m) = (10.0, 800);
    let step = 2.0 * lim / m as f64;
    let xs: Vec<f64> = (0..=m).map(|t| -lim + t as f64 * step).collect();
    let mut s = 0.0;
    for &x in &xs {
        let fx = h(i, x) * h(k, x);
        for &y in &xs {
            s += fx * h(j, y) * h(l, y) * (-a * (x - y) * (x - y)).exp();
        }
    }
    s * step * step
}

#[test]
fn second_quantized_hamiltonian_matches_first_quantized() {
    let (lambda, beta, n) = (1.0, 0.1, 2usize);
    let basis = HermiteBasis::new(1.0, 4.0).unwrap();
    let modes: Vec<(usize, usize)> = basis.modes().iter().map(|m| (m.n1 as usize, m.n2 as usize)).collect();
    assert_eq!(modes.len(), 3);
    let spec = InteractionSpec::new(Profile::Gaussian { lambda }, beta, n).unwrap();
    let a = (n as f64).powf(2.0 * beta);
    assert!((spec.scaled_value(0.3, -0.2) + lambda * a * (-a * 0.13f64).exp()).abs() < 1e-14);

    let d = modes.len();
    let mut h1 = DMatrix::<f64>::zeros(d * d, d * d);
    for p in 0..d {
        for q in 0..d {
            for r in 0..d {
                for s in 0..d {
                    let (mp, mq, mr, ms) = (modes[p], modes[q], modes[r], modes[s]);
                    let w = -lambda
                        * a
                        * axis_integral(mp.0, mq.0, mr.0, ms.0, a)
                        * axis_integral(mp.1, mq.1, mr.1, ms.1, a);
                    h1[(p * d + q, r * d + s)] = w / n as f64;
                }
            }
            let e = 2.0 * (modes[p].0 + modes[p].1 + 1) as f64 + 2.0 * (modes[q].0 + modes[q].1 + 1) as f64;
            h1[(p * d + q, p * d + q)] += e;
        }
    }

    let occ = Arc::new(OccupationBasis::new(d, n).unwrap());
    let hsq = assemble_hamiltonian(occ.clone(), &basis, &spec).unwrap().matrix.to_dense();
    let columns: Vec<Vec<Complex64>> = (0..occ.len())
        .map(|i| {
            let mut c = vec![Complex64::new(0.0, 0.0); occ.len()];
            c[i] = Complex64::new(1.0, 0.0);
            BosonicState::new(occ.clone(), c).unwrap().to_first_quantized()
        })
        .collect();
    let u = DMatrix::from_fn(d * d, occ.len(), |r, c| columns[c][r].re);
    let projected = u.transpose() * &h1 * &u;
    let diff = (&projected - &hsq).abs().max();
    assert!(diff < 1e-10, "max deviation {diff:e}");
}

#[test]
fn harmonic_spectrum_counts() {
    // shells n = n1 + n2 hold n + 1 modes at energy 2ω(n + 1)
    for (omega, cutoff) in [(1.0, 2.0), (1.0, 6.0), (2.0, 8.0), (0.5, 7.3)] {
        let basis = HermiteBasis::new(omega, cutoff).unwrap();
        let shells = (cutoff / (2.0 * omega)).floor() as usize;
        assert_eq!(basis.len(), shells * (shells + 1) / 2);
    }
}
