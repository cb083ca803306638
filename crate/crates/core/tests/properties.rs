use std::sync::Arc;

use meanfield_core::hermite::{enumerate_modes, mode_eigenvalue, GridTransform};
use meanfield_core::manybody::{
    assemble_hamiltonian, energy_moment, evolve_manybody, norm, product_state, random_state, OccupationBasis,
};
use meanfield_core::marginals::{
    compatibility_check, metric_dk, partial_trace_last, reduce, trace_distance_pure_power, trace_norm,
    DensityMatrixK,
};
use meanfield_core::{GridSpec, HermiteBasis, InteractionSpec, Mode2D, Profile};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

fn hermitian(n: usize) -> impl Strategy<Value = DMatrix<Complex64>> {
    prop::collection::vec(-1.0f64..1.0, 2 * n * n).prop_map(move |v| {
        let a = DMatrix::from_fn(n, n, |i, j| Complex64::new(v[2 * (i * n + j)], v[2 * (i * n + j) + 1]));
        (&a + a.adjoint()) * Complex64::new(0.5, 0.0)
    })
}

fn unit_vector(d: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), d)
        .prop_filter("nonzero", |v| v.iter().any(|(a, b)| a.abs() + b.abs() > 1e-3))
        .prop_map(|v| {
            let c: Vec<Complex64> = v.iter().map(|&(a, b)| Complex64::new(a, b)).collect();
            let n = norm(&c);
            c.iter().map(|z| z / n).collect()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn trace_norm_is_a_norm(a in hermitian(6), b in hermitian(6), s in -3.0f64..3.0) {
        let sum = trace_norm(&(&a + &b));
        prop_assert!(sum <= trace_norm(&a) + trace_norm(&b) + 1e-12);
        let scaled = trace_norm(&(&a * Complex64::new(s, 0.0)));
        prop_assert!((scaled - s.abs() * trace_norm(&a)).abs() < 1e-10);
    }

    #[test]
    fn partial_trace_contracts(a in hermitian(9)) {
        prop_assert!(trace_norm(&partial_trace_last(&a, 3)) <= trace_norm(&a) + 1e-12);
    }

    #[test]
    fn metric_is_dominated_by_trace_distance(seed in 0u64..1000, phi in unit_vector(3)) {
        let s = random_state(Arc::new(OccupationBasis::new(3, 3).unwrap()), seed);
        let gamma = reduce(&s, 2).unwrap();
        let v = meanfield_core::marginals::tensor_power(&phi, 2);
        let sigma = DensityMatrixK { k: 2, d: 3, entries: DMatrix::from_fn(9, 9, |i, j| v[i] * v[j].conj()) };
        let dk = metric_dk(&gamma, &sigma, 12).unwrap();
        let tr = trace_distance_pure_power(&gamma, &phi).unwrap();
        prop_assert!(dk <= tr + 1e-12);
    }

    #[test]
    fn marginals_are_density_matrices(seed in 0u64..1000, d in 2usize..5, n in 2usize..5) {
        let s = random_state(Arc::new(OccupationBasis::new(d, n).unwrap()), seed);
        for k in 1..=2 {
            let g = reduce(&s, k).unwrap();
            prop_assert!(g.defects().within(1e-10, 1e-10, 1e-9));
            prop_assert!(g.defects().permutation <= 1e-10);
        }
        prop_assert!(compatibility_check(&s, 1).unwrap() < 1e-9);
    }

    #[test]
    fn product_states_have_pure_marginals(phi in unit_vector(3), n in 1usize..6) {
        let s = product_state(Arc::new(OccupationBasis::new(3, n).unwrap()), &phi).unwrap();
        prop_assert!((s.norm() - 1.0).abs() < 1e-12);
        for k in 1..=n.min(2) {
            prop_assert!(trace_distance_pure_power(&reduce(&s, k).unwrap(), &phi).unwrap() < 1e-10);
        }
    }

    #[test]
    fn spectrum_matches_formula(omega in 0.2f64..3.0, shells in 1u32..7) {
        let cutoff = 2.0 * omega * shells as f64 + 1e-9;
        let modes = enumerate_modes(omega, cutoff).unwrap();
        prop_assert_eq!(modes.len() as u32, shells * (shells + 1) / 2);
        for w in modes.windows(2) {
            prop_assert!((w[0].shell(), w[0].n1) < (w[1].shell(), w[1].n1));
        }
        for m in &modes {
            prop_assert_eq!(mode_eigenvalue(*m, omega), 2.0 * omega * (m.n1 + m.n2 + 1) as f64);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn evolution_is_unitary_and_conserves_energy(seed in 0u64..1000, lambda in 0.0f64..3.0, t in 0.0f64..1.0) {
        let basis = HermiteBasis::new(1.0, 6.0).unwrap();
        let occ = Arc::new(OccupationBasis::new(basis.len(), 3).unwrap());
        let spec = InteractionSpec::new(Profile::Gaussian { lambda }, 0.1, 3).unwrap();
        let h = assemble_hamiltonian(occ.clone(), &basis, &spec).unwrap();
        let s = random_state(occ, seed);
        let (u, _) = evolve_manybody(&s, &h, t, 1e-11).unwrap();
        prop_assert!((u.norm() - 1.0).abs() < 1e-9);
        let drift = energy_moment(&u, &h, 1).unwrap() - energy_moment(&s, &h, 1).unwrap();
        prop_assert!(drift.abs() < 1e-8);
    }

    #[test]
    fn grid_transform_round_trips(c in unit_vector(10)) {
        let basis = HermiteBasis::new(1.0, 8.0).unwrap();
        let t = GridTransform::new(&basis, &GridSpec::new(8.0, 64).unwrap()).unwrap();
        let back = t.grid_to_spectral(&t.spectral_to_grid(&c));
        let err = back.iter().zip(&c).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(err < 1e-10);
    }
}

#[test]
fn mode_order_is_graded_lexicographic() {
    let modes = enumerate_modes(1.0, 6.0).unwrap();
    let expected = [(0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (2, 0)];
    assert_eq!(modes, expected.map(|(a, b)| Mode2D::new(a, b)).to_vec());
}
