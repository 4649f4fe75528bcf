use fermi_cool::lattice::SectorSpec;
use fermi_cool::noise::{depolarize, NoiseScope, NoiseSpec};
use fermi_cool::quantum::{eigh, max_abs_diff, BasisTag, CMatrix, QuantumState, Space};
use num_complex::Complex64;
use proptest::prelude::*;

// (1,1) on two sites: 4 sector states out of 16 Fock states
fn tag() -> BasisTag {
    BasisTag::new(Space::Sector {
        n_sites: 2,
        sector: SectorSpec::new(1, 1),
    })
}

fn random_density() -> impl Strategy<Value = CMatrix> {
    prop::collection::vec(-1.0f64..1.0, 32).prop_filter_map("zero", |x| {
        let g = CMatrix::from_fn(4, 4, |i, j| {
            Complex64::new(x[2 * (4 * i + j)], x[2 * (4 * i + j) + 1])
        });
        let rho = &g * g.adjoint();
        let tr = rho.trace().re;
        (tr > 1e-6).then(|| rho / Complex64::new(tr, 0.0))
    })
}

proptest! {
    #[test]
    fn output_is_positive_with_expected_trace(rho in random_density(), lambda in 0.0f64..=1.0, sector in any::<bool>()) {
        let scope = if sector { NoiseScope::Sector } else { NoiseScope::FullSpace };
        let state = QuantumState::density(rho, tag()).unwrap();
        let out = depolarize(&state, &NoiseSpec::new(lambda, scope).unwrap()).unwrap();
        let m = out.to_density_matrix();
        prop_assert!(max_abs_diff(&m, &m.adjoint()) < 1e-14);
        prop_assert!(eigh(&m).unwrap().eigenvalues[0] > -1e-12);
        let expect = if sector { 1.0 } else { 1.0 - lambda + lambda * 4.0 / 16.0 };
        prop_assert!((out.trace() - expect).abs() < 1e-12);
    }

    #[test]
    fn sector_channels_compose(rho in random_density(), a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let state = QuantumState::density(rho, tag()).unwrap();
        let twice = depolarize(
            &depolarize(&state, &NoiseSpec::new(a, NoiseScope::Sector).unwrap()).unwrap(),
            &NoiseSpec::new(b, NoiseScope::Sector).unwrap(),
        ).unwrap();
        let once = depolarize(&state, &NoiseSpec::new(1.0 - (1.0 - a) * (1.0 - b), NoiseScope::Sector).unwrap()).unwrap();
        prop_assert!(max_abs_diff(&twice.to_density_matrix(), &once.to_density_matrix()) < 1e-13);
    }
}
