use fermi_cool::quantum::{fidelity, BasisTag, CMatrix, QuantumState};
use fermi_cool::sweep::{minimal_gap, path_constant, pseudo_sweep, slow_sweep, SweepSpec};
use num_complex::Complex64;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn sz() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)])
}

fn sx() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)])
}

fn ground_of_sx() -> QuantumState {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    QuantumState::pure(
        nalgebra::DVector::from_vec(vec![c(s), c(-s)]),
        BasisTag::generic(2),
    )
    .unwrap()
}

#[test]
fn two_level_path_geometry() {
    // H(λ) = (1 - λ) σz + λ σx has gap 2 sqrt((1 - λ)^2 + λ^2), smallest at λ = 1/2
    let (gap, at) = minimal_gap(&sz(), &sx(), 200).unwrap();
    assert!((gap - 2f64.sqrt()).abs() < 1e-9);
    assert!((at - 0.5).abs() < 1e-9);
    // ||σx - σz||^2 = 2
    assert!((path_constant(&sz(), &sx()).unwrap() - 2.0).abs() < 1e-9);
}

#[test]
fn slow_sweep_reaches_target_ground() {
    let start = QuantumState::basis_state(1, BasisTag::generic(2)).unwrap();
    let spec = SweepSpec::new(sz(), sx(), 1.0, 10).unwrap();
    let r = slow_sweep(&start, &spec, &ground_of_sx(), 1e-5, 12).unwrap();
    assert!(r.converged);
    assert!(fidelity(&r.state, &ground_of_sx()).unwrap() > 0.999);
    let fast = pseudo_sweep(&start, &spec).unwrap();
    assert!((fast.trace() - 1.0).abs() < 1e-12);
    assert!((fast.purity() - 1.0).abs() < 1e-12);
}

#[test]
fn rejects_mismatched_input() {
    let three = QuantumState::basis_state(0, BasisTag::generic(3)).unwrap();
    let spec = SweepSpec::new(sz(), sx(), 1.0, 4).unwrap();
    assert!(pseudo_sweep(&three, &spec).is_err());
    assert!(SweepSpec::new(sz(), sx(), 1.0, 0).is_err());
}
