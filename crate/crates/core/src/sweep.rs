//! Interpolating sweeps `H(s) = (1 - λ(s)) H_start + λ(s) H_end` with a
//! piecewise-constant discretization.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{eigh, fidelity, CMatrix, Propagator, QuantumState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Switch {
    /// `λ(s) = s / t_ps`.
    #[default]
    Linear,
}

impl Switch {
    pub fn lambda(&self, fraction: f64) -> f64 {
        match self {
            Switch::Linear => fraction.clamp(0.0, 1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub h_start: CMatrix,
    pub h_end: CMatrix,
    pub total_time: f64,
    pub n_trotter: usize,
    pub switch: Switch,
}

impl SweepSpec {
    pub fn new(
        h_start: CMatrix,
        h_end: CMatrix,
        total_time: f64,
        n_trotter: usize,
    ) -> Result<Self> {
        let s = SweepSpec {
            h_start,
            h_end,
            total_time,
            n_trotter,
            switch: Switch::Linear,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.h_start.shape() != self.h_end.shape()
            || self.h_start.nrows() != self.h_start.ncols()
        {
            return Err(Error::DimensionMismatch {
                expected: self.h_start.nrows(),
                got: self.h_end.nrows(),
            });
        }
        if !(self.total_time > 0.0) || !self.total_time.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "sweep time must be positive, got {}",
                self.total_time
            )));
        }
        if self.n_trotter == 0 {
            return Err(Error::InvalidParameter(
                "n_trotter must be at least 1".into(),
            ));
        }
        Ok(())
    }

    pub fn hamiltonian_at(&self, lambda: f64) -> CMatrix {
        &self.h_start * Complex64::new(1.0 - lambda, 0.0)
            + &self.h_end * Complex64::new(lambda, 0.0)
    }

    /// Switch values at the segment midpoints.
    pub fn segment_lambdas(&self) -> Vec<f64> {
        let n = self.n_trotter as f64;
        (0..self.n_trotter)
            .map(|k| self.switch.lambda((k as f64 + 0.5) / n))
            .collect()
    }

    pub fn with_time(&self, total_time: f64) -> Self {
        SweepSpec {
            total_time,
            ..self.clone()
        }
    }
}

/// Evolves `initial` through the segments in order; `after_segment` sees the
/// state after each segment (noise channels).
pub fn pseudo_sweep_with(
    initial: &QuantumState,
    spec: &SweepSpec,
    mut after_segment: impl FnMut(QuantumState) -> Result<QuantumState>,
) -> Result<QuantumState> {
    spec.validate()?;
    if initial.dim() != spec.h_start.nrows() {
        return Err(Error::DimensionMismatch {
            expected: spec.h_start.nrows(),
            got: initial.dim(),
        });
    }
    let dt = spec.total_time / spec.n_trotter as f64;
    let mut state = initial.clone();
    for lambda in spec.segment_lambdas() {
        let prop = Propagator::new(&spec.hamiltonian_at(lambda))?;
        state = after_segment(prop.apply(&state, dt)?)?;
    }
    Ok(state)
}

/// `|Φ><Φ|` with `|Φ> = prod_k exp(-i H(λ_k) dt) |initial>`.
pub fn pseudo_sweep(initial: &QuantumState, spec: &SweepSpec) -> Result<QuantumState> {
    Ok(pseudo_sweep_with(initial, spec, Ok)?.into_density())
}

#[derive(Debug, Clone)]
pub struct SlowSweepResult {
    pub state: QuantumState,
    pub total_time: f64,
    pub doublings: usize,
    pub converged: bool,
    /// `(t_ps, fidelity to reference)` for every attempt.
    pub history: Vec<(f64, f64)>,
}

/// Repeats the sweep with doubling time until the fidelity to `reference`
/// changes by less than `tol`. The segment count doubles with the time so the
/// segment width stays fixed.
pub fn slow_sweep(
    initial: &QuantumState,
    spec: &SweepSpec,
    reference: &QuantumState,
    tol: f64,
    max_doublings: usize,
) -> Result<SlowSweepResult> {
    let mut current = spec.clone();
    let mut state = pseudo_sweep(initial, &current)?;
    let mut last = fidelity(&state, reference)?;
    let mut history = vec![(current.total_time, last)];
    for d in 1..=max_doublings {
        current = SweepSpec {
            total_time: current.total_time * 2.0,
            n_trotter: current.n_trotter * 2,
            ..current
        };
        let next = pseudo_sweep(initial, &current)?;
        let f = fidelity(&next, reference)?;
        history.push((current.total_time, f));
        let change = (f - last).abs();
        state = next;
        last = f;
        if change < tol {
            return Ok(SlowSweepResult {
                state,
                total_time: current.total_time,
                doublings: d,
                converged: true,
                history,
            });
        }
    }
    let last_change = match history.as_slice() {
        [.., a, b] => (b.1 - a.1).abs(),
        _ => f64::NAN,
    };
    Err(Error::SweepNotConverged {
        doublings: max_doublings,
        last_change,
    })
}

/// `K / (t Δ^3)`, the order of the adiabatic error.
pub fn adiabatic_error_estimate(k: f64, delta: f64, t: f64) -> f64 {
    k / (t * delta.powi(3))
}

/// `max_s ||∂_s H(s)||^2` along the linear path, with `s = t / t_ps` so that
/// `∂_s H = H_end - H_start` (spectral norm).
pub fn path_constant(h_start: &CMatrix, h_end: &CMatrix) -> Result<f64> {
    let d = h_end - h_start;
    let spec = eigh(&d)?;
    let norm = spec.eigenvalues.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    Ok(norm * norm)
}

/// Minimal gap `min_s (E_1(s) - E_0(s))` sampled on `n` points of the linear
/// path; degenerate levels count as distinct, so a degenerate endpoint gives 0.
pub fn minimal_gap(h_start: &CMatrix, h_end: &CMatrix, n: usize) -> Result<(f64, f64)> {
    let mut best = (f64::INFINITY, 0.0);
    for k in 0..=n {
        let s = k as f64 / n.max(1) as f64;
        let h = h_start * Complex64::new(1.0 - s, 0.0) + h_end * Complex64::new(s, 0.0);
        let e = eigh(&h)?.eigenvalues;
        if e.len() < 2 {
            return Err(Error::InvalidParameter(
                "gap needs at least two levels".into(),
            ));
        }
        let gap = e[1] - e[0];
        if gap < best.0 {
            best = (gap, s);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{
        build_coulomb, build_free, build_hubbard, fock_matrix, sector_basis, LatticeSpec,
        SectorSpec,
    };
    use crate::quantum::{BasisTag, Space};

    fn dimer_pair() -> (CMatrix, CMatrix, BasisTag) {
        let spec = LatticeSpec::new(1, 2, 1.0, 2.0);
        let sector = SectorSpec::new(1, 1);
        let basis = sector_basis(2, sector).unwrap();
        let h0 = fock_matrix(&build_free(&spec), &basis).unwrap();
        let h1 = fock_matrix(&build_hubbard(&spec), &basis).unwrap();
        (h0, h1, BasisTag::new(Space::Sector { n_sites: 2, sector }))
    }

    #[test]
    fn identical_endpoints_keep_eigenstate() {
        let (_, h, tag) = dimer_pair();
        let s = eigh(&h).unwrap();
        let psi = QuantumState::pure(s.vector(0), tag).unwrap();
        let spec = SweepSpec::new(h.clone(), h, 3.0, 7).unwrap();
        let out = pseudo_sweep(&psi, &spec).unwrap();
        assert!((fidelity(&out, &psi).unwrap() - 1.0).abs() < 1e-10);
        assert!((out.purity() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn longer_sweeps_follow_the_ground_state() {
        let (h0, h1, tag) = dimer_pair();
        let start = QuantumState::pure(eigh(&h0).unwrap().vector(0), tag).unwrap();
        let target = QuantumState::pure(eigh(&h1).unwrap().vector(0), tag).unwrap();
        let mut last = 0.0;
        for t in [0.5, 2.0, 8.0, 32.0] {
            let spec = SweepSpec::new(h0.clone(), h1.clone(), t, (8.0 * t) as usize).unwrap();
            let f = fidelity(&pseudo_sweep(&start, &spec).unwrap(), &target).unwrap();
            assert!(f > last - 1e-9, "t = {t}: {f} < {last}");
            last = f;
        }
        assert!(last > 0.99);
    }

    #[test]
    fn slow_sweep_converges_on_gapped_path() {
        let (h0, h1, tag) = dimer_pair();
        let start = QuantumState::pure(eigh(&h0).unwrap().vector(0), tag).unwrap();
        let target = QuantumState::pure(eigh(&h1).unwrap().vector(0), tag).unwrap();
        let spec = SweepSpec::new(h0, h1, 1.0, 10).unwrap();
        let r = slow_sweep(&start, &spec, &target, 1e-6, 20).unwrap();
        assert!(r.converged);
        assert!(fidelity(&r.state, &target).unwrap() >= 0.99);
    }

    #[test]
    fn coulomb_endpoint_is_degenerate() {
        let spec = LatticeSpec::new(1, 2, 1.0, 2.0);
        let basis = sector_basis(2, SectorSpec::new(1, 1)).unwrap();
        let h0 = fock_matrix(&build_coulomb(&spec), &basis).unwrap();
        let h1 = fock_matrix(&build_hubbard(&spec), &basis).unwrap();
        let (gap, s) = minimal_gap(&h0, &h1, 20).unwrap();
        assert!(gap.abs() < 1e-12);
        assert_eq!(s, 0.0);
    }

    #[test]
    fn error_estimate_scaling() {
        assert!((adiabatic_error_estimate(1.0, 1.0, 10.0) - 0.1).abs() < 1e-15);
        let a = adiabatic_error_estimate(2.0, 0.5, 3.0);
        assert!((adiabatic_error_estimate(2.0, 0.5, 6.0) - a / 2.0).abs() < 1e-15);
    }
}
