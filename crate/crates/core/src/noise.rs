//! Depolarizing noise between algorithm steps.
//!
//! States are kept on one particle-number sector. Full-space depolarization
//! mixes towards `1 / 2^n_modes` on the whole Fock space; every Hamiltonian
//! and coupler here conserves the sector, so the part that lands outside it
//! never returns and only the sector block is tracked. That block then has
//! trace below one, which is the exact full-space weight of the sector.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{CMatrix, QuantumState, Space};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseScope {
    #[default]
    FullSpace,
    Sector,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub lambda: f64,
    #[serde(default)]
    pub scope: NoiseScope,
}

impl NoiseSpec {
    pub fn new(lambda: f64, scope: NoiseScope) -> Result<Self> {
        let s = NoiseSpec { lambda, scope };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::InvalidParameter(format!(
                "noise strength must lie in [0, 1], got {}",
                self.lambda
            )));
        }
        Ok(())
    }

    /// Dimension of the mixing target for a state on `space`.
    pub fn scope_dimension(&self, space: &Space) -> Result<f64> {
        match (self.scope, space) {
            (NoiseScope::Sector, Space::Sector { .. }) => Ok(space.dim() as f64),
            (NoiseScope::Sector, _) => Err(Error::InvalidParameter(
                "sector-scope noise needs a state on a sector basis".into(),
            )),
            (NoiseScope::FullSpace, Space::Sector { n_sites, .. }) => {
                Ok(2f64.powi(2 * *n_sites as i32))
            }
            (NoiseScope::FullSpace, _) => Ok(space.dim() as f64),
        }
    }
}

/// `(1 - λ) ρ + (λ / Λ) 1` on the tracked block.
pub fn depolarize(rho: &QuantumState, spec: &NoiseSpec) -> Result<QuantumState> {
    spec.validate()?;
    if rho.tag.fridge {
        return Err(Error::BasisMismatch(
            "noise acts on system states only".into(),
        ));
    }
    let big = spec.scope_dimension(&rho.tag.space)?;
    let m = rho.to_density_matrix();
    if spec.lambda == 0.0 {
        return Ok(QuantumState::density_unchecked(m, rho.tag));
    }
    let d = m.nrows();
    let mut out = m * Complex64::new(1.0 - spec.lambda, 0.0);
    let shift = Complex64::new(spec.lambda / big, 0.0);
    for i in 0..d {
        out[(i, i)] += shift;
    }
    Ok(QuantumState::density_unchecked(out, rho.tag))
}

/// Matrix form of [`depolarize`] for callers that hold raw blocks.
pub fn depolarize_matrix(rho: &CMatrix, lambda: f64, scope_dimension: f64) -> CMatrix {
    let mut out = rho * Complex64::new(1.0 - lambda, 0.0);
    for i in 0..out.nrows() {
        out[(i, i)] += Complex64::new(lambda / scope_dimension, 0.0);
    }
    out
}

/// Largest per-step noise strength that still admits net cooling:
/// `4 E_j^2 / (W^2 d_c^4 E_max^2 π^2)`.
pub fn noise_threshold(e_j: f64, e_max: f64, w: f64, d_c: f64) -> f64 {
    4.0 * e_j * e_j / (w * w * d_c.powi(4) * e_max * e_max * std::f64::consts::PI.powi(2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::SectorSpec;
    use crate::quantum::{eigh, BasisTag, CVector};

    fn sector_tag() -> BasisTag {
        BasisTag::new(Space::Sector {
            n_sites: 2,
            sector: SectorSpec::new(1, 1),
        })
    }

    fn some_state() -> QuantumState {
        let v = CVector::from_vec(vec![
            Complex64::new(0.5, 0.1),
            Complex64::new(-0.3, 0.2),
            Complex64::new(0.1, -0.4),
            Complex64::new(0.6, 0.0),
        ]);
        QuantumState::pure_normalized(v, sector_tag()).unwrap()
    }

    #[test]
    fn limits() {
        let rho = some_state();
        let same = depolarize(&rho, &NoiseSpec::new(0.0, NoiseScope::Sector).unwrap()).unwrap();
        assert!(
            crate::quantum::max_abs_diff(&same.to_density_matrix(), &rho.to_density_matrix())
                < 1e-15
        );
        let mixed = depolarize(&rho, &NoiseSpec::new(1.0, NoiseScope::Sector).unwrap()).unwrap();
        let expect = CMatrix::identity(4, 4) * Complex64::new(0.25, 0.0);
        assert!(crate::quantum::max_abs_diff(&mixed.to_density_matrix(), &expect) < 1e-15);
    }

    #[test]
    fn full_space_noise_leaks_weight() {
        let rho = some_state();
        let out = depolarize(&rho, &NoiseSpec::new(0.1, NoiseScope::FullSpace).unwrap()).unwrap();
        // 4 of the 16 Fock states belong to the sector
        assert!((out.trace() - (0.9 + 0.1 * 4.0 / 16.0)).abs() < 1e-14);
        assert!(eigh(&out.to_density_matrix()).unwrap().eigenvalues[0] > -1e-12);
    }

    #[test]
    fn sector_noise_preserves_trace() {
        let rho = some_state();
        for lambda in [0.0, 0.1, 0.5, 0.9, 1.0] {
            let out =
                depolarize(&rho, &NoiseSpec::new(lambda, NoiseScope::Sector).unwrap()).unwrap();
            assert!((out.trace() - 1.0).abs() < 1e-12);
            assert!(eigh(&out.to_density_matrix()).unwrap().eigenvalues[0] > -1e-12);
        }
    }

    #[test]
    fn threshold_formula() {
        let pi2 = std::f64::consts::PI.powi(2);
        assert!((noise_threshold(2.0, 2.0, 1.0, 1.0) - 4.0 / pi2).abs() < 1e-15);
        let a = noise_threshold(0.3, 5.0, 100.0, 2.0);
        assert!((noise_threshold(0.3, 5.0, 100.0, 4.0) - a / 16.0).abs() < 1e-20);
    }

    #[test]
    fn rejects_bad_lambda() {
        assert!(NoiseSpec::new(1.5, NoiseScope::Sector).is_err());
        assert!(NoiseSpec::new(-0.1, NoiseScope::FullSpace).is_err());
    }
}
