//! The elementary cooling step: couple the system to a single fridge qubit,
//! evolve, measure the fridge and trace it out.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::couplers::Coupler;
use crate::error::{Error, Result};
use crate::quantum::{
    fridge_reduced, hermiticity_error, kron, partial_trace_last_qubit, CMatrix, CVector,
    Propagator, QuantumState, StateData,
};

/// Single-qubit fridge with Hamiltonian `omega * (-Z/2 + 1/2) = omega |1><1|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FridgeSpec {
    pub omega: f64,
}

impl FridgeSpec {
    pub fn new(omega: f64) -> Result<Self> {
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "fridge gap must be positive, got {omega}"
            )));
        }
        Ok(FridgeSpec { omega })
    }

    pub fn hamiltonian(&self) -> CMatrix {
        let mut h = CMatrix::zeros(2, 2);
        h[(1, 1)] = Complex64::new(self.omega, 0.0);
        h
    }
}

pub fn fridge_ground() -> CMatrix {
    fridge_basis_state(0)
}

pub fn fridge_excited() -> CMatrix {
    fridge_basis_state(1)
}

fn fridge_basis_state(f: usize) -> CMatrix {
    let mut m = CMatrix::zeros(2, 2);
    m[(f, f)] = Complex64::new(1.0, 0.0);
    m
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvolutionTimeMode {
    /// `t = pi / (2 alpha)`, the peak of the single-gap transfer.
    #[default]
    HalfPi,
    /// `t = pi / alpha`.
    Pi,
    Explicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoolingParams {
    /// Weakening factor, `alpha = omega / W`.
    #[serde(rename = "W", default = "default_w")]
    pub w: f64,
    #[serde(default)]
    pub evolution_time_mode: EvolutionTimeMode,
    #[serde(default)]
    pub explicit_time: Option<f64>,
}

fn default_w() -> f64 {
    100.0
}

impl Default for CoolingParams {
    fn default() -> Self {
        CoolingParams {
            w: default_w(),
            evolution_time_mode: EvolutionTimeMode::HalfPi,
            explicit_time: None,
        }
    }
}

impl CoolingParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.w >= 2.0) || !self.w.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "W must be at least 2, got {}",
                self.w
            )));
        }
        if self.evolution_time_mode == EvolutionTimeMode::Explicit {
            match self.explicit_time {
                Some(t) if t >= 0.0 && t.is_finite() => {}
                _ => {
                    return Err(Error::InvalidParameter(
                        "explicit evolution time mode needs a non-negative explicit_time".into(),
                    ))
                }
            }
        }
        Ok(())
    }

    pub fn alpha(&self, omega: f64) -> f64 {
        omega / self.w
    }

    pub fn evolution_time(&self, alpha: f64) -> f64 {
        match self.evolution_time_mode {
            EvolutionTimeMode::HalfPi => PI / (2.0 * alpha),
            EvolutionTimeMode::Pi => PI / alpha,
            EvolutionTimeMode::Explicit => self.explicit_time.unwrap_or(0.0),
        }
    }
}

#[derive(Debug, Clone)]
pub struct StepResult {
    pub rho_s_after: QuantumState,
    /// `omega * <H_F>` in units of energy.
    pub fridge_energy: f64,
    /// `<|1><1|_F>` after the evolution.
    pub fridge_occupation: f64,
    pub alpha: f64,
    pub time: f64,
}

/// `H_S ⊗ 1 + 1 ⊗ omega H_F + alpha (A ⊗ |1><0| + A† ⊗ |0><1|)`.
pub fn assemble(h_s: &CMatrix, fridge: FridgeSpec, alpha: f64, v: &Coupler) -> Result<CMatrix> {
    let d = h_s.nrows();
    if h_s.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: h_s.ncols(),
        });
    }
    if v.dimension() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: v.dimension(),
        });
    }
    let mut h = kron(h_s, &CMatrix::identity(2, 2));
    let w = Complex64::new(fridge.omega, 0.0);
    for s in 0..d {
        h[(2 * s + 1, 2 * s + 1)] += w;
    }
    if alpha != 0.0 {
        h += v.interaction() * Complex64::new(alpha, 0.0);
    }
    let herm = hermiticity_error(&h);
    if herm > 1e-10 {
        return Err(Error::NotHermitian(herm));
    }
    Ok(h)
}

/// Runs one coupled evolution of `rho_S ⊗ rho_F` and returns the reduced
/// system state with the measured fridge energy.
pub fn cooling_step(
    rho_s: &QuantumState,
    rho_f: &CMatrix,
    h_s: &CMatrix,
    v: &Coupler,
    omega: f64,
    params: &CoolingParams,
) -> Result<StepResult> {
    params.validate()?;
    let fridge = FridgeSpec::new(omega)?;
    if rho_s.tag.fridge {
        return Err(Error::BasisMismatch(
            "system state carries a fridge factor".into(),
        ));
    }
    if rho_f.nrows() != 2 || rho_f.ncols() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: rho_f.nrows(),
        });
    }
    if rho_s.dim() != h_s.nrows() {
        return Err(Error::DimensionMismatch {
            expected: h_s.nrows(),
            got: rho_s.dim(),
        });
    }
    let alpha = params.alpha(omega);
    let time = params.evolution_time(alpha);
    let h = assemble(h_s, fridge, alpha, v)?;
    let prop = Propagator::new(&h)?;

    let rho = match (&rho_s.data, pure_fridge(rho_f)) {
        // pure system with a basis-state fridge stays a vector through the evolution
        (StateData::Pure(psi), Some(f)) => {
            let mut full = CVector::zeros(2 * psi.len());
            for (s, z) in psi.iter().enumerate() {
                full[2 * s + f] = *z;
            }
            let out = prop.apply_vector(&full, time);
            crate::quantum::outer(&out, &out)
        }
        _ => {
            let joint = kron(&rho_s.to_density_matrix(), rho_f);
            prop.apply_density(&joint, time)
        }
    };
    let occupation = fridge_reduced(&rho)[(1, 1)].re;
    let reduced = partial_trace_last_qubit(&rho)?;
    Ok(StepResult {
        rho_s_after: QuantumState::density_unchecked(reduced, rho_s.tag),
        fridge_energy: omega * occupation,
        fridge_occupation: occupation,
        alpha,
        time,
    })
}

/// Index of the occupied fridge level if `rho_f` is `|0><0|` or `|1><1|`.
fn pure_fridge(rho_f: &CMatrix) -> Option<usize> {
    let tol = 1e-15;
    if rho_f[(0, 1)].norm() > tol || rho_f[(1, 0)].norm() > tol {
        return None;
    }
    if (rho_f[(0, 0)].re - 1.0).abs() < tol && rho_f[(1, 1)].norm() < tol {
        Some(0)
    } else if (rho_f[(1, 1)].re - 1.0).abs() < tol && rho_f[(0, 0)].norm() < tol {
        Some(1)
    } else {
        None
    }
}

/// Fridge occupation `<H_F>(t)` for a pure system state and a fridge starting
/// in `|0>`, one sample per entry of `t_grid`.
pub fn fridge_energy_trace(
    psi_s: &CVector,
    h_s: &CMatrix,
    v: &Coupler,
    omega: f64,
    alpha: f64,
    t_grid: &[f64],
) -> Result<Vec<(f64, f64)>> {
    let h = assemble(h_s, FridgeSpec::new(omega)?, alpha, v)?;
    let prop = Propagator::new(&h)?;
    let mut full = CVector::zeros(2 * psi_s.len());
    for (s, z) in psi_s.iter().enumerate() {
        full[2 * s] = *z;
    }
    Ok(t_grid
        .iter()
        .map(|&t| {
            let out = prop.apply_vector(&full, t);
            let occ: f64 = out.iter().skip(1).step_by(2).map(|z| z.norm_sqr()).sum();
            (t, occ)
        })
        .collect())
}

/// Closed-form transfer `q^2/2 (1 - cos 2 alpha t)` for an ideal resonant coupler.
pub fn transfer_closed_form(q_squared: f64, alpha: f64, t: f64) -> f64 {
    0.5 * q_squared * (1.0 - (2.0 * alpha * t).cos())
}

/// Largest `alpha / |omega - omega_ml|` over the off-resonant gaps.
pub fn rwa_error_estimate(alpha: f64, omega: f64, gaps: &[f64]) -> Result<f64> {
    let mut worst = 0.0f64;
    for &g in gaps {
        let d = (omega - g).abs();
        if d == 0.0 {
            return Err(Error::ResonanceCollision { omega });
        }
        worst = worst.max(alpha.abs() / d);
    }
    Ok(worst)
}

/// Fraction of `shots` projective fridge measurements that found `|1>`.
pub fn sample_occupation<R: Rng + ?Sized>(occupation: f64, shots: u64, rng: &mut R) -> f64 {
    if shots == 0 {
        return occupation;
    }
    let p = occupation.clamp(0.0, 1.0);
    let hits = (0..shots).filter(|_| rng.random::<f64>() < p).count();
    hits as f64 / shots as f64
}

/// One row of a cooling-step trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step_index: usize,
    pub coupler_id: String,
    pub omega: f64,
    pub alpha: f64,
    pub t: f64,
    pub fridge_occupation: f64,
    pub system_energy: f64,
    pub fidelity_to_target: f64,
}

pub const STEP_CSV_HEADER: &str =
    "step_index,coupler_id,omega,alpha,t,fridge_occupation,system_energy,fidelity_to_target";

pub fn write_step_csv<W: Write>(out: &mut W, rows: &[StepRecord]) -> std::io::Result<()> {
    writeln!(out, "{STEP_CSV_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
            r.step_index,
            r.coupler_id,
            r.omega,
            r.alpha,
            r.t,
            r.fridge_occupation,
            r.system_energy,
            r.fidelity_to_target
        )?;
    }
    Ok(())
}
