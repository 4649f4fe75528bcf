//! Thermal-state preparation: probabilistic fridge resets, thermal steps and
//! the stochastic detailed-balance coupler schedule.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cooling::{cooling_step, fridge_excited, fridge_ground, CoolingParams, StepResult};
use crate::couplers::Coupler;
use crate::error::{Error, Result};
use crate::quantum::{gibbs_populations, Beta, CMatrix, QuantumState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalParams {
    pub beta: Beta,
    pub n_steps: usize,
}

impl ThermalParams {
    pub fn validate(&self) -> Result<()> {
        if let Beta::Finite(b) = self.beta {
            if !(b >= 0.0) || !b.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "beta must be finite and non-negative, got {b}"
                )));
            }
        }
        if self.n_steps == 0 {
            return Err(Error::InvalidParameter("n_steps must be positive".into()));
        }
        Ok(())
    }
}

/// Probability `p_0 = e^{βω/2} / Z_F(β)` of resetting the fridge to `|0>`.
pub fn ground_reset_probability(beta: Beta, omega: f64) -> f64 {
    match beta {
        Beta::Infinite => 1.0,
        Beta::Finite(b) => 1.0 / (1.0 + (-b * omega).exp()),
    }
}

/// Fridge Gibbs state `diag(p_0, 1 - p_0)`.
pub fn fridge_thermal_state(beta: Beta, omega: f64) -> CMatrix {
    let p0 = ground_reset_probability(beta, omega);
    let mut m = CMatrix::zeros(2, 2);
    m[(0, 0)] = Complex64::new(p0, 0.0);
    m[(1, 1)] = Complex64::new(1.0 - p0, 0.0);
    m
}

/// `|0><0|` with probability `p_0`, else `|1><1|`. Infinite beta returns
/// `|0><0|` without drawing.
pub fn probabilistic_reset<R: Rng + ?Sized>(beta: Beta, omega: f64, rng: &mut R) -> CMatrix {
    match beta {
        Beta::Infinite => fridge_ground(),
        Beta::Finite(_) => {
            if rng.random::<f64>() < ground_reset_probability(beta, omega) {
                fridge_ground()
            } else {
                fridge_excited()
            }
        }
    }
}

/// How the thermal step prepares the fridge.
pub enum ResetMode<'a, R: Rng + ?Sized> {
    /// One projective reset drawn from `rng` (a single trajectory).
    Sampled(&'a mut R),
    /// The fridge Gibbs state itself (the average over trajectories).
    Ensemble,
}

/// Probabilistic reset followed by a cooling step.
pub fn therm_step<R: Rng + ?Sized>(
    rho_s: &QuantumState,
    h_s: &CMatrix,
    v: &Coupler,
    omega: f64,
    beta: Beta,
    cooling: &CoolingParams,
    mode: ResetMode<'_, R>,
) -> Result<StepResult> {
    let rho_f = match mode {
        ResetMode::Sampled(rng) => probabilistic_reset(beta, omega, rng),
        ResetMode::Ensemble => fridge_thermal_state(beta, omega),
    };
    cooling_step(rho_s, &rho_f, h_s, v, omega, cooling)
}

/// Selection probabilities `v_(j,k)` for moving population from level `j`
/// to level `k` within the lowest `d_c` levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplerDistribution {
    pub beta: Beta,
    pub energies: Vec<f64>,
    /// `((j, k), v_(j,k))` over ordered pairs `j != k`, sorted by pair.
    pub pairs: Vec<((usize, usize), f64)>,
}

impl CouplerDistribution {
    pub fn d_c(&self) -> usize {
        self.energies.len()
    }

    pub fn probability(&self, j: usize, k: usize) -> f64 {
        self.pairs
            .iter()
            .find(|(p, _)| *p == (j, k))
            .map(|(_, v)| *v)
            .unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.pairs.iter().map(|(_, v)| v).sum()
    }

    /// Inverse-CDF draw of one pair.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, usize) {
        let x = rng.random::<f64>() * self.total();
        let mut acc = 0.0;
        for (pair, v) in &self.pairs {
            acc += v;
            if x < acc {
                return *pair;
            }
        }
        // rounding at the top end
        self.pairs
            .iter()
            .rev()
            .find(|(_, v)| *v > 0.0)
            .map(|(p, _)| *p)
            .unwrap_or((1, 0))
    }

    /// `(P ⋅ v)` as a transition-rate matrix: `rates[(k, j)] = v_(j,k)` for
    /// `j != k`, diagonal `-sum_k v_(j,k)`.
    pub fn rate_matrix(&self) -> Vec<Vec<f64>> {
        let d = self.d_c();
        let mut r = vec![vec![0.0; d]; d];
        for ((j, k), v) in &self.pairs {
            r[*k][*j] += v;
            r[*j][*j] -= v;
        }
        r
    }
}

/// `v_(j,k) = e^{-β E_k} / ((d_c - 1) Z)` on the lowest `d_c` entries of
/// `energies` (ascending).
pub fn build_coupler_distribution(
    energies: &[f64],
    beta: Beta,
    d_c: usize,
) -> Result<CouplerDistribution> {
    if d_c < 2 {
        return Err(Error::InvalidParameter(
            "coupler distribution needs d_c >= 2".into(),
        ));
    }
    if d_c > energies.len() {
        return Err(Error::InvalidParameter(format!(
            "d_c = {d_c} exceeds the {} available levels",
            energies.len()
        )));
    }
    let e = energies[..d_c].to_vec();
    let g = gibbs_populations(&e, beta);
    let norm = (d_c - 1) as f64;
    let mut pairs = Vec::with_capacity(d_c * (d_c - 1));
    for j in 0..d_c {
        for (k, gk) in g.iter().enumerate() {
            if j != k {
                pairs.push(((j, k), gk / norm));
            }
        }
    }
    Ok(CouplerDistribution {
        beta,
        energies: e,
        pairs,
    })
}

/// Largest detailed-balance residual
/// `|sum_k v_(k,j) w_k - (sum_k v_(j,k)) w_j|` with Boltzmann weights `w`.
pub fn detailed_balance_residual(dist: &CouplerDistribution, energies: &[f64], beta: Beta) -> f64 {
    let d = dist.d_c();
    let w = gibbs_populations(&energies[..d], beta);
    let mut worst = 0.0f64;
    for j in 0..d {
        let inflow: f64 = (0..d)
            .filter(|&k| k != j)
            .map(|k| dist.probability(k, j) * w[k])
            .sum();
        let out: f64 = (0..d)
            .filter(|&k| k != j)
            .map(|k| dist.probability(j, k))
            .sum();
        worst = worst.max((inflow - out * w[j]).abs());
    }
    worst
}

pub fn detailed_balance_check(
    dist: &CouplerDistribution,
    energies: &[f64],
    beta: Beta,
) -> (bool, f64) {
    let r = detailed_balance_residual(dist, energies, beta);
    (r < 1e-10, r)
}

/// Explicit-Euler integration of `dP_j/dt = sum_k (v_(k,j) P_k - v_(j,k) P_j)`.
pub fn evolve_rate_equations(
    dist: &CouplerDistribution,
    initial: &[f64],
    dt: f64,
    steps: usize,
) -> Vec<f64> {
    let rates = dist.rate_matrix();
    let d = dist.d_c();
    let mut p = initial.to_vec();
    for _ in 0..steps {
        let dp: Vec<f64> = (0..d)
            .map(|k| (0..d).map(|j| rates[k][j] * p[j]).sum::<f64>())
            .collect();
        for k in 0..d {
            p[k] += dt * dp[k];
        }
    }
    p
}

pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// Lowering couplers `|E_low><E_high|` keyed by `(high, low)` and their
/// ledger frequencies.
#[derive(Debug, Clone, Default)]
pub struct PairCouplers {
    pub couplers: BTreeMap<(usize, usize), Coupler>,
    pub frequencies: BTreeMap<(usize, usize), Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StochStepRecord {
    pub pair: (usize, usize),
    /// Fridge level the step started from.
    pub fridge_start: usize,
    pub omegas: Vec<f64>,
    pub skipped: bool,
}

/// Samples `(l, m)` from `dist`, prepares the fridge in `|0>` when `l > m`
/// (cooling) and `|1>` when `l < m` (heating), and runs the pair's lowering
/// coupler at every ledger frequency. Pairs without ledger entries are
/// skipped and reported.
pub fn stoch_therm_step<R: Rng + ?Sized>(
    rho_s: &QuantumState,
    h_s: &CMatrix,
    pairs: &PairCouplers,
    dist: &CouplerDistribution,
    rng: &mut R,
    cooling: &CoolingParams,
    mut after_step: impl FnMut(QuantumState) -> Result<QuantumState>,
) -> Result<(QuantumState, StochStepRecord)> {
    let (l, m) = dist.sample(rng);
    let key = (l.max(m), l.min(m));
    let fridge_start = if l > m { 0 } else { 1 };
    let rho_f = if l > m {
        fridge_ground()
    } else {
        fridge_excited()
    };
    let (coupler, omegas) = match (pairs.couplers.get(&key), pairs.frequencies.get(&key)) {
        (Some(c), Some(w)) if !w.is_empty() => (c, w.clone()),
        _ => {
            return Ok((
                rho_s.clone(),
                StochStepRecord {
                    pair: (l, m),
                    fridge_start,
                    omegas: Vec::new(),
                    skipped: true,
                },
            ))
        }
    };
    let mut state = rho_s.clone();
    for &w in &omegas {
        let r = cooling_step(&state, &rho_f, h_s, coupler, w, cooling)?;
        state = after_step(r.rho_s_after)?;
    }
    Ok((
        state,
        StochStepRecord {
            pair: (l, m),
            fridge_start,
            omegas,
            skipped: false,
        },
    ))
}
