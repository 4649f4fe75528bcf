//! Controlled downward scan of the fridge gap with an occupation-dependent
//! step size, and the resonance ledger it produces.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::cooling::{cooling_step, fridge_ground, CoolingParams};
use crate::couplers::Coupler;
use crate::error::{Error, Result};
use crate::lattice::FockSum;
use crate::quantum::{fidelity, CMatrix, QuantumState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlParams {
    /// Overall step scale; `None` means `0.05 * omega_0`.
    #[serde(default)]
    pub x1: Option<f64>,
    #[serde(default = "default_x2")]
    pub x2: f64,
    #[serde(default = "default_x3")]
    pub x3: f64,
    /// Initial overshoot, `omega_0 = (1 + delta) * spread`.
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Stop frequency; `None` means the exact first gap from the oracle.
    #[serde(default)]
    pub omega_min: Option<f64>,
    #[serde(default = "default_ef_floor")]
    pub ef_floor: f64,
    /// Peaks below this fraction of a trace's maximum are not resonances.
    #[serde(default = "default_rel_threshold")]
    pub rel_threshold: f64,
    /// Peaks below this absolute occupation are not resonances.
    #[serde(default = "default_abs_threshold")]
    pub abs_threshold: f64,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
}

fn default_x2() -> f64 {
    -10.0
}
fn default_x3() -> f64 {
    0.5
}
fn default_delta() -> f64 {
    0.1
}
fn default_ef_floor() -> f64 {
    1e-12
}
fn default_rel_threshold() -> f64 {
    0.2
}
fn default_abs_threshold() -> f64 {
    1e-3
}
fn default_max_steps() -> usize {
    1_000_000
}

pub const DEFAULT_X1_FRACTION: f64 = 0.05;

impl Default for ControlParams {
    fn default() -> Self {
        ControlParams {
            x1: None,
            x2: default_x2(),
            x3: default_x3(),
            delta: default_delta(),
            omega_min: None,
            ef_floor: default_ef_floor(),
            rel_threshold: default_rel_threshold(),
            abs_threshold: default_abs_threshold(),
            max_steps: default_max_steps(),
        }
    }
}

impl ControlParams {
    pub fn validate(&self) -> Result<()> {
        if let Some(x1) = self.x1 {
            if !(x1 > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "x1 must be positive, got {x1}"
                )));
            }
        }
        if !(self.delta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "delta must be positive, got {}",
                self.delta
            )));
        }
        if !(self.ef_floor > 0.0 && self.ef_floor < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "ef_floor must lie in (0, 1), got {}",
                self.ef_floor
            )));
        }
        if !self.x2.is_finite() || !self.x3.is_finite() {
            return Err(Error::InvalidParameter("x2 and x3 must be finite".into()));
        }
        // the denominator (1 - log10 E) + x3 ranges over [1 + x3, 1 - log10(ef_floor) + x3]
        if 1.0 + self.x3 <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "x3 = {} makes the control singular",
                self.x3
            )));
        }
        if let Some(m) = self.omega_min {
            if !(m >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "omega_min must be non-negative, got {m}"
                )));
            }
        }
        Ok(())
    }

    pub fn x1_for(&self, omega0: f64) -> f64 {
        self.x1.unwrap_or(DEFAULT_X1_FRACTION * omega0)
    }
}

/// `x1 * exp(x2 / ((1 - log10 E) + x3))` with `E` clamped to `[ef_floor, 1]`.
pub fn control_function(occupation: f64, x1: f64, params: &ControlParams) -> f64 {
    let e = if occupation.is_nan() {
        params.ef_floor
    } else {
        occupation.clamp(params.ef_floor, 1.0)
    };
    x1 * (params.x2 / ((1.0 - e.log10()) + params.x3)).exp()
}

/// `(1 + delta) * spread` from an exact spectrum.
pub fn initial_omega_exact(energies: &[f64], delta: f64) -> f64 {
    let lo = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (1.0 + delta) * (hi - lo)
}

/// `(1 + delta) * 2 * sum |c|`, an upper bound on the spread of any
/// restriction of `h` (each ladder product has operator norm at most one).
pub fn initial_omega_norm_bound(h: &FockSum, delta: f64) -> f64 {
    let non_identity: f64 = h
        .terms
        .iter()
        .filter(|t| !t.factors.is_empty())
        .map(|t| t.coefficient.norm())
        .sum();
    (1.0 + delta) * 2.0 * non_identity
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub omega: f64,
    /// Change of the fridge excitation over the step; the final occupation
    /// when the fridge starts in `|0>`.
    pub fridge_occupation: f64,
    /// `NaN` when no reference ground state was supplied.
    pub fidelity_to_ground: f64,
    pub system_energy: f64,
    /// System energy removed by this cooling step, before any post-step channel.
    pub energy_drop: f64,
    /// Step taken after this point.
    pub step: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScanTrace {
    /// Coupler label -> points in scan order.
    pub traces: BTreeMap<String, Vec<ScanPoint>>,
}

impl ScanTrace {
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "omega,coupler_id,fridge_occupation,infidelity,energy")?;
        // rows in scan order: interleave couplers by point index
        let n = self.traces.values().map(Vec::len).max().unwrap_or(0);
        for i in 0..n {
            for (label, pts) in &self.traces {
                if let Some(p) = pts.get(i) {
                    writeln!(
                        out,
                        "{:.12e},{},{:.12e},{:.12e},{:.12e}",
                        p.omega,
                        label,
                        p.fridge_occupation,
                        1.0 - p.fidelity_to_ground,
                        p.system_energy
                    )?;
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ResonanceLedger {
    /// Coupler label -> ascending resonance frequencies.
    pub resonances: BTreeMap<String, Vec<f64>>,
}

impl ResonanceLedger {
    pub fn is_empty(&self) -> bool {
        self.resonances.values().all(Vec::is_empty)
    }

    pub fn total(&self) -> usize {
        self.resonances.values().map(Vec::len).sum()
    }

    pub fn frequencies(&self, label: &str) -> &[f64] {
        self.resonances.get(label).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn prune_empty(&mut self) {
        self.resonances.retain(|_, v| !v.is_empty());
    }
}

/// A detected peak and the scan step size at which it was seen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resonance {
    pub omega: f64,
    pub occupation: f64,
    pub local_step: f64,
    /// `energy_drop / occupation` at the peak: the gap actually transferred.
    pub transferred_gap: f64,
}

/// Local maxima of the occupation above `rel_threshold * max` and
/// `abs_threshold`; flat tops report their midpoint.
pub fn detect_resonances(
    points: &[ScanPoint],
    rel_threshold: f64,
    abs_threshold: f64,
) -> Vec<Resonance> {
    let max = points
        .iter()
        .map(|p| p.fridge_occupation)
        .fold(0.0f64, f64::max);
    if !(max > 0.0) {
        return Vec::new();
    }
    let cut = (rel_threshold * max).max(abs_threshold);
    let occ: Vec<f64> = points.iter().map(|p| p.fridge_occupation).collect();
    let n = occ.len();
    let mut out = Vec::new();
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && occ[j + 1] == occ[i] {
            j += 1;
        }
        let left_lower = i == 0 || occ[i - 1] < occ[i];
        let right_lower = j + 1 == n || occ[j + 1] < occ[i];
        if left_lower && right_lower && occ[i] >= cut {
            let mid = (i + j) / 2;
            let omega = if (j - i) % 2 == 0 {
                points[mid].omega
            } else {
                0.5 * (points[mid].omega + points[mid + 1].omega)
            };
            let local_step = points[i..=j]
                .iter()
                .chain(i.checked_sub(1).map(|k| &points[k]))
                .map(|p| p.step)
                .fold(0.0f64, f64::max);
            out.push(Resonance {
                omega,
                occupation: occ[i],
                local_step,
                transferred_gap: points[mid].energy_drop / occ[i],
            });
        }
        i = j + 1;
    }
    out
}

/// Fridge preparation and post-step processing used by [`scan`].
pub struct ScanHooks<'a> {
    /// Fridge state for global step `n` at frequency `omega`.
    pub reset: Box<dyn FnMut(u64, f64) -> Result<CMatrix> + 'a>,
    /// Applied to the system state after every cooling step (noise channels).
    pub after_step: Option<Box<dyn FnMut(QuantumState) -> Result<QuantumState> + 'a>>,
}

impl Default for ScanHooks<'_> {
    fn default() -> Self {
        ScanHooks {
            reset: Box::new(|_, _| Ok(fridge_ground())),
            after_step: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRange {
    pub omega0: f64,
    pub omega_min: f64,
}

#[derive(Debug, Clone)]
pub struct ScanOutput {
    pub state: QuantumState,
    pub ledger: ResonanceLedger,
    pub trace: ScanTrace,
    /// Detected peaks with their local step sizes, per coupler label.
    pub peaks: BTreeMap<String, Vec<Resonance>>,
    pub n_omegas: usize,
    pub n_cooling_steps: u64,
}

/// Sweeps `omega` from `range.omega0` down to `range.omega_min`; at each
/// frequency every coupler runs one cooling step in order, and the next
/// frequency is `omega - f(max occupation)`.
#[allow(clippy::too_many_arguments)]
pub fn scan(
    rho_s: &QuantumState,
    h_s: &CMatrix,
    couplers: &[Coupler],
    range: ScanRange,
    params: &ControlParams,
    cooling: &CoolingParams,
    ground: Option<&QuantumState>,
    hooks: &mut ScanHooks<'_>,
) -> Result<ScanOutput> {
    params.validate()?;
    cooling.validate()?;
    if !(range.omega0 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "omega_0 must be positive, got {}",
            range.omega0
        )));
    }
    let x1 = params.x1_for(range.omega0);
    let mut state = rho_s.clone();
    let mut trace = ScanTrace::default();
    for c in couplers {
        trace.traces.entry(c.label()).or_default();
    }
    let mut omega = range.omega0;
    let mut n_omegas = 0usize;
    let mut global = 0u64;
    while omega >= range.omega_min && omega > 0.0 {
        if n_omegas >= params.max_steps {
            return Err(Error::ScanAborted(format!(
                "no termination after {} frequencies (omega = {omega})",
                params.max_steps
            )));
        }
        let mut max_occ = 0.0f64;
        let mut points = Vec::with_capacity(couplers.len());
        for c in couplers {
            let rho_f = (hooks.reset)(global, omega)?;
            let occ_before = rho_f[(1, 1)].re;
            let before = state.expectation(h_s);
            let r = cooling_step(&state, &rho_f, h_s, c, omega, cooling)?;
            // excitation moved into or out of the fridge
            let signal = (r.fridge_occupation - occ_before).abs();
            let drop = before - r.rho_s_after.expectation(h_s);
            global += 1;
            state = match hooks.after_step.as_mut() {
                Some(f) => f(r.rho_s_after)?,
                None => r.rho_s_after,
            };
            max_occ = max_occ.max(signal);
            let fid = match ground {
                Some(g) => fidelity(&state, g)?,
                None => f64::NAN,
            };
            points.push((c.label(), signal, fid, state.expectation(h_s), drop));
        }
        let step = control_function(max_occ, x1, params);
        if !(step > 0.0) || omega - step == omega {
            return Err(Error::ScanAborted(format!(
                "step underflow at omega = {omega} (step {step})"
            )));
        }
        for (label, occ, fid, energy, drop) in points {
            trace
                .traces
                .get_mut(&label)
                .expect("label registered")
                .push(ScanPoint {
                    omega,
                    fridge_occupation: occ,
                    fidelity_to_ground: fid,
                    system_energy: energy,
                    energy_drop: drop,
                    step,
                });
        }
        omega -= step;
        n_omegas += 1;
    }
    let mut ledger = ResonanceLedger::default();
    let mut peaks = BTreeMap::new();
    for (label, pts) in &trace.traces {
        let found = detect_resonances(pts, params.rel_threshold, params.abs_threshold);
        let mut freqs: Vec<f64> = found.iter().map(|r| r.omega).collect();
        freqs.sort_by(f64::total_cmp);
        ledger.resonances.insert(label.clone(), freqs);
        peaks.insert(label.clone(), found);
    }
    Ok(ScanOutput {
        state,
        ledger,
        trace,
        peaks,
        n_omegas,
        n_cooling_steps: global,
    })
}

/// Nearest-gap matching: `(detected, closest true gap)` per detected
/// frequency.
pub fn match_to_gaps(detected: &[f64], gaps: &[f64]) -> Vec<(f64, f64)> {
    detected
        .iter()
        .map(|&w| {
            let best = gaps
                .iter()
                .copied()
                .min_by(|a, b| (a - w).abs().total_cmp(&(b - w).abs()))
                .unwrap_or(f64::NAN);
            (w, best)
        })
        .collect()
}
