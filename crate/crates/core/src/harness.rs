//! Experiment configuration, deterministic pipelines and data emission.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cooling::{cooling_step, fridge_ground, CoolingParams, StepRecord};
use crate::couplers::{
    coulomb_couplers, free_couplers, free_transition, ideal_coupler, ideal_couplers,
    symmetry_couplers, Coupler, CouplerFamily, FreeEigenbasis, GroundChoice,
};
use crate::error::{Error, Result};
use crate::lattice::{
    build_coulomb, build_free, build_hubbard, fock_matrix, LatticeSpec, SectorSpec,
};
use crate::noise::{depolarize, NoiseSpec};
use crate::pauli::{coefficient_spread, decompose_pauli, write_decomposition_csv};
use crate::quantum::{
    eigh, fidelity, gibbs_populations, gibbs_state, BasisTag, Beta, CMatrix, CVector, QuantumState,
    Space, Spectrum,
};
use crate::spectroscopy::{
    detect_resonances, initial_omega_exact, match_to_gaps, scan, ControlParams, ResonanceLedger,
    ScanHooks, ScanOutput, ScanRange,
};
use crate::sweep::{minimal_gap, path_constant, pseudo_sweep_with, slow_sweep, SweepSpec};
use crate::thermal::{
    build_coupler_distribution, probabilistic_reset, stoch_therm_step, PairCouplers, ThermalParams,
};

/// Largest sector the oracle diagonalizes.
pub const ORACLE_DIM_BUDGET: usize = 4096;

/// Easy-to-prepare state the pipelines start from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum StartState {
    /// A ground state of the `t = 0` model: the `index`-th sector basis
    /// state without double occupancy.
    Coulomb { index: usize },
    /// The free (`U = 0`) ground state used by the free couplers.
    Slater,
    /// A sector basis state.
    Basis { index: usize },
    /// `cos θ |D_a> + sin θ |D_b>` inside the free ground manifold, with `θ`
    /// chosen so the fidelity to the exact ground state equals `fidelity`.
    /// `D_a` is the determinant with the largest ground overlap and `D_b` one
    /// with none.
    FreeGroundMix { fidelity: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub start: StartState,
    /// Pseudo-sweep duration; `0` disables the sweep.
    #[serde(default)]
    pub t_ps: f64,
    #[serde(default = "default_n_trotter")]
    pub n_trotter: usize,
}

fn default_n_trotter() -> usize {
    5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub lattice: LatticeSpec,
    pub sector: SectorSpec,
    #[serde(default = "default_family")]
    pub coupler_family: CouplerFamily,
    /// Number of lowest levels in the cooled subspace.
    pub d_c: usize,
    #[serde(default)]
    pub cooling: CoolingParams,
    #[serde(default)]
    pub control: ControlParams,
    pub sweep: SweepConfig,
    #[serde(default)]
    pub thermal: Option<ThermalParams>,
    #[serde(default)]
    pub noise: Option<NoiseSpec>,
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default)]
    pub output_dir: Option<String>,
}

fn default_family() -> CouplerFamily {
    CouplerFamily::Free
}

impl ExperimentConfig {
    /// 2x2 lattice, `t = 1`, `U = 2`, half filling, all 35 free couplers,
    /// starting from the first sector basis state.
    pub fn flagship() -> Self {
        ExperimentConfig {
            lattice: LatticeSpec::new(2, 2, 1.0, 2.0),
            sector: SectorSpec::new(2, 2),
            coupler_family: CouplerFamily::Free,
            d_c: 36,
            cooling: CoolingParams::default(),
            control: ControlParams::default(),
            sweep: SweepConfig {
                start: StartState::Basis { index: 0 },
                t_ps: 0.0,
                n_trotter: 5,
            },
            thermal: None,
            noise: None,
            rng_seed: 0,
            output_dir: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.lattice.validate()?;
        self.cooling.validate()?;
        self.control.validate()?;
        if self.d_c < 2 {
            return Err(Error::Config("d_c must be at least 2".into()));
        }
        if !(self.sweep.t_ps >= 0.0) || !self.sweep.t_ps.is_finite() {
            return Err(Error::Config(format!(
                "t_ps must be non-negative, got {}",
                self.sweep.t_ps
            )));
        }
        if self.sweep.n_trotter == 0 {
            return Err(Error::Config("n_trotter must be positive".into()));
        }
        if let StartState::FreeGroundMix { fidelity } = self.sweep.start {
            if !(fidelity > 0.0 && fidelity <= 1.0) {
                return Err(Error::Config(format!(
                    "start fidelity must lie in (0, 1], got {fidelity}"
                )));
            }
        }
        if let Some(t) = &self.thermal {
            t.validate()?;
        }
        if let Some(n) = &self.noise {
            n.validate()?;
        }
        Ok(())
    }

    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// SHA-256 over `config <len>\0<canonical json>`.
    pub fn content_hash(&self) -> String {
        content_hash("config", self.canonical_json().as_bytes())
    }
}

pub fn content_hash(kind: &str, body: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("{kind} {}\0", body.len()).as_bytes());
    h.update(body);
    hex::encode(h.finalize())
}

/// Role of a random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    FridgeReset = 1,
    PairSample = 2,
    Shots = 3,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent generator for `(seed, step, purpose)`, so each draw depends
/// only on its key and not on how many draws came before.
pub fn keyed_rng(seed: u64, step: u64, purpose: Purpose) -> ChaCha8Rng {
    let mut state = splitmix64(seed ^ splitmix64(step ^ splitmix64(purpose as u64)));
    let mut key = [0u8; 32];
    for chunk in key.chunks_mut(8) {
        state = splitmix64(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Everything derived from the lattice part of a config.
pub struct Problem {
    pub spec: LatticeSpec,
    pub sector: SectorSpec,
    pub tag: BasisTag,
    pub free: FreeEigenbasis,
    pub h: CMatrix,
    pub exact: Spectrum,
    /// Uniform mixture over a degenerate ground manifold, else pure.
    pub ground: QuantumState,
}

impl Problem {
    pub fn new(spec: &LatticeSpec, sector: SectorSpec) -> Result<Self> {
        let free = FreeEigenbasis::new(spec, sector, GroundChoice::default())?;
        let h = fock_matrix(&build_hubbard(spec), &free.basis)?;
        let exact = eigh(&h)?;
        let tag = BasisTag::new(Space::Sector {
            n_sites: spec.n_sites(),
            sector,
        });
        let ground = if exact.ground_degeneracy() > 1 {
            let g = exact.ground_degeneracy() as f64;
            QuantumState::density(exact.ground_projector() * Complex64::new(1.0 / g, 0.0), tag)?
        } else {
            QuantumState::pure(exact.vector(0), tag)?
        };
        Ok(Problem {
            spec: *spec,
            sector,
            tag,
            free,
            h,
            exact,
            ground,
        })
    }

    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self> {
        let dim = crate::lattice::binomial(cfg.lattice.n_sites(), cfg.sector.n_up)
            * crate::lattice::binomial(cfg.lattice.n_sites(), cfg.sector.n_down);
        if dim > ORACLE_DIM_BUDGET {
            return Err(Error::DimensionBudget {
                dim,
                budget: ORACLE_DIM_BUDGET,
            });
        }
        Self::new(&cfg.lattice, cfg.sector)
    }

    pub fn dim(&self) -> usize {
        self.h.nrows()
    }

    pub fn gaps(&self) -> Vec<f64> {
        let e0 = self.exact.eigenvalues[0];
        self.exact.eigenvalues.iter().map(|e| e - e0).collect()
    }

    /// Hamiltonian the sweep starts from for `start`.
    pub fn easy_hamiltonian(&self, start: StartState) -> Result<CMatrix> {
        match start {
            StartState::Coulomb { .. } => fock_matrix(&build_coulomb(&self.spec), &self.free.basis),
            _ => fock_matrix(&build_free(&self.spec), &self.free.basis),
        }
    }

    pub fn start_state(&self, start: StartState) -> Result<QuantumState> {
        match start {
            StartState::Coulomb { index } => {
                let hc = self.easy_hamiltonian(start)?;
                let lowest = (0..self.dim())
                    .map(|k| hc[(k, k)].re)
                    .fold(f64::INFINITY, f64::min);
                let ground: Vec<usize> = (0..self.dim())
                    .filter(|&k| hc[(k, k)].re - lowest < 1e-12)
                    .collect();
                let k = *ground.get(index).ok_or_else(|| {
                    Error::Config(format!(
                        "Coulomb ground index {index} outside 0..{}",
                        ground.len()
                    ))
                })?;
                QuantumState::basis_state(k, self.tag)
            }
            StartState::Slater => QuantumState::pure(self.free.ground().clone(), self.tag),
            StartState::Basis { index } => {
                QuantumState::basis_state(index, self.tag).map_err(|_| {
                    Error::Config(format!(
                        "basis index {index} outside sector of dimension {}",
                        self.dim()
                    ))
                })
            }
            StartState::FreeGroundMix { fidelity } => self.free_ground_mix(fidelity),
        }
    }

    fn free_ground_mix(&self, target: f64) -> Result<QuantumState> {
        let g = self.exact.vector(0);
        let mut dets = Vec::new();
        let mut index = 0;
        while let Ok(f) =
            FreeEigenbasis::new(&self.spec, self.sector, GroundChoice::Determinant { index })
        {
            dets.push(f.ground().clone());
            index += 1;
        }
        let overlap = |v: &CVector| g.dotc(v).norm_sqr();
        let best = (0..dets.len())
            .max_by(|&a, &b| overlap(&dets[a]).total_cmp(&overlap(&dets[b])))
            .ok_or_else(|| Error::Config("no free ground determinant".into()))?;
        let top = overlap(&dets[best]);
        if target > top + 1e-12 {
            return Err(Error::Config(format!(
                "start fidelity {target} exceeds the best free determinant overlap {top}"
            )));
        }
        let cos2 = (target / top).min(1.0);
        let psi = match (0..dets.len()).find(|&k| overlap(&dets[k]) < 1e-20) {
            Some(zero) => {
                &dets[best] * Complex64::new(cos2.sqrt(), 0.0)
                    + &dets[zero] * Complex64::new((1.0 - cos2).sqrt(), 0.0)
            }
            None if cos2 > 1.0 - 1e-12 => dets[best].clone(),
            None => {
                return Err(Error::Config(
                    "free ground manifold has no determinant orthogonal to the ground state".into(),
                ))
            }
        };
        QuantumState::pure_normalized(psi, self.tag)
    }

    pub fn couplers(&self, family: CouplerFamily, d_c: usize) -> Result<Vec<Coupler>> {
        match family {
            CouplerFamily::Free => free_couplers(&self.free, d_c),
            CouplerFamily::Ideal => ideal_couplers(&self.exact, d_c),
            CouplerFamily::Symmetry => symmetry_couplers(&self.spec, self.sector),
            CouplerFamily::Coulomb => coulomb_couplers(&self.spec, self.sector),
        }
    }

    /// Lowering coupler `|E_low><E_high|` for every pair inside the lowest
    /// `d_c` levels.
    pub fn pair_couplers(
        &self,
        family: CouplerFamily,
        d_c: usize,
    ) -> Result<BTreeMap<(usize, usize), Coupler>> {
        let mut out = BTreeMap::new();
        for high in 1..d_c {
            for low in 0..high {
                let c = match family {
                    CouplerFamily::Ideal => ideal_coupler(&self.exact, high, low)?,
                    CouplerFamily::Free => free_transition(&self.free, high, low)?,
                    other => {
                        return Err(Error::Config(format!(
                            "pair couplers need the free or ideal family, got {other:?}"
                        )))
                    }
                };
                out.insert((high, low), c);
            }
        }
        Ok(out)
    }

    /// Scan window for the lowest `d_c` levels.
    pub fn scan_range(&self, d_c: usize, control: &ControlParams) -> ScanRange {
        let e = &self.exact.eigenvalues;
        let d = d_c.min(e.len());
        let omega0 = initial_omega_exact(&e[..d], control.delta);
        let smallest = e[..d]
            .windows(2)
            .map(|w| w[1] - e[0])
            .find(|g| *g > 1e-9)
            .unwrap_or(omega0);
        ScanRange {
            omega0,
            omega_min: control.omega_min.unwrap_or(smallest),
        }
    }

    /// Eigenbasis populations of `rho`.
    pub fn level_populations(&self, rho: &QuantumState) -> Vec<f64> {
        let m = rho.to_density_matrix();
        let v = &self.exact.eigenvectors;
        let d = v.adjoint() * m * v;
        (0..d.nrows()).map(|k| d[(k, k)].re).collect()
    }
}

fn noise_channel(noise: Option<NoiseSpec>) -> impl FnMut(QuantumState) -> Result<QuantumState> {
    move |s| match &noise {
        Some(n) if n.lambda > 0.0 => depolarize(&s, n),
        _ => Ok(s),
    }
}

/// Start state, followed by the pseudo-sweep when `t_ps > 0`.
pub fn prepare(cfg: &ExperimentConfig, p: &Problem) -> Result<QuantumState> {
    let psi = p.start_state(cfg.sweep.start)?;
    if cfg.sweep.t_ps <= 0.0 {
        return Ok(psi.into_density());
    }
    let spec = SweepSpec::new(
        p.easy_hamiltonian(cfg.sweep.start)?,
        p.h.clone(),
        cfg.sweep.t_ps,
        cfg.sweep.n_trotter,
    )?;
    Ok(pseudo_sweep_with(&psi, &spec, noise_channel(cfg.noise))?.into_density())
}

/// One row of a thermalization trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermRow {
    pub step: usize,
    pub sampled_pair: (usize, usize),
    pub omega_used: Vec<f64>,
    pub skipped: bool,
    pub fidelity_to_gibbs: f64,
    pub energy: f64,
    /// `ln(P_0 / P_1) / (E_1 - E_0)` from the two lowest populations.
    pub beta_effective_estimate: Option<f64>,
}

pub const THERM_CSV_HEADER: &str =
    "step,sampled_pair,omega_used,fidelity_to_gibbs,energy,beta_effective_estimate";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub kind: String,
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub metrics: BTreeMap<String, f64>,
    pub ledger: ResonanceLedger,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<StepRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub thermal_trace: Vec<ThermRow>,
}

impl RunRecord {
    fn new(kind: &str, cfg: &ExperimentConfig) -> Self {
        RunRecord {
            kind: kind.into(),
            config: cfg.clone(),
            config_hash: cfg.content_hash(),
            metrics: BTreeMap::new(),
            ledger: ResonanceLedger::default(),
            trace: Vec::new(),
            thermal_trace: Vec::new(),
        }
    }

    fn metric(&mut self, name: &str, value: f64) {
        if value.is_finite() {
            self.metrics.insert(name.into(), value);
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("record serializes")
    }

    /// Hash of the serialized record.
    pub fn record_hash(&self) -> String {
        content_hash("record", self.to_json().as_bytes())
    }

    pub fn write_trace_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        crate::cooling::write_step_csv(out, &self.trace)
    }

    pub fn write_thermal_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "{THERM_CSV_HEADER}")?;
        for r in &self.thermal_trace {
            let omegas: Vec<String> = r.omega_used.iter().map(|w| format!("{w:.9e}")).collect();
            writeln!(
                out,
                "{},{}-{},{},{:.12e},{:.12e},{}",
                r.step,
                r.sampled_pair.0,
                r.sampled_pair.1,
                omegas.join(";"),
                r.fidelity_to_gibbs,
                r.energy,
                r.beta_effective_estimate
                    .map(|b| format!("{b:.12e}"))
                    .unwrap_or_default()
            )?;
        }
        Ok(())
    }
}

fn scan_with_noise(
    cfg: &ExperimentConfig,
    p: &Problem,
    rho: &QuantumState,
    couplers: &[Coupler],
    range: ScanRange,
) -> Result<ScanOutput> {
    let mut hooks = ScanHooks::default();
    if cfg.noise.is_some_and(|n| n.lambda > 0.0) {
        hooks.after_step = Some(Box::new(noise_channel(cfg.noise)));
    }
    scan(
        rho,
        &p.h,
        couplers,
        range,
        &cfg.control,
        &cfg.cooling,
        Some(&p.ground),
        &mut hooks,
    )
}

/// Spectroscopy over the configured couplers from the prepared state.
pub fn run_scan(cfg: &ExperimentConfig) -> Result<(RunRecord, ScanOutput)> {
    cfg.validate()?;
    let p = Problem::from_config(cfg)?;
    let couplers = p.couplers(cfg.coupler_family, cfg.d_c)?;
    let rho = prepare(cfg, &p)?;
    let out = scan_with_noise(
        cfg,
        &p,
        &rho,
        &couplers,
        p.scan_range(cfg.d_c, &cfg.control),
    )?;
    let mut rec = RunRecord::new("scan", cfg);
    rec.metric("initial_fidelity", fidelity(&rho, &p.ground)?);
    rec.metric("final_fidelity", fidelity(&out.state, &p.ground)?);
    rec.metric("final_energy", out.state.expectation(&p.h));
    rec.metric("n_omegas", out.n_omegas as f64);
    rec.metric("n_cooling_steps", out.n_cooling_steps as f64);
    rec.ledger = out.ledger.clone();
    Ok((rec, out))
}

/// Pseudo-sweep, spectroscopy to build the ledger, a fresh pseudo-sweep, then
/// one cooling step per ledger entry in descending frequency.
pub fn run_subspace_cooling(cfg: &ExperimentConfig) -> Result<RunRecord> {
    cfg.validate()?;
    let p = Problem::from_config(cfg)?;
    let couplers = p.couplers(cfg.coupler_family, cfg.d_c)?;
    let rho = prepare(cfg, &p)?;
    let out = scan_with_noise(
        cfg,
        &p,
        &rho,
        &couplers,
        p.scan_range(cfg.d_c, &cfg.control),
    )?;

    let mut schedule: Vec<(f64, usize)> = Vec::new();
    for (k, c) in couplers.iter().enumerate() {
        for &w in out.ledger.frequencies(&c.label()) {
            schedule.push((w, k));
        }
    }
    schedule.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));

    let mut state = prepare(cfg, &p)?;
    let mut noise = noise_channel(cfg.noise);
    let mut trace = Vec::with_capacity(schedule.len());
    for (i, &(w, k)) in schedule.iter().enumerate() {
        let r = cooling_step(
            &state,
            &fridge_ground(),
            &p.h,
            &couplers[k],
            w,
            &cfg.cooling,
        )?;
        state = noise(r.rho_s_after)?;
        trace.push(StepRecord {
            step_index: i,
            coupler_id: couplers[k].label(),
            omega: w,
            alpha: r.alpha,
            t: r.time,
            fridge_occupation: r.fridge_occupation,
            system_energy: state.expectation(&p.h),
            fidelity_to_target: fidelity(&state, &p.ground)?,
        });
    }

    let mut rec = RunRecord::new("subspace_cooling", cfg);
    rec.metric("prepared_fidelity", fidelity(&rho, &p.ground)?);
    rec.metric("prepared_energy", rho.expectation(&p.h));
    rec.metric("scan_fidelity", fidelity(&out.state, &p.ground)?);
    rec.metric("scan_energy", out.state.expectation(&p.h));
    rec.metric("scan_cooling_steps", out.n_cooling_steps as f64);
    rec.metric("final_fidelity", fidelity(&state, &p.ground)?);
    rec.metric("final_energy", state.expectation(&p.h));
    rec.metric("final_trace", state.trace());
    rec.metric("targeted_steps", schedule.len() as f64);
    rec.ledger = out.ledger;
    rec.trace = trace;
    Ok(rec)
}

/// Pseudo-sweep, spectroscopy with probabilistic resets over all pairs of
/// the lowest `d_c` levels, a fresh pseudo-sweep, then `n_steps` stochastic
/// thermalization steps.
pub fn run_thermalization(cfg: &ExperimentConfig) -> Result<RunRecord> {
    cfg.validate()?;
    let thermal = cfg
        .thermal
        .ok_or_else(|| Error::Config("thermalization needs a `thermal` block".into()))?;
    let p = Problem::from_config(cfg)?;
    let beta = thermal.beta;
    let target = QuantumState::density(gibbs_state(&p.exact, beta), p.tag)?;
    let pairs = p.pair_couplers(cfg.coupler_family, cfg.d_c)?;
    let coupler_list: Vec<Coupler> = pairs.values().cloned().collect();

    let rho = prepare(cfg, &p)?;
    let seed = cfg.rng_seed;
    let mut hooks = ScanHooks {
        reset: Box::new(move |n, omega| {
            Ok(probabilistic_reset(
                beta,
                omega,
                &mut keyed_rng(seed, n, Purpose::FridgeReset),
            ))
        }),
        after_step: None,
    };
    if cfg.noise.is_some_and(|n| n.lambda > 0.0) {
        hooks.after_step = Some(Box::new(noise_channel(cfg.noise)));
    }
    let range = p.scan_range(cfg.d_c, &cfg.control);
    let out = scan(
        &rho,
        &p.h,
        &coupler_list,
        range,
        &cfg.control,
        &cfg.cooling,
        Some(&p.ground),
        &mut hooks,
    )?;

    let mut pc = PairCouplers::default();
    for (key, c) in pairs {
        let freqs = out.ledger.frequencies(&c.label()).to_vec();
        pc.frequencies.insert(key, freqs);
        pc.couplers.insert(key, c);
    }
    let dist = build_coupler_distribution(&p.exact.eigenvalues, beta, cfg.d_c)?;

    let mut state = prepare(cfg, &p)?;
    let e = &p.exact.eigenvalues;
    let mut rows = Vec::with_capacity(thermal.n_steps);
    let mut skipped = 0usize;
    for step in 0..thermal.n_steps {
        let mut rng = keyed_rng(seed, step as u64, Purpose::PairSample);
        let (next, info) = stoch_therm_step(
            &state,
            &p.h,
            &pc,
            &dist,
            &mut rng,
            &cfg.cooling,
            noise_channel(cfg.noise),
        )?;
        state = next;
        skipped += info.skipped as usize;
        let pops = p.level_populations(&state);
        let beta_est = (pops[0] > 0.0 && pops[1] > 0.0 && e[1] - e[0] > 1e-12)
            .then(|| (pops[0] / pops[1]).ln() / (e[1] - e[0]));
        rows.push(ThermRow {
            step,
            sampled_pair: info.pair,
            omega_used: info.omegas,
            skipped: info.skipped,
            fidelity_to_gibbs: fidelity(&state, &target)?,
            energy: state.expectation(&p.h),
            beta_effective_estimate: beta_est.filter(|b| b.is_finite()),
        });
    }

    let mut rec = RunRecord::new("thermalization", cfg);
    if let Beta::Finite(b) = beta {
        rec.metric("beta", b);
        rec.metric("beta_abs_e0", b * e[0].abs());
    }
    let gibbs = gibbs_populations(e, beta);
    rec.metric(
        "subspace_gibbs_weight",
        gibbs[..cfg.d_c.min(gibbs.len())].iter().sum(),
    );
    rec.metric("prepared_fidelity_to_gibbs", fidelity(&rho, &target)?);
    rec.metric("scan_fidelity_to_gibbs", fidelity(&out.state, &target)?);
    rec.metric("final_fidelity_to_gibbs", fidelity(&state, &target)?);
    rec.metric("final_energy", state.expectation(&p.h));
    rec.metric("gibbs_energy", target.expectation(&p.h));
    rec.metric("skipped_steps", skipped as f64);
    rec.ledger = out.ledger;
    rec.thermal_trace = rows;
    Ok(rec)
}

/// Exact data for one sector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleBundle {
    pub config_hash: String,
    pub dimension: usize,
    pub energies: Vec<f64>,
    /// `E_k - E_0`.
    pub gaps: Vec<f64>,
    pub ground_degeneracy: usize,
    /// Ground vector as `[re, im]` pairs in the sector basis.
    pub ground_state: Vec<[f64; 2]>,
    pub gibbs_populations: Option<Vec<f64>>,
}

pub fn run_oracle(cfg: &ExperimentConfig) -> Result<OracleBundle> {
    let p = Problem::from_config(cfg)?;
    let v = p.exact.vector(0);
    Ok(OracleBundle {
        config_hash: cfg.content_hash(),
        dimension: p.dim(),
        energies: p.exact.eigenvalues.clone(),
        gaps: p.gaps(),
        ground_degeneracy: p.exact.ground_degeneracy(),
        ground_state: v.iter().map(|c| [c.re, c.im]).collect(),
        gibbs_populations: cfg
            .thermal
            .map(|t| gibbs_populations(&p.exact.eigenvalues, t.beta)),
    })
}

pub fn write_oracle(bundle: &OracleBundle, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let json = dir.join("oracle.json");
    fs::write(&json, serde_json::to_string_pretty(bundle)?)?;
    let csv = dir.join("oracle_spectrum.csv");
    let mut f = csv_with_header(&csv, &bundle.config_hash, "oracle", "exact diagonalization")?;
    writeln!(f, "k,energy,gap")?;
    for (k, (e, g)) in bundle.energies.iter().zip(&bundle.gaps).enumerate() {
        writeln!(f, "{k},{e:.15e},{g:.15e}")?;
    }
    Ok(vec![json, csv])
}

/// Opens `path` and writes the `#`-prefixed metadata header.
pub fn csv_with_header(
    path: &Path,
    config_hash: &str,
    experiment: &str,
    source: &str,
) -> Result<fs::File> {
    let mut f = fs::File::create(path)?;
    writeln!(f, "# config_hash={config_hash}")?;
    writeln!(f, "# experiment={experiment}")?;
    writeln!(f, "# source={source}")?;
    Ok(f)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FigureId {
    Fig2,
    Fig3,
    Fig5,
    Fig6,
    Fig7,
    Fig8,
    Fig9,
    Table1,
}

impl std::str::FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "fig2" => FigureId::Fig2,
            "fig3" => FigureId::Fig3,
            "fig5" => FigureId::Fig5,
            "fig6" => FigureId::Fig6,
            "fig7" => FigureId::Fig7,
            "fig8" => FigureId::Fig8,
            "fig9" => FigureId::Fig9,
            "table1" => FigureId::Table1,
            other => return Err(Error::UnknownFigure(other.into())),
        })
    }
}

impl FigureId {
    pub fn name(&self) -> &'static str {
        match self {
            FigureId::Fig2 => "fig2",
            FigureId::Fig3 => "fig3",
            FigureId::Fig5 => "fig5",
            FigureId::Fig6 => "fig6",
            FigureId::Fig7 => "fig7",
            FigureId::Fig8 => "fig8",
            FigureId::Fig9 => "fig9",
            FigureId::Table1 => "table1",
        }
    }

    /// Base config the figure runs from; `base` supplies lattice, cooling
    /// and control settings.
    pub fn config(&self, base: &ExperimentConfig) -> ExperimentConfig {
        let mut c = base.clone();
        match self {
            FigureId::Fig2 | FigureId::Fig9 => {}
            FigureId::Fig3 => c.sweep.start = StartState::Coulomb { index: 0 },
            FigureId::Fig5 => c.sweep.start = StartState::Slater,
            FigureId::Fig6 => {
                c.sweep.start = StartState::Coulomb { index: 0 };
                if c.thermal.is_none() {
                    c.thermal = Some(default_thermal(&c));
                }
            }
            FigureId::Fig7 => {
                c.sweep.start = StartState::Slater;
                c.noise =
                    Some(NoiseSpec::new(1e-4, crate::noise::NoiseScope::FullSpace).expect("valid"));
            }
            FigureId::Fig8 => {
                c.sweep.t_ps = 0.0;
                c.sweep.start = StartState::Slater;
                c.noise =
                    Some(NoiseSpec::new(1e-5, crate::noise::NoiseScope::Sector).expect("valid"));
            }
            FigureId::Table1 => {
                c.sweep.t_ps = 0.0;
                c.sweep.start = StartState::FreeGroundMix {
                    fidelity: TABLE1_START_FIDELITY,
                };
            }
        }
        c
    }
}

/// Initial ground-state fidelity of the single-coupler ranking runs.
pub const TABLE1_START_FIDELITY: f64 = 0.4509;

/// `β = 1 / |E_0|` over the configured sector.
pub fn default_thermal(cfg: &ExperimentConfig) -> ThermalParams {
    let beta = Problem::from_config(cfg)
        .map(|p| Beta::Finite(1.0 / p.exact.eigenvalues[0].abs().max(1e-12)))
        .unwrap_or(Beta::Finite(1.0));
    ThermalParams { beta, n_steps: 40 }
}

/// Subspace sizes scanned by the sweep-versus-baseline figures.
pub const SUBSPACE_SCAN: [usize; 6] = [2, 4, 6, 8, 12, 16];

/// Sweep-versus-no-sweep comparison at one `d_c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubspacePoint {
    pub d_c: usize,
    pub scan_infidelity_sweep: f64,
    pub scan_infidelity_no_sweep: f64,
    pub final_infidelity_sweep: f64,
    pub final_infidelity_no_sweep: f64,
}

/// Runs the subspace pipeline with and without the configured sweep.
pub fn subspace_comparison(
    cfg: &ExperimentConfig,
    d_c: usize,
) -> Result<(RunRecord, RunRecord, SubspacePoint)> {
    let mut with = cfg.clone();
    with.d_c = d_c;
    let mut without = with.clone();
    without.sweep.t_ps = 0.0;
    let a = run_subspace_cooling(&with)?;
    let b = run_subspace_cooling(&without)?;
    let pt = SubspacePoint {
        d_c,
        scan_infidelity_sweep: 1.0 - a.metrics["scan_fidelity"],
        scan_infidelity_no_sweep: 1.0 - b.metrics["scan_fidelity"],
        final_infidelity_sweep: 1.0 - a.metrics["final_fidelity"],
        final_infidelity_no_sweep: 1.0 - b.metrics["final_fidelity"],
    };
    Ok((a, b, pt))
}

/// Infidelity of a slow sweep from the configured start, doubling the sweep
/// time until the fidelity changes by less than `1e-4`.
pub fn slow_sweep_infidelity(cfg: &ExperimentConfig) -> Result<f64> {
    let p = Problem::from_config(cfg)?;
    let psi = p.start_state(cfg.sweep.start)?;
    let t0 = cfg.sweep.t_ps.max(1.0);
    let spec = SweepSpec::new(
        p.easy_hamiltonian(cfg.sweep.start)?,
        p.h.clone(),
        t0,
        (10.0 * t0).ceil() as usize,
    )?;
    let r = slow_sweep(&psi, &spec, &p.ground, 1e-4, 12)?;
    Ok(1.0 - fidelity(&r.state, &p.ground)?)
}

/// Sweep diagnostics: start and pseudo-sweep fidelities, path geometry and
/// the slow-sweep reference.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<RunRecord> {
    let p = Problem::from_config(cfg)?;
    let mut rec = RunRecord::new("sweep", cfg);
    let psi = p.start_state(cfg.sweep.start)?;
    rec.metric("start_fidelity", fidelity(&psi, &p.ground)?);
    let prepared = prepare(cfg, &p)?;
    rec.metric("prepared_fidelity", fidelity(&prepared, &p.ground)?);
    let path = path_summary(cfg, 200)?;
    rec.metric("path_constant", path.path_constant);
    rec.metric("minimal_gap", path.minimal_gap);
    rec.metric("minimal_gap_at", path.minimal_gap_at);
    rec.metric("slow_sweep_infidelity", slow_sweep_infidelity(cfg)?);
    Ok(rec)
}

/// Per-coupler result of a single-coupler spectroscopy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplerRank {
    pub coupler_id: String,
    pub index: usize,
    pub free_energy: f64,
    pub initial_fidelity: f64,
    pub final_fidelity: f64,
    pub improvement: f64,
}

/// Spectroscopy with each coupler alone from the prepared state.
pub fn coupler_ranking(cfg: &ExperimentConfig) -> Result<Vec<CouplerRank>> {
    let p = Problem::from_config(cfg)?;
    let couplers = p.couplers(cfg.coupler_family, cfg.d_c)?;
    let rho = prepare(cfg, &p)?;
    let f0 = fidelity(&rho, &p.ground)?;
    let range = p.scan_range(cfg.d_c, &cfg.control);
    let energies = p.free.energies();
    let mut out = Vec::with_capacity(couplers.len());
    for (k, c) in couplers.iter().enumerate() {
        let r = scan_with_noise(cfg, &p, &rho, std::slice::from_ref(c), range)?;
        let f = fidelity(&r.state, &p.ground)?;
        out.push(CouplerRank {
            coupler_id: c.label(),
            index: k + 1,
            free_energy: energies[k + 1],
            initial_fidelity: f0,
            final_fidelity: f,
            improvement: f - f0,
        });
    }
    Ok(out)
}

/// Emits the data behind one figure into `dir`.
pub fn run_figure(id: FigureId, base: &ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let cfg = id.config(base);
    cfg.validate()?;
    let hash = cfg.content_hash();
    let name = id.name();
    let mut files = Vec::new();
    let open = |file: &str, source: &str| -> Result<(fs::File, PathBuf)> {
        let path = dir.join(format!("{name}_{file}"));
        let f = csv_with_header(&path, &hash, name, source)?;
        Ok((f, path))
    };
    match id {
        FigureId::Fig2 | FigureId::Fig8 => {
            let (rec, out) = run_scan(&cfg)?;
            let (mut f, path) = open("scan.csv", "simulation")?;
            out.trace.write_csv(&mut f)?;
            files.push(path);
            let p = Problem::from_config(&cfg)?;
            let gaps = p.gaps();
            let (mut f, path) = open("gaps.csv", "exact diagonalization")?;
            writeln!(f, "k,gap")?;
            for (k, g) in gaps.iter().enumerate() {
                writeln!(f, "{k},{g:.15e}")?;
            }
            files.push(path);
            let (mut f, path) = open("peaks.csv", "simulation")?;
            writeln!(
                f,
                "coupler_id,omega,occupation,local_step,nearest_gap,error"
            )?;
            for (label, peaks) in &out.peaks {
                for r in peaks {
                    let (_, g) = match_to_gaps(&[r.omega], &gaps)[0];
                    let err = (r.omega - g).abs();
                    writeln!(
                        f,
                        "{label},{:.12e},{:.12e},{:.12e},{g:.12e},{err:.12e}",
                        r.omega, r.occupation, r.local_step
                    )?;
                }
            }
            files.push(path);
            let json = dir.join(format!("{name}_record.json"));
            fs::write(&json, rec.to_json())?;
            files.push(json);
        }
        FigureId::Fig3 | FigureId::Fig5 => {
            let mut with = cfg.clone();
            if with.sweep.t_ps <= 0.0 {
                with.sweep.t_ps = DEFAULT_T_PS;
            }
            let slow = slow_sweep_infidelity(&with).unwrap_or(f64::NAN);
            let (mut f, path) = open("subspace.csv", "simulation")?;
            writeln!(
                f,
                "d_c,scan_infidelity_sweep,scan_infidelity_no_sweep,final_infidelity_sweep,final_infidelity_no_sweep,slow_sweep_infidelity"
            )?;
            let dim = Problem::from_config(&with)?.dim();
            for d_c in SUBSPACE_SCAN.iter().copied().filter(|&d| d <= dim) {
                let (_, _, pt) = subspace_comparison(&with, d_c)?;
                writeln!(
                    f,
                    "{},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
                    pt.d_c,
                    pt.scan_infidelity_sweep,
                    pt.scan_infidelity_no_sweep,
                    pt.final_infidelity_sweep,
                    pt.final_infidelity_no_sweep,
                    slow
                )?;
            }
            files.push(path);
        }
        FigureId::Fig6 => {
            let mut c = cfg.clone();
            if c.sweep.t_ps <= 0.0 {
                c.sweep.t_ps = DEFAULT_T_PS;
            }
            let rec = run_thermalization(&c)?;
            let (mut f, path) = open("thermal.csv", "simulation")?;
            rec.write_thermal_csv(&mut f)?;
            files.push(path);
            let json = dir.join(format!("{name}_record.json"));
            fs::write(&json, rec.to_json())?;
            files.push(json);
        }
        FigureId::Fig7 => {
            let mut with = cfg.clone();
            if with.sweep.t_ps <= 0.0 {
                with.sweep.t_ps = DEFAULT_T_PS;
            }
            let (a, b, pt) = subspace_comparison(&with, with.d_c)?;
            let (mut f, path) = open("noise.csv", "simulation")?;
            writeln!(f, "run,final_fidelity,scan_fidelity")?;
            writeln!(
                f,
                "sweep,{:.12e},{:.12e}",
                1.0 - pt.final_infidelity_sweep,
                1.0 - pt.scan_infidelity_sweep
            )?;
            writeln!(
                f,
                "no_sweep,{:.12e},{:.12e}",
                1.0 - pt.final_infidelity_no_sweep,
                1.0 - pt.scan_infidelity_no_sweep
            )?;
            files.push(path);
            for (rec, tag) in [(&a, "sweep"), (&b, "no_sweep")] {
                let (mut f, path) = open(&format!("trace_{tag}.csv"), "simulation")?;
                rec.write_trace_csv(&mut f)?;
                files.push(path);
            }
        }
        FigureId::Fig9 => {
            let p = Problem::from_config(&cfg)?;
            let couplers = p.couplers(cfg.coupler_family, cfg.d_c)?;
            let mut reports = Vec::new();
            for c in &couplers {
                if let Some(ps) = c.pauli_form() {
                    reports.push((c.label(), decompose_pauli(&ps.pruned())?));
                }
            }
            let (mut f, path) = open("decomposition.csv", "operator algebra")?;
            write_decomposition_csv(&mut f, &reports)?;
            files.push(path);
            let (mut f, path) = open("spread.csv", "operator algebra")?;
            writeln!(f, "coupler_id,n_strings,spread")?;
            for (label, rows) in &reports {
                writeln!(
                    f,
                    "{label},{},{:.12e}",
                    rows.len(),
                    coefficient_spread(rows)
                )?;
            }
            files.push(path);
        }
        FigureId::Table1 => {
            let ranks = coupler_ranking(&cfg)?;
            let (mut f, path) = open("ranking.csv", "simulation")?;
            writeln!(
                f,
                "coupler_id,free_energy,initial_fidelity,final_fidelity,improvement"
            )?;
            for r in &ranks {
                writeln!(
                    f,
                    "{},{:.12e},{:.12e},{:.12e},{:.12e}",
                    r.coupler_id,
                    r.free_energy,
                    r.initial_fidelity,
                    r.final_fidelity,
                    r.improvement
                )?;
            }
            files.push(path);
        }
    }
    Ok(files)
}

/// Pseudo-sweep duration used when a figure needs a sweep and the config has
/// none.
pub const DEFAULT_T_PS: f64 = 1.0;

/// Geometry of the sweep path from `start` to the target Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathSummary {
    pub path_constant: f64,
    pub minimal_gap: f64,
    pub minimal_gap_at: f64,
}

pub fn path_summary(cfg: &ExperimentConfig, samples: usize) -> Result<PathSummary> {
    let p = Problem::from_config(cfg)?;
    let h0 = p.easy_hamiltonian(cfg.sweep.start)?;
    let (gap, at) = minimal_gap(&h0, &p.h, samples)?;
    Ok(PathSummary {
        path_constant: path_constant(&h0, &p.h)?,
        minimal_gap: gap,
        minimal_gap_at: at,
    })
}

/// Re-detects peaks in a finished scan with other thresholds.
pub fn redetect(out: &ScanOutput, rel: f64, abs: f64) -> BTreeMap<String, Vec<f64>> {
    out.trace
        .traces
        .iter()
        .map(|(l, pts)| {
            (
                l.clone(),
                detect_resonances(pts, rel, abs)
                    .iter()
                    .map(|r| r.omega)
                    .collect(),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn dimer() -> ExperimentConfig {
        ExperimentConfig {
            lattice: LatticeSpec::new(1, 2, 1.0, 2.0),
            sector: SectorSpec::new(1, 1),
            d_c: 4,
            ..ExperimentConfig::flagship()
        }
    }

    #[test]
    fn keyed_streams_are_independent_of_order() {
        let a: f64 = keyed_rng(7, 3, Purpose::FridgeReset).random();
        let _ = keyed_rng(7, 2, Purpose::FridgeReset).random::<f64>();
        let b: f64 = keyed_rng(7, 3, Purpose::FridgeReset).random();
        let c: f64 = keyed_rng(7, 3, Purpose::PairSample).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn config_round_trip_and_unknown_keys() {
        let cfg = dimer();
        let back = ExperimentConfig::from_json(&cfg.canonical_json()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.content_hash(), cfg.content_hash());
        let mut v: serde_json::Value = serde_json::from_str(&cfg.canonical_json()).unwrap();
        v["bogus"] = serde_json::json!(1);
        assert!(matches!(
            ExperimentConfig::from_json(&v.to_string()),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn coulomb_start_has_no_double_occupancy() {
        let cfg = dimer();
        let p = Problem::from_config(&cfg).unwrap();
        let hc = p
            .easy_hamiltonian(StartState::Coulomb { index: 0 })
            .unwrap();
        let s = p.start_state(StartState::Coulomb { index: 1 }).unwrap();
        assert!(s.expectation(&hc).abs() < 1e-12);
        assert!(p.start_state(StartState::Coulomb { index: 2 }).is_err());
    }

    #[test]
    fn free_ground_mix_hits_target() {
        let cfg = ExperimentConfig::flagship();
        let p = Problem::from_config(&cfg).unwrap();
        let s = p
            .start_state(StartState::FreeGroundMix { fidelity: 0.4509 })
            .unwrap();
        assert!((fidelity(&s, &p.ground).unwrap() - 0.4509).abs() < 1e-10);
        let hf = p.easy_hamiltonian(StartState::Slater).unwrap();
        assert!((s.expectation(&hf) - p.free.energies()[0]).abs() < 1e-9);
    }

    #[test]
    fn oracle_budget() {
        let mut cfg = dimer();
        cfg.lattice = LatticeSpec::new(3, 3, 1.0, 2.0);
        cfg.sector = SectorSpec::new(4, 4);
        assert!(matches!(
            run_oracle(&cfg),
            Err(Error::DimensionBudget { .. })
        ));
    }
}
