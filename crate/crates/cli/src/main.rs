use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fermi_cool::bounds::{bound_report, BoundInputs};
use fermi_cool::couplers::CouplerFamily;
use fermi_cool::harness::{
    csv_with_header, run_figure, run_oracle, run_scan, run_subspace_cooling, run_sweep,
    run_thermalization, write_oracle, ExperimentConfig, FigureId, Problem, RunRecord,
};
use fermi_cool::noise::{NoiseScope, NoiseSpec};
use fermi_cool::pauli::{decompose_pauli, write_decomposition_csv};
use fermi_cool::quantum::Beta;
use fermi_cool::{Error, Result};

#[derive(Parser)]
#[command(
    name = "fermi-cool",
    version,
    about = "Algorithmic cooling of small Fermi-Hubbard lattices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Subspace cooling: prepare, scan, then targeted cooling steps.
    Cool(ConfigArgs),
    /// Stochastic subspace thermalization.
    Thermalize(ConfigArgs),
    /// Spectroscopic scan only.
    Scan(ConfigArgs),
    /// Pseudo-sweep and slow-sweep diagnostics.
    Sweep(ConfigArgs),
    /// Exact spectrum, gaps and ground state.
    Oracle(ConfigArgs),
    /// Emit the data files for one figure or table.
    Figure {
        id: String,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Runtime estimates for sweeps, subspace cooling and spectroscopy.
    Bounds(BoundArgs),
    /// Pauli decomposition of every coupler of the configured family.
    Decompose(ConfigArgs),
}

/// Config file plus per-field overrides. Without `--config` the flagship
/// 2x2 half-filled run is used.
#[derive(Args, Clone, Default)]
struct ConfigArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    rows: Option<usize>,
    #[arg(long)]
    cols: Option<usize>,
    #[arg(long)]
    hopping_t: Option<f64>,
    #[arg(long = "coulomb-u")]
    coulomb_u: Option<f64>,
    #[arg(long)]
    n_up: Option<usize>,
    #[arg(long)]
    n_down: Option<usize>,
    /// free, ideal, symmetry or coulomb.
    #[arg(long)]
    coupler_family: Option<String>,
    #[arg(long)]
    d_c: Option<usize>,
    #[arg(long)]
    t_ps: Option<f64>,
    #[arg(long)]
    n_trotter: Option<usize>,
    /// Inverse temperature for `thermalize`; `inf` for zero temperature.
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    n_steps: Option<usize>,
    #[arg(long)]
    noise_lambda: Option<f64>,
    /// full_space or sector.
    #[arg(long)]
    noise_scope: Option<String>,
    #[arg(long)]
    rng_seed: Option<u64>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long = "k")]
    k: f64,
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    delta: f64,
    #[arg(long)]
    delta_c: f64,
    #[arg(long)]
    d_c: u32,
    #[arg(long)]
    avg_step: f64,
}

fn parse_enum<T: serde::de::DeserializeOwned>(what: &str, v: &str) -> Result<T> {
    serde_json::from_value(serde_json::Value::String(v.to_string()))
        .map_err(|_| Error::Config(format!("unknown {what}: {v}")))
}

impl ConfigArgs {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::flagship(),
        };
        if let Some(v) = self.rows {
            cfg.lattice.rows = v;
        }
        if let Some(v) = self.cols {
            cfg.lattice.cols = v;
        }
        if let Some(v) = self.hopping_t {
            cfg.lattice.hopping_t = v;
        }
        if let Some(v) = self.coulomb_u {
            cfg.lattice.coulomb_u = v;
        }
        if let Some(v) = self.n_up {
            cfg.sector.n_up = v;
        }
        if let Some(v) = self.n_down {
            cfg.sector.n_down = v;
        }
        if let Some(v) = &self.coupler_family {
            cfg.coupler_family = parse_enum::<CouplerFamily>("coupler family", v)?;
        }
        if let Some(v) = self.d_c {
            cfg.d_c = v;
        }
        if let Some(v) = self.t_ps {
            cfg.sweep.t_ps = v;
        }
        if let Some(v) = self.n_trotter {
            cfg.sweep.n_trotter = v;
        }
        if self.beta.is_some() || self.n_steps.is_some() {
            let mut t = cfg
                .thermal
                .unwrap_or_else(|| fermi_cool::harness::default_thermal(&cfg));
            if let Some(b) = &self.beta {
                t.beta = match b.as_str() {
                    "inf" | "infinite" => Beta::Infinite,
                    s => Beta::Finite(
                        s.parse()
                            .map_err(|_| Error::Config(format!("invalid beta: {s}")))?,
                    ),
                };
            }
            if let Some(n) = self.n_steps {
                t.n_steps = n;
            }
            cfg.thermal = Some(t);
        }
        if self.noise_lambda.is_some() || self.noise_scope.is_some() {
            let mut n = cfg.noise.unwrap_or(NoiseSpec {
                lambda: 0.0,
                scope: NoiseScope::FullSpace,
            });
            if let Some(l) = self.noise_lambda {
                n.lambda = l;
            }
            if let Some(s) = &self.noise_scope {
                n.scope = parse_enum("noise scope", s)?;
            }
            cfg.noise = Some(n);
        }
        if let Some(v) = self.rng_seed {
            cfg.rng_seed = v;
        }
        if let Some(v) = &self.output_dir {
            cfg.output_dir = Some(v.display().to_string());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn output_dir(cfg: &ExperimentConfig) -> Option<PathBuf> {
    cfg.output_dir.as_ref().map(PathBuf::from)
}

/// Prints the record and, with an output directory, writes
/// `<kind>.json` and `<kind>_trace.csv`.
fn emit_record(rec: &RunRecord, dir: Option<&Path>) -> Result<()> {
    println!("{}", rec.to_json());
    if let Some(dir) = dir {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(format!("{}.json", rec.kind)), rec.to_json())?;
        if !rec.trace.is_empty() {
            let mut f = csv_with_header(
                &dir.join(format!("{}_trace.csv", rec.kind)),
                &rec.config_hash,
                &rec.kind,
                "simulation",
            )?;
            rec.write_trace_csv(&mut f)?;
        }
        if !rec.thermal_trace.is_empty() {
            let mut f = csv_with_header(
                &dir.join("thermal_trace.csv"),
                &rec.config_hash,
                &rec.kind,
                "simulation",
            )?;
            rec.write_thermal_csv(&mut f)?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Cool(a) => {
            let cfg = a.resolve()?;
            emit_record(&run_subspace_cooling(&cfg)?, output_dir(&cfg).as_deref())
        }
        Command::Thermalize(a) => {
            let mut cfg = a.resolve()?;
            if cfg.thermal.is_none() {
                cfg.thermal = Some(fermi_cool::harness::default_thermal(&cfg));
            }
            emit_record(&run_thermalization(&cfg)?, output_dir(&cfg).as_deref())
        }
        Command::Scan(a) => {
            let cfg = a.resolve()?;
            let (rec, _) = run_scan(&cfg)?;
            emit_record(&rec, output_dir(&cfg).as_deref())
        }
        Command::Sweep(a) => {
            let cfg = a.resolve()?;
            emit_record(&run_sweep(&cfg)?, output_dir(&cfg).as_deref())
        }
        Command::Oracle(a) => {
            let cfg = a.resolve()?;
            let bundle = run_oracle(&cfg)?;
            println!("{}", serde_json::to_string_pretty(&bundle)?);
            if let Some(dir) = output_dir(&cfg) {
                write_oracle(&bundle, &dir)?;
            }
            Ok(())
        }
        Command::Figure { id, config } => {
            let id: FigureId = id.parse()?;
            let cfg = config.resolve()?;
            let dir = output_dir(&cfg).unwrap_or_else(|| PathBuf::from("out").join(id.name()));
            for path in run_figure(id, &cfg, &dir)? {
                println!("{}", path.display());
            }
            Ok(())
        }
        Command::Bounds(b) => {
            let inputs = BoundInputs {
                k: b.k,
                alpha: b.alpha,
                delta: b.delta,
                delta_c: b.delta_c,
                d_c: b.d_c,
                avg_step: b.avg_step,
            };
            println!("{}", serde_json::to_string_pretty(&bound_report(&inputs)?)?);
            Ok(())
        }
        Command::Decompose(a) => {
            let cfg = a.resolve()?;
            let p = Problem::from_config(&cfg)?;
            let mut reports = Vec::new();
            for c in p.couplers(cfg.coupler_family, cfg.d_c)? {
                if let Some(ps) = c.pauli_form() {
                    reports.push((c.label(), decompose_pauli(&ps.pruned())?));
                }
            }
            match output_dir(&cfg) {
                Some(dir) => {
                    fs::create_dir_all(&dir)?;
                    let path = dir.join("decomposition.csv");
                    let mut f = csv_with_header(
                        &path,
                        &cfg.content_hash(),
                        "decompose",
                        "operator algebra",
                    )?;
                    write_decomposition_csv(&mut f, &reports)?;
                    println!("{}", path.display());
                }
                None => write_decomposition_csv(&mut std::io::stdout().lock(), &reports)?,
            }
            Ok(())
        }
    }
}

/// 2 for bad input, 1 for I/O failures, 3 for numerical aborts.
fn exit_code(e: &Error) -> u8 {
    if e.is_config_error() {
        2
    } else if matches!(e, Error::Io(_)) {
        1
    } else {
        3
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Config("x".into())), 2);
        assert_eq!(exit_code(&Error::UnknownFigure("fig1".into())), 2);
        assert_eq!(exit_code(&Error::ScanAborted("x".into())), 3);
        assert_eq!(
            exit_code(&Error::SweepNotConverged {
                doublings: 3,
                last_change: 0.1
            }),
            3
        );
        assert_eq!(exit_code(&Error::NotHermitian(1.0)), 3);
    }

    #[test]
    fn overrides_apply() {
        let args = ConfigArgs {
            rows: Some(1),
            cols: Some(2),
            n_up: Some(1),
            n_down: Some(1),
            d_c: Some(3),
            coupler_family: Some("ideal".into()),
            beta: Some("inf".into()),
            noise_lambda: Some(0.01),
            noise_scope: Some("sector".into()),
            ..Default::default()
        };
        let cfg = args.resolve().unwrap();
        assert_eq!(cfg.coupler_family, CouplerFamily::Ideal);
        assert_eq!(cfg.thermal.unwrap().beta, Beta::Infinite);
        assert_eq!(cfg.noise.unwrap().scope, NoiseScope::Sector);
        let bad = ConfigArgs {
            coupler_family: Some("quartic".into()),
            ..Default::default()
        };
        assert!(bad.resolve().unwrap_err().is_config_error());
    }
}
