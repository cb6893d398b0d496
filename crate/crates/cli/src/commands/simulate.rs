use clap::{Args, Subcommand, ValueEnum};
use ivcov_core::hfsim::{simulate_intervals, HfSimSpec};
use ivcov_core::io::{default_names, write_interval_pair, write_sym_matrix};
use ivcov_core::{build_covariance, generate_intervals, CovSpec, CovStructure, Dgp, DgpSpec, NoiseFamily};
use serde::Serialize;

use crate::config::Settings;
use crate::error::{CliError, CliResult};
use crate::out_path;
use crate::output::{ensure_dir, write_json};

#[derive(Debug, Clone, Subcommand)]
pub enum SimulateCommand {
    /// Draw from one of the three interval data-generating processes.
    Dgp(DgpArgs),
    /// Simulate one day of one-second paths and aggregate them into blocks.
    Hf(HfArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DgpKind {
    Dgp1,
    Dgp2,
    Dgp3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StructureKind {
    Ma1,
    Ar1,
    Lr,
}

impl StructureKind {
    pub fn with_param(self, param: f64) -> CovStructure {
        match self {
            StructureKind::Ma1 => CovStructure::Ma1 { rho: param },
            StructureKind::Ar1 => CovStructure::Ar1 { rho: param },
            StructureKind::Lr => CovStructure::LongRange { hurst: param },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NoiseKind {
    Lognormal,
    Beta,
    Gamma,
    Exponential,
}

impl NoiseKind {
    pub fn family(self) -> NoiseFamily {
        match self {
            NoiseKind::Lognormal => NoiseFamily::LOGNORMAL,
            NoiseKind::Beta => NoiseFamily::BETA,
            NoiseKind::Gamma => NoiseFamily::GAMMA,
            NoiseKind::Exponential => NoiseFamily::EXPONENTIAL,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct DgpArgs {
    #[arg(long, value_enum)]
    pub dgp: DgpKind,
    #[arg(long, value_enum)]
    pub structure: StructureKind,
    /// rho for ma1/ar1, the Hurst index for lr.
    #[arg(long)]
    pub param: f64,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub p: usize,
    /// Interval half-width (dgp2) or width (dgp1).
    #[arg(long, default_value_t = 1.0)]
    pub constant: f64,
    /// Noise family for dgp3.
    #[arg(long, value_enum, default_value_t = NoiseKind::Exponential)]
    pub noise: NoiseKind,
    #[arg(long, default_value_t = 0)]
    pub replication: u64,
    /// Output file stem inside --out.
    #[arg(long, default_value = "dgp")]
    pub name: String,
}

#[derive(Debug, Clone, Args)]
pub struct HfArgs {
    #[arg(long)]
    pub p: usize,
    #[arg(long)]
    pub rho: f64,
    #[arg(long = "n-seconds", default_value_t = HfSimSpec::DEFAULT_SECONDS)]
    pub n_seconds: usize,
    #[arg(long = "block-seconds", default_value_t = HfSimSpec::DEFAULT_BLOCK)]
    pub block_seconds: usize,
    #[arg(long, default_value_t = 0)]
    pub replication: u64,
    #[arg(long, default_value = "hf")]
    pub name: String,
}

#[derive(Serialize)]
struct Sidecar<'a, S: Serialize> {
    command: &'static str,
    settings: &'a Settings,
    spec: S,
    files: Vec<String>,
}

fn usage<E: std::fmt::Display>(e: E) -> CliError {
    CliError::usage(e.to_string())
}

pub fn run(cmd: &SimulateCommand, settings: &Settings) -> CliResult<()> {
    match cmd {
        SimulateCommand::Dgp(a) => {
            let dgp = match a.dgp {
                DgpKind::Dgp1 => Dgp::Dgp1 { constant: a.constant },
                DgpKind::Dgp2 => Dgp::Dgp2 { constant: a.constant },
                DgpKind::Dgp3 => Dgp::Dgp3 { noise: a.noise.family() },
            };
            let spec = DgpSpec {
                dgp,
                cov: CovSpec {
                    p: a.p,
                    structure: a.structure.with_param(a.param),
                },
                n: a.n,
                seed: settings.seed,
                replication: a.replication,
            };
            spec.cov.validate().map_err(usage)?;
            dgp.validate().map_err(usage)?;
            let truth = build_covariance(&spec.cov)?;
            let data = generate_intervals(&spec)?;
            write_outputs(settings, &a.name, "simulate dgp", spec, &truth, &data)
        }
        SimulateCommand::Hf(a) => {
            let spec = HfSimSpec {
                p: a.p,
                rho: a.rho,
                n_seconds: a.n_seconds,
                block_seconds: a.block_seconds,
                seed: settings.seed,
                replication: a.replication,
            };
            spec.validate().map_err(usage)?;
            let truth = spec.covariance()?;
            let data = simulate_intervals(&spec)?;
            write_outputs(settings, &a.name, "simulate hf", spec, &truth, &data)
        }
    }
}

fn write_outputs<S: Serialize>(
    settings: &Settings,
    name: &str,
    command: &'static str,
    spec: S,
    truth: &ivcov_core::SymMatrix,
    data: &ivcov_core::IntervalMatrix,
) -> CliResult<()> {
    ensure_dir(&settings.out)?;
    let names = default_names(data.p());
    write_interval_pair(&out_path(settings, name), &names, data)?;
    let truth_file = format!("{name}.truth.csv");
    write_sym_matrix(&out_path(settings, &truth_file), &names, truth)?;
    let sidecar = Sidecar {
        command,
        settings,
        spec,
        files: vec![format!("{name}.lower.csv"), format!("{name}.upper.csv"), truth_file],
    };
    write_json(&out_path(settings, &format!("{name}.json")), &sidecar)
}
