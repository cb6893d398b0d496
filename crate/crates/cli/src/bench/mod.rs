//! Benchmark grids over the synthetic and high-frequency simulators.
//!
//! A run expands its grid into independent replication tasks, executes them
//! on a fixed-size thread pool and reassembles the results in task order, so
//! the output does not depend on the worker count.
//!
//! Unless `--lambda` is given, every task uses the scaled rate rule
//! `λ = C · sqrt(ln p / n) · (mean bound variance)` with one `C` per table,
//! chosen on a pilot cell drawn from its own seed.

pub mod tables;

use std::time::Instant;

use clap::Args;
use ivcov_core::hfsim::{calibrate_scale, simulate_intervals, HfSimSpec};
use ivcov_core::io::format_f64;
use ivcov_core::synthetic::DgpSampler;
use ivcov_core::{
    admm_solve, bound_covariances, build_covariance, spectral_norm, AdmmConfig, CovSpec, Dgp, Error as CoreError,
    IntervalMatrix, LambdaRule, SeedStream, StreamRole, SymMatrix,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::commands::simulate::{DgpKind, NoiseKind, StructureKind};
use crate::config::{LambdaMode, Settings};
use crate::error::{CliError, CliResult};
use crate::out_path;
use crate::output::{ensure_dir, write_csv, write_json};
use tables::*;

/// Candidate rate constants for the pilot.
pub const PILOT_GRID: [f64; 8] = [0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0];
pub const PILOT_REPS: usize = 2;

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// table1, table2, table3, table5 or custom.
    pub table: String,
    /// Restrict to these cells: n:p pairs, or p:rho pairs for table5.
    #[arg(long, value_delimiter = ',')]
    pub cells: Option<Vec<String>>,
    #[arg(long, value_enum, value_delimiter = ',')]
    pub structures: Option<Vec<StructureKind>>,
    /// Data-generating process for custom grids.
    #[arg(long, value_enum)]
    pub dgp: Option<DgpKind>,
    /// rho or Hurst values, replacing the defaults for every structure.
    #[arg(long, value_delimiter = ',')]
    pub params: Option<Vec<f64>>,
    /// Interval constants for dgp1/dgp2.
    #[arg(long, value_delimiter = ',')]
    pub constants: Option<Vec<f64>>,
    /// Noise families for dgp3.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub noises: Option<Vec<NoiseKind>>,
}

/// A DGP grid: every cell averages over structure parameters and interval
/// variants (constants or noise families).
#[derive(Debug, Clone, PartialEq)]
pub struct DgpGrid {
    pub table: String,
    pub dgp: DgpKind,
    pub cells: Vec<(usize, usize)>,
    pub structures: Vec<StructureKind>,
    pub params: Option<Vec<f64>>,
    pub variants: Vec<Dgp>,
    /// Cell, structure set and variant used to tune `C`.
    pub pilot_cell: (usize, usize),
    pub pilot_variant: Dgp,
}

impl DgpGrid {
    pub fn table(name: &str) -> Option<Self> {
        let (dgp, variants, pilot_variant) = match name {
            "table1" => (
                DgpKind::Dgp1,
                CONSTANTS.iter().map(|&c| Dgp::Dgp1 { constant: c }).collect(),
                Dgp::Dgp1 { constant: 1.0 },
            ),
            "table2" => (
                DgpKind::Dgp2,
                CONSTANTS.iter().map(|&c| Dgp::Dgp2 { constant: c }).collect(),
                Dgp::Dgp2 { constant: 1.0 },
            ),
            "table3" => (
                DgpKind::Dgp3,
                NOISES.iter().map(|n| Dgp::Dgp3 { noise: n.family() }).collect(),
                Dgp::Dgp3 {
                    noise: NoiseKind::Exponential.family(),
                },
            ),
            _ => return None,
        };
        Some(Self {
            table: name.to_string(),
            dgp,
            cells: DGP_CELLS.to_vec(),
            structures: STRUCTURES.to_vec(),
            params: None,
            variants,
            pilot_cell: DGP_CELLS[0],
            pilot_variant,
        })
    }

    fn params_for(&self, s: StructureKind) -> Vec<f64> {
        self.params.clone().unwrap_or_else(|| default_params(s).to_vec())
    }

    fn reference(&self, s: StructureKind, n: usize, p: usize) -> Option<(f64, f64)> {
        match self.table.as_str() {
            "table1" => TABLE1.lookup(s, n, p),
            "table2" => TABLE2.lookup(s, n, p),
            "table3" => TABLE3.lookup(s, n, p),
            _ => None,
        }
    }
}

const NOISES: [NoiseKind; 4] = [NoiseKind::Lognormal, NoiseKind::Beta, NoiseKind::Gamma, NoiseKind::Exponential];

/// One replication.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepRecord {
    pub replication: u64,
    pub lambda: f64,
    pub frobenius: f64,
    pub spectral: f64,
    /// High-frequency cells only: error before rescaling.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub raw_frobenius: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub support_size: usize,
    pub min_eigenvalue: f64,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariantReport {
    pub param: f64,
    pub variant: String,
    pub mean_frobenius: f64,
    pub se_frobenius: f64,
    pub mean_spectral: f64,
    pub replications: Vec<RepRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellReport {
    pub label: String,
    pub n: usize,
    pub p: usize,
    pub structure: String,
    /// Set for high-frequency cells.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    pub reps: usize,
    pub converged: usize,
    pub mean_frobenius: f64,
    pub sd_frobenius: f64,
    pub mean_spectral: f64,
    pub sd_spectral: f64,
    pub mean_support_size: f64,
    pub reference_frobenius: Option<f64>,
    pub reference_spectral: Option<f64>,
    /// High-frequency cells: calibrated scale `c` of the target `cΣ`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_raw_frobenius: Option<f64>,
    pub variants: Vec<VariantReport>,
}

impl CellReport {
    /// Mean Frobenius error per interval variant, averaged over parameters,
    /// with its standard error.
    pub fn by_variant(&self) -> Vec<(String, f64, f64)> {
        let mut names: Vec<String> = Vec::new();
        for v in &self.variants {
            if !names.contains(&v.variant) {
                names.push(v.variant.clone());
            }
        }
        names
            .into_iter()
            .map(|name| {
                let group: Vec<&VariantReport> = self.variants.iter().filter(|v| v.variant == name).collect();
                let k = group.len() as f64;
                let mean = group.iter().map(|v| v.mean_frobenius).sum::<f64>() / k;
                let se = (group.iter().map(|v| v.se_frobenius.powi(2)).sum::<f64>()).sqrt() / k;
                (name, mean, se)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Exclusion {
    pub structure: String,
    pub param: f64,
    pub p: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PilotReport {
    pub cell: String,
    pub reps: usize,
    /// `(C, mean Frobenius error)`.
    pub losses: Vec<(f64, f64)>,
    pub chosen_c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub table: String,
    pub settings: Settings,
    pub lambda_rule: String,
    pub pilot: Option<PilotReport>,
    pub excluded: Vec<Exclusion>,
    pub cells: Vec<CellReport>,
}

impl BenchReport {
    pub fn cell(&self, label: &str) -> Option<&CellReport> {
        self.cells.iter().find(|c| c.label == label)
    }
}

pub fn dgp_label(s: StructureKind, n: usize, p: usize) -> String {
    format!("{} n={n} p={p}", structure_name(s))
}

pub fn hf_label(p: usize, rho: f64) -> String {
    format!("p={p} rho={rho}")
}

fn structure_name(s: StructureKind) -> &'static str {
    match s {
        StructureKind::Ma1 => "MA1",
        StructureKind::Ar1 => "AR1",
        StructureKind::Lr => "LR",
    }
}

fn variant_name(d: &Dgp) -> String {
    match d {
        Dgp::Dgp1 { constant } | Dgp::Dgp2 { constant } => format!("c={constant}"),
        Dgp::Dgp3 { noise } => noise.label().to_string(),
    }
}

fn pool(workers: usize) -> CliResult<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::usage(format!("cannot start {workers} workers: {e}")))
}

struct Scored {
    lambda: f64,
    frobenius: f64,
    spectral: f64,
    raw_frobenius: Option<f64>,
    iterations: usize,
    converged: bool,
    support_size: usize,
    min_eigenvalue: f64,
}

/// Estimates from `data` with `λ` from `rule` and scores against `scale · truth`
/// in the units of `truth`.
fn estimate_and_score(
    data: &IntervalMatrix,
    truth: &SymMatrix,
    scale: f64,
    rule: &LambdaRule,
    config: &AdmmConfig,
    seeds: SeedStream,
    rep: u64,
) -> CliResult<Scored> {
    let lambda = rule.resolve(data, config, &mut seeds.rng(rep, StreamRole::FoldSplit))?;
    let (s_l, s_u) = bound_covariances(data)?;
    let res = admm_solve(&s_l, &s_u, &AdmmConfig { lambda, ..config.clone() }, None)?;
    let rescaled = &(res.estimate() * (1.0 / scale)) - truth;
    Ok(Scored {
        lambda,
        frobenius: rescaled.frobenius_norm(),
        spectral: spectral_norm(&rescaled)?,
        raw_frobenius: (scale != 1.0).then(|| (res.estimate() - truth).frobenius_norm()),
        iterations: res.iterations,
        converged: res.converged,
        support_size: res.support_size(),
        min_eigenvalue: res.min_eigenvalue,
    })
}

/// Picks the constant with the smallest mean error, where each row of
/// `errors` holds one error per grid value. Ties go to the larger
/// constant.
fn choose_c(errors: &[Vec<f64>]) -> (Vec<(f64, f64)>, f64) {
    let k = errors.len() as f64;
    let losses: Vec<(f64, f64)> = PILOT_GRID
        .iter()
        .enumerate()
        .map(|(g, &c)| (c, errors.iter().map(|e| e[g]).sum::<f64>() / k))
        .collect();
    let mut best = losses.len() - 1;
    for g in (0..losses.len()).rev() {
        if losses[g].1 < losses[best].1 {
            best = g;
        }
    }
    let chosen = losses[best].0;
    (losses, chosen)
}

/// Errors of one pilot unit for every constant in [`PILOT_GRID`].
fn pilot_errors(
    data: &IntervalMatrix,
    truth: &SymMatrix,
    scale: f64,
    config: &AdmmConfig,
) -> CliResult<Vec<f64>> {
    let (s_l, s_u) = bound_covariances(data)?;
    let mut out = vec![0.0; PILOT_GRID.len()];
    let mut warm = None;
    // largest penalty first so each solve warm-starts from a sparser one
    for g in (0..PILOT_GRID.len()).rev() {
        // the rate rules draw no random numbers
        let mut unused = SeedStream::new(0).rng(0, StreamRole::FoldSplit);
        let lambda = LambdaRule::ScaledRate { c: PILOT_GRID[g] }.resolve(data, config, &mut unused)?;
        let res = admm_solve(&s_l, &s_u, &AdmmConfig { lambda, ..config.clone() }, warm.as_ref())?;
        out[g] = (&(res.estimate() * (1.0 / scale)) - truth).frobenius_norm();
        warm = Some(res.warm_start());
    }
    Ok(out)
}

struct DgpUnit {
    cell: usize,
    structure: StructureKind,
    param: f64,
    variant: Dgp,
}

fn sampler_or_exclusion(
    s: StructureKind,
    param: f64,
    p: usize,
    excluded: &mut Vec<Exclusion>,
) -> CliResult<Option<DgpSampler>> {
    let spec = CovSpec {
        p,
        structure: s.with_param(param),
    };
    spec.validate().map_err(|e| CliError::usage(e.to_string()))?;
    match build_covariance(&spec) {
        Ok(c) => Ok(Some(DgpSampler::from_covariance(c)?)),
        Err(CoreError::NotPositiveDefinite(v)) => {
            let e = Exclusion {
                structure: structure_name(s).to_string(),
                param,
                p,
                reason: format!("covariance is not positive definite ({v})"),
            };
            if !excluded.contains(&e) {
                excluded.push(e);
            }
            Ok(None)
        }
        Err(e) => Err(e.into()),
    }
}

/// Variants of one `(structure, param, n, p)` share their seeds, so every
/// interval constant or noise family sees the same Gaussian centers.
fn dgp_seeds(settings: &Settings, table: &str, s: StructureKind, param: f64, n: usize, p: usize) -> SeedStream {
    SeedStream::new(settings.seed).derive(&format!("{table}/{}/{param}/{n}x{p}", structure_name(s)))
}

fn dgp_pilot(grid: &DgpGrid, settings: &Settings, pool: &rayon::ThreadPool) -> CliResult<PilotReport> {
    let (n, p) = grid.pilot_cell;
    let seeds = SeedStream::new(settings.seed).derive(&format!("pilot/{}", grid.table));
    let mut ignored = Vec::new();
    let mut units = Vec::new();
    for &s in &STRUCTURES {
        for param in default_params(s) {
            if let Some(sampler) = sampler_or_exclusion(s, *param, p, &mut ignored)? {
                let unit_seeds = seeds.derive(&format!("{}/{param}", structure_name(s)));
                for rep in 0..PILOT_REPS as u64 {
                    units.push((sampler.clone(), unit_seeds, rep));
                }
            }
        }
    }
    let errors = pool.install(|| {
        units
            .par_iter()
            .map(|(sampler, unit_seeds, rep)| {
                let data = sampler.sample(&grid.pilot_variant, n, *unit_seeds, *rep)?;
                pilot_errors(&data, sampler.truth(), 1.0, &settings.admm)
            })
            .collect::<CliResult<Vec<_>>>()
    })?;
    let (losses, chosen_c) = choose_c(&errors);
    Ok(PilotReport {
        cell: format!("n={n} p={p} {}", variant_name(&grid.pilot_variant)),
        reps: PILOT_REPS,
        losses,
        chosen_c,
    })
}

fn lambda_setup<F>(settings: &Settings, pilot: F) -> CliResult<(LambdaRule, Option<PilotReport>)>
where
    F: FnOnce() -> CliResult<PilotReport>,
{
    match settings.lambda.clone().unwrap_or(LambdaMode::Pilot) {
        LambdaMode::Pilot => {
            let report = pilot()?;
            Ok((LambdaRule::ScaledRate { c: report.chosen_c }, Some(report)))
        }
        mode => Ok((mode.rule(settings.folds).expect("non-pilot mode"), None)),
    }
}

fn rule_label(rule: &LambdaRule) -> String {
    match rule {
        LambdaRule::Fixed { value } => format!("fixed:{value}"),
        LambdaRule::Rate { c } => format!("rate:{c}"),
        LambdaRule::ScaledRate { c } => format!("scaled:{c}"),
        LambdaRule::CrossValidated { grid, folds } => {
            let g: Vec<String> = grid.iter().map(|v| v.to_string()).collect();
            format!("cv:{} folds={folds}", g.join(","))
        }
    }
}

pub fn run_dgp_grid(grid: &DgpGrid, settings: &Settings) -> CliResult<BenchReport> {
    let pool = pool(settings.workers)?;
    let (rule, pilot) = lambda_setup(settings, || dgp_pilot(grid, settings, &pool))?;

    let mut excluded = Vec::new();
    let mut units = Vec::new();
    let mut samplers = Vec::new();
    for (ci, &(n, p)) in grid.cells.iter().enumerate() {
        let _ = n;
        for &s in &grid.structures {
            for param in grid.params_for(s) {
                let Some(sampler) = sampler_or_exclusion(s, param, p, &mut excluded)? else {
                    continue;
                };
                samplers.push(sampler);
                for v in &grid.variants {
                    units.push((
                        DgpUnit {
                            cell: ci,
                            structure: s,
                            param,
                            variant: *v,
                        },
                        samplers.len() - 1,
                    ));
                }
            }
        }
    }
    let reps = settings.reps as u64;
    let tasks: Vec<(usize, u64)> = (0..units.len()).flat_map(|u| (0..reps).map(move |r| (u, r))).collect();

    let records = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(u, rep)| {
                let (unit, si) = &units[u];
                let (n, p) = grid.cells[unit.cell];
                let sampler = &samplers[*si];
                let seeds = dgp_seeds(settings, &grid.table, unit.structure, unit.param, n, p);
                let start = Instant::now();
                let data = sampler.sample(&unit.variant, n, seeds, rep)?;
                let sc = estimate_and_score(&data, sampler.truth(), 1.0, &rule, &settings.admm, seeds, rep)?;
                Ok(record(rep, sc, start))
            })
            .collect::<CliResult<Vec<_>>>()
    })?;

    let mut cells = Vec::new();
    let mut by_unit = records.chunks(settings.reps);
    let mut unit_iter = units.iter().peekable();
    for (ci, &(n, p)) in grid.cells.iter().enumerate() {
        for &s in &grid.structures {
            let mut variants = Vec::new();
            while let Some((unit, _)) = unit_iter.peek() {
                if unit.cell != ci || unit.structure != s {
                    break;
                }
                let reps = by_unit.next().expect("one chunk per unit").to_vec();
                variants.push(variant_report(unit.param, variant_name(&unit.variant), reps));
                unit_iter.next();
            }
            if variants.is_empty() {
                continue;
            }
            let reference = grid.reference(s, n, p);
            cells.push(cell_report(
                dgp_label(s, n, p),
                n,
                p,
                structure_name(s),
                None,
                reference.map(|r| r.0),
                reference.map(|r| r.1),
                None,
                variants,
            ));
        }
    }
    Ok(BenchReport {
        table: grid.table.clone(),
        settings: settings.clone(),
        lambda_rule: rule_label(&rule),
        pilot,
        excluded,
        cells,
    })
}

fn record(rep: u64, sc: Scored, start: Instant) -> RepRecord {
    RepRecord {
        replication: rep,
        lambda: sc.lambda,
        frobenius: sc.frobenius,
        spectral: sc.spectral,
        raw_frobenius: sc.raw_frobenius,
        iterations: sc.iterations,
        converged: sc.converged,
        support_size: sc.support_size,
        min_eigenvalue: sc.min_eigenvalue,
        wall_seconds: start.elapsed().as_secs_f64(),
    }
}

fn mean(v: impl Iterator<Item = f64> + Clone) -> f64 {
    let k = v.clone().count() as f64;
    v.sum::<f64>() / k
}

fn sd(v: impl Iterator<Item = f64> + Clone) -> f64 {
    let k = v.clone().count();
    if k < 2 {
        return 0.0;
    }
    let m = mean(v.clone());
    (v.map(|x| (x - m).powi(2)).sum::<f64>() / (k - 1) as f64).sqrt()
}

fn variant_report(param: f64, variant: String, reps: Vec<RepRecord>) -> VariantReport {
    let f = reps.iter().map(|r| r.frobenius);
    VariantReport {
        param,
        variant,
        mean_frobenius: mean(f.clone()),
        se_frobenius: sd(f) / (reps.len() as f64).sqrt(),
        mean_spectral: mean(reps.iter().map(|r| r.spectral)),
        replications: reps,
    }
}

#[allow(clippy::too_many_arguments)]
fn cell_report(
    label: String,
    n: usize,
    p: usize,
    structure: &str,
    rho: Option<f64>,
    reference_frobenius: Option<f64>,
    reference_spectral: Option<f64>,
    scale: Option<f64>,
    variants: Vec<VariantReport>,
) -> CellReport {
    let all: Vec<&RepRecord> = variants.iter().flat_map(|v| &v.replications).collect();
    let f = all.iter().map(|r| r.frobenius);
    let s = all.iter().map(|r| r.spectral);
    let raw: Vec<f64> = all.iter().filter_map(|r| r.raw_frobenius).collect();
    CellReport {
        label,
        n,
        p,
        structure: structure.to_string(),
        rho,
        reps: all.len(),
        converged: all.iter().filter(|r| r.converged).count(),
        mean_frobenius: mean(f.clone()),
        sd_frobenius: sd(f),
        mean_spectral: mean(s.clone()),
        sd_spectral: sd(s),
        mean_support_size: mean(all.iter().map(|r| r.support_size as f64)),
        reference_frobenius,
        reference_spectral,
        scale,
        mean_raw_frobenius: (!raw.is_empty()).then(|| mean(raw.iter().copied())),
        variants,
    }
}

/// High-frequency cells `(p, ρ)`.
pub fn run_hf_grid(cells: &[(usize, f64)], settings: &Settings) -> CliResult<BenchReport> {
    let pool = pool(settings.workers)?;
    let cell_spec = |p: usize, rho: f64| {
        let seed = SeedStream::new(settings.seed).derive(&format!("table5/p{p}/rho{rho}")).seed();
        HfSimSpec::new(p, rho, seed)
    };
    for &(p, rho) in cells {
        cell_spec(p, rho).validate().map_err(|e| CliError::usage(e.to_string()))?;
    }
    let (rule, pilot) = lambda_setup(settings, || {
        let (p, rho) = (100, 0.3);
        let spec = HfSimSpec::new(p, rho, SeedStream::new(settings.seed).derive("pilot/table5").seed());
        let truth = spec.covariance()?;
        let scale = calibrate_scale(&spec)?;
        let errors = pool.install(|| {
            (0..PILOT_REPS as u64)
                .into_par_iter()
                .map(|r| {
                    let data = simulate_intervals(&HfSimSpec { replication: r, ..spec })?;
                    pilot_errors(&data, &truth, scale, &settings.admm)
                })
                .collect::<CliResult<Vec<_>>>()
        })?;
        let (losses, chosen_c) = choose_c(&errors);
        Ok(PilotReport {
            cell: hf_label(p, rho),
            reps: PILOT_REPS,
            losses,
            chosen_c,
        })
    })?;

    let prepared = pool.install(|| {
        cells
            .par_iter()
            .map(|&(p, rho)| {
                let spec = cell_spec(p, rho);
                Ok((spec, spec.covariance()?, calibrate_scale(&spec)?))
            })
            .collect::<CliResult<Vec<_>>>()
    })?;
    let reps = settings.reps as u64;
    let tasks: Vec<(usize, u64)> = (0..cells.len()).flat_map(|c| (0..reps).map(move |r| (c, r))).collect();
    let records = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(c, rep)| {
                let (spec, truth, scale) = &prepared[c];
                let start = Instant::now();
                let data = simulate_intervals(&HfSimSpec { replication: rep, ..*spec })?;
                let seeds = SeedStream::new(spec.seed);
                let sc = estimate_and_score(&data, truth, *scale, &rule, &settings.admm, seeds, rep)?;
                Ok(record(rep, sc, start))
            })
            .collect::<CliResult<Vec<_>>>()
    })?;

    let out = cells
        .iter()
        .zip(&prepared)
        .zip(records.chunks(settings.reps))
        .map(|((&(p, rho), (spec, _, scale)), reps)| {
            let v = variant_report(rho, "hf".to_string(), reps.to_vec());
            cell_report(
                hf_label(p, rho),
                spec.n_blocks(),
                p,
                "AR1",
                Some(rho),
                table5_reference(p, rho),
                None,
                Some(*scale),
                vec![v],
            )
        })
        .collect();
    Ok(BenchReport {
        table: "table5".to_string(),
        settings: settings.clone(),
        lambda_rule: rule_label(&rule),
        pilot,
        excluded: Vec::new(),
        cells: out,
    })
}

fn parse_pair<A: std::str::FromStr, B: std::str::FromStr>(s: &str) -> CliResult<(A, B)> {
    let bad = || CliError::usage(format!("cell {s:?} is not of the form a:b"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

/// Builds the DGP grid for `args`, or `None` for table5.
pub fn plan(args: &BenchArgs) -> CliResult<Option<DgpGrid>> {
    if args.table == "table5" {
        for flag in [
            args.structures.is_some(),
            args.dgp.is_some(),
            args.params.is_some(),
            args.constants.is_some(),
            args.noises.is_some(),
        ] {
            if flag {
                return Err(CliError::usage("table5 accepts only --cells"));
            }
        }
        return Ok(None);
    }
    let mut grid = if args.table == "custom" {
        let dgp = args
            .dgp
            .ok_or_else(|| CliError::usage("custom grids need --dgp"))?;
        let cells = args
            .cells
            .as_ref()
            .ok_or_else(|| CliError::usage("custom grids need --cells"))?;
        let (n, p) = parse_pair::<usize, usize>(&cells[0])?;
        let variants: Vec<Dgp> = match dgp {
            DgpKind::Dgp1 => CONSTANTS.iter().map(|&c| Dgp::Dgp1 { constant: c }).collect(),
            DgpKind::Dgp2 => CONSTANTS.iter().map(|&c| Dgp::Dgp2 { constant: c }).collect(),
            DgpKind::Dgp3 => NOISES.iter().map(|k| Dgp::Dgp3 { noise: k.family() }).collect(),
        };
        DgpGrid {
            table: "custom".to_string(),
            dgp,
            cells: Vec::new(),
            structures: STRUCTURES.to_vec(),
            params: None,
            pilot_variant: variants[0],
            variants,
            pilot_cell: (n, p),
        }
    } else {
        let grid = DgpGrid::table(&args.table).ok_or_else(|| {
            CliError::usage(format!(
                "unknown table {:?}; expected table1, table2, table3, table5 or custom",
                args.table
            ))
        })?;
        if args.dgp.is_some_and(|d| d != grid.dgp) {
            return Err(CliError::usage(format!("{} fixes its data-generating process", args.table)));
        }
        grid
    };
    if let Some(cells) = &args.cells {
        grid.cells = cells.iter().map(|c| parse_pair(c)).collect::<CliResult<_>>()?;
    }
    if let Some(s) = &args.structures {
        grid.structures = s.clone();
    }
    if let Some(p) = &args.params {
        grid.params = Some(p.clone());
    }
    match grid.dgp {
        DgpKind::Dgp1 | DgpKind::Dgp2 => {
            if args.noises.is_some() {
                return Err(CliError::usage("--noises applies to dgp3 only"));
            }
            if let Some(cs) = &args.constants {
                let mk = |c: f64| match grid.dgp {
                    DgpKind::Dgp1 => Dgp::Dgp1 { constant: c },
                    _ => Dgp::Dgp2 { constant: c },
                };
                grid.variants = cs.iter().map(|&c| mk(c)).collect();
            }
        }
        DgpKind::Dgp3 => {
            if args.constants.is_some() {
                return Err(CliError::usage("--constants applies to dgp1 and dgp2 only"));
            }
            if let Some(ns) = &args.noises {
                grid.variants = ns.iter().map(|k| Dgp::Dgp3 { noise: k.family() }).collect();
            }
        }
    }
    for v in &grid.variants {
        v.validate().map_err(|e| CliError::usage(e.to_string()))?;
    }
    if grid.cells.is_empty() || grid.structures.is_empty() || grid.variants.is_empty() {
        return Err(CliError::usage("benchmark grid is empty"));
    }
    Ok(Some(grid))
}

pub fn hf_cells(args: &BenchArgs) -> CliResult<Vec<(usize, f64)>> {
    match &args.cells {
        Some(cells) => cells.iter().map(|c| parse_pair(c)).collect(),
        None => Ok(HF_DIMS
            .iter()
            .flat_map(|&p| HF_RHOS.iter().map(move |&r| (p, r)))
            .collect()),
    }
}

pub fn run(args: &BenchArgs, settings: &Settings) -> CliResult<()> {
    let report = match plan(args)? {
        Some(grid) => run_dgp_grid(&grid, settings)?,
        None => run_hf_grid(&hf_cells(args)?, settings)?,
    };
    write_report(&report, settings)
}

pub fn write_report(report: &BenchReport, settings: &Settings) -> CliResult<()> {
    ensure_dir(&settings.out)?;
    write_json(&out_path(settings, "bench.json"), report)?;
    let opt = |v: Option<f64>| v.map(format_f64).unwrap_or_default();
    let rows: Vec<Vec<String>> = report
        .cells
        .iter()
        .map(|c| {
            vec![
                report.table.clone(),
                c.label.clone(),
                c.n.to_string(),
                c.p.to_string(),
                c.structure.clone(),
                opt(c.rho),
                c.reps.to_string(),
                c.converged.to_string(),
                format_f64(c.mean_frobenius),
                format_f64(c.sd_frobenius),
                format_f64(c.mean_spectral),
                format_f64(c.sd_spectral),
                format_f64(c.mean_support_size),
                opt(c.reference_frobenius),
                opt(c.reference_spectral),
                opt(c.scale),
                opt(c.mean_raw_frobenius),
            ]
        })
        .collect();
    write_csv(
        &out_path(settings, "bench.csv"),
        &[
            "table",
            "cell",
            "n",
            "p",
            "structure",
            "rho",
            "reps",
            "converged",
            "mean_frobenius",
            "sd_frobenius",
            "mean_spectral",
            "sd_spectral",
            "mean_support_size",
            "reference_frobenius",
            "reference_spectral",
            "scale",
            "mean_raw_frobenius",
        ],
        &rows,
    )
}
