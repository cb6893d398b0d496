use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use ivcov_core::io::{read_interval_pair, write_sym_matrix};
use ivcov_core::{
    admm_solve, bound_covariances, select_lambda_cv, AdmmConfig, CvOutcome, KktReport, LambdaRule, SeedStream,
    StreamRole,
};
use serde::Serialize;

use crate::config::Settings;
use crate::error::{CliError, CliResult};
use crate::out_path;
use crate::output::{ensure_dir, write_json};

#[derive(Debug, Clone, Args)]
pub struct EstimateArgs {
    /// Interval data stem; reads STEM.lower.csv and STEM.upper.csv.
    #[arg(long, value_name = "STEM")]
    pub input: PathBuf,
    /// Refuse inputs with more variables than this.
    #[arg(long = "max-dim", default_value_t = 2000)]
    pub max_dim: usize,
}

#[derive(Debug, Serialize)]
struct Diagnostics<'a> {
    command: &'static str,
    settings: &'a Settings,
    input: String,
    n: usize,
    p: usize,
    lambda_rule: &'a LambdaRule,
    lambda: f64,
    cross_validation: Option<CvOutcome>,
    iterations: usize,
    converged: bool,
    min_eigenvalue: f64,
    support_size: usize,
    kkt: KktReport,
    primal_residual_trace: &'a [f64],
    change_trace: &'a [f64],
    elapsed_seconds: f64,
}

pub fn run(args: &EstimateArgs, settings: &Settings) -> CliResult<()> {
    let (names, data) = read_interval_pair(&args.input)?;
    if data.p() > args.max_dim {
        return Err(CliError::usage(format!(
            "input has {} variables, above --max-dim {}",
            data.p(),
            args.max_dim
        )));
    }
    let rule = settings.single_rule()?;
    let mut rng = SeedStream::new(settings.seed).rng(0, StreamRole::FoldSplit);
    let (lambda, cv) = match &rule {
        LambdaRule::CrossValidated { grid, folds } => {
            let out = select_lambda_cv(&data, grid, *folds, &settings.admm, &mut rng)?;
            (out.lambda, Some(out))
        }
        other => (other.resolve(&data, &settings.admm, &mut rng)?, None),
    };

    let start = Instant::now();
    let (s_l, s_u) = bound_covariances(&data)?;
    let config = AdmmConfig {
        lambda,
        ..settings.admm.clone()
    };
    let res = admm_solve(&s_l, &s_u, &config, None)?;
    let elapsed = start.elapsed().as_secs_f64();

    ensure_dir(&settings.out)?;
    write_sym_matrix(&out_path(settings, "sigma.csv"), &names, res.estimate())?;
    let diag = Diagnostics {
        command: "estimate",
        settings,
        input: args.input.display().to_string(),
        n: data.n(),
        p: data.p(),
        lambda_rule: &rule,
        lambda,
        cross_validation: cv,
        iterations: res.iterations,
        converged: res.converged,
        min_eigenvalue: res.min_eigenvalue,
        support_size: res.support_size(),
        kkt: res.kkt,
        primal_residual_trace: &res.primal_residual_trace,
        change_trace: &res.change_trace,
        elapsed_seconds: elapsed,
    };
    write_json(&out_path(settings, "diagnostics.json"), &diag)?;
    if !res.converged {
        return Err(CliError::NonConvergence(format!(
            "no convergence within {} iterations; results written anyway",
            config.max_iter
        )));
    }
    Ok(())
}
