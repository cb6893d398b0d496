use std::path::PathBuf;

use clap::Args;
use ivcov_core::eigh;
use ivcov_core::io::{format_f64, read_sym_matrix};
use ivcov_core::SymMatrix;

use crate::config::Settings;
use crate::error::{CliError, CliResult};
use crate::out_path;
use crate::output::{ensure_dir, write_csv};

#[derive(Debug, Clone, Args)]
pub struct SpectrumArgs {
    /// Square symmetric matrix CSV, e.g. the sigma.csv of an estimate run.
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,
    /// Optional reference matrix; its curves are written alongside.
    #[arg(long, value_name = "FILE")]
    pub truth: Option<PathBuf>,
}

/// Writes `eigenvalues.csv` (index, eigenvalue in descending order) and
/// `diagonal.csv` (index, diagonal entry), with 1-based indices.
pub fn run(args: &SpectrumArgs, settings: &Settings) -> CliResult<()> {
    let (_, m) = read_sym_matrix(&args.input)?;
    let truth = match &args.truth {
        Some(path) => {
            let (_, t) = read_sym_matrix(path)?;
            if t.dim() != m.dim() {
                return Err(CliError::usage(format!(
                    "reference is {}x{}, input is {}x{}",
                    t.dim(),
                    t.dim(),
                    m.dim(),
                    m.dim()
                )));
            }
            Some(t)
        }
        None => None,
    };
    let curves = |a: &SymMatrix| -> CliResult<(Vec<f64>, Vec<f64>)> { Ok((eigh(a)?.values, a.diagonal())) };
    let (eig, diag) = curves(&m)?;
    let reference = truth.as_ref().map(curves).transpose()?;

    let rows = |main: &[f64], other: Option<&[f64]>| -> Vec<Vec<String>> {
        main.iter()
            .enumerate()
            .map(|(k, &v)| {
                let mut row = vec![(k + 1).to_string(), format_f64(v)];
                if let Some(o) = other {
                    row.push(format_f64(o[k]));
                }
                row
            })
            .collect()
    };
    ensure_dir(&settings.out)?;
    let (eh, dh): (&[&str], &[&str]) = if reference.is_some() {
        (&["index", "eigenvalue", "reference"], &["index", "diagonal", "reference"])
    } else {
        (&["index", "eigenvalue"], &["index", "diagonal"])
    };
    write_csv(
        &out_path(settings, "eigenvalues.csv"),
        eh,
        &rows(&eig, reference.as_ref().map(|r| r.0.as_slice())),
    )?;
    write_csv(
        &out_path(settings, "diagonal.csv"),
        dh,
        &rows(&diag, reference.as_ref().map(|r| r.1.as_slice())),
    )
}
