use ivcov_cli::bench::run_hf_grid;
use ivcov_cli::config::{CommonArgs, Settings};

fn settings(reps: usize) -> Settings {
    Settings::resolve(&CommonArgs {
        seed: Some(21),
        reps: Some(reps),
        ..CommonArgs::default()
    })
    .unwrap()
}

/// Number of decreases along `values`.
fn inversions(values: &[f64]) -> usize {
    values.windows(2).filter(|w| w[1] < w[0]).count()
}

#[test]
fn error_grows_with_dimension_and_correlation() {
    let dims = [100, 200, 300];
    let rhos = [0.1, 0.3, 0.6];
    let cells: Vec<(usize, f64)> = dims.iter().flat_map(|&p| rhos.iter().map(move |&r| (p, r))).collect();
    let report = run_hf_grid(&cells, &settings(5)).unwrap();
    let err = |p: usize, r: f64| {
        report
            .cells
            .iter()
            .find(|c| c.p == p && c.rho == Some(r))
            .unwrap()
            .mean_frobenius
    };
    for &p in &dims {
        let line: Vec<f64> = rhos.iter().map(|&r| err(p, r)).collect();
        assert!(inversions(&line) <= 1, "p={p}: {line:?}");
    }
    for &r in &rhos {
        let line: Vec<f64> = dims.iter().map(|&p| err(p, r)).collect();
        assert!(inversions(&line) <= 1, "rho={r}: {line:?}");
    }
    for c in &report.cells {
        assert_eq!(c.converged, c.reps);
        assert!(c.scale.unwrap() > 0.0);
        for rep in &c.variants[0].replications {
            assert!(rep.min_eigenvalue >= 1e-4 - 1e-8);
        }
    }
}
