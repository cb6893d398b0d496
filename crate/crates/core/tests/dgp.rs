use ivcov_core::{
    bound_covariances, build_covariance, generate_intervals, CovSpec, CovStructure, Dgp, DgpSpec, NoiseFamily,
};

fn spec(dgp: Dgp, n: usize, p: usize) -> DgpSpec {
    DgpSpec {
        dgp,
        cov: CovSpec {
            p,
            structure: CovStructure::Ar1 { rho: 0.5 },
        },
        n,
        seed: 11,
        replication: 0,
    }
}

#[test]
fn constant_width_bounds_share_a_covariance() {
    for dgp in [Dgp::Dgp1 { constant: 3.0 }, Dgp::Dgp2 { constant: 0.5 }] {
        let data = generate_intervals(&spec(dgp, 200, 6)).unwrap();
        let (s_l, s_u) = bound_covariances(&data).unwrap();
        let diff = (&s_l - &s_u).frobenius_norm();
        assert!(diff <= 1e-12, "{dgp:?}: {diff}");
    }
}

#[test]
fn random_width_inflates_only_the_diagonal() {
    for noise in NoiseFamily::DEFAULTS {
        let s = spec(Dgp::Dgp3 { noise }, 100_000, 5);
        let truth = build_covariance(&s.cov).unwrap();
        let (s_l, s_u) = bound_covariances(&generate_intervals(&s).unwrap()).unwrap();
        let var = noise.variance();
        for i in 0..5 {
            let want = truth.get(i, i) + var;
            for got in [s_l.get(i, i), s_u.get(i, i)] {
                assert!((got - want).abs() <= 0.05 * want, "{}: {got} vs {want}", noise.label());
            }
            for j in 0..5 {
                if j != i {
                    assert!((s_l.get(i, j) - truth.get(i, j)).abs() < 0.05, "{}", noise.label());
                }
            }
        }
    }
}
