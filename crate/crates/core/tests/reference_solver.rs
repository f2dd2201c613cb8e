use qcavity::reference::{interior_divergence, solve_reference, ReferenceConfig};

#[test]
fn converged_field_satisfies_boundary_rows_and_gauge() {
    let cfg = ReferenceConfig::new(10.0, 32, 32);
    let (g, report) = solve_reference(&cfg).unwrap();
    assert!(report.residual < cfg.steady_tol);
    assert!(interior_divergence(&g) < 10.0 * cfg.steady_tol);
    assert_eq!(g.p[g.index(0, 0)], 0.0);
    for i in 0..g.nx {
        let top = g.index(i, g.ny - 1);
        assert_eq!((g.u[top], g.v[top]), (1.0, 0.0));
        let bottom = g.index(i, 0);
        assert_eq!((g.u[bottom], g.v[bottom]), (0.0, 0.0));
    }
    for j in 0..g.ny - 1 {
        for i in [0, g.nx - 1] {
            let k = g.index(i, j);
            assert_eq!((g.u[k], g.v[k]), (0.0, 0.0));
        }
    }
    // the primary vortex turns clockwise: u < 0 in the lower half of the centerline
    assert!(g.u[g.index(16, 8)] < 0.0);
}

#[test]
fn stokes_limit_is_mirror_symmetric() {
    let mut cfg = ReferenceConfig::new(1.0, 24, 24);
    cfg.steady_tol = 1e-4;
    let (g, _) = solve_reference(&cfg).unwrap();
    let umax = g.u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut defect: f64 = 0.0;
    for j in 0..g.ny {
        for i in 0..g.nx {
            defect = defect.max((g.u[g.index(i, j)] - g.u[g.index(g.nx - 1 - i, j)]).abs());
        }
    }
    assert!(defect / umax <= 2e-2, "symmetry defect {}", defect / umax);
}

#[test]
fn invalid_settings_are_config_errors() {
    let mut cfg = ReferenceConfig::new(10.0, 32, 32);
    cfg.beta = 0.0;
    assert!(solve_reference(&cfg).unwrap_err().is_usage());
    assert!(solve_reference(&ReferenceConfig::new(-1.0, 32, 32)).unwrap_err().is_usage());
}
