use approx::assert_abs_diff_eq;
use nonlocal_nt::grid::{BoundaryCondition, Grid};
use nonlocal_nt::harness::{
    entropy_residuals, l1_error, monitor_csv, observed_rate, report_csv, restrict_to_coarse, run_simulation,
    snapshot_csv, ConvergenceReport, ConvergenceRow, Experiment, InitialSpec,
};
use nonlocal_nt::models::ModelKind;
use nonlocal_nt::schemes::SchemeId;
use nonlocal_nt::state::SystemState;

#[test]
fn restriction_averages_pairs() {
    let fine = Grid::new(0.0, 1.0, 8).unwrap();
    let coarse = Grid::new(0.0, 1.0, 4).unwrap();
    let s = SystemState::new(vec![vec![1.0, 3.0, 2.0, 2.0, 0.0, 4.0, 5.0, 7.0]], 0.0).unwrap();
    let r = restrict_to_coarse(&s, &fine, &coarse).unwrap();
    assert_eq!(r.species(0), &[2.0, 2.0, 2.0, 6.0]);
    assert_abs_diff_eq!(r.total_mass(&coarse)[0], s.total_mass(&fine)[0], epsilon = 1e-15);
    let c = SystemState::constant(&[0.7], 8).unwrap();
    assert_eq!(restrict_to_coarse(&c, &fine, &coarse).unwrap().species(0), &[0.7; 4]);
    assert!(restrict_to_coarse(&s, &fine, &Grid::new(0.0, 1.0, 6).unwrap()).is_err());
    assert!(restrict_to_coarse(&s, &fine, &Grid::new(0.0, 2.0, 4).unwrap()).is_err());
}

#[test]
fn l1_error_examples() {
    let g = Grid::new(0.0, 1.0, 4).unwrap();
    let a = SystemState::new(vec![vec![1.0; 4], vec![2.0; 4]], 0.0).unwrap();
    assert_eq!(l1_error(&a, &a, &g).unwrap(), 0.0);
    let mut v = a.values().to_vec();
    v[0][2] += 0.5;
    let b = SystemState::new(v, 0.0).unwrap();
    assert_abs_diff_eq!(l1_error(&a, &b, &g).unwrap(), 0.25 * 0.5, epsilon = 1e-15);
    let c = SystemState::new(vec![vec![1.1; 4], vec![2.1; 4]], 0.0).unwrap();
    assert_abs_diff_eq!(l1_error(&a, &c, &g).unwrap(), 0.2, epsilon = 1e-14);
    assert!(l1_error(&a, &SystemState::constant(&[1.0], 4).unwrap(), &g).is_err());
    assert_abs_diff_eq!(observed_rate(4e-2, 1e-2), 2.0, epsilon = 1e-15);
}

fn small(model: ModelKind, data: &str, t: f64) -> Experiment {
    let mut e = Experiment::new(model, data, [-1.0, 1.0], t);
    e.levels = vec![0, 1];
    e.reference_level = 3;
    e
}

#[test]
fn zero_horizon_returns_initial_averages() {
    let exp = small(ModelKind::Arrhenius, "arrhenius-jump", 0.0);
    let run = run_simulation(&exp, SchemeId::NtV2, 1).unwrap();
    assert_eq!(run.steps, 0);
    let init = nonlocal_nt::state::init_cell_averages(&exp.initial.build().unwrap(), &run.grid).unwrap();
    assert_eq!(run.state.values(), init.values());
    assert_eq!(run.log.entries.len(), 1);
}

#[test]
fn constant_data_stays_constant() {
    let mut exp = small(ModelKind::KeyfitzKranzer, "kk-smooth", 0.1);
    exp.initial = InitialSpec::Inline {
        exprs: vec!["0.2".into(), "0.1".into()],
        breakpoints: vec![],
    };
    for scheme in SchemeId::ALL {
        let run = run_simulation(&exp, scheme, 1).unwrap();
        assert!(run.steps > 0);
        for (k, c) in [0.2, 0.1].into_iter().enumerate() {
            for v in run.state.species(k) {
                assert_abs_diff_eq!(*v, c, epsilon = 1e-14);
            }
        }
        for e in &run.log.entries {
            assert_abs_diff_eq!(e.total_variation[0], 0.0, epsilon = 1e-13);
        }
        assert_abs_diff_eq!(run.state.time(), 0.1);
    }
}

#[test]
fn monitors_track_time_and_mass() {
    let exp = small(ModelKind::Arrhenius, "arrhenius-smooth", 0.15);
    let run = run_simulation(&exp, SchemeId::NtV1, 2).unwrap();
    let times: Vec<f64> = run.log.entries.iter().map(|e| e.time).collect();
    assert!(times.windows(2).all(|w| w[1] > w[0]));
    assert_eq!(*times.last().unwrap(), 0.15);
    assert!(run.log.max_relative_mass_drift() < 1e-12);
    assert_eq!(run.log.cfl_violations, 0);
    let model = exp.build_model().unwrap();
    let csv = monitor_csv(model.as_ref(), &run.log);
    assert_eq!(csv.lines().count(), run.log.entries.len() + 1);
    assert!(csv.starts_with("step,time,mass_rho,min_rho,max_rho,tv_rho,cfl_number\n"));
    let snap = snapshot_csv(model.as_ref(), &run.grid, &run.state);
    assert_eq!(snap.lines().count(), run.grid.cells() + 1);
}

#[test]
fn garz_snapshot_has_marker_column() {
    let exp = small(ModelKind::Garz, "garz-jump", 0.0);
    let run = run_simulation(&exp, SchemeId::NtV1, 0).unwrap();
    let model = exp.build_model().unwrap();
    let snap = snapshot_csv(model.as_ref(), &run.grid, &run.state);
    let mut lines = snap.lines();
    assert_eq!(lines.next().unwrap(), "x,rho,q,w");
    let first: Vec<f64> = lines.next().unwrap().split(',').map(|s| s.parse().unwrap()).collect();
    assert_abs_diff_eq!(first[3], 0.35, epsilon = 1e-12);
}

#[test]
fn report_csv_layout() {
    let report = ConvergenceReport {
        rows: vec![
            ConvergenceRow {
                scheme: SchemeId::NtV1,
                level: 0,
                dx: 0.05,
                l1_error: 4e-2,
                rate: None,
            },
            ConvergenceRow {
                scheme: SchemeId::NtV1,
                level: 1,
                dx: 0.025,
                l1_error: 1e-2,
                rate: Some(2.0),
            },
        ],
        lambda: 0.2,
        reference_scheme: SchemeId::NtV2,
        reference_level: 9,
        runtimes: vec![0.0, 0.0],
    };
    assert_eq!(
        report_csv(&report),
        "scheme,n,dx,l1_error,rate\nnt-v1,0,0.05,0.04,\nnt-v1,1,0.025,0.01,2\n"
    );
}

#[test]
fn strict_cfl_aborts() {
    let mut exp = small(ModelKind::Arrhenius, "arrhenius-smooth", 0.05);
    exp.cfl = 0.2;
    exp.strict_cfl = true;
    assert!(run_simulation(&exp, SchemeId::NtV1, 1).is_ok());
    // A box that underestimates the speed makes the monitor trip.
    exp.initial = InitialSpec::Inline {
        exprs: vec!["0.5+0.4*sin(pi*x)".into()],
        breakpoints: vec![],
    };
    exp.model = ModelKind::NonlocalEuler;
    exp.eta = Some(0.05);
    exp.initial = InitialSpec::Inline {
        exprs: vec!["0.5".into(), "0.1+2*ind(x,-0.5,0.5)*(1-4*x^2)^4".into()],
        breakpoints: vec![-0.5, 0.5],
    };
    exp.t_final = 0.5;
    let err = run_simulation(&exp, SchemeId::NtV1, 1);
    match err {
        Err(e) => assert!(e.is_numerical(), "{e}"),
        Ok(r) => assert_eq!(r.log.cfl_violations, 0),
    }
}

#[test]
fn entropy_residual_trivial_levels() {
    let exp = small(ModelKind::Arrhenius, "arrhenius-jump", 0.2);
    for zeta in [-1.0, 2.0, 0.6] {
        let r = entropy_residuals(&exp, SchemeId::NtV2, 2, &[zeta]).unwrap();
        assert!(
            r.iter().all(|&v| v <= 1e-10),
            "zeta {zeta}: {:?}",
            r.iter().cloned().fold(f64::MIN, f64::max)
        );
    }
    let multi = small(ModelKind::Multilane, "multilane-smooth", 0.05);
    assert!(entropy_residuals(&multi, SchemeId::NtV1, 0, &[0.5]).is_err());
}

#[test]
fn validation_catches_bad_experiments() {
    let mut e = small(ModelKind::Arrhenius, "arrhenius-smooth", 0.1);
    e.reference_level = 1;
    assert!(e.validate().is_err());
    let mut e = small(ModelKind::Arrhenius, "arrhenius-smooth", 0.1);
    e.eta = Some(0.21);
    assert!(e.validate().is_err());
    let mut e = small(ModelKind::Arrhenius, "kk-smooth", 0.1);
    e.levels = vec![0];
    assert!(e.validate().is_err());
    let mut e = small(ModelKind::Arrhenius, "arrhenius-smooth", 0.1);
    e.dx0 = 0.3;
    assert!(e.validate().is_err());
    let json = r#"{"model":"arrhenius","initial":"arrhenius-smooth","domain":[-1,1],"t_final":0.1,"viscosity":1}"#;
    assert!(serde_json::from_str::<Experiment>(json).is_err());
    let _ = BoundaryCondition::Periodic;
}
