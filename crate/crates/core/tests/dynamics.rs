use hcv_dynamics::equilibria::Regime;
use hcv_dynamics::sweep::{Axis, Output, Scale};
use hcv_dynamics::tolerances::rel_diff;
use hcv_dynamics::{
    asymptotic_bounds, check_invariants, integrate, run_sweep, uninfected_equilibrium, IntegratorConfig, Method,
    ModelParameters, ParamName, State, SweepSpec,
};

#[test]
fn e0_is_a_fixed_point() {
    let p = ModelParameters::S1;
    let e0 = uninfected_equilibrium(&p).unwrap().state;
    let traj = integrate(&p, &e0, &IntegratorConfig::new(Method::rk45(1e-10, 1e-12), 100.0)).unwrap();
    for st in &traj.states {
        assert!(rel_diff(st.t, e0.t) <= 1e-9, "{} vs {}", st.t, e0.t);
        assert_eq!((st.i, st.v), (0.0, 0.0));
    }
    let bounds = asymptotic_bounds(&p, &e0).unwrap();
    assert!(check_invariants(&traj, &bounds).is_clean());
}

#[test]
fn fixed_and_adaptive_agree() {
    let p = ModelParameters::S1;
    let fixed = integrate(
        &p,
        &State::REFERENCE_INITIAL,
        &IntegratorConfig::new(Method::Rk4 { step: 1e-3 }, 50.0),
    )
    .unwrap();
    // I and V decay to about 5e-11, so the absolute tolerance must sit far below them.
    let adaptive = integrate(
        &p,
        &State::REFERENCE_INITIAL,
        &IntegratorConfig::new(Method::rk45(1e-10, 1e-20), 50.0),
    )
    .unwrap();
    let a = fixed.last().unwrap().1.to_array();
    let b = adaptive.last().unwrap().1.to_array();
    for k in 0..3 {
        assert!(rel_diff(a[k], b[k]) <= 1e-6, "component {k}: {} vs {}", a[k], b[k]);
    }
}

#[test]
fn s1_full_run_is_clean() {
    let p = ModelParameters::S1;
    let traj = integrate(&p, &State::REFERENCE_INITIAL, &IntegratorConfig::default()).unwrap();
    let bounds = asymptotic_bounds(&p, &State::REFERENCE_INITIAL).unwrap();
    assert!(traj.violation_log.is_empty());
    let summary = check_invariants(&traj, &bounds);
    assert_eq!(summary.negativity.count, 0);
    assert_eq!(summary.benign_negativity.count, 0);
}

#[test]
fn s1_v_bound_uses_production_branch() {
    let p = ModelParameters::S1;
    let b = asymptotic_bounds(&p, &State::REFERENCE_INITIAL).unwrap();
    let branch = (1.0 - p.epsilon) * p.p * b.t_tilde0 / p.c;
    assert!(branch > 1.0);
    assert_eq!(b.lambda0, branch);
}

#[test]
fn equal_growth_bound_exceeds_logistic_point() {
    let p = ModelParameters {
        r_i: ModelParameters::S1.r_t,
        ..ModelParameters::S1
    };
    let b = asymptotic_bounds(&p, &State::REFERENCE_INITIAL).unwrap();
    let logistic = p.t_max * (1.0 - p.d_t / p.r_t);
    assert!(b.t_tilde0 > logistic);
    assert!(rel_diff(b.t_tilde0, logistic) < 1e-3);
    assert!(b.applicable);
}

#[test]
fn clearance_sweep_changes_regime_at_most_once() {
    let spec = SweepSpec {
        base: ModelParameters::S1,
        axis1: Axis {
            param: ParamName::C,
            lo: 0.8,
            hi: 22.0,
            n: 60,
            scale: Scale::Log,
        },
        axis2: None,
        outputs: vec![Output::R0, Output::Regime],
    };
    let grid = run_sweep(&spec).unwrap();
    let regimes: Vec<Regime> = grid.cells.iter().map(|c| c.values.regime.unwrap()).collect();
    let changes = regimes.windows(2).filter(|w| w[0] != w[1]).count();
    assert!(changes <= 1, "{regimes:?}");
    assert_eq!(*regimes.last().unwrap(), Regime::NoInfectedEq);
    if changes == 1 {
        assert_eq!(regimes[0], Regime::UniqueInfectedEq);
    }
    let r0: Vec<f64> = grid.cells.iter().map(|c| c.values.r0.unwrap()).collect();
    assert!(r0.windows(2).all(|w| w[1] < w[0]));
}
