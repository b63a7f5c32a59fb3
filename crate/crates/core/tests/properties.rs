use hcv_dynamics::equilibria::infected_state_from_t;
use hcv_dynamics::model::relative_residual;
use hcv_dynamics::roots::bisect;
use hcv_dynamics::stability::{lyapunov_e0, lyapunov_estar, routh_hurwitz, LocalClass};
use hcv_dynamics::sweep::{Axis, Output, Scale};
use hcv_dynamics::tolerances::rel_diff;
use hcv_dynamics::{
    infected_equilibrium, jacobian, r0, r0_checked, run_sweep, threshold_locate, uninfected_equilibrium, vector_field,
    ModelParameters, ParamName, State, SweepSpec,
};
use proptest::prelude::*;

fn log_range(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo.ln()..hi.ln()).prop_map(f64::exp)
}

/// Published ranges, restricted to r_I <= r_T, s <= d_T T_max, d_I >= d_T.
fn params() -> impl Strategy<Value = ModelParameters> {
    (
        (
            log_range(1.0, 1.8e5),
            log_range(2e-3, 3.4),
            0.0..1.0f64,
            log_range(1e-3, 1.4e-2),
        ),
        (
            log_range(1e-3, 0.5),
            log_range(4e6, 1.3e7),
            log_range(1e-8, 1e-6),
            log_range(0.1, 44.0),
        ),
        (log_range(0.8, 22.0), 0.0..1.0f64, 0.0..0.99f64, 0.0..0.99f64),
    )
        .prop_map(
            |((s, r_t, ri_frac, d_t), (d_i, t_max, beta, p), (c, q, eta, epsilon))| ModelParameters {
                s,
                r_t,
                r_i: r_t * ri_frac,
                d_t,
                d_i,
                t_max,
                beta,
                p,
                c,
                q,
                eta,
                epsilon,
            },
        )
        .prop_filter("standing assumptions", |p| p.s <= p.d_t * p.t_max && p.d_i >= p.d_t)
}

fn state() -> impl Strategy<Value = State> {
    (log_range(1.0, 1e8), log_range(1.0, 1e8), log_range(1.0, 1e9)).prop_map(|(t, i, v)| State::new(t, i, v))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn jacobian_matches_central_differences(p in params(), st in state()) {
        let j = jacobian(&p, &st);
        let x = st.to_array();
        let f0 = vector_field(&p, &st).unwrap().to_array();
        for col in 0..3 {
            let h = 1e-6 * x[col].abs().max(1.0);
            let mut up = x;
            let mut dn = x;
            up[col] += h;
            dn[col] -= h;
            let fu = vector_field(&p, &State::from_array(up)).unwrap().to_array();
            let fd = vector_field(&p, &State::from_array(dn)).unwrap().to_array();
            for row in 0..3 {
                let fd_entry = (fu[row] - fd[row]) / (2.0 * h);
                // Rounding in the difference quotient is about ε|f|/h.
                let scale = j[row][col].abs() + (fu[row].abs() + fd[row].abs() + f0[row].abs()) / h * 1e-9 + 1e-12;
                prop_assert!((fd_entry - j[row][col]).abs() <= 1e-5 * scale,
                    "entry ({row},{col}): analytic {} vs fd {}", j[row][col], fd_entry);
            }
        }
    }

    #[test]
    fn r0_increases_with_beta(p in params(), k in 1.01..10.0f64) {
        let hi = ModelParameters { beta: p.beta * k, ..p };
        prop_assert!(r0(&hi).unwrap() > r0(&p).unwrap());
    }

    #[test]
    fn lyapunov_e0_without_infection(p in params(), t in log_range(1.0, 1e8)) {
        let t0 = uninfected_equilibrium(&p).unwrap().state.t;
        let e = lyapunov_e0(&p, &State::new(t, 0.0, 0.0)).unwrap();
        let expected = -(p.s / (t * t0) + p.r_t / p.t_max) * (t - t0).powi(2);
        prop_assert!(e.sample.dl_dt <= e.sample.scale * 1e-12);
        prop_assert!((e.collected - expected).abs() <= 1e-12 * expected.abs().max(1e-300));
    }

    #[test]
    fn infected_equilibria_are_consistent(p in params()) {
        let rep = infected_equilibrium(&p).unwrap();
        for e in &rep.candidates {
            prop_assert!(e.residual_norm <= 1e-8);
            prop_assert!(e.state.is_positive());
            prop_assert_eq!(e.state.v, p.production() * e.state.i / p.c);
            prop_assert_eq!(infected_state_from_t(&p, e.state.t).unwrap(), e.state);
        }
        if let Some(e) = rep.unique() {
            prop_assert!(rel_diff(rep.radical_t_star.unwrap(), e.state.t) <= 1e-9);
        }
    }

    #[test]
    fn am_gm_term_nonpositive(st in state(), es in state()) {
        // T*/T · (V T I*)/(I V* T*) · (V* I)/(I* V) = 1, so the sum is at least 3.
        let x = es.t / st.t;
        let y = st.v * st.t * es.i / (st.i * es.v * es.t);
        let z = es.v * st.i / (es.i * st.v);
        prop_assert!(3.0 - x - y - z <= 1e-12 * (x + y + z));
    }

    #[test]
    fn lyapunov_estar_vanishes_only_at_equilibrium(st in state()) {
        let p = ModelParameters::S2;
        let es = infected_equilibrium(&p).unwrap().unique().unwrap().state;
        let s = lyapunov_estar(&p, &st, &es).unwrap();
        prop_assert!(s.l >= 0.0);
        prop_assert_eq!(lyapunov_estar(&p, &es, &es).unwrap().l, 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn t0_matches_bisection(p in params()) {
        let t0 = uninfected_equilibrium(&p).unwrap().state.t;
        let g = |t: f64| p.s + p.r_t * t * (1.0 - t / p.t_max) - p.d_t * t;
        let oracle = bisect(g, 0.0, 2.0 * p.t_max, 1e-15).unwrap();
        prop_assert!(rel_diff(t0, oracle) <= 1e-10, "{} vs {}", t0, oracle);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn r0_closed_form_equals_spectral_radius(p in params()) {
        let (closed, ngm) = r0_checked(&p).unwrap();
        prop_assert!((closed - ngm.rho).abs() <= 1e-12 * closed.max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn routh_hurwitz_matches_root_signs(a1 in -50.0..50.0f64, a2 in -50.0..50.0f64, a3 in -50.0..50.0f64) {
        let rh = routh_hurwitz(a1, a2, a3);
        prop_assume!([a1, a3, rh.delta2].iter().all(|x| x.abs() > 1e-9));
        prop_assert_ne!(rh.class, LocalClass::Marginal);
        prop_assert_eq!(rh.class == LocalClass::LocAsympStable, rh.max_real_part < 0.0);
    }
}

fn beta_spec(base: ModelParameters) -> SweepSpec {
    SweepSpec {
        base,
        axis1: Axis {
            param: ParamName::Beta,
            lo: 1e-9,
            hi: 1e-5,
            n: 17,
            scale: Scale::Log,
        },
        axis2: None,
        outputs: vec![Output::R0, Output::Regime, Output::EstarT, Output::Delta2],
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn sweeps_are_deterministic(p in params()) {
        let spec = beta_spec(p);
        prop_assert_eq!(run_sweep(&spec).unwrap(), run_sweep(&spec).unwrap());
    }

    #[test]
    fn threshold_agrees_with_sweep_signs(p in params()) {
        let spec = beta_spec(p);
        let grid = run_sweep(&spec).unwrap();
        let above: Vec<bool> = grid.cells.iter().map(|c| c.values.r0.unwrap() > 1.0).collect();
        let found = threshold_locate(&spec, hcv_dynamics::sweep::ThresholdTarget::R0EqOne).unwrap();
        match found.value() {
            Some(b) => {
                let k = above.windows(2).position(|w| w[0] != w[1]).unwrap();
                prop_assert!(grid.axis1[k] <= b && b <= grid.axis1[k + 1]);
            }
            None => prop_assert!(above.iter().all(|x| *x == above[0])),
        }
    }
}

#[test]
fn residual_is_zero_scale_free_at_origin_without_influx() {
    let p = ModelParameters {
        s: 0.0,
        ..ModelParameters::S1
    };
    assert_eq!(relative_residual(&p, &State::new(0.0, 0.0, 0.0)), 0.0);
}
