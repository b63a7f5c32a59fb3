#![allow(dead_code)]

use hcv_dynamics::{ModelParameters, ParamName, State};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..=hi.ln())).exp()
}

fn table(rng: &mut ChaCha8Rng, name: ParamName) -> f64 {
    let (lo, hi) = name.typical_range().expect("typical range");
    log_uniform(rng, lo, hi)
}

/// Parameters drawn across the typical ranges, kept only when they satisfy
/// the model's standing assumptions r_I <= r_T, s <= d_T T_max, d_I >= d_T.
///
/// Rates with a range are log-uniform; r_I shares r_T's range; q is uniform
/// on [0, 1]; efficacies uniform on [0, 0.99].
pub fn random_params(rng: &mut ChaCha8Rng) -> ModelParameters {
    loop {
        let p = random_params_unrestricted(rng);
        if p.r_i <= p.r_t && p.s <= p.d_t * p.t_max && p.d_i >= p.d_t {
            return p;
        }
    }
}

/// Same draw as [`random_params`] without the standing assumptions.
pub fn random_params_unrestricted(rng: &mut ChaCha8Rng) -> ModelParameters {
    ModelParameters {
        s: table(rng, ParamName::S),
        r_t: table(rng, ParamName::RT),
        r_i: table(rng, ParamName::RT),
        d_t: table(rng, ParamName::DT),
        d_i: table(rng, ParamName::DI),
        t_max: table(rng, ParamName::TMax),
        beta: table(rng, ParamName::Beta),
        p: table(rng, ParamName::P),
        c: table(rng, ParamName::C),
        q: rng.gen_range(0.0..=1.0),
        eta: rng.gen_range(0.0..0.99),
        epsilon: rng.gen_range(0.0..0.99),
    }
}

/// Strictly positive state with each component log-uniform on [lo, hi].
pub fn random_state(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> State {
    State::new(
        log_uniform(rng, lo, hi),
        log_uniform(rng, lo, hi),
        log_uniform(rng, lo, hi),
    )
}

/// Uniform point of `{T + I ≤ n_bound, V ≤ v_bound}` with all components positive.
pub fn random_state_in_region(rng: &mut ChaCha8Rng, n_bound: f64, v_bound: f64) -> State {
    let t = n_bound * rng.gen_range(1e-9..1.0);
    let i = (n_bound - t) * rng.gen_range(1e-9..1.0);
    let v = v_bound * rng.gen_range(1e-9..1.0);
    State::new(t, i, v)
}

/// Parameter sets inside the standing assumptions with R0 < 1 - q/δ on
/// which dL/dt for the E⁰ Lyapunov function is positive somewhere in the
/// sampling region.
pub fn e0_counterexamples() -> Vec<ModelParameters> {
    vec![
        ModelParameters {
            s: 262.40096820230707,
            r_t: 1.6007648729419712,
            r_i: 0.01859755987844354,
            d_t: 0.001095278264600961,
            d_i: 0.35065807161296897,
            t_max: 4178822.0542592835,
            beta: 2.8633291346649318e-8,
            p: 19.25056200963421,
            c: 20.10822610002637,
            q: 0.13827672676134675,
            eta: 0.8479733855865433,
            epsilon: 0.6645365195474653,
        },
        ModelParameters {
            s: 397.15920305877484,
            r_t: 2.9528954284965203,
            r_i: 0.1013713257298181,
            d_t: 0.004045603127579297,
            d_i: 0.03224278184032263,
            t_max: 6201271.344150341,
            beta: 1.4768780974582035e-8,
            p: 2.1506546487828238,
            c: 1.0404829193918526,
            q: 0.3433657595233897,
            eta: 0.8901411181902954,
            epsilon: 0.9700778632878777,
        },
    ]
}

/// Sets on the E* slice r_I = r_T, s = d_T T_max, δ = d_T with q > 0 on
/// which dL/dt for the E* Lyapunov function is positive somewhere.
pub fn estar_slice_counterexamples() -> Vec<ModelParameters> {
    vec![
        ModelParameters {
            s: 3886908.526785426,
            r_t: 0.03225303917118216,
            r_i: 0.03225303917118216,
            d_t: 0.6639316580478145,
            d_i: 0.17490936293175982,
            t_max: 5854380.461709361,
            beta: 5.206768372209183e-7,
            p: 12.544563245240743,
            c: 1.3699169432491856,
            q: 0.48902229511605466,
            eta: 0.823531705910707,
            epsilon: 0.17837941692163878,
        },
        ModelParameters {
            s: 6533950.9769326355,
            r_t: 0.036223476055928724,
            r_i: 0.036223476055928724,
            d_t: 0.8184673604040063,
            d_i: 0.2319182119345658,
            t_max: 7983153.99371258,
            beta: 6.426048789690784e-7,
            p: 27.003381173738624,
            c: 1.2696515146426643,
            q: 0.5865491484694404,
            eta: 0.047335107957006066,
            epsilon: 0.7025591902820314,
        },
    ]
}
