//! Time integration with runtime checks of positivity and of the a-priori
//! bounds on T + I and V.

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::rhs;
use crate::params::{derive_constants, ModelParameters, State};
use crate::tolerances::BOUND_SLACK;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    /// Classical fourth-order Runge–Kutta with a fixed step (days).
    Rk4 { step: f64 },
    /// Dormand–Prince 5(4) with local error control.
    Rk45 {
        rel_tol: f64,
        abs_tol: f64,
        min_step: f64,
        max_step: f64,
    },
}

impl Method {
    pub fn rk45(rel_tol: f64, abs_tol: f64) -> Self {
        Method::Rk45 {
            rel_tol,
            abs_tol,
            min_step: 1e-12,
            max_step: 10.0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Method::Rk4 { .. } => "rk4",
            Method::Rk45 { .. } => "rk45",
        }
    }
}

pub const DEFAULT_REL_TOL: f64 = 1e-8;
pub const DEFAULT_ABS_TOL: f64 = 1e-10;

impl Default for Method {
    fn default() -> Self {
        Method::rk45(DEFAULT_REL_TOL, DEFAULT_ABS_TOL)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub method: Method,
    pub t_end: f64,
    pub sample_every: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            method: Method::default(),
            t_end: 1000.0,
            sample_every: 1.0,
        }
    }
}

impl IntegratorConfig {
    pub fn new(method: Method, t_end: f64) -> Self {
        IntegratorConfig {
            method,
            t_end,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(what.to_string()));
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad("t_end must be finite and nonnegative");
        }
        if !(self.sample_every > 0.0 && self.sample_every.is_finite()) {
            return bad("sample_every must be positive");
        }
        match self.method {
            Method::Rk4 { step } if !(step > 0.0 && step.is_finite()) => bad("rk4 step must be positive"),
            Method::Rk45 {
                rel_tol,
                abs_tol,
                min_step,
                max_step,
            } => {
                if !(rel_tol > 0.0 && abs_tol > 0.0) {
                    bad("tolerances must be positive")
                } else if !(min_step > 0.0 && min_step <= max_step && max_step.is_finite()) {
                    bad("need 0 < min_step <= max_step")
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// Magnitude below which a negative component counts as rounding noise.
    pub fn negativity_tolerance(&self) -> f64 {
        match self.method {
            Method::Rk45 { abs_tol, .. } => abs_tol,
            Method::Rk4 { .. } => DEFAULT_ABS_TOL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ViolationKind {
    /// A component dropped below zero. `benign` when the excursion is
    /// smaller than the integrator's absolute tolerance.
    Negativity {
        benign: bool,
    },
    TPlusIBound,
    VBound,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ViolationKind::Negativity { benign: true } => f.write_str("negativity(benign)"),
            ViolationKind::Negativity { benign: false } => f.write_str("negativity"),
            ViolationKind::TPlusIBound => f.write_str("T_plus_I_bound"),
            ViolationKind::VBound => f.write_str("V_bound"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViolationRecord {
    pub time: f64,
    pub kind: ViolationKind,
    /// Depth below zero, or excess over the bound.
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub steps_taken: usize,
    pub steps_rejected: usize,
    pub violation_log: Vec<ViolationRecord>,
    pub negativity_tolerance: f64,
    /// Whether samples were checked against [`Bounds`].
    pub bounds_checked: bool,
}

impl Trajectory {
    pub fn last(&self) -> Option<(f64, State)> {
        Some((*self.times.last()?, *self.states.last()?))
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Upper bounds on T + I and on V for positive solutions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub t_tilde0: f64,
    pub lambda0: f64,
    /// `t_tilde0` is zero or infinite.
    pub degenerate: bool,
    /// r_I ≤ r_T and d_I ≥ d_T, the conditions under which T + I obeys the
    /// logistic comparison equation that yields `t_tilde0`.
    pub applicable: bool,
}

impl Bounds {
    pub fn contains(&self, state: &State) -> bool {
        state.t + state.i <= self.t_tilde0 && state.v <= self.lambda0
    }

    /// Bounds are enforced on a run only if they apply to the parameters and
    /// the run starts inside the region.
    pub fn enforced_for(&self, initial: &State) -> bool {
        self.applicable && !self.degenerate && self.contains(initial)
    }
}

pub fn asymptotic_bounds(params: &ModelParameters, initial: &State) -> Result<Bounds> {
    let dc = derive_constants(params)?;
    let t_tilde0 = dc.t_tilde0.unwrap_or(f64::INFINITY);
    let lambda0 = initial.v.max(params.production() * t_tilde0 / params.c);
    Ok(Bounds {
        t_tilde0,
        lambda0,
        degenerate: t_tilde0 == 0.0 || !t_tilde0.is_finite(),
        applicable: params.r_i <= params.r_t && params.d_i >= params.d_t,
    })
}

fn check_sample(time: f64, state: &State, bounds: Option<&Bounds>, neg_tol: f64, log: &mut Vec<ViolationRecord>) {
    for x in state.to_array() {
        if x < 0.0 {
            log.push(ViolationRecord {
                time,
                kind: ViolationKind::Negativity { benign: -x <= neg_tol },
                magnitude: -x,
            });
        }
    }
    if let Some(b) = bounds {
        let n = state.t + state.i;
        if n > b.t_tilde0 * (1.0 + BOUND_SLACK) {
            log.push(ViolationRecord {
                time,
                kind: ViolationKind::TPlusIBound,
                magnitude: n - b.t_tilde0,
            });
        }
        if state.v > b.lambda0 * (1.0 + BOUND_SLACK) {
            log.push(ViolationRecord {
                time,
                kind: ViolationKind::VBound,
                magnitude: state.v - b.lambda0,
            });
        }
    }
}

fn rk4_step(params: &ModelParameters, y: &[f64; 3], h: f64) -> [f64; 3] {
    let add = |a: &[f64; 3], k: &[f64; 3], f: f64| [a[0] + f * k[0], a[1] + f * k[1], a[2] + f * k[2]];
    let k1 = rhs(params, y);
    let k2 = rhs(params, &add(y, &k1, h / 2.0));
    let k3 = rhs(params, &add(y, &k2, h / 2.0));
    let k4 = rhs(params, &add(y, &k3, h));
    let mut out = *y;
    for j in 0..3 {
        out[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    }
    out
}

// Dormand–Prince tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One Dormand–Prince step: fifth-order solution and the scaled error norm.
fn dopri_step(params: &ModelParameters, y: &[f64; 3], h: f64, rel_tol: f64, abs_tol: f64) -> ([f64; 3], f64) {
    debug_assert_eq!(C[0], 0.0);
    let mut k = [[0.0; 3]; 7];
    k[0] = rhs(params, y);
    for s in 1..7 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            for d in 0..3 {
                ys[d] += h * A[s][j] * kj[d];
            }
        }
        k[s] = rhs(params, &ys);
    }
    let mut y5 = *y;
    let mut err: f64 = 0.0;
    for d in 0..3 {
        let mut e = 0.0;
        for s in 0..7 {
            y5[d] += h * B5[s] * k[s][d];
            e += h * (B5[s] - B4[s]) * k[s][d];
        }
        let sc = abs_tol + rel_tol * y[d].abs().max(y5[d].abs());
        err = err.max((e / sc).abs());
    }
    if y5.iter().any(|v| !v.is_finite()) {
        err = f64::INFINITY;
    }
    (y5, err)
}

fn sample_times(t_end: f64, every: f64) -> Vec<f64> {
    let mut times = vec![0.0];
    let mut k = 1u64;
    loop {
        let t = k as f64 * every;
        if t >= t_end * (1.0 - 1e-12) {
            break;
        }
        times.push(t);
        k += 1;
    }
    if t_end > 0.0 {
        times.push(t_end);
    }
    times
}

/// Integrates from `initial` at t = 0 up to `config.t_end`, sampling every
/// `config.sample_every` days and at `t_end`.
pub fn integrate(params: &ModelParameters, initial: &State, config: &IntegratorConfig) -> Result<Trajectory> {
    config.validate()?;
    params.validate()?;
    // Boundary states such as E⁰ itself are accepted; T must stay positive.
    if !(initial.is_finite() && initial.t > 0.0 && initial.i >= 0.0 && initial.v >= 0.0) {
        return Err(Error::Domain(format!(
            "initial state must have T > 0 and I, V >= 0, got {initial:?}"
        )));
    }
    let bounds = asymptotic_bounds(params, initial)?;
    let enforced = bounds.enforced_for(initial).then_some(bounds);
    let neg_tol = config.negativity_tolerance();

    let mut traj = Trajectory {
        negativity_tolerance: neg_tol,
        bounds_checked: enforced.is_some(),
        ..Default::default()
    };
    let mut y = initial.to_array();
    traj.times.push(0.0);
    traj.states.push(*initial);
    check_sample(0.0, initial, enforced.as_ref(), neg_tol, &mut traj.violation_log);

    let targets = sample_times(config.t_end, config.sample_every);
    let mut t = 0.0;
    let mut h_next = match config.method {
        Method::Rk45 { max_step, .. } => config.sample_every.min(max_step) * 1e-3,
        Method::Rk4 { step } => step,
    };

    for &target in &targets[1..] {
        match config.method {
            Method::Rk4 { step } => {
                let span = target - t;
                let n = (span / step * (1.0 - 1e-12)).ceil().max(1.0) as usize;
                let h = span / n as f64;
                for _ in 0..n {
                    y = rk4_step(params, &y, h);
                    traj.steps_taken += 1;
                    t += h;
                    if y.iter().any(|v| !v.is_finite()) {
                        return Err(fail(traj, t, "non-finite state".into()));
                    }
                }
                t = target;
            }
            Method::Rk45 {
                rel_tol,
                abs_tol,
                min_step,
                max_step,
            } => {
                while t < target {
                    let remaining = target - t;
                    let proposal = h_next.min(max_step).max(min_step);
                    let last = proposal >= remaining * (1.0 - 1e-12);
                    let h = if last { remaining } else { proposal };
                    let (y_new, err) = dopri_step(params, &y, h, rel_tol, abs_tol);
                    if err <= 1.0 {
                        y = y_new;
                        t = if last { target } else { t + h };
                        traj.steps_taken += 1;
                        let grow = if err == 0.0 {
                            5.0
                        } else {
                            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                        };
                        if !last || h >= proposal {
                            h_next = h * grow;
                        }
                    } else {
                        traj.steps_rejected += 1;
                        if h <= min_step {
                            let reason = if err.is_finite() {
                                format!("step size underflow (h = {h:e}, error ratio {err:e})")
                            } else {
                                "non-finite state".to_string()
                            };
                            return Err(fail(traj, t, reason));
                        }
                        let shrink = if err.is_finite() {
                            (0.9 * err.powf(-0.2)).clamp(0.2, 1.0)
                        } else {
                            0.2
                        };
                        h_next = (h * shrink).max(min_step);
                    }
                }
            }
        }
        let state = State::from_array(y);
        traj.times.push(target);
        traj.states.push(state);
        check_sample(target, &state, enforced.as_ref(), neg_tol, &mut traj.violation_log);
    }
    Ok(traj)
}

fn fail(partial: Trajectory, time: f64, reason: String) -> Error {
    Error::Integration {
        time,
        reason,
        partial: Box::new(partial),
    }
}

/// Integrates several initial states in parallel; results keep input order.
pub fn integrate_many(
    params: &ModelParameters,
    initials: &[State],
    config: &IntegratorConfig,
) -> Vec<Result<Trajectory>> {
    initials.par_iter().map(|s| integrate(params, s, config)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KindSummary {
    pub count: usize,
    pub worst: f64,
}

impl KindSummary {
    fn record(&mut self, magnitude: f64) {
        self.count += 1;
        self.worst = self.worst.max(magnitude);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InvariantSummary {
    pub negativity: KindSummary,
    pub benign_negativity: KindSummary,
    pub t_plus_i_bound: KindSummary,
    pub v_bound: KindSummary,
    pub bounds_checked: bool,
}

impl InvariantSummary {
    /// No violations other than benign negativity.
    pub fn is_clean(&self) -> bool {
        self.negativity.count == 0 && self.t_plus_i_bound.count == 0 && self.v_bound.count == 0
    }
}

/// Rescans every sample. Bounds are checked under the same rule as
/// [`integrate`]: they apply and the first sample lies inside the region.
pub fn check_invariants(trajectory: &Trajectory, bounds: &Bounds) -> InvariantSummary {
    let enforced = trajectory
        .states
        .first()
        .filter(|s| bounds.enforced_for(s))
        .map(|_| bounds);
    let mut log = Vec::new();
    for (t, s) in trajectory.times.iter().zip(&trajectory.states) {
        check_sample(*t, s, enforced, trajectory.negativity_tolerance, &mut log);
    }
    let mut summary = InvariantSummary {
        bounds_checked: enforced.is_some(),
        ..Default::default()
    };
    for r in log {
        match r.kind {
            ViolationKind::Negativity { benign: true } => summary.benign_negativity.record(r.magnitude),
            ViolationKind::Negativity { benign: false } => summary.negativity.record(r.magnitude),
            ViolationKind::TPlusIBound => summary.t_plus_i_bound.record(r.magnitude),
            ViolationKind::VBound => summary.v_bound.record(r.magnitude),
        }
    }
    summary
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::uninfected_equilibrium;

    #[test]
    fn sample_grid() {
        assert_eq!(sample_times(0.0, 1.0), vec![0.0]);
        assert_eq!(sample_times(2.5, 1.0), vec![0.0, 1.0, 2.0, 2.5]);
        assert_eq!(sample_times(3.0, 1.0), vec![0.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn zero_horizon_keeps_initial_only() {
        let cfg = IntegratorConfig::new(Method::default(), 0.0);
        let tr = integrate(&ModelParameters::S1, &State::REFERENCE_INITIAL, &cfg).unwrap();
        assert_eq!(tr.times, vec![0.0]);
        assert_eq!(tr.states, vec![State::REFERENCE_INITIAL]);
    }

    #[test]
    fn config_rejects_bad_values() {
        let cfg = IntegratorConfig {
            t_end: -1.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = IntegratorConfig::new(Method::Rk4 { step: 0.0 }, 1.0);
        assert!(cfg.validate().is_err());
        let cfg = IntegratorConfig::new(Method::rk45(0.0, 1e-10), 1.0);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn exponential_decay_accuracy() {
        // V' = -cV when I = 0 and nothing infects.
        let p = ModelParameters {
            beta: 0.0,
            ..ModelParameters::S2
        };
        let t0 = uninfected_equilibrium(&p).unwrap().state.t;
        let init = State::new(t0, 1e-300, 1.0);
        for m in [Method::Rk4 { step: 0.01 }, Method::rk45(1e-10, 1e-14)] {
            let tr = integrate(&p, &init, &IntegratorConfig::new(m, 1.0)).unwrap();
            let v = tr.last().unwrap().1.v;
            assert!((v - (-p.c).exp()).abs() < 1e-7, "{m:?}: {v}");
        }
    }

    #[test]
    fn degenerate_bound() {
        let p = ModelParameters {
            s: 0.0,
            d_t: 0.05,
            ..ModelParameters::S1
        };
        let b = asymptotic_bounds(&p, &State::REFERENCE_INITIAL).unwrap();
        assert_eq!(b.t_tilde0, 0.0);
        assert!(b.degenerate);
    }

    #[test]
    fn injected_v_excursion() {
        let p = ModelParameters::S2;
        let t0 = uninfected_equilibrium(&p).unwrap().state.t;
        let e0 = State::new(t0, 0.0, 0.0);
        let b = asymptotic_bounds(&p, &e0).unwrap();
        assert!(b.applicable);
        let mut tr = Trajectory {
            times: vec![0.0, 1.0, 2.0],
            states: vec![e0; 3],
            ..Default::default()
        };
        assert!(check_invariants(&tr, &b).is_clean());
        tr.states[1].v = 2.0 * b.lambda0;
        let sum = check_invariants(&tr, &b);
        assert_eq!(sum.v_bound.count, 1);
        assert_eq!(sum.v_bound.worst, b.lambda0);
        assert_eq!(sum.t_plus_i_bound.count, 0);
    }

    #[test]
    fn negative_samples_classified() {
        let b = asymptotic_bounds(&ModelParameters::S2, &State::REFERENCE_INITIAL).unwrap();
        let tr = Trajectory {
            times: vec![0.0, 1.0],
            states: vec![State::REFERENCE_INITIAL, State::new(1.0, -1e-12, -2.0)],
            negativity_tolerance: 1e-10,
            ..Default::default()
        };
        let sum = check_invariants(&tr, &b);
        assert_eq!(sum.benign_negativity.count, 1);
        assert_eq!(sum.negativity.count, 1);
        assert_eq!(sum.negativity.worst, 2.0);
    }
}
