//! Lyapunov functions at E⁰ and E*, and grid sampling of their derivatives.

use std::fmt;

use rayon::prelude::*;

use crate::equilibria::{infected_equilibrium, uninfected_equilibrium};
use crate::error::{Error, Result};
use crate::model::{rhs, term_scales};
use crate::params::{derive_constants, ModelParameters, State};
use crate::reproduction::r0_from_t0;
use crate::tolerances::{HYPOTHESIS_EQUALITY, LYAPUNOV_AGREEMENT, LYAPUNOV_SIGN};

/// L and dL/dt at one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovSample {
    pub l: f64,
    /// Gradient of L dotted with the vector field.
    pub dl_dt: f64,
    /// Σ |∂L/∂x_k| · (sum of |terms| of f_k). Rounding in `dl_dt` is a
    /// small multiple of `ε·scale`.
    pub scale: f64,
}

impl LyapunovSample {
    /// dL/dt in units of its own rounding scale; zero when the scale is.
    pub fn relative_rate(&self) -> f64 {
        if self.scale == 0.0 {
            self.dl_dt
        } else {
            self.dl_dt / self.scale
        }
    }
}

fn gradient_sample(params: &ModelParameters, state: &State, grad: [f64; 3], l: f64) -> LyapunovSample {
    let f = rhs(params, &state.to_array());
    let ts = term_scales(params, state);
    let dl_dt = grad[0] * f[0] + grad[1] * f[1] + grad[2] * f[2];
    let scale = grad.iter().zip(ts).map(|(g, s)| g.abs() * s).sum();
    LyapunovSample { l, dl_dt, scale }
}

/// Volterra term `x - x* - x* ln(x/x*)`, nonnegative with a zero at x*.
fn volterra(x: f64, x_star: f64) -> f64 {
    if x_star == 0.0 {
        x
    } else {
        x - x_star - x_star * (x / x_star).ln()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovE0 {
    pub sample: LyapunovSample,
    /// dL/dt from the collected expression in T, I and R0.
    pub collected: f64,
}

impl LyapunovE0 {
    pub fn forms_agree(&self) -> bool {
        (self.sample.dl_dt - self.collected).abs() <= LYAPUNOV_AGREEMENT * self.sample.scale
    }
}

/// Precomputed E⁰ quantities so grid sampling does not redo root finding.
#[derive(Debug, Clone, Copy)]
struct E0Context {
    t0: f64,
    r0: f64,
    v_weight: f64,
}

impl E0Context {
    fn new(params: &ModelParameters) -> Result<Self> {
        let t0 = uninfected_equilibrium(params)?.state.t;
        let r0 = r0_from_t0(params, t0)?;
        Ok(E0Context {
            t0,
            r0,
            v_weight: params.infectivity() * t0 / params.c,
        })
    }

    fn eval(&self, params: &ModelParameters, state: &State) -> LyapunovE0 {
        let State { t, i, v } = *state;
        let t0 = self.t0;
        let l = volterra(t, t0) + i + self.v_weight * v;
        let sample = gradient_sample(params, state, [1.0 - t0 / t, 1.0, self.v_weight], l);

        let ModelParameters {
            s, r_t, r_i, t_max, q, ..
        } = *params;
        let delta = params.delta();
        let cross = if r_t == 0.0 {
            // (r_T/T_max)(T+I-T⁰)(T+(r_I/r_T)I-T⁰) with r_T → 0
            r_i * i * (t + i - t0) / t_max
        } else {
            r_t / t_max * (t + i - t0) * (t + r_i / r_t * i - t0)
        };
        let collected =
            -s / (t * t0) * (t - t0).powi(2) - cross - q * i * t0 / t + delta * i * (self.r0 - 1.0 + q / delta);
        LyapunovE0 { sample, collected }
    }
}

fn check_state(state: &State, strict: bool) -> Result<()> {
    let ok = state.is_finite()
        && state.t > 0.0
        && if strict {
            state.i > 0.0 && state.v > 0.0
        } else {
            state.i >= 0.0 && state.v >= 0.0
        };
    if ok {
        Ok(())
    } else {
        Err(Error::Domain(format!("Lyapunov function undefined at {state:?}")))
    }
}

/// `L = T - T⁰ - T⁰ ln(T/T⁰) + I + (1-η)βT⁰V/c`.
///
/// Needs T > 0; I and V may be zero, which includes E⁰ itself.
pub fn lyapunov_e0(params: &ModelParameters, state: &State) -> Result<LyapunovE0> {
    check_state(state, false)?;
    Ok(E0Context::new(params)?.eval(params, state))
}

/// Volterra-type function centred at the infected equilibrium `estar`, with
/// the V-term weighted by `(1-η)βT*V* / ((1-ε)pI*)`.
pub fn lyapunov_estar(params: &ModelParameters, state: &State, estar: &State) -> Result<LyapunovSample> {
    check_state(state, true)?;
    if !(estar.t > 0.0 && estar.i > 0.0 && estar.v > 0.0) {
        return Err(Error::Domain(format!(
            "infected equilibrium must be positive, got {estar:?}"
        )));
    }
    Ok(estar_eval(params, state, estar, estar_weight(params, estar)))
}

fn estar_weight(params: &ModelParameters, estar: &State) -> f64 {
    params.infectivity() * estar.t * estar.v / (params.production() * estar.i)
}

fn estar_eval(params: &ModelParameters, state: &State, estar: &State, w: f64) -> LyapunovSample {
    let l = volterra(state.t, estar.t) + volterra(state.i, estar.i) + w * volterra(state.v, estar.v);
    let grad = [
        1.0 - estar.t / state.t,
        1.0 - estar.i / state.i,
        w * (1.0 - estar.v / state.v),
    ];
    gradient_sample(params, state, grad, l)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    E0,
    Estar,
}

impl Target {
    pub fn as_str(self) -> &'static str {
        match self {
            Target::E0 => "E0",
            Target::Estar => "Estar",
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "E0" | "e0" => Ok(Target::E0),
            "Estar" | "estar" | "E*" => Ok(Target::Estar),
            other => Err(Error::Config(format!("unknown target `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    /// `n` log-uniform points per axis over `[lo_fraction·bound, bound]`.
    /// `n = 1` samples the target equilibrium alone.
    LogUniform { n: usize, lo_fraction: f64 },
    /// Caller-chosen states.
    Points(Vec<State>),
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::LogUniform {
            n: 20,
            lo_fraction: 1e-6,
        }
    }
}

impl GridSpec {
    pub fn log_uniform(n: usize) -> Self {
        GridSpec::LogUniform { n, lo_fraction: 1e-6 }
    }
}

/// A named inequality or equality the theorem assumes.
#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub state: State,
    pub dl_dt: f64,
    pub relative: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificateReport {
    pub target: Target,
    pub equilibrium: State,
    pub grid_size: usize,
    /// Most positive dL/dt seen on the grid.
    pub min_margin: f64,
    /// Most positive dL/dt relative to its rounding scale. Violations are
    /// exactly the points where this exceeds the sign tolerance.
    pub worst_relative: f64,
    pub violations: Vec<Violation>,
    /// The theorem's stated hypotheses all hold.
    pub preconditions_met: bool,
    pub hypotheses: Vec<Hypothesis>,
    /// Further conditions the stability argument relies on implicitly.
    pub implicit_assumptions: Vec<Hypothesis>,
}

impl CertificateReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

fn equality(name: &'static str, lhs: f64, rhs: f64) -> Hypothesis {
    let holds = (lhs - rhs).abs() <= HYPOTHESIS_EQUALITY * lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE);
    Hypothesis { name, lhs, rhs, holds }
}

fn less(name: &'static str, lhs: f64, rhs: f64, strict: bool) -> Hypothesis {
    Hypothesis {
        name,
        lhs,
        rhs,
        holds: if strict { lhs < rhs } else { lhs <= rhs },
    }
}

/// Log-spaced values over `[lo_fraction·bound, bound]`.
fn log_axis(bound: f64, n: usize, lo_fraction: f64) -> Vec<f64> {
    let lo = (bound * lo_fraction).ln();
    let hi = bound.ln();
    (0..n)
        .map(|k| {
            if k + 1 == n {
                bound
            } else {
                (lo + (hi - lo) * k as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

/// Box `T, I ≤ n_bound`, `V ≤ v_bound` restricted to `T + I ≤ n_bound`.
fn region_grid(n_bound: f64, v_bound: f64, n: usize, lo_fraction: f64) -> Vec<State> {
    let nx = log_axis(n_bound, n, lo_fraction);
    let vx = log_axis(v_bound, n, lo_fraction);
    let mut out = Vec::with_capacity(n * n * n);
    for &t in &nx {
        for &i in &nx {
            if t + i > n_bound {
                continue;
            }
            for &v in &vx {
                out.push(State::new(t, i, v));
            }
        }
    }
    out
}

/// Samples dL/dt for the chosen target over a grid and records the
/// theorem's hypotheses next to the empirical verdict.
///
/// The log-uniform grid covers `T + I ≤ N̄`, `V ≤ V̄` with
/// `N̄ = max(T̃0, T_e + I_e)` and `V̄ = max((1-ε)pN̄/c, V_e)` so that the
/// target equilibrium `(T_e, I_e, V_e)` always lies inside.
pub fn certify_global(params: &ModelParameters, target: Target, grid: &GridSpec) -> Result<CertificateReport> {
    let dc = derive_constants(params)?;
    let (equilibrium, hypotheses, implicit) = match target {
        Target::E0 => {
            let ctx = E0Context::new(params)?;
            let threshold = 1.0 - params.q / dc.delta;
            (
                State::new(ctx.t0, 0.0, 0.0),
                vec![less("R0 < 1 - q/delta", ctx.r0, threshold, true)],
                vec![less("r_I <= r_T", params.r_i, params.r_t, false)],
            )
        }
        Target::Estar => {
            let report = infected_equilibrium(params)?;
            let estar = report
                .unique()
                .ok_or_else(|| Error::Domain(format!("no unique infected equilibrium (regime {})", report.regime)))?;
            (
                estar.state,
                vec![
                    equality("r_I = r_T", params.r_i, params.r_t),
                    equality("s = d_T T_max", params.s, params.d_t * params.t_max),
                    equality("delta = d_T", dc.delta, params.d_t),
                ],
                vec![],
            )
        }
    };

    let points = match grid {
        GridSpec::Points(p) => p.clone(),
        GridSpec::LogUniform { n, lo_fraction } => {
            if *n == 0 || !(*lo_fraction > 0.0 && *lo_fraction < 1.0) {
                return Err(Error::Config(format!(
                    "grid needs n >= 1 and lo_fraction in (0, 1), got n = {n}, lo_fraction = {lo_fraction}"
                )));
            }
            if *n == 1 {
                vec![equilibrium]
            } else {
                let t_tilde0 = dc.t_tilde0.unwrap_or(0.0);
                let n_bound = t_tilde0.max(equilibrium.t + equilibrium.i);
                let v_bound = (params.production() * n_bound / params.c).max(equilibrium.v);
                region_grid(n_bound, v_bound, *n, *lo_fraction)
            }
        }
    };

    let samples: Vec<LyapunovSample> = match target {
        Target::E0 => {
            let ctx = E0Context::new(params)?;
            for s in &points {
                check_state(s, false)?;
            }
            points.par_iter().map(|s| ctx.eval(params, s).sample).collect()
        }
        Target::Estar => {
            let w = estar_weight(params, &equilibrium);
            for s in &points {
                if *s != equilibrium {
                    check_state(s, true)?;
                }
            }
            points
                .par_iter()
                .map(|s| estar_eval(params, s, &equilibrium, w))
                .collect()
        }
    };

    let mut min_margin = f64::NEG_INFINITY;
    let mut worst_relative = f64::NEG_INFINITY;
    let mut violations = Vec::new();
    for (state, sample) in points.iter().zip(&samples) {
        let rel = sample.relative_rate();
        min_margin = min_margin.max(sample.dl_dt);
        worst_relative = worst_relative.max(rel);
        if rel > LYAPUNOV_SIGN {
            violations.push(Violation {
                state: *state,
                dl_dt: sample.dl_dt,
                relative: rel,
            });
        }
    }

    Ok(CertificateReport {
        target,
        equilibrium,
        grid_size: points.len(),
        min_margin,
        worst_relative,
        violations,
        preconditions_met: hypotheses.iter().all(|h| h.holds),
        hypotheses,
        implicit_assumptions: implicit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_at_e0() {
        let p = ModelParameters::S1;
        let t0 = uninfected_equilibrium(&p).unwrap().state.t;
        let e = lyapunov_e0(&p, &State::new(t0, 0.0, 0.0)).unwrap();
        assert_eq!(e.sample.l, 0.0);
        assert_eq!(e.sample.dl_dt, 0.0);
    }

    #[test]
    fn reference_state_forms_agree() {
        let e = lyapunov_e0(&ModelParameters::S1, &State::REFERENCE_INITIAL).unwrap();
        assert!(e.sample.dl_dt.is_finite());
        assert!(e.forms_agree(), "{e:?}");
    }

    #[test]
    fn uninfected_states_decrease() {
        let p = ModelParameters::S2;
        let t0 = uninfected_equilibrium(&p).unwrap().state.t;
        for t in [1.0, 1e3, 5e6, 2e7] {
            let e = lyapunov_e0(&p, &State::new(t, 0.0, 0.0)).unwrap();
            let expected = -(p.s / (t * t0) + p.r_t / p.t_max) * (t - t0).powi(2);
            assert!(e.sample.dl_dt <= 0.0);
            assert!((e.collected - expected).abs() <= 1e-12 * expected.abs());
        }
    }

    #[test]
    fn rejects_nonpositive() {
        let p = ModelParameters::S1;
        assert!(lyapunov_e0(&p, &State::new(0.0, 1.0, 1.0)).is_err());
        assert!(lyapunov_e0(&p, &State::new(1.0, -1.0, 1.0)).is_err());
        let e = State::new(1.0, 1.0, 1.0);
        assert!(lyapunov_estar(&p, &State::new(1.0, 0.0, 1.0), &e).is_err());
        assert!(lyapunov_estar(&p, &e, &State::new(1.0, 0.0, 1.0)).is_err());
    }

    #[test]
    fn zero_at_estar() {
        let p = ModelParameters::S2;
        let es = infected_equilibrium(&p).unwrap().unique().unwrap().state;
        let s = lyapunov_estar(&p, &es, &es).unwrap();
        assert_eq!(s.l, 0.0);
        assert_eq!(s.dl_dt, 0.0);
    }

    #[test]
    fn single_point_grid() {
        for (p, t) in [(ModelParameters::S1, Target::E0), (ModelParameters::S2, Target::Estar)] {
            let r = certify_global(&p, t, &GridSpec::log_uniform(1)).unwrap();
            assert_eq!(r.grid_size, 1);
            assert_eq!(r.min_margin, 0.0);
            assert!(r.holds());
        }
    }

    #[test]
    fn s1_hypothesis_fails() {
        let r = certify_global(&ModelParameters::S1, Target::E0, &GridSpec::log_uniform(6)).unwrap();
        assert!(!r.preconditions_met);
        assert!(r.grid_size > 1);
    }

    #[test]
    fn e0_unstable_has_violations() {
        let p = ModelParameters {
            beta: 1e-5,
            ..ModelParameters::S1
        };
        let r = certify_global(&p, Target::E0, &GridSpec::default()).unwrap();
        assert!(!r.violations.is_empty());
        assert!(r.worst_relative > LYAPUNOV_SIGN);
    }

    #[test]
    fn target_parsing() {
        assert_eq!("E0".parse::<Target>().unwrap(), Target::E0);
        assert_eq!("Estar".parse::<Target>().unwrap(), Target::Estar);
        assert!("E1".parse::<Target>().is_err());
    }
}
