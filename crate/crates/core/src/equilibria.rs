//! Uninfected and infected steady states.
//!
//! The infected equilibrium is found by reducing the steady-state system to
//! a quadratic `h2(T) = a T² + b T + d` in T*, collecting its real roots in
//! `(0, T_max]`, reconstructing I* and V*, and keeping only candidates that
//! are positive and pass a full-system residual check. The textbook
//! existence criteria are evaluated separately by [`existence_regime`] and
//! reported next to the numerical verdict; they never override it.

use std::fmt;

use crate::error::{Error, Result};
use crate::model::relative_residual;
use crate::params::{derive_constants, ModelParameters, State};
use crate::reproduction::r0_from_t0;
use crate::roots::quadratic_real_roots;
use crate::tolerances::{rel_close, EQUILIBRIUM_RESIDUAL, RADICAL_AGREEMENT, UNINFECTED_RESIDUAL};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquilibriumKind {
    Uninfected,
    Infected,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumPoint {
    pub kind: EquilibriumKind,
    pub state: State,
    /// Largest componentwise-relative vector-field residual at `state`.
    pub residual_norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    NoInfectedEq,
    UniqueInfectedEq,
    MultipleCandidates,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::NoInfectedEq => "no_infected_eq",
            Regime::UniqueInfectedEq => "unique_infected_eq",
            Regime::MultipleCandidates => "multiple_candidates",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Why a real root of `h2` did not become an infected equilibrium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RejectReason {
    /// T* ≤ 0 or T* > T_max.
    OutsideBracket,
    /// I* ≤ 0 or V* ≤ 0.
    NonPositive,
    /// Full-system residual above tolerance.
    Residual(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RejectedRoot {
    pub state: State,
    pub reason: RejectReason,
}

/// Coefficients of `h2(T) = a T² + b T + d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyStateQuadratic {
    pub a: f64,
    pub b: f64,
    pub d: f64,
}

impl SteadyStateQuadratic {
    pub fn eval(&self, t: f64) -> f64 {
        (self.a * t + self.b) * t + self.d
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExistenceReport {
    /// `s + q (T_max/r_I)(r_I - δ)`; its sign is the textbook existence test.
    pub lemma_condition: f64,
    /// `(r_I - δ) T⁰ / (r_I - δ R0)`, absent when the denominator vanishes.
    pub threshold_t: Option<f64>,
    pub regime: Regime,
    pub candidates: Vec<EquilibriumPoint>,
    pub rejected: Vec<RejectedRoot>,
    pub quadratic: SteadyStateQuadratic,
    /// Positive branch of the radical closed form for T*, when defined.
    pub radical_t_star: Option<f64>,
    /// Whether the unique candidate's T* matches `radical_t_star`.
    /// `None` unless the regime is [`Regime::UniqueInfectedEq`].
    pub radical_agrees: Option<bool>,
}

impl ExistenceReport {
    /// The infected equilibrium when exactly one candidate survived.
    pub fn unique(&self) -> Option<&EquilibriumPoint> {
        match self.regime {
            Regime::UniqueInfectedEq => self.candidates.first(),
            _ => None,
        }
    }
}

/// E⁰ = (T⁰, 0, 0), the positive root of `s + r_T T (1 - T/T_max) - d_T T = 0`.
pub fn uninfected_equilibrium(params: &ModelParameters) -> Result<EquilibriumPoint> {
    params.validate()?;
    let ModelParameters { s, r_t, d_t, t_max, .. } = *params;

    let t0 = if r_t == 0.0 {
        if d_t <= 0.0 {
            return Err(Error::Domain("r_T = 0 and d_T = 0: no uninfected equilibrium".into()));
        }
        s / d_t
    } else {
        let net = r_t - d_t;
        let root = (net * net + 4.0 * r_t * s / t_max).sqrt();
        if net >= 0.0 {
            t_max / (2.0 * r_t) * (net + root)
        } else {
            // Rationalised to avoid cancelling net + root.
            2.0 * s / (root - net)
        }
    };
    if !t0.is_finite() || t0 <= 0.0 {
        return Err(Error::Domain(format!(
            "uninfected equilibrium T0 = {t0} is not positive"
        )));
    }

    let state = State::new(t0, 0.0, 0.0);
    let residual_norm = relative_residual(params, &state);
    if residual_norm > UNINFECTED_RESIDUAL {
        return Err(Error::Integrity(format!(
            "T0 = {t0} leaves relative residual {residual_norm:e}"
        )));
    }
    Ok(EquilibriumPoint {
        kind: EquilibriumKind::Uninfected,
        state,
        residual_norm,
    })
}

/// Coefficients of the quadratic whose roots are the candidate T*.
pub fn steady_state_quadratic(params: &ModelParameters) -> Result<SteadyStateQuadratic> {
    let dc = derive_constants(params)?;
    let ModelParameters {
        s,
        r_t,
        r_i,
        d_t,
        t_max,
        q,
        ..
    } = *params;
    if r_i <= 0.0 {
        return Err(Error::Domain("infected equilibrium requires r_I > 0".into()));
    }
    let (a_coef, delta) = (dc.a, dc.delta);
    let a = -(r_t * a_coef / r_i + a_coef * a_coef / r_i - a_coef) / t_max;
    let b = r_t - d_t - q + q * a_coef / r_i - (r_t / r_i) * (r_i - delta) - (a_coef / r_i) * (r_i - delta);
    let d = s + q * (t_max / r_i) * (r_i - delta);
    Ok(SteadyStateQuadratic { a, b, d })
}

/// I* and V* from a candidate T* via the I- and V-equations.
pub fn infected_state_from_t(params: &ModelParameters, t_star: f64) -> Result<State> {
    let dc = derive_constants(params)?;
    let i = t_star * (dc.a / params.r_i - 1.0) + params.t_max * (1.0 - dc.delta / params.r_i);
    let v = params.production() * i / params.c;
    Ok(State::new(t_star, i, v))
}

/// Positive branch of the radical closed form of T*,
/// `½(-D/H + √((D/H)² + F + 4 s T_max/(r_T H)))`.
pub fn radical_t_star(params: &ModelParameters) -> Result<Option<f64>> {
    let dc = derive_constants(params)?;
    let (Some(h), Some(d), Some(f)) = (dc.h, dc.d, dc.f) else {
        return Ok(None);
    };
    let ratio = d / h;
    let disc = ratio * ratio + f + 4.0 * params.s * params.t_max / (params.r_t * h);
    if disc < 0.0 {
        return Ok(None);
    }
    Ok(Some(0.5 * (-ratio + disc.sqrt())))
}

pub fn infected_equilibrium(params: &ModelParameters) -> Result<ExistenceReport> {
    let quadratic = steady_state_quadratic(params)?;
    let e0 = uninfected_equilibrium(params)?;
    let t0 = e0.state.t;
    let r0 = r0_from_t0(params, t0)?;
    let delta = params.delta();

    let roots = quadratic_real_roots(quadratic.a, quadratic.b, quadratic.d);
    let mut candidates = Vec::new();
    let mut rejected = Vec::new();
    for t_star in roots {
        let state = infected_state_from_t(params, t_star)?;
        let reason = if !(t_star > 0.0 && t_star <= params.t_max) {
            Some(RejectReason::OutsideBracket)
        } else if !(state.i > 0.0 && state.v > 0.0) {
            Some(RejectReason::NonPositive)
        } else {
            let res = relative_residual(params, &state);
            (res > EQUILIBRIUM_RESIDUAL).then_some(RejectReason::Residual(res))
        };
        match reason {
            Some(reason) => rejected.push(RejectedRoot { state, reason }),
            None => candidates.push(EquilibriumPoint {
                kind: EquilibriumKind::Infected,
                state,
                residual_norm: relative_residual(params, &state),
            }),
        }
    }

    let regime = match candidates.len() {
        0 => Regime::NoInfectedEq,
        1 => Regime::UniqueInfectedEq,
        _ => Regime::MultipleCandidates,
    };
    let radical = radical_t_star(params)?;
    let radical_agrees = match (regime, radical) {
        (Regime::UniqueInfectedEq, Some(r)) => Some(rel_close(candidates[0].state.t, r, RADICAL_AGREEMENT)),
        (Regime::UniqueInfectedEq, None) => Some(false),
        _ => None,
    };

    let denom = params.r_i - delta * r0;
    let threshold_t = (denom != 0.0).then(|| (params.r_i - delta) * t0 / denom);

    Ok(ExistenceReport {
        lemma_condition: quadratic.d,
        threshold_t,
        regime,
        candidates,
        rejected,
        quadratic,
        radical_t_star: radical,
        radical_agrees,
    })
}

/// Existence predicted by a textbook criterion, or `None` when the criterion
/// does not apply to these parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Verdict {
    pub criterion: Criterion,
    pub predicts_infected: Option<bool>,
    /// True when the prediction contradicts the numerical regime.
    pub disagrees: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criterion {
    /// E* exists iff R0 > 1.
    R0AboveOne,
    /// T* exists iff `s + q (T_max/r_I)(r_I - δ) > 0`.
    LemmaCondition,
    /// Case split on δ ≥ r_I / δ < r_I, A/r_I against 1, and T* against
    /// the threshold `(r_I - δ) T⁰ / (r_I - δ R0)`.
    ThresholdCaseSplit,
}

impl Criterion {
    pub fn as_str(self) -> &'static str {
        match self {
            Criterion::R0AboveOne => "r0_above_one",
            Criterion::LemmaCondition => "lemma_condition",
            Criterion::ThresholdCaseSplit => "threshold_case_split",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeAnalysis {
    pub report: ExistenceReport,
    pub t0: f64,
    pub r0: f64,
    /// `(1-θ)βpT_max/(c r_I)`, compared against 1 by the case split.
    pub infection_ratio: f64,
    /// `r_I / δ`, the second R0 threshold of the case split.
    pub r0_ceiling: f64,
    pub verdicts: Vec<Verdict>,
}

impl RegimeAnalysis {
    pub fn any_disagreement(&self) -> bool {
        self.verdicts.iter().any(|v| v.disagrees)
    }
}

/// Evaluates every textbook existence threshold next to the numerical root
/// count. Disagreements are flagged, not resolved.
pub fn existence_regime(params: &ModelParameters) -> Result<RegimeAnalysis> {
    let report = infected_equilibrium(params)?;
    let t0 = uninfected_equilibrium(params)?.state.t;
    let r0 = r0_from_t0(params, t0)?;
    let dc = derive_constants(params)?;
    let delta = dc.delta;
    let infection_ratio = dc.a / params.r_i;
    let r0_ceiling = params.r_i / delta;
    let numeric = report.regime != Regime::NoInfectedEq;

    // The case split reasons about "the" positive root of h2.
    let t_star = report.candidates.first().map(|c| c.state.t).or(report.radical_t_star);
    let case_split = match (t_star, report.threshold_t) {
        (Some(t_star), Some(threshold)) => {
            if delta >= params.r_i {
                if infection_ratio <= 1.0 {
                    Some(false)
                } else {
                    Some(t_star > threshold)
                }
            } else if infection_ratio >= 1.0 {
                Some(true)
            } else {
                Some(t_star < threshold)
            }
        }
        (None, _) => Some(false),
        (Some(_), None) => None,
    };

    let verdict = |criterion, predicts_infected: Option<bool>| Verdict {
        criterion,
        predicts_infected,
        disagrees: predicts_infected.is_some_and(|p| p != numeric),
    };
    let verdicts = vec![
        verdict(Criterion::R0AboveOne, Some(r0 > 1.0)),
        verdict(Criterion::LemmaCondition, Some(report.lemma_condition > 0.0)),
        verdict(Criterion::ThresholdCaseSplit, case_split),
    ];

    Ok(RegimeAnalysis {
        report,
        t0,
        r0,
        infection_ratio,
        r0_ceiling,
        verdicts,
    })
}
