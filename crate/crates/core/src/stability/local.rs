//! Linearisation at E⁰ and E*, characteristic cubic and Routh–Hurwitz test.

use std::fmt;

use num_complex::Complex64;

use crate::equilibria::{infected_equilibrium, uninfected_equilibrium, ExistenceReport};
use crate::error::{Error, Result};
use crate::model::{jacobian, Matrix3};
use crate::params::{derive_constants, ModelParameters, State};
use crate::reproduction::r0_from_t0;
use crate::roots::{cubic_roots, eigenvalues_2x2};
use crate::tolerances::{rel_diff, CHAR_COEFF_AGREEMENT, CHAR_COEFF_INTEGRITY, JACOBIAN_AGREEMENT, MARGINAL_BAND};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalClass {
    LocAsympStable,
    Unstable,
    Marginal,
}

impl LocalClass {
    pub fn as_str(self) -> &'static str {
        match self {
            LocalClass::LocAsympStable => "loc_asymp_stable",
            LocalClass::Unstable => "unstable",
            LocalClass::Marginal => "marginal",
        }
    }
}

impl fmt::Display for LocalClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Sum of absolute summands of each entry of the general Jacobian; the
/// natural scale for judging rounding in entries that cancel.
fn jacobian_term_scales(params: &ModelParameters, state: &State) -> Matrix3 {
    let State { t, i, v } = *state;
    let ModelParameters {
        r_t,
        r_i,
        d_t,
        d_i,
        t_max,
        q,
        c,
        ..
    } = *params;
    let k = params.infectivity();
    [
        [
            r_t * (1.0 + (2.0 * t + i.abs()) / t_max) + d_t + (k * v).abs(),
            r_t * t.abs() / t_max + q,
            (k * t).abs(),
        ],
        [
            r_i * i.abs() / t_max + (k * v).abs(),
            r_i * (1.0 + (t.abs() + 2.0 * i.abs()) / t_max) + d_i + q,
            (k * t).abs(),
        ],
        [0.0, params.production(), c],
    ]
}

/// Largest entrywise deviation between `closed` and the general Jacobian at
/// `state`, each measured against that entry's term scale.
fn jacobian_deviation(params: &ModelParameters, state: &State, closed: &Matrix3) -> f64 {
    let general = jacobian(params, state);
    let scales = jacobian_term_scales(params, state);
    let mut worst: f64 = 0.0;
    for r in 0..3 {
        for col in 0..3 {
            let (a, b) = (closed[r][col], general[r][col]);
            let scale = a.abs().max(b.abs()).max(scales[r][col]);
            if scale > 0.0 {
                worst = worst.max((a - b).abs() / scale);
            }
        }
    }
    worst
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct E0Analysis {
    pub t0: f64,
    pub r0: f64,
    /// J(E⁰) with entry (1,1) written as `-s/T⁰ - r_T T⁰/T_max`.
    pub jacobian: Matrix3,
    pub eigenvalues: [Complex64; 3],
    /// Trace of the (I, V) block.
    pub j1_trace: f64,
    /// Determinant of the (I, V) block, equal to `c δ (1 - R0)`.
    pub j1_det: f64,
    pub class: LocalClass,
    /// Deviation from the general Jacobian evaluated at E⁰.
    pub general_deviation: f64,
}

pub fn jacobian_at_e0(params: &ModelParameters) -> Result<E0Analysis> {
    let t0 = uninfected_equilibrium(params)?.state.t;
    let r0 = r0_from_t0(params, t0)?;
    let ModelParameters {
        s,
        r_t,
        r_i,
        t_max,
        q,
        c,
        ..
    } = *params;
    let delta = params.delta();
    let k = params.infectivity();

    let j11 = -s / t0 - r_t * t0 / t_max;
    let j = [
        [j11, -r_t * t0 / t_max + q, -k * t0],
        [0.0, r_i * (1.0 - t0 / t_max) - delta, k * t0],
        [0.0, params.production(), -c],
    ];
    let general_deviation = jacobian_deviation(params, &State::new(t0, 0.0, 0.0), &j);
    if general_deviation > JACOBIAN_AGREEMENT {
        return Err(Error::Integrity(format!(
            "J(E0) closed form deviates from general Jacobian by {general_deviation:e}"
        )));
    }

    let block = [[j[1][1], j[1][2]], [j[2][1], j[2][2]]];
    let j1_trace = block[0][0] + block[1][1];
    let j1_det = c * delta * (1.0 - r0);
    let [z1, z2] = eigenvalues_2x2(block);
    let eigenvalues = [Complex64::new(j11, 0.0), z1, z2];

    let class = if j1_det.abs() <= MARGINAL_BAND || j1_trace.abs() <= MARGINAL_BAND {
        LocalClass::Marginal
    } else if j1_trace < 0.0 && j1_det > 0.0 {
        LocalClass::LocAsympStable
    } else {
        LocalClass::Unstable
    };

    Ok(E0Analysis {
        t0,
        r0,
        jacobian: j,
        eigenvalues,
        j1_trace,
        j1_det,
        class,
        general_deviation,
    })
}

/// J(E*) in the simplified form obtained by substituting the steady-state
/// relations into the general Jacobian.
pub fn jacobian_at_estar_closed_form(params: &ModelParameters, estar: &State) -> Matrix3 {
    let State { t, i, v } = *estar;
    let ModelParameters {
        s,
        r_t,
        r_i,
        t_max,
        q,
        c,
        ..
    } = *params;
    let k = params.infectivity();
    [
        [-s / t - r_t * t / t_max - q * i / t, -r_t * t / t_max + q, -k * t],
        [-r_i * i / t_max + k * v, -r_i * i / t_max - k * v * t / i, k * t],
        [0.0, params.production(), -c],
    ]
}

/// Coefficients of `λ³ + A1 λ² + A2 λ + A3` for J(E*), from the closed
/// forms, next to the same coefficients from the principal-minor expansion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacteristicCoefficients {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    /// (trace, sum of principal 2×2 minors, determinant) expansion of the
    /// general Jacobian: `(-tr, Σ minors, -det)`.
    pub oracle: [f64; 3],
    pub max_deviation: f64,
}

impl CharacteristicCoefficients {
    pub fn agrees(&self) -> bool {
        self.max_deviation <= CHAR_COEFF_AGREEMENT
    }
}

/// `(-trace, Σ principal 2×2 minors, -det)` of a 3×3 matrix.
pub fn minor_expansion(m: &Matrix3) -> [f64; 3] {
    let trace = m[0][0] + m[1][1] + m[2][2];
    let minors = (m[0][0] * m[1][1] - m[0][1] * m[1][0])
        + (m[0][0] * m[2][2] - m[0][2] * m[2][0])
        + (m[1][1] * m[2][2] - m[1][2] * m[2][1]);
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    [-trace, minors, -det]
}

pub fn characteristic_coefficients(params: &ModelParameters, estar: &State) -> Result<CharacteristicCoefficients> {
    if !(estar.t > 0.0 && estar.i > 0.0) {
        return Err(Error::Domain(format!(
            "characteristic coefficients need T*, I* > 0, got {estar:?}"
        )));
    }
    let dc = derive_constants(params)?;
    let a = dc.a;
    let delta = dc.delta;
    let State { t, i, .. } = *estar;
    let ModelParameters {
        s,
        r_t,
        r_i,
        t_max,
        q,
        c,
        ..
    } = *params;
    let tm2 = t_max * t_max;

    let a1 = c + s / t + (r_t * t + r_i * i + a * t) / t_max + q * i / t;
    let a2 = c * s / t
        + (c * r_t * t + s * a + c * r_i * i) / t_max
        + q * (i / t) * (r_i - delta)
        + s * r_i * i / (t * t_max)
        + r_t * a * t * (t + i) / tm2
        + c * q * i / t
        + q * a * i / t_max;
    let a3 = c * s * r_i * i / (t * t_max) + c * a * a * i * t / tm2 - c * a * r_i * i * t / tm2
        + c * a * r_t * i * t / tm2
        + q * c * (i / t) * (r_i - delta);

    let oracle = minor_expansion(&jacobian(params, estar));
    let max_deviation = [a1, a2, a3]
        .iter()
        .zip(oracle)
        .map(|(x, y)| rel_diff(*x, y))
        .fold(0.0, f64::max);
    if max_deviation > CHAR_COEFF_INTEGRITY {
        return Err(Error::Integrity(format!(
            "characteristic coefficients ({a1}, {a2}, {a3}) vs minor expansion {oracle:?}"
        )));
    }
    Ok(CharacteristicCoefficients {
        a1,
        a2,
        a3,
        oracle,
        max_deviation,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RouthHurwitz {
    pub delta2: f64,
    pub class: LocalClass,
    pub roots: [Complex64; 3],
    pub max_real_part: f64,
    /// Whether `class` matches the sign of `max_real_part`. Always true in
    /// the marginal band.
    pub roots_agree: bool,
}

pub fn routh_hurwitz(a1: f64, a2: f64, a3: f64) -> RouthHurwitz {
    let delta2 = a1 * a2 - a3;
    let class = if [a1, a3, delta2].iter().any(|x| x.abs() <= MARGINAL_BAND) {
        LocalClass::Marginal
    } else if a1 > 0.0 && a3 > 0.0 && delta2 > 0.0 {
        LocalClass::LocAsympStable
    } else {
        LocalClass::Unstable
    };
    let roots = cubic_roots(a1, a2, a3);
    let max_real_part = roots.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let roots_agree = match class {
        LocalClass::LocAsympStable => max_real_part < 0.0,
        LocalClass::Unstable => max_real_part > 0.0,
        LocalClass::Marginal => true,
    };
    RouthHurwitz {
        delta2,
        class,
        roots,
        max_real_part,
        roots_agree,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EStarAnalysis {
    pub state: State,
    pub jacobian: Matrix3,
    /// Closed-form J(E*) vs general Jacobian, entrywise.
    pub closed_form_deviation: f64,
    pub coefficients: CharacteristicCoefficients,
    pub routh_hurwitz: RouthHurwitz,
}

pub fn analyze_estar(params: &ModelParameters, estar: &State) -> Result<EStarAnalysis> {
    let closed = jacobian_at_estar_closed_form(params, estar);
    let closed_form_deviation = jacobian_deviation(params, estar, &closed);
    let coefficients = characteristic_coefficients(params, estar)?;
    let routh_hurwitz = routh_hurwitz(coefficients.a1, coefficients.a2, coefficients.a3);
    Ok(EStarAnalysis {
        state: *estar,
        jacobian: jacobian(params, estar),
        closed_form_deviation,
        coefficients,
        routh_hurwitz,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub r0: f64,
    pub e0: E0Analysis,
    pub existence: ExistenceReport,
    pub estar: Option<EStarAnalysis>,
}

impl StabilityReport {
    pub fn estar_present(&self) -> bool {
        self.estar.is_some()
    }
}

pub fn stability_report(params: &ModelParameters) -> Result<StabilityReport> {
    let e0 = jacobian_at_e0(params)?;
    let existence = infected_equilibrium(params)?;
    let estar = existence
        .unique()
        .map(|e| analyze_estar(params, &e.state))
        .transpose()?;
    Ok(StabilityReport {
        r0: e0.r0,
        e0,
        existence,
        estar,
    })
}
