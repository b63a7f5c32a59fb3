//! Model constants, derived combinations and the two reference scenarios.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// The twelve constants of the model.
///
/// Units: cells·ml⁻¹ for `t_max`, cells·ml⁻¹·day⁻¹ for `s`, virus⁻¹·ml·day⁻¹
/// for `beta`, virus·cell⁻¹·day⁻¹ for `p`, day⁻¹ for every other rate. The
/// drug efficacies `eta` (infection blocking) and `epsilon` (production
/// blocking) are dimensionless fractions in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParameters {
    pub s: f64,
    pub r_t: f64,
    pub r_i: f64,
    pub d_t: f64,
    pub d_i: f64,
    pub t_max: f64,
    pub beta: f64,
    pub p: f64,
    pub c: f64,
    pub q: f64,
    pub eta: f64,
    pub epsilon: f64,
}

/// Names of the parameter fields, spelled as in scenario files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParamName {
    S,
    RT,
    RI,
    DT,
    DI,
    TMax,
    Beta,
    P,
    C,
    Q,
    Eta,
    Epsilon,
}

impl ParamName {
    pub const ALL: [ParamName; 12] = [
        ParamName::S,
        ParamName::RT,
        ParamName::RI,
        ParamName::DT,
        ParamName::DI,
        ParamName::TMax,
        ParamName::Beta,
        ParamName::P,
        ParamName::C,
        ParamName::Q,
        ParamName::Eta,
        ParamName::Epsilon,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ParamName::S => "s",
            ParamName::RT => "r_T",
            ParamName::RI => "r_I",
            ParamName::DT => "d_T",
            ParamName::DI => "d_I",
            ParamName::TMax => "T_max",
            ParamName::Beta => "beta",
            ParamName::P => "p",
            ParamName::C => "c",
            ParamName::Q => "q",
            ParamName::Eta => "eta",
            ParamName::Epsilon => "epsilon",
        }
    }

    /// Typical range `(min, max)` for this parameter, where one is known.
    pub fn typical_range(self) -> Option<(f64, f64)> {
        match self {
            ParamName::Beta => Some((1e-8, 1e-6)),
            ParamName::TMax => Some((4e6, 1.3e7)),
            ParamName::P => Some((0.1, 44.0)),
            ParamName::S => Some((1.0, 1.8e5)),
            ParamName::Q => Some((0.0, 1.0)),
            ParamName::C => Some((0.8, 22.0)),
            ParamName::DT => Some((1e-3, 1.4e-2)),
            ParamName::DI => Some((1e-3, 0.5)),
            ParamName::RT => Some((2e-3, 3.4)),
            ParamName::RI | ParamName::Eta | ParamName::Epsilon => None,
        }
    }
}

impl fmt::Display for ParamName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ParamName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ParamName::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown parameter name `{s}`")))
    }
}

/// Soft findings from [`ModelParameters::validate`]; never fatal.
#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    /// r_I ≤ r_T does not hold.
    InfectedProliferateFaster { r_i: f64, r_t: f64 },
    /// s ≤ d_T·T_max does not hold.
    InfluxExceedsTurnover { s: f64, d_t_t_max: f64 },
    /// d_I ≥ d_T does not hold.
    InfectedDieSlower { d_i: f64, d_t: f64 },
    /// Value lies outside the typical parameter range.
    OutsideTypicalRange {
        name: ParamName,
        value: f64,
        min: f64,
        max: f64,
    },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::InfectedProliferateFaster { r_i, r_t } => {
                write!(f, "r_I = {r_i} exceeds r_T = {r_t} (expected r_I <= r_T)")
            }
            Warning::InfluxExceedsTurnover { s, d_t_t_max } => {
                write!(f, "s = {s} exceeds d_T*T_max = {d_t_t_max} (expected s <= d_T*T_max)")
            }
            Warning::InfectedDieSlower { d_i, d_t } => {
                write!(f, "d_I = {d_i} is below d_T = {d_t} (expected d_I >= d_T)")
            }
            Warning::OutsideTypicalRange { name, value, min, max } => {
                write!(f, "{name} = {value} outside typical range [{min}, {max}]")
            }
        }
    }
}

impl ModelParameters {
    /// Parameters of the R0 < 1 reference run (S1).
    pub const S1: ModelParameters = ModelParameters {
        s: 10.0,
        r_t: 0.05,
        r_i: 0.112,
        d_t: 0.001,
        d_i: 0.1,
        t_max: 1e7,
        beta: 1e-7,
        p: 1.0,
        c: 2.0,
        q: 0.5,
        eta: 1e-7,
        epsilon: 1e-8,
    };

    /// Parameters of the R0 > 1 reference run (S2).
    pub const S2: ModelParameters = ModelParameters {
        s: 10.0,
        r_t: 2.0,
        r_i: 0.112,
        d_t: 0.01,
        d_i: 0.3,
        t_max: 1e7,
        beta: 1e-7,
        p: 1.0,
        c: 0.5,
        q: 0.5,
        eta: 1e-4,
        epsilon: 1e-4,
    };

    pub fn get(&self, name: ParamName) -> f64 {
        match name {
            ParamName::S => self.s,
            ParamName::RT => self.r_t,
            ParamName::RI => self.r_i,
            ParamName::DT => self.d_t,
            ParamName::DI => self.d_i,
            ParamName::TMax => self.t_max,
            ParamName::Beta => self.beta,
            ParamName::P => self.p,
            ParamName::C => self.c,
            ParamName::Q => self.q,
            ParamName::Eta => self.eta,
            ParamName::Epsilon => self.epsilon,
        }
    }

    pub fn set(&mut self, name: ParamName, value: f64) {
        let slot = match name {
            ParamName::S => &mut self.s,
            ParamName::RT => &mut self.r_t,
            ParamName::RI => &mut self.r_i,
            ParamName::DT => &mut self.d_t,
            ParamName::DI => &mut self.d_i,
            ParamName::TMax => &mut self.t_max,
            ParamName::Beta => &mut self.beta,
            ParamName::P => &mut self.p,
            ParamName::C => &mut self.c,
            ParamName::Q => &mut self.q,
            ParamName::Eta => &mut self.eta,
            ParamName::Epsilon => &mut self.epsilon,
        };
        *slot = value;
    }

    pub fn with(mut self, name: ParamName, value: f64) -> Self {
        self.set(name, value);
        self
    }

    /// Checks the hard constraints and returns the soft ones as warnings.
    pub fn validate(&self) -> Result<Vec<Warning>> {
        for name in ParamName::ALL {
            let value = self.get(name);
            if !value.is_finite() {
                return Err(Error::InvalidParameter {
                    name: name.as_str(),
                    value,
                    reason: "must be finite",
                });
            }
            if value < 0.0 {
                return Err(Error::InvalidParameter {
                    name: name.as_str(),
                    value,
                    reason: "must be non-negative",
                });
            }
        }
        if self.t_max <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "T_max",
                value: self.t_max,
                reason: "carrying capacity must be positive",
            });
        }
        if self.c <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "c",
                value: self.c,
                reason: "clearance rate must be positive",
            });
        }
        if self.eta >= 1.0 {
            return Err(Error::InvalidParameter {
                name: "eta",
                value: self.eta,
                reason: "efficacy must be below 1",
            });
        }
        if self.epsilon >= 1.0 {
            return Err(Error::InvalidParameter {
                name: "epsilon",
                value: self.epsilon,
                reason: "efficacy must be below 1",
            });
        }

        let mut warnings = Vec::new();
        if self.r_i > self.r_t {
            warnings.push(Warning::InfectedProliferateFaster {
                r_i: self.r_i,
                r_t: self.r_t,
            });
        }
        if self.s > self.d_t * self.t_max {
            warnings.push(Warning::InfluxExceedsTurnover {
                s: self.s,
                d_t_t_max: self.d_t * self.t_max,
            });
        }
        if self.d_i < self.d_t {
            warnings.push(Warning::InfectedDieSlower {
                d_i: self.d_i,
                d_t: self.d_t,
            });
        }
        for name in ParamName::ALL {
            if let Some((min, max)) = name.typical_range() {
                let value = self.get(name);
                if value < min || value > max {
                    warnings.push(Warning::OutsideTypicalRange { name, value, min, max });
                }
            }
        }
        Ok(warnings)
    }

    /// `1 - θ = (1 - ε)(1 - η)`.
    pub fn one_minus_theta(&self) -> f64 {
        (1.0 - self.epsilon) * (1.0 - self.eta)
    }

    /// δ = d_I + q, total removal rate of infected cells.
    pub fn delta(&self) -> f64 {
        self.d_i + self.q
    }

    /// Effective infection rate `(1 - η)β`.
    pub fn infectivity(&self) -> f64 {
        (1.0 - self.eta) * self.beta
    }

    /// Effective virion production `(1 - ε)p`.
    pub fn production(&self) -> f64 {
        (1.0 - self.epsilon) * self.p
    }
}

/// Algebraic combinations of the parameters that recur in the analysis.
///
/// `h`, `d` and `f` only exist when r_T, r_I and A are nonzero; `t_tilde0`
/// only when r_I is nonzero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedConstants {
    pub theta: f64,
    pub delta: f64,
    /// A = (1-θ)βpT_max/c, day⁻¹.
    pub a: f64,
    /// H = A²/(r_I r_T) + A/r_I - A/r_T.
    pub h: Option<f64>,
    /// Linear-coefficient combination of the T* radical, cells·ml⁻¹.
    pub d: Option<f64>,
    /// q-dependent part of the T* discriminant, (cells·ml⁻¹)².
    pub f: Option<f64>,
    /// Asymptotic upper bound on T + I, cells·ml⁻¹.
    pub t_tilde0: Option<f64>,
}

pub fn derive_constants(params: &ModelParameters) -> Result<DerivedConstants> {
    params.validate()?;
    let ModelParameters {
        s,
        r_t,
        r_i,
        d_t,
        t_max,
        q,
        ..
    } = *params;

    let one_minus_theta = params.one_minus_theta();
    let theta = 1.0 - one_minus_theta;
    let delta = params.delta();
    let a = one_minus_theta * params.beta * params.p * t_max / params.c;

    let h = (r_i > 0.0 && r_t > 0.0).then(|| a * a / (r_i * r_t) + a / r_i - a / r_t);
    let nondegenerate_h = h.filter(|h| *h != 0.0);

    // Expanded so that A = 0 needs no special case.
    let d = (r_i > 0.0 && r_t > 0.0)
        .then(|| t_max * ((a + d_t + q) / r_t - delta * (a + r_t) / (r_i * r_t) - q * a / (r_t * r_i)));
    let f = nondegenerate_h
        .map(|h| 4.0 * a * q * t_max * t_max / (h * h * r_t * r_t * r_i * r_i) * (a + r_t - r_i) * (r_i - delta));

    let t_tilde0 = (r_i > 0.0).then(|| {
        let net = r_t - d_t;
        t_max / (2.0 * r_i) * ((net * net + 4.0 * s * r_i / t_max).sqrt() + net)
    });

    let all = [Some(theta), Some(delta), Some(a), h, d, f, t_tilde0];
    if all.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Domain(format!(
            "derived constants are not finite for {params:?}"
        )));
    }

    Ok(DerivedConstants {
        theta,
        delta,
        a,
        h,
        d,
        f,
        t_tilde0,
    })
}

/// Uninfected hepatocytes `t`, infected hepatocytes `i` and free virus `v`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct State {
    pub t: f64,
    pub i: f64,
    pub v: f64,
}

impl State {
    /// Initial condition shared by both reference runs.
    pub const REFERENCE_INITIAL: State = State { t: 1e3, i: 2.0, v: 1.0 };

    pub const fn new(t: f64, i: f64, v: f64) -> Self {
        State { t, i, v }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.t, self.i, self.v]
    }

    pub fn from_array(x: [f64; 3]) -> Self {
        State::new(x[0], x[1], x[2])
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.i.is_finite() && self.v.is_finite()
    }

    pub fn is_positive(&self) -> bool {
        self.t > 0.0 && self.i > 0.0 && self.v > 0.0
    }
}
