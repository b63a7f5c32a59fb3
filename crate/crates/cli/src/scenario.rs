use std::fmt;
use std::str::FromStr;

use hcv_dynamics::simulate::{DEFAULT_ABS_TOL, DEFAULT_REL_TOL};
use hcv_dynamics::{IntegratorConfig, Method, ModelParameters, ParamName, State};

use crate::fmt_f64;
use crate::kv::{read_sections, ParseError, ParseErrorKind, Section};

/// RK4 step used when a scenario selects rk4 without giving `step`.
pub const DEFAULT_RK4_STEP: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodKind {
    Rk4,
    Rk45,
}

impl MethodKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MethodKind::Rk4 => "rk4",
            MethodKind::Rk45 => "rk45",
        }
    }
}

impl fmt::Display for MethodKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MethodKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "rk4" => Ok(MethodKind::Rk4),
            "rk45" => Ok(MethodKind::Rk45),
            other => Err(format!("unknown method `{other}` (expected rk4 or rk45)")),
        }
    }
}

/// Integrator settings a scenario may pin; unset fields fall back to defaults.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IntegratorOverrides {
    pub t_end: Option<f64>,
    pub method: Option<MethodKind>,
    pub step: Option<f64>,
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
}

impl IntegratorOverrides {
    /// Resolves to a full configuration. Command-line values win over the file.
    pub fn resolve(&self, t_end: Option<f64>, method: Option<MethodKind>) -> IntegratorConfig {
        let defaults = IntegratorConfig::default();
        let method = match method.or(self.method).unwrap_or(MethodKind::Rk45) {
            MethodKind::Rk4 => Method::Rk4 {
                step: self.step.unwrap_or(DEFAULT_RK4_STEP),
            },
            MethodKind::Rk45 => Method::rk45(
                self.rel_tol.unwrap_or(DEFAULT_REL_TOL),
                self.abs_tol.unwrap_or(DEFAULT_ABS_TOL),
            ),
        };
        IntegratorConfig {
            method,
            t_end: t_end.or(self.t_end).unwrap_or(defaults.t_end),
            ..defaults
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioFile {
    pub name: Option<String>,
    pub params: ModelParameters,
    pub initial: State,
    pub integrator: IntegratorOverrides,
}

const INITIAL_KEYS: [&str; 3] = ["T0", "I0", "V0"];
const OPTIONAL_KEYS: [&str; 6] = ["name", "t_end", "method", "step", "rel_tol", "abs_tol"];

pub(crate) fn param_keys() -> impl Iterator<Item = &'static str> {
    ParamName::ALL.iter().map(|n| n.as_str())
}

pub(crate) fn read_params(section: &Section) -> Result<ModelParameters, ParseError> {
    let mut params = ModelParameters::S1;
    for name in ParamName::ALL {
        params.set(name, section.number(name.as_str())?);
    }
    Ok(params)
}

pub fn parse_scenario(text: &str) -> Result<ScenarioFile, ParseError> {
    let sections = read_sections(text)?;
    if let Some(extra) = sections.get(1) {
        let (line, name) = extra.header.clone().expect("nested sections have headers");
        return Err(ParseError::at(
            line,
            ParseErrorKind::Syntax(format!("unexpected section `[{name}]` in a scenario file")),
        ));
    }
    let top = &sections[0];
    let allowed: Vec<&str> = param_keys().chain(INITIAL_KEYS).chain(OPTIONAL_KEYS).collect();
    top.check_keys(&allowed)?;

    let params = read_params(top)?;
    let initial = State::new(top.number("T0")?, top.number("I0")?, top.number("V0")?);
    let method = top
        .entries
        .get("method")
        .map(|e| {
            e.value.parse::<MethodKind>().map_err(|reason| {
                ParseError::at(
                    e.line,
                    ParseErrorKind::Malformed {
                        key: "method".into(),
                        value: e.value.clone(),
                        reason,
                    },
                )
            })
        })
        .transpose()?;
    Ok(ScenarioFile {
        name: top.entries.get("name").map(|e| e.value.clone()),
        params,
        initial,
        integrator: IntegratorOverrides {
            t_end: top.optional_number("t_end")?,
            method,
            step: top.optional_number("step")?,
            rel_tol: top.optional_number("rel_tol")?,
            abs_tol: top.optional_number("abs_tol")?,
        },
    })
}

/// Writes `scenario` back in the file format. Names containing `#` or line
/// breaks cannot be represented.
pub fn render_scenario(scenario: &ScenarioFile) -> String {
    let mut out = String::new();
    let mut line = |k: &str, v: String| {
        out.push_str(k);
        out.push_str(" = ");
        out.push_str(&v);
        out.push('\n');
    };
    if let Some(name) = &scenario.name {
        line("name", name.clone());
    }
    for name in ParamName::ALL {
        line(name.as_str(), fmt_f64(scenario.params.get(name)));
    }
    let st = scenario.initial;
    for (k, v) in INITIAL_KEYS.iter().zip([st.t, st.i, st.v]) {
        line(k, fmt_f64(v));
    }
    let o = &scenario.integrator;
    if let Some(v) = o.t_end {
        line("t_end", fmt_f64(v));
    }
    if let Some(m) = o.method {
        line("method", m.to_string());
    }
    for (k, v) in [("step", o.step), ("rel_tol", o.rel_tol), ("abs_tol", o.abs_tol)] {
        if let Some(v) = v {
            line(k, fmt_f64(v));
        }
    }
    out
}
