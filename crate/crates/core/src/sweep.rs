//! One- and two-parameter sweeps over R0, the existence regime and the
//! local stability margin.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::equilibria::{infected_equilibrium, uninfected_equilibrium, Regime};
use crate::error::{Error, Result};
use crate::params::{ModelParameters, ParamName};
use crate::reproduction::r0_from_t0;
use crate::roots::bisect;
use crate::stability::{characteristic_coefficients, routh_hurwitz};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

impl FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Scale::Linear),
            "log" => Ok(Scale::Log),
            other => Err(Error::Config(format!("unknown scale `{other}`"))),
        }
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scale::Linear => "linear",
            Scale::Log => "log",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub param: ParamName,
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
    pub scale: Scale,
}

impl Axis {
    pub fn validate(&self) -> Result<()> {
        let p = self.param;
        if !(self.lo.is_finite() && self.hi.is_finite()) {
            return Err(Error::Config(format!("axis {p}: endpoints must be finite")));
        }
        if self.lo > self.hi {
            return Err(Error::Config(format!(
                "axis {p}: lo = {} exceeds hi = {}",
                self.lo, self.hi
            )));
        }
        if self.n < 2 {
            return Err(Error::Config(format!("axis {p}: need n >= 2, got {}", self.n)));
        }
        if self.scale == Scale::Log && self.lo <= 0.0 {
            return Err(Error::Config(format!("axis {p}: log scale needs lo > 0")));
        }
        Ok(())
    }

    /// Sample values, with both endpoints reproduced exactly.
    pub fn values(&self) -> Vec<f64> {
        let last = self.n - 1;
        (0..self.n)
            .map(|k| {
                if k == 0 {
                    self.lo
                } else if k == last {
                    self.hi
                } else {
                    let f = k as f64 / last as f64;
                    match self.scale {
                        Scale::Linear => self.lo + (self.hi - self.lo) * f,
                        Scale::Log => (self.lo.ln() + (self.hi.ln() - self.lo.ln()) * f).exp(),
                    }
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Output {
    R0,
    Regime,
    T0,
    EstarT,
    Delta2,
}

impl Output {
    pub const ALL: [Output; 5] = [Output::R0, Output::Regime, Output::T0, Output::EstarT, Output::Delta2];

    pub fn as_str(self) -> &'static str {
        match self {
            Output::R0 => "r0",
            Output::Regime => "regime",
            Output::T0 => "t0",
            Output::EstarT => "estar_T",
            Output::Delta2 => "delta2",
        }
    }

    fn needs_estar(self) -> bool {
        matches!(self, Output::EstarT | Output::Delta2)
    }
}

impl FromStr for Output {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Output::ALL
            .into_iter()
            .find(|o| o.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown sweep output `{s}`")))
    }
}

impl fmt::Display for Output {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base: ModelParameters,
    pub axis1: Axis,
    pub axis2: Option<Axis>,
    pub outputs: Vec<Output>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        self.axis1.validate()?;
        if let Some(a2) = &self.axis2 {
            a2.validate()?;
            if a2.param == self.axis1.param {
                return Err(Error::Config(format!("both axes sweep {}", a2.param)));
            }
        }
        if self.outputs.is_empty() {
            return Err(Error::Config("no outputs requested".into()));
        }
        for (k, o) in self.outputs.iter().enumerate() {
            if self.outputs[..k].contains(o) {
                return Err(Error::Config(format!("output {o} requested twice")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellStatus {
    Ok,
    InvalidParams,
    NoEquilibrium,
}

impl CellStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            CellStatus::Ok => "ok",
            CellStatus::InvalidParams => "invalid_params",
            CellStatus::NoEquilibrium => "no_equilibrium",
        }
    }
}

impl fmt::Display for CellStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CellValues {
    pub r0: Option<f64>,
    pub regime: Option<Regime>,
    pub t0: Option<f64>,
    pub estar_t: Option<f64>,
    pub delta2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub axis1: f64,
    pub axis2: Option<f64>,
    pub values: CellValues,
    pub status: CellStatus,
    /// Error text for cells that are not `ok`.
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub axis1: Vec<f64>,
    pub axis2: Option<Vec<f64>>,
    pub outputs: Vec<Output>,
    /// Row-major with axis1 varying fastest.
    pub cells: Vec<Cell>,
}

impl SweepGrid {
    pub fn cell(&self, i1: usize, i2: usize) -> &Cell {
        &self.cells[i1 + self.axis1.len() * i2]
    }
}

fn evaluate_cell(params: &ModelParameters, outputs: &[Output]) -> (CellValues, CellStatus, Option<String>) {
    let mut vals = CellValues::default();
    if let Err(e) = params.validate() {
        return (vals, CellStatus::InvalidParams, Some(e.to_string()));
    }
    let result = (|| -> Result<bool> {
        let t0 = uninfected_equilibrium(params)?.state.t;
        vals.t0 = Some(t0);
        vals.r0 = Some(r0_from_t0(params, t0)?);
        let wants_existence = outputs.iter().any(|o| *o == Output::Regime || o.needs_estar());
        if !wants_existence {
            return Ok(true);
        }
        let existence = infected_equilibrium(params)?;
        vals.regime = Some(existence.regime);
        let Some(estar) = existence.unique() else {
            return Ok(!outputs.iter().any(|o| o.needs_estar()));
        };
        vals.estar_t = Some(estar.state.t);
        if outputs.contains(&Output::Delta2) {
            let cc = characteristic_coefficients(params, &estar.state)?;
            vals.delta2 = Some(routh_hurwitz(cc.a1, cc.a2, cc.a3).delta2);
        }
        Ok(true)
    })();
    // Drop what was computed but not asked for.
    let keep = |o: Output| outputs.contains(&o);
    let filtered = CellValues {
        r0: vals.r0.filter(|_| keep(Output::R0)),
        regime: vals.regime.filter(|_| keep(Output::Regime)),
        t0: vals.t0.filter(|_| keep(Output::T0)),
        estar_t: vals.estar_t.filter(|_| keep(Output::EstarT)),
        delta2: vals.delta2.filter(|_| keep(Output::Delta2)),
    };
    match result {
        Ok(true) => (filtered, CellStatus::Ok, None),
        Ok(false) => (
            filtered,
            CellStatus::NoEquilibrium,
            Some("no unique infected equilibrium".into()),
        ),
        Err(e @ Error::InvalidParameter { .. }) => (filtered, CellStatus::InvalidParams, Some(e.to_string())),
        Err(e) => (filtered, CellStatus::NoEquilibrium, Some(e.to_string())),
    }
}

pub fn run_sweep(spec: &SweepSpec) -> Result<SweepGrid> {
    spec.validate()?;
    let a1 = spec.axis1.values();
    let a2 = spec.axis2.as_ref().map(Axis::values);
    let n1 = a1.len();
    let total = n1 * a2.as_ref().map_or(1, Vec::len);

    let cells = (0..total)
        .into_par_iter()
        .map(|k| {
            let x1 = a1[k % n1];
            let mut p = spec.base.with(spec.axis1.param, x1);
            let x2 = match (&spec.axis2, &a2) {
                (Some(ax), Some(vals)) => {
                    let x2 = vals[k / n1];
                    p = p.with(ax.param, x2);
                    Some(x2)
                }
                _ => None,
            };
            let (values, status, detail) = evaluate_cell(&p, &spec.outputs);
            Cell {
                axis1: x1,
                axis2: x2,
                values,
                status,
                detail,
            }
        })
        .collect();

    Ok(SweepGrid {
        axis1: a1,
        axis2: a2,
        outputs: spec.outputs.clone(),
        cells,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdTarget {
    /// R0 = 1.
    R0EqOne,
    /// R0 = 1 - q/δ.
    R0EqOneMinusQOverDelta,
}

impl ThresholdTarget {
    pub fn as_str(self) -> &'static str {
        match self {
            ThresholdTarget::R0EqOne => "r0_eq_1",
            ThresholdTarget::R0EqOneMinusQOverDelta => "r0_eq_1_minus_q_over_delta",
        }
    }

    pub fn level(self, params: &ModelParameters) -> f64 {
        match self {
            ThresholdTarget::R0EqOne => 1.0,
            ThresholdTarget::R0EqOneMinusQOverDelta => 1.0 - params.q / params.delta(),
        }
    }
}

impl FromStr for ThresholdTarget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "r0_eq_1" => Ok(ThresholdTarget::R0EqOne),
            "r0_eq_1_minus_q_over_delta" => Ok(ThresholdTarget::R0EqOneMinusQOverDelta),
            other => Err(Error::Config(format!("unknown threshold target `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    /// Axis value where R0 meets the target, and the scan bracket it came from.
    Found {
        value: f64,
        bracket: (f64, f64),
    },
    NotFound,
}

impl Threshold {
    pub fn value(&self) -> Option<f64> {
        match self {
            Threshold::Found { value, .. } => Some(*value),
            Threshold::NotFound => None,
        }
    }
}

/// Signed distance `R0 - target` at axis value `x`, or NaN where undefined.
fn threshold_gap(base: &ModelParameters, param: ParamName, target: ThresholdTarget, x: f64) -> f64 {
    let p = base.with(param, x);
    if p.validate().is_err() {
        return f64::NAN;
    }
    uninfected_equilibrium(&p)
        .and_then(|e| r0_from_t0(&p, e.state.t))
        .map(|r0| r0 - target.level(&p))
        .unwrap_or(f64::NAN)
}

/// Scans the single axis of `spec` for the first sign change of
/// `R0 - target` and refines it by bisection to relative 1e-10.
pub fn threshold_locate(spec: &SweepSpec, target: ThresholdTarget) -> Result<Threshold> {
    if spec.axis2.is_some() {
        return Err(Error::Config("threshold search needs a single axis".into()));
    }
    spec.axis1.validate()?;
    let param = spec.axis1.param;
    let xs = spec.axis1.values();
    let gaps: Vec<f64> = xs
        .par_iter()
        .map(|&x| threshold_gap(&spec.base, param, target, x))
        .collect();

    let mut prev: Option<(f64, f64)> = None;
    for (&x, &g) in xs.iter().zip(&gaps) {
        if g.is_nan() {
            prev = None;
            continue;
        }
        if g == 0.0 {
            return Ok(Threshold::Found {
                value: x,
                bracket: (x, x),
            });
        }
        if let Some((xp, gp)) = prev {
            if gp.signum() != g.signum() {
                let value = bisect(|y| threshold_gap(&spec.base, param, target, y), xp, x, 1e-10)
                    .ok_or_else(|| Error::Domain(format!("bisection lost the bracket [{xp}, {x}]")))?;
                return Ok(Threshold::Found {
                    value,
                    bracket: (xp, x),
                });
            }
        }
        prev = Some((x, g));
    }
    Ok(Threshold::NotFound)
}
