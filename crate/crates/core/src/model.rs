//! Vector field and Jacobian of the T–I–V system.
//!
//! ```text
//! dT/dt = s + r_T T (1 - (T+I)/T_max) - d_T T - (1-η)βVT + qI
//! dI/dt = r_I I (1 - (T+I)/T_max) - d_I I + (1-η)βVT - qI
//! dV/dt = (1-ε)pI - cV
//! ```
//!
//! The infection flux (1-η)βVT leaves T and enters I.

use crate::error::{Error, Result};
use crate::params::{ModelParameters, State};

pub type Matrix3 = [[f64; 3]; 3];

/// Time derivative of a [`State`], in units per day.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDerivative {
    pub dt: f64,
    pub di: f64,
    pub dv: f64,
}

impl StateDerivative {
    pub fn to_array(self) -> [f64; 3] {
        [self.dt, self.di, self.dv]
    }
}

/// Right-hand side without input checks; used inside the integrators.
#[inline]
pub(crate) fn rhs(params: &ModelParameters, x: &[f64; 3]) -> [f64; 3] {
    let [t, i, v] = *x;
    let crowding = 1.0 - (t + i) / params.t_max;
    let infection = params.infectivity() * v * t;
    [
        params.s + params.r_t * t * crowding - params.d_t * t - infection + params.q * i,
        params.r_i * i * crowding - params.d_i * i + infection - params.q * i,
        params.production() * i - params.c * v,
    ]
}

pub fn vector_field(params: &ModelParameters, state: &State) -> Result<StateDerivative> {
    if !state.is_finite() {
        return Err(Error::Domain(format!("non-finite state {state:?}")));
    }
    let [dt, di, dv] = rhs(params, &state.to_array());
    Ok(StateDerivative { dt, di, dv })
}

/// Sum of absolute values of the individual terms of each component of the
/// vector field. Used to turn residuals into componentwise-relative ones.
pub fn term_scales(params: &ModelParameters, state: &State) -> [f64; 3] {
    let State { t, i, v } = *state;
    let crowd = (t + i) / params.t_max;
    let infection = (params.infectivity() * v * t).abs();
    [
        params.s.abs()
            + (params.r_t * t).abs()
            + (params.r_t * t * crowd).abs()
            + (params.d_t * t).abs()
            + infection
            + (params.q * i).abs(),
        (params.r_i * i).abs()
            + (params.r_i * i * crowd).abs()
            + (params.d_i * i).abs()
            + infection
            + (params.q * i).abs(),
        (params.production() * i).abs() + (params.c * v).abs(),
    ]
}

/// Largest componentwise-relative residual `|f_k| / scale_k` at `state`.
///
/// A component whose terms are all zero contributes zero.
pub fn relative_residual(params: &ModelParameters, state: &State) -> f64 {
    let f = rhs(params, &state.to_array());
    let scales = term_scales(params, state);
    f.iter()
        .zip(scales)
        .map(|(fk, sk)| if sk == 0.0 { fk.abs() } else { fk.abs() / sk })
        .fold(0.0, f64::max)
}

pub fn jacobian(params: &ModelParameters, state: &State) -> Matrix3 {
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
            r_t * (1.0 - (2.0 * t + i) / t_max) - d_t - k * v,
            -r_t * t / t_max + q,
            -k * t,
        ],
        [
            -r_i * i / t_max + k * v,
            r_i * (1.0 - (t + 2.0 * i) / t_max) - d_i - q,
            k * t,
        ],
        [0.0, params.production(), -c],
    ]
}
