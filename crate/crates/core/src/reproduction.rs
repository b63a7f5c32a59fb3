//! Basic reproduction number, by closed form and by next-generation matrix.

use crate::equilibria::uninfected_equilibrium;
use crate::error::{Error, Result};
use crate::params::ModelParameters;
use crate::roots::eigenvalues_2x2;
use crate::tolerances::R0_SPECTRAL_AGREEMENT;

pub type Matrix2 = [[f64; 2]; 2];

/// R0 = (r_I/δ)(1 - T0/T_max) + (1-θ)βpT0/(cδ) for a given uninfected level T0.
///
/// Exposed separately from [`r0`] so that an externally quoted T0 can be
/// plugged in unchanged.
pub fn r0_from_t0(params: &ModelParameters, t0: f64) -> Result<f64> {
    let delta = params.delta();
    if delta == 0.0 {
        return Err(Error::Domain("R0 undefined for d_I + q = 0".into()));
    }
    if !(t0 > 0.0) {
        return Err(Error::Domain(format!("T0 must be positive, got {t0}")));
    }
    let r0 = params.r_i / delta * (1.0 - t0 / params.t_max)
        + params.one_minus_theta() * params.beta * t0 * params.p / (params.c * delta);
    if !r0.is_finite() {
        return Err(Error::Domain(format!("R0 is not finite for T0 = {t0}")));
    }
    Ok(r0)
}

pub fn r0(params: &ModelParameters) -> Result<f64> {
    let t0 = uninfected_equilibrium(params)?.state.t;
    r0_from_t0(params, t0)
}

/// Next-generation decomposition of the (I, V) subsystem at E⁰.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NextGenDecomposition {
    /// Jacobian of the new-infection terms.
    pub df: Matrix2,
    /// Jacobian of the transfer terms, lower triangular with diagonal (-δ, -c).
    pub dv: Matrix2,
    /// K = -DF·DV⁻¹.
    pub k: Matrix2,
    /// Spectral radius of K.
    pub rho: f64,
}

impl NextGenDecomposition {
    /// The splitting needs a nonnegative new-infection matrix. DF's (1,1)
    /// entry turns negative once T⁰ exceeds T_max, which happens only when
    /// s > d_T T_max; the closed form is then negative while rho is not.
    pub fn splitting_valid(&self) -> bool {
        self.df.iter().flatten().all(|x| *x >= 0.0)
    }
}

pub fn r0_spectral(params: &ModelParameters) -> Result<NextGenDecomposition> {
    let t0 = uninfected_equilibrium(params)?.state.t;
    let delta = params.delta();
    let c = params.c;
    if delta == 0.0 || c == 0.0 {
        return Err(Error::Domain("transfer matrix DV is singular".into()));
    }

    let df = [
        [params.r_i * (1.0 - t0 / params.t_max), params.infectivity() * t0],
        [0.0, 0.0],
    ];
    let dv = [[-delta, 0.0], [params.production(), -c]];
    let dv_inv = [[-1.0 / delta, 0.0], [-params.production() / (c * delta), -1.0 / c]];
    let mut k = [[0.0; 2]; 2];
    for (r, row) in k.iter_mut().enumerate() {
        for (col, entry) in row.iter_mut().enumerate() {
            *entry = -(df[r][0] * dv_inv[0][col] + df[r][1] * dv_inv[1][col]);
        }
    }
    let rho = eigenvalues_2x2(k).iter().map(|z| z.norm()).fold(0.0, f64::max);

    Ok(NextGenDecomposition { df, dv, k, rho })
}

/// Closed-form and spectral R0 together with their relative disagreement.
pub fn r0_checked(params: &ModelParameters) -> Result<(f64, NextGenDecomposition)> {
    let closed = r0(params)?;
    let ngm = r0_spectral(params)?;
    if !ngm.splitting_valid() {
        return Err(Error::Domain(format!(
            "next-generation splitting undefined: T0 exceeds T_max (DF = {:?})",
            ngm.df
        )));
    }
    let dev = (closed - ngm.rho).abs() / closed.abs().max(1.0);
    if dev > R0_SPECTRAL_AGREEMENT {
        return Err(Error::Integrity(format!(
            "closed-form R0 {closed} vs spectral radius {} (relative {dev:e})",
            ngm.rho
        )));
    }
    Ok((closed, ngm))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vanishes_without_infection_at_capacity() {
        let p = ModelParameters {
            beta: 0.0,
            ..ModelParameters::S1
        };
        assert_eq!(r0_from_t0(&p, p.t_max).unwrap(), 0.0);
    }

    #[test]
    fn logistic_case_closed_form() {
        let p = ModelParameters {
            s: 0.0,
            beta: 0.0,
            ..ModelParameters::S2
        };
        let expected = p.r_i / p.delta() * (p.d_t / p.r_t);
        assert!((r0(&p).unwrap() - expected).abs() <= 1e-14 * expected);
    }

    #[test]
    fn k_has_zero_second_row() {
        for p in [ModelParameters::S1, ModelParameters::S2] {
            let ngm = r0_spectral(&p).unwrap();
            assert_eq!(ngm.k[1], [0.0, 0.0]);
            assert!(ngm.dv[0][0] < 0.0 && ngm.dv[1][1] < 0.0 && ngm.dv[0][1] == 0.0);
        }
    }

    #[test]
    fn spectral_radius_zero_without_infection() {
        let p = ModelParameters {
            r_i: 0.0,
            beta: 0.0,
            ..ModelParameters::S1
        };
        assert_eq!(r0_spectral(&p).unwrap().rho, 0.0);
    }

    #[test]
    fn full_efficacy_limit() {
        let p = ModelParameters {
            eta: 1.0 - 1e-12,
            ..ModelParameters::S2
        };
        let t0 = 5e6;
        let limit = p.r_i / p.delta() * (1.0 - t0 / p.t_max);
        assert!((r0_from_t0(&p, t0).unwrap() - limit).abs() < 1e-9);
    }

    #[test]
    fn splitting_needs_t0_below_capacity() {
        let p = ModelParameters {
            s: 1e6,
            ..ModelParameters::S1
        };
        let ngm = r0_spectral(&p).unwrap();
        assert!(!ngm.splitting_valid());
        let t0 = crate::uninfected_equilibrium(&p).unwrap().state.t;
        assert!(t0 > p.t_max);
        assert!(matches!(r0_checked(&p), Err(Error::Domain(_))));
        assert!(r0_checked(&ModelParameters::S2).is_ok());
    }

    #[test]
    fn undefined_without_removal() {
        let p = ModelParameters {
            d_i: 0.0,
            q: 0.0,
            ..ModelParameters::S1
        };
        assert!(r0_from_t0(&p, 1e6).is_err());
        assert!(r0_spectral(&p).is_err());
    }
}
