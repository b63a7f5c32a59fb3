//! Repo-wide numerical tolerances.
//!
//! Every threshold used by an equilibrium, agreement or classification check
//! lives here so that the library, the CLI and the acceptance suite agree.

/// Componentwise-relative vector-field residual accepted for a reported equilibrium.
pub const EQUILIBRIUM_RESIDUAL: f64 = 1e-8;

/// Closed-form T⁰ residual in the scalar uninfected-state equation.
pub const UNINFECTED_RESIDUAL: f64 = 1e-9;

/// Agreement between the radical closed form of T* and the quadratic root.
pub const RADICAL_AGREEMENT: f64 = 1e-9;

/// Closed-form Jacobians vs the general Jacobian, entrywise relative.
pub const JACOBIAN_AGREEMENT: f64 = 1e-10;

/// Characteristic-cubic closed forms vs the minor expansion.
pub const CHAR_COEFF_AGREEMENT: f64 = 1e-8;

/// Beyond this the closed forms are considered wrong, not merely imprecise.
pub const CHAR_COEFF_INTEGRITY: f64 = 1e-6;

/// Closed-form R0 vs the next-generation spectral radius.
pub const R0_SPECTRAL_AGREEMENT: f64 = 1e-12;

/// Width of the "marginal" band around zero for Routh–Hurwitz quantities.
pub const MARGINAL_BAND: f64 = 1e-12;

/// Two evaluations of dL/dt, relative to the largest term involved.
pub const LYAPUNOV_AGREEMENT: f64 = 1e-9;

/// A sampled dL/dt counts as a violation when it exceeds this multiple of
/// the largest term that entered its evaluation.
pub const LYAPUNOV_SIGN: f64 = 1e-9;

/// Slack on the invariant-set bounds T+I ≤ T̃0 and V ≤ λ0.
pub const BOUND_SLACK: f64 = 1e-6;

/// Relative tolerance for the equality hypotheses of the E* certificate.
pub const HYPOTHESIS_EQUALITY: f64 = 1e-9;

/// `|a - b| <= rtol * max(|a|, |b|)`, with exact equality always accepted.
pub fn rel_close(a: f64, b: f64, rtol: f64) -> bool {
    a == b || (a - b).abs() <= rtol * a.abs().max(b.abs())
}

/// Relative deviation `|a - b| / max(|a|, |b|)`, zero when both vanish.
pub fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}
