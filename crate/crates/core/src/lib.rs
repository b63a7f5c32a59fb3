//! Within-host hepatitis C dynamics with hepatocyte proliferation and
//! spontaneous cure.
//!
//! The model tracks uninfected hepatocytes `T`, infected hepatocytes `I` and
//! free virus `V` (see [`model`]). The crate computes the equilibria and R0,
//! classifies their local stability, samples Lyapunov derivatives for global
//! stability, integrates trajectories with runtime invariant checks and runs
//! parameter sweeps.
//!
//! ```
//! use hcv_dynamics::{r0, ModelParameters};
//!
//! let r = r0(&ModelParameters::S2).unwrap();
//! assert!(r > 1.0);
//! ```

pub mod equilibria;
pub mod error;
pub mod model;
pub mod params;
pub mod reproduction;
pub mod roots;
pub mod simulate;
pub mod stability;
pub mod sweep;
pub mod tolerances;

pub use equilibria::{
    existence_regime, infected_equilibrium, uninfected_equilibrium, EquilibriumPoint, ExistenceReport, Regime,
};
pub use error::{Error, Result};
pub use model::{jacobian, vector_field, Matrix3, StateDerivative};
pub use params::{derive_constants, DerivedConstants, ModelParameters, ParamName, State, Warning};
pub use reproduction::{r0, r0_checked, r0_from_t0, r0_spectral};
pub use simulate::{asymptotic_bounds, check_invariants, integrate, Bounds, IntegratorConfig, Method, Trajectory};
pub use stability::{
    certify_global, stability_report, CertificateReport, GridSpec, LocalClass, StabilityReport, Target,
};
pub use sweep::{run_sweep, threshold_locate, SweepGrid, SweepSpec};
