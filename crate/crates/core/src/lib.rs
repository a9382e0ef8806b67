//! Optimal transmit-power policies for a spectrum-sharing secondary link
//! under joint average transmit-power and average interference-power
//! constraints, with multi-user diversity over Rayleigh and Nakagami-m fading.
//!
//! The pieces, bottom up:
//!
//! * [`specfun`]: log-gamma, incomplete gamma, Beta, binomials and `2F1`;
//! * [`numerics`]: adaptive Gauss-Kronrod quadrature and guarded bisection;
//! * [`channel`]: gain laws and seeded sampling;
//! * [`ratio`]: distributions of the secondary-to-cross gain ratio;
//! * [`policy`]: power policies and their expectations;
//! * [`solver`]: the dual multipliers;
//! * [`metrics`]: ergodic capacity and outage;
//! * [`montecarlo`]: simulation oracles.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod error;
pub mod metrics;
pub mod montecarlo;
pub mod numerics;
pub mod policy;
pub mod ratio;
pub mod solver;
pub mod specfun;

pub use channel::{FadingFamily, FadingSpec, SystemConfig};
pub use error::{Error, Result};
pub use metrics::{Formulation, MetricsResult};
pub use montecarlo::{SimMode, SimResult, SimSpec};
pub use numerics::QuadratureSettings;
pub use policy::{db_to_linear, ConstraintSet, DualPair, InterferenceMode, Policy, PolicyKind};
pub use ratio::{MudParams, RatioMode, RatioParams};
pub use solver::{BindingSet, SolveReport, SolverSettings};
