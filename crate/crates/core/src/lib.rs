//! Influence cascades on complete graphs with randomly drawn activation
//! thresholds, and their large-population fluid limits.
//!
//! Nodes hold i.i.d. thresholds from a configurable distribution and activate
//! once the accumulated influence from already-active nodes exceeds the
//! threshold. The crate provides three mutually cross-checkable routes
//! through the model:
//!
//! - [`sim`]: the exact discrete-time chain and its minislot-scaled variant,
//!   simulated without ever materializing per-node thresholds;
//! - [`ode`]: the fluid-limit ODE, driven by the hazard rate of the threshold
//!   distribution, with a closed form for uniform thresholds, terminal-spread
//!   formulas, an SIR comparator and the naive fixed-point baseline;
//! - [`discrete`]: the exact expected terminal spread of the finite system
//!   via a backward recursion.
//!
//! On top sit a deadline-constrained seed [`planner`] and a [`multiclass`]
//! community extension with a grid-search seeding optimizer.
//!
//! All numerics are generic over the floating-point scalar through
//! [`Real`]; the `*64` aliases below pin the common `f64` instantiations.
//!
//! ```
//! use hilt_core::ode::{integrate, terminal_spread, StepControl};
//! use hilt_core::sim::{run_cascade, HiltConfig};
//! use hilt_core::trajectory::Route;
//! use hilt_core::Dist64;
//!
//! // fluid route: integrate to (numerical) absorption
//! let ctrl = StepControl::default();
//! let traj = integrate(&Dist64::Uniform01, 0.9, 0.2, 100.0, &ctrl)?;
//! assert!((traj.final_active() - terminal_spread(0.9, 0.2)?).abs() < 1e-6);
//!
//! // chain route: one reproducible sample path of the finite system
//! let cfg = HiltConfig::new(1000, 0.9, 0.2, Dist64::Uniform01)?;
//! let run = run_cascade(&cfg, Route::Exact, 7, 1002)?;
//! assert!(run.terminal);
//! # Ok::<(), hilt_core::HiltError>(())
//! ```

// `!(x > 0)` in validations is deliberate: it rejects NaN, which `x <= 0`
// would let through. Indexed loops in the integrator kernels walk several
// same-length buffers in lockstep.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod dist;
pub mod discrete;
pub mod error;
pub mod io;
pub mod multiclass;
pub mod ode;
pub mod planner;
mod rk4;
pub mod scalar;
pub mod sim;
pub mod trajectory;

pub use error::{HiltError, Result};
pub use scalar::Real;

/// f64 threshold distribution.
pub type Dist64 = dist::ThresholdDist<f64>;
/// f64 model configuration.
pub type Config64 = sim::HiltConfig<f64>;
/// f64 trajectory.
pub type Trajectory64 = trajectory::Trajectory<f64>;
/// f64 integrator controls.
pub type StepControl64 = ode::StepControl<f64>;
/// f64 community network.
pub type CommunityNetwork64 = multiclass::CommunityNetwork<f64>;

/// f32 threshold distribution.
pub type Dist32 = dist::ThresholdDist<f32>;
/// f32 trajectory.
pub type Trajectory32 = trajectory::Trajectory<f32>;
