//! Linearized quantum fluctuations and continuous-variable entanglement in a
//! pair of evanescently coupled χ(2) waveguides.
//!
//! The pipeline integrates the classical mean fields, propagates the
//! symplectic matrix of the linearized quadrature dynamics alongside them and
//! evaluates Gaussian entanglement measures on the resulting covariance
//! matrices.
//!
//! ```
//! use cvcoupler::model::{InputPhases, SystemParams};
//! use cvcoupler::propagation::integrate_propagator;
//! use cvcoupler::entanglement::signal_logneg;
//!
//! let params = SystemParams::new(0.08, 0.0025, 1.13, 1e-20, InputPhases::default()).unwrap();
//! let state = integrate_propagator(&params, 2.0, 2 * 1024).unwrap();
//! let v = state.samples().last().unwrap().covariance;
//! assert!(signal_logneg(&v).unwrap() > 0.0);
//! ```

// `!(x <= tol)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classical;
pub mod entanglement;
pub mod error;
pub mod exec;
pub mod model;
pub mod ode;
pub mod propagation;
pub mod scenario;
pub mod undepleted;

pub use error::{Error, Result};
pub use exec::Execution;
