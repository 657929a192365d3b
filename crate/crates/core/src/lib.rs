//! Rolling ball and rolling disk dynamics with internal moving masses.
//!
//! The crate provides the equations of motion ([`ball`], [`disk`]), rail
//! geometry ([`rails`]), reference rigid-body systems ([`classic`]), the
//! integrators ([`integrate`]) and the scenario/run layer used by the
//! `rollsim` command line tool.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ball;
pub mod classic;
pub mod disk;
pub mod error;
pub mod integrate;
pub mod rails;
pub mod run;
pub mod scenario;
pub mod so3;

pub use error::{Result, SimError};
pub use integrate::{integrate, IntegratorConfig, Method, OdeSystem, Trajectory};
pub use scenario::{Model, Scenario};
