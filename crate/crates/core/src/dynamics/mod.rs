//! Orbits, Poincaré return maps on the ray `{y = 0, x > 0}`, limit-cycle
//! location and the exponents that decide hyperbolicity.

mod cycles;
mod exponents;
mod orbit;
mod probe;
pub(crate) mod rk;
mod section;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::system::FieldError;

pub use cycles::{
    find_cycles, Cycle, CycleOptions, CycleSearch, DegenerateRun, Exponents, Rotation, Stability,
};
pub use exponents::{
    cycle_integral, log_return_derivative, CycleField, CycleIntegral, NU_ANGULAR_FLOOR,
};
pub use orbit::{integrate, Orbit, Termination};
pub use probe::{boundedness_probe, ProbeOutcome};
pub use rk::DenseStep;
pub use section::{return_map, return_map_with, Return, ReturnOptions};

/// States farther than this from the origin count as blown up.
pub const BLOW_UP: f64 = 1e8;

/// Accepted steps allowed per return-map call.
pub const STEP_BUDGET: usize = 1_000_000;

/// Time direction of an integration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    #[default]
    Forward,
    Backward,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Backward => -1.0,
        }
    }

    pub fn reverse(self) -> Self {
        match self {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("tolerance {0} is outside [1e-13, 1e-3]")]
    InvalidTolerance(f64),
    #[error("start ({x}, {y}) is outside the domain")]
    StartOutsideDomain { x: f64, y: f64 },
    #[error("section point x0 = {0} must be positive")]
    NonPositiveSectionPoint(f64),
    #[error("the flow is tangent to the section at x = {0}")]
    NotTransversal(f64),
    #[error("no return to the section: {0}")]
    NoReturn(String),
    #[error("blow-up at t = {t}: state {state:?}")]
    BlowUp { t: f64, state: [f64; 2] },
    #[error("left the domain at t = {t}: state {state:?}")]
    DomainExit { t: f64, state: [f64; 2] },
    #[error("angular speed vanishes on the cycle (min |A| = {min_abs})")]
    AngularSpeedZeroOnCycle { min_abs: f64 },
    #[error("field evaluation failed: {0}")]
    Field(#[from] FieldError),
}

pub(crate) fn check_tol(tol: f64) -> Result<(), DynamicsError> {
    if (1e-13..=1e-3).contains(&tol) {
        Ok(())
    } else {
        Err(DynamicsError::InvalidTolerance(tol))
    }
}
