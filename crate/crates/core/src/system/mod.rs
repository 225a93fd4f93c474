//! Planar systems and the pointwise fields evaluated on them.
//!
//! A [`StructuredSystem`] is `ẋ = y, ẏ = −g(x) − Σ_j f_j(x) yʲ` on a strip
//! `a < x < b`; a [`GeneralSystem`] is an arbitrary field `(P, Q)`.

mod coefficient;
mod general;
mod potential;
mod structured;
mod trinomial;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{EvalError, ParseError};

pub use coefficient::{Coefficient, UnivariateFn};
pub use general::GeneralSystem;
pub use potential::{Potential, TABLE_REACH, TABLE_STEP};
pub use structured::StructuredSystem;
pub use trinomial::{TrinomialDecomposition, TrinomialPiece};

/// Open strip `a < x < b` containing 0; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub a: f64,
    pub b: f64,
}

impl Domain {
    pub fn new(a: f64, b: f64) -> Result<Self, SystemError> {
        if a.is_nan() || b.is_nan() || !(a < 0.0 && 0.0 < b) {
            return Err(SystemError::DomainMustContainOrigin { a, b });
        }
        Ok(Domain { a, b })
    }

    pub fn whole() -> Self {
        Domain {
            a: f64::NEG_INFINITY,
            b: f64::INFINITY,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.a < x && x < self.b
    }

    pub fn is_whole(&self) -> bool {
        self.a == f64::NEG_INFINITY && self.b == f64::INFINITY
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum FieldError {
    #[error("x = {x} is outside the domain")]
    OutOfDomain { x: f64 },
    #[error("evaluation failed: {0}")]
    Eval(#[from] EvalError),
    #[error("angular speed vanishes at ({x}, {y})")]
    AngularSpeedZero { x: f64, y: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SystemError {
    #[error("cannot parse {0:?}: {1}")]
    Parse(String, ParseError),
    #[error("coefficient {0} depends on y")]
    CoefficientDependsOnY(String),
    #[error("domain ({a}, {b}) must contain 0")]
    DomainMustContainOrigin { a: f64, b: f64 },
    #[error("degree {0} is not a valid power of y (must be at least 1)")]
    InvalidDegree(u32),
    #[error("degree {0} given twice")]
    DuplicateDegree(u32),
    #[error("invalid trinomial: {0}")]
    InvalidTrinomial(String),
    #[error("term of even degree {even_degree} needs an explicit trinomial decomposition")]
    DecompositionRequired { even_degree: u32 },
    #[error("trinomial decomposition does not match the system: {0}")]
    DecompositionMismatch(String),
    #[error("cannot integrate g: {0}")]
    Potential(EvalError),
}

/// Common interface of everything the integrator and scanners can work on.
pub trait PlanarField: Send + Sync {
    /// `(ẋ, ẏ)` at a point.
    fn field(&self, x: f64, y: f64) -> Result<[f64; 2], FieldError>;

    /// `∂P/∂x + ∂Q/∂y`.
    fn divergence(&self, x: f64, y: f64) -> Result<f64, FieldError>;

    /// `A = yẋ − xẏ`, whose sign is opposite to the angular velocity.
    fn angular(&self, x: f64, y: f64) -> Result<f64, FieldError> {
        let [p, q] = self.field(x, y)?;
        Ok(y * p - x * q)
    }

    /// `ν = [P(xQ_x + yQ_y) − Q(xP_x + yP_y)] / A`.
    fn nu(&self, x: f64, y: f64) -> Result<f64, FieldError>;

    fn in_domain(&self, x: f64, _y: f64) -> bool;
}

/// Tolerance below which `A` counts as zero.
pub fn angular_tolerance(x: f64, y: f64) -> f64 {
    1e-12 * (1.0 + x * x + y * y)
}

/// Either kind of planar system.
#[derive(Debug, Clone)]
pub enum PlanarSystem {
    Structured(StructuredSystem),
    General(GeneralSystem),
}

impl PlanarSystem {
    pub fn as_structured(&self) -> Option<&StructuredSystem> {
        match self {
            PlanarSystem::Structured(s) => Some(s),
            PlanarSystem::General(_) => None,
        }
    }
}

impl PlanarField for PlanarSystem {
    fn field(&self, x: f64, y: f64) -> Result<[f64; 2], FieldError> {
        match self {
            PlanarSystem::Structured(s) => s.field(x, y),
            PlanarSystem::General(g) => g.field(x, y),
        }
    }

    fn divergence(&self, x: f64, y: f64) -> Result<f64, FieldError> {
        match self {
            PlanarSystem::Structured(s) => s.divergence(x, y),
            PlanarSystem::General(g) => g.divergence(x, y),
        }
    }

    fn angular(&self, x: f64, y: f64) -> Result<f64, FieldError> {
        match self {
            PlanarSystem::Structured(s) => s.angular(x, y),
            PlanarSystem::General(g) => g.angular(x, y),
        }
    }

    fn nu(&self, x: f64, y: f64) -> Result<f64, FieldError> {
        match self {
            PlanarSystem::Structured(s) => s.nu(x, y),
            PlanarSystem::General(g) => g.nu(x, y),
        }
    }

    fn in_domain(&self, x: f64, y: f64) -> bool {
        match self {
            PlanarSystem::Structured(s) => s.in_domain(x, y),
            PlanarSystem::General(g) => g.in_domain(x, y),
        }
    }
}

impl From<StructuredSystem> for PlanarSystem {
    fn from(s: StructuredSystem) -> Self {
        PlanarSystem::Structured(s)
    }
}

impl From<GeneralSystem> for PlanarSystem {
    fn from(g: GeneralSystem) -> Self {
        PlanarSystem::General(g)
    }
}
