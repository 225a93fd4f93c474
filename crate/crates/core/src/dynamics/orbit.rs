use serde::{Deserialize, Serialize};

use crate::system::PlanarField;

use super::rk::{DenseStep, Integrator, StepFailure};
use super::{check_tol, Direction, DynamicsError, BLOW_UP, STEP_BUDGET};

/// Why an orbit stopped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "reason")]
pub enum Termination {
    Horizon,
    BlowUp,
    DomainExit,
    StepBudget,
    StepSizeUnderflow,
}

impl Termination {
    pub fn name(self) -> &'static str {
        match self {
            Termination::Horizon => "horizon",
            Termination::BlowUp => "blow_up",
            Termination::DomainExit => "domain_exit",
            Termination::StepBudget => "step_budget",
            Termination::StepSizeUnderflow => "step_size_underflow",
        }
    }
}

/// Integrated orbit as a chain of dense-output steps.
#[derive(Debug, Clone)]
pub struct Orbit {
    pub start: [f64; 2],
    pub direction: Direction,
    pub steps: Vec<DenseStep<2>>,
    pub termination: Termination,
}

impl Orbit {
    /// Elapsed time, nonnegative in either direction.
    pub fn duration(&self) -> f64 {
        self.steps.last().map(|s| (s.t1()).abs()).unwrap_or(0.0)
    }

    pub fn last_state(&self) -> [f64; 2] {
        self.steps.last().map(|s| s.end()).unwrap_or(self.start)
    }

    /// State after elapsed time `tau ∈ [0, duration]`.
    pub fn state_at(&self, tau: f64) -> [f64; 2] {
        let t = self.direction.sign() * tau;
        let i = self.steps.partition_point(|s| s.t1().abs() < tau);
        match self.steps.get(i) {
            Some(s) => s.eval(t),
            None => self.last_state(),
        }
    }

    /// `n + 1` states at equal elapsed-time spacing, as `(tau, x, y)`.
    pub fn sample(&self, n: usize) -> Vec<[f64; 3]> {
        let d = self.duration();
        (0..=n)
            .map(|i| {
                let tau = d * i as f64 / n.max(1) as f64;
                let [x, y] = self.state_at(tau);
                [self.direction.sign() * tau, x, y]
            })
            .collect()
    }

    /// Blow-up and domain exit as errors carrying the last state.
    pub fn into_result(self) -> Result<Orbit, DynamicsError> {
        let t = self.direction.sign() * self.duration();
        let state = self.last_state();
        match self.termination {
            Termination::BlowUp => Err(DynamicsError::BlowUp { t, state }),
            Termination::DomainExit => Err(DynamicsError::DomainExit { t, state }),
            _ => Ok(self),
        }
    }
}

/// Integrate from `start` for elapsed time `horizon` with tolerance `tol`.
///
/// Stops early on blow-up (`|state| >` [`BLOW_UP`]), on leaving the domain
/// or when the step budget is spent; the reason is in
/// [`Orbit::termination`].
pub fn integrate(
    s: &dyn PlanarField,
    start: [f64; 2],
    horizon: f64,
    tol: f64,
    direction: Direction,
) -> Result<Orbit, DynamicsError> {
    check_tol(tol)?;
    if !s.in_domain(start[0], start[1]) {
        return Err(DynamicsError::StartOutsideDomain {
            x: start[0],
            y: start[1],
        });
    }
    let f = |z: &[f64; 2]| s.field(z[0], z[1]);
    let mut it = Integrator::new(f, start, direction.sign(), tol)?;
    let mut steps = Vec::new();
    let termination = loop {
        let left = horizon - it.t.abs();
        if left <= 1e-14 * (1.0 + horizon) {
            break Termination::Horizon;
        }
        if steps.len() >= STEP_BUDGET {
            break Termination::StepBudget;
        }
        match it.step(Some(left)) {
            Ok(step) => {
                steps.push(step);
                if it.z[0].hypot(it.z[1]) > BLOW_UP {
                    break Termination::BlowUp;
                }
            }
            Err(StepFailure::Stuck(crate::system::FieldError::OutOfDomain { .. })) => {
                break Termination::DomainExit
            }
            Err(StepFailure::Stuck(e)) => return Err(e.into()),
            Err(StepFailure::Underflow) if runaway(&it.z, &start) => break Termination::BlowUp,
            Err(StepFailure::Underflow) => break Termination::StepSizeUnderflow,
        }
    };
    Ok(Orbit {
        start,
        direction,
        steps,
        termination,
    })
}

/// A collapsing step far from the start is a finite-time blow-up that the
/// step-size floor cannot follow all the way to [`BLOW_UP`].
pub(crate) fn runaway(z: &[f64; 2], start: &[f64; 2]) -> bool {
    z[0].hypot(z[1]) > 1e3 * (1.0 + start[0].hypot(start[1]))
}
