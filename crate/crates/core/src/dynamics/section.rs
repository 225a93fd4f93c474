use serde::{Deserialize, Serialize};

use crate::system::{FieldError, PlanarField};

use super::rk::{DenseStep, Integrator, StepFailure};
use super::{check_tol, Direction, DynamicsError, BLOW_UP, STEP_BUDGET};

/// First return to the ray `{y = 0, x > 0}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Return {
    pub x0: f64,
    pub x1: f64,
    /// Elapsed time, positive in either direction.
    pub period: f64,
    pub direction: Direction,
}

impl Return {
    /// `x1 − x0`.
    pub fn displacement(&self) -> f64 {
        self.x1 - self.x0
    }
}

/// Limits for one return-map evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReturnOptions {
    pub max_time: f64,
    pub max_steps: usize,
}

impl Default for ReturnOptions {
    fn default() -> Self {
        ReturnOptions {
            max_time: 1e4,
            max_steps: STEP_BUDGET,
        }
    }
}

/// Poincaré map on `{y = 0, x > 0}` with the default limits.
pub fn return_map(
    s: &dyn PlanarField,
    x0: f64,
    tol: f64,
    direction: Direction,
) -> Result<Return, DynamicsError> {
    return_map_with(s, x0, tol, direction, &ReturnOptions::default())
}

/// Sub-points checked inside each step for a sign change of `y`.
const SUBDIVISIONS: usize = 4;

/// Poincaré map on `{y = 0, x > 0}`.
///
/// The orbit leaves the ray on the side `σ = sign ẏ(x0, 0)` (in the chosen
/// time direction) and must come back to the ray from the opposite side.
/// Crossing the negative x-axis the wrong way, or the positive x-axis
/// backwards, means the rotation reversed and the map is undefined.
pub fn return_map_with(
    s: &dyn PlanarField,
    x0: f64,
    tol: f64,
    direction: Direction,
    opts: &ReturnOptions,
) -> Result<Return, DynamicsError> {
    check_tol(tol)?;
    if !(x0 > 0.0) {
        return Err(DynamicsError::NonPositiveSectionPoint(x0));
    }
    if !s.in_domain(x0, 0.0) {
        return Err(DynamicsError::StartOutsideDomain { x: x0, y: 0.0 });
    }
    let dir = direction.sign();
    let [_, q] = s.field(x0, 0.0)?;
    let qs = dir * q;
    if qs.abs() <= 1e-12 * (1.0 + x0) {
        return Err(DynamicsError::NotTransversal(x0));
    }
    let sigma = qs.signum();
    let f = |z: &[f64; 2]| s.field(z[0], z[1]);
    let mut it = Integrator::new(f, [x0, 0.0], dir, tol)?;
    // w = σy starts at 0 and immediately becomes positive.
    let mut prev_w = f64::MIN_POSITIVE;
    let mut steps = 0usize;
    loop {
        let left = opts.max_time - it.t.abs();
        if left <= 0.0 {
            return Err(DynamicsError::NoReturn(format!(
                "no return within time {}",
                opts.max_time
            )));
        }
        if steps >= opts.max_steps {
            return Err(DynamicsError::NoReturn(format!(
                "no return within {} steps",
                opts.max_steps
            )));
        }
        let step = match it.step(Some(left)) {
            Ok(step) => step,
            Err(StepFailure::Stuck(FieldError::OutOfDomain { .. })) => {
                return Err(DynamicsError::DomainExit {
                    t: it.t,
                    state: it.z,
                })
            }
            Err(StepFailure::Stuck(e)) => return Err(e.into()),
            Err(StepFailure::Underflow) if super::orbit::runaway(&it.z, &[x0, 0.0]) => {
                return Err(DynamicsError::BlowUp {
                    t: it.t,
                    state: it.z,
                })
            }
            Err(StepFailure::Underflow) => {
                return Err(DynamicsError::NoReturn(format!(
                    "step size collapsed at {:?}",
                    it.z
                )))
            }
        };
        steps += 1;
        if it.z[0].hypot(it.z[1]) > BLOW_UP {
            return Err(DynamicsError::BlowUp {
                t: it.t,
                state: it.z,
            });
        }
        let mut t_prev = step.t0;
        for k in 1..=SUBDIVISIONS {
            let t = step.t0 + step.h * k as f64 / SUBDIVISIONS as f64;
            let z = if k == SUBDIVISIONS {
                step.end()
            } else {
                step.eval(t)
            };
            let w = sigma * z[1];
            let into_positive = prev_w < 0.0 && w >= 0.0;
            let into_negative = prev_w > 0.0 && w <= 0.0;
            if into_positive || into_negative {
                let (tc, xc) = locate(&step, t_prev, t, sigma);
                match (into_positive, xc > 0.0) {
                    (true, true) => {
                        return Ok(Return {
                            x0,
                            x1: xc,
                            period: tc.abs(),
                            direction,
                        })
                    }
                    (false, false) => {}
                    (true, false) => {
                        return Err(DynamicsError::NoReturn(format!(
                            "rotation reversed at x = {xc}"
                        )));
                    }
                    (false, true) => {
                        return Err(DynamicsError::NoReturn(format!(
                            "orbit turned back through the section at x = {xc}"
                        )));
                    }
                }
                prev_w = if into_positive {
                    w.max(f64::MIN_POSITIVE)
                } else {
                    w.min(-f64::MIN_POSITIVE)
                };
            } else if w != 0.0 {
                prev_w = w;
            }
            t_prev = t;
        }
    }
}

/// Bisect the dense output for `y = 0` between `a` and `b`.
fn locate(step: &DenseStep<2>, mut a: f64, mut b: f64, sigma: f64) -> (f64, f64) {
    let wa = sigma * step.eval(a)[1];
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let z = step.eval(m);
        if z[1].abs() <= 1e-12 || m == a || m == b {
            return (m, z[0]);
        }
        if (sigma * z[1] < 0.0) == (wa < 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    let m = 0.5 * (a + b);
    (m, step.eval(m)[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{Domain, GeneralSystem, StructuredSystem};

    #[test]
    fn linear_center_is_identity() {
        let s = StructuredSystem::parse("x", &[], Domain::whole()).unwrap();
        for x0 in [0.3, 1.0, 2.5] {
            for d in [Direction::Forward, Direction::Backward] {
                let r = return_map(&s, x0, 1e-10, d).unwrap();
                assert!((r.x1 - x0).abs() < 1e-8, "{r:?}");
                assert!((r.period - std::f64::consts::TAU).abs() < 1e-7, "{r:?}");
            }
        }
    }

    fn two_cycles() -> GeneralSystem {
        GeneralSystem::parse(
            "y*((x^2+y^2) - (x^2+y^2)^2) + x*(1 - 3*(x^2+y^2) + (x^2+y^2)^2)",
            "-x*((x^2+y^2) - (x^2+y^2)^2) + y*(1 - 3*(x^2+y^2) + (x^2+y^2)^2)",
        )
        .unwrap()
    }

    #[test]
    fn fixed_point_on_inner_circle() {
        let s = two_cycles();
        let x0 = ((3.0 - 5f64.sqrt()) / 2.0).sqrt();
        let r = return_map(&s, x0, 1e-10, Direction::Forward).unwrap();
        assert!((r.x1 - x0).abs() < 1e-6, "{r:?}");
        let inside = return_map(&s, 0.5, 1e-10, Direction::Forward).unwrap();
        assert!(inside.x1 > 0.5);
        assert!(matches!(
            return_map(&s, 1.0, 1e-10, Direction::Forward),
            Err(DynamicsError::NotTransversal(_))
        ));
    }

    #[test]
    fn trig_fixed_point() {
        let s = GeneralSystem::parse(
            "y*cos(x^2+y^2) - x*sin(x^2+y^2)",
            "-x*cos(x^2+y^2) - y*sin(x^2+y^2)",
        )
        .unwrap();
        let x0 = std::f64::consts::PI.sqrt();
        let r = return_map(&s, x0, 1e-10, Direction::Backward).unwrap();
        assert!((r.x1 - x0).abs() < 1e-6, "{r:?}");
    }

    #[test]
    fn rejects_bad_starts() {
        let s = StructuredSystem::parse("x", &[], Domain::whole()).unwrap();
        assert!(matches!(
            return_map(&s, -1.0, 1e-10, Direction::Forward),
            Err(DynamicsError::NonPositiveSectionPoint(_))
        ));
        assert!(matches!(
            return_map(&s, 1.0, 1.0, Direction::Forward),
            Err(DynamicsError::InvalidTolerance(_))
        ));
    }
}
