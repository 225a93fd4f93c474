use serde::{Deserialize, Serialize};

use crate::system::{FieldError, PlanarField};

use super::rk::{Integrator, StepFailure};
use super::{check_tol, Direction, DynamicsError};

/// Scalar integrated along a cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CycleField {
    Divergence,
    Nu,
}

/// `∫₀ᵀ w dt` over one period in forward time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleIntegral {
    pub value: f64,
    /// Smallest `|A|` met at the quadrature nodes.
    pub min_abs_angular: f64,
}

/// Smallest `|A|` tolerated when integrating `ν`.
pub const NU_ANGULAR_FLOOR: f64 = 1e-8;

/// Integrate the divergence or `ν` along the cycle through `(x_star, 0)`
/// of the given period, following the orbit in `direction` (the direction
/// in which the cycle attracts is the accurate one).
pub fn cycle_integral(
    s: &dyn PlanarField,
    x_star: f64,
    period: f64,
    direction: Direction,
    field: CycleField,
    tol: f64,
) -> Result<CycleIntegral, DynamicsError> {
    check_tol(tol)?;
    let mut min_abs = f64::INFINITY;
    let rhs = |z: &[f64; 3]| -> Result<[f64; 3], FieldError> {
        let [p, q] = s.field(z[0], z[1])?;
        let w = match field {
            CycleField::Divergence => s.divergence(z[0], z[1])?,
            CycleField::Nu => {
                let a = s.angular(z[0], z[1])?;
                min_abs = min_abs.min(a.abs());
                if a.abs() < NU_ANGULAR_FLOOR {
                    return Err(FieldError::AngularSpeedZero { x: z[0], y: z[1] });
                }
                s.nu(z[0], z[1])?
            }
        };
        Ok([p, q, w])
    };
    let mut it = match Integrator::new(rhs, [x_star, 0.0, 0.0], direction.sign(), tol) {
        Ok(it) => it,
        Err(FieldError::AngularSpeedZero { x, y }) => {
            return Err(DynamicsError::AngularSpeedZeroOnCycle {
                min_abs: s.angular(x, y)?.abs(),
            })
        }
        Err(e) => return Err(e.into()),
    };
    it.h_max = period / 64.0;
    loop {
        let left = period - it.t.abs();
        if left <= 1e-14 * (1.0 + period) {
            break;
        }
        match it.step(Some(left)) {
            Ok(_) => {}
            Err(StepFailure::Stuck(FieldError::AngularSpeedZero { .. })) => {
                return Err(DynamicsError::AngularSpeedZeroOnCycle { min_abs });
            }
            Err(StepFailure::Stuck(e)) => return Err(e.into()),
            Err(StepFailure::Underflow) => {
                return Err(DynamicsError::NoReturn(format!(
                    "step size collapsed at {:?}",
                    it.z
                )));
            }
        }
    }
    let value = direction.sign() * it.z[2];
    let min_abs_angular = if field == CycleField::Nu {
        min_abs
    } else {
        f64::NAN
    };
    Ok(CycleIntegral {
        value,
        min_abs_angular,
    })
}

/// Per-segment bound on `|log π_i′|` before the cycle is cut finer.
const SEGMENT_LOG_BOUND: f64 = 2.0;
const MIN_SEGMENTS: usize = 32;
const MAX_SEGMENTS: usize = 4096;

/// `log P′(x*)` of the forward return map, by finite differences.
///
/// The cycle is cut into segments between normal sections and the log
/// derivatives of the section-to-section maps are summed, so strongly
/// contracting or expanding cycles do not lose the derivative to rounding.
/// Segments are refined until each factor is within `e^{±2}`.
pub fn log_return_derivative(
    s: &dyn PlanarField,
    x_star: f64,
    period: f64,
    direction: Direction,
    tol: f64,
) -> Result<f64, DynamicsError> {
    check_tol(tol)?;
    let seg_tol = tol.min(1e-11);
    let mut n = MIN_SEGMENTS;
    loop {
        let points = cycle_points(s, x_star, period, direction, n, seg_tol)?;
        let mut total = 0.0;
        let mut fine = true;
        for i in 0..n {
            let l = segment_log_derivative(
                s,
                &points[i],
                &points[i + 1],
                period / n as f64,
                direction,
                seg_tol,
            )?;
            if l.abs() > SEGMENT_LOG_BOUND {
                fine = false;
                break;
            }
            total += l;
        }
        if fine {
            return Ok(direction.sign() * total);
        }
        if n >= MAX_SEGMENTS {
            return Err(DynamicsError::NoReturn(format!(
                "return derivative not resolved with {n} segments"
            )));
        }
        n *= 2;
    }
}

/// `n + 1` points at equal time spacing along the cycle, closing on the
/// start point.
fn cycle_points(
    s: &dyn PlanarField,
    x_star: f64,
    period: f64,
    direction: Direction,
    n: usize,
    tol: f64,
) -> Result<Vec<[f64; 2]>, DynamicsError> {
    let f = |z: &[f64; 2]| s.field(z[0], z[1]);
    let mut it = Integrator::new(f, [x_star, 0.0], direction.sign(), tol)?;
    let dt = period / n as f64;
    let mut out = vec![[x_star, 0.0]];
    for i in 1..n {
        let target = dt * i as f64;
        while target - it.t.abs() > 1e-14 * (1.0 + period) {
            let left = target - it.t.abs();
            it.step(Some(left)).map_err(step_error)?;
        }
        out.push(it.z);
    }
    out.push([x_star, 0.0]);
    Ok(out)
}

fn step_error(e: StepFailure) -> DynamicsError {
    match e {
        StepFailure::Stuck(f) => f.into(),
        StepFailure::Underflow => DynamicsError::NoReturn("step size collapsed".into()),
    }
}

/// Unit vector along the flow at `p` (in the integration direction) and the
/// unit normal obtained by a quarter turn.
fn frame(
    s: &dyn PlanarField,
    p: &[f64; 2],
    dir: f64,
) -> Result<([f64; 2], [f64; 2]), DynamicsError> {
    let [fx, fy] = s.field(p[0], p[1])?;
    let norm = fx.hypot(fy);
    if norm == 0.0 {
        return Err(DynamicsError::NoReturn(format!(
            "equilibrium on the cycle at {p:?}"
        )));
    }
    let v = [dir * fx / norm, dir * fy / norm];
    Ok((v, [-v[1], v[0]]))
}

/// `log π′(0)` for the map from the normal section at `p` to the normal
/// section at `q`, with central differences and one Richardson step.
fn segment_log_derivative(
    s: &dyn PlanarField,
    p: &[f64; 2],
    q: &[f64; 2],
    dt: f64,
    direction: Direction,
    tol: f64,
) -> Result<f64, DynamicsError> {
    let dir = direction.sign();
    let (_, np) = frame(s, p, dir)?;
    let (vq, nq) = frame(s, q, dir)?;
    let scale = 1.0 + p[0].hypot(p[1]);
    let h = 1e-5 * scale;
    let map = |off: f64| -> Result<f64, DynamicsError> {
        let start = [p[0] + off * np[0], p[1] + off * np[1]];
        let z = hit_section(s, start, q, &vq, 4.0 * dt, dir, tol)?;
        Ok((z[0] - q[0]) * nq[0] + (z[1] - q[1]) * nq[1])
    };
    let central = |h: f64| -> Result<f64, DynamicsError> { Ok((map(h)? - map(-h)?) / (2.0 * h)) };
    let d1 = central(h)?;
    let d2 = central(0.5 * h)?;
    let d = (4.0 * d2 - d1) / 3.0;
    if !(d > 0.0) {
        return Err(DynamicsError::NoReturn(format!(
            "section map derivative {d} is not positive"
        )));
    }
    Ok(d.ln())
}

/// First point where the orbit from `start` crosses the line through `q`
/// normal to `v`, moving along `v`.
fn hit_section(
    s: &dyn PlanarField,
    start: [f64; 2],
    q: &[f64; 2],
    v: &[f64; 2],
    max_time: f64,
    dir: f64,
    tol: f64,
) -> Result<[f64; 2], DynamicsError> {
    let g = |z: &[f64; 2]| (z[0] - q[0]) * v[0] + (z[1] - q[1]) * v[1];
    let f = |z: &[f64; 2]| s.field(z[0], z[1]);
    let mut it = Integrator::new(f, start, dir, tol)?;
    it.h_max = max_time / 16.0;
    let mut prev = g(&start);
    if prev >= 0.0 {
        return Err(DynamicsError::NoReturn(
            "section start already past the target section".into(),
        ));
    }
    while it.t.abs() < max_time {
        let step = it.step(None).map_err(step_error)?;
        let now = g(&step.end());
        if now >= 0.0 {
            let (mut a, mut b) = (step.t0, step.t1());
            for _ in 0..100 {
                let m = 0.5 * (a + b);
                if m == a || m == b {
                    break;
                }
                if g(&step.eval(m)) < 0.0 {
                    a = m;
                } else {
                    b = m;
                }
            }
            return Ok(step.eval(0.5 * (a + b)));
        }
        prev = now;
    }
    let _ = prev;
    Err(DynamicsError::NoReturn(
        "orbit missed the next section".into(),
    ))
}
