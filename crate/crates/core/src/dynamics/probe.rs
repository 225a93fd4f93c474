use serde::{Deserialize, Serialize};

use crate::par::{self, Execution};
use crate::system::{FieldError, PlanarSystem};

use super::orbit::{integrate, Termination};
use super::Direction;

/// What happened to one probed orbit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "outcome")]
pub enum ProbeOutcome {
    /// Entered the level set at `entered_at` and stayed for the rest of the
    /// horizon.
    EntersAndStays { entered_at: f64 },
    /// Blew up, or entered and later left at `t`.
    Escapes { t: f64, state: [f64; 2] },
    /// Neither within the horizon.
    Undecided { reason: String },
}

impl ProbeOutcome {
    pub fn enters_and_stays(&self) -> bool {
        matches!(self, ProbeOutcome::EntersAndStays { .. })
    }
}

/// Integration tolerance for probes.
const PROBE_TOL: f64 = 1e-9;

/// Level function bounded by `M²`: `2E = y² + 2G(x)` for a structured
/// system (the set `Δ_M`), `x² + y²` for a general one (the disk `D_M`).
fn level(s: &PlanarSystem, z: [f64; 2]) -> Result<f64, FieldError> {
    match s {
        PlanarSystem::Structured(st) => Ok(2.0 * st.energy(z[0], z[1])?),
        PlanarSystem::General(_) => Ok(z[0] * z[0] + z[1] * z[1]),
    }
}

/// Follow each start for `horizon` and report whether it enters the level
/// set `{level ≤ M²}` and stays there.
pub fn boundedness_probe(
    s: &PlanarSystem,
    starts: &[[f64; 2]],
    m: f64,
    horizon: f64,
    exec: Execution,
) -> Vec<ProbeOutcome> {
    let bound = m * m;
    let slack = 1e-7 * (1.0 + bound);
    par::map(exec, starts, |&start| {
        probe_one(s, start, bound, slack, horizon)
    })
}

fn probe_one(
    s: &PlanarSystem,
    start: [f64; 2],
    bound: f64,
    slack: f64,
    horizon: f64,
) -> ProbeOutcome {
    let orbit = match integrate(s, start, horizon, PROBE_TOL, Direction::Forward) {
        Ok(o) => o,
        Err(e) => {
            return ProbeOutcome::Undecided {
                reason: e.to_string(),
            }
        }
    };
    let mut entered: Option<f64> = None;
    let mut check = |t: f64, z: [f64; 2]| -> Result<Option<ProbeOutcome>, FieldError> {
        let inside = level(s, z)? <= bound + slack;
        match (entered, inside) {
            (None, true) => entered = Some(t.abs()),
            (Some(_), false) => {
                return Ok(Some(ProbeOutcome::Escapes {
                    t: t.abs(),
                    state: z,
                }))
            }
            _ => {}
        }
        Ok(None)
    };
    if let Ok(Some(out)) = check(0.0, start) {
        return out;
    }
    for step in &orbit.steps {
        for k in 1..=4 {
            let t = step.t0 + step.h * k as f64 / 4.0;
            let z = if k == 4 { step.end() } else { step.eval(t) };
            match check(t, z) {
                Ok(Some(out)) => return out,
                Ok(None) => {}
                Err(e) => {
                    return ProbeOutcome::Undecided {
                        reason: e.to_string(),
                    }
                }
            }
        }
    }
    let t_end = orbit.duration();
    match orbit.termination {
        Termination::BlowUp => ProbeOutcome::Escapes {
            t: t_end,
            state: orbit.last_state(),
        },
        Termination::Horizon => match entered {
            Some(t) => ProbeOutcome::EntersAndStays { entered_at: t },
            None => ProbeOutcome::Undecided {
                reason: format!("outside the level set at horizon {horizon}"),
            },
        },
        other => ProbeOutcome::Undecided {
            reason: format!("integration stopped early: {other:?}"),
        },
    }
}
