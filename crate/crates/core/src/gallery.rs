//! Named example systems with the facts known about them, and a checker
//! that re-derives each fact.

use serde::{Deserialize, Serialize};

use crate::conditions::{check_l2l3, full_report_with, Claim};
use crate::dynamics::{find_cycles, CycleOptions};
use crate::par::Execution;
use crate::scan::{zero_curve_components, ScalarField, Window};
use crate::system::PlanarSystem;
use crate::system_file::SystemFile;
use crate::transform::ContiFilippov;

/// Where an expected fact comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Stated in the published analysis of the system.
    Published,
    /// Worked out here, by hand or by a reduction such as polar coordinates.
    Computed,
}

/// A checkable statement about a gallery system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "fact")]
pub enum Fact {
    /// Number of isolated cycles found on the entry's grid.
    CycleCount {
        count: usize,
    },
    /// Section points of the cycles, ascending.
    SectionPoints {
        x: Vec<f64>,
        tol: f64,
    },
    /// Sign of `∫div` per cycle, ascending in `x*`.
    ExponentSigns {
        signs: Vec<i8>,
    },
    /// The return map is the identity on part of the grid.
    Degenerate,
    Claim {
        claim: Claim,
    },
    /// Some `f_j` with odd `j` is not monotone on a half-line.
    MonotonicityRefuted,
    BoundednessRefuted,
    UnboundedZeroComponents {
        field: ScalarField,
        window: Window,
        count: usize,
    },
    /// `f̃_j(0)` of the Conti-Filippov pushforward.
    PushforwardAtZero {
        j: u32,
        value: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectedFact {
    #[serde(flatten)]
    pub fact: Fact,
    pub provenance: Provenance,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GalleryEntry {
    pub name: String,
    pub description: String,
    pub system: SystemFile,
    /// Default section grid `(from, to, step)` for cycle searches.
    pub grid: (f64, f64, f64),
    pub facts: Vec<ExpectedFact>,
}

impl GalleryEntry {
    pub fn load(&self) -> PlanarSystem {
        self.system.to_system().expect("gallery systems are valid")
    }

    pub fn grid_points(&self) -> Vec<f64> {
        grid_points(self.grid.0, self.grid.1, self.grid.2)
    }
}

/// `from, from + step, …` up to `to` inclusive (with rounding slack).
pub fn grid_points(from: f64, to: f64, step: f64) -> Vec<f64> {
    if !(step > 0.0) || to < from {
        return Vec::new();
    }
    let n = ((to - from) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| from + step * i as f64).collect()
}

fn fact(fact: Fact, provenance: Provenance, note: &str) -> ExpectedFact {
    ExpectedFact {
        fact,
        provenance,
        note: note.to_string(),
    }
}

const TWO_CYCLES_P: &str = "y*((x^2+y^2) - (x^2+y^2)^2) + x*(1 - 3*(x^2+y^2) + (x^2+y^2)^2)";
const TWO_CYCLES_Q: &str = "-x*((x^2+y^2) - (x^2+y^2)^2) + y*(1 - 3*(x^2+y^2) + (x^2+y^2)^2)";
const TRIG_P: &str = "y*cos(x^2+y^2) - x*sin(x^2+y^2)";
const TRIG_Q: &str = "-x*cos(x^2+y^2) - y*sin(x^2+y^2)";

/// All gallery entries.
pub fn all() -> Vec<GalleryEntry> {
    use Provenance::{Computed, Published};
    let pi = std::f64::consts::PI;
    let golden = |sign: f64| ((3.0 + sign * 5f64.sqrt()) / 2.0).sqrt();
    vec![
        GalleryEntry {
            name: "vdp".into(),
            description: "Van der Pol oscillator, f1 = x^2 - 1, g = x".into(),
            system: SystemFile::structured("x", &[(1, "x^2 - 1")]),
            grid: (0.1, 3.0, 0.1),
            facts: vec![
                fact(Fact::CycleCount { count: 1 }, Published, "the classical unique limit cycle"),
                fact(Fact::ExponentSigns { signs: vec![-1] }, Computed, "the cycle attracts"),
                fact(Fact::Claim { claim: Claim::AtMostOne }, Computed, "odd-system uniqueness applies"),
            ],
        },
        GalleryEntry {
            name: "fig2".into(),
            description: "f1 = x^2 - 1, f2 = x^2/10, f3 = x^2 + 1, g = x: a single limit cycle with angular speed changing sign".into(),
            system: SystemFile::structured("x", &[(1, "x^2 - 1"), (2, "x^2/10"), (3, "x^2 + 1")]),
            grid: (0.1, 5.0, 0.1),
            facts: vec![
                fact(Fact::CycleCount { count: 1 }, Published, "has just one limit cycle"),
                fact(Fact::ExponentSigns { signs: vec![-1] }, Computed, "the cycle attracts"),
                fact(Fact::Claim { claim: Claim::ExactlyOne }, Computed, "trinomial uniqueness plus boundedness at eps = 2"),
            ],
        },
        GalleryEntry {
            name: "quartic-demo".into(),
            description: "f1 = x^2 - 1, f3 = x^4 - x^2 + 1, g = x".into(),
            system: SystemFile::structured("x", &[(1, "x^2 - 1"), (3, "x^4 - x^2 + 1")]),
            grid: (0.1, 3.0, 0.1),
            facts: vec![
                fact(Fact::Claim { claim: Claim::ExactlyOne }, Published, "exactly one limit cycle, hyperbolic and attracting"),
                fact(Fact::CycleCount { count: 1 }, Computed, "numerical confirmation"),
                fact(Fact::ExponentSigns { signs: vec![-1] }, Computed, "the cycle attracts"),
                fact(Fact::MonotonicityRefuted, Published, "x^4 - x^2 + 1 is not increasing for x > 0"),
            ],
        },
        GalleryEntry {
            name: "quartic-f3".into(),
            description: "f3 = x^4 - x^2 + 1 alone, g = x: Euler inequality holds while f3 is not monotone".into(),
            system: SystemFile::structured("x", &[(3, "x^4 - x^2 + 1")]),
            grid: (0.1, 3.0, 0.1),
            facts: vec![
                fact(Fact::MonotonicityRefuted, Published, "x^4 - x^2 + 1 is neither increasing for x > 0 nor decreasing for x < 0"),
                fact(Fact::CycleCount { count: 0 }, Computed, "energy never increases since f3 > 0"),
            ],
        },
        GalleryEntry {
            name: "gauss".into(),
            description: "f1 = -exp(-x^2), f3 = 1 - exp(-x^2), g = x: the energy-rate zero set has four unbounded branches".into(),
            system: SystemFile::structured("x", &[(1, "-exp(-x^2)"), (3, "1 - exp(-x^2)")]),
            grid: (0.1, 3.0, 0.1),
            facts: vec![
                fact(
                    Fact::UnboundedZeroComponents {
                        field: ScalarField::EnergyRate,
                        window: Window { x: (-6.0, 6.0), y: (-4.0, 4.0) },
                        count: 4,
                    },
                    Published,
                    "four unbounded connected components",
                ),
                fact(Fact::BoundednessRefuted, Published, "no positively invariant annulus from energy levels"),
            ],
        },
        GalleryEntry {
            name: "two-cycles".into(),
            description: "star-shaped field with limit cycles on x^2 + y^2 = (3 -+ sqrt 5)/2".into(),
            system: SystemFile::general(TWO_CYCLES_P, TWO_CYCLES_Q),
            grid: (0.1, 3.0, 0.1),
            facts: vec![
                fact(Fact::CycleCount { count: 2 }, Published, "two star-shaped limit cycles"),
                fact(Fact::SectionPoints { x: vec![golden(-1.0), golden(1.0)], tol: 1e-6 }, Published, "radii are the square roots of (3 -+ sqrt 5)/2"),
                fact(Fact::ExponentSigns { signs: vec![-1, 1] }, Computed, "polar reduction: integrals about -45.47 and +17.37"),
            ],
        },
        GalleryEntry {
            name: "trig".into(),
            description: "field with limit cycles on every circle x^2 + y^2 = k pi".into(),
            system: SystemFile::general(TRIG_P, TRIG_Q),
            grid: (0.5, 4.0, 0.05),
            facts: vec![
                fact(Fact::CycleCount { count: 5 }, Computed, "k = 1..5 have sqrt(k pi) <= 4"),
                fact(
                    Fact::SectionPoints { x: (1..=5).map(|k| (k as f64 * pi).sqrt()).collect(), tol: 1e-6 },
                    Published,
                    "cycles on the circles x^2 + y^2 = k pi",
                ),
                fact(Fact::ExponentSigns { signs: vec![1, -1, 1, -1, 1] }, Computed, "polar reduction r' = -r sin(r^2)"),
            ],
        },
        GalleryEntry {
            name: "linear-center".into(),
            description: "harmonic oscillator, a continuum of periodic orbits and no limit cycle".into(),
            system: SystemFile::structured("x", &[]),
            grid: (0.1, 3.0, 0.1),
            facts: vec![
                fact(Fact::CycleCount { count: 0 }, Computed, "every orbit is periodic"),
                fact(Fact::Degenerate, Computed, "the return map is the identity"),
            ],
        },
        GalleryEntry {
            name: "duffing-vdp".into(),
            description: "Van der Pol damping with a hardening spring, f1 = x^2 - 1, g = x + x^3".into(),
            system: SystemFile::structured("x + x^3", &[(1, "x^2 - 1")]),
            grid: (0.1, 3.0, 0.1),
            facts: vec![
                fact(Fact::CycleCount { count: 1 }, Computed, "numerical"),
                fact(Fact::ExponentSigns { signs: vec![-1] }, Computed, "the cycle attracts"),
                fact(Fact::PushforwardAtZero { j: 1, value: -1.0 }, Computed, "f1(0)/sqrt(g'(0)) with g'(0) = 1"),
            ],
        },
    ]
}

pub fn names() -> Vec<String> {
    all().into_iter().map(|e| e.name).collect()
}

pub fn get(name: &str) -> Option<GalleryEntry> {
    all().into_iter().find(|e| e.name == name)
}

/// Result of re-deriving one fact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactCheck {
    pub fact: Fact,
    pub holds: bool,
    pub detail: String,
}

/// Re-derive every expected fact of `entry`.
pub fn verify(entry: &GalleryEntry, exec: Execution) -> Vec<FactCheck> {
    let s = entry.load();
    let opts = CycleOptions {
        exec,
        ..Default::default()
    };
    let search = entry
        .facts
        .iter()
        .any(|f| {
            matches!(
                f.fact,
                Fact::CycleCount { .. }
                    | Fact::SectionPoints { .. }
                    | Fact::ExponentSigns { .. }
                    | Fact::Degenerate
            )
        })
        .then(|| find_cycles(&s, &entry.grid_points(), &opts));
    let report = s.as_structured().map(|st| full_report_with(st, exec));
    entry
        .facts
        .iter()
        .map(|ef| {
            let (holds, detail) = check(&ef.fact, &s, search.as_ref(), report.as_ref(), exec);
            FactCheck {
                fact: ef.fact.clone(),
                holds,
                detail,
            }
        })
        .collect()
}

fn check(
    fact: &Fact,
    s: &PlanarSystem,
    search: Option<&Result<crate::dynamics::CycleSearch, crate::dynamics::DynamicsError>>,
    report: Option<&crate::conditions::HypothesisReport>,
    exec: Execution,
) -> (bool, String) {
    let cycles = match search {
        Some(Ok(r)) => Some(r),
        Some(Err(e)) => return (false, format!("cycle search failed: {e}")),
        None => None,
    };
    match fact {
        Fact::CycleCount { count } => {
            let got = cycles.map_or(0, |c| c.cycles.len());
            (got == *count, format!("found {got} cycle(s)"))
        }
        Fact::SectionPoints { x, tol } => {
            let got: Vec<f64> =
                cycles.map_or(Vec::new(), |c| c.cycles.iter().map(|c| c.x_star).collect());
            let ok = got.len() == x.len() && got.iter().zip(x).all(|(a, b)| (a - b).abs() <= *tol);
            (ok, format!("section points {got:?}"))
        }
        Fact::ExponentSigns { signs } => {
            let got: Vec<i8> = cycles.map_or(Vec::new(), |c| {
                c.cycles
                    .iter()
                    .map(|c| {
                        c.exponents.map_or(0, |e| {
                            if e.div_integral > 0.0 {
                                1
                            } else if e.div_integral < 0.0 {
                                -1
                            } else {
                                0
                            }
                        })
                    })
                    .collect()
            });
            (&got == signs, format!("exponent signs {got:?}"))
        }
        Fact::Degenerate => {
            let n = cycles.map_or(0, |c| c.degenerate.len());
            (n > 0, format!("{n} degenerate run(s)"))
        }
        Fact::Claim { claim } => match report {
            Some(r) => (r.claim == *claim, format!("report claims {:?}", r.claim)),
            None => (false, "no report for a general system".into()),
        },
        Fact::MonotonicityRefuted => match s.as_structured() {
            Some(st) => {
                let r = check_l2l3(st);
                (
                    r.l3.is_refuted(),
                    format!("monotonicity verdict {:?}", r.l3),
                )
            }
            None => (false, "not a structured system".into()),
        },
        Fact::BoundednessRefuted => match report {
            Some(r) => (
                r.boundedness_failure.is_some(),
                format!("boundedness failure {:?}", r.boundedness_failure),
            ),
            None => (false, "no report for a general system".into()),
        },
        Fact::UnboundedZeroComponents {
            field,
            window,
            count,
        } => match zero_curve_components(s, *field, *window, 240, 160, 0.0, exec) {
            Ok(z) => (
                z.unbounded_count() == *count && z.count == *count,
                format!(
                    "{} component(s), {} unbounded",
                    z.count,
                    z.unbounded_count()
                ),
            ),
            Err(e) => (false, e.to_string()),
        },
        Fact::PushforwardAtZero { j, value } => {
            let Some(st) = s.as_structured() else {
                return (false, "not a structured system".into());
            };
            match ContiFilippov::for_system(st)
                .and_then(|cf| std::sync::Arc::new(cf).pushforward(st))
            {
                Ok(p) => match p.f(*j).map(|c| c.eval(0.0)) {
                    Some(Ok(v)) => ((v - value).abs() < 1e-6, format!("f{j}(0) = {v}")),
                    Some(Err(e)) => (false, e.to_string()),
                    None => (false, format!("no term of degree {j}")),
                },
                Err(e) => (false, e.to_string()),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_unique_and_systems_load() {
        let n = names();
        let mut sorted = n.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), n.len());
        for e in all() {
            e.load();
            assert!(!e.facts.is_empty());
            assert!(!e.grid_points().is_empty());
        }
    }

    #[test]
    fn grid_is_inclusive() {
        let g = grid_points(0.1, 3.0, 0.1);
        assert_eq!(g.len(), 30);
        assert!((g[29] - 3.0).abs() < 1e-12);
        assert!(grid_points(1.0, 0.0, 0.1).is_empty());
    }
}
