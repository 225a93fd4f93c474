use serde::{Deserialize, Serialize};

use crate::poly::{cauchy_bound, RequiredSign, SignVerdict};
use crate::system::{Coefficient, StructuredSystem};

use super::trinomial::{check_tplusplus, EPSILON_GRID};
use super::{outside, Span, Univariate};

/// Points sampled on each test circle.
const CIRCLE_SAMPLES: usize = 1000;

/// How the disk radius was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundednessRoute {
    /// `φ ≡ 0`: every circle is invariant.
    Trivial,
    /// Eventually positive y-trinomials.
    Trinomial,
    /// Odd system with `f₁` positive away from the origin.
    Odd,
}

/// Disk `D_M` that every orbit eventually enters, with the rectangle
/// `[−ε, ε] × [−Ȳ, Ȳ]` it was built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundednessConstruction {
    pub route: BoundednessRoute,
    pub epsilon: f64,
    pub y_bar: f64,
    pub m: f64,
    /// Root bound `Z̄` per piece used.
    pub z_bars: Vec<f64>,
    /// Exact when all root bounds were certified, sampled otherwise.
    pub bound: SignVerdict,
    /// `φ ≥ 0` on the circles of radius `M`, `2M` and `4M`.
    pub boundary: SignVerdict,
}

/// Point in the plane where `φ` is negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneWitness {
    pub x: f64,
    pub y: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, thiserror::Error)]
#[error("boundedness construction fails: {reason}")]
pub struct ConstructionFailure {
    pub reason: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<PlaneWitness>,
}

/// Radius `M` such that `φ ≥ 0` outside `D_M`, for the whole plane.
///
/// Tries the trinomial route, then the odd route. `eps` fixes ε; otherwise
/// it is searched on [`EPSILON_GRID`].
pub fn boundedness_construction(
    s: &StructuredSystem,
    eps: Option<f64>,
) -> Result<BoundednessConstruction, ConstructionFailure> {
    if !s.domain().is_whole() {
        return Err(ConstructionFailure {
            reason: "the strip is not the whole plane".into(),
            witness: None,
        });
    }
    if s.terms().is_empty() {
        return Ok(BoundednessConstruction {
            route: BoundednessRoute::Trivial,
            epsilon: 0.0,
            y_bar: 0.0,
            m: 0.0,
            z_bars: vec![],
            bound: SignVerdict::Proved,
            boundary: SignVerdict::Proved,
        });
    }
    let built = trinomial_route(s, eps).or_else(|| odd_route(s, eps));
    let Some(c) = built else {
        return Err(match negative_point(s) {
            Some(w) => ConstructionFailure {
                reason: format!(
                    "phi({}, {}) = {} < 0 and neither route applies",
                    w.x, w.y, w.value
                ),
                witness: Some(w),
            },
            None => ConstructionFailure {
                reason: "neither the trinomial nor the odd route applies".into(),
                witness: None,
            },
        });
    };
    match check_circles(s, c.m) {
        Ok(samples) => Ok(BoundednessConstruction {
            boundary: SignVerdict::SampledPass { samples },
            ..c
        }),
        Err(w) => Err(ConstructionFailure {
            reason: format!("phi({}, {}) = {} < 0 outside the disk", w.x, w.y, w.value),
            witness: Some(w),
        }),
    }
}

fn trinomial_route(s: &StructuredSystem, eps: Option<f64>) -> Option<BoundednessConstruction> {
    let d = s.trinomials().ok()?;
    let passes = |e: f64| {
        check_tplusplus(&d, s.domain(), e)
            .iter()
            .all(|c| c.verdict.passes())
    };
    let epsilon = match eps {
        Some(e) => passes(e).then_some(e)?,
        None => EPSILON_GRID.iter().copied().find(|&e| passes(e))?,
    };
    let mut z_bars = Vec::new();
    let mut bound = SignVerdict::Proved;
    let mut y_bar: f64 = 0.0;
    for p in &d.pieces {
        let (z, v) = root_bound(&p.kappa, &p.tau, &p.eta, epsilon)?;
        z_bars.push(z);
        bound = bound.and(v);
        y_bar = y_bar.max(z.powf(1.0 / p.h as f64));
    }
    Some(BoundednessConstruction {
        route: BoundednessRoute::Trinomial,
        epsilon,
        y_bar,
        m: epsilon.hypot(y_bar),
        z_bars,
        bound,
        boundary: SignVerdict::Proved,
    })
}

/// Odd-route hypotheses at a fixed ε.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct OddRoute {
    pub epsilon: f64,
    /// Sign of `f₁` for `|x| > ε`.
    pub f1_outside: SignVerdict,
    /// Smallest `k̄ ≥ 1` with `f_{2k̄+1} > 0` on `[−ε, ε]`.
    pub kbar: Option<u32>,
    pub kbar_verdict: SignVerdict,
}

pub(crate) fn odd_route_at(s: &StructuredSystem, epsilon: f64, f1_sign: RequiredSign) -> OddRoute {
    let d = s.domain();
    let zero = Coefficient::zero();
    let f1 = s.f(1).unwrap_or(&zero);
    let f1_outside = Univariate::of(f1).certify(&outside(epsilon, d.a, d.b), f1_sign);
    let near = [Span::closed(d.a.max(-epsilon), d.b.min(epsilon))];
    let mut kbar = None;
    let mut kbar_verdict = SignVerdict::Refuted {
        witness: crate::poly::Witness::at(0.0, 0.0),
    };
    for (j, c) in s.terms().iter().filter(|(j, _)| *j >= 3 && j % 2 == 1) {
        let v = Univariate::of(c).certify(&near, RequiredSign::Positive);
        if v.passes() {
            kbar = Some((j - 1) / 2);
            kbar_verdict = v;
            break;
        }
        if kbar_verdict.is_refuted() {
            kbar_verdict = v;
        }
    }
    OddRoute {
        epsilon,
        f1_outside,
        kbar,
        kbar_verdict,
    }
}

/// First ε on the grid (or the given one) where the odd route's own
/// hypotheses pass; otherwise the route at ε = 1 for reporting.
pub(crate) fn odd_route_search(
    s: &StructuredSystem,
    eps: Option<f64>,
    f1_sign: RequiredSign,
) -> OddRoute {
    if let Some(e) = eps {
        return odd_route_at(s, e, f1_sign);
    }
    for &e in EPSILON_GRID.iter() {
        let r = odd_route_at(s, e, f1_sign);
        if r.f1_outside.passes() && r.kbar.is_some() {
            return r;
        }
    }
    odd_route_at(s, 1.0, f1_sign)
}

fn odd_route(s: &StructuredSystem, eps: Option<f64>) -> Option<BoundednessConstruction> {
    if !s.is_odd() {
        return None;
    }
    let d = s.domain();
    let whole = [Span::open(d.a, d.b)];
    let higher_ok = s.terms().iter().filter(|(j, _)| *j >= 3).all(|(_, c)| {
        Univariate::of(c)
            .certify(&whole, RequiredSign::NonNegative)
            .passes()
    });
    if !higher_ok {
        return None;
    }
    let r = odd_route_search(s, eps, RequiredSign::NonNegative);
    let kbar = r.kbar?;
    if !r.f1_outside.passes() {
        return None;
    }
    let zero = Coefficient::zero();
    let f1 = s.f(1).unwrap_or(&zero);
    let kappa = s.f(2 * kbar + 1)?;
    let (z, bound) = root_bound(kappa, &zero, f1, r.epsilon)?;
    let y_bar = z.powf(1.0 / kbar as f64);
    Some(BoundednessConstruction {
        route: BoundednessRoute::Odd,
        epsilon: r.epsilon,
        y_bar,
        m: r.epsilon.hypot(y_bar),
        z_bars: vec![z],
        bound: bound.and(r.f1_outside).and(r.kbar_verdict),
        boundary: SignVerdict::Proved,
    })
}

/// `Z̄` with `κz² + τz + η > 0` for `|z| > Z̄` and `|x| ≤ ε`.
fn root_bound(
    kappa: &Coefficient,
    tau: &Coefficient,
    eta: &Coefficient,
    eps: f64,
) -> Option<(f64, SignVerdict)> {
    if let (Some(k), Some(t), Some(e)) = (
        kappa.as_polynomial(),
        tau.as_polynomial(),
        eta.as_polynomial(),
    ) {
        return cauchy_bound(k, t, e, eps)
            .ok()
            .map(|b| (b.z_bar, SignVerdict::Proved));
    }
    let n = 4001;
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let x = -eps + 2.0 * eps * i as f64 / (n - 1) as f64;
        let k = kappa.eval(x).ok()?;
        if !(k > 0.0) {
            return None;
        }
        let ratio = tau.eval(x).ok()?.abs().max(eta.eval(x).ok()?.abs()) / k;
        worst = worst.max(ratio);
    }
    Some((1.0 + 1.05 * worst, SignVerdict::SampledPass { samples: n }))
}

fn circle_points(r: f64) -> impl Iterator<Item = (f64, f64)> {
    (0..CIRCLE_SAMPLES).map(move |i| {
        let t = std::f64::consts::TAU * i as f64 / CIRCLE_SAMPLES as f64;
        (r * t.cos(), r * t.sin())
    })
}

fn below(s: &StructuredSystem, x: f64, y: f64) -> Option<PlaneWitness> {
    let v = s.phi(x, y).ok()?;
    (v < -1e-12 * (1.0 + x * x + y * y)).then_some(PlaneWitness { x, y, value: v })
}

fn check_circles(s: &StructuredSystem, m: f64) -> Result<usize, PlaneWitness> {
    if m == 0.0 {
        return Ok(0);
    }
    let mut n = 0;
    for r in [m, 2.0 * m, 4.0 * m] {
        for (x, y) in circle_points(r) {
            if let Some(w) = below(s, x, y) {
                return Err(w);
            }
            n += 1;
        }
    }
    Ok(n)
}

/// Farthest sampled point where `φ` is clearly negative: first along the
/// x-axis at `±1, ±2, …, ±64`, then on circles of those radii.
fn negative_point(s: &StructuredSystem) -> Option<PlaneWitness> {
    let mut found = None;
    for k in 0..=6 {
        let r = 2f64.powi(k);
        if let Some(w) = below(s, r, 0.0).or_else(|| below(s, -r, 0.0)) {
            found = Some(w);
        }
    }
    if found.is_some() {
        return found;
    }
    for k in 0..=6 {
        let r = 2f64.powi(k);
        if let Some(w) = circle_points(r).find_map(|(x, y)| below(s, x, y)) {
            found = Some(w);
        }
    }
    found
}
