use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::roots::{isolate_real_roots, refine_away, refine_to_width, RootLocation};
use super::{rat, ratio, Polynomial};
use crate::expr::rational_to_f64;

/// One end of a real interval.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Bound {
    Unbounded,
    Open(BigRational),
    Closed(BigRational),
}

impl Bound {
    fn value(&self) -> Option<&BigRational> {
        match self {
            Bound::Unbounded => None,
            Bound::Open(v) | Bound::Closed(v) => Some(v),
        }
    }
}

/// Interval of the real line, possibly unbounded on either side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RealInterval {
    pub lo: Bound,
    pub hi: Bound,
}

impl RealInterval {
    pub fn whole() -> Self {
        RealInterval {
            lo: Bound::Unbounded,
            hi: Bound::Unbounded,
        }
    }

    pub fn open(a: BigRational, b: BigRational) -> Self {
        RealInterval {
            lo: Bound::Open(a),
            hi: Bound::Open(b),
        }
    }

    pub fn closed(a: BigRational, b: BigRational) -> Self {
        RealInterval {
            lo: Bound::Closed(a),
            hi: Bound::Closed(b),
        }
    }

    /// Open interval from floating-point ends; infinities become unbounded.
    /// Finite ends are converted exactly.
    pub fn open_f64(a: f64, b: f64) -> Self {
        let conv = |v: f64| {
            if v.is_finite() {
                Bound::Open(BigRational::from_float(v).expect("finite"))
            } else {
                Bound::Unbounded
            }
        };
        RealInterval {
            lo: conv(a),
            hi: conv(b),
        }
    }

    pub fn is_empty(&self) -> bool {
        match (&self.lo, &self.hi) {
            (Bound::Closed(a), Bound::Closed(b)) => a > b,
            (lo, hi) => match (lo.value(), hi.value()) {
                (Some(a), Some(b)) => a >= b,
                _ => false,
            },
        }
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        let lo_ok = match &self.lo {
            Bound::Unbounded => true,
            Bound::Open(a) => x > a,
            Bound::Closed(a) => x >= a,
        };
        let hi_ok = match &self.hi {
            Bound::Unbounded => true,
            Bound::Open(b) => x < b,
            Bound::Closed(b) => x <= b,
        };
        lo_ok && hi_ok
    }
}

/// Sign requirement to certify.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RequiredSign {
    NonNegative,
    NonPositive,
    /// Nonnegative and not identically zero.
    PositiveExceptFiniteZeros,
    Positive,
    Negative,
}

/// Point at which a required sign fails.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub x: f64,
    /// Second coordinate, for conditions on the plane.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<f64>,
    /// Exact abscissa when known, e.g. `"-3/2"`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_exact: Option<String>,
    pub value: f64,
    /// For roots known only up to an isolating interval.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub enclosure: Option<(f64, f64)>,
}

impl Witness {
    pub fn at(x: f64, value: f64) -> Self {
        Witness {
            x,
            y: None,
            x_exact: None,
            value,
            enclosure: None,
        }
    }

    pub fn at_point(x: f64, y: f64, value: f64) -> Self {
        Witness {
            x,
            y: Some(y),
            x_exact: None,
            value,
            enclosure: None,
        }
    }

    fn exact(x: &BigRational, value: &BigRational) -> Self {
        Witness {
            x: rational_to_f64(x),
            y: None,
            x_exact: Some(x.to_string()),
            value: rational_to_f64(value),
            enclosure: None,
        }
    }
}

/// Outcome of a sign question.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum SignVerdict {
    Proved,
    Refuted { witness: Witness },
    SampledPass { samples: usize },
    Inconclusive { reason: String },
}

impl SignVerdict {
    pub fn is_proved(&self) -> bool {
        matches!(self, SignVerdict::Proved)
    }

    pub fn is_refuted(&self) -> bool {
        matches!(self, SignVerdict::Refuted { .. })
    }

    /// Proved or sampled without counterexample.
    pub fn passes(&self) -> bool {
        matches!(self, SignVerdict::Proved | SignVerdict::SampledPass { .. })
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            SignVerdict::Refuted { witness } => Some(witness),
            _ => None,
        }
    }

    /// Conjunction: the first refutation wins, then inconclusive, then
    /// sampled, then proved.
    pub fn and(self, other: SignVerdict) -> SignVerdict {
        use SignVerdict::*;
        match (self, other) {
            (r @ Refuted { .. }, _) | (_, r @ Refuted { .. }) => r,
            (i @ Inconclusive { .. }, _) | (_, i @ Inconclusive { .. }) => i,
            (SampledPass { samples: a }, SampledPass { samples: b }) => {
                SampledPass { samples: a.max(b) }
            }
            (s @ SampledPass { .. }, Proved) | (Proved, s @ SampledPass { .. }) => s,
            (Proved, Proved) => Proved,
        }
    }
}

/// Certify the sign of `p` on `interval` by exact root isolation.
///
/// Never returns `SampledPass`: the answer is either a proof or a witness.
pub fn sign_on_interval(
    p: &Polynomial,
    interval: &RealInterval,
    required: RequiredSign,
) -> SignVerdict {
    if interval.is_empty() {
        return SignVerdict::Proved;
    }
    if p.is_zero() {
        return match required {
            RequiredSign::NonNegative | RequiredSign::NonPositive => SignVerdict::Proved,
            _ => {
                let x = simple_between(interval.lo.value(), interval.hi.value());
                let x = if interval.contains(&x) {
                    x
                } else {
                    interval.lo.value().or(interval.hi.value()).unwrap().clone()
                };
                SignVerdict::Refuted {
                    witness: Witness::exact(&x, &BigRational::zero()),
                }
            }
        };
    }
    let q = p.squarefree();
    let a = interval.lo.value();
    let b = interval.hi.value();
    let mut roots: Vec<RootLocation> = Vec::new();
    for loc in isolate_real_roots(p) {
        let mut loc = loc;
        for end in [a, b].into_iter().flatten() {
            let inside = end >= loc.lo() && end <= loc.hi();
            if !inside {
                continue;
            }
            if q.eval(end).is_zero() {
                loc = RootLocation::Exact(end.clone());
            } else {
                loc = refine_away(&q, loc, end);
            }
        }
        roots.push(loc);
    }

    let sign_wanted: i8 = match required {
        RequiredSign::NonNegative
        | RequiredSign::PositiveExceptFiniteZeros
        | RequiredSign::Positive => 1,
        RequiredSign::NonPositive | RequiredSign::Negative => -1,
    };

    // Sign on each gap between consecutive roots that meets the interval.
    for i in 0..=roots.len() {
        let left = if i == 0 {
            None
        } else {
            Some(roots[i - 1].hi())
        };
        let right = roots.get(i).map(|r| r.lo());
        let lower = max_opt(a, left);
        let upper = min_opt(b, right);
        let point = match (lower, upper) {
            (Some(l), Some(u)) if l > u => continue,
            (Some(l), Some(u)) if l == u => {
                // Shared endpoint of two isolating intervals: not a root, and
                // strictly between the neighbouring roots.
                if left.is_some() && right.is_some() && Some(l) != a && Some(u) != b {
                    l.clone()
                } else {
                    continue;
                }
            }
            (l, u) => simple_between(l, u),
        };
        let v = p.eval(&point);
        let s = if v.is_positive() { 1 } else { -1 };
        if s != sign_wanted {
            return SignVerdict::Refuted {
                witness: Witness::exact(&point, &v),
            };
        }
    }

    if matches!(required, RequiredSign::Positive | RequiredSign::Negative) {
        for loc in &roots {
            if root_in(loc, interval) {
                return SignVerdict::Refuted {
                    witness: root_witness(p, &q, loc),
                };
            }
        }
    }
    SignVerdict::Proved
}

fn root_in(loc: &RootLocation, interval: &RealInterval) -> bool {
    match loc {
        RootLocation::Exact(r) => interval.contains(r),
        RootLocation::Isolated(l, h) => {
            let lo_ok = interval.lo.value().is_none_or(|a| a < l);
            let hi_ok = interval.hi.value().is_none_or(|b| h < b);
            lo_ok && hi_ok
        }
    }
}

fn root_witness(p: &Polynomial, q: &Polynomial, loc: &RootLocation) -> Witness {
    match loc {
        RootLocation::Exact(r) => Witness::exact(r, &p.eval(r)),
        RootLocation::Isolated(..) => {
            let width = ratio(1, 1 << 40) * (loc.lo().abs() + rat(1));
            let tight = refine_to_width(q, loc.clone(), &width);
            let m = tight.midpoint();
            let mut w = Witness::exact(&m, &p.eval(&m));
            if let RootLocation::Isolated(l, h) = &tight {
                w.x_exact = None;
                w.enclosure = Some((rational_to_f64(l), rational_to_f64(h)));
            }
            w
        }
    }
}

fn max_opt<'a>(a: Option<&'a BigRational>, b: Option<&'a BigRational>) -> Option<&'a BigRational> {
    match (a, b) {
        (Some(x), Some(y)) => Some(if x >= y { x } else { y }),
        (x, None) => x,
        (None, y) => y,
    }
}

fn min_opt<'a>(a: Option<&'a BigRational>, b: Option<&'a BigRational>) -> Option<&'a BigRational> {
    match (a, b) {
        (Some(x), Some(y)) => Some(if x <= y { x } else { y }),
        (x, None) => x,
        (None, y) => y,
    }
}

/// A short dyadic rational strictly between `lo` and `hi` (either may be
/// infinite), preferring 0, then integers, then coarse binary fractions.
pub(crate) fn simple_between(lo: Option<&BigRational>, hi: Option<&BigRational>) -> BigRational {
    let zero = BigRational::zero();
    let below = |v: &BigRational| lo.is_none_or(|l| l < v);
    let above = |v: &BigRational| hi.is_none_or(|h| v < h);
    if below(&zero) && above(&zero) {
        return zero;
    }
    match (lo, hi) {
        (None, Some(h)) => h.floor() - rat(1),
        (Some(l), None) => l.floor() + rat(1),
        (Some(l), Some(h)) => {
            let mut step = rat(1);
            for _ in 0..=80 {
                let cand = ((l / &step).floor() + rat(1)) * &step;
                if &cand < h {
                    return cand;
                }
                step /= rat(2);
            }
            (l + h) / rat(2)
        }
        (None, None) => zero,
    }
}
