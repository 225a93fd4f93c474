//! Certified checks of the sign hypotheses behind the uniqueness,
//! boundedness and existence results, and the report that combines them.
//!
//! Polynomial data is decided exactly ([`SignVerdict::Proved`] or a
//! refutation with witness). Transcendental data is sampled, which can only
//! ever produce [`SignVerdict::SampledPass`].

mod bounded;
mod odd;
mod psi;
mod report;
mod trinomial;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::expr::EvalError;
use crate::par::{map, Execution};
use crate::poly::{
    sign_on_interval, Bound, Polynomial, RealInterval, RequiredSign, SignVerdict, Witness,
};
use crate::sampling::line_points;
use crate::system::Coefficient;

pub use bounded::{
    boundedness_construction, BoundednessConstruction, BoundednessRoute, ConstructionFailure,
    PlaneWitness,
};
pub use odd::{
    check_hg, check_hg_in, check_l2l3, check_odd_conditions, HgCheck, L2L3Report, OddReport,
};
pub use psi::{check_psi_sign, PSI_GRID};
pub use report::{
    full_report, full_report_with, Claim, HypothesisEntry, HypothesisReport, TheoremEntry,
    TheoremStatus,
};
pub use trinomial::{
    check_seq, check_tminus, check_tplus, check_tplusplus, search_epsilon, transformed_piece,
    TransformedPiece, TrinomialCheck, EPSILON_GRID,
};

/// Number of sample points used when a condition cannot be decided exactly.
pub const SAMPLES: usize = 10_000;

/// Slack allowed for rounding in sampled non-strict inequalities.
pub const SAMPLE_TOL: f64 = 1e-10;

/// Part of the real line: `lo < x < hi`, with either end optionally
/// included. Infinite ends are never included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Span {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Span {
    pub fn open(lo: f64, hi: f64) -> Self {
        Span {
            lo,
            hi,
            lo_closed: false,
            hi_closed: false,
        }
    }

    pub fn closed(lo: f64, hi: f64) -> Self {
        Span {
            lo,
            hi,
            lo_closed: true,
            hi_closed: true,
        }
    }

    fn to_interval(self) -> RealInterval {
        let conv = |v: f64, closed: bool| {
            if !v.is_finite() {
                Bound::Unbounded
            } else {
                let r = BigRational::from_float(v).expect("finite");
                if closed {
                    Bound::Closed(r)
                } else {
                    Bound::Open(r)
                }
            }
        };
        RealInterval {
            lo: conv(self.lo, self.lo_closed),
            hi: conv(self.hi, self.hi_closed),
        }
    }

    fn is_empty(self) -> bool {
        if self.lo_closed && self.hi_closed {
            self.lo > self.hi
        } else {
            self.lo >= self.hi
        }
    }
}

/// `(a, b)` with the origin removed.
pub(crate) fn punctured(a: f64, b: f64) -> [Span; 2] {
    [Span::open(a, 0.0), Span::open(0.0, b)]
}

/// `{ε < |x|} ∩ (a, b)`.
pub(crate) fn outside(eps: f64, a: f64, b: f64) -> [Span; 2] {
    [Span::open(a, -eps), Span::open(eps, b)]
}

type SampledFn<'a> = Box<dyn Fn(f64) -> Result<f64, EvalError> + Sync + 'a>;

/// A scalar function of `x` whose sign is to be certified.
pub(crate) enum Univariate<'a> {
    Exact(Polynomial),
    Sampled(SampledFn<'a>),
}

impl<'a> Univariate<'a> {
    pub fn of(c: &'a Coefficient) -> Self {
        match c.as_polynomial() {
            Some(p) => Univariate::Exact(p.clone()),
            None => Univariate::Sampled(Box::new(move |x| c.eval(x))),
        }
    }

    /// `x c′ + k c`.
    pub fn euler(c: &'a Coefficient, k: i64) -> Self {
        match c.as_polynomial() {
            Some(p) => Univariate::Exact(p.euler_combination(k)),
            None => Univariate::Sampled(Box::new(move |x| {
                Ok(x * c.derivative(x)? + k as f64 * c.eval(x)?)
            })),
        }
    }

    /// `c′`.
    pub fn derivative(c: &'a Coefficient) -> Self {
        match c.as_polynomial() {
            Some(p) => Univariate::Exact(p.derivative()),
            None => Univariate::Sampled(Box::new(move |x| c.derivative(x))),
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64, EvalError> {
        match self {
            Univariate::Exact(p) => Ok(p.eval_f64(x)),
            Univariate::Sampled(f) => f(x),
        }
    }

    /// Certify a sign on the union of `spans`.
    pub fn certify(&self, spans: &[Span], required: RequiredSign) -> SignVerdict {
        let spans: Vec<Span> = spans.iter().copied().filter(|s| !s.is_empty()).collect();
        match self {
            Univariate::Exact(p) => {
                if required == RequiredSign::PositiveExceptFiniteZeros {
                    if p.is_zero() {
                        let x = spans.first().map(|s| representative(*s)).unwrap_or(0.0);
                        return SignVerdict::Refuted {
                            witness: Witness::at(x, 0.0),
                        };
                    }
                    return self.certify(&spans, RequiredSign::NonNegative);
                }
                spans
                    .iter()
                    .map(|s| sign_on_interval(p, &s.to_interval(), required))
                    .fold(SignVerdict::Proved, SignVerdict::and)
            }
            Univariate::Sampled(f) => sample_sign(f, &spans, required),
        }
    }
}

fn representative(s: Span) -> f64 {
    match (s.lo.is_finite(), s.hi.is_finite()) {
        (true, true) => 0.5 * (s.lo + s.hi),
        (true, false) => s.lo + 1.0,
        (false, true) => s.hi - 1.0,
        (false, false) => 0.0,
    }
}

fn violates(v: f64, required: RequiredSign) -> bool {
    match required {
        RequiredSign::NonNegative | RequiredSign::PositiveExceptFiniteZeros => v < -SAMPLE_TOL,
        RequiredSign::NonPositive => v > SAMPLE_TOL,
        RequiredSign::Positive => v <= 0.0,
        RequiredSign::Negative => v >= 0.0,
    }
}

fn sample_sign(f: &SampledFn<'_>, spans: &[Span], required: RequiredSign) -> SignVerdict {
    if spans.is_empty() {
        return SignVerdict::Proved;
    }
    let per = SAMPLES / spans.len();
    let mut pts = Vec::with_capacity(SAMPLES + 2 * spans.len());
    for s in spans {
        if s.lo_closed && s.lo.is_finite() {
            pts.push(s.lo);
        }
        if s.hi_closed && s.hi.is_finite() {
            pts.push(s.hi);
        }
        pts.extend(line_points(s.lo, s.hi, per));
    }
    let values = map(Execution::default(), &pts, |&x| f(x));
    let samples = pts.iter().copied().zip(values).map(|(x, v)| ((x, None), v));
    scan_samples(samples, required, representative(spans[0]))
}

/// Scan evaluated samples in order for the first violation of `required`.
/// Non-finite values are skipped.
pub(crate) fn scan_samples(
    samples: impl IntoIterator<Item = ((f64, Option<f64>), Result<f64, EvalError>)>,
    required: RequiredSign,
    fallback_x: f64,
) -> SignVerdict {
    let mut count = 0;
    let mut all_zero = true;
    for ((x, y), v) in samples {
        let v = match v {
            Ok(v) => v,
            Err(e) => {
                return SignVerdict::Inconclusive {
                    reason: format!("evaluation failed at x = {x}: {e}"),
                }
            }
        };
        if !v.is_finite() {
            continue;
        }
        count += 1;
        if v != 0.0 {
            all_zero = false;
        }
        if violates(v, required) {
            let witness = match y {
                Some(y) => Witness::at_point(x, y, v),
                None => Witness::at(x, v),
            };
            return SignVerdict::Refuted { witness };
        }
    }
    if required == RequiredSign::PositiveExceptFiniteZeros && all_zero {
        return SignVerdict::Refuted {
            witness: Witness::at(fallback_x, 0.0),
        };
    }
    SignVerdict::SampledPass { samples: count }
}

/// Serializable summary of a polynomial, used in reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolySummary {
    pub text: String,
    /// Coefficients, lowest degree first, as exact rationals.
    pub coefficients: Vec<String>,
}

impl From<&Polynomial> for PolySummary {
    fn from(p: &Polynomial) -> Self {
        PolySummary {
            text: p.to_string(),
            coefficients: p.coeffs().iter().map(|c| c.to_string()).collect(),
        }
    }
}
