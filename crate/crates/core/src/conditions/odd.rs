use serde::{Deserialize, Serialize};

use crate::poly::{Polynomial, RequiredSign, SignVerdict, Witness};
use crate::sampling::{finite_window, line_points};
use crate::system::{Coefficient, Domain, StructuredSystem, TABLE_REACH};
use crate::transform::{ContiFilippov, TransformError};

use super::trinomial::nonvanishing_near_zero;
use super::{PolySummary, Span, Univariate};

/// Verdicts for the odd-system uniqueness hypotheses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OddReport {
    /// Every `f_j` with `j` even vanishes identically.
    pub even_terms_vanish: SignVerdict,
    /// `x f_j′ + (j−1) f_j ≥ 0` on the strip, per odd `j`.
    pub odd_terms: Vec<(u32, SignVerdict)>,
    pub seq: SignVerdict,
    pub verdict: SignVerdict,
}

/// Evenness, the per-term Euler inequalities and the sequence condition.
pub fn check_odd_conditions(s: &StructuredSystem) -> OddReport {
    let d = s.domain();
    let even_terms_vanish = s
        .terms()
        .iter()
        .filter(|(j, _)| j % 2 == 0)
        .map(|(_, c)| nonzero_witness(c, d))
        .fold(SignVerdict::Proved, SignVerdict::and);
    let odd_terms: Vec<(u32, SignVerdict)> = s
        .terms()
        .iter()
        .filter(|(j, _)| j % 2 == 1)
        .map(|(j, c)| {
            (
                *j,
                Univariate::euler(c, *j as i64 - 1)
                    .certify(&[Span::open(d.a, d.b)], RequiredSign::NonNegative),
            )
        })
        .collect();
    let seq = super::check_seq(s);
    let verdict = odd_terms
        .iter()
        .map(|(_, v)| v.clone())
        .fold(even_terms_vanish.clone(), SignVerdict::and)
        .and(seq.clone());
    OddReport {
        even_terms_vanish,
        odd_terms,
        seq,
        verdict,
    }
}

/// A point where `c` is nonzero, as a refutation of `c ≡ 0`.
fn nonzero_witness(c: &Coefficient, d: Domain) -> SignVerdict {
    if c.is_exactly_zero() {
        return SignVerdict::Proved;
    }
    let candidates = [1.0, -1.0, 0.5, -0.5, 0.0, 2.0, -2.0, 0.25, -0.25];
    let extra = line_points(d.a, d.b, 1000);
    for x in candidates
        .into_iter()
        .chain(extra)
        .filter(|x| d.contains(*x))
    {
        match c.eval(x) {
            Ok(v) if v != 0.0 && v.is_finite() => {
                return SignVerdict::Refuted {
                    witness: Witness::at(x, v),
                }
            }
            Ok(_) => {}
            Err(e) => {
                return SignVerdict::Inconclusive {
                    reason: format!("evaluation failed at x = {x}: {e}"),
                }
            }
        }
    }
    SignVerdict::SampledPass {
        samples: candidates.len() + 1000,
    }
}

/// Comparison with the classical sign and monotonicity assumptions on odd
/// systems: nonnegativity (`f_{2k+1} ≥ 0`, required for `k ≥ 1`) and
/// monotonicity away from the origin (`f_{2k+1}` increasing for `x > 0`,
/// decreasing for `x < 0`, required for `k ≥ 0`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L2L3Report {
    /// Nonnegativity per odd `j`, including `j = 1` for information.
    pub nonnegative: Vec<(u32, SignVerdict)>,
    /// Conjunction over `j ≥ 3`.
    pub l2: SignVerdict,
    pub monotone: Vec<(u32, SignVerdict)>,
    /// Conjunction over all odd `j`.
    pub l3: SignVerdict,
    /// When the odd-system Euler inequalities pass, whether `l2` passes as
    /// well; that implication always holds.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub euler_implies_l2: Option<bool>,
}

pub fn check_l2l3(s: &StructuredSystem) -> L2L3Report {
    let d = s.domain();
    let from_zero = [
        Span {
            lo: 0.0,
            hi: d.b,
            lo_closed: true,
            hi_closed: false,
        },
        Span::open(d.a, 0.0),
    ];
    let odd: Vec<&(u32, Coefficient)> = s.terms().iter().filter(|(j, _)| j % 2 == 1).collect();
    let nonnegative: Vec<(u32, SignVerdict)> = odd
        .iter()
        .map(|(j, c)| {
            (
                *j,
                Univariate::of(c).certify(&from_zero, RequiredSign::NonNegative),
            )
        })
        .collect();
    let l2 = nonnegative
        .iter()
        .filter(|(j, _)| *j >= 3)
        .map(|(_, v)| v.clone())
        .fold(SignVerdict::Proved, SignVerdict::and);
    let monotone: Vec<(u32, SignVerdict)> = odd
        .iter()
        .map(|(j, c)| {
            let dc = Univariate::derivative(c);
            let v = dc
                .certify(&[Span::open(0.0, d.b)], RequiredSign::NonNegative)
                .and(dc.certify(&[Span::open(d.a, 0.0)], RequiredSign::NonPositive));
            (*j, v)
        })
        .collect();
    let l3 = monotone
        .iter()
        .map(|(_, v)| v.clone())
        .fold(SignVerdict::Proved, SignVerdict::and);
    let euler_ok = s.is_odd()
        && odd.iter().all(|(j, c)| {
            Univariate::euler(c, *j as i64 - 1)
                .certify(&[Span::open(d.a, d.b)], RequiredSign::NonNegative)
                .passes()
        });
    let euler_implies_l2 = euler_ok.then(|| l2.passes());
    L2L3Report {
        nonnegative,
        l2,
        monotone,
        l3,
        euler_implies_l2,
    }
}

/// Outcome of the nonlinear-`g` Euler condition for one term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HgCheck {
    pub j: u32,
    /// `x[j f g³ + 2G g (f′g − f g′)] ≥ 0` on the strip.
    pub verdict: SignVerdict,
    /// The same quantity is nonzero at points accumulating at the origin.
    pub strict: SignVerdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cleared_form: Option<PolySummary>,
}

/// Points closer than this to the origin are skipped when sampling.
const HG_EXCLUSION: f64 = 1e-8;

/// Nonlinear-`g` Euler condition for the term `f y^{j−1}`, with the
/// denominator `g²` cleared. Decided exactly for polynomial data; otherwise
/// sampled on the strip clipped to `|x| <` [`TABLE_REACH`], where the
/// primitive of `g` is tabulated.
pub fn check_hg(
    f: &Coefficient,
    g: &Coefficient,
    j: u32,
    domain: Domain,
) -> Result<HgCheck, TransformError> {
    let cf = ContiFilippov::new(g, domain)?;
    Ok(check_hg_in(f, &cf, j))
}

/// [`check_hg`] with an already validated transform.
pub fn check_hg_in(f: &Coefficient, cf: &ContiFilippov, j: u32) -> HgCheck {
    let d = cf.domain();
    if let (Some(fp), Some(gp), Some(big_g)) = (
        f.as_polynomial(),
        cf.g().as_polynomial(),
        cf.potential().polynomial(),
    ) {
        let c = cleared_form(fp, gp, big_g, j);
        let spans = [Span::open(d.a, 0.0), Span::open(0.0, d.b)];
        let verdict = Univariate::Exact(c.clone()).certify(&spans, RequiredSign::NonNegative);
        let strict = nonvanishing_near_zero(d, vec![Univariate::Exact(c.clone())]);
        return HgCheck {
            j,
            verdict,
            strict,
            cleared_form: Some((&c).into()),
        };
    }
    let eval = move |x: f64| -> Result<f64, crate::expr::EvalError> {
        let fv = f.eval(x)?;
        let fd = f.derivative(x)?;
        let gv = cf.g().eval(x)?;
        let gd = cf.g().derivative(x)?;
        let big_g = cf.potential().eval(x)?;
        Ok(x * (j as f64 * fv * gv * gv * gv + 2.0 * big_g * gv * (fd * gv - fv * gd)))
    };
    let (a, b) = finite_window(d.a, d.b, TABLE_REACH);
    let spans = [Span::open(a, -HG_EXCLUSION), Span::open(HG_EXCLUSION, b)];
    let verdict = Univariate::Sampled(Box::new(eval)).certify(&spans, RequiredSign::NonNegative);
    let strict = nonvanishing_near_zero(d, vec![Univariate::Sampled(Box::new(eval))]);
    HgCheck {
        j,
        verdict,
        strict,
        cleared_form: None,
    }
}

fn cleared_form(f: &Polynomial, g: &Polynomial, big_g: &Polynomial, j: u32) -> Polynomial {
    let jc = Polynomial::from_i64s(&[j as i64]);
    let two = Polynomial::from_i64s(&[2]);
    let g3 = &(g * g) * g;
    let first = &(&jc * f) * &g3;
    let inner = &(&f.derivative() * g) - &(f * &g.derivative());
    let second = &(&(&two * big_g) * g) * &inner;
    &Polynomial::x() * &(&first + &second)
}
