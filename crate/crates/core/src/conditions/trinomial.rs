use serde::{Deserialize, Serialize};

use crate::poly::{Polynomial, RequiredSign, SignVerdict, Witness};
use crate::system::{Domain, StructuredSystem, TrinomialDecomposition, TrinomialPiece};

use super::{outside, punctured, PolySummary, Span, Univariate};

/// Candidate values of ε tried, in order, when none is supplied.
pub const EPSILON_GRID: [f64; 13] = [
    1.0 / 64.0,
    1.0 / 32.0,
    1.0 / 16.0,
    1.0 / 8.0,
    0.25,
    0.5,
    1.0,
    2.0,
    4.0,
    8.0,
    16.0,
    32.0,
    64.0,
];

/// The trinomial `κ̃z² + τ̃z + η̃` whose sign controls star-shapedness,
/// with `κ̃ = xκ′ + (2h+2r)κ`, `τ̃ = xτ′ + (h+2r)τ`, `η̃ = xη′ + 2rη`,
/// and its discriminant `τ̃² − 4η̃κ̃`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformedPiece {
    pub kappa: PolySummary,
    pub tau: PolySummary,
    pub eta: PolySummary,
    pub discriminant: PolySummary,
}

/// Verdicts for one trinomial piece.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrinomialCheck {
    pub piece: usize,
    pub discriminant: SignVerdict,
    pub leading: SignVerdict,
    pub trailing: SignVerdict,
    /// Conjunction of the three.
    pub verdict: SignVerdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transformed: Option<TransformedPiece>,
}

fn weights(p: &TrinomialPiece) -> [i64; 3] {
    let (h, r) = (p.h as i64, p.r as i64);
    [2 * h + 2 * r, h + 2 * r, 2 * r]
}

/// Exact transformed piece, when all three coefficients are polynomials.
pub fn transformed_piece(
    p: &TrinomialPiece,
) -> Option<(Polynomial, Polynomial, Polynomial, Polynomial)> {
    let [wk, wt, we] = weights(p);
    let k = p.kappa.as_polynomial()?.euler_combination(wk);
    let t = p.tau.as_polynomial()?.euler_combination(wt);
    let e = p.eta.as_polynomial()?.euler_combination(we);
    let four = Polynomial::from_i64s(&[4]);
    let d = &(&t * &t) - &(&four * &(&e * &k));
    Some((k, t, e, d))
}

fn discriminant_of<'a>(
    kappa: Univariate<'a>,
    tau: Univariate<'a>,
    eta: Univariate<'a>,
) -> Univariate<'a> {
    match (kappa, tau, eta) {
        (Univariate::Exact(k), Univariate::Exact(t), Univariate::Exact(e)) => {
            let four = Polynomial::from_i64s(&[4]);
            Univariate::Exact(&(&t * &t) - &(&four * &(&e * &k)))
        }
        (k, t, e) => Univariate::Sampled(Box::new(move |x| {
            let tv = t.eval(x)?;
            Ok(tv * tv - 4.0 * e.eval(x)? * k.eval(x)?)
        })),
    }
}

fn star_check(
    p: &TrinomialPiece,
    index: usize,
    domain: Domain,
    sign: RequiredSign,
) -> TrinomialCheck {
    let [wk, wt, we] = weights(p);
    let spans = punctured(domain.a, domain.b);
    let discriminant = discriminant_of(
        Univariate::euler(&p.kappa, wk),
        Univariate::euler(&p.tau, wt),
        Univariate::euler(&p.eta, we),
    )
    .certify(&spans, RequiredSign::NonPositive);
    let leading = Univariate::euler(&p.kappa, wk).certify(&spans, sign);
    let trailing = Univariate::euler(&p.eta, we).certify(&spans, sign);
    let verdict = discriminant
        .clone()
        .and(leading.clone())
        .and(trailing.clone());
    let transformed = transformed_piece(p).map(|(k, t, e, d)| TransformedPiece {
        kappa: (&k).into(),
        tau: (&t).into(),
        eta: (&e).into(),
        discriminant: (&d).into(),
    });
    TrinomialCheck {
        piece: index,
        discriminant,
        leading,
        trailing,
        verdict,
        transformed,
    }
}

/// Star-shapedness condition with nonnegative sign, per piece, on the
/// punctured strip: discriminant `≤ 0`, `κ̃ ≥ 0` and `η̃ ≥ 0`.
pub fn check_tplus(d: &TrinomialDecomposition, domain: Domain) -> Vec<TrinomialCheck> {
    d.pieces
        .iter()
        .enumerate()
        .map(|(i, p)| star_check(p, i, domain, RequiredSign::NonNegative))
        .collect()
}

/// Mirror of [`check_tplus`]: discriminant `≤ 0`, `κ̃ ≤ 0` and `η̃ ≤ 0`.
pub fn check_tminus(d: &TrinomialDecomposition, domain: Domain) -> Vec<TrinomialCheck> {
    d.pieces
        .iter()
        .enumerate()
        .map(|(i, p)| star_check(p, i, domain, RequiredSign::NonPositive))
        .collect()
}

/// Eventual positivity of each piece: `τ² − 4ηκ ≤ 0`, `κ ≥ 0` and `η ≥ 0`
/// for `|x| > ε`, and `κ > 0` on `[−ε, ε]`.
pub fn check_tplusplus(
    d: &TrinomialDecomposition,
    domain: Domain,
    eps: f64,
) -> Vec<TrinomialCheck> {
    let far = outside(eps, domain.a, domain.b);
    let near = [Span::closed(domain.a.max(-eps), domain.b.min(eps))];
    d.pieces
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let discriminant = discriminant_of(
                Univariate::of(&p.kappa),
                Univariate::of(&p.tau),
                Univariate::of(&p.eta),
            )
            .certify(&far, RequiredSign::NonPositive);
            let leading = Univariate::of(&p.kappa)
                .certify(&far, RequiredSign::NonNegative)
                .and(Univariate::of(&p.kappa).certify(&near, RequiredSign::Positive));
            let trailing = Univariate::of(&p.eta).certify(&far, RequiredSign::NonNegative);
            let verdict = discriminant
                .clone()
                .and(leading.clone())
                .and(trailing.clone());
            TrinomialCheck {
                piece: i,
                discriminant,
                leading,
                trailing,
                verdict,
                transformed: None,
            }
        })
        .collect()
}

/// First ε on [`EPSILON_GRID`] for which every piece passes
/// [`check_tplusplus`].
pub fn search_epsilon(d: &TrinomialDecomposition, domain: Domain) -> Option<f64> {
    if d.pieces.is_empty() {
        return None;
    }
    EPSILON_GRID.iter().copied().find(|&eps| {
        check_tplusplus(d, domain, eps)
            .iter()
            .all(|c| c.verdict.passes())
    })
}

/// Points `x_m → 0` at which some `x f_j′ + (j−1) f_j` is nonzero.
///
/// A nonzero polynomial has isolated zeros, so one suffices for a proof.
/// Otherwise every dyadic scale `2^{−i}`, `i = 1..40`, must contain such a
/// point.
pub fn check_seq(s: &StructuredSystem) -> SignVerdict {
    nonvanishing_near_zero(
        s.domain(),
        s.terms()
            .iter()
            .map(|(j, c)| Univariate::euler(c, *j as i64 - 1))
            .collect(),
    )
}

pub(crate) fn nonvanishing_near_zero(domain: Domain, hs: Vec<Univariate<'_>>) -> SignVerdict {
    if hs
        .iter()
        .any(|h| matches!(h, Univariate::Exact(p) if !p.is_zero()))
    {
        return SignVerdict::Proved;
    }
    let sampled: Vec<&Univariate<'_>> = hs
        .iter()
        .filter(|h| matches!(h, Univariate::Sampled(_)))
        .collect();
    if sampled.is_empty() {
        return SignVerdict::Refuted {
            witness: Witness::at(0.5f64.min(domain.b / 2.0), 0.0),
        };
    }
    let mut samples = 0;
    for i in 1..=40 {
        let scale = 2f64.powi(-i);
        let points = [scale, -scale, 1.5 * scale, -1.5 * scale];
        let mut hit = false;
        for x in points.into_iter().filter(|x| domain.contains(*x)) {
            for h in &sampled {
                samples += 1;
                match h.eval(x) {
                    Ok(v) if v != 0.0 && v.is_finite() => hit = true,
                    Ok(_) => {}
                    Err(e) => {
                        return SignVerdict::Inconclusive {
                            reason: format!("evaluation failed at x = {x}: {e}"),
                        }
                    }
                }
            }
            if hit {
                break;
            }
        }
        if !hit {
            return SignVerdict::Refuted {
                witness: Witness::at(scale, 0.0),
            };
        }
    }
    SignVerdict::SampledPass { samples }
}
