use serde::{Deserialize, Serialize};

use crate::par::Execution;
use crate::poly::{RequiredSign, SignVerdict, Witness};
use crate::system::{Coefficient, StructuredSystem};
use crate::transform::ContiFilippov;

use super::bounded::{
    boundedness_construction, odd_route_search, BoundednessConstruction, ConstructionFailure,
};
use super::odd::{check_hg_in, check_odd_conditions};
use super::psi::check_psi_sign;
use super::trinomial::{
    check_seq, check_tminus, check_tplus, check_tplusplus, nonvanishing_near_zero, search_epsilon,
};
use super::{Span, Univariate};

/// Verdict for one named hypothesis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisEntry {
    pub name: String,
    pub description: String,
    #[serde(flatten)]
    pub verdict: SignVerdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremStatus {
    /// Every hypothesis is proved.
    Applicable,
    /// Every hypothesis passes, some only by sampling.
    ApplicableSampled,
    NotApplicable,
}

/// Conclusion about the number of limit cycles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Claim {
    NoClaim,
    AtMostOne,
    ExactlyOne,
}

impl Claim {
    pub fn describe(self) -> &'static str {
        match self {
            Claim::NoClaim => "no claim",
            Claim::AtMostOne => "at most one limit cycle, hyperbolic if it exists",
            Claim::ExactlyOne => {
                "exactly one limit cycle, hyperbolic and attracting every non-constant solution"
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremEntry {
    pub id: String,
    pub conclusion: String,
    pub hypotheses: Vec<String>,
    pub status: TheoremStatus,
    /// Cycle-count claim when applicable; boundedness results claim none.
    pub claim: Claim,
    /// Hypotheses that are refuted or undecided.
    pub failed: Vec<String>,
}

/// Everything the checkers could decide about a structured system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub system: String,
    pub linear_g: bool,
    /// ε used by the eventual-positivity conditions.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    pub hypotheses: Vec<HypothesisEntry>,
    pub theorems: Vec<TheoremEntry>,
    /// Strongest claim among applicable theorems.
    pub claim: Claim,
    pub claim_text: String,
    /// True when the claim rests on a theorem with every hypothesis proved.
    pub certified: bool,
    /// Theorem the claim comes from.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub basis: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundedness: Option<BoundednessConstruction>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundedness_failure: Option<ConstructionFailure>,
    pub notes: Vec<String>,
}

impl HypothesisReport {
    pub fn hypothesis(&self, name: &str) -> Option<&HypothesisEntry> {
        self.hypotheses.iter().find(|h| h.name == name)
    }

    pub fn theorem(&self, id: &str) -> Option<&TheoremEntry> {
        self.theorems.iter().find(|t| t.id == id)
    }

    pub fn applicable(&self) -> impl Iterator<Item = &TheoremEntry> {
        self.theorems
            .iter()
            .filter(|t| t.status != TheoremStatus::NotApplicable)
    }
}

struct Builder {
    hypotheses: Vec<HypothesisEntry>,
    theorems: Vec<TheoremEntry>,
}

impl Builder {
    fn add(
        &mut self,
        name: impl Into<String>,
        description: impl Into<String>,
        verdict: SignVerdict,
    ) -> String {
        let name = name.into();
        self.hypotheses.push(HypothesisEntry {
            name: name.clone(),
            description: description.into(),
            verdict,
        });
        name
    }

    fn verdict(&self, name: &str) -> &SignVerdict {
        &self
            .hypotheses
            .iter()
            .find(|h| h.name == name)
            .expect("hypothesis registered")
            .verdict
    }

    fn theorem(&mut self, id: &str, conclusion: &str, claim: Claim, hypotheses: Vec<String>) {
        let mut failed = Vec::new();
        let mut sampled = false;
        for h in &hypotheses {
            match self.verdict(h) {
                SignVerdict::Proved => {}
                SignVerdict::SampledPass { .. } => sampled = true,
                _ => failed.push(h.clone()),
            }
        }
        let status = if !failed.is_empty() {
            TheoremStatus::NotApplicable
        } else if sampled {
            TheoremStatus::ApplicableSampled
        } else {
            TheoremStatus::Applicable
        };
        self.theorems.push(TheoremEntry {
            id: id.into(),
            conclusion: conclusion.into(),
            hypotheses,
            status,
            claim: if status == TheoremStatus::NotApplicable {
                Claim::NoClaim
            } else {
                claim
            },
            failed,
        });
    }
}

fn refuted_at(x: f64) -> SignVerdict {
    SignVerdict::Refuted {
        witness: Witness::at(x, 0.0),
    }
}

/// Run every checker that applies to `s` and combine the verdicts into
/// per-theorem applicability and an overall claim.
pub fn full_report(s: &StructuredSystem) -> HypothesisReport {
    full_report_with(s, Execution::default())
}

pub fn full_report_with(s: &StructuredSystem, exec: Execution) -> HypothesisReport {
    let d = s.domain();
    let mut b = Builder {
        hypotheses: Vec::new(),
        theorems: Vec::new(),
    };
    let mut notes = Vec::new();
    let linear = s.is_linear_g();
    let zero = Coefficient::zero();
    let f1 = s.f(1).unwrap_or(&zero);

    let whole = b.add(
        "whole_plane",
        "the strip is the whole plane",
        if d.is_whole() {
            SignVerdict::Proved
        } else {
            refuted_at(if d.b.is_finite() { d.b } else { d.a })
        },
    );
    let phi0 = match f1.as_polynomial() {
        Some(p) => {
            Univariate::Exact(p.clone()).certify(&[Span::closed(0.0, 0.0)], RequiredSign::Negative)
        }
        None => match f1.eval(0.0) {
            Ok(v) if v < 0.0 => SignVerdict::SampledPass { samples: 1 },
            Ok(v) => SignVerdict::Refuted {
                witness: Witness::at(0.0, v),
            },
            Err(e) => SignVerdict::Inconclusive {
                reason: e.to_string(),
            },
        },
    };
    let phi0 = b.add("phi_negative_at_origin", "phi(0, 0) = f_1(0) < 0", phi0);

    let odd = check_odd_conditions(s);
    let even = b.add(
        "even_terms_vanish",
        "f_j = 0 for every even j",
        odd.even_terms_vanish.clone(),
    );

    let odd_exist = odd_route_search(s, None, RequiredSign::Positive);
    let f1_pos = b.add(
        "f1_positive_outside",
        format!("f_1 > 0 for |x| > {}", odd_exist.epsilon),
        odd_exist.f1_outside.clone(),
    );
    let kbar_pos = b.add(
        "higher_term_positive_near_origin",
        match odd_exist.kbar {
            Some(k) => format!("f_{} > 0 on [-{e}, {e}]", 2 * k + 1, e = odd_exist.epsilon),
            None => format!(
                "some f_(2k+1), k >= 1, is positive on [-{e}, {e}]",
                e = odd_exist.epsilon
            ),
        },
        odd_exist.kbar_verdict.clone(),
    );
    let odd_bound = odd_route_search(s, None, RequiredSign::NonNegative);
    let f1_nonneg = b.add(
        "f1_nonnegative_outside",
        format!("f_1 >= 0 for |x| > {}", odd_bound.epsilon),
        odd_bound.f1_outside.clone(),
    );
    let kbar_bound = b.add(
        "higher_term_positive_near_origin_bounded",
        format!(
            "some f_(2k+1), k >= 1, is positive on [-{e}, {e}]",
            e = odd_bound.epsilon
        ),
        odd_bound.kbar_verdict.clone(),
    );

    let mut epsilon = None;
    if linear {
        let seq = b.add(
            "seq",
            "x f_j' + (j-1) f_j is nonzero at points accumulating at 0",
            check_seq(s),
        );
        let mut euler = Vec::new();
        for (j, v) in &odd.odd_terms {
            euler.push(b.add(
                format!("euler[{j}]"),
                format!("x f_{j}' + {} f_{j} >= 0 on the strip", j - 1),
                v.clone(),
            ));
        }
        let euler_higher: Vec<String> = odd
            .odd_terms
            .iter()
            .zip(&euler)
            .filter(|((j, _), _)| *j >= 3)
            .map(|(_, n)| n.clone())
            .collect();
        let (tplus, tminus, tpp) = match s.trinomials() {
            Ok(dec) => {
                let mut tplus = Vec::new();
                for c in check_tplus(&dec, d) {
                    tplus.push(b.add(
                        format!("tplus[{}]", c.piece),
                        "piece is star-shaped with nonnegative sign",
                        c.verdict,
                    ));
                }
                let mut tminus = Vec::new();
                for c in check_tminus(&dec, d) {
                    tminus.push(b.add(
                        format!("tminus[{}]", c.piece),
                        "piece is star-shaped with nonpositive sign",
                        c.verdict,
                    ));
                }
                let eps = search_epsilon(&dec, d);
                if eps.is_none() && !dec.pieces.is_empty() {
                    notes.push("no epsilon on the search grid satisfies eventual positivity; reported at epsilon = 1".into());
                }
                let e = eps.unwrap_or(1.0);
                epsilon = Some(e);
                let mut tpp = Vec::new();
                for c in check_tplusplus(&dec, d, e) {
                    tpp.push(b.add(
                        format!("tplusplus[{}]", c.piece),
                        format!("piece is eventually positive beyond |x| = {e} with positive leading coefficient inside"),
                        c.verdict,
                    ));
                }
                if dec.pieces.is_empty() {
                    tpp.push(b.add(
                        "tplusplus",
                        "at least one eventually positive piece",
                        refuted_at(0.0),
                    ));
                }
                (tplus, tminus, tpp)
            }
            Err(e) => {
                let n = b.add(
                    "trinomial_decomposition",
                    "a y-trinomial decomposition is available",
                    SignVerdict::Inconclusive {
                        reason: e.to_string(),
                    },
                );
                (vec![n.clone()], vec![n.clone()], vec![n])
            }
        };
        let cat = |parts: &[&[String]]| {
            parts
                .iter()
                .flat_map(|p| p.iter().cloned())
                .collect::<Vec<_>>()
        };
        b.theorem(
            "uniqueness_trinomial",
            Claim::AtMostOne.describe(),
            Claim::AtMostOne,
            cat(&[&tplus, std::slice::from_ref(&seq)]),
        );
        b.theorem(
            "uniqueness_trinomial_mirror",
            Claim::AtMostOne.describe(),
            Claim::AtMostOne,
            cat(&[&tminus, std::slice::from_ref(&seq)]),
        );
        b.theorem(
            "uniqueness_odd",
            Claim::AtMostOne.describe(),
            Claim::AtMostOne,
            cat(&[
                std::slice::from_ref(&even),
                &euler,
                std::slice::from_ref(&seq),
            ]),
        );
        b.theorem(
            "bounded_trinomial",
            "every orbit eventually enters a fixed disk",
            Claim::NoClaim,
            cat(&[std::slice::from_ref(&whole), &tpp]),
        );
        b.theorem(
            "bounded_odd",
            "every orbit eventually enters a fixed disk",
            Claim::NoClaim,
            cat(&[
                &[whole.clone(), even.clone()],
                &euler_higher,
                &[f1_nonneg, kbar_bound],
            ]),
        );
        b.theorem(
            "existence_trinomial",
            Claim::ExactlyOne.describe(),
            Claim::ExactlyOne,
            cat(&[
                std::slice::from_ref(&whole),
                &tplus,
                &tpp,
                &[seq.clone(), phi0.clone()],
            ]),
        );
        b.theorem(
            "existence_odd",
            Claim::ExactlyOne.describe(),
            Claim::ExactlyOne,
            cat(&[
                &[whole.clone(), even.clone()],
                &euler,
                &[seq, phi0.clone(), f1_pos.clone(), kbar_pos.clone()],
            ]),
        );
    } else {
        nonlinear_family(s, &mut b, exec, [&whole, &even, &phi0, &f1_pos, &kbar_pos]);
    }

    let (boundedness, boundedness_failure) = match boundedness_construction(s, None) {
        Ok(c) => {
            b.add(
                "boundedness_construction",
                format!("phi >= 0 outside the disk of radius {}", c.m),
                c.bound.clone().and(c.boundary.clone()),
            );
            (Some(c), None)
        }
        Err(f) => {
            let v = match f.witness {
                Some(w) => SignVerdict::Refuted {
                    witness: Witness::at_point(w.x, w.y, w.value),
                },
                None => SignVerdict::Inconclusive {
                    reason: f.reason.clone(),
                },
            };
            b.add("boundedness_construction", "phi >= 0 outside some disk", v);
            (None, Some(f))
        }
    };

    let best = b
        .theorems
        .iter()
        .filter(|t| t.status != TheoremStatus::NotApplicable && t.claim != Claim::NoClaim)
        .max_by_key(|t| (t.claim, t.status == TheoremStatus::Applicable));
    let (claim, certified, basis) = match best {
        Some(t) => (
            t.claim,
            t.status == TheoremStatus::Applicable,
            Some(t.id.clone()),
        ),
        None => (Claim::NoClaim, false, None),
    };
    if claim != Claim::ExactlyOne {
        if let Some(f) = &boundedness_failure {
            notes.push(format!("no existence claim: {}", f.reason));
        }
    }
    HypothesisReport {
        system: describe(s),
        linear_g: linear,
        epsilon,
        hypotheses: b.hypotheses,
        theorems: b.theorems,
        claim,
        claim_text: claim.describe().into(),
        certified,
        basis,
        boundedness,
        boundedness_failure,
        notes,
    }
}

fn nonlinear_family(s: &StructuredSystem, b: &mut Builder, exec: Execution, shared: [&String; 5]) {
    let [whole, even, phi0, f1_pos, kbar_pos] = shared.map(|n| n.clone());
    let cf = match ContiFilippov::for_system(s) {
        Ok(cf) => cf,
        Err(e) => {
            let n = b.add(
                "g_admissible",
                "g(0) = 0, g'(0) > 0 and x g(x) > 0 off the origin",
                SignVerdict::Inconclusive {
                    reason: e.to_string(),
                },
            );
            for (id, claim) in [
                ("uniqueness_psi", Claim::AtMostOne),
                ("uniqueness_odd_nonlinear_g", Claim::AtMostOne),
                ("existence_odd_nonlinear_g", Claim::ExactlyOne),
            ] {
                b.theorem(id, claim.describe(), claim, vec![n.clone()]);
            }
            return;
        }
    };
    let adm = b.add(
        "g_admissible",
        "g(0) = 0, g'(0) > 0 and x g(x) > 0 off the origin",
        SignVerdict::Proved,
    );
    let (u_lo, u_hi) = cf.u_range();
    let unbounded = b.add(
        "potential_unbounded",
        "the integral of g diverges toward both ends",
        if u_lo.is_infinite() && u_hi.is_infinite() {
            if s.g().as_polynomial().is_some() {
                SignVerdict::Proved
            } else {
                SignVerdict::SampledPass { samples: 2 }
            }
        } else {
            let x = if u_hi.is_finite() {
                s.domain().b
            } else {
                s.domain().a
            };
            refuted_at(x)
        },
    );

    let (nonneg, nonpos) = check_psi_sign(s, &cf, exec);
    let psi_sign = if nonneg.passes() || !nonpos.passes() {
        nonneg
    } else {
        nonpos
    };
    let psi = b.add(
        "psi_one_signed",
        "the star-shape form of the transformed system has one sign",
        psi_sign,
    );
    let push_seq = match std::sync::Arc::new(cf.clone()).pushforward(s) {
        Ok(p) => check_seq(&p),
        Err(e) => SignVerdict::Inconclusive {
            reason: e.to_string(),
        },
    };
    let push_seq = b.add(
        "pushforward_seq",
        "the transformed system satisfies the sequence condition",
        push_seq,
    );
    b.theorem(
        "uniqueness_psi",
        Claim::AtMostOne.describe(),
        Claim::AtMostOne,
        vec![adm.clone(), psi, push_seq],
    );

    let mut hg = Vec::new();
    let mut stricts = Vec::new();
    for (j, c) in s.terms().iter().filter(|(j, _)| j % 2 == 1) {
        let check = check_hg_in(c, &cf, *j);
        hg.push(b.add(
            format!("hg[{j}]"),
            format!("Euler condition for f_{j} relative to g"),
            check.verdict,
        ));
        stricts.push(check.strict);
    }
    let strict = if stricts.iter().any(|v| v.is_proved()) {
        SignVerdict::Proved
    } else if let Some(v) = stricts.iter().find(|v| v.passes()) {
        v.clone()
    } else {
        nonvanishing_near_zero(s.domain(), vec![])
    };
    let strict = b.add(
        "hg_strict_seq",
        "the Euler condition relative to g is strict at points accumulating at 0",
        strict,
    );
    let mut hyps = vec![adm.clone(), even.clone()];
    hyps.extend(hg.iter().cloned());
    hyps.push(strict.clone());
    b.theorem(
        "uniqueness_odd_nonlinear_g",
        Claim::AtMostOne.describe(),
        Claim::AtMostOne,
        hyps.clone(),
    );
    hyps.extend([whole, unbounded, phi0, f1_pos, kbar_pos]);
    b.theorem(
        "existence_odd_nonlinear_g",
        Claim::ExactlyOne.describe(),
        Claim::ExactlyOne,
        hyps,
    );
}

fn describe(s: &StructuredSystem) -> String {
    let terms: Vec<String> = s
        .terms()
        .iter()
        .map(|(j, c)| format!("f_{j} = {}", c.describe()))
        .collect();
    format!(
        "g = {}; {}",
        s.g().describe(),
        if terms.is_empty() {
            "no damping terms".into()
        } else {
            terms.join("; ")
        }
    )
}
