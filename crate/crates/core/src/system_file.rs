//! JSON system definitions.

use std::collections::BTreeMap;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{self, ParseError};
use crate::system::{
    Coefficient, Domain, GeneralSystem, PlanarSystem, StructuredSystem, SystemError,
    TrinomialDecomposition, TrinomialPiece,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    Structured,
    General,
}

/// Domain end: a number or one of `"-inf"`, `"inf"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Bound {
    Number(f64),
    Text(String),
}

impl Bound {
    pub fn value(&self) -> Result<f64, SystemFileError> {
        match self {
            Bound::Number(v) => Ok(*v),
            Bound::Text(t) => match t.trim().replace('\u{2011}', "-").as_str() {
                "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
                "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
                other => other
                    .parse()
                    .map_err(|_| SystemFileError::Invalid(format!("bad domain bound {t:?}"))),
            },
        }
    }

    pub fn from_f64(v: f64) -> Self {
        if v == f64::INFINITY {
            Bound::Text("inf".into())
        } else if v == f64::NEG_INFINITY {
            Bound::Text("-inf".into())
        } else {
            Bound::Number(v)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrinomialSpec {
    pub kappa: String,
    pub tau: String,
    pub eta: String,
    pub h: u32,
    pub r: u32,
}

/// System definition as stored on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub kind: SystemKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub f: BTreeMap<String, String>,
    #[serde(default, rename = "P", skip_serializing_if = "Option::is_none")]
    pub p: Option<String>,
    #[serde(default, rename = "Q", skip_serializing_if = "Option::is_none")]
    pub q: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<[Bound; 2]>,
    /// Translation `x → x − shift` applied before analysis.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub shift: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trinomials: Option<Vec<TrinomialSpec>>,
    /// Coefficients are descriptions of numerically defined functions, not
    /// formulas; such a file documents a system but cannot be loaded.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub black_box: bool,
}

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SystemFileError {
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("cannot parse {0:?}: {1}")]
    Expression(String, ParseError),
    #[error("invalid system file: {0}")]
    Invalid(String),
    #[error(transparent)]
    System(#[from] SystemError),
}

impl SystemFileError {
    /// JSON or expression syntax, as opposed to a well-formed but invalid
    /// system.
    pub fn is_syntax(&self) -> bool {
        matches!(
            self,
            SystemFileError::Json(_) | SystemFileError::Expression(..)
        ) || matches!(self, SystemFileError::System(SystemError::Parse(..)))
    }
}

fn parse_expr(src: &str) -> Result<expr::Expression, SystemFileError> {
    expr::parse(src).map_err(|e| SystemFileError::Expression(src.to_string(), e))
}

impl SystemFile {
    pub fn structured(g: &str, f: &[(u32, &str)]) -> Self {
        SystemFile {
            kind: SystemKind::Structured,
            g: Some(g.to_string()),
            f: f.iter()
                .map(|(j, s)| (j.to_string(), s.to_string()))
                .collect(),
            p: None,
            q: None,
            domain: None,
            shift: 0.0,
            trinomials: None,
            black_box: false,
        }
    }

    pub fn general(p: &str, q: &str) -> Self {
        SystemFile {
            kind: SystemKind::General,
            g: None,
            f: BTreeMap::new(),
            p: Some(p.to_string()),
            q: Some(q.to_string()),
            domain: None,
            shift: 0.0,
            trinomials: None,
            black_box: false,
        }
    }

    pub fn with_domain(mut self, a: f64, b: f64) -> Self {
        self.domain = Some([Bound::from_f64(a), Bound::from_f64(b)]);
        self
    }

    pub fn from_json(src: &str) -> Result<Self, SystemFileError> {
        serde_json::from_str(src).map_err(|e| SystemFileError::Json(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("system files serialize")
    }

    fn shift_rational(&self) -> Result<Option<BigRational>, SystemFileError> {
        if self.shift == 0.0 {
            return Ok(None);
        }
        BigRational::from_float(self.shift)
            .map(Some)
            .ok_or_else(|| SystemFileError::Invalid(format!("shift {} is not finite", self.shift)))
    }

    fn coefficient(
        &self,
        src: &str,
        shift: &Option<BigRational>,
    ) -> Result<Coefficient, SystemFileError> {
        let c = Coefficient::from_expression(parse_expr(src)?)?;
        Ok(match shift {
            Some(s) => c.shifted(s),
            None => c,
        })
    }

    /// Build the system, applying the shift.
    pub fn to_system(&self) -> Result<PlanarSystem, SystemFileError> {
        if self.black_box {
            return Err(SystemFileError::Invalid(
                "black-box coefficients cannot be loaded".into(),
            ));
        }
        let shift = self.shift_rational()?;
        match self.kind {
            SystemKind::Structured => {
                if self.p.is_some() || self.q.is_some() {
                    return Err(SystemFileError::Invalid(
                        "P and Q belong to general systems".into(),
                    ));
                }
                let g_src = self
                    .g
                    .as_deref()
                    .ok_or_else(|| SystemFileError::Invalid("structured system needs g".into()))?;
                let g = self.coefficient(g_src, &shift)?;
                let mut f = Vec::new();
                for (k, v) in &self.f {
                    let j: u32 = k.trim().parse().map_err(|_| {
                        SystemFileError::Invalid(format!("degree {k:?} is not a positive integer"))
                    })?;
                    f.push((j, self.coefficient(v, &shift)?));
                }
                let domain = match &self.domain {
                    Some([a, b]) => Domain::new(a.value()? - self.shift, b.value()? - self.shift)?,
                    None => Domain::whole(),
                };
                let mut s = StructuredSystem::new(g, f, domain)?;
                if let Some(pieces) = &self.trinomials {
                    let mut out = Vec::new();
                    for p in pieces {
                        out.push(TrinomialPiece::new(
                            self.coefficient(&p.kappa, &shift)?,
                            self.coefficient(&p.tau, &shift)?,
                            self.coefficient(&p.eta, &shift)?,
                            p.h,
                            p.r,
                        )?);
                    }
                    s = s.with_trinomials(TrinomialDecomposition::new(out))?;
                }
                Ok(s.into())
            }
            SystemKind::General => {
                if self.g.is_some() || !self.f.is_empty() || self.trinomials.is_some() {
                    return Err(SystemFileError::Invalid(
                        "g, f and trinomials belong to structured systems".into(),
                    ));
                }
                if self.domain.is_some() {
                    return Err(SystemFileError::Invalid(
                        "general systems live on the whole plane".into(),
                    ));
                }
                let need = |v: &Option<String>, n: &str| {
                    v.clone().ok_or_else(|| {
                        SystemFileError::Invalid(format!("general system needs {n}"))
                    })
                };
                let (mut p, mut q) = (
                    parse_expr(&need(&self.p, "P")?)?,
                    parse_expr(&need(&self.q, "Q")?)?,
                );
                if let Some(s) = shift {
                    let with =
                        expr::Expression::add(expr::Expression::x(), expr::Expression::Const(s));
                    p = p.substitute_x(&with);
                    q = q.substitute_x(&with);
                }
                Ok(GeneralSystem::new(p, q).into())
            }
        }
    }
}
