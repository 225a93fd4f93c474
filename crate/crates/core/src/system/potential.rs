use crate::expr::EvalError;
use crate::poly::{horner, Polynomial};
use crate::quad;

use super::{Coefficient, Domain};

/// The primitive `G(x) = ∫₀ˣ g`.
///
/// Exact for polynomial `g`. Otherwise cumulative values are tabulated at a
/// uniform mesh of spacing [`TABLE_STEP`] out to `|x| ≤` [`TABLE_REACH`] and
/// the remainder from the nearest node is integrated with one Kronrod pass;
/// beyond the table an adaptive rule takes over.
#[derive(Debug, Clone)]
pub enum Potential {
    Exact {
        primitive: Polynomial,
        coeffs: Vec<f64>,
    },
    Tabulated(Table),
}

pub const TABLE_STEP: f64 = 1.0 / 16.0;
pub const TABLE_REACH: f64 = 64.0;

#[derive(Debug, Clone)]
pub struct Table {
    g: Coefficient,
    pos: Vec<f64>,
    neg: Vec<f64>,
}

impl Potential {
    pub fn new(g: &Coefficient, domain: Domain) -> Result<Self, EvalError> {
        if let Some(p) = g.as_polynomial() {
            let primitive = p.integral();
            return Ok(Potential::Exact {
                coeffs: primitive.to_f64_coeffs(),
                primitive,
            });
        }
        let build = |limit: f64, sign: f64| -> Result<Vec<f64>, EvalError> {
            let reach = limit.abs().min(TABLE_REACH);
            let mut out = vec![0.0];
            let mut k = 0usize;
            while ((k + 1) as f64) * TABLE_STEP < reach {
                let a = sign * k as f64 * TABLE_STEP;
                let b = sign * (k + 1) as f64 * TABLE_STEP;
                let piece = quad::integrate(|s| g.eval(s), a, b, 1e-15)?;
                out.push(out[k] + piece);
                k += 1;
            }
            Ok(out)
        };
        Ok(Potential::Tabulated(Table {
            pos: build(domain.b, 1.0)?,
            neg: build(domain.a, -1.0)?,
            g: g.clone(),
        }))
    }

    pub fn eval(&self, x: f64) -> Result<f64, EvalError> {
        match self {
            Potential::Exact { coeffs, .. } => Ok(horner(coeffs, x)),
            Potential::Tabulated(t) => t.eval(x),
        }
    }

    /// Exact primitive when `g` is polynomial.
    pub fn polynomial(&self) -> Option<&Polynomial> {
        match self {
            Potential::Exact { primitive, .. } => Some(primitive),
            Potential::Tabulated(_) => None,
        }
    }
}

impl Table {
    fn eval(&self, x: f64) -> Result<f64, EvalError> {
        let (nodes, sign) = if x >= 0.0 {
            (&self.pos, 1.0)
        } else {
            (&self.neg, -1.0)
        };
        let k = ((x.abs() / TABLE_STEP).floor() as usize).min(nodes.len() - 1);
        let start = sign * k as f64 * TABLE_STEP;
        if x == start {
            return Ok(nodes[k]);
        }
        let mut f = |s: f64| self.g.eval(s);
        let mut rest = None;
        if (x - start).abs() <= TABLE_STEP {
            let (v, err) = quad::gk15(&mut f, start, x)?;
            if err <= 1e-14 * (1.0 + v.abs()) {
                rest = Some(v);
            }
        }
        let rest = match rest {
            Some(v) => v,
            None => quad::integrate(f, start, x, 1e-14)?,
        };
        Ok(nodes[k] + rest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_primitive() {
        let g = Coefficient::parse("x + x^3").unwrap();
        let p = Potential::new(&g, Domain::whole()).unwrap();
        assert_eq!(p.eval(1.0).unwrap(), 0.75);
        let g = Coefficient::parse("x").unwrap();
        let p = Potential::new(&g, Domain::whole()).unwrap();
        assert_eq!(p.eval(2.0).unwrap(), 2.0);
        assert_eq!(p.eval(-2.0).unwrap(), 2.0);
    }

    #[test]
    fn tabulated_primitive() {
        let g = Coefficient::parse("x*exp(-x^2) + x").unwrap();
        let p = Potential::new(&g, Domain::whole()).unwrap();
        let exact = |x: f64| 0.5 * (1.0 - (-x * x).exp()) + 0.5 * x * x;
        for x in [0.0, 0.01, -0.3, 1.0, 2.5, -7.5, 63.99, 80.0, -150.0] {
            let v = p.eval(x).unwrap();
            assert!(
                (v - exact(x)).abs() <= 1e-12 * (1.0 + exact(x)),
                "{x}: {v} vs {}",
                exact(x)
            );
        }
    }

    #[test]
    fn bounded_domain_table() {
        let g = Coefficient::parse("x/sqrt(1 - x^2)").unwrap();
        let d = Domain::new(-1.0, 1.0).unwrap();
        let p = Potential::new(&g, d).unwrap();
        let exact = |x: f64| 1.0 - (1.0 - x * x).sqrt();
        for x in [0.5, -0.9, 0.99] {
            assert!((p.eval(x).unwrap() - exact(x)).abs() < 1e-11);
        }
    }
}
