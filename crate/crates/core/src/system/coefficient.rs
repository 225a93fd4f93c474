use std::fmt;
use std::sync::Arc;

use crate::expr::{Compiled, EvalError, Expression, Var};
use crate::poly::{horner, poly_from_expression, Polynomial};

use super::SystemError;

/// A univariate function known only through evaluation.
pub trait UnivariateFn: Send + Sync + fmt::Debug {
    fn eval(&self, x: f64) -> Result<f64, EvalError>;

    /// Five-point central difference unless overridden.
    fn derivative(&self, x: f64) -> Result<f64, EvalError> {
        let h = 1e-3 * (1.0 + x.abs());
        let f = |t: f64| self.eval(t);
        Ok((f(x - 2.0 * h)? - 8.0 * f(x - h)? + 8.0 * f(x + h)? - f(x + 2.0 * h)?) / (12.0 * h))
    }

    fn describe(&self) -> String;
}

#[derive(Clone)]
pub struct PolyCoefficient {
    exact: Polynomial,
    f: Vec<f64>,
    df: Vec<f64>,
    d2f: Vec<f64>,
}

#[derive(Clone)]
pub struct ExprCoefficient {
    expr: Expression,
    f: Compiled,
    df: Compiled,
    d2f: Compiled,
}

/// A coefficient function of `x`: exact polynomial, closed-form expression,
/// or black-box evaluator.
#[derive(Clone)]
pub enum Coefficient {
    Poly(PolyCoefficient),
    Expr(ExprCoefficient),
    BlackBox(Arc<dyn UnivariateFn>),
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Coefficient({})", self.describe())
    }
}

impl Coefficient {
    pub fn poly(p: Polynomial) -> Self {
        let d = p.derivative();
        let d2 = d.derivative();
        Coefficient::Poly(PolyCoefficient {
            f: p.to_f64_coeffs(),
            df: d.to_f64_coeffs(),
            d2f: d2.to_f64_coeffs(),
            exact: p,
        })
    }

    /// Polynomial expressions are stored exactly; anything else is kept as an
    /// expression with symbolic derivatives.
    pub fn from_expression(e: Expression) -> Result<Self, SystemError> {
        if e.uses(Var::Y) {
            return Err(SystemError::CoefficientDependsOnY(e.to_string()));
        }
        if let Ok(p) = poly_from_expression(&e) {
            return Ok(Coefficient::poly(p));
        }
        let de = e.differentiate(Var::X);
        let d2e = de.differentiate(Var::X);
        Ok(Coefficient::Expr(ExprCoefficient {
            f: e.compile(),
            df: de.compile(),
            d2f: d2e.compile(),
            expr: e,
        }))
    }

    pub fn parse(src: &str) -> Result<Self, SystemError> {
        let e = crate::expr::parse(src).map_err(|e| SystemError::Parse(src.to_string(), e))?;
        Self::from_expression(e)
    }

    pub fn black_box(f: Arc<dyn UnivariateFn>) -> Self {
        Coefficient::BlackBox(f)
    }

    pub fn zero() -> Self {
        Coefficient::poly(Polynomial::zero())
    }

    pub fn eval(&self, x: f64) -> Result<f64, EvalError> {
        match self {
            Coefficient::Poly(p) => Ok(horner(&p.f, x)),
            Coefficient::Expr(e) => e.f.eval(x, 0.0),
            Coefficient::BlackBox(b) => b.eval(x),
        }
    }

    pub fn derivative(&self, x: f64) -> Result<f64, EvalError> {
        match self {
            Coefficient::Poly(p) => Ok(horner(&p.df, x)),
            Coefficient::Expr(e) => e.df.eval(x, 0.0),
            Coefficient::BlackBox(b) => b.derivative(x),
        }
    }

    pub fn second_derivative(&self, x: f64) -> Result<f64, EvalError> {
        match self {
            Coefficient::Poly(p) => Ok(horner(&p.d2f, x)),
            Coefficient::Expr(e) => e.d2f.eval(x, 0.0),
            Coefficient::BlackBox(b) => {
                let h = 1e-3 * (1.0 + x.abs());
                Ok((b.derivative(x + h)? - b.derivative(x - h)?) / (2.0 * h))
            }
        }
    }

    pub fn as_polynomial(&self) -> Option<&Polynomial> {
        match self {
            Coefficient::Poly(p) => Some(&p.exact),
            _ => None,
        }
    }

    /// Closed form, unless this is a black box.
    pub fn expression(&self) -> Option<Expression> {
        match self {
            Coefficient::Poly(p) => Some(p.exact.to_expression()),
            Coefficient::Expr(e) => Some(e.expr.clone()),
            Coefficient::BlackBox(_) => None,
        }
    }

    /// True only when the coefficient is exactly the zero polynomial.
    pub fn is_exactly_zero(&self) -> bool {
        self.as_polynomial().is_some_and(Polynomial::is_zero)
    }

    pub fn is_black_box(&self) -> bool {
        matches!(self, Coefficient::BlackBox(_))
    }

    pub fn describe(&self) -> String {
        match self {
            Coefficient::Poly(p) => p.exact.to_string(),
            Coefficient::Expr(e) => e.expr.to_string(),
            Coefficient::BlackBox(b) => b.describe(),
        }
    }

    /// `x ↦ self(x + shift)`; black boxes are wrapped.
    pub fn shifted(&self, shift: &num_rational::BigRational) -> Self {
        let with = Expression::add(Expression::x(), Expression::Const(shift.clone()));
        match self.expression() {
            Some(e) => {
                Coefficient::from_expression(e.substitute_x(&with)).expect("shift keeps x-only")
            }
            None => {
                let s = crate::expr::rational_to_f64(shift);
                Coefficient::black_box(Arc::new(Shifted {
                    inner: self.clone(),
                    shift: s,
                }))
            }
        }
    }
}

#[derive(Debug)]
struct Shifted {
    inner: Coefficient,
    shift: f64,
}

impl UnivariateFn for Shifted {
    fn eval(&self, x: f64) -> Result<f64, EvalError> {
        self.inner.eval(x + self.shift)
    }
    fn derivative(&self, x: f64) -> Result<f64, EvalError> {
        self.inner.derivative(x + self.shift)
    }
    fn describe(&self) -> String {
        format!("({})(x + {})", self.inner.describe(), self.shift)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_expressions_become_exact() {
        let c = Coefficient::parse("x^4 - x^2 + 1").unwrap();
        assert!(c.as_polynomial().is_some());
        assert_eq!(c.eval(2.0).unwrap(), 13.0);
        assert_eq!(c.derivative(1.0).unwrap(), 2.0);
        assert_eq!(c.second_derivative(1.0).unwrap(), 10.0);
    }

    #[test]
    fn transcendental_kept_as_expression() {
        let c = Coefficient::parse("-exp(-x^2)").unwrap();
        assert!(c.as_polynomial().is_none());
        assert_eq!(c.eval(0.0).unwrap(), -1.0);
        assert!((c.derivative(1.0).unwrap() - 2.0 / 1f64.exp()).abs() < 1e-15);
        assert!(Coefficient::parse("x*y").is_err());
    }

    #[test]
    fn black_box_numeric_derivative() {
        #[derive(Debug)]
        struct Cube;
        impl UnivariateFn for Cube {
            fn eval(&self, x: f64) -> Result<f64, EvalError> {
                Ok(x * x * x)
            }
            fn describe(&self) -> String {
                "cube".into()
            }
        }
        let c = Coefficient::black_box(Arc::new(Cube));
        assert!((c.derivative(2.0).unwrap() - 12.0).abs() < 1e-9);
        assert!((c.second_derivative(2.0).unwrap() - 12.0).abs() < 1e-6);
    }

    #[test]
    fn shifting() {
        let c = Coefficient::parse("x^2").unwrap();
        let s = c.shifted(&crate::poly::Polynomial::from_i64s(&[1]).coeff(0));
        assert_eq!(s.eval(0.0).unwrap(), 1.0);
        assert!(s.as_polynomial().is_some());
    }
}
