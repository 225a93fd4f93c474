//! Exact univariate polynomials over the rationals and certified sign
//! questions about them.

mod bound;
mod roots;
mod sign;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::expr::{Expression, Var};

pub use bound::{cauchy_bound, CauchyBound, CauchyError};
pub use roots::{count_roots_in, isolate_real_roots, sturm_chain, RootLocation};
pub use sign::{sign_on_interval, Bound, RealInterval, RequiredSign, SignVerdict, Witness};

/// Dense polynomial with exact rational coefficients, lowest degree first.
/// Trailing zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Polynomial {
    coeffs: Vec<BigRational>,
}

pub(crate) fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub(crate) fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Self::from_coeffs(vec![c])
    }

    /// The polynomial `x`.
    pub fn x() -> Self {
        Self::monomial(BigRational::one(), 1)
    }

    pub fn monomial(c: BigRational, degree: usize) -> Self {
        let mut coeffs = vec![BigRational::zero(); degree + 1];
        coeffs[degree] = c;
        Self::from_coeffs(coeffs)
    }

    pub fn from_coeffs(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn from_i64s(coeffs: &[i64]) -> Self {
        Self::from_coeffs(coeffs.iter().map(|&c| rat(c)).collect())
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    /// Coefficient of `x^i` (zero past the degree).
    pub fn coeff(&self, i: usize) -> BigRational {
        self.coeffs
            .get(i)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&BigRational> {
        self.coeffs.last()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn derivative(&self) -> Self {
        Self::from_coeffs(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * rat(i as i64))
                .collect(),
        )
    }

    /// Antiderivative vanishing at 0.
    pub fn integral(&self) -> Self {
        let mut out = vec![BigRational::zero()];
        out.extend(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| c / rat(i as i64 + 1)),
        );
        Self::from_coeffs(out)
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// `x·p′ + c·p`, the radial-derivative combination that appears in every
    /// star-shape condition.
    pub fn euler_combination(&self, c: i64) -> Self {
        &(&Self::x() * &self.derivative()) + &self.scale(&rat(c))
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Floating-point evaluation (Horner with rounded coefficients).
    pub fn eval_f64(&self, x: f64) -> f64 {
        horner(&self.to_f64_coeffs(), x)
    }

    pub fn to_f64_coeffs(&self) -> Vec<f64> {
        self.coeffs
            .iter()
            .map(crate::expr::rational_to_f64)
            .collect()
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, d: &Polynomial) -> (Polynomial, Polynomial) {
        let dd = d.degree().expect("division by the zero polynomial");
        let lead = d.leading().unwrap().clone();
        let mut rem = self.coeffs.clone();
        let n = self.coeffs.len();
        if n <= dd {
            return (Polynomial::zero(), self.clone());
        }
        let mut quot = vec![BigRational::zero(); n - dd];
        for k in (0..n - dd).rev() {
            let c = &rem[k + dd] / &lead;
            if !c.is_zero() {
                for (i, dc) in d.coeffs.iter().enumerate() {
                    rem[k + i] -= &c * dc;
                }
            }
            quot[k] = c;
        }
        rem.truncate(dd);
        (Polynomial::from_coeffs(quot), Polynomial::from_coeffs(rem))
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Polynomial) -> Polynomial {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn monic(&self) -> Polynomial {
        match self.leading() {
            None => Polynomial::zero(),
            Some(l) => self.scale(&l.recip()),
        }
    }

    /// Same real roots, each with multiplicity one.
    pub fn squarefree(&self) -> Polynomial {
        if self.is_constant() {
            return self.monic();
        }
        let g = self.gcd(&self.derivative());
        self.div_rem(&g).0.monic()
    }

    /// Expression tree for this polynomial in `x`.
    pub fn to_expression(&self) -> Expression {
        let mut acc: Option<Expression> = None;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let term = match i {
                0 => Expression::Const(c.abs()),
                _ => Expression::mul(
                    Expression::Const(c.abs()),
                    Expression::pow(Expression::x(), i as i32),
                ),
            };
            acc = Some(match (acc, c.is_negative()) {
                (None, false) => term,
                (None, true) => Expression::Neg(Box::new(term)),
                (Some(a), false) => Expression::Add(Box::new(a), Box::new(term)),
                (Some(a), true) => Expression::Sub(Box::new(a), Box::new(term)),
            });
        }
        acc.unwrap_or_else(|| Expression::int(0))
    }
}

pub(crate) fn horner(coeffs: &[f64], x: f64) -> f64 {
    let mut acc = 0.0;
    for c in coeffs.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::from_coeffs((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::from_coeffs((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::from_coeffs(out)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial::from_coeffs(self.coeffs.iter().map(|c| -c).collect())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Polynomial {
            type Output = Polynomial;
            fn $m(self, rhs: Polynomial) -> Polynomial {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        -&self
    }
}

/// Human-readable form such as `-3191/100 x^4 - 16 x^2`.
impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if c.is_negative() { " - " } else { " + " })?;
            }
            first = false;
            let show_coeff = i == 0 || !mag.is_one();
            if show_coeff {
                if mag.is_integer() {
                    write!(f, "{}", mag.numer())?;
                } else {
                    write!(f, "{}/{}", mag.numer(), mag.denom())?;
                }
            }
            match i {
                0 => {}
                1 if show_coeff => f.write_str(" x")?,
                1 => f.write_str("x")?,
                _ if show_coeff => write!(f, " x^{i}")?,
                _ => write!(f, "x^{i}")?,
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NotPolynomial {
    #[error("expression depends on y")]
    DependsOnY,
    #[error("function {0} is not polynomial")]
    Transcendental(&'static str),
    #[error("division by a non-constant expression")]
    NonConstantDivisor,
    #[error("division by zero")]
    DivisionByZero,
    #[error("negative power of a non-constant expression")]
    NegativePower,
}

/// Recover the exact coefficient list of an expression that is a polynomial
/// in `x`.
pub fn poly_from_expression(e: &Expression) -> Result<Polynomial, NotPolynomial> {
    Ok(match e {
        Expression::Const(c) => Polynomial::constant(c.clone()),
        Expression::Var(Var::X) => Polynomial::x(),
        Expression::Var(Var::Y) => return Err(NotPolynomial::DependsOnY),
        Expression::Neg(a) => -poly_from_expression(a)?,
        Expression::Add(a, b) => poly_from_expression(a)? + poly_from_expression(b)?,
        Expression::Sub(a, b) => poly_from_expression(a)? - poly_from_expression(b)?,
        Expression::Mul(a, b) => poly_from_expression(a)? * poly_from_expression(b)?,
        Expression::Div(a, b) => {
            let d = poly_from_expression(b)?;
            if !d.is_constant() {
                return Err(NotPolynomial::NonConstantDivisor);
            }
            if d.is_zero() {
                return Err(NotPolynomial::DivisionByZero);
            }
            poly_from_expression(a)?.scale(&d.coeff(0).recip())
        }
        Expression::Pow(a, n) => {
            let p = poly_from_expression(a)?;
            if *n >= 0 {
                p.pow(*n as u32)
            } else if p.is_constant() && !p.is_zero() {
                Polynomial::constant(crate::expr::rational_pow(&p.coeff(0), *n).unwrap())
            } else if p.is_zero() {
                return Err(NotPolynomial::DivisionByZero);
            } else {
                return Err(NotPolynomial::NegativePower);
            }
        }
        Expression::Call(f, _) => return Err(NotPolynomial::Transcendental(f.name())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn p(s: &str) -> Polynomial {
        poly_from_expression(&parse(s).unwrap()).unwrap()
    }

    #[test]
    fn from_expression() {
        assert_eq!(p("x^4-x^2+1"), Polynomial::from_i64s(&[1, 0, -1, 0, 1]));
        assert!(p("0").is_zero());
        assert_eq!(p("(x^2+1)").pow(2), Polynomial::from_i64s(&[1, 0, 2, 0, 1]));
        assert_eq!(p("x^2/10").coeff(2), ratio(1, 10));
        assert_eq!(p("(x+1)*(x-1) / 2^-1"), Polynomial::from_i64s(&[-2, 0, 2]));
        let e = parse("-exp(-x^2)").unwrap();
        assert_eq!(
            poly_from_expression(&e),
            Err(NotPolynomial::Transcendental("exp"))
        );
        let e = parse("1/x").unwrap();
        assert_eq!(
            poly_from_expression(&e),
            Err(NotPolynomial::NonConstantDivisor)
        );
        let e = parse("x*y").unwrap();
        assert_eq!(poly_from_expression(&e), Err(NotPolynomial::DependsOnY));
    }

    #[test]
    fn arithmetic() {
        let f = Polynomial::from_i64s(&[1, 0, -1, 0, 1]);
        assert_eq!(f.derivative(), Polynomial::from_i64s(&[0, -2, 0, 4]));
        assert!((&f * &Polynomial::zero()).is_zero());
        assert_eq!(
            f.euler_combination(2),
            Polynomial::from_i64s(&[2, 0, -4, 0, 6])
        );
        assert_eq!(f.eval(&rat(2)), rat(13));
        assert_eq!(f.eval_f64(2.0), 13.0);
        assert_eq!(
            Polynomial::from_i64s(&[0, 1]).integral(),
            Polynomial::from_coeffs(vec![rat(0), rat(0), ratio(1, 2)])
        );
        assert_eq!((&f - &f), Polynomial::zero());
        assert_eq!((&f * &f).degree(), Some(8));
    }

    #[test]
    fn division_and_gcd() {
        let a = Polynomial::from_i64s(&[-1, 0, 1]); // x^2 - 1
        let b = Polynomial::from_i64s(&[1, 1]); // x + 1
        let (q, r) = a.div_rem(&b);
        assert_eq!(q, Polynomial::from_i64s(&[-1, 1]));
        assert!(r.is_zero());
        let sq = (&a * &a).squarefree();
        assert_eq!(sq, a);
        assert_eq!(a.gcd(&Polynomial::from_i64s(&[2, 2])), b);
    }

    #[test]
    fn display() {
        let d = Polynomial::from_coeffs(vec![rat(0), rat(0), rat(-16), rat(0), ratio(-3191, 100)]);
        assert_eq!(d.to_string(), "-3191/100 x^4 - 16 x^2");
        assert_eq!(
            Polynomial::from_i64s(&[2, -1, 0, 1]).to_string(),
            "x^3 - x + 2"
        );
        assert_eq!(Polynomial::zero().to_string(), "0");
    }

    #[test]
    fn to_expression_round_trip() {
        let f = Polynomial::from_coeffs(vec![rat(-1), ratio(1, 3), rat(0), rat(-2)]);
        assert_eq!(poly_from_expression(&f.to_expression()).unwrap(), f);
        assert!(poly_from_expression(&Polynomial::zero().to_expression())
            .unwrap()
            .is_zero());
    }
}
