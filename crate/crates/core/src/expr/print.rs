use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::ast::{Expression, Var};

/// Canonical, fully parenthesized form. Reparsing the output yields the same
/// tree for anything the parser produced.
impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expression::Const(c) => write_constant(f, c),
            Expression::Var(Var::X) => f.write_str("x"),
            Expression::Var(Var::Y) => f.write_str("y"),
            Expression::Neg(a) => write!(f, "(-{a})"),
            Expression::Add(a, b) => write!(f, "({a} + {b})"),
            Expression::Sub(a, b) => write!(f, "({a} - {b})"),
            Expression::Mul(a, b) => write!(f, "({a} * {b})"),
            Expression::Div(a, b) => write!(f, "({a} / {b})"),
            Expression::Pow(a, n) if *n < 0 => write!(f, "({a}^({n}))"),
            Expression::Pow(a, n) => write!(f, "({a}^{n})"),
            Expression::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

fn write_constant(f: &mut fmt::Formatter<'_>, c: &BigRational) -> fmt::Result {
    if c.is_negative() {
        f.write_str("(-")?;
        write_constant(f, &-c.clone())?;
        return f.write_str(")");
    }
    match decimal_string(c) {
        Some(s) => f.write_str(&s),
        None => write!(f, "({}/{})", c.numer(), c.denom()),
    }
}

/// Exact decimal rendering of a nonnegative rational whose denominator has
/// only the prime factors 2 and 5.
pub(crate) fn decimal_string(c: &BigRational) -> Option<String> {
    if c.is_integer() {
        return Some(c.numer().to_string());
    }
    let mut d = c.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let (mut twos, mut fives) = (0u32, 0u32);
    while d.is_even() {
        d /= &two;
        twos += 1;
    }
    while (&d % &five).is_zero() {
        d /= &five;
        fives += 1;
    }
    if !d.is_one() || twos.max(fives) > 64 {
        return None;
    }
    let k = twos.max(fives) as usize;
    let scaled = c * BigRational::from_integer(num_traits::pow(BigInt::from(10), k));
    let digits = scaled.to_integer().abs().to_string();
    let digits = format!("{digits:0>width$}", width = k + 1);
    let (int_part, frac_part) = digits.split_at(digits.len() - k);
    let sign = if c.is_negative() { "-" } else { "" };
    Some(format!("{sign}{int_part}.{frac_part}"))
}
