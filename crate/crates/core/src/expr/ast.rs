use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Free variable of an expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    X,
    Y,
}

/// Built-in unary functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Sin,
    Cos,
    Sqrt,
    Abs,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }
}

/// Expression tree. Constants are exact rationals; powers carry an integer
/// exponent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expression {
    Const(BigRational),
    Var(Var),
    Neg(Box<Expression>),
    Add(Box<Expression>, Box<Expression>),
    Sub(Box<Expression>, Box<Expression>),
    Mul(Box<Expression>, Box<Expression>),
    Div(Box<Expression>, Box<Expression>),
    Pow(Box<Expression>, i32),
    Call(Func, Box<Expression>),
}

#[allow(clippy::should_implement_trait)]
impl Expression {
    pub fn x() -> Self {
        Expression::Var(Var::X)
    }

    pub fn y() -> Self {
        Expression::Var(Var::Y)
    }

    pub fn int(n: i64) -> Self {
        Expression::Const(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn constant(c: BigRational) -> Self {
        Expression::Const(c)
    }

    /// Value of a variable-free subtree, if it folds to an exact rational.
    /// Function calls never fold.
    pub fn as_constant(&self) -> Option<BigRational> {
        match self {
            Expression::Const(c) => Some(c.clone()),
            Expression::Var(_) | Expression::Call(..) => None,
            Expression::Neg(a) => Some(-a.as_constant()?),
            Expression::Add(a, b) => Some(a.as_constant()? + b.as_constant()?),
            Expression::Sub(a, b) => Some(a.as_constant()? - b.as_constant()?),
            Expression::Mul(a, b) => Some(a.as_constant()? * b.as_constant()?),
            Expression::Div(a, b) => {
                let d = b.as_constant()?;
                if d.is_zero() {
                    None
                } else {
                    Some(a.as_constant()? / d)
                }
            }
            Expression::Pow(a, n) => rational_pow(&a.as_constant()?, *n),
        }
    }

    /// True if the variable occurs anywhere in the tree.
    pub fn uses(&self, v: Var) -> bool {
        match self {
            Expression::Const(_) => false,
            Expression::Var(w) => *w == v,
            Expression::Neg(a) | Expression::Pow(a, _) | Expression::Call(_, a) => a.uses(v),
            Expression::Add(a, b)
            | Expression::Sub(a, b)
            | Expression::Mul(a, b)
            | Expression::Div(a, b) => a.uses(v) || b.uses(v),
        }
    }

    /// Replace every occurrence of `x` by `with`.
    pub fn substitute_x(&self, with: &Expression) -> Expression {
        let rec = |e: &Expression| Box::new(e.substitute_x(with));
        match self {
            Expression::Var(Var::X) => with.clone(),
            Expression::Const(_) | Expression::Var(Var::Y) => self.clone(),
            Expression::Neg(a) => Expression::Neg(rec(a)),
            Expression::Add(a, b) => Expression::Add(rec(a), rec(b)),
            Expression::Sub(a, b) => Expression::Sub(rec(a), rec(b)),
            Expression::Mul(a, b) => Expression::Mul(rec(a), rec(b)),
            Expression::Div(a, b) => Expression::Div(rec(a), rec(b)),
            Expression::Pow(a, n) => Expression::Pow(rec(a), *n),
            Expression::Call(f, a) => Expression::Call(*f, rec(a)),
        }
    }

    /// Number of nodes, used to keep compiled stacks small.
    pub fn size(&self) -> usize {
        match self {
            Expression::Const(_) | Expression::Var(_) => 1,
            Expression::Neg(a) | Expression::Pow(a, _) | Expression::Call(_, a) => 1 + a.size(),
            Expression::Add(a, b)
            | Expression::Sub(a, b)
            | Expression::Mul(a, b)
            | Expression::Div(a, b) => 1 + a.size() + b.size(),
        }
    }

    // Smart constructors with constant folding. They are what the
    // differentiator uses, so derivatives stay readable.

    pub fn neg(a: Expression) -> Expression {
        match a {
            Expression::Const(c) => Expression::Const(-c),
            Expression::Neg(inner) => *inner,
            other => Expression::Neg(Box::new(other)),
        }
    }

    pub fn add(a: Expression, b: Expression) -> Expression {
        match (a.as_literal(), b.as_literal()) {
            (Some(p), Some(q)) => Expression::Const(p + q),
            (Some(p), None) if p.is_zero() => b,
            (None, Some(q)) if q.is_zero() => a,
            _ => Expression::Add(Box::new(a), Box::new(b)),
        }
    }

    pub fn sub(a: Expression, b: Expression) -> Expression {
        match (a.as_literal(), b.as_literal()) {
            (Some(p), Some(q)) => Expression::Const(p - q),
            (Some(p), None) if p.is_zero() => Expression::neg(b),
            (None, Some(q)) if q.is_zero() => a,
            _ => Expression::Sub(Box::new(a), Box::new(b)),
        }
    }

    pub fn mul(a: Expression, b: Expression) -> Expression {
        match (a.as_literal(), b.as_literal()) {
            (Some(p), Some(q)) => Expression::Const(p * q),
            (Some(p), _) if p.is_zero() => Expression::int(0),
            (_, Some(q)) if q.is_zero() => Expression::int(0),
            (Some(p), _) if p.is_one() => b,
            (_, Some(q)) if q.is_one() => a,
            (Some(p), _) if (-p.clone()).is_one() => Expression::neg(b),
            (_, Some(q)) if (-q.clone()).is_one() => Expression::neg(a),
            _ => Expression::Mul(Box::new(a), Box::new(b)),
        }
    }

    pub fn div(a: Expression, b: Expression) -> Expression {
        match (a.as_literal(), b.as_literal()) {
            (Some(p), Some(q)) if !q.is_zero() => Expression::Const(p / q),
            (Some(p), _) if p.is_zero() => Expression::int(0),
            (_, Some(q)) if q.is_one() => a,
            _ => Expression::Div(Box::new(a), Box::new(b)),
        }
    }

    pub fn pow(a: Expression, n: i32) -> Expression {
        if n == 0 {
            return Expression::int(1);
        }
        if n == 1 {
            return a;
        }
        if let Some(p) = a.as_literal() {
            if let Some(v) = rational_pow(&p, n) {
                return Expression::Const(v);
            }
        }
        Expression::Pow(Box::new(a), n)
    }

    pub fn call(f: Func, a: Expression) -> Expression {
        Expression::Call(f, Box::new(a))
    }

    fn as_literal(&self) -> Option<BigRational> {
        match self {
            Expression::Const(c) => Some(c.clone()),
            _ => None,
        }
    }
}

pub fn rational_pow(base: &BigRational, n: i32) -> Option<BigRational> {
    if n < 0 && base.is_zero() {
        return None;
    }
    let mut acc = BigRational::one();
    for _ in 0..n.unsigned_abs() {
        acc *= base;
    }
    Some(if n < 0 { acc.recip() } else { acc })
}

/// Lossy conversion used when an exact constant enters floating-point code.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}
