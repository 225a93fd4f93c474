use super::ast::{Expression, Func, Var};

impl Expression {
    /// Exact symbolic partial derivative. Constant folding keeps the result
    /// compact; no further simplification is attempted.
    pub fn differentiate(&self, v: Var) -> Expression {
        use Expression as E;
        match self {
            E::Const(_) => E::int(0),
            E::Var(w) => E::int(if *w == v { 1 } else { 0 }),
            E::Neg(a) => E::neg(a.differentiate(v)),
            E::Add(a, b) => E::add(a.differentiate(v), b.differentiate(v)),
            E::Sub(a, b) => E::sub(a.differentiate(v), b.differentiate(v)),
            E::Mul(a, b) => E::add(
                E::mul(a.differentiate(v), (**b).clone()),
                E::mul((**a).clone(), b.differentiate(v)),
            ),
            E::Div(a, b) => {
                let da = a.differentiate(v);
                let db = b.differentiate(v);
                if db
                    .as_constant()
                    .is_some_and(|c| num_traits::Zero::is_zero(&c))
                {
                    return E::div(da, (**b).clone());
                }
                E::div(
                    E::sub(E::mul(da, (**b).clone()), E::mul((**a).clone(), db)),
                    E::pow((**b).clone(), 2),
                )
            }
            E::Pow(a, n) => E::mul(
                E::mul(E::int(*n as i64), E::pow((**a).clone(), n - 1)),
                a.differentiate(v),
            ),
            E::Call(f, a) => {
                let inner = a.differentiate(v);
                let a = (**a).clone();
                let outer = match f {
                    Func::Exp => E::call(Func::Exp, a),
                    Func::Sin => E::call(Func::Cos, a),
                    Func::Cos => E::neg(E::call(Func::Sin, a)),
                    Func::Sqrt => E::div(E::int(1), E::mul(E::int(2), E::call(Func::Sqrt, a))),
                    // a/|a|: undefined at a = 0, which surfaces as a
                    // division-by-zero on evaluation.
                    Func::Abs => E::div(a.clone(), E::call(Func::Abs, a)),
                };
                E::mul(outer, inner)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    fn d(s: &str, v: Var, x: f64, y: f64) -> f64 {
        parse(s).unwrap().differentiate(v).eval(x, y).unwrap()
    }

    #[test]
    fn quartic_derivative() {
        let e = parse("x^4-x^2+1").unwrap().differentiate(Var::X);
        assert_eq!(e.eval(1.0, 0.0).unwrap(), 2.0);
        assert_eq!(e.eval(2.0, 0.0).unwrap(), 28.0);
    }

    #[test]
    fn y_partial() {
        assert_eq!(d("x*y^2", Var::Y, 3.0, 5.0), 30.0);
        assert_eq!(d("x*y^2", Var::X, 3.0, 5.0), 25.0);
    }

    #[test]
    fn gaussian_derivative() {
        let v = d("-exp(-x^2)", Var::X, 1.0, 0.0);
        assert!((v - 2.0 * (-1.0f64).exp()).abs() < 1e-15);
        assert!((v - 0.73576).abs() < 1e-5);
    }

    #[test]
    fn abs_derivative_fails_only_at_zero() {
        let e = parse("abs(x)").unwrap().differentiate(Var::X);
        assert_eq!(e.eval(-2.0, 0.0).unwrap(), -1.0);
        assert!(e.eval(0.0, 0.0).is_err());
    }

    #[test]
    fn other_functions() {
        assert!((d("sin(x*y)", Var::X, 0.5, 2.0) - 2.0 * 1.0f64.cos()).abs() < 1e-15);
        assert!((d("cos(x)", Var::X, 0.3, 0.0) + 0.3f64.sin()).abs() < 1e-15);
        assert!((d("sqrt(x)", Var::X, 4.0, 0.0) - 0.25).abs() < 1e-15);
        assert!((d("1/x", Var::X, 2.0, 0.0) + 0.25).abs() < 1e-15);
        assert!((d("x^-2", Var::X, 2.0, 0.0) + 0.25).abs() < 1e-15);
    }
}
