use thiserror::Error;

use super::ast::{rational_to_f64, Expression, Func, Var};

/// Failure to evaluate at a point outside the domain of some subexpression.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("square root of negative number {0}")]
    SqrtOfNegative(f64),
    #[error("non-finite result")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    Const(f64),
    X,
    Y,
    Neg,
    Add,
    Sub,
    Mul,
    Div,
    Powi(i32),
    Call(Func),
}

/// Postfix program for repeated evaluation of one expression.
#[derive(Debug, Clone, PartialEq)]
pub struct Compiled {
    ops: Vec<Op>,
    depth: usize,
}

const INLINE_STACK: usize = 32;

impl Compiled {
    pub fn new(e: &Expression) -> Self {
        let mut ops = Vec::with_capacity(e.size());
        let depth = emit(e, &mut ops);
        Compiled { ops, depth }
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<f64, EvalError> {
        if self.depth <= INLINE_STACK {
            let mut stack = [0.0f64; INLINE_STACK];
            self.run(x, y, &mut stack)
        } else {
            let mut stack = vec![0.0f64; self.depth];
            self.run(x, y, &mut stack)
        }
    }

    fn run(&self, x: f64, y: f64, stack: &mut [f64]) -> Result<f64, EvalError> {
        let mut sp = 0usize;
        for op in &self.ops {
            match *op {
                Op::Const(c) => {
                    stack[sp] = c;
                    sp += 1;
                }
                Op::X => {
                    stack[sp] = x;
                    sp += 1;
                }
                Op::Y => {
                    stack[sp] = y;
                    sp += 1;
                }
                Op::Neg => stack[sp - 1] = -stack[sp - 1],
                Op::Add | Op::Sub | Op::Mul | Op::Div => {
                    let b = stack[sp - 1];
                    let a = stack[sp - 2];
                    sp -= 1;
                    stack[sp - 1] = match *op {
                        Op::Add => a + b,
                        Op::Sub => a - b,
                        Op::Mul => a * b,
                        _ => {
                            if b == 0.0 {
                                return Err(EvalError::DivisionByZero);
                            }
                            a / b
                        }
                    };
                }
                Op::Powi(n) => {
                    let a = stack[sp - 1];
                    if n < 0 && a == 0.0 {
                        return Err(EvalError::DivisionByZero);
                    }
                    stack[sp - 1] = a.powi(n);
                }
                Op::Call(f) => {
                    let a = stack[sp - 1];
                    stack[sp - 1] = match f {
                        Func::Exp => a.exp(),
                        Func::Sin => a.sin(),
                        Func::Cos => a.cos(),
                        Func::Abs => a.abs(),
                        Func::Sqrt => {
                            if a < 0.0 {
                                return Err(EvalError::SqrtOfNegative(a));
                            }
                            a.sqrt()
                        }
                    };
                }
            }
        }
        let v = stack[0];
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite)
        }
    }
}

/// Append postfix code for `e`; returns the stack depth it needs.
fn emit(e: &Expression, ops: &mut Vec<Op>) -> usize {
    match e {
        Expression::Const(c) => {
            ops.push(Op::Const(rational_to_f64(c)));
            1
        }
        Expression::Var(Var::X) => {
            ops.push(Op::X);
            1
        }
        Expression::Var(Var::Y) => {
            ops.push(Op::Y);
            1
        }
        Expression::Neg(a) => {
            let d = emit(a, ops);
            ops.push(Op::Neg);
            d
        }
        Expression::Pow(a, n) => {
            let d = emit(a, ops);
            ops.push(Op::Powi(*n));
            d
        }
        Expression::Call(f, a) => {
            let d = emit(a, ops);
            ops.push(Op::Call(*f));
            d
        }
        Expression::Add(a, b)
        | Expression::Sub(a, b)
        | Expression::Mul(a, b)
        | Expression::Div(a, b) => {
            let da = emit(a, ops);
            let db = emit(b, ops);
            ops.push(match e {
                Expression::Add(..) => Op::Add,
                Expression::Sub(..) => Op::Sub,
                Expression::Mul(..) => Op::Mul,
                _ => Op::Div,
            });
            da.max(db + 1)
        }
    }
}

impl Expression {
    /// Compile for repeated evaluation.
    pub fn compile(&self) -> Compiled {
        Compiled::new(self)
    }

    /// One-off evaluation. Hot loops should hold a [`Compiled`] instead.
    pub fn eval(&self, x: f64, y: f64) -> Result<f64, EvalError> {
        self.compile().eval(x, y)
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    fn ev(s: &str, x: f64, y: f64) -> Result<f64, EvalError> {
        parse(s).unwrap().eval(x, y)
    }

    #[test]
    fn basic_values() {
        assert_eq!(ev("x*y", 3.0, 4.0).unwrap(), 12.0);
        assert_eq!(ev("1 - exp(-x^2)", 0.0, 0.0).unwrap(), 0.0);
        assert_eq!(ev("x^4-x^2+1", 1.0, 0.0).unwrap(), 1.0);
        assert_eq!(ev("x^4 - x^2 + 1", 2.0, 0.0).unwrap(), 13.0);
        assert_eq!(ev("10 - 2 - 3", 0.0, 0.0).unwrap(), 5.0);
        assert_eq!(ev("12 / 2 / 3", 0.0, 0.0).unwrap(), 2.0);
    }

    #[test]
    fn domain_errors_are_reported() {
        assert_eq!(ev("1/x", 0.0, 1.0), Err(EvalError::DivisionByZero));
        assert_eq!(ev("x^-1", 0.0, 1.0), Err(EvalError::DivisionByZero));
        assert!(matches!(
            ev("sqrt(x)", -1.0, 0.0),
            Err(EvalError::SqrtOfNegative(_))
        ));
        assert_eq!(ev("exp(x)", 1000.0, 0.0), Err(EvalError::NonFinite));
    }

    #[test]
    fn deep_expressions_use_heap_stack() {
        let mut s = String::from("x");
        for _ in 0..40 {
            s = format!("1 + ({s}) * 1");
        }
        let mut right = String::from("1");
        for _ in 0..40 {
            right = format!("(1 + {right})");
        }
        let e = parse(&format!("x + {right}")).unwrap();
        assert!(e.compile().depth > INLINE_STACK);
        assert_eq!(e.eval(0.5, 0.0).unwrap(), 41.5);
        assert_eq!(ev(&s, 2.0, 0.0).unwrap(), 42.0);
    }
}
