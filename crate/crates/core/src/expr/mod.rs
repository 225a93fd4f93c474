//! Scalar expressions in `x` and `y`: parsing, printing, exact symbolic
//! differentiation and fast compiled evaluation.

mod ast;
mod diff;
mod eval;
mod parser;
mod print;

pub use ast::{rational_pow, rational_to_f64, Expression, Func, Var};
pub use eval::{Compiled, EvalError};
pub use parser::{parse, ParseError, ParseErrorKind};

impl std::str::FromStr for Expression {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}
