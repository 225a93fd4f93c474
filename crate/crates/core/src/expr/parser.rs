use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use thiserror::Error;

use super::ast::{Expression, Func, Var};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Empty,
    UnexpectedChar(char),
    UnexpectedToken(String),
    UnexpectedEnd,
    UnknownIdentifier(String),
    InvalidNumber,
    NonIntegerExponent,
}

/// Parse failure with the byte offset into the source where it was detected.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{} at byte {offset}", describe(.kind))]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub offset: usize,
}

fn describe(kind: &ParseErrorKind) -> String {
    match kind {
        ParseErrorKind::Empty => "empty expression".into(),
        ParseErrorKind::UnexpectedChar(c) => format!("unexpected character {c:?}"),
        ParseErrorKind::UnexpectedToken(t) => format!("unexpected {t}"),
        ParseErrorKind::UnexpectedEnd => "unexpected end of input".into(),
        ParseErrorKind::UnknownIdentifier(s) => format!("unknown identifier {s:?}"),
        ParseErrorKind::InvalidNumber => "malformed number".into(),
        ParseErrorKind::NonIntegerExponent => "exponent must be a constant integer".into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigRational),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl Tok {
    fn show(&self) -> String {
        match self {
            Tok::Num(n) => format!("number {n}"),
            Tok::Ident(s) => format!("identifier {s:?}"),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::Slash => "'/'".into(),
            Tok::Caret => "'^'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn err(kind: ParseErrorKind, offset: usize) -> ParseError {
    ParseError { kind, offset }
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' | b'.' => {
                let (value, len) =
                    lex_number(&src[i..]).ok_or(err(ParseErrorKind::InvalidNumber, i))?;
                i += len;
                out.push((Tok::Num(value), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(src[start..i].to_string()), start));
                continue;
            }
            _ => {
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(err(ParseErrorKind::UnexpectedChar(ch), i));
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

/// Lex `digits[.digits][e[+-]digits]` into an exact rational.
fn lex_number(s: &str) -> Option<(BigRational, usize)> {
    let b = s.as_bytes();
    let mut i = 0;
    let mut digits = String::new();
    let mut frac_len = 0usize;
    while i < b.len() && b[i].is_ascii_digit() {
        digits.push(b[i] as char);
        i += 1;
    }
    if i < b.len() && b[i] == b'.' {
        i += 1;
        while i < b.len() && b[i].is_ascii_digit() {
            digits.push(b[i] as char);
            frac_len += 1;
            i += 1;
        }
    }
    if digits.is_empty() {
        return None;
    }
    let mut exp: i64 = 0;
    if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
        let mut j = i + 1;
        let mut sign = 1;
        if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
            if b[j] == b'-' {
                sign = -1;
            }
            j += 1;
        }
        let exp_start = j;
        while j < b.len() && b[j].is_ascii_digit() {
            j += 1;
        }
        if j == exp_start {
            return None;
        }
        exp = sign * s[exp_start..j].parse::<i64>().ok()?;
        if exp.abs() > 4000 {
            return None;
        }
        i = j;
    }
    let mantissa: BigInt = digits.parse().ok()?;
    let scale = exp - frac_len as i64;
    let ten = BigInt::from(10);
    let p = num_traits::pow(ten, scale.unsigned_abs() as usize);
    let value = if scale >= 0 {
        BigRational::from_integer(mantissa * p)
    } else {
        BigRational::new(mantissa, p)
    };
    Some((value, i))
}

/// Parse an infix expression over `x` and `y`.
///
/// Precedence from tightest: `^` (right-associative, constant integer
/// exponent), unary `-`, `*` `/`, `+` `-`. Functions are applied by name with
/// parentheses; juxtaposition is not multiplication.
pub fn parse(src: &str) -> Result<Expression, ParseError> {
    let toks = tokenize(src)?;
    if toks.len() == 1 {
        return Err(err(ParseErrorKind::Empty, 0));
    }
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr()?;
    match p.peek() {
        Tok::End => Ok(e),
        other => Err(err(
            ParseErrorKind::UnexpectedToken(other.show()),
            p.offset(),
        )),
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            Tok::RParen => {
                self.bump();
                Ok(())
            }
            Tok::End => Err(err(ParseErrorKind::UnexpectedEnd, self.offset())),
            other => Err(err(
                ParseErrorKind::UnexpectedToken(other.show()),
                self.offset(),
            )),
        }
    }

    fn expr(&mut self) -> Result<Expression, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = Expression::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Expression::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expression, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = Expression::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Tok::Slash => {
                    self.bump();
                    lhs = Expression::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expression, ParseError> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                Ok(Expression::Neg(Box::new(self.unary()?)))
            }
            Tok::Plus => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expression, ParseError> {
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let at = self.offset();
        // The exponent binds like a unary operand, which makes `^`
        // right-associative and admits `x^-2`.
        let exponent = self.unary()?;
        let n = exponent
            .as_constant()
            .filter(|c| c.is_integer())
            .and_then(|c| c.to_integer().to_i32())
            .filter(|n| n.unsigned_abs() <= 1 << 16)
            .ok_or(err(ParseErrorKind::NonIntegerExponent, at))?;
        Ok(Expression::Pow(Box::new(base), n))
    }

    fn atom(&mut self) -> Result<Expression, ParseError> {
        let at = self.offset();
        match self.bump() {
            Tok::Num(n) => Ok(Expression::Const(n)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect_rparen()?;
                Ok(e)
            }
            Tok::Ident(name) => match name.as_str() {
                "x" => Ok(Expression::Var(Var::X)),
                "y" => Ok(Expression::Var(Var::Y)),
                _ => {
                    let f = Func::from_name(&name)
                        .ok_or(err(ParseErrorKind::UnknownIdentifier(name.clone()), at))?;
                    if *self.peek() != Tok::LParen {
                        return Err(err(
                            ParseErrorKind::UnexpectedToken(self.peek().show()),
                            self.offset(),
                        ));
                    }
                    self.bump();
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    Ok(Expression::Call(f, Box::new(arg)))
                }
            },
            Tok::End => Err(err(ParseErrorKind::UnexpectedEnd, at)),
            other => Err(err(ParseErrorKind::UnexpectedToken(other.show()), at)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pow(e: Expression, n: i32) -> Expression {
        Expression::Pow(Box::new(e), n)
    }

    #[test]
    fn variable() {
        assert_eq!(parse("x").unwrap(), Expression::x());
    }

    #[test]
    fn negated_gaussian_shape() {
        let e = parse("-exp(-x^2)").unwrap();
        let want = Expression::Neg(Box::new(Expression::Call(
            Func::Exp,
            Box::new(Expression::Neg(Box::new(pow(Expression::x(), 2)))),
        )));
        assert_eq!(e, want);
    }

    #[test]
    fn power_is_right_associative_and_binds_tighter_than_minus() {
        let e = parse("2^3^2").unwrap();
        assert_eq!(
            e.as_constant().unwrap(),
            BigRational::from_integer(512.into())
        );
        let e = parse("-2^2").unwrap();
        assert_eq!(
            e.as_constant().unwrap(),
            BigRational::from_integer((-4).into())
        );
        let e = parse("x^-2").unwrap();
        assert_eq!(e, pow(Expression::x(), -2));
    }

    #[test]
    fn decimal_literals_are_exact() {
        let e = parse("0.1").unwrap();
        assert_eq!(e, Expression::Const(BigRational::new(1.into(), 10.into())));
        let e = parse("2.5e-3").unwrap();
        assert_eq!(e, Expression::Const(BigRational::new(1.into(), 400.into())));
    }

    #[test]
    fn implicit_multiplication_rejected() {
        let e = parse("2x").unwrap_err();
        assert_eq!(e.offset, 1);
        assert!(matches!(e.kind, ParseErrorKind::UnexpectedToken(_)));
    }

    #[test]
    fn errors_carry_offsets() {
        let e = parse("x + foo(1)").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnknownIdentifier("foo".into()));
        assert_eq!(e.offset, 4);
        assert_eq!(parse("").unwrap_err().kind, ParseErrorKind::Empty);
        assert_eq!(parse("  ").unwrap_err().kind, ParseErrorKind::Empty);
        assert_eq!(
            parse("(x+1").unwrap_err().kind,
            ParseErrorKind::UnexpectedEnd
        );
        assert_eq!(
            parse("x^y").unwrap_err().kind,
            ParseErrorKind::NonIntegerExponent
        );
        assert_eq!(
            parse("x^0.5").unwrap_err().kind,
            ParseErrorKind::NonIntegerExponent
        );
        assert_eq!(parse("x $ 1").unwrap_err().offset, 2);
        assert!(matches!(
            parse("x )").unwrap_err().kind,
            ParseErrorKind::UnexpectedToken(_)
        ));
    }
}
