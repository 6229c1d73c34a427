//! Expression language for user-defined Lagrangians and constraints.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?          right associative
//! primary := number | q<i> | v<i> | param | func '(' expr ')' | '(' expr ')'
//! func    := sin | cos | tan | sqrt | exp | log
//! ```
//!
//! `-x^2` parses as `-(x^2)` and `2^3^2` as `2^(3^2)`. Numbers accept an
//! optional fraction and exponent (`1.5e-3`). Named parameters are replaced by
//! their values at parse time.
//!
//! Error positions are 1-based byte offsets; an error at end of input points
//! one past the last byte.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::error::{Error, Result};
use crate::scalar::{Real, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarKind {
    Q,
    V,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Sin,
    Cos,
    Tan,
    Sqrt,
    Exp,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expression {
    Const(f64),
    Var(VarKind, usize),
    Unary(UnaryOp, Box<Expression>),
    Binary(BinaryOp, Box<Expression>, Box<Expression>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at offset {position}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    /// 1-based byte offset.
    pub position: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected character `{0}`")]
    UnexpectedChar(char),
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("expected {expected}, found `{found}`")]
    Expected { expected: &'static str, found: String },
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("variable `{name}` out of range for dimension {n}")]
    IndexOutOfRange { name: String, n: usize },
    #[error("invalid number `{0}`")]
    InvalidNumber(String),
}

impl UnaryOp {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Self::Sin,
            "cos" => Self::Cos,
            "tan" => Self::Tan,
            "sqrt" => Self::Sqrt,
            "exp" => Self::Exp,
            "log" => Self::Log,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Self::Neg => "-",
            Self::Sin => "sin",
            Self::Cos => "cos",
            Self::Tan => "tan",
            Self::Sqrt => "sqrt",
            Self::Exp => "exp",
            Self::Log => "log",
        }
    }
}

impl BinaryOp {
    fn symbol(self) -> char {
        match self {
            Self::Add => '+',
            Self::Sub => '-',
            Self::Mul => '*',
            Self::Div => '/',
            Self::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

fn tokenize(text: &str) -> std::result::Result<Vec<(Token, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                tokens.push((Token::Op(c as char), start));
                i += 1;
            }
            b'(' => {
                tokens.push((Token::LParen, start));
                i += 1;
            }
            b')' => {
                tokens.push((Token::RParen, start));
                i += 1;
            }
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let lexeme = &text[start..i];
                let value = lexeme
                    .parse::<f64>()
                    .map_err(|_| ParseError { kind: ParseErrorKind::InvalidNumber(lexeme.to_string()), position: start + 1 })?;
                tokens.push((Token::Num(value), start));
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                tokens.push((Token::Ident(text[start..i].to_string()), start));
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(ParseError { kind: ParseErrorKind::UnexpectedChar(ch), position: start + 1 });
            }
        }
    }
    Ok(tokens)
}

struct Parser<'a> {
    tokens: Vec<(Token, usize)>,
    pos: usize,
    end: usize,
    n: usize,
    params: &'a BTreeMap<String, f64>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    /// 1-based offset of the current token, or one past the end.
    fn here(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end + 1, |(_, p)| p + 1)
    }

    fn error(&self, expected: &'static str) -> ParseError {
        let kind = match self.peek() {
            None => ParseErrorKind::UnexpectedEnd,
            Some(t) => ParseErrorKind::Expected { expected, found: describe(t) },
        };
        ParseError { kind, position: self.here() }
    }

    fn expr(&mut self) -> std::result::Result<Expression, ParseError> {
        let mut lhs = self.term()?;
        while let Some(Token::Op(c @ ('+' | '-'))) = self.peek() {
            let op = if *c == '+' { BinaryOp::Add } else { BinaryOp::Sub };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expression::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> std::result::Result<Expression, ParseError> {
        let mut lhs = self.unary()?;
        while let Some(Token::Op(c @ ('*' | '/'))) = self.peek() {
            let op = if *c == '*' { BinaryOp::Mul } else { BinaryOp::Div };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expression::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> std::result::Result<Expression, ParseError> {
        if let Some(Token::Op('-')) = self.peek() {
            self.pos += 1;
            let inner = self.unary()?;
            return Ok(Expression::Unary(UnaryOp::Neg, Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> std::result::Result<Expression, ParseError> {
        let base = self.primary()?;
        if let Some(Token::Op('^')) = self.peek() {
            self.pos += 1;
            let exponent = self.unary()?;
            return Ok(Expression::Binary(BinaryOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn expect_rparen(&mut self) -> std::result::Result<(), ParseError> {
        match self.peek() {
            Some(Token::RParen) => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.error("`)`")),
        }
    }

    fn primary(&mut self) -> std::result::Result<Expression, ParseError> {
        let position = self.here();
        match self.peek().cloned() {
            Some(Token::Num(x)) => {
                self.pos += 1;
                Ok(Expression::Const(x))
            }
            Some(Token::LParen) => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Some(Token::Ident(name)) => {
                self.pos += 1;
                if let Some(op) = UnaryOp::from_name(&name) {
                    if self.peek() != Some(&Token::LParen) {
                        return Err(self.error("`(` after function name"));
                    }
                    self.pos += 1;
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    return Ok(Expression::Unary(op, Box::new(arg)));
                }
                self.identifier(name, position)
            }
            _ => Err(self.error("an operand")),
        }
    }

    fn identifier(&self, name: String, position: usize) -> std::result::Result<Expression, ParseError> {
        let kind = match name.as_bytes().first() {
            Some(b'q') => Some(VarKind::Q),
            Some(b'v') => Some(VarKind::V),
            _ => None,
        };
        let digits = &name[1..];
        if let Some(kind) = kind.filter(|_| !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())) {
            let index = digits.parse::<usize>().unwrap_or(usize::MAX);
            if index >= self.n {
                return Err(ParseError { kind: ParseErrorKind::IndexOutOfRange { name, n: self.n }, position });
            }
            return Ok(Expression::Var(kind, index));
        }
        match self.params.get(&name) {
            Some(&value) => Ok(Expression::Const(value)),
            None => Err(ParseError { kind: ParseErrorKind::UnknownIdentifier(name), position }),
        }
    }
}

fn describe(t: &Token) -> String {
    match t {
        Token::Num(x) => x.to_string(),
        Token::Ident(s) => s.clone(),
        Token::Op(c) => c.to_string(),
        Token::LParen => "(".into(),
        Token::RParen => ")".into(),
    }
}

/// Parses `text` over `n` configuration variables without parameters.
pub fn parse(text: &str, n: usize) -> std::result::Result<Expression, ParseError> {
    parse_with_params(text, n, &BTreeMap::new())
}

pub fn parse_with_params(text: &str, n: usize, params: &BTreeMap<String, f64>) -> std::result::Result<Expression, ParseError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser { tokens, pos: 0, end: text.len(), n, params };
    let expr = parser.expr()?;
    if parser.pos < parser.tokens.len() {
        return Err(parser.error("operator or end of input"));
    }
    Ok(expr)
}

impl Expression {
    /// Value of the subtree if it references no variables.
    pub fn constant_value(&self) -> Option<f64> {
        match self {
            Self::Const(c) => Some(*c),
            Self::Var(..) => None,
            Self::Unary(op, a) => {
                let a = a.constant_value()?;
                Some(match op {
                    UnaryOp::Neg => -a,
                    UnaryOp::Sin => a.sin(),
                    UnaryOp::Cos => a.cos(),
                    UnaryOp::Tan => a.tan(),
                    UnaryOp::Sqrt => a.sqrt(),
                    UnaryOp::Exp => a.exp(),
                    UnaryOp::Log => a.ln(),
                })
            }
            Self::Binary(op, a, b) => {
                let (a, b) = (a.constant_value()?, b.constant_value()?);
                Some(match op {
                    BinaryOp::Add => a + b,
                    BinaryOp::Sub => a - b,
                    BinaryOp::Mul => a * b,
                    BinaryOp::Div => a / b,
                    BinaryOp::Pow => a.powf(b),
                })
            }
        }
    }

    /// Largest variable index referenced, if any.
    pub fn max_index(&self) -> Option<usize> {
        match self {
            Self::Const(_) => None,
            Self::Var(_, i) => Some(*i),
            Self::Unary(_, a) => a.max_index(),
            Self::Binary(_, a, b) => a.max_index().max(b.max_index()),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Self::Const(_) | Self::Var(..) => 1,
            Self::Unary(_, a) => 1 + a.depth(),
            Self::Binary(_, a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    /// Evaluates on any scalar type. Domain violations are reported with the
    /// offending node instead of producing NaN.
    pub fn eval<S: Scalar>(&self, q: &[S], v: &[S]) -> Result<S> {
        match self {
            Self::Const(c) => Ok(S::constant(*c)),
            Self::Var(VarKind::Q, i) => q.get(*i).copied().ok_or(Error::DimensionMismatch {
                what: "expression q argument",
                expected: i + 1,
                found: q.len(),
            }),
            Self::Var(VarKind::V, i) => v.get(*i).copied().ok_or(Error::DimensionMismatch {
                what: "expression v argument",
                expected: i + 1,
                found: v.len(),
            }),
            Self::Unary(op, a) => {
                let x = a.eval(q, v)?;
                let xb = x.base().to_f64_lossy();
                Ok(match op {
                    UnaryOp::Neg => -x,
                    UnaryOp::Sin => x.sin(),
                    UnaryOp::Cos => x.cos(),
                    UnaryOp::Tan => {
                        if xb.cos() == 0.0 {
                            return Err(self.domain("tangent pole"));
                        }
                        x.tan()
                    }
                    UnaryOp::Sqrt => {
                        if xb < 0.0 {
                            return Err(self.domain("square root of a negative number"));
                        }
                        x.sqrt()
                    }
                    UnaryOp::Exp => x.exp(),
                    UnaryOp::Log => {
                        if xb <= 0.0 {
                            return Err(self.domain("logarithm of a non-positive number"));
                        }
                        x.ln()
                    }
                })
            }
            Self::Binary(BinaryOp::Pow, a, b) => self.eval_pow(a, b, q, v),
            Self::Binary(op, a, b) => {
                let x = a.eval(q, v)?;
                let y = b.eval(q, v)?;
                Ok(match op {
                    BinaryOp::Add => x + y,
                    BinaryOp::Sub => x - y,
                    BinaryOp::Mul => x * y,
                    BinaryOp::Div => {
                        if y.base().to_f64_lossy() == 0.0 {
                            return Err(self.domain("division by zero"));
                        }
                        x / y
                    }
                    BinaryOp::Pow => unreachable!(),
                })
            }
        }
    }

    fn eval_pow<S: Scalar>(&self, a: &Expression, b: &Expression, q: &[S], v: &[S]) -> Result<S> {
        let x = a.eval(q, v)?;
        let xb = x.base().to_f64_lossy();
        match b.constant_value() {
            Some(e) if e.fract() == 0.0 && e.abs() < i32::MAX as f64 => {
                if xb == 0.0 && e < 0.0 {
                    return Err(self.domain("negative power of zero"));
                }
                Ok(x.powi(e as i32))
            }
            Some(e) => {
                if xb < 0.0 {
                    return Err(self.domain("non-integer power of a negative number"));
                }
                if xb == 0.0 && e < 0.0 {
                    return Err(self.domain("negative power of zero"));
                }
                Ok(x.powf_const(S::Base::lit(e)))
            }
            None => {
                if xb <= 0.0 {
                    return Err(self.domain("variable exponent needs a positive base"));
                }
                let y = b.eval(q, v)?;
                Ok((y * x.ln()).exp())
            }
        }
    }

    fn domain(&self, reason: &'static str) -> Error {
        Error::Domain { node: self.to_string(), reason }
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Const(c) if *c < 0.0 => write!(f, "({c})"),
            Self::Const(c) => write!(f, "{c}"),
            Self::Var(VarKind::Q, i) => write!(f, "q{i}"),
            Self::Var(VarKind::V, i) => write!(f, "v{i}"),
            Self::Unary(UnaryOp::Neg, a) => write!(f, "(-{a})"),
            Self::Unary(op, a) => write!(f, "{}({a})", op.name()),
            Self::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(text: &str, q: &[f64], v: &[f64]) -> f64 {
        parse(text, q.len()).unwrap().eval(q, v).unwrap()
    }

    #[test]
    fn kinetic_energy() {
        assert_eq!(eval("0.5*(v0^2+v1^2+v2^2)", &[0.0; 3], &[1.0, 2.0, 3.0]), 7.0);
    }

    #[test]
    fn particle_constraint_vanishes_on_admissible_point() {
        assert_eq!(eval("v2 - q1*v0", &[0.0, 1.0, 0.0], &[1.0, 0.0, 1.0]), 0.0);
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(eval("-2^2", &[0.0], &[0.0]), -4.0);
        assert_eq!(eval("2^3^2", &[0.0], &[0.0]), 512.0);
        assert_eq!(eval("2^-1", &[0.0], &[0.0]), 0.5);
        assert_eq!(eval("1 - 2 - 3", &[0.0], &[0.0]), -4.0);
        assert_eq!(eval("8 / 4 / 2", &[0.0], &[0.0]), 1.0);
        assert_eq!(eval("2 + 3 * 4", &[0.0], &[0.0]), 14.0);
        assert_eq!(eval("1.5e1 + .5", &[0.0], &[0.0]), 15.5);
    }

    #[test]
    fn unbalanced_parenthesis_reports_end_offset() {
        let err = parse("sin(q0", 1).unwrap_err();
        assert_eq!(err.position, 7);
        assert_eq!(err.kind, ParseErrorKind::UnexpectedEnd);
    }

    #[test]
    fn identifier_errors() {
        let err = parse("v0 + w1", 2).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnknownIdentifier("w1".into()));
        assert_eq!(err.position, 6);
        let err = parse("q3", 3).unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::IndexOutOfRange { n: 3, .. }));
        let err = parse("sin q0", 1).unwrap_err();
        assert_eq!(err.position, 5);
        assert!(parse("1 $ 2", 1).is_err());
        assert!(parse("(1 + 2))", 1).is_err());
    }

    #[test]
    fn parameters_are_substituted() {
        let params = BTreeMap::from([("R".to_string(), 2.0)]);
        let e = parse_with_params("R*v0", 1, &params).unwrap();
        assert_eq!(e.eval(&[0.0], &[3.0]).unwrap(), 6.0);
    }

    #[test]
    fn domain_errors_name_the_node() {
        let e = parse("log(q0)", 1).unwrap();
        match e.eval(&[-1.0], &[0.0]).unwrap_err() {
            Error::Domain { node, .. } => assert_eq!(node, "log(q0)"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse("sqrt(q0)", 1).unwrap().eval(&[-1.0], &[0.0]).is_err());
        assert!(parse("1/q0", 1).unwrap().eval(&[0.0], &[0.0]).is_err());
        assert!(parse("q0^0.5", 1).unwrap().eval(&[-4.0], &[0.0]).is_err());
        assert_eq!(parse("q0^3", 1).unwrap().eval(&[-2.0], &[0.0]).unwrap(), -8.0);
        assert!(parse("q0^v0", 1).unwrap().eval(&[-2.0], &[1.0]).is_err());
    }

    #[test]
    fn display_round_trips() {
        let e = parse("-q0^2 + sin(v1)/(3 - q1)", 2).unwrap();
        let again = parse(&e.to_string(), 2).unwrap();
        assert_eq!(e, again);
    }
}
