//! A small arithmetic expression language shared by the canonical
//! rational-function form, scenario files and ring-class literals.
//!
//! Grammar: `+ - * / ^`, parentheses, integer literals, identifiers and
//! function calls `name(args)`. Exponents are integer expressions over the
//! integer bindings in scope, so `(-1)^P2` and `s^(4 - 3*P2)` are fine.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::scalar::{quantum_integer, Param, ParamPoly, RatFunc, ScalarError, Q};

/// Integer values bound by name (`P2`, `p_g`, `chi`, ...).
pub type Bindings = BTreeMap<String, i64>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExprError {
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("function `{name}` expects {expected} argument(s)")]
    Arity { name: String, expected: usize },
    #[error("exponent `{0}` is not an integer")]
    NonIntegerExponent(String),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error("{0}")]
    Eval(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Num(BigInt),
    Var(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(String, Vec<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Sym(char),
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>, ExprError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let n: BigInt = src[start..i].parse().expect("digits");
            out.push((start, Tok::Num(n)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(src[start..i].to_string())));
        } else if "+-*/^(),".contains(c) {
            out.push((i, Tok::Sym(c)));
            i += 1;
        } else {
            return Err(ExprError::Parse { pos: i, msg: format!("unexpected character `{c}`") });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError::Parse { pos: self.here(), msg: msg.into() })
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if self.eat('^') {
            let exp = self.exponent()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<Expr, ExprError> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.exponent()?)));
        }
        self.power()
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(Expr::Num(n))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if self.eat('(') {
                    let mut args = Vec::new();
                    if !self.eat(')') {
                        loop {
                            args.push(self.expr()?);
                            if self.eat(')') {
                                break;
                            }
                            if !self.eat(',') {
                                return self.err("expected `,` or `)`");
                            }
                        }
                    }
                    Ok(Expr::Call(name, args))
                } else {
                    Ok(Expr::Var(name))
                }
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return self.err("expected `)`");
                }
                Ok(e)
            }
            Some(t) => self.err(format!("unexpected token {t:?}")),
            None => self.err("unexpected end of input"),
        }
    }
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr, ExprError> {
        let toks = tokenize(src)?;
        let mut p = Parser { toks, pos: 0, end: src.len() };
        let e = p.expr()?;
        if p.pos != p.toks.len() {
            return p.err("trailing input");
        }
        Ok(e)
    }
}

/// An evaluation target for [`Expr`].
pub trait Env {
    type V: Clone;

    fn bindings(&self) -> &Bindings;
    fn constant(&self, q: Q) -> Result<Self::V, ExprError>;
    fn var(&self, name: &str) -> Result<Self::V, ExprError>;
    fn add(&self, a: Self::V, b: Self::V) -> Result<Self::V, ExprError>;
    fn sub(&self, a: Self::V, b: Self::V) -> Result<Self::V, ExprError>;
    fn mul(&self, a: Self::V, b: Self::V) -> Result<Self::V, ExprError>;
    fn div(&self, a: Self::V, b: Self::V) -> Result<Self::V, ExprError>;
    fn neg(&self, a: Self::V) -> Result<Self::V, ExprError>;
    fn powi(&self, a: Self::V, n: i64) -> Result<Self::V, ExprError>;

    fn call(&self, name: &str, _args: &[Expr]) -> Result<Self::V, ExprError> {
        Err(ExprError::UnknownFunction(name.to_string()))
    }

    fn eval(&self, e: &Expr) -> Result<Self::V, ExprError> {
        match e {
            Expr::Num(n) => self.constant(Q::from_integer(n.clone())),
            Expr::Var(v) => self.var(v),
            Expr::Neg(a) => {
                let a = self.eval(a)?;
                self.neg(a)
            }
            Expr::Add(a, b) => {
                let (a, b) = (self.eval(a)?, self.eval(b)?);
                self.add(a, b)
            }
            Expr::Sub(a, b) => {
                let (a, b) = (self.eval(a)?, self.eval(b)?);
                self.sub(a, b)
            }
            Expr::Mul(a, b) => {
                let (a, b) = (self.eval(a)?, self.eval(b)?);
                self.mul(a, b)
            }
            Expr::Div(a, b) => {
                let (a, b) = (self.eval(a)?, self.eval(b)?);
                self.div(a, b)
            }
            Expr::Pow(a, b) => {
                let n = eval_int(b, self.bindings())?;
                let a = self.eval(a)?;
                self.powi(a, n)
            }
            Expr::Call(name, args) => self.call(name, args),
        }
    }
}

/// Rational evaluation over integer bindings.
pub struct RationalEnv<'a>(pub &'a Bindings);

impl Env for RationalEnv<'_> {
    type V = Q;

    fn bindings(&self) -> &Bindings {
        self.0
    }
    fn constant(&self, q: Q) -> Result<Q, ExprError> {
        Ok(q)
    }
    fn var(&self, name: &str) -> Result<Q, ExprError> {
        self.0
            .get(name)
            .map(|v| Q::from_integer((*v).into()))
            .ok_or_else(|| ExprError::UnknownSymbol(name.to_string()))
    }
    fn add(&self, a: Q, b: Q) -> Result<Q, ExprError> {
        Ok(a + b)
    }
    fn sub(&self, a: Q, b: Q) -> Result<Q, ExprError> {
        Ok(a - b)
    }
    fn mul(&self, a: Q, b: Q) -> Result<Q, ExprError> {
        Ok(a * b)
    }
    fn div(&self, a: Q, b: Q) -> Result<Q, ExprError> {
        if b.is_zero() {
            return Err(ScalarError::DivisionByZero.into());
        }
        Ok(a / b)
    }
    fn neg(&self, a: Q) -> Result<Q, ExprError> {
        Ok(-a)
    }
    fn powi(&self, a: Q, n: i64) -> Result<Q, ExprError> {
        if n < 0 && a.is_zero() {
            return Err(ScalarError::DivisionByZero.into());
        }
        let b = if n < 0 { a.recip() } else { a };
        let mut out = Q::one();
        for _ in 0..n.unsigned_abs() {
            out *= &b;
        }
        Ok(out)
    }
}

/// Evaluates an expression that must come out as an integer.
pub fn eval_int(e: &Expr, bindings: &Bindings) -> Result<i64, ExprError> {
    let v = RationalEnv(bindings).eval(e)?;
    if !v.is_integer() {
        return Err(ExprError::NonIntegerExponent(format!("{e:?}")));
    }
    v.to_integer()
        .to_i64()
        .ok_or_else(|| ExprError::Eval(format!("integer overflow in {e:?}")))
}

/// Rational function evaluation: `s`, `t = s^2`, the declared parameters,
/// integer bindings and `qint(n)` for quantum integers.
pub struct RatFuncEnv<'a>(pub &'a Bindings);

impl Env for RatFuncEnv<'_> {
    type V = RatFunc;

    fn bindings(&self) -> &Bindings {
        self.0
    }
    fn constant(&self, q: Q) -> Result<RatFunc, ExprError> {
        Ok(RatFunc::from_q(q))
    }
    fn var(&self, name: &str) -> Result<RatFunc, ExprError> {
        match name {
            "s" => Ok(RatFunc::s_pow(1)),
            "t" => Ok(RatFunc::s_pow(2)),
            _ => {
                if let Some(p) = Param::lookup(name) {
                    Ok(RatFunc::from_param(ParamPoly::var(p)))
                } else if let Some(v) = self.0.get(name) {
                    Ok(RatFunc::from_int(*v))
                } else {
                    Err(ExprError::UnknownSymbol(name.to_string()))
                }
            }
        }
    }
    fn add(&self, a: RatFunc, b: RatFunc) -> Result<RatFunc, ExprError> {
        Ok(&a + &b)
    }
    fn sub(&self, a: RatFunc, b: RatFunc) -> Result<RatFunc, ExprError> {
        Ok(&a - &b)
    }
    fn mul(&self, a: RatFunc, b: RatFunc) -> Result<RatFunc, ExprError> {
        Ok(&a * &b)
    }
    fn div(&self, a: RatFunc, b: RatFunc) -> Result<RatFunc, ExprError> {
        Ok(a.checked_div(&b)?)
    }
    fn neg(&self, a: RatFunc) -> Result<RatFunc, ExprError> {
        Ok(-a)
    }
    fn powi(&self, a: RatFunc, n: i64) -> Result<RatFunc, ExprError> {
        Ok(a.pow(n)?)
    }
    fn call(&self, name: &str, args: &[Expr]) -> Result<RatFunc, ExprError> {
        match name {
            "qint" => {
                let [arg] = args else {
                    return Err(ExprError::Arity { name: name.into(), expected: 1 });
                };
                Ok(quantum_integer(eval_int(arg, self.0)?))
            }
            _ => Err(ExprError::UnknownFunction(name.to_string())),
        }
    }
}

pub fn parse_ratfunc(src: &str, bindings: &Bindings) -> Result<RatFunc, ExprError> {
    RatFuncEnv(bindings).eval(&Expr::parse(src)?)
}

pub fn parse_rational(src: &str, bindings: &Bindings) -> Result<Q, ExprError> {
    RationalEnv(bindings).eval(&Expr::parse(src)?)
}

pub fn parse_int(src: &str, bindings: &Bindings) -> Result<i64, ExprError> {
    eval_int(&Expr::parse(src)?, bindings)
}

/// Parses a parameter polynomial such as `2 - 2*g`.
pub fn parse_param(src: &str, bindings: &Bindings) -> Result<ParamPoly, ExprError> {
    let f = parse_ratfunc(src, bindings)?;
    f.as_param()
        .ok_or_else(|| ExprError::Eval(format!("`{src}` is not a parameter polynomial")))
}

/// Renders a rational with a sign, used for weights in messages.
pub fn fmt_q(q: &Q) -> String {
    if q.is_integer() {
        q.to_integer().to_string()
    } else if q.is_negative() {
        format!("-{}", -q)
    } else {
        q.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        let b = Bindings::new();
        assert_eq!(parse_rational("1 + 2*3^2", &b).unwrap(), Q::from_integer(19.into()));
        assert_eq!(parse_rational("-2^2", &b).unwrap(), Q::from_integer((-4).into()));
        assert_eq!(parse_rational("2^-1", &b).unwrap(), crate::scalar::q(1, 2));
        assert_eq!(parse_rational("2^3^2", &b).unwrap(), Q::from_integer(512.into()));
        assert_eq!(parse_rational("1/2/2", &b).unwrap(), crate::scalar::q(1, 4));
    }

    #[test]
    fn bindings_in_exponents() {
        let mut b = Bindings::new();
        b.insert("P2".into(), 3);
        assert_eq!(parse_int("(-1)^P2", &b).unwrap(), -1);
        let f = parse_ratfunc("s^(4 - 3*P2)", &b).unwrap();
        assert_eq!(f, RatFunc::s_pow(-5));
        assert!(matches!(parse_int("P3", &b), Err(ExprError::UnknownSymbol(_))));
    }

    #[test]
    fn undeclared_parameter_rejected() {
        let b = Bindings::new();
        assert_eq!(parse_ratfunc("h + 1", &b), Err(ExprError::UnknownSymbol("h".into())));
    }

    #[test]
    fn non_integer_exponent_rejected() {
        let b = Bindings::new();
        assert!(matches!(parse_ratfunc("s^(1/2)", &b), Err(ExprError::NonIntegerExponent(_))));
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = Expr::parse("1 + (2").unwrap_err();
        assert_eq!(err, ExprError::Parse { pos: 6, msg: "expected `)`".into() });
        assert!(Expr::parse("1 2").is_err());
    }
}
