//! The small expression language shared by catalog fields: weights, bases,
//! denominators, right-hand sides and certificates.
//!
//! Implicit multiplication is allowed on input (`63k^2`, `2x(1-x)`); the
//! canonical printer always writes `*` and uses the fewest parentheses that
//! reparse to the same tree.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::exactnum::{QuadElem, Rational};

const FUNCTIONS: &[&str] = &["sqrt", "log", "L", "H", "binom", "atan"];
const IDENTS: &[&str] = &[
    "zeta3", "binom", "sqrt", "atan", "log", "pi", "L", "H", "G", "K", "k", "n", "x", "t",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Int(BigInt),
    Ident(String),
    Call(String, Vec<Expr>),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("column {column}: {message}")]
pub struct SyntaxError {
    /// 1-based character column.
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Int(BigInt),
    Ident(&'static str),
    Op(char),
    LParen,
    RParen,
    Comma,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, SyntaxError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            out.push((Tok::Int(s.parse().expect("digits")), col));
        } else if c.is_ascii_alphabetic() {
            let rest: String = chars[i..].iter().collect();
            let id = IDENTS
                .iter()
                .filter(|id| rest.starts_with(*id))
                .max_by_key(|id| id.len())
                .ok_or_else(|| SyntaxError {
                    column: col,
                    message: format!("unknown identifier starting at '{c}'"),
                })?;
            i += id.len();
            out.push((Tok::Ident(id), col));
        } else {
            let t = match c {
                '+' | '-' | '*' | '/' | '^' => Tok::Op(c),
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                ',' => Tok::Comma,
                _ => {
                    return Err(SyntaxError {
                        column: col,
                        message: format!("unexpected character '{c}'"),
                    })
                }
            };
            out.push((t, col));
            i += 1;
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end_col: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |t| t.1)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, SyntaxError> {
        Err(SyntaxError {
            column: self.col(),
            message: message.into(),
        })
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), SyntaxError> {
        if self.peek() == Some(&t) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn sum(&mut self) -> Result<Expr, SyntaxError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Op('+')) => BinOp::Add,
                Some(Tok::Op('-')) => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, SyntaxError> {
        let mut lhs = self.unary()?;
        loop {
            let (op, rhs) = match self.peek() {
                Some(Tok::Op('*')) => {
                    self.pos += 1;
                    (BinOp::Mul, self.unary()?)
                }
                Some(Tok::Op('/')) => {
                    self.pos += 1;
                    (BinOp::Div, self.unary()?)
                }
                Some(Tok::Int(_) | Tok::Ident(_) | Tok::LParen) => (BinOp::Mul, self.power()?),
                _ => return Ok(lhs),
            };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, SyntaxError> {
        if self.peek() == Some(&Tok::Op('-')) {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, SyntaxError> {
        let base = self.primary()?;
        if self.peek() == Some(&Tok::Op('^')) {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, SyntaxError> {
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.pos += 1;
                Ok(Expr::Int(n))
            }
            Some(Tok::Ident(id)) => {
                self.pos += 1;
                if !FUNCTIONS.contains(&id) {
                    return Ok(Expr::Ident(id.to_string()));
                }
                self.expect(Tok::LParen, &format!("'(' after {id}"))?;
                let mut args = vec![self.sum()?];
                while self.peek() == Some(&Tok::Comma) {
                    self.pos += 1;
                    args.push(self.sum()?);
                }
                self.expect(Tok::RParen, "')'")?;
                Ok(Expr::Call(id.to_string(), args))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.sum()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Some(_) => self.err("expected a number, name or '('"),
            None => self.err("unexpected end of expression"),
        }
    }
}

pub fn parse_expr(src: &str) -> Result<Expr, SyntaxError> {
    let toks = lex(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end_col: src.chars().count() + 1,
    };
    let e = p.sum()?;
    if p.pos != p.toks.len() {
        return p.err("unexpected trailing input");
    }
    Ok(e)
}

/// Parses and reprints in canonical form.
pub fn canonical(src: &str) -> Result<String, SyntaxError> {
    parse_expr(src).map(|e| e.to_string())
}

impl Expr {
    pub fn int(n: i64) -> Expr {
        Expr::Int(BigInt::from(n))
    }

    pub fn ident(s: &str) -> Expr {
        Expr::Ident(s.to_string())
    }

    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Bin(op, Box::new(a), Box::new(b))
    }

    fn prec(&self) -> u8 {
        match self {
            Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Neg(_) => 3,
            Expr::Bin(BinOp::Pow, ..) => 4,
            _ => 5,
        }
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.prec() < min {
            f.write_str("(")?;
            self.write(f, 0)?;
            return f.write_str(")");
        }
        match self {
            Expr::Int(n) => write!(f, "{n}"),
            Expr::Ident(s) => f.write_str(s),
            Expr::Call(name, args) => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    a.write(f, 0)?;
                }
                f.write_str(")")
            }
            Expr::Neg(e) => {
                f.write_str("-")?;
                e.write(f, 3)
            }
            Expr::Bin(op, a, b) => {
                let (sym, lmin, rmin) = match op {
                    BinOp::Add => (" + ", 1, 2),
                    BinOp::Sub => (" - ", 1, 2),
                    BinOp::Mul => ("*", 2, 3),
                    BinOp::Div => ("/", 2, 3),
                    BinOp::Pow => ("^", 5, 3),
                };
                a.write(f, lmin)?;
                f.write_str(sym)?;
                b.write(f, rmin)
            }
        }
    }

    /// Integer value of a constant integer expression (`3`, `-2`, `(4)`).
    pub fn as_int(&self) -> Option<i64> {
        match self {
            Expr::Int(n) => n.to_i64(),
            Expr::Neg(e) => e.as_int().map(|v| -v),
            _ => None,
        }
    }

    /// Replaces every occurrence of the identifier `name` by `with`.
    pub fn substitute(&self, name: &str, with: &Expr) -> Expr {
        match self {
            Expr::Ident(s) if s == name => with.clone(),
            Expr::Int(_) | Expr::Ident(_) => self.clone(),
            Expr::Call(c, args) => Expr::Call(c.clone(), args.iter().map(|a| a.substitute(name, with)).collect()),
            Expr::Neg(e) => Expr::Neg(Box::new(e.substitute(name, with))),
            Expr::Bin(op, a, b) => Expr::bin(*op, a.substitute(name, with), b.substitute(name, with)),
        }
    }

    /// True if the identifier `name` occurs anywhere in the tree.
    pub fn mentions(&self, name: &str) -> bool {
        match self {
            Expr::Int(_) => false,
            Expr::Ident(s) => s == name,
            Expr::Call(c, args) => c == name || args.iter().any(|a| a.mentions(name)),
            Expr::Neg(e) => e.mentions(name),
            Expr::Bin(_, a, b) => a.mentions(name) || b.mentions(name),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, 0)
    }
}

/// Evaluates a variable-free expression to an exact element of one quadratic
/// field. Only `sqrt` of rationals and integer powers are allowed.
pub fn eval_quad(e: &Expr) -> Result<QuadElem, String> {
    match e {
        Expr::Int(n) => Ok(QuadElem::from(n.clone())),
        Expr::Neg(x) => Ok(-eval_quad(x)?),
        Expr::Ident(s) => Err(format!("'{s}' is not a constant")),
        Expr::Call(name, args) if name == "sqrt" && args.len() == 1 => {
            let r = eval_quad(&args[0])?;
            let r = r.as_rational().ok_or("sqrt of an irrational radicand")?;
            QuadElem::sqrt_rational(r).map_err(|e| e.to_string())
        }
        Expr::Call(name, _) => Err(format!("'{name}' is not allowed in a constant")),
        Expr::Bin(op, a, b) => {
            if *op == BinOp::Pow {
                let n = b.as_int().ok_or("exponent must be an integer")?;
                return eval_quad(a)?.pow(n).map_err(|e| e.to_string());
            }
            let (x, y) = (eval_quad(a)?, eval_quad(b)?);
            let r = match op {
                BinOp::Add => x.checked_add(&y),
                BinOp::Sub => x.checked_sub(&y),
                BinOp::Mul => x.checked_mul(&y),
                BinOp::Div => x.checked_div(&y),
                BinOp::Pow => unreachable!(),
            };
            r.map_err(|e| e.to_string())
        }
    }
}

/// Renders a rational as an expression tree (`-3/4` becomes `Neg(3/4)`).
pub fn rational_expr(r: &Rational) -> Expr {
    let num = Expr::Int(r.numer().abs());
    let body = if r.denom() == &BigInt::from(1) {
        num
    } else {
        Expr::bin(BinOp::Div, num, Expr::Int(r.denom().clone()))
    };
    if r.numer().is_negative() {
        Expr::Neg(Box::new(body))
    } else {
        body
    }
}

/// Renders a quadratic element as an expression tree, `a + b*sqrt(d)`.
pub fn quad_expr(q: &QuadElem) -> Expr {
    let a = q.a();
    let b = q.b();
    if b.is_zero() {
        return rational_expr(a);
    }
    let root = Expr::Call("sqrt".into(), vec![Expr::Int(BigInt::from(q.d()))]);
    let babs = b.abs();
    let surd = if babs == Rational::from_integer(1.into()) {
        root
    } else if babs.denom() == &BigInt::from(1) {
        Expr::bin(BinOp::Mul, Expr::Int(babs.numer().clone()), root)
    } else {
        Expr::bin(
            BinOp::Div,
            Expr::bin(BinOp::Mul, Expr::Int(babs.numer().clone()), root),
            Expr::Int(babs.denom().clone()),
        )
    };
    if a.is_zero() {
        return if b.is_negative() { Expr::Neg(Box::new(surd)) } else { surd };
    }
    let op = if b.is_negative() { BinOp::Sub } else { BinOp::Add };
    Expr::bin(op, rational_expr(a), surd)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn implicit_multiplication_and_precedence() {
        assert_eq!(canonical("63k^2+78k+22").unwrap(), "63*k^2 + 78*k + 22");
        assert_eq!(canonical("2x(1-x)").unwrap(), "2*x*(1 - x)");
        assert_eq!(canonical("(12+4sqrt(5))^(-4)").unwrap(), "(12 + 4*sqrt(5))^-4");
        assert_eq!(canonical("-x^2").unwrap(), "-x^2");
        assert_eq!(canonical("(-x)^2").unwrap(), "(-x)^2");
        assert!(canonical("a").is_err());
        assert_eq!(canonical("k(3k-1)(3k-2)").unwrap(), "k*(3*k - 1)*(3*k - 2)");
        assert_eq!(canonical("x - (k - n)").unwrap(), "x - (k - n)");
        assert_eq!(canonical("(x - k) - n").unwrap(), "x - k - n");
        assert_eq!(canonical("H(3k,1)*(21k^2+27k+8)").unwrap(), "H(3*k,1)*(21*k^2 + 27*k + 8)");
        assert_eq!(canonical("zeta3/pi").unwrap(), "zeta3/pi");
        assert_eq!(canonical("x/(k*n)").unwrap(), "x/(k*n)");
    }

    #[test]
    fn errors_carry_columns() {
        let e = parse_expr("3k + * 2").unwrap_err();
        assert_eq!(e.column, 6);
        assert!(parse_expr("sqrt 5").is_err());
        assert!(parse_expr("(1+k").is_err());
        assert!(parse_expr("1 ? 2").is_err());
    }

    #[test]
    fn quadratic_constants() {
        let e = parse_expr("((1-sqrt(5))/2)^8").unwrap();
        let v = eval_quad(&e).unwrap();
        assert_eq!(v.to_string(), "47/2-21/2*sqrt(5)");
        let e = parse_expr("sqrt(20)").unwrap();
        assert_eq!(eval_quad(&e).unwrap().to_string(), "2*sqrt(5)");
        assert!(eval_quad(&parse_expr("sqrt(2)*sqrt(3)").unwrap()).is_err());
        assert!(eval_quad(&parse_expr("1/(2-2)").unwrap()).is_err());
    }

    #[test]
    fn quad_expr_reparses() {
        for s in ["3/16+1/16*sqrt(5)", "-7", "-5/2*sqrt(6)", "1-1*sqrt(2)", "2/3"] {
            let q: QuadElem = s.parse().unwrap();
            let e = quad_expr(&q);
            let back = eval_quad(&parse_expr(&e.to_string()).unwrap()).unwrap();
            assert_eq!(back, q, "{s} -> {e}");
        }
    }
}
