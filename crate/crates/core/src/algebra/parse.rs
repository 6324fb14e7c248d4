//! Expression parser shared by the one- and two-variable front ends.
//!
//! Grammar: sums and differences of products and quotients of powers, with
//! juxtaposition read as multiplication. Exponents are integers, optionally
//! negative, or a parenthesised fraction such as `t^(1/2)`.

use num_rational::Ratio;

use super::field::{Elem, Field};
use super::poly::Poly;
use super::ratfunc::RatFunc;
use super::AlgebraError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Int(i64),
    Var(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Ratio<i64>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Int(i64),
    Ident(String),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>, AlgebraError> {
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = src.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        match c {
            c if c.is_whitespace() => i += 1,
            '0'..='9' => {
                let mut v: i64 = 0;
                while i < chars.len() && chars[i].1.is_ascii_digit() {
                    v = v
                        .checked_mul(10)
                        .and_then(|v| v.checked_add(chars[i].1 as i64 - '0' as i64))
                        .ok_or_else(|| parse_err(pos, "integer literal too large"))?;
                    i += 1;
                }
                out.push((pos, Tok::Int(v)));
            }
            c if c.is_alphabetic() => {
                let mut s = String::new();
                while i < chars.len() && chars[i].1.is_alphanumeric() {
                    s.push(chars[i].1);
                    i += 1;
                }
                out.push((pos, Tok::Ident(s)));
            }
            '+' | '-' | '*' | '/' | '^' | '(' | ')' => {
                out.push((pos, Tok::Op(c)));
                i += 1;
            }
            '\u{2212}' => {
                out.push((pos, Tok::Op('-')));
                i += 1;
            }
            '\u{00b7}' => {
                out.push((pos, Tok::Op('*')));
                i += 1;
            }
            _ => return Err(parse_err(pos, &format!("unexpected character `{c}`"))),
        }
    }
    Ok(out)
}

fn parse_err(pos: usize, msg: &str) -> AlgebraError {
    AlgebraError::Parse { pos, msg: msg.to_string() }
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.1)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |t| t.0)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), AlgebraError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(parse_err(self.pos(), &format!("expected `{c}`")))
        }
    }

    fn expr(&mut self) -> Result<Expr, AlgebraError> {
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

    fn term(&mut self) -> Result<Expr, AlgebraError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else if matches!(self.peek(), Some(Tok::Int(_) | Tok::Ident(_) | Tok::Op('('))) {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.power()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, AlgebraError> {
        if self.eat('-') {
            Ok(Expr::Neg(Box::new(self.unary()?)))
        } else if self.eat('+') {
            self.unary()
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr, AlgebraError> {
        let base = self.atom()?;
        if self.eat('^') {
            let e = self.exponent()?;
            Ok(Expr::Pow(Box::new(base), e))
        } else {
            Ok(base)
        }
    }

    fn integer(&mut self) -> Result<i64, AlgebraError> {
        let neg = self.eat('-');
        match self.peek() {
            Some(Tok::Int(v)) => {
                let v = *v;
                self.at += 1;
                Ok(if neg { -v } else { v })
            }
            _ => Err(parse_err(self.pos(), "expected an integer exponent")),
        }
    }

    fn exponent(&mut self) -> Result<Ratio<i64>, AlgebraError> {
        if self.eat('(') {
            let n = self.integer()?;
            let d = if self.eat('/') { self.integer()? } else { 1 };
            self.expect(')')?;
            if d == 0 {
                return Err(parse_err(self.pos(), "zero denominator in exponent"));
            }
            Ok(Ratio::new(n, d))
        } else {
            Ok(Ratio::from_integer(self.integer()?))
        }
    }

    fn atom(&mut self) -> Result<Expr, AlgebraError> {
        let pos = self.pos();
        match self.peek().cloned() {
            Some(Tok::Int(v)) => {
                self.at += 1;
                Ok(Expr::Int(v))
            }
            Some(Tok::Ident(s)) => {
                self.at += 1;
                Ok(Expr::Var(s))
            }
            Some(Tok::Op('(')) => {
                self.at += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            _ => Err(parse_err(pos, "expected a number, a variable or `(`")),
        }
    }
}

/// Parse an expression into a syntax tree.
pub fn parse_expr(src: &str) -> Result<Expr, AlgebraError> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, at: 0, end: src.len() };
    if p.peek().is_none() {
        return Err(parse_err(0, "empty expression"));
    }
    let e = p.expr()?;
    if p.at != p.toks.len() {
        return Err(parse_err(p.pos(), "trailing input"));
    }
    Ok(e)
}

/// Element of F_q named by the generator `a` (only when m > 1).
pub(crate) fn generator_elem(field: Field, name: &str) -> Option<Elem> {
    (name == "a" && field.m() > 1).then(|| field.from_code(field.p()))
}

fn integer_exponent(e: Ratio<i64>) -> Result<i64, AlgebraError> {
    if e.is_integer() {
        Ok(e.to_integer())
    } else {
        Err(AlgebraError::FractionalExponent(e.to_string()))
    }
}

/// Evaluate an expression as a rational function in `var`.
pub fn eval_ratfunc(e: &Expr, field: Field, var: &str) -> Result<RatFunc, AlgebraError> {
    let rec = |e: &Expr| eval_ratfunc(e, field, var);
    Ok(match e {
        Expr::Int(v) => RatFunc::constant(field, field.int(*v)),
        Expr::Var(s) if s == var => RatFunc::x(field),
        Expr::Var(s) => match generator_elem(field, s) {
            Some(g) => RatFunc::constant(field, g),
            None => return Err(AlgebraError::UnknownVariable(s.clone())),
        },
        Expr::Neg(a) => -&rec(a)?,
        Expr::Add(a, b) => rec(a)? + rec(b)?,
        Expr::Sub(a, b) => rec(a)? - rec(b)?,
        Expr::Mul(a, b) => rec(a)? * rec(b)?,
        Expr::Div(a, b) => {
            let d = rec(b)?;
            if d.is_zero() {
                return Err(AlgebraError::DivisionByZero);
            }
            rec(a)? / d
        }
        Expr::Pow(a, k) => {
            let k = integer_exponent(*k)?;
            let base = rec(a)?;
            if base.is_zero() && k < 0 {
                return Err(AlgebraError::DivisionByZero);
            }
            base.pow(k)
        }
    })
}

/// Parse a rational function in x over `field`.
pub fn parse_ratfunc(src: &str, field: Field) -> Result<RatFunc, AlgebraError> {
    eval_ratfunc(&parse_expr(src)?, field, "x")
}

/// Parse a polynomial in x over `field`.
pub fn parse_poly(src: &str, field: Field) -> Result<Poly, AlgebraError> {
    let f = parse_ratfunc(src, field)?;
    if f.is_poly() {
        Ok(f.num().clone())
    } else {
        Err(AlgebraError::NotPolynomial(src.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_standard_forms() {
        let f = Field::prime(5).unwrap();
        let a = parse_ratfunc("1/(x^4*(x-1)^3)", f).unwrap();
        assert_eq!(a.to_string(), "1/(x^4*(x-1)^3)");
        let b = parse_ratfunc("x^-3 + 2x", f).unwrap();
        assert_eq!(b.to_string(), "(2*x^4+1)/x^3");
        assert!(parse_ratfunc("1/(x-x)", f).is_err());
        assert!(parse_ratfunc("1/(x", f).is_err());
        assert!(parse_ratfunc("y", f).is_err());
    }

    #[test]
    fn extension_generator() {
        let f = Field::new(2, 2).unwrap();
        let g = parse_ratfunc("a^2+a+1", f).unwrap();
        assert!(g.is_zero());
    }
}
