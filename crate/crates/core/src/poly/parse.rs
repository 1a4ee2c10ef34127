//! Recursive-descent parser for polynomial literals.
//!
//! Grammar: sums and differences of products; `^` takes a nonnegative integer
//! exponent; `/` is allowed only by a nonzero constant; juxtaposition is not
//! multiplication.

use num_bigint::BigInt;
use num_traits::Zero;

use super::{Poly, PolyError, Rational, Vars};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Op(char),
}

fn lex(text: &str) -> Result<Vec<Tok>, PolyError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            out.push(Tok::Num(s.parse().expect("digits")));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^()".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(PolyError::Parse(format!("unexpected character {c:?}")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Tok>,
    pos: usize,
    vars: &'a Vars,
}

impl Parser<'_> {
    fn peek_op(&self) -> Option<char> {
        match self.toks.get(self.pos) {
            Some(Tok::Op(c)) => Some(*c),
            _ => None,
        }
    }

    fn expr(&mut self) -> Result<Poly, PolyError> {
        let mut acc = self.term()?;
        while let Some(op @ ('+' | '-')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = if op == '+' { &acc + &rhs } else { &acc - &rhs };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Poly, PolyError> {
        let mut acc = self.unary()?;
        while let Some(op @ ('*' | '/')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.unary()?;
            if op == '*' {
                acc = &acc * &rhs;
            } else {
                let c = rhs.constant_value().ok_or_else(|| PolyError::Parse("division by a nonconstant".into()))?;
                if c.is_zero() {
                    return Err(PolyError::Parse("division by zero".into()));
                }
                acc = acc.scale(&(Rational::from_integer(1.into()) / c));
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Poly, PolyError> {
        match self.peek_op() {
            Some('-') => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Poly, PolyError> {
        let base = self.atom()?;
        if self.peek_op() == Some('^') {
            self.pos += 1;
            match self.toks.get(self.pos) {
                Some(Tok::Num(n)) => {
                    let e: u32 = n.try_into().map_err(|_| PolyError::Parse(format!("exponent {n} too large")))?;
                    self.pos += 1;
                    Ok(base.pow(e))
                }
                _ => Err(PolyError::Parse("expected an integer exponent after `^`".into())),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Poly, PolyError> {
        let tok = self.toks.get(self.pos).cloned();
        self.pos += 1;
        match tok {
            Some(Tok::Num(n)) => Ok(Poly::constant(self.vars, Rational::from_integer(n))),
            Some(Tok::Ident(name)) => match self.vars.iter().position(|v| *v == name) {
                Some(i) => Ok(Poly::var(self.vars, i)),
                None => Err(PolyError::UnknownVariable(name)),
            },
            Some(Tok::Op('(')) => {
                let inner = self.expr()?;
                if self.peek_op() != Some(')') {
                    return Err(PolyError::Parse("missing `)`".into()));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(t) => Err(PolyError::Parse(format!("unexpected token {t:?}"))),
            None => Err(PolyError::Parse("unexpected end of input".into())),
        }
    }
}

pub(super) fn parse(vars: &Vars, text: &str) -> Result<Poly, PolyError> {
    let toks = lex(text)?;
    if toks.is_empty() {
        return Err(PolyError::Parse("empty input".into()));
    }
    let mut p = Parser { toks, pos: 0, vars };
    let out = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(PolyError::Parse(format!("trailing input at token {}", p.pos)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::{int, vars};
    use super::*;

    #[test]
    fn parses_nested_expressions() {
        let v = vars(&["x", "y"]);
        let f = parse(&v, "-(x - 1)^2*(y + 2)/4").unwrap();
        assert_eq!(f.eval(&[int(3), int(2)]), int(-4));
    }

    #[test]
    fn rejects_bad_input() {
        let v = vars(&["x", "y"]);
        assert!(parse(&v, "x*z").is_err());
        assert!(parse(&v, "x/y").is_err());
        assert!(parse(&v, "x/0").is_err());
        assert!(parse(&v, "(x + 1").is_err());
        assert!(parse(&v, "x y").is_err());
        assert!(parse(&v, "").is_err());
    }
}
