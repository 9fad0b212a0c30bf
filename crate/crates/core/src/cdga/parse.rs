//! Infix expression grammar for forms.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/' | 'wedge' | '∧') unary)*
//! unary  := ('-' | '+') unary | power
//! power  := atom ('^' '-'? integer)?
//! atom   := number | identifier | 'i' | '(' expr ')' | 'd' '(' expr ')'
//!         | 'wedge' '(' expr (',' expr)* ')'
//! ```
//!
//! `*` between forms is the wedge product. Decimal literals are exact rationals.
//! Division and negative powers are only allowed for degree-0 operands.

use num_bigint::BigInt;
use num_rational::BigRational;

use super::form::{add_into, exterior_d_terms, wedge_terms, Terms};
use super::{AlgebraError, SymbolRef, Universe};
use crate::scalar::{GaussRational, Scalar};

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigRational),
    Ident(String),
    Sym(char),
    End,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, AlgebraError> {
    let mut out = Vec::new();
    let bytes: Vec<(usize, char)> = text.char_indices().collect();
    let mut k = 0;
    while k < bytes.len() {
        let (pos, c) = bytes[k];
        if c.is_whitespace() {
            k += 1;
        } else if c.is_ascii_digit() || (c == '.' && bytes.get(k + 1).is_some_and(|(_, n)| n.is_ascii_digit())) {
            let mut int = String::new();
            let mut frac = String::new();
            let mut seen_dot = false;
            while let Some(&(_, ch)) = bytes.get(k) {
                if ch.is_ascii_digit() {
                    if seen_dot {
                        frac.push(ch)
                    } else {
                        int.push(ch)
                    }
                } else if ch == '.' && !seen_dot {
                    seen_dot = true;
                } else {
                    break;
                }
                k += 1;
            }
            let digits = format!("{int}{frac}");
            let num: BigInt = digits.parse().map_err(|_| AlgebraError::Parse { pos, msg: "bad number".into() })?;
            let den = num_traits::pow(BigInt::from(10), frac.len());
            out.push((pos, Tok::Num(BigRational::new(num, den))));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = k;
            while bytes.get(k).is_some_and(|(_, ch)| ch.is_ascii_alphanumeric() || *ch == '_') {
                k += 1;
            }
            let word: String = bytes[start..k].iter().map(|(_, ch)| ch).collect();
            out.push((pos, Tok::Ident(word)));
        } else if "+-*/^(),".contains(c) {
            out.push((pos, Tok::Sym(c)));
            k += 1;
        } else if c == '∧' {
            out.push((pos, Tok::Ident("wedge".into())));
            k += 1;
        } else {
            return Err(AlgebraError::Parse { pos, msg: format!("unexpected character `{c}`") });
        }
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

struct Parser<'a> {
    universe: &'a Universe,
    toks: Vec<(usize, Tok)>,
    at: usize,
    allow_d: bool,
}

fn constant(c: GaussRational) -> Terms {
    let mut t = Terms::new();
    add_into(&mut t, 0, Scalar::constant(c));
    t
}

fn scale(t: &Terms, k: &Scalar) -> Terms {
    let mut out = Terms::new();
    for (&m, c) in t {
        add_into(&mut out, m, c.mul(k));
    }
    out
}

fn as_scalar(t: &Terms) -> Option<Scalar> {
    match t.len() {
        0 => Some(Scalar::zero()),
        1 => t.get(&0).cloned(),
        _ => None,
    }
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at].0
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, AlgebraError> {
        Err(AlgebraError::Parse { pos: self.pos(), msg: msg.into() })
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].1.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, c: char) -> Result<(), AlgebraError> {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected `{c}`"))
        }
    }

    fn expr(&mut self) -> Result<Terms, AlgebraError> {
        let mut acc = self.term()?;
        loop {
            let sign = match self.peek() {
                Tok::Sym('+') => false,
                Tok::Sym('-') => true,
                _ => return Ok(acc),
            };
            self.bump();
            let rhs = self.term()?;
            for (m, c) in rhs {
                add_into(&mut acc, m, if sign { c.neg() } else { c });
            }
        }
    }

    fn term(&mut self) -> Result<Terms, AlgebraError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek().clone() {
                Tok::Sym('*') => {
                    self.bump();
                    acc = wedge_terms(&acc, &self.unary()?);
                }
                Tok::Ident(w) if w == "wedge" => {
                    self.bump();
                    acc = wedge_terms(&acc, &self.unary()?);
                }
                Tok::Sym('/') => {
                    self.bump();
                    let rhs = self.unary()?;
                    let s = as_scalar(&rhs).ok_or_else(|| {
                        AlgebraError::NonScalarDivisor(super::form::render_terms(self.universe, &rhs))
                    })?;
                    let inv = s.inv().ok_or(AlgebraError::DivisionByZero)?;
                    acc = scale(&acc, &inv);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Terms, AlgebraError> {
        match self.peek() {
            Tok::Sym('-') => {
                self.bump();
                Ok(scale(&self.unary()?, &Scalar::from_int(-1)))
            }
            Tok::Sym('+') => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Terms, AlgebraError> {
        let base = self.atom()?;
        if *self.peek() != Tok::Sym('^') {
            return Ok(base);
        }
        self.bump();
        let negative = if *self.peek() == Tok::Sym('-') {
            self.bump();
            true
        } else {
            false
        };
        let exp = match self.bump() {
            Tok::Num(n) if n.is_integer() => n.to_integer(),
            _ => {
                self.at -= 1;
                return self.err("exponent must be an integer literal");
            }
        };
        let exp: i32 = match i32::try_from(exp) {
            Ok(e) if e <= 1024 => e,
            _ => return self.err("exponent too large"),
        };
        let exp = if negative { -exp } else { exp };
        if let Some(s) = as_scalar(&base) {
            let p = s.pow(exp).ok_or(AlgebraError::DivisionByZero)?;
            let mut t = Terms::new();
            add_into(&mut t, 0, p);
            return Ok(t);
        }
        if exp < 0 {
            return Err(AlgebraError::NonScalarDivisor(super::form::render_terms(self.universe, &base)));
        }
        let mut acc = constant(GaussRational::one());
        for _ in 0..exp {
            acc = wedge_terms(&acc, &base);
        }
        Ok(acc)
    }

    fn atom(&mut self) -> Result<Terms, AlgebraError> {
        let pos = self.pos();
        match self.bump() {
            Tok::Num(n) => Ok(constant(GaussRational::from(n))),
            Tok::Sym('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(w) if w == "i" => Ok(constant(GaussRational::i())),
            Tok::Ident(w) if w == "d" => {
                if !self.allow_d {
                    return Err(AlgebraError::Parse { pos, msg: "d() is not allowed here".into() });
                }
                self.expect('(')?;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(exterior_d_terms(self.universe, &e))
            }
            Tok::Ident(w) if w == "wedge" => {
                self.expect('(')?;
                let mut acc = self.expr()?;
                while *self.peek() == Tok::Sym(',') {
                    self.bump();
                    acc = wedge_terms(&acc, &self.expr()?);
                }
                self.expect(')')?;
                Ok(acc)
            }
            Tok::Ident(w) => match self.universe.lookup(&w) {
                Some(SymbolRef::Scalar(s)) => {
                    let mut t = Terms::new();
                    add_into(&mut t, 0, Scalar::var(s));
                    Ok(t)
                }
                Some(SymbolRef::Generator(g)) => {
                    let mut t = Terms::new();
                    add_into(&mut t, 1 << g, Scalar::one());
                    Ok(t)
                }
                None => Err(AlgebraError::Undeclared(w)),
            },
            Tok::End => Err(AlgebraError::Parse { pos, msg: "unexpected end of input".into() }),
            Tok::Sym(c) => Err(AlgebraError::Parse { pos, msg: format!("unexpected `{c}`") }),
        }
    }
}

/// Parses `text` against `universe`. With `allow_d = false` the `d(...)` operator is
/// rejected, which is how declared differentials are read before `d` is defined.
pub(crate) fn parse_terms(universe: &Universe, text: &str, allow_d: bool) -> Result<Terms, AlgebraError> {
    let mut p = Parser { universe, toks: lex(text)?, at: 0, allow_d };
    let t = p.expr()?;
    if *p.peek() != Tok::End {
        return p.err("trailing input");
    }
    Ok(t)
}

/// Parses a degree-0 expression into a [`Scalar`].
pub fn parse_scalar(universe: &Universe, text: &str) -> Result<Scalar, AlgebraError> {
    let t = parse_terms(universe, text, false)?;
    as_scalar(&t).ok_or_else(|| AlgebraError::Parse { pos: 0, msg: format!("`{text}` is not a degree-0 expression") })
}

#[cfg(test)]
mod tests {
    use super::super::FormExpr;
    use super::*;

    fn u() -> std::sync::Arc<Universe> {
        Universe::builder().coordinate("x").coordinate("y").parameter("lambda").build().unwrap()
    }

    #[test]
    fn decimals_are_exact() {
        let u = u();
        assert_eq!(parse_scalar(&u, "0.25").unwrap(), Scalar::from_ratio(1, 4));
        assert_eq!(parse_scalar(&u, "1.5 - 3/2").unwrap(), Scalar::zero());
    }

    #[test]
    fn imaginary_unit_squares_to_minus_one() {
        let u = u();
        assert_eq!(parse_scalar(&u, "i^2").unwrap(), Scalar::from_int(-1));
        assert_eq!(parse_scalar(&u, "(1+i)*(1-i)").unwrap(), Scalar::from_int(2));
    }

    #[test]
    fn precedence_and_wedge_spellings() {
        let u = u();
        let a = FormExpr::parse(&u, "x*dx wedge dy").unwrap();
        let b = FormExpr::parse(&u, "wedge(x*dx, dy)").unwrap();
        let c = FormExpr::parse(&u, "x*dx ∧ dy").unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
        assert_eq!(FormExpr::parse(&u, "-dx^2").unwrap(), FormExpr::zero(&u));
        assert_eq!(FormExpr::parse(&u, "d(x*y)").unwrap(), FormExpr::parse(&u, "y*dx + x*dy").unwrap());
    }

    #[test]
    fn negative_powers_of_scalars() {
        let u = u();
        let a = parse_scalar(&u, "x^-2 * x^3").unwrap();
        assert_eq!(a, parse_scalar(&u, "x").unwrap());
    }

    #[test]
    fn errors_name_the_problem() {
        let u = u();
        assert_eq!(parse_terms(&u, "z + 1", true).unwrap_err(), AlgebraError::Undeclared("z".into()));
        assert!(matches!(parse_terms(&u, "x / dx", true), Err(AlgebraError::NonScalarDivisor(_))));
        assert_eq!(parse_terms(&u, "x / (y - y)", true).unwrap_err(), AlgebraError::DivisionByZero);
        assert!(matches!(parse_terms(&u, "x +", true), Err(AlgebraError::Parse { .. })));
        assert!(matches!(parse_terms(&u, "x )", true), Err(AlgebraError::Parse { .. })));
        assert!(matches!(parse_terms(&u, "d(x)", false), Err(AlgebraError::Parse { .. })));
        assert!(matches!(parse_terms(&u, "x ^ y", true), Err(AlgebraError::Parse { .. })));
    }

    #[test]
    fn identifiers() {
        assert!(is_identifier("z_1"));
        assert!(!is_identifier("1z"));
        assert!(!is_identifier(""));
    }
}
