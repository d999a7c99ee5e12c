//! Text grammar for polynomials, with juxtaposition as multiplication:
//!
//! ```text
//! expr     := term (('+' | '-') term)*
//! term     := ['-'] factor+
//! factor   := base ['^' uint | superscript-digits]
//! base     := letter | rational | 'sqrt3' | '(' expr ')'
//! rational := int ['/' uint]
//! ```
//!
//! `#` starts a comment running to the end of the line. Large inputs (the
//! six-dimensional entry polynomial runs to ~170 KB of factored text) are
//! kept as an [`Expr`] tree so they can be evaluated without expansion.

use std::str::FromStr;

use num_bigint::BigInt;

use crate::algebra::{Coefficient, Rational};
use crate::error::{Error, ParseDiagnostic, Result};
use crate::poly::{Polynomial, VariableSet};

const MAX_EXPONENT: u32 = 4096;

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Number(Rational),
    Sqrt3,
    Var(usize),
    Neg(Box<Expr>),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Pow(Box<Expr>, u32),
}

/// A parsed expression together with the variable set its indices refer to.
#[derive(Clone, Debug)]
pub struct ParsedExpr {
    pub vars: VariableSet,
    pub root: Expr,
}

impl ParsedExpr {
    pub fn expand<C: Coefficient>(&self) -> Result<Polynomial<C>> {
        expand(&self.root, &self.vars)
    }

    /// Evaluates at values given in variable-set order, without expanding.
    pub fn eval<C: Coefficient>(&self, values: &[C]) -> Result<C> {
        if values.len() != self.vars.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} values for {} variables",
                values.len(),
                self.vars.len()
            )));
        }
        eval(&self.root, values)
    }
}

fn expand<C: Coefficient>(e: &Expr, vars: &VariableSet) -> Result<Polynomial<C>> {
    Ok(match e {
        Expr::Number(r) => Polynomial::constant(vars.clone(), C::from_rational(r.clone())),
        Expr::Sqrt3 => Polynomial::constant(vars.clone(), C::sqrt3().ok_or_else(no_sqrt3)?),
        Expr::Var(i) => Polynomial::variable(vars.clone(), *i),
        Expr::Neg(inner) => expand::<C>(inner, vars)?.negate(),
        Expr::Sum(items) => {
            let mut acc = Polynomial::zero(vars.clone());
            for it in items {
                acc = acc.checked_add(&expand(it, vars)?)?;
            }
            acc
        }
        Expr::Product(items) => {
            let mut acc = Polynomial::constant(vars.clone(), C::one());
            for it in items {
                acc = acc.checked_mul(&expand(it, vars)?)?;
            }
            acc
        }
        Expr::Pow(base, k) => expand::<C>(base, vars)?.pow(*k),
    })
}

fn eval<C: Coefficient>(e: &Expr, values: &[C]) -> Result<C> {
    Ok(match e {
        Expr::Number(r) => C::from_rational(r.clone()),
        Expr::Sqrt3 => C::sqrt3().ok_or_else(no_sqrt3)?,
        Expr::Var(i) => values[*i].clone(),
        Expr::Neg(inner) => eval(inner, values)?.neg(),
        Expr::Sum(items) => {
            let mut acc = C::zero();
            for it in items {
                acc = acc.add(&eval(it, values)?);
            }
            acc
        }
        Expr::Product(items) => {
            let mut acc = C::one();
            for it in items {
                acc = acc.mul(&eval(it, values)?);
            }
            acc
        }
        Expr::Pow(base, k) => eval(base, values)?.pow(*k),
    })
}

fn no_sqrt3() -> Error {
    Error::Unsupported("sqrt3 is not an element of the rational coefficient field".into())
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Plus,
    Minus,
    LParen,
    RParen,
    Caret,
    Slash,
    Int(BigInt),
    Var(char),
    Sqrt3,
    Super(u32),
    End,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    offset: usize,
}

fn superscript_digit(c: char) -> Option<u32> {
    Some(match c {
        '\u{2070}' => 0,
        '\u{00B9}' => 1,
        '\u{00B2}' => 2,
        '\u{00B3}' => 3,
        '\u{2074}'..='\u{2079}' => c as u32 - 0x2070,
        _ => return None,
    })
}

fn lex(text: &str) -> Result<Vec<Token>, ParseDiagnostic> {
    let mut out = Vec::new();
    let mut it = text.char_indices().peekable();
    while let Some(&(off, c)) = it.peek() {
        if c.is_whitespace() {
            it.next();
            continue;
        }
        if c == '#' {
            while let Some(&(_, c)) = it.peek() {
                if c == '\n' {
                    break;
                }
                it.next();
            }
            continue;
        }
        let simple = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '^' => Some(Tok::Caret),
            '/' => Some(Tok::Slash),
            _ => None,
        };
        if let Some(tok) = simple {
            it.next();
            out.push(Token { tok, offset: off });
            continue;
        }
        if c.is_ascii_digit() {
            let mut end = off;
            while let Some(&(o, d)) = it.peek() {
                if !d.is_ascii_digit() {
                    break;
                }
                end = o + 1;
                it.next();
            }
            let n = BigInt::from_str(&text[off..end]).expect("digits");
            out.push(Token { tok: Tok::Int(n), offset: off });
            continue;
        }
        if superscript_digit(c).is_some() {
            let mut value: u64 = 0;
            while let Some(&(_, d)) = it.peek() {
                let Some(k) = superscript_digit(d) else { break };
                value = value * 10 + u64::from(k);
                if value > u64::from(MAX_EXPONENT) {
                    return Err(ParseDiagnostic::at(text, off, "exponent too large"));
                }
                it.next();
            }
            out.push(Token { tok: Tok::Super(value as u32), offset: off });
            continue;
        }
        if text[off..].starts_with("sqrt3") {
            for _ in 0..5 {
                it.next();
            }
            out.push(Token { tok: Tok::Sqrt3, offset: off });
            continue;
        }
        if c.is_ascii_alphabetic() {
            it.next();
            out.push(Token { tok: Tok::Var(c), offset: off });
            continue;
        }
        return Err(ParseDiagnostic::at(text, off, format!("unexpected character '{c}'")));
    }
    out.push(Token { tok: Tok::End, offset: text.len() });
    Ok(out)
}

struct Parser<'a> {
    text: &'a str,
    toks: Vec<Token>,
    pos: usize,
    vars: VariableSet,
}

const FACTOR_START: [&str; 4] = ["variable", "number", "sqrt3", "'('"];

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].offset
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn diag(&self, msg: impl Into<String>) -> ParseDiagnostic {
        ParseDiagnostic::at(self.text, self.offset(), msg)
    }

    fn starts_factor(&self) -> bool {
        matches!(self.peek(), Tok::Var(_) | Tok::Int(_) | Tok::Sqrt3 | Tok::LParen)
    }

    fn expr(&mut self) -> Result<Expr, ParseDiagnostic> {
        let mut items = vec![self.term()?];
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    items.push(self.term()?);
                }
                Tok::Minus => {
                    self.bump();
                    let t = self.term()?;
                    items.push(Expr::Neg(Box::new(t)));
                }
                _ => break,
            }
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { Expr::Sum(items) })
    }

    fn term(&mut self) -> Result<Expr, ParseDiagnostic> {
        let negated = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        if !self.starts_factor() {
            return Err(self.diag("expected a factor").expecting(FACTOR_START));
        }
        let mut factors = Vec::new();
        while self.starts_factor() {
            factors.push(self.factor()?);
        }
        let body = if factors.len() == 1 { factors.pop().unwrap() } else { Expr::Product(factors) };
        Ok(if negated { Expr::Neg(Box::new(body)) } else { body })
    }

    fn factor(&mut self) -> Result<Expr, ParseDiagnostic> {
        let base = self.base()?;
        match self.peek().clone() {
            Tok::Caret => {
                self.bump();
                let at = self.offset();
                match self.bump() {
                    Tok::Int(n) => {
                        let k = u32::try_from(&n)
                            .ok()
                            .filter(|&k| k <= MAX_EXPONENT)
                            .ok_or_else(|| ParseDiagnostic::at(self.text, at, "exponent too large"))?;
                        Ok(Expr::Pow(Box::new(base), k))
                    }
                    _ => Err(ParseDiagnostic::at(self.text, at, "malformed exponent")
                        .expecting(["unsigned integer"])),
                }
            }
            Tok::Super(k) => {
                self.bump();
                Ok(Expr::Pow(Box::new(base), k))
            }
            _ => Ok(base),
        }
    }

    fn base(&mut self) -> Result<Expr, ParseDiagnostic> {
        let at = self.offset();
        match self.bump() {
            Tok::Var(c) => match self.vars.index_of(c) {
                Some(i) => Ok(Expr::Var(i)),
                None => Err(ParseDiagnostic::at(self.text, at, format!("unknown identifier '{c}'"))
                    .expecting(self.vars.names().iter().map(|c| c.to_string()))),
            },
            Tok::Sqrt3 => Ok(Expr::Sqrt3),
            Tok::Int(n) => {
                if *self.peek() == Tok::Slash {
                    self.bump();
                    let dat = self.offset();
                    match self.bump() {
                        Tok::Int(d) if d != BigInt::from(0) => Ok(Expr::Number(Rational::new(n, d))),
                        Tok::Int(_) => Err(ParseDiagnostic::at(self.text, dat, "zero denominator")),
                        _ => Err(ParseDiagnostic::at(self.text, dat, "malformed rational")
                            .expecting(["unsigned integer"])),
                    }
                } else {
                    Ok(Expr::Number(Rational::from_integer(n)))
                }
            }
            Tok::LParen => {
                let inner = self.expr()?;
                if *self.peek() != Tok::RParen {
                    return Err(self.diag("unbalanced parentheses").expecting(["')'", "'+'", "'-'"]));
                }
                self.bump();
                Ok(inner)
            }
            Tok::RParen => Err(ParseDiagnostic::at(self.text, at, "unbalanced parentheses")
                .expecting(FACTOR_START)),
            Tok::End => Err(ParseDiagnostic::at(self.text, at, "unexpected end of input")
                .expecting(FACTOR_START)),
            other => Err(ParseDiagnostic::at(self.text, at, format!("unexpected token {other:?}"))
                .expecting(FACTOR_START)),
        }
    }
}

/// Parses without expanding. When `vars` is `None` the variable set is the
/// letters that occur, in alphabetical order.
pub fn parse_expr(text: &str, vars: Option<&VariableSet>) -> Result<ParsedExpr, ParseDiagnostic> {
    let toks = lex(text)?;
    let vars = match vars {
        Some(v) => v.clone(),
        None => {
            let mut seen: Vec<char> =
                toks.iter().filter_map(|t| if let Tok::Var(c) = t.tok { Some(c) } else { None }).collect();
            seen.sort_unstable();
            seen.dedup();
            VariableSet::new(seen).expect("letters are distinct")
        }
    };
    let mut p = Parser { text, toks, pos: 0, vars };
    let root = p.expr()?;
    match p.peek() {
        Tok::End => Ok(ParsedExpr { vars: p.vars, root }),
        Tok::RParen => Err(p.diag("unbalanced parentheses").expecting(["'+'", "'-'", "end of input"])),
        _ => Err(p.diag("unexpected token").expecting(["'+'", "'-'", "end of input"])),
    }
}

/// Parses and fully expands into canonical sparse form.
pub fn parse_polynomial<C: Coefficient>(text: &str, vars: Option<&VariableSet>) -> Result<Polynomial<C>> {
    parse_expr(text, vars)?.expand()
}

pub fn render_polynomial<C: Coefficient>(p: &Polynomial<C>) -> String {
    p.render()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{int, rat, QuadExt3};
    use crate::poly::Monomial;
    use proptest::prelude::*;

    const PN3: &str = "a^2 b^2 + a b c + c^2 + a^2 c^2 + b^2 c^2 - 2 a b c^3 + a^2 c^4";

    #[test]
    fn parses_the_three_by_three_entry() {
        let p: Polynomial<Rational> = parse_polynomial(PN3, None).unwrap();
        assert_eq!(p.variables().names(), &['a', 'b', 'c']);
        assert_eq!(p.num_terms(), 7);
        assert_eq!(p.coefficient(&Monomial(vec![1, 1, 3])), int(-2));
        let at_one = p.eval_slice(&[int(1), int(1), int(1)]).unwrap();
        assert_eq!(at_one, int(4));
    }

    #[test]
    fn zero_and_binomial() {
        let z: Polynomial<Rational> = parse_polynomial("0", None).unwrap();
        assert!(z.is_zero());
        let p: Polynomial<Rational> = parse_polynomial("(a+b)^2", None).unwrap();
        assert_eq!(p.render(), "a^2 + 2 a b + b^2");
    }

    #[test]
    fn adjacency_and_superscripts() {
        let v = VariableSet::new("abc".chars()).unwrap();
        let p: Polynomial<Rational> = parse_polynomial("ab c\u{00B2} - 1/2", Some(&v)).unwrap();
        assert_eq!(p.render(), "a b c^2 - 1/2");
        let q: Polynomial<Rational> = parse_polynomial("a b c^2 + -1/2", Some(&v)).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn sqrt3_only_in_the_extension() {
        let p: Polynomial<QuadExt3> = parse_polynomial("(sqrt3 a)^2 - 3 a^2", None).unwrap();
        assert!(p.is_zero());
        assert!(parse_polynomial::<Rational>("sqrt3 a", None).is_err());
    }

    #[test]
    fn comments_are_ignored() {
        let p: Polynomial<Rational> = parse_polynomial("# header\na # trailing\n + 1", None).unwrap();
        assert_eq!(p.render(), "a + 1");
    }

    #[test]
    fn diagnostics() {
        let v = VariableSet::new("ab".chars()).unwrap();
        let e = parse_expr("a + c", Some(&v)).unwrap_err();
        assert_eq!(e.offset, 4);
        assert!(e.message.contains("unknown identifier"));
        let e = parse_expr("(a + b", None).unwrap_err();
        assert!(e.message.contains("unbalanced"));
        let e = parse_expr("a + b)", None).unwrap_err();
        assert!(e.message.contains("unbalanced"));
        let e = parse_expr("a^b", None).unwrap_err();
        assert!(e.message.contains("malformed exponent"));
        let e = parse_expr("a^99999999999", None).unwrap_err();
        assert!(e.message.contains("too large"));
        let e = parse_expr("a +\n  * b", None).unwrap_err();
        assert_eq!((e.line, e.column), (2, 3));
    }

    #[test]
    fn rendering_round_trips_quadratic_coefficients() {
        let v = VariableSet::new("ab".chars()).unwrap();
        let p = Polynomial::from_terms(
            v.clone(),
            [
                (Monomial(vec![1, 0]), QuadExt3::new(rat(-1, 2), int(3))),
                (Monomial(vec![0, 1]), QuadExt3::new(int(0), rat(-2, 3))),
                (Monomial(vec![0, 0]), QuadExt3::new(int(1), int(-1))),
            ],
        )
        .unwrap();
        let text = p.render();
        assert_eq!(text, "(-1/2 + 3 sqrt3) a - 2/3 sqrt3 b + (1 - sqrt3)");
        let back: Polynomial<QuadExt3> = parse_polynomial(&text, Some(&v)).unwrap();
        assert_eq!(back, p);
    }

    fn arb_quad() -> impl Strategy<Value = QuadExt3> {
        (-6i64..6, 1i64..5, -3i64..3, 1i64..4).prop_map(|(a, b, c, d)| QuadExt3::new(rat(a, b), rat(c, d)))
    }

    proptest! {
        #[test]
        fn parse_inverts_render(ts in prop::collection::vec((prop::collection::vec(0u32..4, 4), arb_quad()), 0..8)) {
            let v = VariableSet::new("abcd".chars()).unwrap();
            let p = Polynomial::from_terms(v.clone(), ts.into_iter().map(|(e, c)| (Monomial(e), c))).unwrap();
            let back: Polynomial<QuadExt3> = parse_polynomial(&p.render(), Some(&v)).unwrap();
            prop_assert_eq!(back, p);
        }

        #[test]
        fn whitespace_between_tokens_is_irrelevant(spaces in prop::collection::vec(0usize..3, 8)) {
            let pieces = ["a", "^", "2", "b", "-", "3", "/", "4"];
            let mut text = String::new();
            for (p, s) in pieces.iter().zip(&spaces) {
                text.push_str(p);
                text.push_str(&" ".repeat(*s));
            }
            let p: Polynomial<Rational> = parse_polynomial(&text, None).unwrap();
            prop_assert_eq!(p.render(), "a^2 b - 3/4");
        }
    }
}
