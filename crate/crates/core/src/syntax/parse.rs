//! Recursive-descent parser for terms and types.
//!
//! Application is juxtaposition, left associative; the usual written form `(t) u`
//! is the special case where the function is parenthesized. Lambda bodies
//! and quantifier bodies extend as far to the right as possible.

use crate::lexer::{Cursor, ParseError, Pos, Tok};
use crate::scalar::{scalar_product, Scalar};
use crate::syntax::term::{Hint, Term};
use crate::syntax::types::{Sort, TyVar, Type, UnitType};
use std::sync::Arc;

pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    let mut p = Parser::new(text)?;
    let t = p.term()?;
    p.cur.expect_eof()?;
    Ok(t)
}

pub fn parse_type(text: &str) -> Result<Type, ParseError> {
    let mut p = Parser::new(text)?;
    let t = p.ty()?;
    p.cur.expect_eof()?;
    Ok(t)
}

pub fn parse_unit_type(text: &str) -> Result<UnitType, ParseError> {
    let mut p = Parser::new(text)?;
    let pos = p.cur.pos();
    let t = p.ty()?;
    p.cur.expect_eof()?;
    into_unit(t, pos, "expected a unit type")
}

pub struct Parser {
    pub(crate) cur: Cursor,
    terms: Vec<String>,
    tys: Vec<(Sort, String)>,
}

fn sort_error(pos: Pos, what: &str) -> ParseError {
    ParseError::new(pos, format!("sort error: {what}"))
}

fn into_unit(t: Type, pos: Pos, what: &str) -> Result<UnitType, ParseError> {
    match t {
        Type::Unit(u) => Ok(u),
        _ => Err(sort_error(pos, what)),
    }
}

fn starts_scalar(tok: &Tok) -> bool {
    matches!(tok, Tok::Int(_) | Tok::Sqrt2 | Tok::Minus | Tok::LParen)
}

impl Parser {
    pub fn new(text: &str) -> Result<Self, ParseError> {
        Ok(Parser {
            cur: Cursor::new(text)?,
            terms: Vec::new(),
            tys: Vec::new(),
        })
    }

    pub fn cursor(&mut self) -> &mut Cursor {
        &mut self.cur
    }

    /// Tries to read `scalar *`; restores the cursor when that fails.
    fn scalar_prefix(&mut self) -> Option<Scalar> {
        if !starts_scalar(self.cur.peek()) {
            return None;
        }
        let mark = self.cur.mark();
        if let Ok(s) = scalar_product(&mut self.cur, true) {
            if self.cur.eat(&Tok::Star) {
                return Some(s);
            }
        }
        self.cur.reset(mark);
        None
    }

    pub fn term(&mut self) -> Result<Term, ParseError> {
        let mut items = vec![self.scaled()?];
        while self.cur.eat(&Tok::Plus) {
            items.push(self.scaled()?);
        }
        Ok(Term::sum(items))
    }

    fn scaled(&mut self) -> Result<Term, ParseError> {
        match self.scalar_prefix() {
            Some(s) => Ok(Term::scale(s, self.scaled()?)),
            None => self.app(),
        }
    }

    fn app(&mut self) -> Result<Term, ParseError> {
        let mut f = self.primary()?;
        while matches!(self.cur.peek(), Tok::Ident(_) | Tok::Lambda | Tok::LParen) {
            let a = self.primary()?;
            f = Term::app(f, a);
        }
        Ok(f)
    }

    fn primary(&mut self) -> Result<Term, ParseError> {
        match self.cur.peek().clone() {
            Tok::Ident(name) => {
                self.cur.bump();
                Ok(self.term_var(&name))
            }
            Tok::Lambda => {
                self.cur.bump();
                let mut binders = Vec::new();
                loop {
                    match self.cur.peek().clone() {
                        Tok::Ident(name) => {
                            self.cur.bump();
                            let ann = if self.cur.eat(&Tok::Colon) {
                                let pos = self.cur.pos();
                                let t = self.tatom()?;
                                Some(into_unit(t, pos, "binder annotations must be unit types")?)
                            } else {
                                None
                            };
                            binders.push((name, ann));
                        }
                        Tok::Dot if !binders.is_empty() => {
                            self.cur.bump();
                            break;
                        }
                        other => return Err(self.cur.error(format!("expected a binder or `.`, found `{other}`"))),
                    }
                }
                let n = binders.len();
                self.terms.extend(binders.iter().map(|(b, _)| b.clone()));
                let body = self.term();
                self.terms.truncate(self.terms.len() - n);
                let mut body = body?;
                for (name, ann) in binders.into_iter().rev() {
                    body = Term::Abs(Hint::new(&name), ann, Arc::new(body));
                }
                Ok(body)
            }
            Tok::LParen => {
                self.cur.bump();
                let t = self.term()?;
                self.cur.expect(&Tok::RParen)?;
                Ok(t)
            }
            other => Err(self.cur.error(format!("expected a term, found `{other}`"))),
        }
    }

    fn term_var(&self, name: &str) -> Term {
        match self.terms.iter().rev().position(|n| n == name) {
            Some(i) => Term::Bound(i),
            None => Term::var(name),
        }
    }

    pub fn ty(&mut self) -> Result<Type, ParseError> {
        let mut items = vec![self.tscaled()?];
        while self.cur.eat(&Tok::Plus) {
            items.push(self.tscaled()?);
        }
        Ok(Type::sum(items))
    }

    fn tscaled(&mut self) -> Result<Type, ParseError> {
        match self.scalar_prefix() {
            Some(s) => Ok(Type::scale(s, self.tscaled()?)),
            None => self.tatom(),
        }
    }

    fn tatom(&mut self) -> Result<Type, ParseError> {
        let pos = self.cur.pos();
        let head = self.tprimary()?;
        if self.cur.eat(&Tok::Arrow) {
            let dom = into_unit(head, pos, "arrow domains must be unit types")?;
            let cod = self.ty()?;
            return Ok(Type::Unit(UnitType::Arrow(Arc::new(dom), Arc::new(cod))));
        }
        Ok(head)
    }

    fn tprimary(&mut self) -> Result<Type, ParseError> {
        match self.cur.peek().clone() {
            Tok::Ident(name) => {
                if !name.starts_with(|c: char| c.is_ascii_uppercase()) {
                    return Err(self.cur.error(format!("type variable `{name}` must start with an uppercase letter")));
                }
                self.cur.bump();
                Ok(Type::Unit(UnitType::Var(self.ty_var(Sort::Unit, &name))))
            }
            Tok::GenIdent(name) => {
                self.cur.bump();
                Ok(Type::GVar(self.ty_var(Sort::General, &name)))
            }
            Tok::Forall => {
                self.cur.bump();
                let mut binders = Vec::new();
                loop {
                    match self.cur.peek().clone() {
                        Tok::Ident(n) => binders.push((Sort::Unit, n)),
                        Tok::GenIdent(n) => binders.push((Sort::General, n)),
                        Tok::Dot if !binders.is_empty() => {
                            self.cur.bump();
                            break;
                        }
                        other => return Err(self.cur.error(format!("expected a type variable or `.`, found `{other}`"))),
                    }
                    self.cur.bump();
                }
                let n = binders.len();
                self.tys.extend(binders.iter().cloned());
                let pos = self.cur.pos();
                let body = self.tatom();
                self.tys.truncate(self.tys.len() - n);
                let mut body = into_unit(body?, pos, "quantifier bodies must be unit types")?;
                for (sort, name) in binders.into_iter().rev() {
                    body = UnitType::Forall(sort, Hint::new(&name), Arc::new(body));
                }
                Ok(Type::Unit(body))
            }
            Tok::LParen => {
                self.cur.bump();
                let t = self.ty()?;
                self.cur.expect(&Tok::RParen)?;
                Ok(t)
            }
            other => Err(self.cur.error(format!("expected a type, found `{other}`"))),
        }
    }

    fn ty_var(&self, sort: Sort, name: &str) -> TyVar {
        match self.tys.iter().rev().position(|(s, n)| *s == sort && n == name) {
            Some(i) => TyVar::Bound(i),
            None => TyVar::free(name),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn booleans() {
        let t = parse_term(r"\x.\y.x").unwrap();
        assert_eq!(t, Term::lams(&["x", "y"], Term::var("x")));
        assert_eq!(parse_term(r"\x y.x").unwrap(), t);
        assert_eq!(parse_term("λa.λb.a").unwrap(), t);
    }

    #[test]
    fn superposition() {
        let t = parse_term("1/sqrt2 * true + 1/sqrt2 * false").unwrap();
        let h = Scalar::inv_sqrt2();
        let want = Term::scale(h.clone(), Term::var("true")).plus(Term::scale(h, Term::var("false")));
        assert_eq!(t, want);
    }

    #[test]
    fn application_forms() {
        let want = Term::app(Term::app(Term::var("f"), Term::var("a")), Term::var("b"));
        assert_eq!(parse_term("((f) a) b").unwrap(), want);
        assert_eq!(parse_term("f a b").unwrap(), want);
        let h = parse_term("(H) (1/sqrt2*true + 1/sqrt2*false)").unwrap();
        assert!(matches!(h, Term::App(..)));
    }

    #[test]
    fn scalar_prefixes() {
        let t = parse_term("(1 + sqrt2) * x").unwrap();
        assert_eq!(t, Term::scale(&Scalar::one() + &Scalar::sqrt2(), Term::var("x")));
        let nested = parse_term("2 * (3 * x)").unwrap();
        assert_eq!(nested, Term::scale(Scalar::int(2), Term::scale(Scalar::int(3), Term::var("x"))));
        assert_eq!(parse_term("2 * 3 * x").unwrap(), Term::scale(Scalar::int(6), Term::var("x")));
        assert_eq!(parse_term("(x)").unwrap(), Term::var("x"));
    }

    #[test]
    fn true_type() {
        let t = parse_type("forall X Y. X -> (Y -> X)").unwrap();
        let x = UnitType::var("X");
        let want = UnitType::foralls(&["X", "Y"], UnitType::arrow(x.clone(), UnitType::arrow(UnitType::var("Y"), x)));
        assert_eq!(t, Type::Unit(want));
        assert_eq!(parse_type("∀X Y. X → Y → X").unwrap(), t);
    }

    #[test]
    fn general_variables_and_sorts() {
        let t = parse_type("forall %X. (A -> %X) -> %X").unwrap();
        assert!(matches!(t, Type::Unit(UnitType::Forall(Sort::General, ..))));
        let err = parse_type("%X -> A").unwrap_err();
        assert!(err.message.contains("sort error"), "{err}");
        assert!(parse_type("(A + B) -> A").is_err());
        assert!(parse_type("forall X. %Y").is_err());
        assert!(parse_term(r"\x:A+B.x").is_err());
    }

    #[test]
    fn annotated_binders() {
        let t = parse_term(r"\x:X -> X. x").unwrap();
        let Term::Abs(_, Some(ann), _) = t else { panic!() };
        assert_eq!(ann, UnitType::arrow(UnitType::var("X"), UnitType::var("X")));
    }

    #[test]
    fn error_positions() {
        let err = parse_term("\\x. (x").unwrap_err();
        assert_eq!((err.line, err.col), (1, 7));
        let err = parse_term("x +\n  +").unwrap_err();
        assert_eq!((err.line, err.col), (2, 3));
    }
}
