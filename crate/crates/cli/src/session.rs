//! Name resolution, printing and diagnostics shared by batch commands and the REPL.

use std::fmt;
use vecr::encodings::{prelude, prelude_types};
use vecr::rewrite::{normalize, Trace};
use vecr::syntax::{parse_term, parse_type, Printer, TyArg};
use vecr::typesys::{weight_type, weight_value};
use vecr::{ParseError, Scalar, Sort, Term, Type};

pub const DEFAULT_FUEL: usize = 100_000;

#[derive(Debug)]
pub enum CliError {
    /// Malformed input: exit status 2.
    Usage(String),
    /// Well-formed input the calculus rejects: exit status 1.
    Domain(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Domain(m) => f.write_str(m),
        }
    }
}

pub fn domain(e: impl fmt::Display) -> CliError {
    CliError::Domain(e.to_string())
}

/// `origin:line:col: message`, then the offending line with a caret under the column.
pub fn parse_diagnostic(origin: &str, src: &str, e: &ParseError) -> CliError {
    let mut msg = format!("{origin}:{}:{}: {}", e.line, e.col, e.message);
    if let Some(line) = src.lines().nth(e.line.saturating_sub(1)) {
        let pad: String = line.chars().take(e.col.saturating_sub(1)).map(|c| if c == '\t' { '\t' } else { ' ' }).collect();
        msg.push_str(&format!("\n  {line}\n  {pad}^"));
    }
    CliError::Usage(msg)
}

pub struct Session {
    pub ascii: bool,
    /// Prelude first, then user definitions in order; later entries shadow earlier ones.
    defs: Vec<(String, Term)>,
}

impl Session {
    pub fn new(ascii: bool) -> Self {
        Session { ascii, defs: prelude() }
    }

    pub fn printer(&self) -> Printer {
        // First match wins when folding, so drop shadowed entries.
        let mut visible: Vec<(String, Term)> = Vec::new();
        for (name, t) in self.defs.iter().rev() {
            if !visible.iter().any(|(n, _)| n == name) {
                visible.push((name.clone(), t.clone()));
            }
        }
        visible.reverse();
        Printer { unicode: !self.ascii, defs: visible }
    }

    pub fn show_term(&self, t: &Term) -> String {
        self.printer().term(t)
    }

    pub fn show_type(&self, t: &Type) -> String {
        self.printer().ty(t)
    }

    pub fn show_scalar(&self, s: &Scalar) -> String {
        if self.ascii {
            s.to_string()
        } else {
            s.show_unicode()
        }
    }

    fn lookup(&self, name: &str) -> Option<Term> {
        self.defs.iter().rev().find(|(n, _)| n == name).map(|(_, t)| t.clone())
    }

    /// Parses a term and replaces defined names by their bodies.
    pub fn term(&self, origin: &str, src: &str) -> Result<Term, CliError> {
        let t = parse_term(src).map_err(|e| parse_diagnostic(origin, src, &e))?;
        Ok(t.subst_all(&|n| self.lookup(n)))
    }

    /// A term with no free variables left after resolution.
    pub fn closed_term(&self, origin: &str, src: &str) -> Result<Term, CliError> {
        let t = self.term(origin, src)?;
        match t.free_vars().into_iter().next() {
            Some(x) => Err(CliError::Domain(format!("unbound variable {x}"))),
            None => Ok(t),
        }
    }

    /// Parses a type; the unit names `T`, `F` and `I` stand for the boolean and identity types.
    pub fn ty(&self, origin: &str, src: &str) -> Result<Type, CliError> {
        let ty = parse_type(src).map_err(|e| parse_diagnostic(origin, src, &e))?;
        let named = prelude_types();
        Ok(ty.subst_with(&|sort, n| {
            if sort != Sort::Unit {
                return None;
            }
            named.iter().find(|(k, _)| k.as_str() == &**n).map(|(_, u)| TyArg::Unit(u.clone()))
        }))
    }

    pub fn define(&mut self, name: &str, src: &str) -> Result<(), CliError> {
        let t = self.closed_term(name, src)?;
        self.defs.push((name.to_string(), t));
        Ok(())
    }

    pub fn reduce(&self, t: &Term, fuel: usize) -> Result<Trace, CliError> {
        normalize(t, fuel).map_err(domain)
    }

    /// Weight of a closed term's normal form, or of a type when the input
    /// is not a closed term.
    pub fn weight(&self, origin: &str, src: &str, fuel: usize) -> Result<Scalar, CliError> {
        let as_term = self.term(origin, src);
        if let Ok(t) = &as_term {
            if t.free_vars().is_empty() {
                let trace = self.reduce(t, fuel)?;
                return weight_value(trace.last()).map_err(domain);
            }
        }
        match self.ty(origin, src) {
            Ok(ty) => weight_type(&ty).map_err(domain),
            Err(type_err) => match as_term {
                Ok(t) => Err(CliError::Domain(format!(
                    "unbound variable {}",
                    t.free_vars().into_iter().next().expect("open term")
                ))),
                Err(CliError::Usage(_)) => Err(type_err),
                Err(e) => Err(e),
            },
        }
    }
}
