//! Pretty printer. Output re-parses to an alpha-equal AST.

use crate::scalar::Scalar;
use crate::syntax::term::{Name, Term};
use crate::syntax::types::{Sort, TyVar, Type, UnitType};
use std::collections::BTreeSet;
use std::fmt;

#[derive(Clone, Debug, Default)]
pub struct Printer {
    pub unicode: bool,
    /// Closed terms printed back by name.
    pub defs: Vec<(String, Term)>,
}

pub fn print_term(t: &Term) -> String {
    Printer::default().term(t)
}

pub fn print_type(t: &Type) -> String {
    Printer::default().ty(t)
}

pub fn print_unit_type(u: &UnitType) -> String {
    Printer::default().unit(u)
}

fn base_name(hint: &str) -> &str {
    hint.split('#').next().filter(|s| !s.is_empty()).unwrap_or("v")
}

fn pick_name(hint: &str, taken: &dyn Fn(&str) -> bool) -> String {
    let base = base_name(hint);
    if !taken(base) {
        return base.to_string();
    }
    (1..).map(|i| format!("{base}{i}")).find(|n| !taken(n)).unwrap()
}

// Precedence contexts.
const TOP: u8 = 0;
const ITEM: u8 = 1;
const SCALED: u8 = 2;
const DOMAIN: u8 = 3;

impl Printer {
    pub fn unicode() -> Self {
        Printer {
            unicode: true,
            defs: Vec::new(),
        }
    }

    pub fn with_defs(mut self, defs: Vec<(String, Term)>) -> Self {
        self.defs = defs;
        self
    }

    fn scalar(&self, s: &Scalar) -> String {
        let text = if self.unicode { s.show_unicode() } else { s.to_string() };
        if s.is_compound() {
            format!("({text})")
        } else {
            text
        }
    }

    fn times(&self) -> &'static str {
        if self.unicode {
            "·"
        } else {
            " * "
        }
    }

    pub fn term(&self, t: &Term) -> String {
        let mut avoid: BTreeSet<String> = t.free_vars().iter().map(|n| n.to_string()).collect();
        avoid.extend(self.defs.iter().map(|(n, _)| n.clone()));
        let mut out = String::new();
        self.term_at(t, &mut Vec::new(), &avoid, TOP, true, &mut out);
        out
    }

    fn folded(&self, t: &Term) -> Option<&str> {
        self.defs.iter().find(|(_, d)| d == t).map(|(n, _)| n.as_str())
    }

    fn term_at(&self, t: &Term, scope: &mut Vec<String>, avoid: &BTreeSet<String>, prec: u8, trailing: bool, out: &mut String) {
        if let Some(name) = self.folded(t) {
            out.push_str(name);
            return;
        }
        let paren = match t {
            Term::Sum(_) => prec >= ITEM,
            Term::Scale(..) => prec >= SCALED,
            Term::Abs(..) => !trailing,
            _ => false,
        };
        if paren {
            out.push('(');
            self.term_at(t, scope, avoid, TOP, true, out);
            out.push(')');
            return;
        }
        match t {
            Term::Bound(i) => match scope.len().checked_sub(i + 1) {
                Some(k) => out.push_str(&scope[k]),
                None => out.push_str(&format!("?{i}")),
            },
            Term::Free(n) => out.push_str(n),
            Term::Abs(h, ann, body) => {
                let name = pick_name(&h.0, &|n| avoid.contains(n) || scope.iter().any(|s| s == n));
                out.push_str(if self.unicode { "λ" } else { "\\" });
                out.push_str(&name);
                if let Some(u) = ann {
                    out.push(':');
                    let mut tscope = Vec::new();
                    let tavoid = unit_avoid(u);
                    self.unit_at(u, &mut tscope, &tavoid, DOMAIN, false, out);
                }
                out.push('.');
                scope.push(name);
                self.term_at(body, scope, avoid, TOP, trailing, out);
                scope.pop();
            }
            Term::App(f, a) => {
                out.push('(');
                self.term_at(f, scope, avoid, TOP, true, out);
                out.push_str(") ");
                let bare = matches!(**a, Term::Bound(_) | Term::Free(_)) || self.folded(a).is_some();
                if bare {
                    self.term_at(a, scope, avoid, TOP, true, out);
                } else {
                    out.push('(');
                    self.term_at(a, scope, avoid, TOP, true, out);
                    out.push(')');
                }
            }
            Term::Scale(s, body) => {
                out.push_str(&self.scalar(s));
                out.push_str(self.times());
                self.term_at(body, scope, avoid, SCALED, trailing, out);
            }
            Term::Sum(items) => {
                for (k, item) in items.iter().enumerate() {
                    if k > 0 {
                        out.push_str(" + ");
                    }
                    let last = k + 1 == items.len();
                    self.term_at(item, scope, avoid, ITEM, trailing && last, out);
                }
            }
        }
    }

    pub fn ty(&self, t: &Type) -> String {
        let mut avoid = BTreeSet::new();
        t.collect_free(&mut avoid);
        let mut out = String::new();
        self.type_at(t, &mut Vec::new(), &avoid, TOP, true, &mut out);
        out
    }

    pub fn unit(&self, u: &UnitType) -> String {
        let avoid = unit_avoid(u);
        let mut out = String::new();
        self.unit_at(u, &mut Vec::new(), &avoid, TOP, true, &mut out);
        out
    }

    fn type_at(&self, t: &Type, scope: &mut Vec<(Sort, String)>, avoid: &BTreeSet<(Sort, Name)>, prec: u8, trailing: bool, out: &mut String) {
        let paren = match t {
            Type::Sum(_) => prec >= ITEM,
            Type::Scale(..) => prec >= SCALED,
            _ => false,
        };
        if paren {
            out.push('(');
            self.type_at(t, scope, avoid, TOP, true, out);
            out.push(')');
            return;
        }
        match t {
            Type::Unit(u) => self.unit_at(u, scope, avoid, prec, trailing, out),
            Type::GVar(v) => {
                out.push('%');
                out.push_str(&var_name(v, scope));
            }
            Type::Scale(s, body) => {
                out.push_str(&self.scalar(s));
                out.push_str(self.times());
                self.type_at(body, scope, avoid, SCALED, trailing, out);
            }
            Type::Sum(items) => {
                for (k, item) in items.iter().enumerate() {
                    if k > 0 {
                        out.push_str(" + ");
                    }
                    let last = k + 1 == items.len();
                    self.type_at(item, scope, avoid, ITEM, trailing && last, out);
                }
            }
        }
    }

    fn unit_at(&self, u: &UnitType, scope: &mut Vec<(Sort, String)>, avoid: &BTreeSet<(Sort, Name)>, prec: u8, trailing: bool, out: &mut String) {
        let compound = !matches!(u, UnitType::Var(_));
        if compound && (!trailing || prec == DOMAIN) {
            out.push('(');
            self.unit_at(u, scope, avoid, TOP, true, out);
            out.push(')');
            return;
        }
        match u {
            UnitType::Var(v) => out.push_str(&var_name(v, scope)),
            UnitType::Arrow(d, c) => {
                self.unit_at(d, scope, avoid, DOMAIN, false, out);
                out.push_str(if self.unicode { " → " } else { " -> " });
                self.type_at(c, scope, avoid, TOP, true, out);
            }
            UnitType::Forall(..) => {
                let (binders, body) = u.quantifiers();
                out.push_str(if self.unicode { "∀" } else { "forall " });
                let pushed = binders.len();
                for (k, (sort, h)) in binders.iter().enumerate() {
                    let name = pick_name(&h.0, &|n| {
                        avoid.iter().any(|(s, m)| s == sort && &**m == n) || scope.iter().any(|(s, m)| s == sort && m == n)
                    });
                    if k > 0 {
                        out.push(' ');
                    }
                    if *sort == Sort::General {
                        out.push('%');
                    }
                    out.push_str(&name);
                    scope.push((*sort, name));
                }
                out.push_str(". ");
                self.unit_at(body, scope, avoid, TOP, true, out);
                scope.truncate(scope.len() - pushed);
            }
        }
    }
}

fn unit_avoid(u: &UnitType) -> BTreeSet<(Sort, Name)> {
    let mut avoid = BTreeSet::new();
    u.collect_free(&mut avoid);
    avoid
}

fn var_name(v: &TyVar, scope: &[(Sort, String)]) -> String {
    match v {
        TyVar::Free(n) => n.to_string(),
        TyVar::Bound(i) => match scope.len().checked_sub(i + 1) {
            Some(k) => scope[k].1.clone(),
            None => format!("?{i}"),
        },
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_term(self))
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_term(self))
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_type(self))
    }
}

impl fmt::Debug for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_type(self))
    }
}

impl fmt::Display for UnitType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_unit_type(self))
    }
}

impl fmt::Debug for UnitType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_unit_type(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse::{parse_term, parse_type};

    fn roundtrip(src: &str) -> String {
        let t = parse_term(src).unwrap();
        let printed = print_term(&t);
        assert_eq!(parse_term(&printed).unwrap(), t, "{printed}");
        printed
    }

    #[test]
    fn term_forms() {
        assert_eq!(roundtrip(r"\x.\y.x"), r"\x.\y.x");
        assert_eq!(roundtrip("(t) u"), "(t) u");
        assert_eq!(roundtrip(r"0 * \x.\y.y"), r"0 * \x.\y.y");
        assert_eq!(roundtrip(r"(\x.x) + \y.y"), r"(\x.x) + \y.y");
        assert_eq!(roundtrip("2 * (3 * x)"), "2 * (3 * x)");
        assert_eq!(roundtrip("(1 + sqrt2) * (a + b)"), "(1 + sqrt2) * (a + b)");
        roundtrip(r"(\x.x) (\y.y) + (f) (2 * a)");
        roundtrip(r"\x:forall X. X -> X.(x) x");
    }

    #[test]
    fn shadowed_names_are_renamed() {
        let t = Term::lam("x", Term::lam("x", Term::Bound(1)));
        assert_eq!(print_term(&t), r"\x.\x1.x");
        let t = Term::lam("y", Term::var("y#3"));
        assert_eq!(print_term(&t), r"\y.y#3");
    }

    #[test]
    fn folding_and_unicode() {
        let tru = parse_term(r"\x.\y.x").unwrap();
        let fls = parse_term(r"\x.\y.y").unwrap();
        let t = tru.clone().plus(Term::scale(Scalar::zero(), fls.clone()));
        let p = Printer::default().with_defs(vec![("true".into(), tru), ("false".into(), fls)]);
        assert_eq!(p.term(&t), "true + 0 * false");
        let u = Printer::unicode().with_defs(p.defs.clone());
        assert_eq!(u.term(&t), "true + 0·false");
    }

    #[test]
    fn type_forms() {
        for src in [
            "forall X Y. X -> Y -> X",
            "(forall X Y. X -> Y -> X) + 0 * forall X Y. X -> Y -> Y",
            "forall %X. ((forall X. X -> X) -> A) -> %X",
            "(A -> B) -> C",
            "1/sqrt2 * A + -1/sqrt2 * B",
            "2 * (A + B)",
        ] {
            let t = parse_type(src).unwrap();
            assert_eq!(print_type(&t), src);
        }
        let t = parse_type("forall X Y. X -> Y -> X").unwrap();
        assert_eq!(Printer::unicode().ty(&t), "∀X Y. X → Y → X");
    }
}
