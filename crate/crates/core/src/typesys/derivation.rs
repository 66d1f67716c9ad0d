//! Typing derivations and an independent validator that replays each rule.

use crate::scalar::Scalar;
use crate::syntax::{Context, Hint, Name, Printer, Sort, Term, TyArg, Type, UnitType};
use crate::typesys::canon::{canonicalize, unit_equiv, CanonicalType, Class};
use crate::typesys::unify::{close_over, Opened};
use std::fmt;
use std::sync::Arc;

#[derive(Clone, Debug, PartialEq)]
pub enum Rule {
    Ax,
    Equiv,
    /// Opens the abstraction with the fresh term variable `var`.
    ArrowI {
        var: Name,
    },
    /// `t : Σαᵢ·∀X⃗.(U→Tᵢ)` and `r : Σβⱼ·U[A⃗ⱼ/X⃗]` give `(t) r : ΣᵢΣⱼ αᵢβⱼ·Tᵢ[A⃗ⱼ/X⃗]`.
    ArrowE {
        binders: Vec<(Sort, Name)>,
        domain: UnitType,
        codomains: Vec<(Scalar, Type)>,
        args: Vec<(Scalar, Vec<TyArg>)>,
    },
    ForallI {
        sort: Sort,
        var: Name,
    },
    ForallE {
        arg: TyArg,
    },
    SumI,
    OneE,
    S {
        coeffs: Vec<Scalar>,
    },
}

impl Rule {
    pub fn name(&self, unicode: bool) -> &'static str {
        match (self, unicode) {
            (Rule::Ax, _) => "ax",
            (Rule::Equiv, true) => "≡",
            (Rule::Equiv, false) => "equiv",
            (Rule::ArrowI { .. }, true) => "→I",
            (Rule::ArrowI { .. }, false) => "->I",
            (Rule::ArrowE { .. }, true) => "→E",
            (Rule::ArrowE { .. }, false) => "->E",
            (Rule::ForallI { .. }, true) => "∀I",
            (Rule::ForallI { .. }, false) => "forall-I",
            (Rule::ForallE { .. }, true) => "∀E",
            (Rule::ForallE { .. }, false) => "forall-E",
            (Rule::SumI, _) => "+I",
            (Rule::OneE, _) => "1E",
            (Rule::S { .. }, _) => "S",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Derivation {
    pub ctx: Context,
    pub term: Term,
    pub ty: Type,
    pub rule: Rule,
    pub premises: Vec<Derivation>,
}

/// The first node that fails to replay.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvalidNode {
    /// Premise indices from the root.
    pub path: Vec<usize>,
    pub rule: String,
    pub reason: String,
}

impl fmt::Display for InvalidNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} node at {:?}: {}", self.rule, self.path, self.reason)
    }
}

impl Derivation {
    pub fn new(ctx: Context, term: Term, ty: Type, rule: Rule, premises: Vec<Derivation>) -> Self {
        Derivation { ctx, term, ty, rule, premises }
    }

    /// Appends an equivalence step unless the type is already literally `ty`.
    pub fn equiv(self, ty: Type) -> Derivation {
        if self.ty == ty {
            return self;
        }
        Derivation::new(self.ctx.clone(), self.term.clone(), ty, Rule::Equiv, vec![self])
    }

    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(Derivation::size).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.premises.iter().map(Derivation::depth).max().unwrap_or(0)
    }

    /// Rule names in preorder.
    pub fn rules(&self) -> Vec<&'static str> {
        let mut out = vec![self.rule.name(false)];
        for p in &self.premises {
            out.extend(p.rules());
        }
        out
    }

    pub fn validate(&self) -> Result<(), InvalidNode> {
        let mut path = Vec::new();
        validate_at(self, &mut path)
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_ok()
    }

    /// Indented tree, conclusion first, one node per line.
    pub fn render(&self, printer: &Printer) -> String {
        let mut out = String::new();
        render_at(self, printer, 0, &mut out);
        out
    }
}

fn render_at(d: &Derivation, p: &Printer, depth: usize, out: &mut String) {
    let turnstile = if p.unicode { "⊢" } else { "|-" };
    let ctx = if d.ctx.is_empty() {
        String::new()
    } else {
        let items: Vec<String> = d.ctx.entries().iter().map(|(n, u)| format!("{n}:{}", p.unit(u))).collect();
        format!("{} ", items.join(", "))
    };
    let extra = match &d.rule {
        Rule::ArrowI { var } => format!(" [{var}]"),
        Rule::ArrowE { binders, args, .. } if !binders.is_empty() => {
            let items: Vec<String> = args
                .iter()
                .map(|(_, a)| a.iter().map(|x| p.ty(&x.as_type())).collect::<Vec<_>>().join(", "))
                .collect();
            format!(" [{}]", items.join("; "))
        }
        Rule::ForallI { var, .. } => format!(" [{var}]"),
        Rule::ForallE { arg } => format!(" [{}]", p.ty(&arg.as_type())),
        Rule::S { coeffs } => {
            let items: Vec<String> = coeffs.iter().map(|c| if p.unicode { c.show_unicode() } else { c.to_string() }).collect();
            format!(" [{}]", items.join(", "))
        }
        _ => String::new(),
    };
    out.push_str(&format!(
        "{}{}{}  {}{} {} : {}\n",
        "  ".repeat(depth),
        d.rule.name(p.unicode),
        extra,
        ctx,
        turnstile,
        p.term(&d.term),
        p.ty(&d.ty)
    ));
    for prem in &d.premises {
        render_at(prem, p, depth + 1, out);
    }
}

fn validate_at(d: &Derivation, path: &mut Vec<usize>) -> Result<(), InvalidNode> {
    if let Err(reason) = check_node(d) {
        return Err(InvalidNode {
            path: path.clone(),
            rule: d.rule.name(false).to_string(),
            reason,
        });
    }
    for (i, p) in d.premises.iter().enumerate() {
        path.push(i);
        validate_at(p, path)?;
        path.pop();
    }
    Ok(())
}

fn ctx_equiv(a: &Context, b: &Context) -> bool {
    a.entries().len() == b.entries().len()
        && a.entries().iter().zip(b.entries()).all(|((n, u), (m, v))| n == m && unit_equiv(u, v))
}

fn need(cond: bool, reason: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(reason())
    }
}

fn equiv_to(d: &Derivation, want: &CanonicalType) -> Result<(), String> {
    let got = canonicalize(&d.ty);
    need(&got == want, || format!("conclusion type {} is not equivalent to {}", d.ty, want))
}

fn units_of(c: &CanonicalType) -> Result<Vec<(Scalar, UnitType)>, String> {
    if !c.gvars().is_empty() {
        return Err(format!("{c} has a general-variable summand"));
    }
    Ok(c.units())
}

fn hint_of(name: &str) -> Hint {
    Hint::new(name.split('#').next().unwrap_or(name))
}

fn opened(binders: &[(Sort, Name)]) -> Vec<Opened> {
    binders.iter().map(|(s, n)| (*s, hint_of(n), n.clone())).collect()
}

fn inst_many(t: &Type, binders: &[(Sort, Name)], args: &[TyArg]) -> Type {
    t.subst_with(&|sort, n| binders.iter().position(|(s, m)| *s == sort && m == n).map(|i| args[i].clone()))
}

fn check_node(d: &Derivation) -> Result<(), String> {
    let arity = |n: usize| need(d.premises.len() == n, || format!("expected {n} premise(s), found {}", d.premises.len()));
    if !matches!(d.rule, Rule::ArrowI { .. }) {
        for p in &d.premises {
            need(ctx_equiv(&p.ctx, &d.ctx), || "premise context differs".into())?;
        }
    }
    match &d.rule {
        Rule::Ax => {
            arity(0)?;
            let Term::Free(x) = &d.term else { return Err("term is not a variable".into()) };
            let u = d.ctx.lookup(x).ok_or_else(|| format!("{x} is not in the context"))?;
            equiv_to(d, &CanonicalType::unit(u.clone()))
        }
        Rule::Equiv => {
            arity(1)?;
            need(d.premises[0].term == d.term, || "premise term differs".into())?;
            equiv_to(d, &canonicalize(&d.premises[0].ty))
        }
        Rule::ArrowI { var } => {
            arity(1)?;
            let p = &d.premises[0];
            let Term::Abs(_, _, body) = &d.term else { return Err("term is not an abstraction".into()) };
            need(d.ctx.lookup(var).is_none(), || format!("{var} is already bound"))?;
            need(!d.term.free_vars().contains(var), || format!("{var} occurs free in the term"))?;
            let (last, init) = p.ctx.entries().split_last().ok_or("premise context is empty")?;
            need(&last.0 == var, || "premise context does not end with the bound variable".into())?;
            let outer = Context::from_entries(init.iter().cloned());
            need(ctx_equiv(&outer, &d.ctx), || "premise context does not extend the context".into())?;
            need(p.term == body.instantiate(&Term::Free(var.clone())), || "premise term is not the opened body".into())?;
            let arrow = UnitType::Arrow(Arc::new(last.1.clone()), Arc::new(p.ty.clone()));
            equiv_to(d, &CanonicalType::unit(arrow))
        }
        Rule::ArrowE { binders, domain, codomains, args } => {
            arity(2)?;
            need(!codomains.is_empty() && !args.is_empty(), || "empty sums".into())?;
            let Term::App(f, r) = &d.term else { return Err("term is not an application".into()) };
            need(**f == d.premises[0].term && **r == d.premises[1].term, || "premise terms differ".into())?;
            let bs = opened(binders);
            let fun = CanonicalType::from_entries(codomains.iter().map(|(a, t)| {
                let arrow = UnitType::Arrow(Arc::new(domain.clone()), Arc::new(t.clone()));
                (Class::Unit(crate::typesys::norm_unit(&close_over(&bs, arrow))), a.clone())
            }));
            need(canonicalize(&d.premises[0].ty) == fun, || format!("function premise is not typed {fun}"))?;
            let mut arg_ty = CanonicalType::default();
            let mut result = CanonicalType::default();
            for (beta, a) in args {
                need(a.len() == binders.len(), || "instantiation arity".into())?;
                need(a.iter().zip(binders).all(|(x, (s, _))| x.sort() == *s), || "instantiation sort".into())?;
                let dom = inst_many(&Type::Unit(domain.clone()), binders, a);
                arg_ty = arg_ty.plus(&canonicalize(&dom).scaled(beta));
                for (alpha, t) in codomains {
                    let ti = canonicalize(&inst_many(t, binders, a));
                    result = result.plus(&ti.scaled(&(alpha * beta)));
                }
            }
            need(canonicalize(&d.premises[1].ty) == arg_ty, || format!("argument premise is not typed {arg_ty}"))?;
            equiv_to(d, &result)
        }
        Rule::ForallI { sort, var } => {
            arity(1)?;
            let p = &d.premises[0];
            need(p.term == d.term, || "premise term differs".into())?;
            need(!d.ctx.mentions_type_var(*sort, var), || format!("{var} is free in the context"))?;
            let units = units_of(&canonicalize(&p.ty))?;
            let want = CanonicalType::from_entries(units.into_iter().map(|(a, u)| {
                let q = UnitType::Forall(*sort, hint_of(var), Arc::new(u.close(*sort, var, 0)));
                (Class::Unit(q), a)
            }));
            equiv_to(d, &want)
        }
        Rule::ForallE { arg } => {
            arity(1)?;
            let p = &d.premises[0];
            need(p.term == d.term, || "premise term differs".into())?;
            let mut want = CanonicalType::default();
            for (a, u) in units_of(&canonicalize(&p.ty))? {
                let UnitType::Forall(s, _, body) = &u else { return Err(format!("{u} is not quantified")) };
                need(*s == arg.sort(), || "instantiation sort".into())?;
                want = want.plus(&CanonicalType::unit(body.instantiate(arg)).scaled(&a));
            }
            equiv_to(d, &want)
        }
        Rule::SumI => {
            need(d.premises.len() >= 2, || "sum needs two premises".into())?;
            let t = Term::sum(d.premises.iter().map(|p| p.term.clone()));
            need(t == d.term, || "term is not the sum of the premise terms".into())?;
            let want = d.premises.iter().fold(CanonicalType::default(), |acc, p| acc.plus(&canonicalize(&p.ty)));
            equiv_to(d, &want)
        }
        Rule::OneE => {
            arity(1)?;
            let p = &d.premises[0];
            need(p.term == Term::scale(Scalar::one(), d.term.clone()), || "premise term is not 1·t".into())?;
            equiv_to(d, &canonicalize(&p.ty))
        }
        Rule::S { coeffs } => {
            need(!coeffs.is_empty(), || "no coefficients".into())?;
            arity(coeffs.len())?;
            let Term::Scale(alpha, t) = &d.term else { return Err("term is not scaled".into()) };
            let total: Scalar = coeffs.iter().sum();
            need(*alpha == total, || format!("scalar {alpha} differs from the coefficient sum {total}"))?;
            need(d.premises.iter().all(|p| p.term == **t), || "premise terms differ".into())?;
            let want = d
                .premises
                .iter()
                .zip(coeffs)
                .fold(CanonicalType::default(), |acc, (p, c)| acc.plus(&canonicalize(&p.ty).scaled(c)));
            equiv_to(d, &want)
        }
    }
}
