//! Type inference for the synthesizing direction.
//!
//! Unannotated binders receive flexible unit variables; a maximal chain of
//! abstractions is generalized over every variable not free in the context.
//! Applications follow the shape of the arrow-elimination rule: the
//! function's summands share one domain, and each argument summand picks its
//! own instantiation of the function's quantifiers.

use crate::scalar::Scalar;
use crate::syntax::{leaf, Context, Hint, Name, Sort, Term, TyArg, TyVar, Type, UnitType};
use crate::typesys::canon::{canonicalize, CanonicalType, Class};
use crate::typesys::unify::{
    close_over, is_flex, open_prefix, unify_unit, zonk_canon, zonk_type, zonk_unit, Fresh, Opened, Subst,
};
use crate::typesys::TypeError;
use std::collections::BTreeSet;
use std::sync::Arc;

/// A function type in the form `Σαᵢ·∀X⃗.(U→Tᵢ)`, opened at template names.
#[derive(Clone, Debug)]
pub(crate) struct Shape {
    pub binders: Vec<Opened>,
    pub domain: UnitType,
    pub codomains: Vec<(Scalar, Type)>,
}

/// An arrow elimination with one instantiation per argument summand.
#[derive(Clone, Debug)]
pub(crate) struct AppPlan {
    pub shape: Shape,
    pub args: Vec<(Scalar, Vec<TyArg>)>,
    pub result: CanonicalType,
}

const LETTERS: [&str; 6] = ["X", "Y", "Z", "W", "V", "U"];

fn no_derivation(obligation: String) -> TypeError {
    TypeError::NoDerivation { obligation }
}

pub(crate) fn inst_names(t: &Type, binders: &[Opened], args: &[TyArg]) -> Type {
    t.subst_with(&|sort, n| binders.iter().position(|(s, _, m)| *s == sort && m == n).map(|i| args[i].clone()))
}

pub(crate) struct Infer<'a> {
    pub fresh: &'a Fresh,
    pub subst: Subst,
}

impl<'a> Infer<'a> {
    pub fn new(fresh: &'a Fresh) -> Self {
        Infer { fresh, subst: Subst::new() }
    }

    pub fn zonk(&self, c: &CanonicalType) -> CanonicalType {
        zonk_canon(c, &self.subst)
    }

    pub fn term(&mut self, ctx: &Context, t: &Term) -> Result<CanonicalType, TypeError> {
        match t {
            Term::Free(x) => {
                let u = ctx.lookup(x).ok_or_else(|| TypeError::UnboundVariable(x.clone()))?;
                Ok(CanonicalType::unit(zonk_unit(u, &self.subst)))
            }
            Term::Bound(_) => Err(no_derivation(format!("{t} is not locally closed"))),
            Term::Abs(..) => {
                let u = self.abs(ctx, t)?;
                Ok(CanonicalType::unit(self.generalize(ctx, &u)))
            }
            Term::App(f, r) => {
                let ft = self.term(ctx, f)?;
                let rt = self.term(ctx, r)?;
                let shape = self.shape(&ft).map_err(|why| no_derivation(format!("{f} : {}: {why}", self.zonk(&ft))))?;
                let plan = self
                    .apply(&shape, &rt)
                    .map_err(|why| no_derivation(format!("({f}) {r}: {why}")))?;
                Ok(self.zonk(&plan.result))
            }
            Term::Scale(alpha, inner) => Ok(self.term(ctx, inner)?.scaled(alpha)),
            Term::Sum(items) => {
                let mut out = CanonicalType::default();
                for item in items {
                    out = out.plus(&self.term(ctx, item)?);
                }
                Ok(out)
            }
        }
    }

    /// Types a chain of abstractions without generalizing inside it.
    fn abs(&mut self, ctx: &Context, t: &Term) -> Result<UnitType, TypeError> {
        let Term::Abs(h, ann, body) = t else { unreachable!() };
        let dom = match ann {
            Some(u) => u.clone(),
            None => UnitType::Var(TyVar::Free(self.fresh.flex())),
        };
        let x = self.fresh.rigid(&h.0);
        let inner = ctx.extend(x.clone(), dom.clone());
        let opened = body.instantiate(&Term::Free(x));
        let cod = if opened.is_abs() {
            Type::Unit(self.abs(&inner, &opened)?)
        } else {
            self.term(&inner, &opened)?.to_type()
        };
        Ok(zonk_unit(&UnitType::Arrow(Arc::new(dom), Arc::new(cod)), &self.subst))
    }

    /// Quantifies over the variables of `u` not free in the context.
    pub fn generalize(&self, ctx: &Context, u: &UnitType) -> UnitType {
        let u = zonk_unit(u, &self.subst);
        let mut fixed = BTreeSet::new();
        for (_, w) in ctx.entries() {
            fixed.extend(zonk_unit(w, &self.subst).free_vars());
        }
        let mut letters = 0;
        let binders: Vec<Opened> = u
            .free_vars_ordered()
            .into_iter()
            .filter(|v| !fixed.contains(v))
            .map(|(sort, n)| {
                let hint = if is_flex(&n) {
                    letters += 1;
                    LETTERS[(letters - 1) % LETTERS.len()].to_string()
                } else {
                    n.split('#').next().unwrap_or("X").to_string()
                };
                (sort, Hint::new(&hint), n)
            })
            .collect();
        close_over(&binders, u)
    }

    /// Brings a function type into arrow-elimination form.
    pub fn shape(&mut self, f: &CanonicalType) -> Result<Shape, String> {
        let f = self.zonk(f);
        let mut templates = Vec::new();
        let mut arrows = Vec::new();
        for (class, alpha) in f.entries() {
            let Class::Unit(u) = class else { return Err(format!("{} is not a function type", class.to_type())) };
            let (bs, body) = open_prefix(u, |_| self.fresh.flex());
            templates.extend(bs);
            let body = match body {
                UnitType::Var(TyVar::Free(n)) if is_flex(&n) => {
                    let arrow = UnitType::arrow(UnitType::Var(TyVar::Free(self.fresh.flex())), Type::GVar(TyVar::Free(self.fresh.flex())));
                    self.subst.insert(n, TyArg::Unit(arrow.clone()));
                    arrow
                }
                other => other,
            };
            let UnitType::Arrow(d, c) = body else { return Err(format!("{} is not a function type", class.to_type())) };
            arrows.push((alpha.clone(), (*d).clone(), (*c).clone()));
        }
        let domain = arrows[0].1.clone();
        for (_, d, _) in &arrows[1..] {
            if !unify_unit(&domain, d, &mut self.subst, self.fresh) {
                return Err("the function summands have different domains".into());
            }
        }
        let domain = zonk_unit(&domain, &self.subst);
        let codomains: Vec<(Scalar, Type)> = arrows.iter().map(|(a, _, c)| (a.clone(), zonk_type(c, &self.subst))).collect();
        let mut occurring = domain.free_vars();
        for (_, c) in &codomains {
            occurring.extend(c.free_vars());
        }
        let binders = templates
            .into_iter()
            .filter(|(s, _, n)| !self.subst.contains_key(n) && occurring.contains(&(*s, n.clone())))
            .collect();
        Ok(Shape { binders, domain, codomains })
    }

    /// Matches each argument summand against the domain.
    pub fn apply(&mut self, shape: &Shape, r: &CanonicalType) -> Result<AppPlan, String> {
        let r = self.zonk(r);
        let mut args = Vec::new();
        let mut result = CanonicalType::default();
        for (class, beta) in r.entries() {
            let Class::Unit(v) = class else { return Err(format!("argument summand {} is not a unit type", class.to_type())) };
            let copies: Vec<TyArg> = shape.binders.iter().map(|(s, _, _)| leaf(*s, TyVar::Free(self.fresh.flex()))).collect();
            let dom = inst_names(&Type::Unit(shape.domain.clone()), &shape.binders, &copies);
            let Type::Unit(dom) = dom else { unreachable!() };
            let mut trial = self.subst.clone();
            let mut ok = unify_unit(&dom, v, &mut trial, self.fresh);
            if !ok {
                let (_, body) = open_prefix(v, |_| self.fresh.flex());
                trial = self.subst.clone();
                ok = unify_unit(&dom, &body, &mut trial, self.fresh);
            }
            if !ok {
                return Err(format!("argument type {v} does not fit the domain {}", shape.domain));
            }
            self.subst = trial;
            for (alpha, t) in &shape.codomains {
                let ti = canonicalize(&inst_names(t, &shape.binders, &copies));
                result = result.plus(&ti.scaled(&(alpha * beta)));
            }
            args.push((beta.clone(), copies));
        }
        Ok(AppPlan {
            shape: shape.clone(),
            args,
            result,
        })
    }
}

/// Replaces leftover flexible variables by fresh rigid ones.
pub(crate) fn default_flex(types: &[Type], s: &mut Subst, fresh: &Fresh) {
    for t in types {
        for (sort, n) in zonk_type(t, s).free_vars_ordered() {
            if is_flex(&n) && !s.contains_key(&n) {
                let hint = match sort {
                    Sort::Unit => "T",
                    Sort::General => "G",
                };
                s.insert(n, leaf(sort, TyVar::Free(fresh.rigid(hint))));
            }
        }
    }
}

pub(crate) fn flex_free(t: &Type) -> bool {
    t.free_vars().iter().all(|(_, n): &(Sort, Name)| !is_flex(n))
}
