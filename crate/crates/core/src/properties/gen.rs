//! Random well-typed closed terms, built bottom-up from typing rules.

use crate::encodings::{basis_type, identity_type};
use crate::scalar::Scalar;
use crate::syntax::{leaf, Context, Hint, Name, Sort, Term, TyArg, TyVar, Type, UnitType};
use crate::typesys::unify::{open_prefix, unify_unit, zonk_unit, Fresh, Subst};
use crate::typesys::{canonicalize, unit_equiv, CanonicalType, Derivation, Rule};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

#[derive(Clone, Debug, PartialEq)]
pub struct GenConfig {
    pub max_depth: usize,
    pub max_width: usize,
    pub scalars: Vec<Scalar>,
    pub seed: u64,
    pub cases: usize,
    pub fuel: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        let s = |t: &str| crate::scalar::parse_scalar(t).unwrap();
        GenConfig {
            max_depth: 6,
            max_width: 3,
            scalars: ["1", "-1", "2", "1/2", "-1/2", "0", "sqrt2", "1/sqrt2", "-1/sqrt2"].into_iter().map(s).collect(),
            seed: 42,
            cases: 1000,
            fuel: 100_000,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<(), String> {
        let bounds = [("max depth", self.max_depth), ("max width", self.max_width), ("cases", self.cases), ("fuel", self.fuel)];
        for (what, v) in bounds {
            if v == 0 {
                return Err(format!("{what} must be at least 1"));
            }
        }
        if self.scalars.is_empty() {
            return Err("the scalar pool is empty".into());
        }
        Ok(())
    }

    /// The RNG for case `index`: one ChaCha stream per case.
    pub fn rng(&self, index: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        rng
    }
}

/// A generated closed term with the derivation that types it.
#[derive(Clone, Debug)]
pub struct TypedCase {
    pub index: usize,
    pub term: Term,
    pub ty: Type,
    pub derivation: Derivation,
}

/// Nesting depth of term constructors; variables have depth 0.
pub fn term_depth(t: &Term) -> usize {
    match t {
        Term::Bound(_) | Term::Free(_) => 0,
        Term::Abs(_, _, b) => 1 + term_depth(b),
        Term::App(f, a) => 1 + term_depth(f).max(term_depth(a)),
        Term::Scale(_, b) => 1 + term_depth(b),
        Term::Sum(items) => 1 + items.iter().map(term_depth).max().unwrap_or(0),
    }
}

/// Case `index` of the corpus described by `cfg`.
pub fn gen_case(cfg: &GenConfig, index: usize) -> TypedCase {
    let d = Generator::new(cfg, index).derivation();
    if let Err(e) = d.validate() {
        panic!("generator produced an invalid derivation for case {index}: {e}");
    }
    TypedCase {
        index,
        term: d.term.clone(),
        ty: d.ty.clone(),
        derivation: d,
    }
}

/// The first `cfg.cases` cases.
pub fn gen_typed(cfg: &GenConfig) -> impl Iterator<Item = TypedCase> + '_ {
    (0..cfg.cases).map(move |i| gen_case(cfg, i))
}

#[derive(Clone, Copy, Debug)]
enum Kind {
    Var,
    Abs,
    Sum,
    Scale,
    App,
}

pub struct Generator {
    rng: ChaCha8Rng,
    depth: usize,
    width: usize,
    scalars: Vec<Scalar>,
    next: usize,
    fresh: Fresh,
}

fn node(ctx: &Context, term: Term, ty: Type, rule: Rule, premises: Vec<Derivation>) -> Derivation {
    Derivation::new(ctx.clone(), term, ty, rule, premises)
}

fn scaled(alpha: &Scalar, t: Type) -> Type {
    if alpha.is_one() {
        t
    } else {
        Type::scale(alpha.clone(), t)
    }
}

/// `∀I` over every summand of an all-unit type.
fn forall_i(d: Derivation, sort: Sort, var: &str) -> Derivation {
    let c = canonicalize(&d.ty);
    let ty = Type::sum(c.units().into_iter().map(|(a, u)| {
        let q = UnitType::Forall(sort, Hint::new(var), Arc::new(u.close(sort, var, 0)));
        scaled(&a, Type::Unit(q))
    }));
    node(&d.ctx.clone(), d.term.clone(), ty, Rule::ForallI { sort, var: var.into() }, vec![d])
}

fn s_rule(ctx: &Context, coeffs: Vec<Scalar>, typings: Vec<Derivation>) -> Derivation {
    let total: Scalar = coeffs.iter().sum();
    let term = Term::scale(total, typings[0].term.clone());
    let ty = Type::sum(coeffs.iter().zip(&typings).map(|(a, d)| Type::scale(a.clone(), d.ty.clone())));
    node(ctx, term, ty, Rule::S { coeffs }, typings)
}

fn sum_i(ctx: &Context, items: Vec<Derivation>) -> Derivation {
    let term = Term::sum(items.iter().map(|d| d.term.clone()));
    let ty = Type::sum(items.iter().map(|d| d.ty.clone()));
    node(ctx, term, ty, Rule::SumI, items)
}

impl Generator {
    pub fn new(cfg: &GenConfig, index: usize) -> Self {
        Generator {
            rng: cfg.rng(index),
            depth: cfg.max_depth,
            width: cfg.max_width.max(2),
            scalars: cfg.scalars.clone(),
            next: 0,
            fresh: Fresh::new(),
        }
    }

    /// A closed derivation of depth at most the configured bound.
    pub fn derivation(&mut self) -> Derivation {
        let depth = self.rng.gen_range(1..=self.depth);
        self.gen(&Context::new(), depth)
    }

    fn name(&mut self, base: &str) -> Name {
        self.next += 1;
        format!("{base}{}", self.next).into()
    }

    fn scalar(&mut self) -> Scalar {
        self.scalars.choose(&mut self.rng).unwrap().clone()
    }

    fn coin(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    fn unit(&mut self, ctx: &Context) -> UnitType {
        let ctx_vars: Vec<Name> = ctx
            .free_type_vars()
            .into_iter()
            .filter(|(s, _)| *s == Sort::Unit)
            .map(|(_, n)| n)
            .collect();
        match self.rng.gen_range(0..8) {
            0 => identity_type(),
            1 => basis_type(self.rng.gen_range(1..=2), 2).unwrap(),
            2 => {
                let x = self.name("A");
                UnitType::arrow(UnitType::var(&x), Type::unit_var(&x))
            }
            3 if !ctx_vars.is_empty() => UnitType::Var(TyVar::Free(ctx_vars.choose(&mut self.rng).unwrap().clone())),
            _ => UnitType::var(&self.name("A")),
        }
    }

    fn feasible(ctx: &Context, d: usize) -> bool {
        d >= 1 || !ctx.is_empty()
    }

    fn gen(&mut self, ctx: &Context, d: usize) -> Derivation {
        let mut kinds = Vec::new();
        if !ctx.is_empty() {
            kinds.push((if d == 0 { 1 } else { 2 }, Kind::Var));
        }
        if d >= 1 {
            kinds.push((3, Kind::Abs));
        }
        if d >= 1 && Self::feasible(ctx, d - 1) {
            kinds.push((2, Kind::Sum));
            kinds.push((2, Kind::Scale));
        }
        if d >= 2 {
            kinds.push((5, Kind::App));
        }
        if kinds.is_empty() {
            return self.abs(ctx, 1);
        }
        let kind = kinds.choose_weighted(&mut self.rng, |k| k.0).unwrap().1;
        let out = match kind {
            Kind::Var => self.var(ctx),
            Kind::Abs => self.abs(ctx, d),
            Kind::Sum => self.sum(ctx, d),
            Kind::Scale => self.scale(ctx, d),
            Kind::App => self.app(ctx, d).unwrap_or_else(|| self.abs(ctx, d)),
        };
        if self.coin(0.1) {
            if let Some(r) = self.retype(&out) {
                return r;
            }
        }
        if self.coin(0.03) {
            let one = s_rule(ctx, vec![Scalar::one()], vec![out.clone()]);
            return node(ctx, out.term.clone(), out.ty.clone(), Rule::OneE, vec![one]);
        }
        out
    }

    fn var(&mut self, ctx: &Context) -> Derivation {
        let (x, u) = ctx.entries().choose(&mut self.rng).unwrap().clone();
        node(ctx, Term::Free(x), Type::Unit(u), Rule::Ax, vec![])
    }

    fn arrow_i(&mut self, ctx: &Context, x: &Name, dom: UnitType, body: Derivation) -> Derivation {
        let ann = if dom.free_vars().is_empty() && self.coin(0.25) { Some(dom.clone()) } else { None };
        let term = Term::Abs(Hint::new("x"), ann, Arc::new(body.term.close(x, 0)));
        let ty = Type::Unit(UnitType::Arrow(Arc::new(dom), Arc::new(body.ty.clone())));
        node(ctx, term, ty, Rule::ArrowI { var: x.clone() }, vec![body])
    }

    /// `∀I` over the variables of `d`'s type that are not free in the context.
    fn generalize(&mut self, ctx: &Context, d: Derivation) -> Derivation {
        let fixed = ctx.free_type_vars();
        let vars: Vec<(Sort, Name)> = d.ty.free_vars_ordered().into_iter().filter(|v| !fixed.contains(v)).collect();
        vars.iter().rev().fold(d, |acc, (s, n)| forall_i(acc, *s, n))
    }

    fn abs(&mut self, ctx: &Context, d: usize) -> Derivation {
        let dom = self.unit(ctx);
        let x = self.name("x");
        let inner = ctx.extend(x.clone(), dom.clone());
        let body = self.gen(&inner, d.saturating_sub(1));
        let f = self.arrow_i(ctx, &x, dom, body);
        if self.coin(0.85) {
            self.generalize(ctx, f)
        } else {
            f
        }
    }

    fn sum(&mut self, ctx: &Context, d: usize) -> Derivation {
        let k = self.rng.gen_range(2..=self.width);
        let items = (0..k).map(|_| self.gen(ctx, d - 1)).collect();
        sum_i(ctx, items)
    }

    /// A second typing of the same term, by instantiating an outer quantifier.
    fn retype(&mut self, d: &Derivation) -> Option<Derivation> {
        let Type::Unit(UnitType::Forall(sort, _, body)) = &d.ty else { return None };
        let arg = match sort {
            Sort::Unit => TyArg::Unit(self.unit(&d.ctx)),
            Sort::General => TyArg::General(Type::Unit(self.unit(&d.ctx))),
        };
        let ty = Type::Unit(body.instantiate(&arg));
        Some(node(&d.ctx, d.term.clone(), ty, Rule::ForallE { arg }, vec![d.clone()]))
    }

    fn scale(&mut self, ctx: &Context, d: usize) -> Derivation {
        let t = self.gen(ctx, d - 1);
        let mut typings = vec![t.clone()];
        if self.coin(0.5) {
            let second = match self.retype(&t) {
                Some(r) if self.coin(0.8) => r,
                _ => t.clone(),
            };
            typings.push(second);
        }
        let coeffs = typings.iter().map(|_| self.scalar()).collect();
        s_rule(ctx, coeffs, typings)
    }

    fn app(&mut self, ctx: &Context, d: usize) -> Option<Derivation> {
        if self.coin(0.55) {
            self.app_abs(ctx, d)
        } else {
            self.app_fun(ctx, d)
        }
    }

    /// `(Σαᵢ·λx.tᵢ) r`, with the abstractions built for the type of `r`.
    fn app_abs(&mut self, ctx: &Context, d: usize) -> Option<Derivation> {
        let r = self.gen(ctx, d - 1);
        let rc = canonicalize(&r.ty);
        if !rc.gvars().is_empty() {
            return None;
        }
        let units = rc.units();
        let dom = if units.len() == 1 && self.coin(0.4) {
            units[0].1.clone()
        } else {
            UnitType::var(&self.name("A"))
        };
        let mut k = if self.coin(0.6) { 1 } else { self.rng.gen_range(2..=self.width) };
        let mut wrap = k > 1 || self.coin(0.5);
        if d < 2 + usize::from(wrap) + usize::from(k > 1) {
            k = 1;
            wrap = false;
        }
        let body_depth = d - 2 - usize::from(wrap) - usize::from(k > 1);
        let mut funs = Vec::new();
        let mut codomains = Vec::new();
        for _ in 0..k {
            let x = self.name("x");
            let body = self.gen(&ctx.extend(x.clone(), dom.clone()), body_depth);
            let f = self.arrow_i(ctx, &x, dom.clone(), body);
            let UnitType::Arrow(_, cod) = f.ty.as_unit().unwrap() else { unreachable!() };
            codomains.push(Type::clone(cod));
            funs.push(f);
        }
        let (f, alphas) = if !wrap {
            (funs.pop().unwrap(), vec![Scalar::one()])
        } else {
            let alphas: Vec<Scalar> = (0..k).map(|_| self.scalar()).collect();
            let parts: Vec<Derivation> = funs.into_iter().zip(&alphas).map(|(f, a)| s_rule(ctx, vec![a.clone()], vec![f])).collect();
            let f = if parts.len() == 1 { parts.into_iter().next().unwrap() } else { sum_i(ctx, parts) };
            (f, alphas)
        };
        let fixed = ctx.free_type_vars();
        let mut binders: Vec<(Sort, Name)> = Vec::new();
        for t in std::iter::once(Type::Unit(dom.clone())).chain(codomains.iter().cloned()) {
            for v in t.free_vars_ordered() {
                if !fixed.contains(&v) && !binders.contains(&v) {
                    binders.push(v);
                }
            }
        }
        let f = binders.iter().rev().fold(f, |acc, (s, n)| forall_i(acc, *s, n));
        let codomains: Vec<(Scalar, Type)> = alphas.into_iter().zip(codomains).collect();
        let mut args = Vec::new();
        for (beta, v) in units {
            args.push((beta, self.instance(&binders, &dom, &v)?));
        }
        Some(self.arrow_e(ctx, f, r, binders, dom, codomains, args))
    }

    /// Instantiation of `binders` taking `dom` to `v`.
    fn instance(&mut self, binders: &[(Sort, Name)], dom: &UnitType, v: &UnitType) -> Option<Vec<TyArg>> {
        let flex: Vec<Name> = binders.iter().map(|_| self.fresh.flex()).collect();
        let pattern = dom.subst_with(&|s, n| {
            binders.iter().position(|(t, m)| *t == s && m == n).map(|i| leaf(s, TyVar::Free(flex[i].clone())))
        });
        let mut subst = Subst::new();
        if !unify_unit(&pattern, v, &mut subst, &self.fresh) {
            return None;
        }
        let mut out = Vec::new();
        for ((s, _), n) in binders.iter().zip(&flex) {
            let arg = match (s, subst.get(n)) {
                (Sort::Unit, Some(TyArg::Unit(u))) => TyArg::Unit(zonk_unit(u, &subst)),
                (Sort::Unit, None) => TyArg::Unit(identity_type()),
                (Sort::General, Some(TyArg::General(t))) => TyArg::General(t.clone()),
                (Sort::General, Some(TyArg::Unit(u))) => TyArg::General(Type::Unit(zonk_unit(u, &subst))),
                (Sort::General, None) => TyArg::General(Type::Unit(identity_type())),
                (Sort::Unit, Some(TyArg::General(_))) => return None,
            };
            if arg.as_type().free_vars().iter().any(|(_, n)| n.starts_with('?')) {
                return None;
            }
            out.push(arg);
        }
        Some(out)
    }

    #[allow(clippy::too_many_arguments)]
    fn arrow_e(
        &mut self,
        ctx: &Context,
        f: Derivation,
        r: Derivation,
        binders: Vec<(Sort, Name)>,
        domain: UnitType,
        codomains: Vec<(Scalar, Type)>,
        args: Vec<(Scalar, Vec<TyArg>)>,
    ) -> Derivation {
        let mut result = CanonicalType::default();
        for (beta, a) in &args {
            for (alpha, t) in &codomains {
                let ti = t.subst_with(&|s, n| binders.iter().position(|(q, m)| *q == s && m == n).map(|i| a[i].clone()));
                result = result.plus(&canonicalize(&ti).scaled(&(alpha * beta)));
            }
        }
        let term = Term::app(f.term.clone(), r.term.clone());
        let rule = Rule::ArrowE { binders, domain, codomains, args };
        node(ctx, term, result.to_type(), rule, vec![f, r])
    }

    /// `(f) r` where `f` is a context variable or a generated function and
    /// `r` is built for the instantiated domain.
    fn app_fun(&mut self, ctx: &Context, d: usize) -> Option<Derivation> {
        let arrows: Vec<(Name, UnitType)> = ctx
            .entries()
            .iter()
            .filter(|(_, u)| matches!(u.quantifiers().1, UnitType::Arrow(..)))
            .cloned()
            .collect();
        let f = if !arrows.is_empty() && self.coin(0.6) {
            let (x, u) = arrows.choose(&mut self.rng).unwrap().clone();
            node(ctx, Term::Free(x), Type::Unit(u), Rule::Ax, vec![])
        } else {
            self.gen(ctx, d - 1)
        };
        let fc = canonicalize(&f.ty);
        let units = fc.units();
        if units.len() != 1 || fc.len() != 1 {
            return None;
        }
        let (alpha, u) = units.into_iter().next().unwrap();
        let (opened, body) = open_prefix(&u, |h| {
            self.next += 1;
            format!("{}{}", h.0, self.next).into()
        });
        let UnitType::Arrow(dom, cod) = body else { return None };
        let binders: Vec<(Sort, Name)> = opened.iter().map(|(s, _, n)| (*s, n.clone())).collect();
        let inst: Vec<TyArg> = binders
            .iter()
            .map(|(s, _)| match s {
                Sort::Unit => TyArg::Unit(self.unit(ctx)),
                Sort::General => TyArg::General(Type::Unit(self.unit(ctx))),
            })
            .collect();
        let goal = Type::Unit((*dom).clone())
            .subst_with(&|s, n| binders.iter().position(|(q, m)| *q == s && m == n).map(|i| inst[i].clone()));
        let r = self.inhabit(ctx, &goal, d - 1)?;
        let (r, beta) = if self.coin(0.3) && term_depth(&r.term) + 2 <= d {
            let beta = self.scalar();
            (s_rule(ctx, vec![beta.clone()], vec![r]), beta)
        } else {
            (r, Scalar::one())
        };
        Some(self.arrow_e(ctx, f, r, binders, (*dom).clone(), vec![(alpha, (*cod).clone())], vec![(beta, inst)]))
    }

    /// Some term of type `goal`, built goal-first.
    fn inhabit(&mut self, ctx: &Context, goal: &Type, d: usize) -> Option<Derivation> {
        let c = canonicalize(goal);
        if !c.gvars().is_empty() {
            return None;
        }
        let units = c.units();
        let wrap = units.len() > 1 || !units[0].0.is_one();
        let inner = d.checked_sub(usize::from(units.len() > 1) + usize::from(wrap))?;
        let mut parts = Vec::new();
        for (g, u) in units.iter() {
            let t = self.inhabit_unit(ctx, u, inner)?;
            parts.push(if wrap { s_rule(ctx, vec![g.clone()], vec![t]) } else { t });
        }
        let out = if parts.len() == 1 { parts.pop().unwrap() } else { sum_i(ctx, parts) };
        Some(out.equiv(goal.clone()))
    }

    fn inhabit_unit(&mut self, ctx: &Context, u: &UnitType, d: usize) -> Option<Derivation> {
        let known: Vec<(Name, UnitType)> = ctx.entries().iter().filter(|(_, w)| unit_equiv(w, u)).cloned().collect();
        if !known.is_empty() && (d == 0 || self.coin(0.7)) {
            let (x, w) = known.choose(&mut self.rng).unwrap().clone();
            return Some(node(ctx, Term::Free(x), Type::Unit(w), Rule::Ax, vec![]).equiv(Type::Unit(u.clone())));
        }
        match u {
            UnitType::Forall(sort, _, body) => {
                let a = self.name("A");
                let opened = body.instantiate(&leaf(*sort, TyVar::Free(a.clone())));
                let inner = self.inhabit_unit(ctx, &opened, d)?;
                Some(forall_i(inner, *sort, &a).equiv(Type::Unit(u.clone())))
            }
            UnitType::Arrow(dom, cod) if d >= 1 => {
                let x = self.name("x");
                let body = self.inhabit(&ctx.extend(x.clone(), (**dom).clone()), cod, d - 1)?;
                Some(self.arrow_i(ctx, &x, (**dom).clone(), body))
            }
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rewrite::step_candidates;
    use std::collections::BTreeMap;

    #[test]
    fn every_generated_derivation_validates() {
        let cfg = GenConfig { cases: 400, ..GenConfig::default() };
        for i in 0..cfg.cases {
            let d = Generator::new(&cfg, i).derivation();
            if let Err(e) = d.validate() {
                panic!("case {i}: {e}\n{}", d.render(&crate::syntax::Printer::default()));
            }
            assert!(d.term.is_closed() && d.ctx.is_empty());
            assert!(term_depth(&d.term) <= cfg.max_depth, "case {i}: {}", d.term);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let cfg = GenConfig::default();
        for i in 0..50 {
            let a = gen_case(&cfg, i);
            let b = gen_case(&cfg, i);
            assert_eq!(a.term, b.term);
            assert_eq!(a.ty, b.ty);
        }
    }

    #[test]
    fn corpus_exercises_every_rule_and_has_redexes() {
        let cfg = GenConfig { cases: 300, ..GenConfig::default() };
        let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
        let mut reducible = 0;
        for case in gen_typed(&cfg) {
            for r in case.derivation.rules() {
                *seen.entry(r).or_default() += 1;
            }
            if !step_candidates(&case.term).is_empty() {
                reducible += 1;
            }
        }
        for rule in ["ax", "->I", "->E", "+I", "S", "forall-I", "forall-E", "1E"] {
            assert!(seen.contains_key(rule), "{rule} never used: {seen:?}");
        }
        assert!(reducible > cfg.cases / 3, "only {reducible} reducible terms");
    }
}
