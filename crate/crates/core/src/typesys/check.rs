//! Goal-directed checking.
//!
//! The term is flattened into a tree of sums and scalings over atoms
//! (variables, abstractions, applications). Each atom gets a list of
//! options: a derivation typing it with a combination of goal summands.
//! Exact linear algebra then distributes every atom's multiplier over its
//! options so the summands add up to the goal, and the tree is rebuilt
//! bottom-up with `S`, `1E` and `+I`.

use crate::scalar::Scalar;
use crate::syntax::{leaf, Context, Name, Sort, Term, TyArg, TyVar, Type, UnitType};
use crate::typesys::canon::{canonicalize, norm_unit, CanonicalType, Class};
use crate::typesys::derivation::{Derivation, Rule};
use crate::typesys::infer::{default_flex, flex_free, inst_names, AppPlan, Infer, Shape};
use crate::typesys::linsolve::solve;
use crate::typesys::unify::{
    close_over, is_flex, match_instance, nest_unit, open_prefix, unify_class, zonk_canon, zonk_type, zonk_unit, Fresh, Instance,
    Opened, Subst,
};
use crate::typesys::TypeError;
use std::cell::{Cell, RefCell};
use rustc_hash::FxHashMap;
use std::collections::BTreeSet;
use std::sync::Arc;

/// Default number of search steps before giving up.
pub const DEFAULT_BUDGET: usize = 200_000;

/// Cap on goal assignments tried for one application.
const ASSIGNMENT_LIMIT: usize = 16;
const CODOMAIN_ASSIGNMENTS: usize = 24;

enum Kind {
    Atom(usize),
    Scale(Scalar, Box<Node>),
    Sum(Vec<Node>),
}

struct Node {
    term: Term,
    kind: Kind,
}

#[derive(Clone)]
struct Opt {
    block: CanonicalType,
    deriv: Derivation,
}

type MemoKey = (Context, Term, CanonicalType);

pub struct Checker {
    fresh: Fresh,
    budget: Cell<usize>,
    memo: RefCell<FxHashMap<MemoKey, Result<Derivation, TypeError>>>,
}

impl Default for Checker {
    fn default() -> Self {
        Checker::new()
    }
}

fn flatten(t: &Term, atoms: &mut Vec<Term>) -> Node {
    let kind = match t {
        Term::Scale(alpha, inner) => Kind::Scale(alpha.clone(), Box::new(flatten(inner, atoms))),
        Term::Sum(items) => Kind::Sum(items.iter().map(|i| flatten(i, atoms)).collect()),
        _ => {
            atoms.push(t.clone());
            Kind::Atom(atoms.len() - 1)
        }
    };
    Node { term: t.clone(), kind }
}

/// Multiplier of every atom below `node`, relative to `node`.
fn rho(node: &Node, out: &mut Vec<(usize, Scalar)>) {
    match &node.kind {
        Kind::Atom(k) => out.push((*k, Scalar::one())),
        Kind::Scale(alpha, child) => {
            let start = out.len();
            rho(child, out);
            for entry in &mut out[start..] {
                entry.1 = alpha * &entry.1;
            }
        }
        Kind::Sum(children) => children.iter().for_each(|c| rho(c, out)),
    }
}

fn scaled_unit(c: &Scalar, u: &UnitType) -> Type {
    if c.is_one() {
        Type::Unit(u.clone())
    } else {
        Type::scale(c.clone(), Type::Unit(u.clone()))
    }
}

/// Applies `∀E` for each eliminated quantifier, then `∀I` over the
/// reintroduced ones, to a derivation of `c·w`.
fn forall_chain(mut d: Derivation, c: &Scalar, w: &UnitType, inst: &Instance) -> Derivation {
    let mut cur = w.clone();
    for arg in &inst.elim {
        let UnitType::Forall(_, _, body) = &cur else { unreachable!("fewer quantifiers than instantiations") };
        cur = body.instantiate(arg);
        let (ctx, term) = (d.ctx.clone(), d.term.clone());
        d = Derivation::new(ctx, term, scaled_unit(c, &cur), Rule::ForallE { arg: arg.clone() }, vec![d]);
    }
    for (sort, h, n) in inst.intro.iter().rev() {
        cur = UnitType::Forall(*sort, h.clone(), Arc::new(cur.close(*sort, n, 0)));
        let (ctx, term) = (d.ctx.clone(), d.term.clone());
        let rule = Rule::ForallI { sort: *sort, var: n.clone() };
        d = Derivation::new(ctx, term, scaled_unit(c, &cur), rule, vec![d]);
    }
    d
}

fn within(block: &CanonicalType, goal: &CanonicalType) -> bool {
    block.classes().all(|c| goal.coeff(c).is_some())
}

fn no_derivation(obligation: String) -> TypeError {
    TypeError::NoDerivation { obligation }
}

fn single_flex_gen(c: &CanonicalType) -> Option<(Scalar, Name)> {
    match c.entries().next() {
        Some((Class::Gen(TyVar::Free(n)), k)) if c.len() == 1 && is_flex(n) => Some((k.clone(), n.clone())),
        _ => None,
    }
}

impl Checker {
    pub fn new() -> Self {
        Checker::with_budget(DEFAULT_BUDGET)
    }

    pub fn with_budget(budget: usize) -> Self {
        Checker {
            fresh: Fresh::new(),
            budget: Cell::new(budget),
            memo: RefCell::new(FxHashMap::default()),
        }
    }

    /// Search steps left.
    pub fn remaining(&self) -> usize {
        self.budget.get()
    }

    /// Continues an existing name supply, so names already handed out
    /// cannot be reused.
    pub(crate) fn with_fresh(fresh: Fresh) -> Self {
        let mut c = Checker::new();
        c.fresh = fresh;
        c
    }

    fn tick(&self) -> Result<(), TypeError> {
        match self.budget.get() {
            0 => Err(TypeError::SearchBudgetExceeded),
            n => {
                self.budget.set(n - 1);
                Ok(())
            }
        }
    }

    /// Checks and validates `Γ ⊢ t : T`.
    pub fn check_type(&self, ctx: &Context, t: &Term, ty: &Type) -> Result<Derivation, TypeError> {
        let goal = canonicalize(ty);
        let d = self.check(ctx, t, &goal)?.equiv(ty.clone());
        match d.validate() {
            Ok(()) => Ok(d),
            Err(bad) => Err(no_derivation(format!("internal: produced derivation does not replay ({bad})"))),
        }
    }

    pub(crate) fn check(&self, ctx: &Context, t: &Term, goal: &CanonicalType) -> Result<Derivation, TypeError> {
        let key = (ctx.clone(), t.clone(), goal.clone());
        if let Some(hit) = self.memo.borrow().get(&key) {
            return hit.clone();
        }
        let out = self.check_uncached(ctx, t, goal);
        self.memo.borrow_mut().insert(key, out.clone());
        out
    }

    fn check_uncached(&self, ctx: &Context, t: &Term, goal: &CanonicalType) -> Result<Derivation, TypeError> {
        self.tick()?;
        let obligation = |why: &str| no_derivation(format!("{} : {goal}: {why}", t));
        if goal.is_empty() {
            return Err(obligation("empty goal"));
        }
        let mut atoms = Vec::new();
        let root = flatten(t, &mut atoms);
        let mut mult = Vec::new();
        rho(&root, &mut mult);
        mult.sort_by_key(|(k, _)| *k);
        let mult: Vec<Scalar> = mult.into_iter().map(|(_, m)| m).collect();

        let mut options: Vec<Vec<Opt>> = Vec::new();
        for (k, atom) in atoms.iter().enumerate() {
            let mut reasons = Vec::new();
            let mut opts = self.atom_options(ctx, atom, goal, &mult[k], &mut reasons)?;
            let mut seen = BTreeSet::new();
            opts.retain(|o| within(&o.block, goal) && seen.insert(o.block.clone()));
            if opts.is_empty() {
                let why = match reasons.first() {
                    Some(r) => format!("no summand fits {atom} ({r})"),
                    None => format!("no summand fits {atom}"),
                };
                return Err(obligation(&why));
            }
            options.push(opts);
        }

        // Unknowns: one weight per (atom, option).
        let index: Vec<(usize, usize)> =
            options.iter().enumerate().flat_map(|(k, os)| (0..os.len()).map(move |o| (k, o))).collect();
        let classes: Vec<&Class> = goal.classes().collect();
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for (k, m) in mult.iter().enumerate() {
            rows.push(index.iter().map(|(a, _)| if *a == k { Scalar::one() } else { Scalar::zero() }).collect());
            rhs.push(m.clone());
        }
        for class in &classes {
            rows.push(
                index
                    .iter()
                    .map(|(k, o)| options[*k][*o].block.coeff(class).cloned().unwrap_or_else(Scalar::zero))
                    .collect(),
            );
            rhs.push(goal.coeff(class).unwrap().clone());
        }
        let x = solve(rows, rhs, index.len()).ok_or_else(|| obligation("the summand coefficients cannot be matched"))?;

        let mut weights: Vec<Vec<Scalar>> = options.iter().map(|os| vec![Scalar::zero(); os.len()]).collect();
        let mut used: Vec<Vec<usize>> = vec![Vec::new(); atoms.len()];
        for ((k, o), v) in index.iter().zip(x) {
            if !v.is_zero() {
                used[*k].push(*o);
            }
            weights[*k][*o] = v;
        }
        for u in used.iter_mut() {
            if u.is_empty() {
                u.push(0);
            }
        }
        // Every goal summand must appear in some used option, even at weight 0.
        for class in &classes {
            let covered = |used: &Vec<Vec<usize>>| {
                used.iter().enumerate().any(|(k, os)| os.iter().any(|o| options[k][*o].block.coeff(class).is_some()))
            };
            if covered(&used) {
                continue;
            }
            let extra = index.iter().find(|(k, o)| options[*k][*o].block.coeff(class).is_some());
            match extra {
                Some((k, o)) => used[*k].push(*o),
                None => return Err(obligation(&format!("nothing produces the summand {}", class.to_type()))),
            }
        }
        let plan = Plan {
            options: &options,
            used: &used,
        };
        let (d, _) = plan.derive(&root, &weights);
        Ok(d.equiv(goal.to_type()))
    }

    fn atom_options(
        &self,
        ctx: &Context,
        atom: &Term,
        goal: &CanonicalType,
        mult: &Scalar,
        reasons: &mut Vec<String>,
    ) -> Result<Vec<Opt>, TypeError> {
        let mut out = Vec::new();
        let units: Vec<&UnitType> = goal.classes().filter_map(Class::as_unit).collect();
        match atom {
            Term::Free(x) => {
                let w = ctx.lookup(x).ok_or_else(|| TypeError::UnboundVariable(x.clone()))?;
                for g in units {
                    self.tick()?;
                    if let Some(inst) = match_instance(w, g, &self.fresh) {
                        let ax = Derivation::new(ctx.clone(), atom.clone(), Type::Unit(w.clone()), Rule::Ax, vec![]);
                        let d = forall_chain(ax, &Scalar::one(), w, &inst);
                        out.push(Opt {
                            block: CanonicalType::unit(g.clone()),
                            deriv: d,
                        });
                    }
                }
                if out.is_empty() {
                    reasons.push(format!("{x} : {w}"));
                }
            }
            Term::Abs(h, _, body) => {
                for g in units {
                    self.tick()?;
                    let (intro, opened) = open_prefix(g, |h| self.fresh.rigid(&h.0));
                    let UnitType::Arrow(dom, cod) = &opened else { continue };
                    let x = self.fresh.rigid(&h.0);
                    let inner = ctx.extend(x.clone(), (**dom).clone());
                    let body_t = body.instantiate(&Term::Free(x.clone()));
                    match self.check(&inner, &body_t, &canonicalize(cod)) {
                        Ok(sub) => {
                            let sub = sub.equiv((**cod).clone());
                            let arrow = Derivation::new(ctx.clone(), atom.clone(), Type::Unit(opened.clone()), Rule::ArrowI { var: x }, vec![sub]);
                            let inst = Instance { elim: vec![], intro };
                            out.push(Opt {
                                block: CanonicalType::unit(g.clone()),
                                deriv: forall_chain(arrow, &Scalar::one(), &opened, &inst),
                            });
                        }
                        Err(TypeError::SearchBudgetExceeded) => return Err(TypeError::SearchBudgetExceeded),
                        Err(TypeError::UnboundVariable(v)) => return Err(TypeError::UnboundVariable(v)),
                        Err(e) => reasons.push(e.to_string()),
                    }
                }
            }
            Term::App(f, r) => {
                self.app_options(ctx, atom, f, r, goal, mult, &mut out, reasons)?;
                // Quantified summands: introduce the binders first, then type
                // the application against the opened body.
                for g in units {
                    if !matches!(g, UnitType::Forall(..)) || mult.is_zero() {
                        continue;
                    }
                    let c = goal.coeff(&Class::Unit(g.clone())).unwrap() / mult;
                    let (intro, opened) = open_prefix(g, |h| self.fresh.rigid(&h.0));
                    let inner = canonicalize(&scaled_unit(&c, &opened));
                    match self.check(ctx, atom, &inner) {
                        Ok(sub) => {
                            let sub = sub.equiv(scaled_unit(&c, &opened));
                            let inst = Instance { elim: vec![], intro };
                            out.push(Opt {
                                block: CanonicalType::unit(g.clone()).scaled(&c),
                                deriv: forall_chain(sub, &c, &opened, &inst),
                            });
                        }
                        Err(e @ (TypeError::SearchBudgetExceeded | TypeError::UnboundVariable(_))) => return Err(e),
                        Err(e) => reasons.push(e.to_string()),
                    }
                }
            }
            _ => reasons.push(format!("{atom} is not locally closed")),
        }
        Ok(out)
    }

    #[allow(clippy::too_many_arguments)]
    fn app_options(
        &self,
        ctx: &Context,
        atom: &Term,
        f: &Term,
        r: &Term,
        goal: &CanonicalType,
        mult: &Scalar,
        out: &mut Vec<Opt>,
        reasons: &mut Vec<String>,
    ) -> Result<(), TypeError> {
        self.tick()?;
        // The function typed at the argument's own type, straight into a goal
        // summand. This also covers functions inference cannot handle.
        let mut arg_inf = Infer::new(&self.fresh);
        if let Ok(rt) = arg_inf.term(ctx, r) {
            let rt = arg_inf.zonk(&rt);
            if let [(Class::Unit(d), beta)] = rt.entries().collect::<Vec<_>>()[..] {
                for g in goal.classes() {
                    let plan = AppPlan {
                        shape: Shape { binders: Vec::new(), domain: d.clone(), codomains: vec![(Scalar::one(), g.to_type())] },
                        args: vec![(beta.clone(), Vec::new())],
                        result: CanonicalType::single(g.clone(), beta.clone()),
                    };
                    self.app_candidates(ctx, atom, f, r, goal, mult, &plan, arg_inf.subst.clone(), out, reasons)?;
                }
            }
        }
        let mut inf = Infer::new(&self.fresh);
        let shape = match inf.term(ctx, f) {
            Ok(ft) => inf.shape(&ft),
            Err(e @ (TypeError::SearchBudgetExceeded | TypeError::UnboundVariable(_))) => return Err(e),
            Err(e) => {
                reasons.push(e.to_string());
                return Ok(());
            }
        };
        let shape = match shape {
            Ok(shape) => shape,
            Err(why) => {
                reasons.push(format!("{f}: {why}"));
                return Ok(());
            }
        };
        let after_shape = inf.subst.clone();

        // Argument-first: infer the argument and match it against the domain.
        let mut plans: Vec<(AppPlan, Subst)> = Vec::new();
        match inf.term(ctx, r) {
            Ok(rt) => {
                let rt = inf.zonk(&rt);
                let after_arg = inf.subst.clone();
                let nested = CanonicalType::from_entries(rt.entries().map(|(c, k)| match c {
                    Class::Unit(u) => (Class::Unit(norm_unit(&nest_unit(u, &self.fresh))), k.clone()),
                    other => (other.clone(), k.clone()),
                }));
                let variants = if nested != rt { vec![rt, nested] } else { vec![rt] };
                for v in variants {
                    inf.subst = after_arg.clone();
                    match inf.apply(&shape, &v) {
                        Ok(plan) => plans.push((plan, inf.subst.clone())),
                        Err(why) => reasons.push(format!("{atom}: {why}")),
                    }
                }
            }
            Err(e @ (TypeError::SearchBudgetExceeded | TypeError::UnboundVariable(_))) => return Err(e),
            Err(e) => reasons.push(e.to_string()),
        }
        // Function-first: one instantiation for the whole argument, fixed by
        // the goal; the argument is then checked against it.
        let mut arg_atoms = Vec::new();
        let mut arg_mult = Vec::new();
        rho(&flatten(r, &mut arg_atoms), &mut arg_mult);
        let beta: Scalar = arg_mult.iter().map(|(_, m)| m).sum();
        let copies: Vec<TyArg> = shape.binders.iter().map(|(s, _, _)| leaf(*s, TyVar::Free(self.fresh.flex()))).collect();
        let mut lazy = CanonicalType::default();
        for (alpha, t) in &shape.codomains {
            lazy = lazy.plus(&canonicalize(&inst_names(t, &shape.binders, &copies)).scaled(&(alpha * &beta)));
        }
        let lazy_plan = AppPlan {
            shape: shape.clone(),
            args: vec![(beta.clone(), copies)],
            result: lazy,
        };
        plans.push((lazy_plan, after_shape.clone()));
        // Quantifiers the argument cannot fix may sit inside the codomains.
        for k in 0..plans.len() {
            let (plan, base) = &plans[k];
            if let Some((shape, kept)) = nest(&plan.shape) {
                let args: Vec<(Scalar, Vec<TyArg>)> =
                    plan.args.iter().map(|(b, a)| (b.clone(), kept.iter().map(|&i| a[i].clone()).collect())).collect();
                let mut result = CanonicalType::default();
                for (beta, a) in &args {
                    for (alpha, t) in &shape.codomains {
                        result = result.plus(&canonicalize(&inst_names(t, &shape.binders, a)).scaled(&(alpha * beta)));
                    }
                }
                let base = base.clone();
                plans.push((AppPlan { shape, args, result }, base));
            }
        }

        // Codomains read off the goal, keeping each plan's instantiation.
        // A codomain that unifies with its target also fixes the binders it
        // mentions.
        let targets: Vec<&Class> = goal.classes().collect();
        let mut extra = Vec::new();
        for (plan, base) in &plans {
            let items: Vec<(usize, Class, Scalar)> = plan
                .shape
                .codomains
                .iter()
                .enumerate()
                .flat_map(|(i, (_, t))| canonicalize(t).entries().map(move |(c, k)| (i, c.clone(), k.clone())).collect::<Vec<_>>())
                .collect();
            let mut picks = Vec::new();
            self.goal_picks(plan, &items, &targets, base.clone(), &mut Vec::new(), &mut picks);
            for (pick, s) in picks {
                self.codomains_from_goal(plan, &items, s, &targets, &pick, goal, mult, &mut extra);
            }
        }
        if let [(alpha, cod)] = shape.codomains.as_slice() {
            // The argument spread over every goal summand the codomain reaches.
            let k = alpha * mult;
            if !k.is_zero() {
                let mut s = after_shape.clone();
                let mut args = Vec::new();
                let mut result = CanonicalType::default();
                for (g, gamma) in goal.entries() {
                    let copies: Vec<TyArg> =
                        shape.binders.iter().map(|(s, _, _)| leaf(*s, TyVar::Free(self.fresh.flex()))).collect();
                    let c = canonicalize(&inst_names(cod, &shape.binders, &copies));
                    let [(class, kappa)] = c.entries().collect::<Vec<_>>()[..] else { continue };
                    if kappa.is_zero() {
                        continue;
                    }
                    let mut trial = s.clone();
                    if unify_class(class, g, &mut trial, &self.fresh) {
                        s = trial;
                        let share = gamma / &(&k * kappa);
                        result = result.plus(&CanonicalType::single(g.clone(), gamma / mult));
                        args.push((share, copies));
                    }
                }
                if args.len() > 1 {
                    extra.push((AppPlan { shape: shape.clone(), args, result }, s));
                }
            }
        }
        // Each argument summand at its own instantiation, fixed by sending
        // every codomain summand to a goal summand it unifies with.
        let mut shapes = vec![shape.clone()];
        shapes.extend(nest(&shape).map(|(s, _)| s));
        for sh in &shapes {
            self.summand_plans(ctx, sh, &after_shape, r, goal, &targets, &mut extra);
        }
        plans.extend(extra);

        for (plan, base) in plans {
            self.app_candidates(ctx, atom, f, r, goal, mult, &plan, base, out, reasons)?;
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn summand_plans(
        &self,
        ctx: &Context,
        shape: &Shape,
        base: &Subst,
        r: &Term,
        goal: &CanonicalType,
        targets: &[&Class],
        out: &mut Vec<(AppPlan, Subst)>,
    ) {
        let mut atoms = Vec::new();
        let mut mults = Vec::new();
        rho(&flatten(r, &mut atoms), &mut mults);
        let mut summands = Vec::new();
        for (k, m) in &mults {
            let atom = &atoms[*k];
            let mut inf = Infer::new(&self.fresh);
            inf.subst = base.clone();
            let own = inf.term(ctx, atom).ok().map(|t| inf.zonk(&t));
            let weight = match (atom, &own) {
                (Term::App(..), Some(t)) => t.entries().map(|(_, c)| c).sum(),
                _ => Scalar::one(),
            };
            let own = own.and_then(|t| match t.entries().collect::<Vec<_>>()[..] {
                [(c @ Class::Unit(_), _)] => Some(c.clone()),
                _ => None,
            });
            summands.push((m * &weight, own));
        }
        let items: Vec<(Scalar, Class, Scalar)> = shape
            .codomains
            .iter()
            .flat_map(|(a, t)| canonicalize(t).entries().map(|(c, k)| (a.clone(), c.clone(), k.clone())).collect::<Vec<_>>())
            .collect();
        if items.is_empty() || summands.is_empty() {
            return;
        }
        let start = out.len();
        let mut picked = Vec::new();
        self.summand_dfs(shape, &summands, &items, targets, goal, base.clone(), &mut picked, start, out);
    }

    #[allow(clippy::too_many_arguments)]
    fn summand_dfs(
        &self,
        shape: &Shape,
        summands: &[(Scalar, Option<Class>)],
        items: &[(Scalar, Class, Scalar)],
        targets: &[&Class],
        goal: &CanonicalType,
        s: Subst,
        picked: &mut Vec<(Vec<TyArg>, Vec<usize>)>,
        start: usize,
        out: &mut Vec<(AppPlan, Subst)>,
    ) {
        if out.len() - start >= CODOMAIN_ASSIGNMENTS {
            return;
        }
        let Some((_, own)) = summands.get(picked.len()) else {
            let mut result = CanonicalType::default();
            let mut args = Vec::new();
            for ((w, _), (copies, pick)) in summands.iter().zip(picked.iter()) {
                for ((alpha, _, kappa), &t) in items.iter().zip(pick) {
                    result = result.plus(&CanonicalType::single(targets[t].clone(), &(alpha * kappa) * w));
                }
                args.push((w.clone(), copies.clone()));
            }
            let mut s = s;
            self.zero_cover(shape, items, goal, &mut s, &mut args, &mut result);
            out.push((AppPlan { shape: shape.clone(), args, result }, s));
            return;
        };
        let copies: Vec<TyArg> = shape.binders.iter().map(|(s, _, _)| leaf(*s, TyVar::Free(self.fresh.flex()))).collect();
        let mut starts = Vec::new();
        if let Some(own) = own {
            let dom = canonicalize(&inst_names(&Type::Unit(shape.domain.clone()), &shape.binders, &copies));
            if let [(d, _)] = dom.entries().collect::<Vec<_>>()[..] {
                let mut trial = s.clone();
                if unify_class(d, own, &mut trial, &self.fresh) {
                    starts.push(trial);
                }
            }
        }
        starts.push(s);
        for s in starts {
            let mut pick = Vec::new();
            self.item_dfs(shape, summands, items, targets, goal, &copies, s, &mut pick, picked, start, out);
        }
    }

    /// Zero-weight instantiations for goal summands with coefficient zero
    /// that `result` does not reach yet.
    fn zero_cover(
        &self,
        shape: &Shape,
        items: &[(Scalar, Class, Scalar)],
        goal: &CanonicalType,
        s: &mut Subst,
        args: &mut Vec<(Scalar, Vec<TyArg>)>,
        result: &mut CanonicalType,
    ) {
        let zeros: Vec<&Class> = goal.entries().filter(|(_, c)| c.is_zero()).map(|(g, _)| g).collect();
        for m in &zeros {
            if zonk_canon(result, s).coeff(m).is_some() {
                continue;
            }
            let copies: Vec<TyArg> = shape.binders.iter().map(|(s, _, _)| leaf(*s, TyVar::Free(self.fresh.flex()))).collect();
            let mut trial = s.clone();
            let mut landed = Vec::new();
            let mut hit = false;
            for (_, class, _) in items {
                let own = canonicalize(&inst_names(&class.to_type(), &shape.binders, &copies));
                let [(c, _)] = own.entries().collect::<Vec<_>>()[..] else { break };
                let order = if hit { zeros.clone() } else { std::iter::once(*m).chain(zeros.iter().copied()).collect() };
                let Some(g) = order.into_iter().find(|g| {
                    let mut t = trial.clone();
                    unify_class(c, g, &mut t, &self.fresh) && {
                        trial = t;
                        true
                    }
                }) else {
                    break;
                };
                hit |= g == *m;
                landed.push(g.clone());
            }
            if hit && landed.len() == items.len() {
                *s = trial;
                for g in landed {
                    *result = result.plus(&CanonicalType::single(g, Scalar::zero()));
                }
                args.push((Scalar::zero(), copies));
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn item_dfs(
        &self,
        shape: &Shape,
        summands: &[(Scalar, Option<Class>)],
        items: &[(Scalar, Class, Scalar)],
        targets: &[&Class],
        goal: &CanonicalType,
        copies: &[TyArg],
        s: Subst,
        pick: &mut Vec<usize>,
        picked: &mut Vec<(Vec<TyArg>, Vec<usize>)>,
        start: usize,
        out: &mut Vec<(AppPlan, Subst)>,
    ) {
        if out.len() - start >= CODOMAIN_ASSIGNMENTS {
            return;
        }
        let Some((_, class, _)) = items.get(pick.len()) else {
            picked.push((copies.to_vec(), pick.clone()));
            self.summand_dfs(shape, summands, items, targets, goal, s, picked, start, out);
            picked.pop();
            return;
        };
        let own = canonicalize(&inst_names(&class.to_type(), &shape.binders, copies));
        let [(c, k)] = own.entries().collect::<Vec<_>>()[..] else { return };
        if !k.is_one() {
            return;
        }
        for (t, g) in targets.iter().enumerate() {
            let mut trial = s.clone();
            if unify_class(c, g, &mut trial, &self.fresh) {
                pick.push(t);
                self.item_dfs(shape, summands, items, targets, goal, copies, trial, pick, picked, start, out);
                pick.pop();
            }
        }
    }

    fn own_class(plan: &AppPlan, class: &Class) -> CanonicalType {
        match plan.args.as_slice() {
            [(_, a)] => canonicalize(&inst_names(&class.to_type(), &plan.shape.binders, a)),
            _ => CanonicalType::single(class.clone(), Scalar::one()),
        }
    }

    /// Goal summands for each codomain summand, depth first. A summand goes
    /// to every goal summand it unifies with, or to any of them when it
    /// unifies with none; a `false` flag marks the latter.
    fn goal_picks(
        &self,
        plan: &AppPlan,
        items: &[(usize, Class, Scalar)],
        targets: &[&Class],
        s: Subst,
        pick: &mut Vec<(usize, bool)>,
        out: &mut Vec<(Vec<(usize, bool)>, Subst)>,
    ) {
        if out.len() >= CODOMAIN_ASSIGNMENTS {
            return;
        }
        let Some((_, class, _)) = items.get(pick.len()) else {
            out.push((pick.clone(), s));
            return;
        };
        let own = Self::own_class(plan, class);
        if let [(c, k)] = own.entries().collect::<Vec<_>>()[..] {
            if k.is_one() {
                for (t, g) in targets.iter().enumerate() {
                    let mut trial = s.clone();
                    if unify_class(c, g, &mut trial, &self.fresh) {
                        pick.push((t, true));
                        self.goal_picks(plan, items, targets, trial, pick, out);
                        pick.pop();
                    }
                }
            }
        }
        for t in 0..targets.len() {
            pick.push((t, false));
            self.goal_picks(plan, items, targets, s.clone(), pick, out);
            pick.pop();
        }
    }

    /// The plan whose codomain summands are the goal summands in `pick`,
    /// each keeping its own scalar.
    #[allow(clippy::too_many_arguments)]
    fn codomains_from_goal(
        &self,
        plan: &AppPlan,
        items: &[(usize, Class, Scalar)],
        s: Subst,
        targets: &[&Class],
        pick: &[(usize, bool)],
        goal: &CanonicalType,
        mult: &Scalar,
        out: &mut Vec<(AppPlan, Subst)>,
    ) {
        let total: Scalar = plan.args.iter().map(|(b, _)| b).sum();
        let mut parts: Vec<CanonicalType> = vec![CanonicalType::default(); plan.shape.codomains.len()];
        let mut per_target: Vec<(Class, Scalar)> = Vec::new();
        let mut replaced = false;
        for ((i, class, kappa), &(p, fits)) in items.iter().zip(pick) {
            let g = targets[p];
            let kept = if fits {
                class.clone()
            } else {
                replaced = true;
                (*g).clone()
            };
            parts[*i] = parts[*i].plus(&CanonicalType::single(kept, kappa.clone()));
            let w = &plan.shape.codomains[*i].0 * kappa;
            match per_target.iter_mut().find(|(c, _)| c == g) {
                Some((_, acc)) => *acc = &*acc + &w,
                None => per_target.push(((*g).clone(), w)),
            }
        }
        let mut shape = plan.shape.clone();
        for (i, part) in parts.into_iter().enumerate() {
            shape.codomains[i].1 = part.to_type();
        }
        let mut args = plan.args.clone();
        // A replaced summand no longer mentions the binders, so a lone
        // instantiation is applied up front and the function typed at it.
        if let (true, [(beta, a)]) = (replaced, plan.args.as_slice()) {
            let inst = |t: &Type| inst_names(t, &shape.binders, a);
            let Some(domain) = inst(&Type::Unit(shape.domain.clone())).as_unit().cloned() else { return };
            let codomains = shape.codomains.iter().map(|(al, t)| (al.clone(), inst(t))).collect();
            shape = Shape { binders: Vec::new(), domain, codomains };
            args = vec![(beta.clone(), Vec::new())];
        }
        let result_at = |beta: &Scalar| {
            per_target.iter().fold(CanonicalType::default(), |acc, (g, w)| acc.plus(&CanonicalType::single(g.clone(), w * beta)))
        };
        // An argument whose weight is hidden behind applications takes its
        // scalar from the goal instead, when the goal agrees on one.
        if let [(beta, _)] = plan.args.as_slice() {
            let wants: Option<Vec<Scalar>> = per_target
                .iter()
                .map(|(g, w)| {
                    let k = w * mult;
                    (!k.is_zero()).then(|| goal.coeff(g).unwrap() / &k)
                })
                .collect();
            if let Some(wants) = wants {
                if wants.windows(2).all(|p| p[0] == p[1]) && wants[0] != *beta {
                    let want = wants[0].clone();
                    let args = vec![(want.clone(), args[0].1.clone())];
                    out.push((AppPlan { shape: shape.clone(), args, result: result_at(&want) }, s.clone()));
                }
            }
        }
        let result = result_at(&total);
        out.push((AppPlan { shape, args, result }, s));
    }

    #[allow(clippy::too_many_arguments)]
    fn app_candidates(
        &self,
        ctx: &Context,
        atom: &Term,
        f: &Term,
        r: &Term,
        goal: &CanonicalType,
        mult: &Scalar,
        plan: &AppPlan,
        base: Subst,
        out: &mut Vec<Opt>,
        reasons: &mut Vec<String>,
    ) -> Result<(), TypeError> {
        let pattern = zonk_canon(&plan.result, &base);

        let mut candidates = Vec::new();
        if let Some((c, n)) = single_flex_gen(&pattern) {
            let k = &c * mult;
            if !k.is_zero() {
                let mut s = base.clone();
                s.insert(n, TyArg::General(goal.scaled(&(&Scalar::one() / &k)).to_type()));
                candidates.push(s);
            }
        }
        if !flex_free(&pattern.to_type()) {
            let entries: Vec<(Class, Scalar)> = pattern.entries().map(|(c, s)| (c.clone(), s.clone())).collect();
            let targets: Vec<Class> = goal.classes().cloned().collect();
            assign(0, &entries, &targets, base.clone(), &self.fresh, &mut candidates);
        }
        candidates.push(base);

        let mut seen = BTreeSet::new();
        let units: Vec<UnitType> = goal.classes().filter_map(Class::as_unit).cloned().collect();
        for mut s in candidates {
            self.tick()?;
            let binders: Vec<(Sort, Name)> = plan
                .shape
                .binders
                .iter()
                .map(|(sort, h, n)| {
                    let rigid = self.fresh.rigid(&h.0);
                    s.insert(n.clone(), leaf(*sort, TyVar::Free(rigid.clone())));
                    (*sort, rigid)
                })
                .collect();
            let mut parts: Vec<Type> = vec![Type::Unit(plan.shape.domain.clone())];
            parts.extend(plan.shape.codomains.iter().map(|(_, t)| t.clone()));
            parts.extend(plan.args.iter().flat_map(|(_, a)| a.iter().map(TyArg::as_type)));
            default_flex(&parts, &mut s, &self.fresh);

            let domain = zonk_unit(&plan.shape.domain, &s);
            let codomains: Vec<(Scalar, Type)> =
                plan.shape.codomains.iter().map(|(a, t)| (a.clone(), zonk_type(t, &s))).collect();
            let args: Vec<(Scalar, Vec<TyArg>)> = plan
                .args
                .iter()
                .map(|(b, a)| (b.clone(), a.iter().map(|x| zonk_arg(x, &s)).collect()))
                .collect();
            let opened: Vec<Opened> = binders.iter().map(|(sort, n)| (*sort, crate::syntax::Hint::new(base_of(n)), n.clone())).collect();

            let fun_ty = CanonicalType::from_entries(codomains.iter().map(|(a, t)| {
                let arrow = UnitType::Arrow(Arc::new(domain.clone()), Arc::new(t.clone()));
                (Class::Unit(norm_unit(&close_over(&opened, arrow))), a.clone())
            }));
            let mut arg_ty = CanonicalType::default();
            let mut result = CanonicalType::default();
            for (beta, a) in &args {
                arg_ty = arg_ty.plus(&canonicalize(&inst_names(&Type::Unit(domain.clone()), &opened, a)).scaled(beta));
                for (alpha, t) in &codomains {
                    result = result.plus(&canonicalize(&inst_names(t, &opened, a)).scaled(&(alpha * beta)));
                }
            }
            if !seen.insert((fun_ty.clone(), arg_ty.clone())) {
                continue;
            }
            let df = match self.check(ctx, f, &fun_ty) {
                Ok(d) => d.equiv(fun_ty.to_type()),
                Err(e @ TypeError::SearchBudgetExceeded) => return Err(e),
                Err(e) => {
                    reasons.push(e.to_string());
                    continue;
                }
            };
            let dr = match self.check(ctx, r, &arg_ty) {
                Ok(d) => d.equiv(arg_ty.to_type()),
                Err(e @ TypeError::SearchBudgetExceeded) => return Err(e),
                Err(e) => {
                    reasons.push(e.to_string());
                    continue;
                }
            };
            let rule = Rule::ArrowE {
                binders,
                domain,
                codomains,
                args,
            };
            let node = Derivation::new(ctx.clone(), atom.clone(), result.to_type(), rule, vec![df, dr]);
            if within(&result, goal) {
                out.push(Opt {
                    block: result.clone(),
                    deriv: node.clone(),
                });
            }
            if let [(c, w)] = result.units().as_slice() {
                if result.len() == 1 {
                    for g in &units {
                        if norm_unit(g) == *w {
                            continue;
                        }
                        self.tick()?;
                        if let Some(inst) = match_instance(w, g, &self.fresh) {
                            out.push(Opt {
                                block: CanonicalType::unit(g.clone()).scaled(c),
                                deriv: forall_chain(node.clone(), c, w, &inst),
                            });
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// The shape with every binder absent from the domain quantified inside
/// each codomain summand instead, and the indices of the binders kept.
fn nest(shape: &Shape) -> Option<(Shape, Vec<usize>)> {
    let dom = Type::Unit(shape.domain.clone()).free_vars();
    let (kept, moved): (Vec<usize>, Vec<usize>) =
        (0..shape.binders.len()).partition(|&i| dom.contains(&(shape.binders[i].0, shape.binders[i].2.clone())));
    if moved.is_empty() {
        return None;
    }
    let moved: Vec<&Opened> = moved.iter().map(|&i| &shape.binders[i]).collect();
    let mut codomains = Vec::new();
    for (alpha, t) in &shape.codomains {
        let mut parts = Vec::new();
        for (class, kappa) in canonicalize(t).entries() {
            let Class::Unit(u) = class else {
                if moved.iter().any(|(s, _, n)| class.to_type().free_vars().contains(&(*s, n.clone()))) {
                    return None;
                }
                parts.push(Type::scale(kappa.clone(), class.to_type()));
                continue;
            };
            let order = u.free_vars_ordered();
            let local: Vec<Opened> =
                order.iter().filter_map(|v| moved.iter().find(|(s, _, n)| (*s, n.clone()) == *v).map(|b| (*b).clone())).collect();
            parts.push(Type::scale(kappa.clone(), Type::Unit(close_over(&local, u.clone()))));
        }
        codomains.push((alpha.clone(), Type::sum(parts)));
    }
    let binders = kept.iter().map(|&i| shape.binders[i].clone()).collect();
    Some((Shape { binders, domain: shape.domain.clone(), codomains }, kept))
}

fn base_of(n: &str) -> &str {
    n.split('#').next().unwrap_or("X")
}

fn zonk_arg(a: &TyArg, s: &Subst) -> TyArg {
    match a {
        TyArg::Unit(u) => TyArg::Unit(zonk_unit(u, s)),
        TyArg::General(t) => TyArg::General(zonk_type(t, s)),
    }
}

/// Pairs every pattern entry with some goal class, collecting the
/// substitutions that make the pairing work.
fn assign(i: usize, entries: &[(Class, Scalar)], targets: &[Class], s: Subst, fresh: &Fresh, out: &mut Vec<Subst>) {
    if out.len() >= ASSIGNMENT_LIMIT {
        return;
    }
    if i == entries.len() {
        out.push(s);
        return;
    }
    for g in targets {
        let mut trial = s.clone();
        if unify_class(&entries[i].0, g, &mut trial, fresh) {
            assign(i + 1, entries, targets, trial, fresh, out);
        }
    }
}

struct Plan<'a> {
    options: &'a [Vec<Opt>],
    used: &'a [Vec<usize>],
}

impl Plan<'_> {
    fn block_sum(&self, k: usize, w: &[Scalar]) -> CanonicalType {
        self.used[k]
            .iter()
            .fold(CanonicalType::default(), |acc, o| acc.plus(&self.options[k][*o].block.scaled(&w[*o])))
    }

    fn s_over_atom(&self, term: &Term, k: usize, w: &[Scalar]) -> (Derivation, CanonicalType) {
        let premises: Vec<Derivation> = self.used[k].iter().map(|o| self.options[k][*o].deriv.clone()).collect();
        let coeffs: Vec<Scalar> = self.used[k].iter().map(|o| w[*o].clone()).collect();
        let ty = self.block_sum(k, w);
        let ctx = premises[0].ctx.clone();
        let atom = premises[0].term.clone();
        let scaled = match term {
            Term::Scale(..) => term.clone(),
            _ => Term::scale(coeffs.iter().sum(), atom),
        };
        (Derivation::new(ctx, scaled, ty.to_type(), Rule::S { coeffs }, premises), ty)
    }

    /// Derives `node.term : Σ w·block` over the used options.
    fn derive(&self, node: &Node, w: &[Vec<Scalar>]) -> (Derivation, CanonicalType) {
        match &node.kind {
            Kind::Atom(k) => {
                let k = *k;
                if let [o] = self.used[k].as_slice() {
                    if w[k][*o].is_one() {
                        let opt = &self.options[k][*o];
                        return (opt.deriv.clone(), opt.block.clone());
                    }
                }
                let (s, ty) = self.s_over_atom(&node.term, k, &w[k]);
                let ctx = s.ctx.clone();
                (Derivation::new(ctx, node.term.clone(), ty.to_type(), Rule::OneE, vec![s]), ty)
            }
            Kind::Scale(alpha, child) => {
                if !alpha.is_zero() {
                    if let Kind::Atom(k) = child.kind {
                        return self.s_over_atom(&node.term, k, &w[k]);
                    }
                    let inv = &Scalar::one() / alpha;
                    let inner: Vec<Vec<Scalar>> = w.iter().map(|ws| ws.iter().map(|x| x * &inv).collect()).collect();
                    let (dc, tc) = self.derive(child, &inner);
                    let ty = tc.scaled(alpha);
                    let ctx = dc.ctx.clone();
                    let rule = Rule::S { coeffs: vec![alpha.clone()] };
                    return (Derivation::new(ctx, node.term.clone(), ty.to_type(), rule, vec![dc]), ty);
                }
                let mut below = Vec::new();
                rho(child, &mut below);
                let mut first = w.to_vec();
                for (k, r) in &below {
                    first[*k] = vec![Scalar::zero(); first[*k].len()];
                    first[*k][self.used[*k][0]] = r.clone();
                }
                let all_zero = below.iter().all(|(k, _)| w[*k].iter().all(Scalar::is_zero));
                if all_zero {
                    let (dc, tc) = self.derive(child, &first);
                    let ty = tc.scaled(&Scalar::zero());
                    let ctx = dc.ctx.clone();
                    let rule = Rule::S { coeffs: vec![Scalar::zero()] };
                    return (Derivation::new(ctx, node.term.clone(), ty.to_type(), rule, vec![dc]), ty);
                }
                let mut shifted = w.to_vec();
                for (k, _) in &below {
                    shifted[*k] = w[*k].iter().zip(&first[*k]).map(|(a, b)| a + b).collect();
                }
                let (d1, t1) = self.derive(child, &shifted);
                let (d2, t2) = self.derive(child, &first);
                let ty = t1.plus(&t2.scaled(&-Scalar::one()));
                let ctx = d1.ctx.clone();
                let rule = Rule::S {
                    coeffs: vec![Scalar::one(), -Scalar::one()],
                };
                (Derivation::new(ctx, node.term.clone(), ty.to_type(), rule, vec![d1, d2]), ty)
            }
            Kind::Sum(children) => {
                let mut premises = Vec::new();
                let mut ty = CanonicalType::default();
                for c in children {
                    let (d, t) = self.derive(c, w);
                    ty = ty.plus(&t);
                    premises.push(d);
                }
                let ctx = premises[0].ctx.clone();
                (Derivation::new(ctx, node.term.clone(), ty.to_type(), Rule::SumI, premises), ty)
            }
        }
    }
}
