//! Brute-force type equivalence: breadth-first search over single rewrites
//! by the module axioms, applied at any position.
//!
//! Sums are multisets by construction, so commutativity and associativity
//! hold for free. The remaining axioms are used in their finitely branching
//! directions (`1·T → T`, merging like summands, collapsing nested scalars,
//! distributing and factoring a common scalar); the search runs from both
//! sides and succeeds when the explored sets meet.

use crate::scalar::Scalar;
use crate::syntax::{Hint, Sort, TyVar, Type, UnitType};
use rand::seq::SliceRandom;
use rand::Rng;
use std::collections::{HashSet, VecDeque};
use std::sync::Arc;

/// Search bounds for [`oracle_equiv`].
#[derive(Clone, Copy, Debug)]
pub struct OracleBounds {
    pub depth: usize,
    pub max_states: usize,
}

impl Default for OracleBounds {
    fn default() -> Self {
        OracleBounds { depth: 6, max_states: 20_000 }
    }
}

fn strip_one(t: &Type) -> (Scalar, &Type) {
    match t {
        Type::Scale(a, inner) => (a.clone(), inner),
        other => (Scalar::one(), other),
    }
}

/// Rewrites applicable at the root of `t`.
fn root_steps(t: &Type) -> Vec<Type> {
    let mut out = Vec::new();
    match t {
        Type::Scale(a, inner) => {
            if a.is_one() {
                out.push((**inner).clone());
            }
            if let Type::Scale(b, core) = &**inner {
                out.push(Type::scale(a * b, (**core).clone()));
            }
            if let Type::Sum(items) = &**inner {
                out.push(Type::sum(items.iter().map(|i| Type::scale(a.clone(), i.clone()))));
            }
        }
        Type::Sum(items) => {
            for i in 0..items.len() {
                for j in i + 1..items.len() {
                    let rest = || items.iter().enumerate().filter(|(k, _)| *k != i && *k != j).map(|(_, x)| x.clone());
                    let (a, ti) = strip_one(&items[i]);
                    let (b, tj) = strip_one(&items[j]);
                    if ti == tj {
                        let merged = Type::scale(&a + &b, ti.clone());
                        out.push(Type::sum(rest().chain([merged])));
                    }
                    if let (Type::Scale(a, ti), Type::Scale(b, tj)) = (&items[i], &items[j]) {
                        if a == b {
                            let factored = Type::scale(a.clone(), Type::sum([(**ti).clone(), (**tj).clone()]));
                            out.push(Type::sum(rest().chain([factored])));
                        }
                    }
                }
            }
        }
        _ => {}
    }
    out
}

/// Applies `f` at exactly one position of `t`, in every possible way.
pub fn rewrite_anywhere(t: &Type, f: &dyn Fn(&Type) -> Vec<Type>) -> Vec<Type> {
    let mut out = f(t);
    match t {
        Type::Unit(u) => out.extend(unit_anywhere(u, f).into_iter().map(Type::Unit)),
        Type::GVar(_) => {}
        Type::Scale(a, inner) => {
            out.extend(rewrite_anywhere(inner, f).into_iter().map(|i| Type::scale(a.clone(), i)));
        }
        Type::Sum(items) => {
            for (k, item) in items.iter().enumerate() {
                for new in rewrite_anywhere(item, f) {
                    let mut v = items.clone();
                    v[k] = new;
                    out.push(Type::sum(v));
                }
            }
        }
    }
    out
}

fn unit_anywhere(u: &UnitType, f: &dyn Fn(&Type) -> Vec<Type>) -> Vec<UnitType> {
    match u {
        UnitType::Var(_) => Vec::new(),
        UnitType::Arrow(d, c) => {
            let mut out: Vec<UnitType> = unit_anywhere(d, f)
                .into_iter()
                .map(|d2| UnitType::Arrow(Arc::new(d2), c.clone()))
                .collect();
            out.extend(rewrite_anywhere(c, f).into_iter().map(|c2| UnitType::Arrow(d.clone(), Arc::new(c2))));
            out
        }
        UnitType::Forall(s, h, b) => unit_anywhere(b, f)
            .into_iter()
            .map(|b2| UnitType::Forall(*s, h.clone(), Arc::new(b2)))
            .collect(),
    }
}

/// One-step neighbours of `t`.
pub fn neighbours(t: &Type) -> Vec<Type> {
    rewrite_anywhere(t, &root_steps)
}

fn explore(start: &Type, bounds: OracleBounds) -> HashSet<Type> {
    let mut seen = HashSet::new();
    seen.insert(start.clone());
    let mut queue = VecDeque::from([(start.clone(), 0)]);
    while let Some((t, d)) = queue.pop_front() {
        if d == bounds.depth {
            continue;
        }
        for n in neighbours(&t) {
            if seen.len() >= bounds.max_states {
                return seen;
            }
            if seen.insert(n.clone()) {
                queue.push_back((n, d + 1));
            }
        }
    }
    seen
}

/// Whether `a` and `b` are connected by at most `2·depth` axiom steps.
pub fn oracle_equiv(a: &Type, b: &Type, bounds: OracleBounds) -> bool {
    if a == b {
        return true;
    }
    let left = explore(a, bounds);
    if left.contains(b) {
        return true;
    }
    let right = explore(b, bounds);
    right.iter().any(|t| left.contains(t))
}

/// Random types and equivalence-preserving perturbations for the oracle suite.
pub struct TypeGen<'a, R: Rng> {
    pub rng: &'a mut R,
    pub scalars: &'a [Scalar],
}

impl<'a, R: Rng> TypeGen<'a, R> {
    fn scalar(&mut self) -> Scalar {
        self.scalars.choose(self.rng).unwrap().clone()
    }

    /// A random type of at most `size` nodes.
    pub fn ty(&mut self, size: usize) -> Type {
        if size <= 1 {
            return match self.rng.gen_range(0..5) {
                0 => Type::gvar("Z"),
                1 => Type::unit_var("Y"),
                _ => Type::unit_var("X"),
            };
        }
        let pick = if size < 3 { self.rng.gen_range(0..2) } else { self.rng.gen_range(0..4) };
        match pick {
            0 => Type::Unit(self.unit(size)),
            1 => Type::scale(self.scalar(), self.ty(size - 1)),
            _ => {
                let left = self.rng.gen_range(1..size - 1);
                let right = size - 1 - left;
                Type::sum([self.ty(left), self.ty(right)])
            }
        }
    }

    fn unit(&mut self, size: usize) -> UnitType {
        if size <= 2 {
            return UnitType::var(if self.rng.gen_bool(0.5) { "X" } else { "Y" });
        }
        if self.rng.gen_bool(0.25) {
            let body = self.unit(size - 1);
            return UnitType::Forall(Sort::Unit, Hint::new("W"), Arc::new(body.close(Sort::Unit, "X", 0)));
        }
        let cod = self.ty(size - 2);
        UnitType::Arrow(Arc::new(UnitType::Var(TyVar::free("X"))), Arc::new(cod))
    }

    /// One random axiom step in either direction somewhere in `t`.
    pub fn perturb(&mut self, t: &Type) -> Type {
        let split = self.scalar();
        let factor = self.scalar();
        let expand = move |x: &Type| -> Vec<Type> {
            let mut out = vec![Type::scale(Scalar::one(), x.clone())];
            let (a, core) = strip_one(x);
            out.push(Type::sum([Type::scale(split.clone(), core.clone()), Type::scale(&a - &split, core.clone())]));
            if let Some(q) = a.checked_div(&factor) {
                out.push(Type::scale(factor.clone(), Type::scale(q, core.clone())));
            }
            out
        };
        let mut options = neighbours(t);
        options.extend(rewrite_anywhere(t, &expand));
        options.choose(self.rng).cloned().unwrap_or_else(|| t.clone())
    }

    /// Changes one scalar or one variable.
    pub fn mutate(&mut self, t: &Type) -> Type {
        let s = self.scalar();
        let change = move |x: &Type| -> Vec<Type> {
            match x {
                Type::Scale(a, inner) if *a != s => vec![Type::scale(s.clone(), (**inner).clone())],
                Type::Unit(UnitType::Var(TyVar::Free(n))) => {
                    vec![Type::unit_var(if &**n == "X" { "Y" } else { "X" })]
                }
                Type::GVar(_) => vec![Type::unit_var("X")],
                _ => Vec::new(),
            }
        };
        let options = rewrite_anywhere(t, &change);
        options.choose(self.rng).cloned().unwrap_or_else(|| Type::scale(Scalar::int(2), t.clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_type;

    fn eq(a: &str, b: &str) -> bool {
        oracle_equiv(&parse_type(a).unwrap(), &parse_type(b).unwrap(), OracleBounds::default())
    }

    #[test]
    fn module_axioms() {
        assert!(eq("2 * U", "U + U"));
        assert!(eq("3 * (T + R)", "3 * T + 3 * R"));
        assert!(eq("U -> 1 * T", "U -> T"));
        assert!(eq("2 * (3 * U)", "6 * U"));
        assert!(eq("1/2 * U + 1/2 * U", "U"));
        assert!(eq("2 * U + -1 * U + V", "V + U"));
        assert!(eq("forall X. X -> (X + X)", "forall Y. Y -> 2 * Y"));
    }

    #[test]
    fn distinct_types() {
        assert!(!eq("U", "V"));
        assert!(!eq("U + 0 * V", "U"));
        assert!(!eq("2 * U", "U"));
        assert!(!eq("U -> T", "U -> 2 * T"));
        assert!(!eq("%X", "X"));
    }
}
