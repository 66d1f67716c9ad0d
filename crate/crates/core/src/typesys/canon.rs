//! Canonical forms `Σαᵢ·Uᵢ + Σβⱼ·𝕏ⱼ` and the equivalence they decide.

use crate::scalar::Scalar;
use crate::syntax::{TyVar, Type, UnitType};
use std::cell::RefCell;
use rustc_hash::FxHashMap;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

/// A summand class of a canonical type: a normalized unit type or a general
/// variable.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Class {
    Unit(UnitType),
    Gen(TyVar),
}

impl Class {
    pub fn to_type(&self) -> Type {
        match self {
            Class::Unit(u) => Type::Unit(u.clone()),
            Class::Gen(v) => Type::GVar(v.clone()),
        }
    }

    pub fn as_unit(&self) -> Option<&UnitType> {
        match self {
            Class::Unit(u) => Some(u),
            Class::Gen(_) => None,
        }
    }
}

impl fmt::Debug for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.to_type())
    }
}

/// Entries are pairwise inequivalent; zero coefficients are kept.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct CanonicalType {
    entries: BTreeMap<Class, Scalar>,
}

impl CanonicalType {
    pub fn single(class: Class, coeff: Scalar) -> Self {
        let mut entries = BTreeMap::new();
        entries.insert(class, coeff);
        CanonicalType { entries }
    }

    pub fn unit(u: UnitType) -> Self {
        CanonicalType::single(Class::Unit(norm_unit(&u)), Scalar::one())
    }

    pub fn from_entries(entries: impl IntoIterator<Item = (Class, Scalar)>) -> Self {
        let mut out = CanonicalType::default();
        for (c, s) in entries {
            out.add_entry(c, s);
        }
        out
    }

    fn add_entry(&mut self, class: Class, coeff: Scalar) {
        let slot = self.entries.entry(class).or_insert_with(Scalar::zero);
        *slot = &*slot + &coeff;
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Class, &Scalar)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn coeff(&self, class: &Class) -> Option<&Scalar> {
        self.entries.get(class)
    }

    pub fn classes(&self) -> impl Iterator<Item = &Class> {
        self.entries.keys()
    }

    pub fn units(&self) -> Vec<(Scalar, UnitType)> {
        self.entries
            .iter()
            .filter_map(|(c, s)| c.as_unit().map(|u| (s.clone(), u.clone())))
            .collect()
    }

    pub fn gvars(&self) -> Vec<(Scalar, TyVar)> {
        self.entries
            .iter()
            .filter_map(|(c, s)| match c {
                Class::Gen(v) => Some((s.clone(), v.clone())),
                Class::Unit(_) => None,
            })
            .collect()
    }

    /// The single unit type with coefficient 1, if that is all there is.
    pub fn as_plain_unit(&self) -> Option<&UnitType> {
        match self.entries.iter().next() {
            Some((Class::Unit(u), s)) if self.entries.len() == 1 && s.is_one() => Some(u),
            _ => None,
        }
    }

    pub fn scaled(&self, alpha: &Scalar) -> Self {
        CanonicalType {
            entries: self.entries.iter().map(|(c, s)| (c.clone(), alpha * s)).collect(),
        }
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (c, s) in &other.entries {
            out.add_entry(c.clone(), s.clone());
        }
        out
    }

    /// Sum of coefficients; `None` when a general variable occurs.
    pub fn weight(&self) -> Option<Scalar> {
        if self.entries.keys().any(|c| matches!(c, Class::Gen(_))) {
            return None;
        }
        Some(self.entries.values().sum())
    }

    /// Rebuilds `Σαᵢ·Uᵢ + Σβⱼ·𝕏ⱼ`, omitting coefficients equal to 1.
    pub fn to_type(&self) -> Type {
        assert!(!self.entries.is_empty(), "empty canonical type");
        Type::sum(self.entries.iter().map(|(c, s)| {
            if s.is_one() {
                c.to_type()
            } else {
                Type::scale(s.clone(), c.to_type())
            }
        }))
    }
}

impl fmt::Debug for CanonicalType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return f.write_str("<empty>");
        }
        write!(f, "{:?}", self.to_type())
    }
}

impl fmt::Display for CanonicalType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

const NORM_CACHE_LIMIT: usize = 1 << 16;

thread_local! {
    static NORM_CACHE: RefCell<FxHashMap<UnitType, (UnitType, UnitType)>> = RefCell::new(FxHashMap::default());
}

/// Normalizes every codomain inside a unit type.
pub fn norm_unit(u: &UnitType) -> UnitType {
    if let UnitType::Var(_) = u {
        return u.clone();
    }
    // Hints do not take part in equality, so a hit is only used when its
    // binder names agree with `u` as well.
    if let Some((key, hit)) = NORM_CACHE.with(|c| c.borrow().get(u).cloned()) {
        if same_hints_unit(&key, u) {
            return hit;
        }
    }
    let out = norm_unit_uncached(u);
    NORM_CACHE.with(|c| {
        let mut c = c.borrow_mut();
        if c.len() >= NORM_CACHE_LIMIT {
            c.clear();
        }
        c.insert(u.clone(), (u.clone(), out.clone()));
    });
    out
}

fn same_hints_unit(a: &UnitType, b: &UnitType) -> bool {
    match (a, b) {
        (UnitType::Var(_), UnitType::Var(_)) => true,
        (UnitType::Arrow(d1, c1), UnitType::Arrow(d2, c2)) => same_hints_unit(d1, d2) && same_hints(c1, c2),
        (UnitType::Forall(_, h1, b1), UnitType::Forall(_, h2, b2)) => h1.0 == h2.0 && same_hints_unit(b1, b2),
        _ => false,
    }
}

fn same_hints(a: &Type, b: &Type) -> bool {
    match (a, b) {
        (Type::Unit(u), Type::Unit(v)) => same_hints_unit(u, v),
        (Type::GVar(_), Type::GVar(_)) => true,
        (Type::Scale(_, x), Type::Scale(_, y)) => same_hints(x, y),
        (Type::Sum(xs), Type::Sum(ys)) => xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| same_hints(x, y)),
        _ => false,
    }
}

fn norm_unit_uncached(u: &UnitType) -> UnitType {
    match u {
        UnitType::Var(_) => u.clone(),
        UnitType::Arrow(d, c) => UnitType::Arrow(Arc::new(norm_unit(d)), Arc::new(canonicalize(c).to_type())),
        UnitType::Forall(s, h, b) => UnitType::Forall(*s, h.clone(), Arc::new(norm_unit(b))),
    }
}

pub fn canonicalize(t: &Type) -> CanonicalType {
    match t {
        Type::Unit(u) => CanonicalType::single(Class::Unit(norm_unit(u)), Scalar::one()),
        Type::GVar(v) => CanonicalType::single(Class::Gen(v.clone()), Scalar::one()),
        Type::Scale(alpha, inner) => canonicalize(inner).scaled(alpha),
        Type::Sum(items) => {
            let mut out = CanonicalType::default();
            for item in items {
                for (c, s) in canonicalize(item).entries {
                    out.add_entry(c, s);
                }
            }
            out
        }
    }
}

pub fn type_equiv(a: &Type, b: &Type) -> bool {
    canonicalize(a) == canonicalize(b)
}

pub fn unit_equiv(a: &UnitType, b: &UnitType) -> bool {
    norm_unit(a) == norm_unit(b)
}
