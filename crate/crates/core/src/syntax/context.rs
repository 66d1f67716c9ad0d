use crate::syntax::term::Name;
use crate::syntax::types::{Sort, UnitType};
use std::collections::BTreeSet;

/// Typing context: term variables bound to unit types, in binding order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Context {
    entries: Vec<(Name, UnitType)>,
}

impl Context {
    pub fn new() -> Self {
        Context::default()
    }

    pub fn from_entries(entries: impl IntoIterator<Item = (Name, UnitType)>) -> Self {
        let mut ctx = Context::new();
        for (n, u) in entries {
            ctx = ctx.extend(n, u);
        }
        ctx
    }

    /// Binds `name`, replacing an earlier binding of the same variable.
    pub fn extend(&self, name: Name, ty: UnitType) -> Context {
        let mut entries: Vec<_> = self.entries.iter().filter(|(n, _)| *n != name).cloned().collect();
        entries.push((name, ty));
        Context { entries }
    }

    pub fn lookup(&self, name: &str) -> Option<&UnitType> {
        self.entries.iter().rev().find(|(n, _)| &**n == name).map(|(_, u)| u)
    }

    pub fn entries(&self) -> &[(Name, UnitType)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Free type variables of all bindings, i.e. FV(Γ).
    pub fn free_type_vars(&self) -> BTreeSet<(Sort, Name)> {
        let mut out = BTreeSet::new();
        for (_, u) in &self.entries {
            u.collect_free(&mut out);
        }
        out
    }

    pub fn mentions_type_var(&self, sort: Sort, name: &str) -> bool {
        self.free_type_vars().iter().any(|(s, n)| *s == sort && &**n == name)
    }
}
