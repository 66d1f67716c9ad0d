//! Type equivalence, checking, synthesis and weights.

mod canon;
mod check;
pub mod derivation;
mod infer;
mod linsolve;
pub mod unify;
mod weight;

pub use canon::{canonicalize, norm_unit, type_equiv, unit_equiv, CanonicalType, Class};
pub use check::{Checker, DEFAULT_BUDGET};
pub use derivation::{Derivation, InvalidNode, Rule};
pub use weight::{weight_type, weight_value, WeightError};

use crate::syntax::{Context, Name, SortError, Term, Type};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("unbound variable {0}")]
    UnboundVariable(Name),
    #[error(transparent)]
    Sort(#[from] SortError),
    #[error("no derivation: {obligation}")]
    NoDerivation { obligation: String },
    #[error("search budget exceeded")]
    SearchBudgetExceeded,
    #[error("annotation required: {0}")]
    AnnotationRequired(String),
}

/// Builds and validates a derivation of `Γ ⊢ t : T`.
pub fn check(ctx: &Context, t: &Term, ty: &Type) -> Result<Derivation, TypeError> {
    Checker::new().check_type(ctx, t, ty)
}

fn has_bare_binder(t: &Term) -> bool {
    match t {
        Term::Bound(_) | Term::Free(_) => false,
        Term::Abs(_, ann, body) => ann.is_none() || has_bare_binder(body),
        Term::App(f, a) => has_bare_binder(f) || has_bare_binder(a),
        Term::Scale(_, inner) => has_bare_binder(inner),
        Term::Sum(items) => items.iter().any(has_bare_binder),
    }
}

/// Infers a type for `t`, then derives it.
pub fn synthesize(ctx: &Context, t: &Term) -> Result<(CanonicalType, Derivation), TypeError> {
    let fresh = unify::Fresh::new();
    let mut inf = infer::Infer::new(&fresh);
    let ty = match inf.term(ctx, t) {
        Ok(ty) => inf.zonk(&ty),
        Err(TypeError::NoDerivation { obligation }) if has_bare_binder(t) => {
            return Err(TypeError::AnnotationRequired(obligation));
        }
        Err(e) => return Err(e),
    };
    let ty = match ty.as_plain_unit() {
        Some(u) => CanonicalType::unit(inf.generalize(ctx, u)),
        None => {
            let mut s = inf.subst.clone();
            infer::default_flex(&[ty.to_type()], &mut s, &fresh);
            unify::zonk_canon(&ty, &s)
        }
    };
    let checker = Checker::with_fresh(fresh);
    let d = checker.check_type(ctx, t, &ty.to_type()).map_err(|e| match e {
        TypeError::NoDerivation { obligation } => TypeError::NoDerivation {
            obligation: format!("inferred {ty} but could not derive it: {obligation}"),
        },
        other => other,
    })?;
    Ok((ty, d))
}

#[cfg(test)]
mod tests;
