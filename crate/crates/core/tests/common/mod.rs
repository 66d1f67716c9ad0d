#![allow(dead_code)]

use proptest::prelude::*;
use vecr::{parse_scalar, Scalar, Sort, Term, Type, UnitType};

pub fn arb_scalar() -> impl Strategy<Value = Scalar> {
    prop::sample::select(vec!["0", "1", "-1", "2", "1/2", "-1/2", "sqrt2", "1/sqrt2", "-1/sqrt2", "3 + sqrt2"])
        .prop_map(|s| parse_scalar(s).unwrap())
}

const NAMES: [&str; 3] = ["x", "y", "z"];

/// Untyped terms over the variables `x`, `y`, `z`, free or bound.
pub fn arb_term(depth: u32) -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        3 => prop::sample::select(NAMES.to_vec()).prop_map(Term::var),
        1 => prop::sample::select(NAMES.to_vec()).prop_map(|x| Term::lam(x, Term::var(x))),
    ];
    leaf.prop_recursive(depth, 24, 3, |inner| {
        prop_oneof![
            (prop::sample::select(NAMES.to_vec()), inner.clone()).prop_map(|(x, b)| Term::lam(x, b)),
            (inner.clone(), inner.clone()).prop_map(|(f, a)| Term::app(f, a)),
            (arb_scalar(), inner.clone()).prop_map(|(s, t)| Term::scale(s, t)),
            prop::collection::vec(inner.clone(), 2..4).prop_map(Term::sum),
            // shapes that are redexes for F2, F3 and B
            (arb_scalar(), inner.clone()).prop_map(|(s, t)| Term::sum([Term::scale(s, t.clone()), t])),
            inner.clone().prop_map(|t| Term::sum([t.clone(), t])),
            (prop::sample::select(NAMES.to_vec()), inner.clone(), inner)
                .prop_map(|(x, b, a)| Term::app(Term::lam(x, b), a)),
        ]
    })
}

pub fn arb_unit_type(depth: u32) -> BoxedStrategy<UnitType> {
    let leaf = prop::sample::select(vec!["X", "Y"]).prop_map(UnitType::var);
    leaf.prop_recursive(depth, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), arb_type_over(inner.clone())).prop_map(|(d, c)| UnitType::arrow(d, c)),
            (prop::sample::select(vec!["X", "Y"]), inner).prop_map(|(x, b)| UnitType::forall(Sort::Unit, x, b)),
        ]
    })
    .boxed()
}

fn arb_type_over(units: BoxedStrategy<UnitType>) -> impl Strategy<Value = Type> {
    prop_oneof![
        3 => units.clone().prop_map(Type::from),
        1 => Just(Type::gvar("Z")),
        1 => (arb_scalar(), units.clone()).prop_map(|(s, u)| Type::scale(s, u.into())),
        1 => prop::collection::vec(units, 2..4).prop_map(|us| Type::sum(us.into_iter().map(Type::from))),
    ]
}

pub fn arb_type(depth: u32) -> impl Strategy<Value = Type> {
    arb_type_over(arb_unit_type(depth))
}
