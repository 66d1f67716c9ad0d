mod common;

use common::{arb_scalar, arb_term, arb_type, arb_unit_type};
use proptest::prelude::*;
use vecr::syntax::{alpha_eq, parse_term, parse_type, Printer};
use vecr::{Term, Type, UnitType};

/// No sum directly inside a sum, and every sum has at least two summands.
fn flat_term(t: &Term) -> bool {
    let here = match t {
        Term::Sum(items) => items.len() >= 2 && !items.iter().any(|i| matches!(i, Term::Sum(_))),
        _ => true,
    };
    here && (0..).map_while(|i| t.child(i)).all(flat_term)
}

fn flat_type(t: &Type) -> bool {
    match t {
        Type::Sum(items) => items.len() >= 2 && items.iter().all(|i| !matches!(i, Type::Sum(_)) && flat_type(i)),
        Type::Scale(_, inner) => flat_type(inner),
        Type::Unit(u) => flat_unit(u),
        _ => true,
    }
}

fn flat_unit(u: &UnitType) -> bool {
    match u {
        UnitType::Arrow(d, c) => flat_unit(d) && flat_type(c),
        UnitType::Forall(_, _, b) => flat_unit(b),
        _ => true,
    }
}

const TOKENS: [&str; 24] = [
    "x", "y", "\\x.", "λy.", "(", ")", "+", "*", "·", "2", "1/2", "sqrt2", "-", " ", "X", "->", "→", "forall X.", "%Z",
    ":", "\\x:X.", "[", ";", ",",
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2_000))]

    #[test]
    fn terms_round_trip_through_both_printers(t in arb_term(5)) {
        for p in [Printer::default(), Printer::unicode()] {
            let text = p.term(&t);
            let back = parse_term(&text).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
            prop_assert!(alpha_eq(&back, &t), "{} reparsed as {}", text, p.term(&back));
        }
    }

    #[test]
    fn types_round_trip_through_both_printers(t in arb_type(3)) {
        for p in [Printer::default(), Printer::unicode()] {
            let text = p.ty(&t);
            let back = parse_type(&text).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
            prop_assert_eq!(&back, &t, "{}", text);
        }
    }

    #[test]
    fn annotated_binders_round_trip(ann in arb_unit_type(2), body in arb_term(3)) {
        let t = Term::lam_ann("x", Some(ann), body);
        let text = Printer::default().term(&t);
        prop_assert!(alpha_eq(&parse_term(&text).unwrap(), &t), "{}", text);
    }

    #[test]
    fn substitution_only_adds_free_variables_of_the_argument(t in arb_term(4), b in arb_term(2)) {
        let out = t.subst("x", &b).free_vars();
        let mut allowed = t.free_vars();
        allowed.remove("x");
        allowed.extend(b.free_vars());
        prop_assert!(out.is_subset(&allowed));
    }

    #[test]
    fn scaling_by_a_scalar_never_nests_sums(s in arb_scalar(), t in arb_term(3), r in arb_term(3)) {
        prop_assert!(flat_term(&Term::sum([Term::scale(s, t.clone()), r, t])));
    }

    #[test]
    fn parsed_terms_and_types_are_flat(toks in prop::collection::vec(prop::sample::select(TOKENS.to_vec()), 1..16)) {
        let src = toks.concat();
        if let Ok(t) = parse_term(&src) {
            prop_assert!(flat_term(&t), "{}", src);
        }
        if let Ok(t) = parse_type(&src) {
            prop_assert!(flat_type(&t), "{}", src);
        }
    }
}
