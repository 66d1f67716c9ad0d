use super::*;
use crate::scalar::Scalar;
use crate::syntax::{parse_term, parse_type, UnitType};

const TT: &str = "forall X Y. X -> Y -> X";
const FF: &str = "forall X Y. X -> Y -> Y";

fn term(src: &str) -> Term {
    let t = parse_term(src).unwrap();
    t.subst_all(&|n| match n {
        "true" => Some(parse_term(r"\x.\y.x").unwrap()),
        "false" => Some(parse_term(r"\x.\y.y").unwrap()),
        _ => None,
    })
}

fn ty(src: &str) -> Type {
    parse_type(&src.replace("TT", &format!("({TT})")).replace("FF", &format!("({FF})"))).unwrap()
}

fn checks(src: &str, t: &str) -> Derivation {
    match check(&Context::new(), &term(src), &ty(t)) {
        Ok(d) => d,
        Err(e) => panic!("{src} : {t}: {e}"),
    }
}

fn rejects(src: &str, t: &str) {
    assert!(check(&Context::new(), &term(src), &ty(t)).is_err(), "{src} : {t} should fail");
}

#[test]
fn booleans() {
    let d = checks("true", "TT");
    assert_eq!(d.rules(), vec!["forall-I", "forall-I", "->I", "->I", "ax"]);
    checks("false", "FF");
    rejects("true", "FF");
    rejects("false", "TT");
}

#[test]
fn superpositions() {
    checks("1/2 * true + 3 * false", "1/2 * TT + 3 * FF");
    checks("true + 0 * false", "TT + 0 * FF");
    rejects("true + 0 * false", "TT");
    rejects("true", "TT + 0 * FF");
}

#[test]
fn s_rule_merges_into_one_type() {
    // α·true + β·false : (α+β)·∀X.X→X→X
    let d = checks("2 * true + 5 * false", "7 * forall X. X -> X -> X");
    assert!(d.rules().contains(&"S"));
    rejects("2 * true + 5 * false", "6 * forall X. X -> X -> X");
}

#[test]
fn zero_scaled_terms() {
    checks("0 * true", "0 * TT");
    checks("0 * (true + false)", "0 * TT + 0 * FF");
    checks("0 * (2 * true + false)", "0 * TT + 0 * FF");
}

#[test]
fn motivating_example() {
    let ctx = Context::new();
    let u = "(U -> U) + (V -> V)";
    let d = check(&ctx, &term(r"(\x.x) + (\x.x)"), &ty(u)).unwrap();
    assert!(d.is_valid());
    let reduct = Term::scale(&Scalar::one() + &Scalar::one(), term(r"\x.x"));
    let d = check(&ctx, &reduct, &ty(u)).unwrap();
    assert_eq!(d.rule.name(false), "S");
    rejects(r"\x.x", u);
}

#[test]
fn variables_and_instances() {
    let ctx = Context::new().extend("x".into(), parse_type(TT).unwrap().as_unit().unwrap().clone());
    assert!(check(&ctx, &Term::var("x"), &ty("A -> B -> A")).is_ok());
    assert!(check(&ctx, &Term::var("x"), &ty("forall Y. Y -> Y -> Y")).is_ok());
    assert!(check(&ctx, &Term::var("x"), &ty("A -> B -> B")).is_err());
    assert!(matches!(check(&ctx, &Term::var("y"), &ty("A")), Err(TypeError::UnboundVariable(_))));
}

#[test]
fn applications() {
    checks(r"(\x.x) true", "TT");
    checks(r"(\x.x) (2 * true)", "2 * TT");
    checks(r"(\x.x) (true + false)", "TT + FF");
    checks(r"(2 * (\x.x) + \y.y) true", "3 * TT");
    checks(r"(\f.(f) true) (\x.x)", "TT");
    rejects(r"(\x.x) true", "FF");
}

#[test]
fn synthesis() {
    let ctx = Context::new().extend("x".into(), UnitType::var("U"));
    let (t, d) = synthesize(&ctx, &Term::var("x")).unwrap();
    assert_eq!(t, canonicalize(&ty("U")));
    assert_eq!(d.rules(), vec!["ax"]);
    let (t, _) = synthesize(&Context::new(), &term("true")).unwrap();
    assert_eq!(t, canonicalize(&ty("TT")));
    let (t, _) = synthesize(&Context::new(), &term("1/2 * true + 1/2 * false")).unwrap();
    assert_eq!(t, canonicalize(&ty("1/2 * TT + 1/2 * FF")));
    let (t, _) = synthesize(&Context::new(), &term(r"\x:A.\y:B.x")).unwrap();
    assert_eq!(t, canonicalize(&ty(TT)));
}

fn matrix(a: &str, b: &str, c: &str, d: &str) -> Term {
    term(&format!(
        r"\x:((forall X. X -> X) -> {a} * TT + {b} * FF) -> ((forall X. X -> X) -> {c} * TT + {d} * FF) -> ((forall X. X -> X) -> %X).(((x) (\f.{a} * true + {b} * false)) (\f.{c} * true + {d} * false)) (\y.y)"
    )
    .replace("TT", &format!("({TT})"))
    .replace("FF", &format!("({FF})")))
}

#[test]
fn matrix_type_is_synthesized() {
    let m = matrix("2", "3", "5", "7");
    let want = ty(
        "forall %X. (((forall X. X -> X) -> 2 * TT + 3 * FF) -> ((forall X. X -> X) -> 5 * TT + 7 * FF) -> (forall X. X -> X) -> %X) -> %X",
    );
    let (t, d) = synthesize(&Context::new(), &m).unwrap();
    assert_eq!(t, canonicalize(&want), "{t}");
    assert!(d.is_valid());
}

#[test]
fn hadamard_typing() {
    let h = matrix("1/sqrt2", "1/sqrt2", "1/sqrt2", "-1/sqrt2");
    let arg = term("1/sqrt2 * true + 1/sqrt2 * false");
    let app = Term::app(h.clone(), arg);
    let d = check(&Context::new(), &app, &ty("TT + 0 * FF")).unwrap();
    assert!(d.is_valid());
    let (t, _) = synthesize(&Context::new(), &Term::app(h, term("true"))).unwrap();
    let h = Scalar::inv_sqrt2();
    let want = canonicalize(&ty(TT)).scaled(&h).plus(&canonicalize(&ty(FF)).scaled(&h));
    assert_eq!(t, want);
}

#[test]
fn synthesis_requires_annotations_when_inference_fails() {
    let e = synthesize(&Context::new(), &term(r"\x.(x) x")).unwrap_err();
    assert!(matches!(e, TypeError::AnnotationRequired(_)), "{e}");
}

#[test]
fn budget_is_enforced() {
    let c = Checker::with_budget(3);
    let e = c.check_type(&Context::new(), &term("true + false"), &ty("TT + FF")).unwrap_err();
    assert_eq!(e, TypeError::SearchBudgetExceeded);
}
