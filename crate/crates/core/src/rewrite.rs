//! One-step reduction, deterministic and randomized normalization, traces.
//!
//! Sums are multisets, so the factorization rules compare any two summands.
//! Paths index children as in [`Term::child`].

use crate::scalar::Scalar;
use crate::syntax::Term;
use rand::Rng;
use serde::Serialize;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum RuleId {
    E1,
    E2,
    E3,
    F1,
    F2,
    F3,
    B,
    A1,
    A2,
    A3,
    A4,
}

impl RuleId {
    /// Priority class: E, F, B, A.
    pub fn group(self) -> u8 {
        use RuleId::*;
        match self {
            E1 | E2 | E3 => 0,
            F1 | F2 | F3 => 1,
            B => 2,
            A1 | A2 | A3 | A4 => 3,
        }
    }

    pub const ALL: [RuleId; 11] = [
        RuleId::E1,
        RuleId::E2,
        RuleId::E3,
        RuleId::F1,
        RuleId::F2,
        RuleId::F3,
        RuleId::B,
        RuleId::A1,
        RuleId::A2,
        RuleId::A3,
        RuleId::A4,
    ];
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// A redex: where it is, which rule fires, and the whole term afterwards.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RedexSite {
    pub path: Vec<usize>,
    pub rule: RuleId,
    pub under_lambda: bool,
    pub result: Term,
}

/// Local redex before it is plugged back into the surrounding term.
#[derive(Clone, Debug)]
struct Local {
    path: Vec<usize>,
    rule: RuleId,
    under_lambda: bool,
    replacement: Term,
}

fn local_redexes(t: &Term, path: &mut Vec<usize>, under_lambda: bool, out: &mut Vec<Local>) {
    let mut push = |rule, replacement| {
        out.push(Local {
            path: path.clone(),
            rule,
            under_lambda,
            replacement,
        })
    };
    match t {
        Term::Scale(alpha, u) => {
            if alpha.is_one() {
                push(RuleId::E1, (**u).clone());
            }
            match &**u {
                Term::Scale(beta, r) => push(RuleId::E2, Term::scale(alpha * beta, (**r).clone())),
                Term::Sum(items) => push(
                    RuleId::E3,
                    Term::sum(items.iter().map(|r| Term::scale(alpha.clone(), r.clone())).collect::<Vec<_>>()),
                ),
                _ => {}
            }
        }
        Term::Sum(items) => {
            for i in 0..items.len() {
                for j in i + 1..items.len() {
                    for (rule, merged) in factorizations(&items[i], &items[j]) {
                        let rest = items
                            .iter()
                            .enumerate()
                            .filter(|(k, _)| *k != i && *k != j)
                            .map(|(_, x)| x.clone());
                        push(rule, Term::sum(rest.chain(std::iter::once(merged)).collect::<Vec<_>>()));
                    }
                }
            }
        }
        Term::App(f, a) => {
            if let Term::Abs(_, _, body) = &**f {
                if a.is_basis() {
                    push(RuleId::B, body.instantiate(a));
                }
            }
            if let Term::Sum(items) = &**f {
                push(
                    RuleId::A1,
                    Term::sum(items.iter().map(|t| Term::app(t.clone(), (**a).clone())).collect::<Vec<_>>()),
                );
            }
            if let Term::Sum(items) = &**a {
                push(
                    RuleId::A2,
                    Term::sum(items.iter().map(|r| Term::app((**f).clone(), r.clone())).collect::<Vec<_>>()),
                );
            }
            if let Term::Scale(alpha, t) = &**f {
                push(RuleId::A3, Term::scale(alpha.clone(), Term::app((**t).clone(), (**a).clone())));
            }
            if let Term::Scale(alpha, r) = &**a {
                push(RuleId::A4, Term::scale(alpha.clone(), Term::app((**f).clone(), (**r).clone())));
            }
        }
        Term::Bound(_) | Term::Free(_) | Term::Abs(..) => {}
    }
    let children: Vec<&Term> = (0..).map_while(|i| t.child(i)).collect();
    let inner_lambda = under_lambda || matches!(t, Term::Abs(..));
    for (i, c) in children.into_iter().enumerate() {
        path.push(i);
        local_redexes(c, path, inner_lambda, out);
        path.pop();
    }
}

/// Every way two summands can be merged by a factorization rule.
fn factorizations(x: &Term, y: &Term) -> Vec<(RuleId, Term)> {
    let mut out = Vec::new();
    let one = Scalar::one();
    let split = |t: &Term| match t {
        Term::Scale(a, c) => Some((a.clone(), (**c).clone())),
        _ => None,
    };
    let (sx, sy) = (split(x), split(y));
    if let (Some((a, cx)), Some((b, cy))) = (&sx, &sy) {
        if cx == cy {
            out.push((RuleId::F1, Term::scale(a + b, cx.clone())));
        }
    }
    if let Some((a, cx)) = &sx {
        if cx == y {
            out.push((RuleId::F2, Term::scale(a + &one, y.clone())));
        }
    }
    if let Some((b, cy)) = &sy {
        if cy == x {
            out.push((RuleId::F2, Term::scale(b + &one, x.clone())));
        }
    }
    if x == y {
        out.push((RuleId::F3, Term::scale(&one + &one, x.clone())));
    }
    out
}

/// Replaces the subterm at `path`, re-flattening sums on the way up.
pub fn replace_at(t: &Term, path: &[usize], new: Term) -> Term {
    let Some((&i, rest)) = path.split_first() else {
        return new;
    };
    match t {
        Term::Abs(h, ann, body) => Term::Abs(h.clone(), ann.clone(), Arc::new(replace_at(body, rest, new))),
        Term::App(f, a) if i == 0 => Term::App(Arc::new(replace_at(f, rest, new)), a.clone()),
        Term::App(f, a) => Term::App(f.clone(), Arc::new(replace_at(a, rest, new))),
        Term::Scale(s, u) => Term::Scale(s.clone(), Arc::new(replace_at(u, rest, new))),
        Term::Sum(items) => {
            let mut items = items.clone();
            let replaced = replace_at(&items[i], rest, new);
            items[i] = replaced;
            Term::sum(items)
        }
        Term::Bound(_) | Term::Free(_) => panic!("path runs past a variable"),
    }
}

fn priority(l: &Local) -> (u8, bool) {
    (l.rule.group(), l.under_lambda)
}

fn collect(t: &Term) -> Vec<Local> {
    let mut out = Vec::new();
    local_redexes(t, &mut Vec::new(), false, &mut out);
    out
}

/// All one-step reducts, in strategy order (group, under-λ last, preorder).
pub fn step_candidates(t: &Term) -> Vec<RedexSite> {
    let mut locals = collect(t);
    // stable sort keeps preorder within a priority class
    locals.sort_by_key(priority);
    locals
        .into_iter()
        .map(|l| RedexSite {
            result: replace_at(t, &l.path, l.replacement),
            path: l.path,
            rule: l.rule,
            under_lambda: l.under_lambda,
        })
        .collect()
}

fn best(t: &Term) -> Option<Local> {
    collect(t).into_iter().min_by_key(priority)
}

/// One deterministic step: `E > F > B > A`, leftmost-outermost in each group.
pub fn step(t: &Term) -> Option<Term> {
    step_site(t).map(|s| s.result)
}

pub fn step_site(t: &Term) -> Option<RedexSite> {
    best(t).map(|l| RedexSite {
        result: replace_at(t, &l.path, l.replacement),
        path: l.path,
        rule: l.rule,
        under_lambda: l.under_lambda,
    })
}

pub fn is_normal_form(t: &Term) -> bool {
    collect(t).is_empty()
}

/// Membership in the value set: a sum of pairwise-distinct abstractions,
/// each optionally scaled.
pub fn is_value(t: &Term) -> bool {
    let mut cores = Vec::new();
    for s in t.summands() {
        let core = match s {
            Term::Scale(_, c) => &**c,
            other => other,
        };
        if !core.is_abs() || cores.contains(&core) {
            return false;
        }
        cores.push(core);
    }
    true
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub rule: RuleId,
    pub path: Vec<usize>,
    pub term: Term,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub initial: Term,
    pub steps: Vec<TraceStep>,
}

#[derive(Serialize)]
struct TraceLine<'a> {
    step: usize,
    rule: RuleId,
    path: &'a [usize],
    term: String,
}

pub fn render_path(path: &[usize]) -> String {
    if path.is_empty() {
        "root".to_string()
    } else {
        path.iter().map(usize::to_string).collect::<Vec<_>>().join(".")
    }
}

impl Trace {
    pub fn last(&self) -> &Term {
        self.steps.last().map(|s| &s.term).unwrap_or(&self.initial)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// One line per step: `[rule] @path  term`.
    pub fn render(&self, show: &dyn Fn(&Term) -> String) -> String {
        self.steps
            .iter()
            .map(|s| format!("[{}] @{}  {}\n", s.rule, render_path(&s.path), show(&s.term)))
            .collect()
    }

    /// Line-delimited JSON, one object per step.
    pub fn render_json(&self, show: &dyn Fn(&Term) -> String) -> String {
        self.steps
            .iter()
            .enumerate()
            .map(|(k, s)| {
                let line = TraceLine {
                    step: k + 1,
                    rule: s.rule,
                    path: &s.path,
                    term: show(&s.term),
                };
                serde_json::to_string(&line).expect("trace line serializes") + "\n"
            })
            .collect()
    }
}

#[derive(Debug, Clone, Error)]
#[error("fuel exhausted after {} steps", .trace.len())]
pub struct FuelExhausted {
    pub trace: Box<Trace>,
}

/// Deterministic normalization with a full trace.
pub fn normalize(t: &Term, fuel: usize) -> Result<Trace, FuelExhausted> {
    let mut trace = Trace {
        initial: t.clone(),
        steps: Vec::new(),
    };
    let mut cur = t.clone();
    loop {
        let Some(site) = step_site(&cur) else {
            return Ok(trace);
        };
        if trace.steps.len() >= fuel {
            return Err(FuelExhausted { trace: Box::new(trace) });
        }
        cur = site.result.clone();
        trace.steps.push(TraceStep {
            rule: site.rule,
            path: site.path,
            term: site.result,
        });
    }
}

/// Normal form and step count, without recording a trace. `None` when fuel
/// runs out.
pub fn normal_form(t: &Term, fuel: usize) -> Option<(Term, usize)> {
    let mut cur = t.clone();
    for n in 0..=fuel {
        match best(&cur) {
            None => return Some((cur, n)),
            Some(_) if n == fuel => return None,
            Some(l) => cur = replace_at(&cur, &l.path, l.replacement),
        }
    }
    None
}

/// Normalization that picks a uniformly random redex at each step.
pub fn normal_form_random<R: Rng>(t: &Term, fuel: usize, rng: &mut R) -> Option<(Term, usize)> {
    let mut cur = t.clone();
    for n in 0..=fuel {
        let mut locals = collect(&cur);
        if locals.is_empty() {
            return Some((cur, n));
        }
        if n == fuel {
            return None;
        }
        let l = locals.swap_remove(rng.gen_range(0..locals.len()));
        cur = replace_at(&cur, &l.path, l.replacement);
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_term;

    fn t(src: &str) -> Term {
        let tru = Term::lams(&["x", "y"], Term::var("x"));
        let fls = Term::lams(&["x", "y"], Term::var("y"));
        parse_term(src).unwrap().subst("true", &tru).subst("false", &fls)
    }

    #[test]
    fn beta_on_frozen_argument() {
        let src = t(r"(\x.\y.x) (\f. 1/2 * true + 3 * false)");
        let cands = step_candidates(&src);
        assert_eq!(cands.len(), 1);
        assert_eq!(cands[0].rule, RuleId::B);
        assert_eq!(cands[0].result, t(r"\y.\f. 1/2 * true + 3 * false"));
    }

    #[test]
    fn factorization_candidates() {
        let cands = step_candidates(&t(r"2 * (\x.x) + 3 * \y.y"));
        assert!(cands.iter().any(|c| c.rule == RuleId::F1 && c.result == t(r"5 * \x.x")));
        assert!(step_candidates(&t(r"\x.x")).is_empty());
        let f2 = step_candidates(&t(r"2 * (\x.x) + \y.y"));
        assert_eq!(f2[0].rule, RuleId::F2);
        assert_eq!(f2[0].result, t(r"3 * \x.x"));
    }

    #[test]
    fn strategy_examples() {
        assert_eq!(step(&t(r"1 * \x.x")), Some(t(r"\x.x")));
        assert_eq!(step(&t("(a + b) c")), Some(t("(a) c + (b) c")));
        assert_eq!(step(&t("true")), None);
        assert_eq!(step(&t("(a) (2 * b)")), Some(t("2 * (a) b")));
        assert_eq!(step(&t("(2 * a) b")), Some(t("2 * (a) b")));
        assert_eq!(step(&t("(a) (b + c)")), Some(t("(a) b + (a) c")));
    }

    #[test]
    fn beta_waits_for_basis_argument() {
        let src = t(r"(\x.x) (2 * \y.y)");
        let sites = step_candidates(&src);
        assert!(sites.iter().all(|s| s.rule != RuleId::B));
    }

    #[test]
    fn values_and_normal_forms() {
        assert!(is_value(&t("true + 0 * false")));
        assert!(is_normal_form(&t("true + 0 * false")));
        assert!(!is_normal_form(&t(r"1 * \x.x")));
        let dup = t(r"(\x.x) + \x.x");
        assert!(!is_normal_form(&dup));
        assert_eq!(step_site(&dup).unwrap().rule, RuleId::F3);
        assert!(!is_value(&dup));
        assert!(!is_value(&t("x")));
    }

    #[test]
    fn zero_coefficients_survive() {
        let nf = normalize(&t(r"1/2 * (\x.x) + -1/2 * \x.x"), 100).unwrap();
        assert_eq!(*nf.last(), t(r"0 * \x.x"));
    }

    #[test]
    fn omega_exhausts_fuel() {
        let omega = t(r"(\x.(x) x) (\x.(x) x)");
        let err = normalize(&omega, 50).unwrap_err();
        assert_eq!(err.trace.len(), 50);
        assert!(normal_form(&omega, 1000).is_none());
    }

    #[test]
    fn redex_under_lambda_is_last_in_group() {
        let src = t(r"(\y.(\x.x) y) ((\z.z) w)");
        let site = step_site(&src).unwrap();
        assert_eq!(site.rule, RuleId::B);
        assert!(!site.under_lambda);
        assert_eq!(site.path, vec![1]);
    }

    #[test]
    fn trace_rendering() {
        let tr = normalize(&t(r"1 * (2 * \x.x)"), 10).unwrap();
        let text = tr.render(&|t| t.to_string());
        assert!(text.starts_with("[E1] @root  2 * \\x.x"), "{text}");
        let json = tr.render_json(&|t| t.to_string());
        assert!(json.contains("\"rule\":\"E1\""));
    }
}
