//! Greedy counterexample minimization.

use crate::rewrite::replace_at;
use crate::scalar::Scalar;
use crate::syntax::Term;

fn positions(t: &Term, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    out.push(path.clone());
    let mut i = 0;
    while let Some(c) = t.child(i) {
        path.push(i);
        positions(c, path, out);
        path.pop();
        i += 1;
    }
}

fn at<'a>(t: &'a Term, path: &[usize]) -> &'a Term {
    path.iter().fold(t, |cur, &i| cur.child(i).expect("valid path"))
}

/// Smaller variants of `t`: dropped summands first, then scalars set to 1,
/// then subterms lifted over their parent.
pub fn candidates(t: &Term) -> Vec<Term> {
    let mut paths = Vec::new();
    positions(t, &mut Vec::new(), &mut paths);
    let mut drops = Vec::new();
    let mut ones = Vec::new();
    let mut lifts = Vec::new();
    for p in &paths {
        let sub = at(t, p);
        match sub {
            Term::Sum(items) => {
                for k in 0..items.len() {
                    let rest = items.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, x)| x.clone());
                    drops.push(replace_at(t, p, Term::sum(rest)));
                }
            }
            Term::Scale(a, inner) if !a.is_one() => {
                ones.push(replace_at(t, p, Term::scale(Scalar::one(), (**inner).clone())));
            }
            _ => {}
        }
        let mut i = 0;
        while let Some(c) = sub.child(i) {
            if c.is_locally_closed() || !matches!(sub, Term::Abs(..)) {
                lifts.push(replace_at(t, p, c.clone()));
            }
            i += 1;
        }
    }
    drops.into_iter().chain(ones).chain(lifts).filter(|c| c.is_locally_closed()).collect()
}

/// Repeatedly takes the first candidate on which `fails` still holds,
/// evaluating `fails` at most `max_evals` times.
pub fn shrink(t: &Term, fails: &dyn Fn(&Term) -> bool, max_evals: usize) -> Term {
    let mut cur = t.clone();
    let mut evals = 0;
    'outer: loop {
        for c in candidates(&cur) {
            if evals == max_evals {
                break 'outer;
            }
            evals += 1;
            if fails(&c) {
                cur = c;
                continue 'outer;
            }
        }
        break;
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_term;

    #[test]
    fn shrinks_to_a_minimal_failing_term() {
        let t = parse_term(r"2 * ((\x.x) (\y.y) + \z.\w.z) + \u.u").unwrap();
        let fails = |c: &Term| c.has_app();
        let small = shrink(&t, &fails, 100);
        assert_eq!(small, parse_term(r"(\x.x) (\y.y)").unwrap());
    }

    #[test]
    fn candidates_stay_locally_closed() {
        let t = parse_term(r"\x.(x) (2 * x + \y.y)").unwrap();
        assert!(candidates(&t).iter().all(Term::is_locally_closed));
    }
}
