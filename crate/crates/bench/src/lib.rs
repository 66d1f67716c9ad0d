//! Inputs shared by the benchmarks.

use vecr::encodings::{booleans, hadamard, CoeffMatrix, CoeffVector};
use vecr::{parse_scalar, Scalar, Term, Type};

fn s(text: &str) -> Scalar {
    parse_scalar(text).expect("scalar literal")
}

/// `(H) (1/√2·true + 1/√2·false)`.
pub fn hadamard_on_plus() -> Term {
    let (tt, ff, _, _) = booleans();
    let h = s("1/sqrt2");
    Term::app(hadamard(), Term::sum([Term::scale(h.clone(), tt), Term::scale(h, ff)]))
}

/// `true + 0·false` at `𝕋 + 0·𝔽`.
pub fn hadamard_result() -> (Term, Type) {
    let (tt, ff, ty_t, ty_f) = booleans();
    let t = Term::sum([tt, Term::scale(Scalar::zero(), ff)]);
    (t, Type::sum([ty_t, Type::scale(Scalar::zero(), ty_f)]))
}

/// A dense 4×4 matrix and vector with irrational entries.
pub fn dense_4x4() -> (CoeffMatrix, CoeffVector) {
    let pool = ["1", "-1/2", "1/sqrt2", "sqrt2", "-1", "1/2", "-1/sqrt2", "2"];
    let rows = (0..4).map(|i| (0..4).map(|j| s(pool[(3 * i + j) % pool.len()])).collect()).collect();
    let v = (0..4).map(|j| s(pool[(j + 5) % pool.len()])).collect();
    (CoeffMatrix::new(rows).unwrap(), CoeffVector::new(v).unwrap())
}
