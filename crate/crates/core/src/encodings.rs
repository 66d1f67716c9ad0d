//! Booleans, thunks, and finite vectors and matrices as terms.

use crate::lexer::ParseError;
use crate::rewrite::normal_form;
use crate::scalar::{parse_scalar, Scalar};
use crate::syntax::{Hint, Sort, Term, TyVar, Type, UnitType};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodingError {
    #[error("basis index {i} out of range for dimension {n}")]
    IndexOutOfRange { i: usize, n: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("cannot decode: {0}")]
    Decode(String),
    #[error("normalization ran out of fuel after {0} steps")]
    FuelExhausted(usize),
    #[error("bad literal: {0}")]
    Literal(String),
}

impl From<ParseError> for EncodingError {
    fn from(e: ParseError) -> Self {
        EncodingError::Literal(e.to_string())
    }
}

/// `eᵢⁿ = λx₁⋯xₙ.xᵢ`, with `1 ≤ i ≤ n`.
pub fn basis_term(i: usize, n: usize) -> Result<Term, EncodingError> {
    if i == 0 || i > n {
        return Err(EncodingError::IndexOutOfRange { i, n });
    }
    let mut t = Term::Bound(n - i);
    for k in (1..=n).rev() {
        t = Term::Abs(Hint::new(&format!("x{k}")), None, Arc::new(t));
    }
    Ok(t)
}

/// `Eᵢⁿ = ∀X₁⋯Xₙ.X₁→⋯→Xₙ→Xᵢ`.
pub fn basis_type(i: usize, n: usize) -> Result<UnitType, EncodingError> {
    if i == 0 || i > n {
        return Err(EncodingError::IndexOutOfRange { i, n });
    }
    let var = |k: usize| UnitType::Var(TyVar::Bound(n - k));
    let mut body = var(i);
    for k in (1..=n).rev() {
        body = UnitType::arrow(var(k), body);
    }
    for k in (1..=n).rev() {
        body = UnitType::Forall(Sort::Unit, Hint::new(&format!("X{k}")), Arc::new(body));
    }
    Ok(body)
}

pub fn true_term() -> Term {
    basis_term(1, 2).unwrap()
}

pub fn false_term() -> Term {
    basis_term(2, 2).unwrap()
}

/// `(true, false, 𝕋, 𝔽)`.
pub fn booleans() -> (Term, Term, Type, Type) {
    (true_term(), false_term(), Type::Unit(basis_type(1, 2).unwrap()), Type::Unit(basis_type(2, 2).unwrap()))
}

/// `λx.x`.
pub fn identity() -> Term {
    Term::lam("x", Term::var("x"))
}

/// `I = ∀X.X→X`, the type of [`identity`] and of thunk arguments.
pub fn identity_type() -> UnitType {
    UnitType::forall(Sort::Unit, "X", UnitType::arrow(UnitType::var("X"), Type::unit_var("X")))
}

/// `⌈t⌉ = λf.t`; the binder is fresh for `t` by construction.
pub fn freeze(t: &Term) -> Term {
    Term::Abs(Hint::new("f"), None, Arc::new(t.shift(1, 0)))
}

/// `⌊t⌋ = (t) λx.x`.
pub fn unfreeze(t: &Term) -> Term {
    Term::app(t.clone(), identity())
}

/// `⌈T⌉ = I→T`.
pub fn freeze_type(t: Type) -> UnitType {
    UnitType::arrow(identity_type(), t)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoeffVector {
    entries: Vec<Scalar>,
}

impl CoeffVector {
    pub fn new(entries: Vec<Scalar>) -> Result<Self, EncodingError> {
        if entries.is_empty() {
            return Err(EncodingError::DimensionMismatch("vectors need at least one entry".into()));
        }
        Ok(CoeffVector { entries })
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Scalar] {
        &self.entries
    }

    /// Parses `(a, b, …)`, `[a, b, …]` or a bare comma-separated list.
    pub fn parse(text: &str) -> Result<Self, EncodingError> {
        let t = text.trim();
        let inner = strip_brackets(t, '(', ')').or_else(|| strip_brackets(t, '[', ']')).unwrap_or(t);
        CoeffVector::new(parse_list(inner)?)
    }
}

impl fmt::Display for CoeffVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.entries.iter().map(Scalar::to_string).collect();
        write!(f, "({})", items.join(", "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoeffMatrix {
    rows: Vec<Vec<Scalar>>,
}

impl CoeffMatrix {
    pub fn new(rows: Vec<Vec<Scalar>>) -> Result<Self, EncodingError> {
        let cols = rows.first().map(Vec::len).unwrap_or(0);
        if cols == 0 || rows.iter().any(|r| r.len() != cols) {
            return Err(EncodingError::DimensionMismatch("matrix rows must be non-empty and of equal length".into()));
        }
        Ok(CoeffMatrix { rows })
    }

    pub fn rows(&self) -> usize {
        self.rows.len()
    }

    pub fn cols(&self) -> usize {
        self.rows[0].len()
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.rows[i][j]
    }

    pub fn column(&self, j: usize) -> CoeffVector {
        CoeffVector {
            entries: self.rows.iter().map(|r| r[j].clone()).collect(),
        }
    }

    /// Parses `[a, b; c, d]`: rows separated by `;`, entries by `,`.
    pub fn parse(text: &str) -> Result<Self, EncodingError> {
        let t = text.trim();
        let inner = strip_brackets(t, '[', ']').unwrap_or(t);
        let rows = inner.split(';').map(parse_list).collect::<Result<Vec<_>, _>>()?;
        CoeffMatrix::new(rows)
    }
}

impl fmt::Display for CoeffMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .rows
            .iter()
            .map(|r| r.iter().map(Scalar::to_string).collect::<Vec<_>>().join(", "))
            .collect();
        write!(f, "[{}]", rows.join("; "))
    }
}

fn strip_brackets(t: &str, open: char, close: char) -> Option<&str> {
    t.strip_prefix(open)?.strip_suffix(close)
}

fn parse_list(text: &str) -> Result<Vec<Scalar>, EncodingError> {
    text.split(',')
        .map(|s| parse_scalar(s.trim()).map_err(EncodingError::from))
        .collect()
}

fn combination(v: &CoeffVector) -> (Term, Type) {
    let n = v.dim();
    let terms = v.entries.iter().enumerate().map(|(i, a)| Term::scale(a.clone(), basis_term(i + 1, n).unwrap()));
    let types = v
        .entries
        .iter()
        .enumerate()
        .map(|(i, a)| Type::scale(a.clone(), Type::Unit(basis_type(i + 1, n).unwrap())));
    (Term::sum(terms.collect::<Vec<_>>()), Type::sum(types.collect::<Vec<_>>()))
}

/// `Σαᵢ·eᵢⁿ : Σαᵢ·Eᵢⁿ`.
pub fn encode_vector(v: &CoeffVector) -> (Term, Type) {
    combination(v)
}

/// Reads coefficients off a value whose summands are scaled basis terms of
/// dimension `n`. Missing directions are 0.
pub fn decode_vector(t: &Term, n: usize) -> Result<CoeffVector, EncodingError> {
    let basis: Vec<Term> = (1..=n).map(|i| basis_term(i, n)).collect::<Result<_, _>>()?;
    let mut entries = vec![Scalar::zero(); n];
    for item in t.summands() {
        let mut coeff = Scalar::one();
        let mut cur = item;
        while let Term::Scale(a, inner) = cur {
            coeff = &coeff * a;
            cur = inner;
        }
        let i = basis
            .iter()
            .position(|b| b == cur)
            .ok_or_else(|| EncodingError::Decode(format!("{cur} is not a basis term of dimension {n}")))?;
        entries[i] = &entries[i] + &coeff;
    }
    CoeffVector::new(entries)
}

/// `λx.⌊((x) ⌈c₁⌉ ⋯) ⌈cₘ⌉⌋ : ∀𝕏.(⌈C₁⌉→⋯→⌈Cₘ⌉→⌈𝕏⌉)→𝕏`, where `cⱼ : Cⱼ` is
/// column `j`. The binder carries the domain as its annotation.
pub fn encode_matrix(m: &CoeffMatrix) -> (Term, Type) {
    let cols: Vec<(Term, Type)> = (0..m.cols()).map(|j| combination(&m.column(j))).collect();
    let result = Type::gvar("X");
    let mut dom = freeze_type(result.clone());
    for (_, ty) in cols.iter().rev() {
        dom = UnitType::arrow(freeze_type(ty.clone()), dom);
    }
    let mut body = Term::var("x");
    for (t, _) in &cols {
        body = Term::app(body, freeze(t));
    }
    let term = Term::lam_ann("x", Some(dom.clone()), unfreeze(&body));
    let ty = UnitType::forall(Sort::General, "X", UnitType::arrow(dom, result));
    (term, Type::Unit(ty))
}

pub fn hadamard_matrix() -> CoeffMatrix {
    let h = Scalar::inv_sqrt2();
    CoeffMatrix::new(vec![vec![h.clone(), h.clone()], vec![h.clone(), -h]]).unwrap()
}

/// The Hadamard gate on booleans.
pub fn hadamard() -> Term {
    encode_matrix(&hadamard_matrix()).0
}

/// Normalizes `(M) v` and decodes the result; equals the product `M·v`.
pub fn apply_and_decode(m: &CoeffMatrix, v: &CoeffVector, fuel: usize) -> Result<CoeffVector, EncodingError> {
    if m.cols() != v.dim() {
        return Err(EncodingError::DimensionMismatch(format!(
            "{}x{} matrix applied to a vector of dimension {}",
            m.rows(),
            m.cols(),
            v.dim()
        )));
    }
    let app = Term::app(encode_matrix(m).0, encode_vector(v).0);
    let (nf, _) = normal_form(&app, fuel).ok_or(EncodingError::FuelExhausted(fuel))?;
    decode_vector(&nf, m.rows())
}

/// Named closed terms: `true`, `false`, `id` and `H`.
pub fn prelude() -> Vec<(String, Term)> {
    vec![
        ("true".into(), true_term()),
        ("false".into(), false_term()),
        ("id".into(), identity()),
        ("H".into(), hadamard()),
    ]
}

/// Named types: `T` and `F` for the boolean types, `I` for the identity type.
pub fn prelude_types() -> Vec<(String, UnitType)> {
    vec![
        ("T".into(), basis_type(1, 2).unwrap()),
        ("F".into(), basis_type(2, 2).unwrap()),
        ("I".into(), identity_type()),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rewrite::normal_form;
    use crate::syntax::{parse_term, parse_type, Context};
    use crate::typesys::{check, synthesize, type_equiv, weight_type};

    #[test]
    fn booleans_match_their_definitions() {
        let (t, f, tt, ff) = booleans();
        assert_eq!(t, parse_term(r"\x.\y.x").unwrap());
        assert_eq!(f, parse_term(r"\x.\y.y").unwrap());
        assert_eq!(tt, parse_type("forall X Y. X -> Y -> X").unwrap());
        assert_eq!(ff, parse_type("forall X Y. X -> (Y -> Y)").unwrap());
        assert!(check(&Context::new(), &t, &tt).is_ok());
        assert!(check(&Context::new(), &f, &ff).is_ok());
    }

    #[test]
    fn basis() {
        assert_eq!(basis_term(3, 3).unwrap(), parse_term(r"\a.\b.\c.c").unwrap());
        assert_eq!(basis_term(1, 2).unwrap(), true_term());
        assert!(basis_term(0, 2).is_err());
        assert!(basis_type(3, 2).is_err());
        for n in 1..=4 {
            for i in 1..=n {
                let ty = Type::Unit(basis_type(i, n).unwrap());
                assert!(check(&Context::new(), &basis_term(i, n).unwrap(), &ty).is_ok(), "e_{i}^{n}");
            }
        }
    }

    #[test]
    fn thunks() {
        let t = true_term();
        let (nf, _) = normal_form(&unfreeze(&freeze(&t)), 10).unwrap();
        assert_eq!(nf, t);
        let frozen = freeze(&parse_term("x").unwrap());
        assert_eq!(frozen, parse_term(r"\f.x").unwrap());
        let shadow = freeze(&parse_term(r"\f.f").unwrap());
        assert_eq!(shadow, parse_term(r"\g.\f.f").unwrap());
    }

    #[test]
    fn vectors_round_trip() {
        let v = CoeffVector::parse("(1/2, -sqrt2, 0)").unwrap();
        let (t, ty) = encode_vector(&v);
        assert_eq!(decode_vector(&t, 3).unwrap(), v);
        assert!(check(&Context::new(), &t, &ty).is_ok());
        assert_eq!(weight_type(&ty).unwrap(), &Scalar::frac(1, 2) - &Scalar::sqrt2());
        let hv = parse_term(r"(\x.\y.x) + 0 * \x.\y.y").unwrap();
        assert_eq!(decode_vector(&hv, 2).unwrap(), CoeffVector::parse("1, 0").unwrap());
        assert!(decode_vector(&parse_term(r"\x.x").unwrap(), 2).is_err());
    }

    #[test]
    fn matrix_literals() {
        let m = CoeffMatrix::parse("[1, 2; 3, 4; 5, 6]").unwrap();
        assert_eq!((m.rows(), m.cols()), (3, 2));
        assert_eq!(m.to_string(), "[1, 2; 3, 4; 5, 6]");
        assert!(CoeffMatrix::parse("[1, 2; 3]").is_err());
        assert!(CoeffVector::parse("(1, x)").is_err());
    }

    #[test]
    fn hadamard_on_plus_state() {
        let h = Scalar::inv_sqrt2();
        let v = CoeffVector::new(vec![h.clone(), h]).unwrap();
        let got = apply_and_decode(&hadamard_matrix(), &v, 10_000).unwrap();
        assert_eq!(got, CoeffVector::parse("(1, 0)").unwrap());
    }

    #[test]
    fn matrix_types_are_synthesized() {
        let m = CoeffMatrix::parse("[1, 0, 2; 0, 1/2, -1]").unwrap();
        let (t, ty) = encode_matrix(&m);
        let (got, _) = synthesize(&Context::new(), &t).unwrap();
        assert!(type_equiv(&got.to_type(), &ty), "{got} vs {ty}");
        assert!(check(&Context::new(), &t, &ty).is_ok());
    }

    #[test]
    fn columns_are_selected() {
        let m = CoeffMatrix::parse("[1, 2; 3, 4]").unwrap();
        let e2 = CoeffVector::parse("(0, 1)").unwrap();
        assert_eq!(apply_and_decode(&m, &e2, 10_000).unwrap(), m.column(1));
        let zero = CoeffVector::parse("(0, 0)").unwrap();
        assert_eq!(apply_and_decode(&m, &zero, 10_000).unwrap(), zero);
        assert!(apply_and_decode(&m, &CoeffVector::parse("(1)").unwrap(), 10).is_err());
    }
}
