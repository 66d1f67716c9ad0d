//! Weights: the sum of the scalar coefficients of a type or a value.

use crate::scalar::Scalar;
use crate::syntax::{Term, Type};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WeightError {
    #[error("not a value: {0} has an application outside any abstraction")]
    NotAValue(String),
    #[error("the weight of the general variable {0} is undefined")]
    GeneralVariable(String),
}

pub fn weight_type(t: &Type) -> Result<Scalar, WeightError> {
    match t {
        Type::Unit(_) => Ok(Scalar::one()),
        Type::GVar(_) => Err(WeightError::GeneralVariable(t.to_string())),
        Type::Scale(alpha, inner) => Ok(alpha * &weight_type(inner)?),
        Type::Sum(items) => items.iter().map(weight_type).sum(),
    }
}

pub fn weight_value(v: &Term) -> Result<Scalar, WeightError> {
    match v {
        Term::Bound(_) | Term::Free(_) | Term::Abs(..) => Ok(Scalar::one()),
        Term::App(..) => Err(WeightError::NotAValue(v.to_string())),
        Term::Scale(alpha, inner) => Ok(alpha * &weight_value(inner)?),
        Term::Sum(items) => items.iter().map(weight_value).sum(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_term, parse_type};

    #[test]
    fn type_weights() {
        let w = |s: &str| weight_type(&parse_type(s).unwrap());
        assert_eq!(w("A"), Ok(Scalar::one()));
        assert_eq!(w("1/2 * A + 3 * (B -> C) + -1 * D"), Ok(Scalar::frac(5, 2)));
        assert_eq!(w("(forall X Y. X -> Y -> X) + 0 * forall X Y. X -> Y -> Y"), Ok(Scalar::one()));
        assert!(w("A + %X").is_err());
    }

    #[test]
    fn value_weights() {
        let w = |s: &str| weight_value(&parse_term(s).unwrap());
        assert_eq!(w(r"\x.x"), Ok(Scalar::one()));
        assert_eq!(w(r"(\x.\y.x) + 0 * \x.\y.y"), Ok(Scalar::one()));
        assert_eq!(w(r"sqrt2 * (\x.x) + 2 * \x.(x) x"), Ok(&Scalar::sqrt2() + &Scalar::int(2)));
        assert!(matches!(w(r"(\x.x) y"), Err(WeightError::NotAValue(_))));
    }
}
