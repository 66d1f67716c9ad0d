//! Exact arithmetic in ℚ(√2).
//!
//! A [`Scalar`] is `a + b·√2` with `a`, `b` rationals kept in lowest terms, so
//! structural equality coincides with equality in the field.

use crate::lexer::{Cursor, ParseError, Tok};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Scalar {
    a: BigRational,
    b: BigRational,
}

impl Scalar {
    pub fn new(a: BigRational, b: BigRational) -> Self {
        Scalar { a, b }
    }

    pub fn zero() -> Self {
        Scalar::new(BigRational::zero(), BigRational::zero())
    }

    pub fn one() -> Self {
        Scalar::int(1)
    }

    pub fn sqrt2() -> Self {
        Scalar::new(BigRational::zero(), BigRational::one())
    }

    /// `1/√2`, i.e. `√2/2`.
    pub fn inv_sqrt2() -> Self {
        Scalar::new(BigRational::zero(), ratio(1, 2))
    }

    pub fn int(n: i64) -> Self {
        Scalar::new(BigRational::from_integer(BigInt::from(n)), BigRational::zero())
    }

    pub fn frac(n: i64, d: i64) -> Self {
        Scalar::new(ratio(n, d), BigRational::zero())
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.a
    }

    pub fn sqrt2_part(&self) -> &BigRational {
        &self.b
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.a.is_one() && self.b.is_zero()
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inverse(&self) -> Option<Scalar> {
        if self.is_zero() {
            return None;
        }
        // (a + b√2)^-1 = (a - b√2) / (a² - 2b²); the norm is nonzero since √2 ∉ ℚ.
        let two = BigRational::from_integer(BigInt::from(2));
        let norm = &self.a * &self.a - two * &self.b * &self.b;
        Some(Scalar::new(&self.a / &norm, -&self.b / &norm))
    }

    pub fn checked_div(&self, rhs: &Scalar) -> Option<Scalar> {
        rhs.inverse().map(|inv| self * &inv)
    }

    /// True when the printed form contains a top-level `+`/`-` and needs
    /// parentheses inside a product.
    pub fn is_compound(&self) -> bool {
        !self.a.is_zero() && !self.b.is_zero()
    }

    pub fn show_unicode(&self) -> String {
        show(self, "√2")
    }
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl Default for Scalar {
    fn default() -> Self {
        Scalar::zero()
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::int(n)
    }
}

impl<'a> Add<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        if rhs.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return rhs.clone();
        }
        Scalar::new(&self.a + &rhs.a, &self.b + &rhs.b)
    }
}

impl<'a> Sub<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        Scalar::new(&self.a - &rhs.a, &self.b - &rhs.b)
    }
}

impl<'a> Mul<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        if self.is_one() || rhs.is_zero() {
            return rhs.clone();
        }
        if rhs.is_one() || self.is_zero() {
            return self.clone();
        }
        if self.b.is_zero() && rhs.b.is_zero() {
            return Scalar::new(&self.a * &rhs.a, BigRational::zero());
        }
        // (a + b√2)(c + d√2) = (ac + 2bd) + (ad + bc)√2
        let two = BigRational::from_integer(BigInt::from(2));
        Scalar::new(
            &self.a * &rhs.a + two * &self.b * &rhs.b,
            &self.a * &rhs.b + &self.b * &rhs.a,
        )
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar::new(-&self.a, -&self.b)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: Scalar) -> Scalar {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: &Scalar) -> Scalar {
                (&self).$m(rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl Div for &Scalar {
    type Output = Scalar;
    /// Panics on division by zero; use [`Scalar::checked_div`] otherwise.
    fn div(self, rhs: &Scalar) -> Scalar {
        self.checked_div(rhs).expect("division by zero scalar")
    }
}

impl Sum for Scalar {
    fn sum<I: Iterator<Item = Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Scalar> for Scalar {
    fn sum<I: Iterator<Item = &'a Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::zero(), |acc, x| &acc + x)
    }
}

fn show_rat(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Coefficient of √2, rendered without a sign.
fn show_surd(b: &BigRational, root: &str) -> String {
    let b = b.abs();
    if b.is_one() {
        return root.to_string();
    }
    if b.is_integer() {
        return format!("{}*{root}", b.numer());
    }
    // b = n/2 prints as n/√2
    let doubled = &b * BigRational::from_integer(BigInt::from(2));
    if doubled.is_integer() {
        return format!("{}/{root}", doubled.numer());
    }
    format!("{}*{root}", show_rat(&b))
}

fn show(x: &Scalar, root: &str) -> String {
    match (x.a.is_zero(), x.b.is_zero()) {
        (_, true) => show_rat(&x.a),
        (true, false) => {
            let sign = if x.b.is_negative() { "-" } else { "" };
            format!("{sign}{}", show_surd(&x.b, root))
        }
        (false, false) => {
            let op = if x.b.is_negative() { '-' } else { '+' };
            format!("{} {op} {}", show_rat(&x.a), show_surd(&x.b, root))
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&show(self, "sqrt2"))
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Scalar({self})")
    }
}

/// Parses a scalar literal such as `3/2`, `-1/sqrt2` or `1 + 2*sqrt2`.
pub fn parse_scalar(text: &str) -> Result<Scalar, ParseError> {
    let mut cur = Cursor::new(text)?;
    let s = scalar_expr(&mut cur)?;
    cur.expect_eof()?;
    Ok(s)
}

impl FromStr for Scalar {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_scalar(s)
    }
}

pub fn show_scalar(x: &Scalar) -> String {
    x.to_string()
}

/// `expr := product (('+'|'-') product)*`
pub(crate) fn scalar_expr(cur: &mut Cursor) -> Result<Scalar, ParseError> {
    let mut acc = scalar_product(cur, false)?;
    loop {
        if cur.eat(&Tok::Plus) {
            acc = acc + scalar_product(cur, false)?;
        } else if cur.eat(&Tok::Minus) {
            acc = acc - scalar_product(cur, false)?;
        } else {
            return Ok(acc);
        }
    }
}

/// `product := factor (('*'|'/') factor)*`.
///
/// With `lenient`, a `*` that is not followed by a scalar factor is left in
/// the stream; the term parser uses this to read the `α * t` prefix.
pub(crate) fn scalar_product(cur: &mut Cursor, lenient: bool) -> Result<Scalar, ParseError> {
    let mut acc = scalar_factor(cur)?;
    loop {
        match cur.peek() {
            Tok::Star => {
                let mark = cur.mark();
                cur.bump();
                match scalar_factor(cur) {
                    Ok(f) => acc = acc * f,
                    Err(e) if lenient => {
                        let _ = e;
                        cur.reset(mark);
                        return Ok(acc);
                    }
                    Err(e) => return Err(e),
                }
            }
            Tok::Slash => {
                let pos = cur.pos();
                cur.bump();
                let d = scalar_factor(cur)?;
                acc = acc
                    .checked_div(&d)
                    .ok_or_else(|| ParseError::new(pos, "division by zero"))?;
            }
            _ => return Ok(acc),
        }
    }
}

pub(crate) fn scalar_factor(cur: &mut Cursor) -> Result<Scalar, ParseError> {
    match cur.peek().clone() {
        Tok::Minus => {
            cur.bump();
            Ok(-scalar_factor(cur)?)
        }
        Tok::Int(n) => {
            cur.bump();
            Ok(Scalar::new(BigRational::from_integer(n), BigRational::zero()))
        }
        Tok::Sqrt2 => {
            cur.bump();
            Ok(Scalar::sqrt2())
        }
        Tok::LParen => {
            let mark = cur.mark();
            cur.bump();
            match scalar_expr(cur).and_then(|s| cur.expect(&Tok::RParen).map(|_| s)) {
                Ok(s) => Ok(s),
                Err(e) => {
                    cur.reset(mark);
                    Err(e)
                }
            }
        }
        other => Err(cur.error(format!("expected a scalar, found `{other}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(text: &str) -> Scalar {
        parse_scalar(text).unwrap()
    }

    #[test]
    fn inverse_sqrt2_sums_to_sqrt2() {
        let x = s("1/sqrt2");
        assert_eq!(&x + &x, Scalar::sqrt2());
    }

    #[test]
    fn additive_and_multiplicative_identities() {
        let a = s("3/4 - 5*sqrt2");
        assert_eq!(&a + &Scalar::zero(), a);
        assert_eq!(&a * &Scalar::one(), a);
        assert_eq!(s("1/2") + s("1/2"), Scalar::one());
    }

    #[test]
    fn products_follow_coordinate_formula() {
        assert_eq!(s("1/sqrt2") * s("1/sqrt2"), Scalar::frac(1, 2));
        assert_eq!(s("1 + sqrt2") * s("1 - sqrt2"), Scalar::int(-1));
    }

    #[test]
    fn negation_subtraction_predicates() {
        assert_eq!(-s("1/sqrt2"), s("-1/sqrt2"));
        let a = s("7/3*sqrt2");
        assert!((&a - &a).is_zero());
        assert!(s("2/2").is_one());
        assert!(!Scalar::sqrt2().is_one());
    }

    #[test]
    fn parse_rationalizes() {
        let x = s("1/sqrt2");
        assert!(x.rational_part().is_zero());
        assert_eq!(x.sqrt2_part(), &ratio(1, 2));
        assert!(s("0").is_zero());
    }

    #[test]
    fn show_picks_short_forms() {
        for text in ["3/2", "0", "-7", "sqrt2", "-sqrt2", "1/sqrt2", "-1/sqrt2", "3*sqrt2", "1 + sqrt2", "1/2 - 3/sqrt2", "1/3*sqrt2"] {
            assert_eq!(s(text).to_string(), text);
        }
        assert_eq!(Scalar::inv_sqrt2().show_unicode(), "1/√2");
    }

    #[test]
    fn malformed_literals_report_position() {
        let err = parse_scalar("1/").unwrap_err();
        assert_eq!((err.line, err.col), (1, 3));
        assert!(parse_scalar("1/0").is_err());
        assert!(parse_scalar("x").is_err());
    }

    #[test]
    fn inverse_roundtrip() {
        let x = s("3 - 2*sqrt2");
        assert_eq!(&x * &x.inverse().unwrap(), Scalar::one());
        assert!(Scalar::zero().inverse().is_none());
    }

    fn arb_scalar() -> impl Strategy<Value = Scalar> {
        (-20i64..20, 1i64..9, -20i64..20, 1i64..9)
            .prop_map(|(an, ad, bn, bd)| Scalar::new(ratio(an, ad), ratio(bn, bd)))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn ring_axioms(x in arb_scalar(), y in arb_scalar(), z in arb_scalar()) {
            prop_assert_eq!(&(&x + &y) + &z, &x + &(&y + &z));
            prop_assert_eq!(&x + &y, &y + &x);
            prop_assert_eq!(&x * &y, &y * &x);
            prop_assert_eq!(&(&x * &y) * &z, &x * &(&y * &z));
            prop_assert_eq!(&x * &(&y + &z), &(&x * &y) + &(&x * &z));
        }

        #[test]
        fn parse_show_roundtrip(x in arb_scalar()) {
            prop_assert_eq!(parse_scalar(&x.to_string()).unwrap(), x);
        }
    }
}
