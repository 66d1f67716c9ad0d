//! Workbench for an algebraic, polymorphically typed lambda calculus with
//! linear combinations of terms over ℚ(√2).

pub mod encodings;
pub mod lexer;
pub mod properties;
pub mod scalar;
pub mod rewrite;
pub mod syntax;
pub mod typesys;

pub use lexer::ParseError;
pub use scalar::{parse_scalar, show_scalar, Scalar};
pub use syntax::{Context, Sort, Term, TyVar, Type, UnitType};
