//! Terms, two-sorted types, parsing and printing.

mod context;
pub mod parse;
pub mod print;
mod term;
mod types;

pub use context::Context;
pub use parse::{parse_term, parse_type, parse_unit_type};
pub use print::{print_term, print_type, print_unit_type, Printer};
pub use term::{alpha_eq, is_basis, subst_term, Hint, Name, Term};
pub use types::{leaf, subst_type, Sort, SortError, TyArg, TyVar, Type, UnitType};
