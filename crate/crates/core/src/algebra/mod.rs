//! Exact coefficient arithmetic, sparse polynomials, localized
//! polynomials, differential forms and the shared text grammar.

pub mod field;
pub mod forms;
pub mod linalg;
pub mod localized;
pub mod monomial;
pub mod parse;
pub mod poly;
pub mod univariate;

pub use field::{is_prime, ExtField, Field, PrimeField, Rationals, Ring, ZModP2};
pub use forms::PForm;
pub use localized::LocalizedPoly;
pub use monomial::{Monomial, MonomialOrder};
pub use poly::{center_names, reduce_mod_p, var_names, MultiPoly};
