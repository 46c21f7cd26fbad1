//! Computer algebra for D-modules on affine space in positive
//! characteristic: p-curvature, p-supports and p-cycles, Dixmier
//! automorphisms acting on the center of the Weyl algebra, and lifting of
//! flat connections from `F_p` to `Z/p^2`.

pub mod algebra;
pub mod connection;
pub mod dixmier;
pub mod error;
pub mod functors;
pub mod groebner;
pub mod lifting;
pub mod psupport;
pub mod weyl;

pub use error::{Error, Result};
