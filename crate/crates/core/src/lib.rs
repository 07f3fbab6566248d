//! Cotangent-type sums (Dedekind, Vasyunin, partial cotangent and piecewise
//! weighted sums), the series `V₁`/`V₂` behind their reciprocity relations, and
//! continued-fraction bounds, with brute-force routes validating the fast ones.

pub mod bench;
pub mod bounds;
mod error;
pub mod figure;
pub mod numtheory;
pub mod piecewise;
pub mod reciprocity;
pub mod specialfn;
pub mod sums;
pub mod verify;
pub mod vseries;

pub use error::{Error, Result};
pub use numtheory::Fraction;
pub use piecewise::PiecewisePoly;
pub use specialfn::Precision;
pub use sums::{Method, SumValue};
