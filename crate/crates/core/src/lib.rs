//! Exact and numeric verification of horizontal factorizations of
//! Hasse–Weil zeta functions for `G_m`, elliptic curves over `Q` and open
//! subschemes of projective space.

pub mod arith;
pub mod characters;
pub mod elliptic;
mod error;
pub mod ffield;
pub mod gm;
pub mod localzeta;
pub mod poly;
pub mod report;
pub mod strata;

pub use arith::{Factorization, UnitGroupStructure};
pub use error::{Error, Result};
pub use ffield::{FiniteField, FpPoly, Fq};
pub use localzeta::{EulerProduct, LocalFactor, PowerSeries};
pub use poly::IntPoly;
pub use report::{CaseRecord, Certificate, Comparison};
