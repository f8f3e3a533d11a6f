//! Self-dual normal bases of finite field extensions.

pub mod arith;
pub mod complexity;
pub mod construct;
pub mod cyclotomic;
pub mod error;
pub mod field;
pub mod fourier;
pub mod fp_poly;
pub mod group_algebra;
pub mod orthogonal;
pub mod poly;
pub mod search;

pub use error::{Error, Result};
pub use field::{FieldCtx, FieldElement};
pub use group_algebra::{GaElement, GroupAlgebra};
