//! Block rational Krylov solver for Sylvester equations `AX - XB = u v^H`
//! with low-rank right-hand side.

pub mod bench;
pub mod brad;
pub mod error;
pub mod linalg;
pub mod matpoly;
pub mod operator;
#[cfg(any(test, feature = "oracle"))]
pub mod oracle;
pub mod poles;
pub mod rhs;
pub mod sylvester;

#[cfg(test)]
mod testutil;

pub use brad::{BradState, Pole};
pub use error::{Error, Result};
pub use linalg::{CMat, C64};
pub use operator::{FnOperator, LinearOperator, Tridiagonal};
