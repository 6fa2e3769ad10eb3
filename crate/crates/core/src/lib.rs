//! Space-time first-order system least-squares (FOSLS) finite elements for
//! the heat equation `∂_t u - Δu = f`, `u = 0` on `∂Ω`, `u(0) = u0`.

pub mod assembly;
pub mod error;
pub mod errors;
pub mod exact;
pub mod manufactured;
pub mod mesh;
pub mod par;
pub mod projection;
pub mod quadrature;
pub mod solver;
pub mod spaces;
pub mod sparse;
pub mod study;

pub use error::{Error, Result};
