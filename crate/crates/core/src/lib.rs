//! Desk-scale numerics for the correspondence between joint spectra of
//! Gaudin Hamiltonians and level sets of classical Calogero–Moser first
//! integrals.
//!
//! The crate is organised by object:
//!
//! * [`partitions`]: partitions, shifted partitions, hook-length dimensions
//!   and Bethe level counts.
//! * [`tensor_gaudin`]: weight bases of `V^{⊗n}`, singular vectors, Gaudin
//!   Hamiltonians (plain and with a diagonal twist `q`) and their joint
//!   spectra.
//! * [`calogero_moser`]: the matrix `Q(z, p)`, its first integrals, level-set
//!   residuals and normal-form Calogero–Moser points.
//! * [`master_function`]: Bethe master functions, their gradients and a
//!   multistart Newton solver for critical points.
//! * [`wronski`]: polynomial and quasi-exponential tuples, Wronski maps,
//!   fundamental differential operators and the maps to `(z, p)`.
//! * [`harness`]: point matching, the `q → 0` collision study and the
//!   verification suites behind the `cmkz` binary.

pub mod calogero_moser;
mod error;
pub mod harness;
pub mod json;
pub mod linalg;
pub mod master_function;
pub mod partitions;
pub mod poly;
pub mod sampling;
pub mod tensor_gaudin;
pub mod wronski;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
