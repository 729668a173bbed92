//! Majorana-fermion (4,8²) color code laboratory: Majorana monomial algebra,
//! code construction, exact small-system circuit checks, lattice-surgery
//! identities, circuit-level noise simulation and matching decoding.

pub mod algebra;
pub mod code;
pub mod decoder;
pub mod error;
pub mod exactsim;
pub mod noisesim;
pub mod report;
pub mod surgery;
pub mod threshold;

pub use algebra::{commutes, gf2_rank, mono_mul, Monomial, ModeSet};
pub use code::{build_code, logical_operator, validate_code, CodeLayout, Color, Plaquette};
pub use error::{Error, Result};
pub use report::Report;
