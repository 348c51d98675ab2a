//! Hidden-coset workbench core: GF(2) algebra, statevector simulation,
//! oracle-model program stubs, and the schemes and games built on them.
//!
//! The crate is `no_std` with `alloc`. IO, the CLI and file formats live in
//! the companion `cosetlab` crate.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod cprf;
pub mod error;
pub mod games;
pub mod gf2;
pub mod glx;
pub mod meas;
pub mod obf;
pub mod prf;
pub mod qsim;
pub mod rng;
pub mod sde;
pub mod toksig;

pub use error::{Error, Result};
