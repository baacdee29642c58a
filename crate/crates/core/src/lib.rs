//! Lattice homomorphic encryption at desk scale.

pub mod bfv;
pub mod bgv;
pub mod ckks;
pub mod decomposition;
pub mod error;
pub mod glwe;
pub mod modular;
pub mod poly;
pub mod prng;
pub mod rns;
pub mod serial;
pub mod tfhe;
pub mod transform;
pub mod worked;

pub use error::{FheError, Result};
