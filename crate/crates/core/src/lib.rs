//! Type-preservation analysis of block-cipher mixing layers over GF(2), and
//! primitivity checks for toy SPN and Feistel ciphers with modular key
//! addition.

pub mod ciphersim;
pub mod classifier;
pub mod error;
pub mod gf;
pub mod gf2;
pub mod groupan;
pub mod io;
pub mod layers;
pub mod typesys;

pub use classifier::{classify, oracle_classify, ConditionReport, Verdict, VerdictKind};
pub use error::{Error, Result};
pub use gf2::{BitMatrix, BitVector, BlockView};
pub use layers::LayerDescriptor;
pub use typesys::{BoxType, CanonicalSet, StateSet, TypeTriple, TypeVector};
