//! Forward error correction: LDPC codes over `Z_M` (binary is `M = 2`), their
//! construction and encoding, belief-propagation decoders, and the outer
//! Reed–Solomon code used on the hard stage.

pub mod binary;
pub mod gf256;
pub mod nbbp;
pub mod peg;
pub mod ring;
pub mod rs;

use thiserror::Error;

pub use binary::{binary_bp_decode, BinaryLdpcCode};
pub use nbbp::nonbinary_bp_decode;
pub use peg::{peg_construct, peg_construct_encodable};
pub use ring::{RingLdpcCode, RingParityCheck};
pub use rs::{RsCode, RsStatus};

#[derive(Debug, Error)]
pub enum FecError {
    #[error("invalid code parameters: {0}")]
    InvalidParameters(String),
    #[error("PEG construction cannot place edge {edge} of variable {var} without a 4-cycle")]
    GirthViolation { var: usize, edge: usize },
    #[error("parity-check matrix has no invertible parity part over Z_{modulus}")]
    NotEncodable { modulus: u32 },
    #[error("length mismatch: expected {expected}, got {got}")]
    Length { expected: usize, got: usize },
    #[error("symbol {value} out of range for modulus {modulus}")]
    SymbolRange { value: u32, modulus: u32 },
    #[error("alist parse error on line {line}: {msg}")]
    Alist { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Decoder output.
#[derive(Debug, Clone, PartialEq)]
pub struct Decoded<T> {
    pub symbols: Vec<T>,
    /// All parity checks satisfied by the returned decision.
    pub converged: bool,
    /// Iterations run (one iteration is a check-node pass plus a variable-node pass).
    pub iterations: usize,
}
