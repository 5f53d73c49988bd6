//! Charon: a certifying compiler for a small C subset.
//!
//! The pipeline has three legs that must agree:
//!
//! - `frontend` + `compiler` translate CharonLang source into CharonIR,
//! - `cert_high` derives a Gödel-style certificate from the syntax tree,
//! - `cert_low` derives a certificate from the compiled instruction stream.
//!
//! Faithful compilation means both certificates coincide. Certificates are
//! kept symbolic (an ordered list of `prime^tower` factors) because their
//! numeric value grows exponentially with program size. `canon` inverts a
//! certificate back into a canonical program, and `vm` executes CharonIR for
//! differential checks.

pub mod bench;
pub mod canon;
pub mod cert_high;
pub mod cert_low;
pub mod certnum;
pub mod compiler;
pub mod frontend;
pub mod gen;
pub mod ir;
pub mod vm;

use thiserror::Error;

/// Top-level error for the CLI; each variant maps to a distinct exit code.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Frontend(#[from] frontend::FrontendError),
    #[error(transparent)]
    Compile(#[from] compiler::CompileError),
    #[error(transparent)]
    Cert(#[from] certnum::CertError),
    #[error(transparent)]
    CertLow(#[from] cert_low::CertLowError),
    #[error(transparent)]
    Canon(#[from] canon::CanonError),
    #[error(transparent)]
    Vm(#[from] vm::VmError),
    #[error(transparent)]
    Ir(#[from] ir::IrParseError),
    #[error(transparent)]
    Gen(#[from] gen::GenError),
    #[error("{0}")]
    Bench(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable process exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Frontend(_) => 65,
            Error::Compile(_) => 66,
            Error::Cert(_) | Error::CertLow(_) => 67,
            Error::Canon(_) => 68,
            Error::Vm(_) => 69,
            Error::Ir(_) => 70,
            Error::Gen(_) | Error::Bench(_) => 71,
            Error::Io(_) => 74,
        }
    }
}
