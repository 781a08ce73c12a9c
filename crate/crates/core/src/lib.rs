//! Random Boolean networks with a guide-RNA style editing mechanism,
//! evolved by hill-climbing on NK and NKCS fitness landscapes.
//!
//! The crate is organised bottom-up:
//!
//! * [`prng`]: labelled, splittable random streams.
//! * [`landscape`]: NK / NKCS landscape generation, evaluation and files.
//! * [`network`]: genomes, editing-aware synchronous dynamics, episodes.
//! * [`evolution`]: mutation, selection and the four run protocols.
//! * [`experiments`]: seeded sweeps, aggregation, Welch t-test, figures.
//! * [`cli`]: config files, CSV output, charts and subcommands.

pub mod cli;
pub mod evolution;
pub mod experiments;
pub mod landscape;
pub mod network;
pub mod prng;

pub use landscape::{NkLandscape, NkcsLandscape};
pub use network::{NetworkGenome, NetworkParams, NetworkState};
pub use prng::{RngStream, StreamLabel};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("not computable: {0}")]
    NotComputable(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("incomplete data: {0}")]
    Incomplete(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
