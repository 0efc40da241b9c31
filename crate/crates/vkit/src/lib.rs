//! Combinatorial finite-type invariant machinery.
//!
//! The crate is organized around the diagram spaces of Vassiliev theory:
//!
//! - [`diagrams`]: chord and Jacobi diagrams, canonical forms, enumeration.
//! - [`qlinalg`]: exact sparse linear algebra over the rationals.
//! - [`spaces`]: 4T/FI/STU/AS/IHX relations and the quotient dimensions.
//! - [`hutchings`]: the diagram-level boundary complexes and the H^1 probe.
//! - [`weights`]: gl(N)/so(N) weight systems as exact polynomials in N.
//! - [`assoc`]: horizontal chord algebras and the pentagon/hexagon solver.
//! - [`tangle`]: the event calculus evaluating the universal invariant on
//!   parenthesized-tangle presentations.
//! - [`cache`]: checksummed result persistence shared by the CLI.
//!
//! Everything is exact: coefficients are arbitrary-precision rationals and
//! all reported dimensions, polynomials and residuals are integers or
//! rationals, never floats.

pub mod assoc;
pub mod cache;
pub mod diagrams;
pub mod hutchings;
pub mod qlinalg;
pub mod spaces;
pub mod tangle;
pub mod weights;

use thiserror::Error;

/// Crate-wide error type. The CLI maps these onto its exit codes.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or out-of-contract input.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// Structurally valid input that the implementation does not handle
    /// (e.g. a Jacobi diagram with a closed internal component).
    #[error("unsupported input: {0}")]
    Unsupported(String),

    /// A configured resource budget was exceeded.
    #[error("resource budget exceeded: {0}")]
    Budget(String),

    /// A linear system that must be solvable turned out inconsistent.
    /// Carries the degree and a left-kernel certificate `y` with
    /// `y·A = 0`, `y·b != 0`.
    #[error("inconsistent linear system at degree {degree}")]
    Inconsistent {
        degree: usize,
        certificate: Vec<qlinalg::Rat>,
    },

    #[error("cache: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
