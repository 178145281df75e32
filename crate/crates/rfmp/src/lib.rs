//! Greedy regularized matching pursuit for finite-data linear inverse
//! problems, with direct-solve oracles for checking what a run converged to.
//!
//! The problem: given a linear continuous operator `F` from a Hilbert space
//! `H` into `R^l` and a data vector `y`, find `F` in `H` with `F F = y`. The
//! space is realized here as an `N`-dimensional coordinate space with a
//! configurable SPD metric; the operator is an `l x N` matrix with a
//! metric-aware adjoint and singular system.
//!
//! The solver builds the approximation one dictionary atom at a time. Each
//! step maximizes the regularized correlation quotient
//! `(<R^n, F d> - lambda <F_n, d>)^2 / (|F d|^2 + lambda |d|^2)` over the
//! trial set, applies the exact 1-D step, and decreases the energy
//! `|R^n|^2 + lambda |F_n|^2` by exactly the winning score. With a spanning
//! dictionary the iterates approach the Tikhonov solution of
//! `(F*F + lambda I) F = F* y` (for `lambda = 0`: an element whose image is
//! the range projection of `y`); restricted to a singular-vector subspace
//! they approach the projection of that solution. The [`oracle`] module
//! computes each of these limit objects directly so runs can be verified
//! against them.
//!
//! # Quick start
//!
//! ```
//! use nalgebra::{DMatrix, DVector};
//! use rfmp::{Dictionary, Element, ForwardOperator, HilbertSpec, RfmpConfig};
//!
//! let space = HilbertSpec::euclidean(2)?;
//! let op = ForwardOperator::new(space, DMatrix::identity(2, 2))?;
//! let atoms = vec![
//!     Element::from_slice(&[1.0, 0.0])?,
//!     Element::from_slice(&[0.0, 1.0])?,
//! ];
//! let dict = Dictionary::build(&op, atoms)?;
//! let y = DVector::from_column_slice(&[1.0, 2.0]);
//!
//! let outcome = rfmp::solve(&op, &y, &dict, &RfmpConfig::new(0.0))?;
//! assert_eq!(outcome.state.approx().coeffs().as_slice(), &[1.0, 2.0]);
//! # Ok::<(), rfmp::Error>(())
//! ```
//!
//! The `examples/` directory has one runnable example per capability:
//! solving, verifying against each oracle, energy tracking, dictionary
//! diagnostics, the repetition cap, and the problem-file format. The `rfmp`
//! binary exposes the same flows as `solve`, `verify`, and `diagnose`
//! subcommands for batch use.

pub mod dictionary;
pub mod error;
pub mod hilbert;
pub mod io;
pub mod operator;
pub mod oracle;
pub mod solver;

pub use dictionary::{Dictionary, DictionaryDiagnostics, DEFAULT_C1_FLOOR};
pub use error::{Error, Result};
pub use hilbert::{Element, HilbertSpec};
pub use operator::{
    orthogonal_projection, project_onto_span, ForwardOperator, SingularSystem,
    DEFAULT_RANK_TOLERANCE,
};
pub use oracle::{OracleMethod, OracleSolution};
pub use solver::{
    iterate, select_atom, selection_score, solve, step_coefficient, IterationRecord, RfmpConfig,
    RfmpOutcome, RfmpState, StepOutcome, StopReason, TieBreak,
};
