//! Finite-dimensional complex Hilbert-space kernel.
//!
//! Everything downstream (measurement calculus, signaling demos, region
//! operators) is built from the types here: dense [`Operator`]s, unit
//! [`StateVector`]s, validated [`DensityMatrix`]es, [`SpectralObservable`]s
//! and possibly nonlinear [`NonlinearMap`]s.
//!
//! Basis convention: computational basis, tensor products are left-major, so
//! in `a ⊗ b` the left factor owns the most significant index. On a qubit
//! chain site 0 is the leftmost factor.

mod json;
mod local;
mod nonlinear;
mod operator;
pub mod pauli;
mod spectral;
mod state;

pub use local::{embed_local, site_bit, Tensor};
pub use nonlinear::{MapClaims, MapVerification, NonlinearMap, VectorFn};
pub use operator::{Operator, OperatorFlags};
pub use spectral::{spectral_decompose, Coarsening, SpectralObservable};
pub use state::{DensityMatrix, StateVector};

use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;
pub type CVector = nalgebra::DVector<C64>;
pub type CMatrix = nalgebra::DMatrix<C64>;

/// Entrywise tolerance used for hermitian / unitary / projector certification.
pub const FLAG_TOL: f64 = 1e-12;
/// Unit-norm tolerance for state vectors.
pub const NORM_TOL: f64 = 1e-12;
/// Smallest admissible density-matrix eigenvalue.
pub const PSD_TOL: f64 = -1e-10;
/// Default eigenvalue merging tolerance for [`spectral_decompose`].
pub const MERGE_TOL: f64 = 1e-8;
/// Minimum separation between distinct eigenvalues of an observable.
pub const EIGEN_SEPARATION: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HilbertError {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("dimension must be positive")]
    ZeroDimension,
    #[error("operator is not hermitian: |M[{row},{col}] - conj(M[{col},{row}])| = {asymmetry:e}")]
    NotHermitian {
        row: usize,
        col: usize,
        asymmetry: f64,
    },
    #[error("operator is not a projector (residual {residual:e})")]
    NotProjector { residual: f64 },
    #[error("state vector norm {norm} differs from 1")]
    NotNormalized { norm: f64 },
    #[error("cannot normalize a zero vector")]
    ZeroVector,
    #[error("density matrix trace {trace} differs from 1")]
    BadTrace { trace: f64 },
    #[error("density matrix has negative eigenvalue {min_eigenvalue:e}")]
    NotPositive { min_eigenvalue: f64 },
    #[error("projectors {first} and {second} are not orthogonal (residual {residual:e})")]
    NotOrthogonal {
        first: usize,
        second: usize,
        residual: f64,
    },
    #[error("projectors do not sum to the identity (residual {residual:e})")]
    Incomplete { residual: f64 },
    #[error("eigenvalues {first} and {second} are not distinct")]
    DegenerateEigenvalues { first: f64, second: f64 },
    #[error("eigenvalue count {eigenvalues} does not match projector count {projectors}")]
    CountMismatch { eigenvalues: usize, projectors: usize },
    #[error("site {site} out of range for a chain of {n_sites} sites")]
    SiteOutOfRange { site: usize, n_sites: usize },
    #[error("site {0} listed twice")]
    DuplicateSite(usize),
    #[error("invalid coarsening: {0}")]
    InvalidCoarsening(String),
    #[error("malformed serialized data: {0}")]
    Malformed(String),
}

pub type Result<T, E = HilbertError> = std::result::Result<T, E>;
