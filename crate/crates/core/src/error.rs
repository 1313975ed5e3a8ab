//! Error type shared by every module of the crate.

use core::fmt;

use crate::povm::{Label, ValidationReport};

/// Everything that can go wrong across the crate, one variant per failure mode.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// A matrix expected to be Hermitian fails the symmetry check.
    NonHermitian { residual: f64 },
    /// Matrix entries are not all finite.
    NonFinite,
    /// The Jacobi eigensolver did not converge within the sweep cap.
    NoConvergence { sweeps: usize },
    /// An operator expected to be positive semidefinite has a genuinely
    /// negative eigenvalue.
    NotPsd { min_eigenvalue: f64 },
    /// An operator expected to satisfy 0 <= A <= 1 does not.
    NotEffect { min_eigenvalue: f64, max_eigenvalue: f64 },
    /// Two objects that must share a dimension do not.
    DimMismatch { expected: usize, found: usize },
    /// A dimension parameter outside its admissible range.
    BadDimension { dim: usize },
    /// A label map does not cover some outcome label.
    PartialMap { label: Label },
    /// Kernel source labels do not match the observable's outcome labels.
    LabelMismatch,
    /// A kernel column does not sum to one within tolerance.
    NotStochastic { column: usize, sum: f64 },
    /// A kernel entry below the negativity tolerance.
    NegativeKernelEntry { row: usize, column: usize, value: f64 },
    /// An outcome label that the instrument or observable does not carry.
    UnknownOutcome { label: Label },
    /// Duplicate outcome label inside one observable or instrument.
    DuplicateLabel { label: Label },
    /// An outcome with an empty Kraus list.
    EmptyKraus { label: Label },
    /// An observable or instrument with no outcomes at all.
    EmptyOutcomes,
    /// Instrument Kraus operators do not sum to the identity map.
    NotNormalizedInstrument { residual: f64 },
    /// Observable construction failed validation; the report lists the violations.
    InvalidPovm(ValidationReport),
    /// State vector norm is not one within tolerance.
    NotUnitNorm { norm: f64 },
    /// Density matrix trace is not one within tolerance.
    TraceNotOne { trace: f64 },
    /// Derived observables of mixture components disagree.
    ObservableMismatch { residual: f64 },
    /// Outcome enumeration would exceed the configured cap.
    CapExceeded { required: usize, cap: usize },
    /// The LP solver hit its iteration cap or an internal inconsistency.
    LpNumericalFailure { reason: &'static str },
    /// Spectral atoms too close to resolve at the given trajectory length.
    AtomsTooClose { gap: f64, required: f64 },
    /// Frequency statistics need outcome labels 0 and 1.
    NonBinaryLabels,
    /// A probability map does not sum to one within tolerance.
    NotNormalized { sum: f64 },
    /// A scalar parameter outside its admissible range.
    OutOfRange { value: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonHermitian { residual } => {
                write!(f, "matrix is not Hermitian (residual {residual:.3e})")
            }
            Error::NonFinite => write!(f, "matrix has non-finite entries"),
            Error::NoConvergence { sweeps } => {
                write!(f, "eigensolver did not converge within {sweeps} sweeps")
            }
            Error::NotPsd { min_eigenvalue } => {
                write!(f, "operator is not PSD (min eigenvalue {min_eigenvalue:.3e})")
            }
            Error::NotEffect { min_eigenvalue, max_eigenvalue } => write!(
                f,
                "operator is not an effect (eigenvalue range [{min_eigenvalue:.3e}, {max_eigenvalue:.3e}])"
            ),
            Error::DimMismatch { expected, found } => {
                write!(f, "dimension mismatch (expected {expected}, found {found})")
            }
            Error::BadDimension { dim } => write!(f, "bad dimension {dim}"),
            Error::PartialMap { label } => write!(f, "label map undefined at {label}"),
            Error::LabelMismatch => write!(f, "kernel source labels do not match the observable"),
            Error::NotStochastic { column, sum } => {
                write!(f, "kernel column {column} sums to {sum} instead of 1")
            }
            Error::NegativeKernelEntry { row, column, value } => {
                write!(f, "kernel entry ({row}, {column}) is negative: {value:.3e}")
            }
            Error::UnknownOutcome { label } => write!(f, "unknown outcome label {label}"),
            Error::DuplicateLabel { label } => write!(f, "duplicate outcome label {label}"),
            Error::EmptyKraus { label } => write!(f, "outcome {label} has an empty Kraus list"),
            Error::EmptyOutcomes => write!(f, "no outcomes"),
            Error::NotNormalizedInstrument { residual } => write!(
                f,
                "instrument Kraus operators do not sum to the identity (residual {residual:.3e})"
            ),
            Error::InvalidPovm(report) => write!(f, "invalid observable: {report}"),
            Error::NotUnitNorm { norm } => write!(f, "state vector norm {norm} is not 1"),
            Error::TraceNotOne { trace } => write!(f, "density matrix trace {trace} is not 1"),
            Error::ObservableMismatch { residual } => write!(
                f,
                "mixture components determine different observables (residual {residual:.3e})"
            ),
            Error::CapExceeded { required, cap } => {
                write!(f, "outcome enumeration needs {required} entries, cap is {cap}")
            }
            Error::LpNumericalFailure { reason } => write!(f, "LP solver failure: {reason}"),
            Error::AtomsTooClose { gap, required } => write!(
                f,
                "spectral atoms separated by {gap:.3e}, need more than {required:.3e}"
            ),
            Error::NonBinaryLabels => write!(f, "frequency statistics need outcome labels 0 and 1"),
            Error::NotNormalized { sum } => {
                write!(f, "probability map sums to {sum} instead of 1")
            }
            Error::OutOfRange { value } => write!(f, "parameter {value} out of range"),
        }
    }
}

impl core::error::Error for Error {}
