//! Numeric tolerances, centralized.
//!
//! Every comparison against "equal within tolerance" in this crate pulls its
//! threshold from [`Tolerances`] or from one of the fixed constants below, so
//! there is a single place to audit the numerics.

/// Configurable tolerance set threaded through validation and decision
/// procedures. [`Tolerances::default`] is what the test suite pins.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Max-norm residual allowed in the Hermitian symmetry check.
    pub herm: f64,
    /// How negative an eigenvalue may be while the operator still counts as PSD.
    pub psd: f64,
    /// Reconstruction and orthonormality residual for eigendecompositions.
    pub eig: f64,
    /// Eigenvalues closer than this belong to the same spectral atom.
    pub cluster: f64,
    /// Completeness residual: how far effect sums may sit from the identity.
    pub sum: f64,
    /// Effects with max-norm at or below this are dropped as zero.
    pub zero: f64,
    /// Max-norm gap between trace-normalized effects that still counts as
    /// proportional when merging outcomes.
    pub prop: f64,
    /// LP residual at or below which a post-processing kernel counts as exact.
    pub feas: f64,
    /// Hellinger gap above which two observables are certified inequivalent.
    pub witness: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            herm: 1e-12,
            psd: 1e-10,
            eig: 1e-10,
            cluster: 1e-8,
            sum: 1e-9,
            zero: 1e-12,
            prop: 1e-9,
            feas: 1e-7,
            witness: 1e-6,
        }
    }
}

/// Kraus operators of an instrument must sum to the identity map within this.
pub const INSTRUMENT_NORM_TOL: f64 = 1e-9;

/// An effect counts as a projection when the max-norm of E^2 - E is at or below this.
pub const PROJECTION_TOL: f64 = 1e-9;

/// State vectors must have unit norm, and density matrices unit trace, within this.
pub const UNIT_NORM_TOL: f64 = 1e-10;

/// Kernel columns must sum to one within this.
pub const KERNEL_SUM_TOL: f64 = 1e-10;

/// Kernel entries may undershoot zero by at most this.
pub const KERNEL_NEG_TOL: f64 = 1e-12;

/// Probabilities in [-PROB_CLAMP, 0) are clamped to zero.
pub const PROB_CLAMP: f64 = 1e-10;

/// Probability maps must sum to one within this.
pub const DIST_SUM_TOL: f64 = 1e-9;

/// Trajectory states with trace below this trigger a renormalization event.
pub const UNDERFLOW_TRACE: f64 = 1e-12;

/// Default cap on the number of enumerated outcome sequences.
pub const DEFAULT_ENUMERATION_CAP: usize = 4096;

/// Jacobi eigensolver sweep cap.
pub const MAX_JACOBI_SWEEPS: usize = 100;
