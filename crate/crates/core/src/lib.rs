//! Repeated quantum measurements at desk scale.
//!
//! This crate models a measurement device as a Kraus-operator instrument and
//! asks what repeating it buys: the observable measured by `n` repetitions,
//! whether one observable post-processes into another (decided as an LP
//! feasibility problem over Markov kernels), the saturation step after which
//! further repetitions add no information, and Monte Carlo evidence that
//! repeated unsharp binary measurements converge to the sharp spectral
//! measure of the measured effect.
//!
//! The crate is `no_std` with `alloc`; everything is deterministic, including
//! trajectory sampling, which derives one ChaCha stream per trajectory from
//! the batch seed.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod asymptotics;
pub mod error;
pub mod instrument;
pub mod linalg;
pub mod povm;
pub mod preorder;
pub mod simplex;
pub mod tolerances;

pub use asymptotics::{
    estimate_spectral_masses, frequency_histogram, hellinger_sq, luders_hellinger_closed_form,
    sample_trajectories, uniform_edges, Histogram, TrajectoryBatch,
};
pub use error::Error;
pub use instrument::{ladder, luders_binary, mixture, preparative, Instrument};
pub use linalg::{
    eigh, is_effect, is_psd, sqrt_psd, Complex64, ComplexMatrix, EigenDecomposition,
    HermitianOperator,
};
pub use povm::{
    apply_kernel, spectral_measure_of_effect, validate_outcomes, Atom, DensityMatrix, Label, Povm,
    StateVector, ValidationReport, Violation,
};
pub use preorder::{
    equivalent, hellinger_witness, preceq, saturation_step, EquivalenceCertificate,
    LevelCertificate, MarkovKernel, NonEquivalenceWitness, PreorderCertificate, SaturationReport,
    SaturationVerdict,
};
pub use tolerances::Tolerances;
