//! Kraus-operator instruments in the Heisenberg picture.
//!
//! An instrument assigns each outcome a list of Kraus operators; the action
//! on an operator `T` at outcome `ω` is `Σ_k K_{ω,k}† T K_{ω,k}`, and the
//! lists jointly satisfy `Σ_ω Σ_k K† K = 1`. Composition, derived and
//! repeated observables, and the standard constructions live here.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

// Inherent std float methods shadow the trait in test builds.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::Error;
use crate::linalg::{self, ComplexMatrix, HermitianOperator};
use crate::povm::{DensityMatrix, Label, Povm};
use crate::tolerances::{Tolerances, INSTRUMENT_NORM_TOL, PROJECTION_TOL};

/// Outcome-labeled Kraus instrument on a fixed finite-dimensional space.
#[derive(Clone, Debug, PartialEq)]
pub struct Instrument {
    dim: usize,
    outcomes: Vec<(Label, Vec<ComplexMatrix>)>,
}

impl Instrument {
    /// Validating constructor: distinct labels, nonempty Kraus lists of equal
    /// dimension, and normalization `Σ K†K = 1` within tolerance.
    pub fn new(outcomes: Vec<(Label, Vec<ComplexMatrix>)>) -> Result<Self, Error> {
        if outcomes.is_empty() {
            return Err(Error::EmptyOutcomes);
        }
        for (i, (label, kraus)) in outcomes.iter().enumerate() {
            if kraus.is_empty() {
                return Err(Error::EmptyKraus { label: label.clone() });
            }
            if outcomes.iter().skip(i + 1).any(|(l, _)| l == label) {
                return Err(Error::DuplicateLabel { label: label.clone() });
            }
        }
        let dim = outcomes[0].1[0].dim();
        let mut total = ComplexMatrix::zeros(dim);
        for (_, kraus) in &outcomes {
            for k in kraus {
                if k.dim() != dim {
                    return Err(Error::DimMismatch { expected: dim, found: k.dim() });
                }
                if !k.is_finite() {
                    return Err(Error::NonFinite);
                }
                total = &total + &k.adjoint().mul(k);
            }
        }
        let residual = total.max_norm_diff(&ComplexMatrix::identity(dim));
        if residual > INSTRUMENT_NORM_TOL {
            return Err(Error::NotNormalizedInstrument { residual });
        }
        Ok(Instrument { dim, outcomes })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_outcomes(&self) -> usize {
        self.outcomes.len()
    }

    pub fn outcomes(&self) -> &[(Label, Vec<ComplexMatrix>)] {
        &self.outcomes
    }

    pub fn labels(&self) -> impl Iterator<Item = &Label> {
        self.outcomes.iter().map(|(l, _)| l)
    }

    pub fn kraus(&self, label: &Label) -> Option<&[ComplexMatrix]> {
        self.outcomes.iter().find(|(l, _)| l == label).map(|(_, k)| k.as_slice())
    }

    /// Heisenberg action `Σ_k K† T K` of the outcome indexed by position.
    pub(crate) fn apply_index(&self, index: usize, t: &ComplexMatrix) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.dim);
        for k in &self.outcomes[index].1 {
            acc = &acc + &k.adjoint().mul(&t.mul(k));
        }
        acc
    }

    /// Heisenberg action at the given outcome label.
    pub fn apply(&self, label: &Label, t: &HermitianOperator) -> Result<HermitianOperator, Error> {
        if t.dim() != self.dim {
            return Err(Error::DimMismatch { expected: self.dim, found: t.dim() });
        }
        let index = self
            .outcomes
            .iter()
            .position(|(l, _)| l == label)
            .ok_or_else(|| Error::UnknownOutcome { label: label.clone() })?;
        Ok(HermitianOperator::symmetrized(self.apply_index(index, t.matrix())))
    }

    /// The observable this instrument measures: effect `I_ω(1)` per outcome.
    pub fn derived_observable(&self) -> Povm {
        let identity = ComplexMatrix::identity(self.dim);
        let outcomes = self
            .outcomes
            .iter()
            .enumerate()
            .map(|(i, (label, _))| {
                (label.clone(), HermitianOperator::symmetrized(self.apply_index(i, &identity)))
            })
            .collect();
        Povm::from_validated(self.dim, outcomes)
    }

    /// Sequential composition, `self` applied to the state first. The outcome
    /// label is the concatenation of both labels and the Heisenberg action is
    /// `self_ω ∘ other_ω'`, realized by the Kraus products `K' · K`.
    pub fn compose(&self, other: &Instrument) -> Result<Instrument, Error> {
        if other.dim != self.dim {
            return Err(Error::DimMismatch { expected: self.dim, found: other.dim });
        }
        let mut outcomes = Vec::with_capacity(self.outcomes.len() * other.outcomes.len());
        for (label_a, kraus_a) in &self.outcomes {
            for (label_b, kraus_b) in &other.outcomes {
                let mut products = Vec::with_capacity(kraus_a.len() * kraus_b.len());
                for kb in kraus_b {
                    for ka in kraus_a {
                        products.push(kb.mul(ka));
                    }
                }
                outcomes.push((label_a.concat(label_b), products));
            }
        }
        Instrument::new(outcomes)
    }

    /// Observable of `n` repetitions: the effect at `(ω_1, …, ω_n)` is
    /// `I_{ω_1} ∘ ⋯ ∘ I_{ω_n}(1)`, built by applying `I_{ω_1}` last. The
    /// outcome count `|Ω|^n` must stay within `cap`; no merging is applied.
    pub fn repeated_observable(&self, n: usize, cap: usize) -> Result<Povm, Error> {
        if n == 0 {
            return Err(Error::BadDimension { dim: 0 });
        }
        let required = self
            .outcomes
            .len()
            .checked_pow(n as u32)
            .ok_or(Error::CapExceeded { required: usize::MAX, cap })?;
        if required > cap {
            return Err(Error::CapExceeded { required, cap });
        }

        let identity = ComplexMatrix::identity(self.dim);
        let mut level: Vec<(Label, ComplexMatrix)> = self
            .outcomes
            .iter()
            .enumerate()
            .map(|(i, (label, _))| (label.clone(), self.apply_index(i, &identity)))
            .collect();
        for _ in 1..n {
            let mut next = Vec::with_capacity(level.len() * self.outcomes.len());
            for (i, (first, _)) in self.outcomes.iter().enumerate() {
                for (rest, effect) in &level {
                    next.push((first.concat(rest), self.apply_index(i, effect)));
                }
            }
            level = next;
        }
        let outcomes = level
            .into_iter()
            .map(|(label, effect)| (label, HermitianOperator::symmetrized(effect)))
            .collect();
        Ok(Povm::from_validated(self.dim, outcomes))
    }

    /// Repeatability test: outcome `ω_2` after `ω_1` occurs with probability
    /// zero unless the outcomes agree, i.e. `I_{ω_1}∘I_{ω_2}(1) = δ I_{ω_1}(1)`.
    pub fn is_repeatable(&self) -> bool {
        let identity = ComplexMatrix::identity(self.dim);
        let effects: Vec<ComplexMatrix> =
            (0..self.outcomes.len()).map(|i| self.apply_index(i, &identity)).collect();
        for (i, _) in self.outcomes.iter().enumerate() {
            for (j, effect_j) in effects.iter().enumerate() {
                let two_step = self.apply_index(i, effect_j);
                let expected =
                    if i == j { effects[i].clone() } else { ComplexMatrix::zeros(self.dim) };
                if two_step.max_norm_diff(&expected) > PROJECTION_TOL {
                    return false;
                }
            }
        }
        true
    }
}

/// Binary measurement of an effect with the gentlest state change: Kraus
/// operators `√(1−A)` for outcome 0 and `√A` for outcome 1.
pub fn luders_binary(a: &HermitianOperator, tol: &Tolerances) -> Result<Instrument, Error> {
    let eigen = linalg::eigh(a)?;
    if eigen.min_eigenvalue() < -tol.psd || eigen.max_eigenvalue() > 1.0 + tol.psd {
        return Err(Error::NotEffect {
            min_eigenvalue: eigen.min_eigenvalue(),
            max_eigenvalue: eigen.max_eigenvalue(),
        });
    }
    let sqrt_a = eigen.map_eigenvalues(|x| x.clamp(0.0, 1.0).sqrt());
    let sqrt_complement = eigen.map_eigenvalues(|x| (1.0 - x.clamp(0.0, 1.0)).sqrt());
    Instrument::new(alloc::vec![
        (Label::int(0), alloc::vec![sqrt_complement.matrix().clone()]),
        (Label::int(1), alloc::vec![sqrt_a.matrix().clone()]),
    ])
}

/// Two-outcome shift instrument on dimension `d`: outcome 0 projects onto the
/// top basis state, outcome 1 shifts every other basis state one step up.
pub fn ladder(d: usize) -> Result<Instrument, Error> {
    if d < 2 {
        return Err(Error::BadDimension { dim: d });
    }
    let mut l0 = ComplexMatrix::zeros(d);
    l0.set(d - 1, d - 1, num_complex::Complex::new(1.0, 0.0));
    let mut l1 = ComplexMatrix::zeros(d);
    for k in 0..d - 1 {
        l1.set(k + 1, k, num_complex::Complex::new(1.0, 0.0));
    }
    Instrument::new(alloc::vec![
        (Label::int(0), alloc::vec![l0]),
        (Label::int(1), alloc::vec![l1]),
    ])
}

/// Measure-and-prepare instrument: measure `a`, then on outcome `ω` prepare
/// the state `states[ω]`. The Heisenberg action is `T ↦ tr[η_ω T]·A(ω)`,
/// realized by the Kraus factorization over both spectral decompositions.
pub fn preparative(
    a: &Povm,
    states: &BTreeMap<Label, DensityMatrix>,
    tol: &Tolerances,
) -> Result<Instrument, Error> {
    let dim = a.dim();
    let mut outcomes = Vec::with_capacity(a.n_outcomes());
    for (label, effect) in a.outcomes() {
        let state = states.get(label).ok_or_else(|| Error::PartialMap { label: label.clone() })?;
        if state.dim() != dim {
            return Err(Error::DimMismatch { expected: dim, found: state.dim() });
        }
        let effect_eigen = linalg::eigh(effect)?;
        let state_eigen = linalg::eigh(state.operator())?;
        let mut kraus = Vec::new();
        for (m, &weight_e) in effect_eigen.eigenvalues.iter().enumerate() {
            let we = weight_e.max(0.0);
            if we <= tol.zero {
                continue;
            }
            for (j, &weight_s) in state_eigen.eigenvalues.iter().enumerate() {
                let ws = weight_s.max(0.0);
                if we * ws <= tol.zero {
                    continue;
                }
                // K = sqrt(p_j a_m) |u_j><v_m| gives K† T K = p_j a_m <u_j|T|u_j> |v_m><v_m|.
                let u = state_eigen.eigenvector(j);
                let v = effect_eigen.eigenvector(m);
                kraus.push(ComplexMatrix::outer(&u, &v).scale((we * ws).sqrt()));
            }
        }
        if kraus.is_empty() {
            // Zero effect: a single zero Kraus operator keeps the outcome present.
            kraus.push(ComplexMatrix::zeros(dim));
        }
        outcomes.push((label.clone(), kraus));
    }
    Instrument::new(outcomes)
}

/// Convex mixture of two instruments measuring the same observable: with
/// probability `t` act as `first`, otherwise as `second`.
pub fn mixture(first: &Instrument, second: &Instrument, t: f64) -> Result<Instrument, Error> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::OutOfRange { value: t });
    }
    if first.dim() != second.dim() {
        return Err(Error::DimMismatch { expected: first.dim(), found: second.dim() });
    }
    let obs_first = first.derived_observable();
    let obs_second = second.derived_observable();
    if obs_first.n_outcomes() != obs_second.n_outcomes() {
        return Err(Error::ObservableMismatch { residual: f64::INFINITY });
    }
    let mut worst = 0.0f64;
    for (label, effect) in obs_first.outcomes() {
        match obs_second.effect(label) {
            Some(other) => worst = worst.max(effect.max_norm_diff(other)),
            None => return Err(Error::ObservableMismatch { residual: f64::INFINITY }),
        }
    }
    if worst > INSTRUMENT_NORM_TOL {
        return Err(Error::ObservableMismatch { residual: worst });
    }

    let sqrt_t = t.sqrt();
    let sqrt_rest = (1.0 - t).sqrt();
    let mut outcomes = Vec::with_capacity(first.n_outcomes());
    for (label, kraus_first) in first.outcomes() {
        let kraus_second = second.kraus(label).expect("labels matched above");
        let mut kraus = Vec::with_capacity(kraus_first.len() + kraus_second.len());
        kraus.extend(kraus_first.iter().map(|k| k.scale(sqrt_t)));
        kraus.extend(kraus_second.iter().map(|k| k.scale(sqrt_rest)));
        outcomes.push((label.clone(), kraus));
    }
    Instrument::new(outcomes)
}
