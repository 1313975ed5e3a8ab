//! Finite-outcome observables: labeled collections of effects summing to the
//! identity, together with relabelings, kernel post-processing,
//! canonicalization, spectral measures, and outcome statistics.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

// Inherent std float methods shadow the trait in test builds.
#[allow(unused_imports)]
use num_traits::Float;
use ordered_float::OrderedFloat;

use crate::error::Error;
use crate::linalg::{self, Complex64, ComplexMatrix, HermitianOperator};
use crate::preorder::MarkovKernel;
use crate::tolerances::{Tolerances, PROB_CLAMP, PROJECTION_TOL, UNIT_NORM_TOL};

/// Atomic outcome symbol: an integer, a name, or a real number (used for
/// spectral atoms). Reals carry a total order so labels can key maps.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Int(i64),
    Text(String),
    Real(OrderedFloat<f64>),
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Int(i) => write!(f, "{i}"),
            Atom::Text(s) => write!(f, "{s}"),
            Atom::Real(x) => write!(f, "{}", x.0),
        }
    }
}

/// Outcome label: a finite sequence of atoms. A single atom and the
/// length-one sequence holding it are the same label, so the outcomes of a
/// repeated measurement extend plain labels without a special case.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(Vec<Atom>);

impl Label {
    pub fn int(value: i64) -> Self {
        Label(alloc::vec![Atom::Int(value)])
    }

    pub fn text(value: impl Into<String>) -> Self {
        Label(alloc::vec![Atom::Text(value.into())])
    }

    pub fn real(value: f64) -> Self {
        Label(alloc::vec![Atom::Real(OrderedFloat(value))])
    }

    /// The empty sequence; the single outcome of the trivial observable.
    pub fn unit() -> Self {
        Label(Vec::new())
    }

    pub fn from_atoms(atoms: Vec<Atom>) -> Self {
        Label(atoms)
    }

    /// Sequence of integer atoms, the common shape of repeated outcomes.
    pub fn from_ints(values: &[i64]) -> Self {
        Label(values.iter().map(|&v| Atom::Int(v)).collect())
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `self` followed by `other`.
    pub fn concat(&self, other: &Label) -> Label {
        let mut atoms = self.0.clone();
        atoms.extend(other.0.iter().cloned());
        Label(atoms)
    }

    /// Label with the last atom removed, or `None` for the empty label.
    pub fn drop_last(&self) -> Option<Label> {
        self.0.split_last().map(|(_, rest)| Label(rest.to_vec()))
    }

    pub fn as_int(&self) -> Option<i64> {
        match self.0.as_slice() {
            [Atom::Int(i)] => Some(*i),
            _ => None,
        }
    }

    pub fn as_real(&self) -> Option<f64> {
        match self.0.as_slice() {
            [Atom::Real(x)] => Some(x.0),
            _ => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0.as_slice() {
            [single] => write!(f, "{single}"),
            atoms => {
                write!(f, "(")?;
                for (i, a) in atoms.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// One invariant violation found while validating an observable.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    EmptyOutcomes,
    DimMismatch { label: Label, expected: usize, found: usize },
    DuplicateLabel { label: Label },
    EffectNotPsd { label: Label, min_eigenvalue: f64 },
    CompletenessResidual { residual: f64 },
    EigensolverFailure { label: Label },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyOutcomes => write!(f, "no outcomes"),
            Violation::DimMismatch { label, expected, found } => {
                write!(f, "effect {label} has dimension {found}, expected {expected}")
            }
            Violation::DuplicateLabel { label } => write!(f, "duplicate label {label}"),
            Violation::EffectNotPsd { label, min_eigenvalue } => {
                write!(f, "effect {label} not PSD (min eigenvalue {min_eigenvalue:.3e})")
            }
            Violation::CompletenessResidual { residual } => {
                write!(f, "completeness residual {residual:.3e}")
            }
            Violation::EigensolverFailure { label } => {
                write!(f, "eigensolver failed on effect {label}")
            }
        }
    }
}

/// Outcome of validating an observable: empty means all invariants hold.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ok() {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Finite-outcome observable: ordered labeled effects that are PSD and sum to
/// the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct Povm {
    dim: usize,
    outcomes: Vec<(Label, HermitianOperator)>,
}

impl Povm {
    /// Validating constructor with default tolerances.
    pub fn new(outcomes: Vec<(Label, HermitianOperator)>) -> Result<Self, Error> {
        Self::with_tolerances(outcomes, &Tolerances::default())
    }

    /// Validating constructor; fails with the full violation report.
    pub fn with_tolerances(
        outcomes: Vec<(Label, HermitianOperator)>,
        tol: &Tolerances,
    ) -> Result<Self, Error> {
        let report = validate_outcomes(&outcomes, tol);
        if !report.ok() {
            return Err(Error::InvalidPovm(report));
        }
        let dim = outcomes[0].1.dim();
        Ok(Povm { dim, outcomes })
    }

    /// For internal construction where the invariants hold by derivation.
    pub(crate) fn from_validated(dim: usize, outcomes: Vec<(Label, HermitianOperator)>) -> Self {
        Povm { dim, outcomes }
    }

    /// The two-outcome observable `{0 ↦ 1−A, 1 ↦ A}` of an effect.
    pub fn binary_from_effect(a: &HermitianOperator, tol: &Tolerances) -> Result<Self, Error> {
        let eigen = linalg::eigh(a)?;
        if eigen.min_eigenvalue() < -tol.psd || eigen.max_eigenvalue() > 1.0 + tol.psd {
            return Err(Error::NotEffect {
                min_eigenvalue: eigen.min_eigenvalue(),
                max_eigenvalue: eigen.max_eigenvalue(),
            });
        }
        Ok(Povm::from_validated(
            a.dim(),
            alloc::vec![(Label::int(0), a.complement()), (Label::int(1), a.clone())],
        ))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_outcomes(&self) -> usize {
        self.outcomes.len()
    }

    pub fn outcomes(&self) -> &[(Label, HermitianOperator)] {
        &self.outcomes
    }

    pub fn labels(&self) -> impl Iterator<Item = &Label> {
        self.outcomes.iter().map(|(l, _)| l)
    }

    pub fn position(&self, label: &Label) -> Option<usize> {
        self.outcomes.iter().position(|(l, _)| l == label)
    }

    pub fn effect(&self, label: &Label) -> Option<&HermitianOperator> {
        self.outcomes.iter().find(|(l, _)| l == label).map(|(_, e)| e)
    }

    /// Re-checks the invariants of this observable.
    pub fn validate(&self, tol: &Tolerances) -> ValidationReport {
        validate_outcomes(&self.outcomes, tol)
    }

    /// Sums effects under a total relabeling map; targets appear in first-use
    /// order. Undefined labels yield `PartialMap`.
    pub fn relabel<F>(&self, mut f: F) -> Result<Povm, Error>
    where
        F: FnMut(&Label) -> Option<Label>,
    {
        let mut order: Vec<Label> = Vec::new();
        let mut merged: BTreeMap<Label, HermitianOperator> = BTreeMap::new();
        for (label, effect) in &self.outcomes {
            let target = f(label).ok_or_else(|| Error::PartialMap { label: label.clone() })?;
            match merged.get_mut(&target) {
                Some(acc) => *acc = acc.add(effect),
                None => {
                    order.push(target.clone());
                    merged.insert(target, effect.clone());
                }
            }
        }
        let outcomes = order
            .into_iter()
            .map(|l| {
                let e = merged.remove(&l).expect("label recorded on first use");
                (l, e)
            })
            .collect();
        Ok(Povm::from_validated(self.dim, outcomes))
    }

    /// Marginal over the last coordinate of every (sequence) label.
    pub fn marginalize_last(&self) -> Result<Povm, Error> {
        self.relabel(|l| l.drop_last())
    }

    /// Drops zero effects and merges outcomes whose effects are positive
    /// multiples of each other; the result represents the same equivalence
    /// class under post-processing.
    pub fn canonicalize(&self, tol: &Tolerances) -> Povm {
        struct Group {
            label: Label,
            sum: HermitianOperator,
            representative: ComplexMatrix,
        }
        let mut groups: Vec<Group> = Vec::new();
        for (label, effect) in &self.outcomes {
            if effect.max_norm() <= tol.zero {
                continue;
            }
            // PSD and nonzero, so the trace is strictly positive.
            let normalized = effect.matrix().scale(1.0 / effect.trace());
            match groups
                .iter_mut()
                .find(|g| g.representative.max_norm_diff(&normalized) <= tol.prop)
            {
                Some(group) => group.sum = group.sum.add(effect),
                None => groups.push(Group {
                    label: label.clone(),
                    sum: effect.clone(),
                    representative: normalized,
                }),
            }
        }
        let outcomes = groups.into_iter().map(|g| (g.label, g.sum)).collect();
        Povm::from_validated(self.dim, outcomes)
    }

    /// Whether every effect is a projection.
    pub fn is_sharp(&self) -> bool {
        self.outcomes.iter().all(|(_, e)| e.is_projection(PROJECTION_TOL))
    }

    /// Outcome probabilities `⟨ψ|E(ω)|ψ⟩`, clamped into `[0, 1]`.
    pub fn outcome_distribution(
        &self,
        psi: &StateVector,
    ) -> Result<BTreeMap<Label, f64>, Error> {
        if psi.dim() != self.dim {
            return Err(Error::DimMismatch { expected: self.dim, found: psi.dim() });
        }
        let mut dist = BTreeMap::new();
        for (label, effect) in &self.outcomes {
            let p = effect.matrix().expectation(psi.amplitudes()).re;
            let p = if p < 0.0 {
                debug_assert!(p >= -PROB_CLAMP, "probability {p} below clamp window");
                0.0
            } else {
                p.min(1.0)
            };
            dist.insert(label.clone(), p);
        }
        Ok(dist)
    }
}

/// Validates a candidate outcome list against the observable invariants.
pub fn validate_outcomes(
    outcomes: &[(Label, HermitianOperator)],
    tol: &Tolerances,
) -> ValidationReport {
    let mut violations = Vec::new();
    if outcomes.is_empty() {
        return ValidationReport { violations: alloc::vec![Violation::EmptyOutcomes] };
    }
    let dim = outcomes[0].1.dim();
    for (label, effect) in outcomes {
        if effect.dim() != dim {
            violations.push(Violation::DimMismatch {
                label: label.clone(),
                expected: dim,
                found: effect.dim(),
            });
        }
    }
    for (i, (label, _)) in outcomes.iter().enumerate() {
        if outcomes.iter().skip(i + 1).any(|(l, _)| l == label) {
            violations.push(Violation::DuplicateLabel { label: label.clone() });
        }
    }
    if !violations.is_empty() {
        // Dimension or label problems make the remaining checks ill-posed.
        return ValidationReport { violations };
    }
    for (label, effect) in outcomes {
        match linalg::eigh(effect) {
            Ok(eigen) => {
                let min = eigen.min_eigenvalue();
                if min < -tol.psd {
                    violations.push(Violation::EffectNotPsd {
                        label: label.clone(),
                        min_eigenvalue: min,
                    });
                }
            }
            Err(_) => violations.push(Violation::EigensolverFailure { label: label.clone() }),
        }
    }
    let mut sum = ComplexMatrix::zeros(dim);
    for (_, effect) in outcomes {
        sum = &sum + effect.matrix();
    }
    let residual = sum.max_norm_diff(&ComplexMatrix::identity(dim));
    if residual > tol.sum {
        violations.push(Violation::CompletenessResidual { residual });
    }
    ValidationReport { violations }
}

/// Post-processes observable `b` through a column-stochastic kernel:
/// the output effect at target `ω` is `Σ_ω' κ(ω|ω') B(ω')`.
pub fn apply_kernel(kernel: &MarkovKernel, b: &Povm) -> Result<Povm, Error> {
    if kernel.n_sources() != b.n_outcomes() {
        return Err(Error::LabelMismatch);
    }
    let mut source_index = Vec::with_capacity(kernel.n_sources());
    for label in kernel.source_labels() {
        match b.position(label) {
            Some(idx) => source_index.push(idx),
            None => return Err(Error::LabelMismatch),
        }
    }
    let mut outcomes = Vec::with_capacity(kernel.n_targets());
    for (i, target) in kernel.target_labels().iter().enumerate() {
        let mut acc = ComplexMatrix::zeros(b.dim());
        for (j, &src) in source_index.iter().enumerate() {
            let weight = kernel.get(i, j);
            if weight != 0.0 {
                acc = &acc + &b.outcomes()[src].1.matrix().scale(weight);
            }
        }
        outcomes.push((target.clone(), HermitianOperator::symmetrized(acc)));
    }
    Ok(Povm::from_validated(b.dim(), outcomes))
}

/// Sharp observable formed by the spectral projections of an effect, labeled
/// by the clustered eigenvalues.
pub fn spectral_measure_of_effect(
    a: &HermitianOperator,
    tol: &Tolerances,
) -> Result<Povm, Error> {
    let eigen = linalg::eigh(a)?;
    let min = eigen.min_eigenvalue();
    let max = eigen.max_eigenvalue();
    if min < -tol.psd || max > 1.0 + tol.psd {
        return Err(Error::NotEffect { min_eigenvalue: min, max_eigenvalue: max });
    }
    // Ascending eigenvalues; chain-cluster with the configured resolution.
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for (k, &lambda) in eigen.eigenvalues.iter().enumerate() {
        match clusters.last_mut() {
            Some(cluster)
                if lambda - eigen.eigenvalues[*cluster.last().expect("nonempty")]
                    <= tol.cluster =>
            {
                cluster.push(k)
            }
            _ => clusters.push(alloc::vec![k]),
        }
    }
    let dim = a.dim();
    let mut outcomes = Vec::with_capacity(clusters.len());
    for cluster in clusters {
        let mean =
            cluster.iter().map(|&k| eigen.eigenvalues[k]).sum::<f64>() / cluster.len() as f64;
        let value = mean.clamp(0.0, 1.0);
        let mut projection = ComplexMatrix::zeros(dim);
        for &k in &cluster {
            let col = eigen.eigenvector(k);
            projection = &projection + &ComplexMatrix::outer(&col, &col);
        }
        outcomes.push((Label::real(value), HermitianOperator::symmetrized(projection)));
    }
    Ok(Povm::from_validated(dim, outcomes))
}

/// Unit vector in the measured Hilbert space.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Requires unit norm within tolerance.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self, Error> {
        if amplitudes.is_empty() {
            return Err(Error::BadDimension { dim: 0 });
        }
        if !amplitudes.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > UNIT_NORM_TOL {
            return Err(Error::NotUnitNorm { norm });
        }
        Ok(StateVector { amplitudes })
    }

    /// Rescales to unit norm; fails on the zero vector.
    pub fn normalized(amplitudes: Vec<Complex64>) -> Result<Self, Error> {
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() || norm <= 0.0 {
            return Err(Error::OutOfRange { value: norm });
        }
        let scaled = amplitudes.into_iter().map(|z| z / norm).collect();
        StateVector::new(scaled)
    }

    /// Standard basis vector `|index⟩`.
    pub fn basis_state(dim: usize, index: usize) -> Self {
        assert!(index < dim, "basis index out of range");
        let mut amplitudes = alloc::vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        StateVector { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }
}

/// PSD operator with unit trace.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    op: HermitianOperator,
}

impl DensityMatrix {
    pub fn new(op: HermitianOperator, tol: &Tolerances) -> Result<Self, Error> {
        if !linalg::is_psd(&op, tol.psd)? {
            let eigen = linalg::eigh(&op)?;
            return Err(Error::NotPsd { min_eigenvalue: eigen.min_eigenvalue() });
        }
        let trace = op.trace();
        if (trace - 1.0).abs() > UNIT_NORM_TOL {
            return Err(Error::TraceNotOne { trace });
        }
        Ok(DensityMatrix { op })
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn from_pure(psi: &StateVector) -> Self {
        let m = ComplexMatrix::outer(psi.amplitudes(), psi.amplitudes());
        DensityMatrix { op: HermitianOperator::symmetrized(m) }
    }

    /// `1/d`.
    pub fn maximally_mixed(dim: usize) -> Self {
        let op = HermitianOperator::identity(dim).scale(1.0 / dim as f64);
        DensityMatrix { op }
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.op.matrix()
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preorder::MarkovKernel;

    fn effect_a() -> HermitianOperator {
        HermitianOperator::from_real_diag(&[0.3, 0.7])
    }

    fn binary(a: &HermitianOperator) -> Povm {
        Povm::binary_from_effect(a, &Tolerances::default()).unwrap()
    }

    #[test]
    fn validate_accepts_binary_effect_observable() {
        let p = binary(&effect_a());
        assert!(p.validate(&Tolerances::default()).ok());
    }

    #[test]
    fn validate_flags_completeness() {
        let a = effect_a();
        let outcomes = alloc::vec![(Label::int(0), a.clone()), (Label::int(1), a.clone())];
        let report = validate_outcomes(&outcomes, &Tolerances::default());
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::CompletenessResidual { .. })));
    }

    #[test]
    fn validate_flags_non_psd_effect() {
        let outcomes = alloc::vec![
            (Label::int(0), HermitianOperator::from_real_diag(&[1.2, 0.0])),
            (Label::int(1), HermitianOperator::from_real_diag(&[-0.2, 1.0])),
        ];
        let report = validate_outcomes(&outcomes, &Tolerances::default());
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::EffectNotPsd { .. })));
    }

    #[test]
    fn relabel_identity_is_identity() {
        let p = binary(&effect_a());
        let q = p.relabel(|l| Some(l.clone())).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn relabel_constant_map_gives_trivial_observable() {
        let p = binary(&effect_a());
        let q = p.relabel(|_| Some(Label::text("all"))).unwrap();
        assert_eq!(q.n_outcomes(), 1);
        let identity = HermitianOperator::identity(2);
        assert!(q.outcomes()[0].1.max_norm_diff(&identity) <= 1e-12);
    }

    #[test]
    fn relabel_partial_map_fails() {
        let p = binary(&effect_a());
        let err = p.relabel(|l| if l.as_int() == Some(0) { Some(l.clone()) } else { None });
        assert!(matches!(err, Err(Error::PartialMap { .. })));
    }

    #[test]
    fn marginalize_two_step_sequences() {
        // Product observable {(i,j) -> E_i F_j} marginalizes to {i -> E_i}.
        let a = effect_a();
        let b = HermitianOperator::from_real_diag(&[0.5, 0.5]);
        let mut outcomes = Vec::new();
        for (i, e) in [(0, a.complement()), (1, a.clone())] {
            for (j, f) in [(0, b.complement()), (1, b.clone())] {
                let label = Label::from_ints(&[i, j]);
                let product = HermitianOperator::symmetrized(e.matrix().mul(f.matrix()));
                outcomes.push((label, product));
            }
        }
        let p2 = Povm::new(outcomes).unwrap();
        let p1 = p2.marginalize_last().unwrap();
        assert_eq!(p1.n_outcomes(), 2);
        assert!(p1.effect(&Label::int(1)).unwrap().max_norm_diff(&a) <= 1e-12);
    }

    #[test]
    fn spectral_kernel_recovers_binary_observable() {
        // The kernel sending atom lambda to outcome 1 with probability lambda
        // turns the spectral measure of A back into {1-A, A}.
        let a = effect_a();
        let spectral = spectral_measure_of_effect(&a, &Tolerances::default()).unwrap();
        let lambdas: Vec<f64> =
            spectral.labels().map(|l| l.as_real().expect("real atom")).collect();
        let mut entries = Vec::new();
        for row in 0..2 {
            for &lambda in &lambdas {
                entries.push(if row == 0 { 1.0 - lambda } else { lambda });
            }
        }
        let kernel = MarkovKernel::new(
            alloc::vec![Label::int(0), Label::int(1)],
            spectral.labels().cloned().collect(),
            entries,
        )
        .unwrap();
        let recovered = apply_kernel(&kernel, &spectral).unwrap();
        let expected = binary(&a);
        for (l, e) in expected.outcomes() {
            assert!(recovered.effect(l).unwrap().max_norm_diff(e) <= 1e-10);
        }
    }

    #[test]
    fn identity_kernel_preserves_observable() {
        let p = binary(&effect_a());
        let kernel = MarkovKernel::identity(p.labels().cloned().collect());
        let q = apply_kernel(&kernel, &p).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn uniform_kernel_forces_halves() {
        let p = binary(&effect_a());
        let kernel = MarkovKernel::new(
            alloc::vec![Label::int(0), Label::int(1)],
            p.labels().cloned().collect(),
            alloc::vec![0.5, 0.5, 0.5, 0.5],
        )
        .unwrap();
        let q = apply_kernel(&kernel, &p).unwrap();
        let half_identity = HermitianOperator::identity(2).scale(0.5);
        for (_, e) in q.outcomes() {
            assert!(e.max_norm_diff(&half_identity) <= 1e-12);
        }
    }

    #[test]
    fn canonicalize_merges_proportional_effects() {
        let a = effect_a();
        let one_minus = a.complement();
        let tol = Tolerances::default();
        // Direct two-step effects of the binary measurement of A: the mixed
        // sequences contribute sqrt(A)(1-A)sqrt(A) = A(1-A) = 0.21*identity.
        let sqrt_a = linalg::sqrt_psd(&a, &tol).unwrap();
        let sqrt_c = linalg::sqrt_psd(&one_minus, &tol).unwrap();
        let sandwich = |k: &HermitianOperator, t: &HermitianOperator| {
            HermitianOperator::symmetrized(
                k.matrix().adjoint().mul(&t.matrix().mul(k.matrix())),
            )
        };
        let outcomes = alloc::vec![
            (Label::from_ints(&[0, 0]), sandwich(&sqrt_c, &one_minus)),
            (Label::from_ints(&[0, 1]), sandwich(&sqrt_c, &a)),
            (Label::from_ints(&[1, 0]), sandwich(&sqrt_a, &one_minus)),
            (Label::from_ints(&[1, 1]), sandwich(&sqrt_a, &a)),
        ];
        let p = Povm::new(outcomes).unwrap();
        let canonical = p.canonicalize(&tol);
        assert_eq!(canonical.n_outcomes(), 3);
        let merged = HermitianOperator::identity(2).scale(0.42);
        assert!(canonical.effect(&Label::from_ints(&[0, 1])).unwrap().max_norm_diff(&merged)
            <= 1e-9);
    }

    #[test]
    fn canonicalize_drops_zero_effects() {
        let a = effect_a();
        let outcomes = alloc::vec![
            (Label::int(0), a.complement()),
            (Label::int(1), a.clone()),
            (Label::int(2), HermitianOperator::zero(2)),
        ];
        let p = Povm::new(outcomes).unwrap();
        let canonical = p.canonicalize(&Tolerances::default());
        assert_eq!(canonical.n_outcomes(), 2);
    }

    #[test]
    fn canonicalize_fixes_canonical_input() {
        let p = binary(&effect_a());
        let canonical = p.canonicalize(&Tolerances::default());
        assert_eq!(p, canonical);
    }

    #[test]
    fn spectral_measure_of_diagonal_effect() {
        let p = spectral_measure_of_effect(&effect_a(), &Tolerances::default()).unwrap();
        assert_eq!(p.n_outcomes(), 2);
        assert!(p.is_sharp());
        let e03 = p.effect(&Label::real(0.3)).unwrap();
        assert!(e03.max_norm_diff(&HermitianOperator::from_real_diag(&[1.0, 0.0])) <= 1e-10);
    }

    #[test]
    fn spectral_measure_of_scalar_effect_is_trivial() {
        let a = HermitianOperator::identity(3).scale(0.4);
        let p = spectral_measure_of_effect(&a, &Tolerances::default()).unwrap();
        assert_eq!(p.n_outcomes(), 1);
        let (label, effect) = &p.outcomes()[0];
        assert!((label.as_real().unwrap() - 0.4).abs() <= 1e-12);
        assert!(effect.max_norm_diff(&HermitianOperator::identity(3)) <= 1e-12);
    }

    #[test]
    fn spectral_measure_clusters_close_eigenvalues() {
        let a = HermitianOperator::from_real_diag(&[0.5, 0.5 + 1e-12, 0.9]);
        let p = spectral_measure_of_effect(&a, &Tolerances::default()).unwrap();
        assert_eq!(p.n_outcomes(), 2);
        let first = &p.outcomes()[0].1;
        assert!((first.trace() - 2.0).abs() <= 1e-9);
        // Reconstruction from atoms.
        let mut recon = ComplexMatrix::zeros(3);
        for (label, effect) in p.outcomes() {
            recon = &recon + &effect.matrix().scale(label.as_real().unwrap());
        }
        assert!(recon.max_norm_diff(a.matrix()) <= 1e-9);
    }

    #[test]
    fn spectral_measure_rejects_non_effect() {
        let a = HermitianOperator::from_real_diag(&[0.5, 1.5]);
        assert!(matches!(
            spectral_measure_of_effect(&a, &Tolerances::default()),
            Err(Error::NotEffect { .. })
        ));
    }

    #[test]
    fn outcome_distribution_on_eigenvector() {
        let p = binary(&effect_a());
        let psi = StateVector::basis_state(2, 1); // eigenvalue 0.7 of A
        let dist = p.outcome_distribution(&psi).unwrap();
        assert!((dist[&Label::int(0)] - 0.3).abs() <= 1e-12);
        assert!((dist[&Label::int(1)] - 0.7).abs() <= 1e-12);
    }

    #[test]
    fn outcome_distribution_trivial_observable() {
        let p = Povm::new(alloc::vec![(Label::unit(), HermitianOperator::identity(2))]).unwrap();
        let psi = StateVector::basis_state(2, 0);
        let dist = p.outcome_distribution(&psi).unwrap();
        assert!((dist[&Label::unit()] - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn sharpness_distinguishes_spectral_from_unsharp() {
        let a = effect_a();
        assert!(spectral_measure_of_effect(&a, &Tolerances::default()).unwrap().is_sharp());
        assert!(!binary(&a).is_sharp());
    }

    #[test]
    fn state_vector_norm_enforced() {
        let err = StateVector::new(alloc::vec![Complex64::new(0.5, 0.0), Complex64::new(0.5, 0.0)]);
        assert!(matches!(err, Err(Error::NotUnitNorm { .. })));
        let ok = StateVector::normalized(alloc::vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0)
        ])
        .unwrap();
        assert!((ok.amplitudes()[0].re - core::f64::consts::FRAC_1_SQRT_2).abs() <= 1e-12);
    }

    #[test]
    fn density_matrix_checks() {
        let tol = Tolerances::default();
        assert!(DensityMatrix::new(HermitianOperator::from_real_diag(&[0.5, 0.5]), &tol).is_ok());
        assert!(matches!(
            DensityMatrix::new(HermitianOperator::from_real_diag(&[0.7, 0.7]), &tol),
            Err(Error::TraceNotOne { .. })
        ));
        assert!(matches!(
            DensityMatrix::new(HermitianOperator::from_real_diag(&[1.5, -0.5]), &tol),
            Err(Error::NotPsd { .. })
        ));
    }
}
