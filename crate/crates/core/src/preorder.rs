//! The post-processing preorder between observables, decided by linear
//! programming.
//!
//! `A ≼ B` holds when some column-stochastic kernel κ reproduces every effect
//! of `A` as `A(ω) = Σ_ω' κ(ω|ω') B(ω')`. The decision procedure minimizes
//! the worst entrywise residual of that system over all kernels; a residual
//! at or below `tol.feas` yields a `Holds` certificate carrying the kernel,
//! anything larger is a `Fails` with the achieved optimum as the gap.
//! Saturation of an instrument is located by testing `A_{n+1} ≼ A_n` level by
//! level, which settles every later level as well.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::asymptotics::hellinger_sq;
use crate::error::Error;
use crate::instrument::Instrument;
use crate::linalg::ComplexMatrix;
use crate::povm::{Label, Povm, StateVector};
use crate::simplex::{self, Constraint, LinearProgram, Relation};
use crate::tolerances::{Tolerances, KERNEL_NEG_TOL, KERNEL_SUM_TOL};

/// Column-stochastic matrix κ(ω|ω′) from source outcomes (of the finer
/// observable) to target outcomes. Stored row-major, targets × sources.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkovKernel {
    target_labels: Vec<Label>,
    source_labels: Vec<Label>,
    entries: Vec<f64>,
}

impl MarkovKernel {
    /// Validating constructor: entries essentially nonnegative, every column
    /// summing to one within tolerance.
    pub fn new(
        target_labels: Vec<Label>,
        source_labels: Vec<Label>,
        entries: Vec<f64>,
    ) -> Result<Self, Error> {
        let t = target_labels.len();
        let s = source_labels.len();
        if entries.len() != t * s {
            return Err(Error::DimMismatch { expected: t * s, found: entries.len() });
        }
        for (i, label) in target_labels.iter().enumerate() {
            if target_labels.iter().skip(i + 1).any(|l| l == label) {
                return Err(Error::DuplicateLabel { label: label.clone() });
            }
        }
        for (j, label) in source_labels.iter().enumerate() {
            if source_labels.iter().skip(j + 1).any(|l| l == label) {
                return Err(Error::DuplicateLabel { label: label.clone() });
            }
        }
        for i in 0..t {
            for j in 0..s {
                let v = entries[i * s + j];
                if !v.is_finite() {
                    return Err(Error::NonFinite);
                }
                if v < -KERNEL_NEG_TOL {
                    return Err(Error::NegativeKernelEntry { row: i, column: j, value: v });
                }
            }
        }
        for j in 0..s {
            let sum: f64 = (0..t).map(|i| entries[i * s + j]).sum();
            if (sum - 1.0).abs() > KERNEL_SUM_TOL {
                return Err(Error::NotStochastic { column: j, sum });
            }
        }
        Ok(MarkovKernel { target_labels, source_labels, entries })
    }

    /// Identity kernel on one label set.
    pub fn identity(labels: Vec<Label>) -> Self {
        let n = labels.len();
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1.0;
        }
        MarkovKernel { target_labels: labels.clone(), source_labels: labels, entries }
    }

    /// Deterministic kernel of a total relabeling map: κ(ω|ω′) = 1 exactly
    /// when `f(ω′) = ω`. Target labels appear in first-use order.
    pub fn from_relabeling<F>(source_labels: Vec<Label>, mut f: F) -> Result<Self, Error>
    where
        F: FnMut(&Label) -> Option<Label>,
    {
        let mut targets: Vec<Label> = Vec::new();
        let mut assignment = Vec::with_capacity(source_labels.len());
        for label in &source_labels {
            let target = f(label).ok_or_else(|| Error::PartialMap { label: label.clone() })?;
            let idx = match targets.iter().position(|l| l == &target) {
                Some(idx) => idx,
                None => {
                    targets.push(target);
                    targets.len() - 1
                }
            };
            assignment.push(idx);
        }
        let t = targets.len();
        let s = source_labels.len();
        let mut entries = vec![0.0; t * s];
        for (j, &i) in assignment.iter().enumerate() {
            entries[i * s + j] = 1.0;
        }
        Ok(MarkovKernel { target_labels: targets, source_labels, entries })
    }

    pub fn n_targets(&self) -> usize {
        self.target_labels.len()
    }

    pub fn n_sources(&self) -> usize {
        self.source_labels.len()
    }

    pub fn target_labels(&self) -> &[Label] {
        &self.target_labels
    }

    pub fn source_labels(&self) -> &[Label] {
        &self.source_labels
    }

    #[inline]
    pub fn get(&self, target: usize, source: usize) -> f64 {
        self.entries[target * self.source_labels.len() + source]
    }

    /// Chains two post-processings: if `self` maps B-outcomes to A-outcomes
    /// and `other` maps C-outcomes to B-outcomes, the product maps C to A.
    pub fn compose(&self, other: &MarkovKernel) -> Result<MarkovKernel, Error> {
        if self.source_labels.len() != other.target_labels.len() {
            return Err(Error::LabelMismatch);
        }
        // Align self's sources with other's targets by label.
        let mut index = Vec::with_capacity(self.source_labels.len());
        for label in &self.source_labels {
            match other.target_labels.iter().position(|l| l == label) {
                Some(idx) => index.push(idx),
                None => return Err(Error::LabelMismatch),
            }
        }
        let t = self.target_labels.len();
        let s = other.source_labels.len();
        let mut entries = vec![0.0; t * s];
        for i in 0..t {
            for (mid, &other_row) in index.iter().enumerate() {
                let w = self.get(i, mid);
                if w == 0.0 {
                    continue;
                }
                for j in 0..s {
                    entries[i * s + j] += w * other.get(other_row, j);
                }
            }
        }
        MarkovKernel::new(self.target_labels.clone(), other.source_labels.clone(), entries)
    }
}

impl fmt::Display for MarkovKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "kernel {} -> {}", self.source_labels.len(), self.target_labels.len())?;
        for i in 0..self.target_labels.len() {
            write!(f, "  {}:", self.target_labels[i])?;
            for j in 0..self.source_labels.len() {
                write!(f, " {:.6}", self.get(i, j))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Outcome of one preorder decision.
#[derive(Clone, Debug)]
pub enum PreorderCertificate {
    /// A kernel reproducing the coarser observable within `residual`.
    Holds { kernel: MarkovKernel, residual: f64 },
    /// No kernel gets closer than `gap`.
    Fails { gap: f64 },
}

impl PreorderCertificate {
    pub fn holds(&self) -> bool {
        matches!(self, PreorderCertificate::Holds { .. })
    }
}

/// Certificates for both directions of an equivalence test.
#[derive(Clone, Debug)]
pub struct EquivalenceCertificate {
    /// `a ≼ b`.
    pub forward: PreorderCertificate,
    /// `b ≼ a`.
    pub backward: PreorderCertificate,
}

impl EquivalenceCertificate {
    pub fn holds(&self) -> bool {
        self.forward.holds() && self.backward.holds()
    }
}

/// Evidence that two observables are inequivalent: a state pair whose outcome
/// distributions sit at different Hellinger distances.
#[derive(Clone, Debug)]
pub struct NonEquivalenceWitness {
    pub h2_first: f64,
    pub h2_second: f64,
    pub gap: f64,
}

/// Verdict of a saturation search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SaturationVerdict {
    /// Least level `n` with the repeated observables at `n` and `n+1` equivalent.
    Finite(usize),
    /// Every level up to the bound was strictly finer than the previous one.
    ExceededCap(usize),
}

/// Certificate for one level: the decision of `A_{level+1} ≼ A_{level}`.
#[derive(Clone, Debug)]
pub struct LevelCertificate {
    pub level: usize,
    pub certificate: PreorderCertificate,
}

/// Saturation verdict plus the per-level certificates that justify it.
#[derive(Clone, Debug)]
pub struct SaturationReport {
    pub verdict: SaturationVerdict,
    pub chain: Vec<LevelCertificate>,
}

/// Real coordinates of a Hermitian matrix: the diagonal, then real and
/// imaginary parts of the upper triangle. The lower triangle is redundant.
fn hermitian_coordinates(m: &ComplexMatrix) -> Vec<f64> {
    let d = m.dim();
    let mut coords = Vec::with_capacity(d * d);
    for i in 0..d {
        coords.push(m.get(i, i).re);
    }
    for i in 0..d {
        for j in (i + 1)..d {
            let z = m.get(i, j);
            coords.push(z.re);
            coords.push(z.im);
        }
    }
    coords
}

/// Decides `a ≼ b`. Both observables are canonicalized first, which keeps the
/// LP small without moving either side out of its equivalence class.
pub fn preceq(a: &Povm, b: &Povm, tol: &Tolerances) -> Result<PreorderCertificate, Error> {
    if a.dim() != b.dim() {
        return Err(Error::DimMismatch { expected: a.dim(), found: b.dim() });
    }
    let a = a.canonicalize(tol);
    let b = b.canonicalize(tol);
    let m = a.n_outcomes();
    let k = b.n_outcomes();

    let a_coords: Vec<Vec<f64>> =
        a.outcomes().iter().map(|(_, e)| hermitian_coordinates(e.matrix())).collect();
    let b_coords: Vec<Vec<f64>> =
        b.outcomes().iter().map(|(_, e)| hermitian_coordinates(e.matrix())).collect();
    let n_coords = a_coords[0].len();

    // Variables: κ(i|j) at index i*k + j, then the residual bound t.
    let nvars = m * k + 1;
    let t_var = m * k;
    let mut constraints = Vec::with_capacity(k + 2 * m * n_coords);
    for j in 0..k {
        let mut coeffs = vec![0.0; nvars];
        for i in 0..m {
            coeffs[i * k + j] = 1.0;
        }
        constraints.push(Constraint { coefficients: coeffs, relation: Relation::Eq, rhs: 1.0 });
    }
    for i in 0..m {
        for e in 0..n_coords {
            let mut le = vec![0.0; nvars];
            for j in 0..k {
                le[i * k + j] = b_coords[j][e];
            }
            let mut ge = le.clone();
            le[t_var] = -1.0;
            ge[t_var] = 1.0;
            let rhs = a_coords[i][e];
            constraints.push(Constraint { coefficients: le, relation: Relation::Le, rhs });
            constraints.push(Constraint { coefficients: ge, relation: Relation::Ge, rhs });
        }
    }
    let mut objective = vec![0.0; nvars];
    objective[t_var] = 1.0;
    let lp = LinearProgram { objective, constraints };
    let max_iterations = 10 * (nvars + lp.constraints.len());
    let solution = simplex::solve(&lp, max_iterations)?;

    // Basic solutions carry pivot roundoff of order 1e-11; repair it before
    // validating. The verdict below does not trust the repair: it re-checks
    // the residual of the kernel actually returned.
    const REPAIR_TOL: f64 = 1e-8;
    let mut entries = Vec::with_capacity(m * k);
    for i in 0..m {
        for j in 0..k {
            let v = solution.x[i * k + j];
            if v < -REPAIR_TOL {
                return Err(Error::LpNumericalFailure { reason: "kernel extraction" });
            }
            entries.push(v.max(0.0));
        }
    }
    for j in 0..k {
        let sum: f64 = (0..m).map(|i| entries[i * k + j]).sum();
        if (sum - 1.0).abs() > REPAIR_TOL {
            return Err(Error::LpNumericalFailure { reason: "kernel extraction" });
        }
        for i in 0..m {
            entries[i * k + j] /= sum;
        }
    }
    let kernel = MarkovKernel::new(
        a.labels().cloned().collect(),
        b.labels().cloned().collect(),
        entries,
    )
    .map_err(|_| Error::LpNumericalFailure { reason: "kernel extraction" })?;

    // The verdict is judged on the recomputed residual of the returned
    // kernel, not on the solver's internal objective.
    let mut residual = 0.0f64;
    for (i, (_, effect)) in a.outcomes().iter().enumerate() {
        let mut acc = ComplexMatrix::zeros(a.dim());
        for (j, (_, b_effect)) in b.outcomes().iter().enumerate() {
            let w = kernel.get(i, j);
            if w != 0.0 {
                acc = &acc + &b_effect.matrix().scale(w);
            }
        }
        residual = residual.max(acc.max_norm_diff(effect.matrix()));
    }
    if residual <= tol.feas {
        Ok(PreorderCertificate::Holds { kernel, residual })
    } else {
        Ok(PreorderCertificate::Fails { gap: solution.objective.max(0.0) })
    }
}

/// Decides `a ≃ b` by testing both directions.
pub fn equivalent(a: &Povm, b: &Povm, tol: &Tolerances) -> Result<EquivalenceCertificate, Error> {
    Ok(EquivalenceCertificate {
        forward: preceq(a, b, tol)?,
        backward: preceq(b, a, tol)?,
    })
}

/// Looks for a state pair whose outcome distributions contradict equivalence:
/// post-processing preserves Hellinger distances, so a gap above `tol.witness`
/// certifies `a ≄ b`. Absence of a witness proves nothing.
pub fn hellinger_witness(
    a: &Povm,
    b: &Povm,
    psi1: &StateVector,
    psi2: &StateVector,
    tol: &Tolerances,
) -> Result<Option<NonEquivalenceWitness>, Error> {
    let h2_first = hellinger_sq(&a.outcome_distribution(psi1)?, &a.outcome_distribution(psi2)?)?;
    let h2_second = hellinger_sq(&b.outcome_distribution(psi1)?, &b.outcome_distribution(psi2)?)?;
    let gap = (h2_first - h2_second).abs();
    if gap > tol.witness {
        Ok(Some(NonEquivalenceWitness { h2_first, h2_second, gap }))
    } else {
        Ok(None)
    }
}

/// Finds the least `n ≤ n_max` with `A_{n+1} ≼ A_n`; the reverse relation is
/// a relabeling and always holds, so that level is where repetition stops
/// adding information — and with it every later level. `cap` bounds the raw
/// outcome enumeration per level.
pub fn saturation_step(
    instrument: &Instrument,
    n_max: usize,
    cap: usize,
    tol: &Tolerances,
) -> Result<SaturationReport, Error> {
    if n_max == 0 {
        return Err(Error::OutOfRange { value: 0.0 });
    }
    let mut current = instrument.repeated_observable(1, cap)?.canonicalize(tol);
    let mut chain = Vec::new();
    for level in 1..=n_max {
        let next = instrument.repeated_observable(level + 1, cap)?.canonicalize(tol);
        let certificate = preceq(&next, &current, tol)?;
        let holds = certificate.holds();
        chain.push(LevelCertificate { level, certificate });
        if holds {
            return Ok(SaturationReport { verdict: SaturationVerdict::Finite(level), chain });
        }
        current = next;
    }
    Ok(SaturationReport { verdict: SaturationVerdict::ExceededCap(n_max), chain })
}
