//! Long-run behavior of repeated measurements: Monte Carlo trajectories,
//! empirical outcome frequencies, spectral-mass estimation, and Hellinger
//! distances with the closed form for repeated binary measurements.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

// Inherent std float methods shadow the trait in test builds.
#[allow(unused_imports)]
use num_traits::Float;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::instrument::Instrument;
use crate::linalg::{ComplexMatrix, HermitianOperator};
use crate::povm::{spectral_measure_of_effect, DensityMatrix, Label};
use crate::tolerances::{Tolerances, DIST_SUM_TOL, UNDERFLOW_TRACE};

/// Outcome record of a batch of independent measurement trajectories.
///
/// Outcomes are stored as indices into `outcome_labels`, one row of `n_steps`
/// entries per trajectory. Batches are reproducible: the RNG is ChaCha8 with
/// the batch seed, and trajectory `i` draws from stream `i`, so results do
/// not depend on scheduling.
#[derive(Clone, Debug)]
pub struct TrajectoryBatch {
    outcome_labels: Vec<Label>,
    n_steps: usize,
    n_traj: usize,
    seed: u64,
    outcomes: Vec<u32>,
    underflow_events: u64,
}

impl TrajectoryBatch {
    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn n_traj(&self) -> usize {
        self.n_traj
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn outcome_labels(&self) -> &[Label] {
        &self.outcome_labels
    }

    /// Label observed at one step of one trajectory.
    pub fn outcome(&self, trajectory: usize, step: usize) -> &Label {
        &self.outcome_labels[self.outcomes[trajectory * self.n_steps + step] as usize]
    }

    /// Raw outcome indices of one trajectory.
    pub fn outcome_indices(&self, trajectory: usize) -> &[u32] {
        &self.outcomes[trajectory * self.n_steps..(trajectory + 1) * self.n_steps]
    }

    /// How many state updates needed a trace rescue during sampling.
    pub fn underflow_events(&self) -> u64 {
        self.underflow_events
    }

    /// Per-trajectory mean outcome value, for instruments labeled 0 and 1.
    /// Zero-step batches report frequency zero.
    pub fn final_frequencies(&self) -> Result<Vec<f64>, Error> {
        let values: Vec<f64> = self
            .outcome_labels
            .iter()
            .map(|l| match l.as_int() {
                Some(0) => Ok(0.0),
                Some(1) => Ok(1.0),
                _ => Err(Error::NonBinaryLabels),
            })
            .collect::<Result<_, _>>()?;
        let mut freqs = Vec::with_capacity(self.n_traj);
        for traj in 0..self.n_traj {
            if self.n_steps == 0 {
                freqs.push(0.0);
                continue;
            }
            let sum: f64 =
                self.outcome_indices(traj).iter().map(|&i| values[i as usize]).sum();
            freqs.push(sum / self.n_steps as f64);
        }
        Ok(freqs)
    }
}

fn uniform_unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Samples `n_traj` trajectories of `n_steps` repeated applications of the
/// instrument, starting from `initial`.
///
/// At each step the outcome is drawn with probability `tr[ρ · I_ω(1)]` for
/// the current state ρ, which then updates to `Σ_k K ρ K† / p(ω)`. States
/// whose trace falls below the underflow threshold are renormalized and
/// counted in [`TrajectoryBatch::underflow_events`].
pub fn sample_trajectories(
    instrument: &Instrument,
    initial: &DensityMatrix,
    n_steps: usize,
    n_traj: usize,
    seed: u64,
) -> Result<TrajectoryBatch, Error> {
    if initial.dim() != instrument.dim() {
        return Err(Error::DimMismatch { expected: instrument.dim(), found: initial.dim() });
    }
    let dim = instrument.dim();
    let effects: Vec<ComplexMatrix> = (0..instrument.n_outcomes())
        .map(|i| {
            let mut acc = ComplexMatrix::zeros(dim);
            for k in &instrument.outcomes()[i].1 {
                acc = &acc + &k.adjoint().mul(k);
            }
            acc
        })
        .collect();

    let n_outcomes = instrument.n_outcomes();
    let mut outcomes = Vec::with_capacity(n_traj * n_steps);
    let mut underflow_events = 0u64;
    let mut probs = vec![0.0f64; n_outcomes];

    for traj in 0..n_traj {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(traj as u64);
        let mut state = initial.matrix().clone();
        for _ in 0..n_steps {
            let mut total = 0.0;
            for (i, effect) in effects.iter().enumerate() {
                let p = state.product_trace(effect).re.max(0.0);
                probs[i] = p;
                total += p;
            }
            let chosen = if total > 0.0 {
                let u = uniform_unit(&mut rng) * total;
                let mut acc = 0.0;
                let mut pick = None;
                for (i, &p) in probs.iter().enumerate() {
                    if p <= 0.0 {
                        continue;
                    }
                    acc += p;
                    if u < acc {
                        pick = Some(i);
                        break;
                    }
                }
                // Roundoff at the top of the cumulative sum: take the last
                // outcome that had positive probability.
                pick.unwrap_or_else(|| {
                    probs.iter().rposition(|&p| p > 0.0).expect("total > 0")
                })
            } else {
                // Degenerate state; no branch has probability. Restart from
                // the maximally mixed state and count the event.
                underflow_events += 1;
                state = ComplexMatrix::identity(dim).scale(1.0 / dim as f64);
                continue;
            };
            outcomes.push(chosen as u32);

            let mut next = ComplexMatrix::zeros(dim);
            for k in &instrument.outcomes()[chosen].1 {
                next = &next + &k.mul(&state).mul(&k.adjoint());
            }
            let trace = next.trace().re;
            if trace < UNDERFLOW_TRACE {
                underflow_events += 1;
            }
            if trace > 0.0 {
                state = next.scale(1.0 / trace);
            } else {
                state = ComplexMatrix::identity(dim).scale(1.0 / dim as f64);
            }
        }
    }

    Ok(TrajectoryBatch {
        outcome_labels: instrument.labels().cloned().collect(),
        n_steps,
        n_traj,
        seed,
        outcomes,
        underflow_events,
    })
}

/// Histogram over `[edges[0], edges[last]]` with `masses.len() + 1` edges.
/// Masses sum to one for nonempty batches.
#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub masses: Vec<f64>,
}

/// `bins` uniform bin edges spanning `[0, 1]`.
pub fn uniform_edges(bins: usize) -> Vec<f64> {
    assert!(bins > 0, "need at least one bin");
    (0..=bins).map(|i| i as f64 / bins as f64).collect()
}

/// Histogram of per-trajectory final frequencies. Values are clamped into the
/// edge range; bins are half-open except the last, which is closed.
pub fn frequency_histogram(batch: &TrajectoryBatch, edges: &[f64]) -> Result<Histogram, Error> {
    if edges.len() < 2 {
        return Err(Error::BadDimension { dim: edges.len() });
    }
    for pair in edges.windows(2) {
        if !(pair[0] < pair[1]) {
            return Err(Error::OutOfRange { value: pair[1] });
        }
    }
    let freqs = batch.final_frequencies()?;
    let bins = edges.len() - 1;
    let mut counts = vec![0usize; bins];
    for &x in &freqs {
        let idx = if x <= edges[0] {
            0
        } else if x >= edges[bins] {
            bins - 1
        } else {
            edges.partition_point(|&e| e <= x) - 1
        };
        counts[idx] += 1;
    }
    let total = freqs.len();
    let masses = counts
        .into_iter()
        .map(|c| if total == 0 { 0.0 } else { c as f64 / total as f64 })
        .collect();
    Ok(Histogram { edges: edges.to_vec(), masses })
}

/// Assigns each trajectory's final frequency to the nearest spectral atom of
/// the effect and reports the empirical mass per atom.
///
/// Atoms must be separated by more than `2/√n_steps` so that frequency
/// fluctuations cannot straddle the midpoints.
pub fn estimate_spectral_masses(
    batch: &TrajectoryBatch,
    a: &HermitianOperator,
    tol: &Tolerances,
) -> Result<Vec<(f64, f64)>, Error> {
    let spectral = spectral_measure_of_effect(a, tol)?;
    let atoms: Vec<f64> = spectral
        .labels()
        .map(|l| l.as_real().expect("spectral labels are real atoms"))
        .collect();
    if atoms.len() > 1 {
        let required = if batch.n_steps() == 0 {
            f64::INFINITY
        } else {
            2.0 / (batch.n_steps() as f64).sqrt()
        };
        let mut min_gap = f64::INFINITY;
        for pair in atoms.windows(2) {
            min_gap = min_gap.min(pair[1] - pair[0]);
        }
        if min_gap <= required {
            return Err(Error::AtomsTooClose { gap: min_gap, required });
        }
    }
    let freqs = batch.final_frequencies()?;
    let mut counts = vec![0usize; atoms.len()];
    for &x in &freqs {
        let mut best = 0;
        let mut best_dist = f64::INFINITY;
        for (i, &atom) in atoms.iter().enumerate() {
            let dist = (x - atom).abs();
            if dist < best_dist {
                best = i;
                best_dist = dist;
            }
        }
        counts[best] += 1;
    }
    let total = freqs.len();
    Ok(atoms
        .into_iter()
        .zip(counts)
        .map(|(atom, c)| (atom, if total == 0 { 0.0 } else { c as f64 / total as f64 }))
        .collect())
}

/// Squared Hellinger distance `1 − Σ_ω √(p(ω) q(ω))` between probability
/// maps; labels missing on one side contribute zero.
pub fn hellinger_sq(p: &BTreeMap<Label, f64>, q: &BTreeMap<Label, f64>) -> Result<f64, Error> {
    for map in [p, q] {
        let sum: f64 = map.values().sum();
        if (sum - 1.0).abs() > DIST_SUM_TOL {
            return Err(Error::NotNormalized { sum });
        }
    }
    let mut bhattacharyya = 0.0;
    for (label, &pv) in p {
        if let Some(&qv) = q.get(label) {
            bhattacharyya += (pv.max(0.0) * qv.max(0.0)).sqrt();
        }
    }
    Ok((1.0 - bhattacharyya).clamp(0.0, 1.0))
}

/// Squared Hellinger distance between the length-`n` outcome distributions of
/// two eigenvectors of the measured effect, with eigenvalues `lambda1` and
/// `lambda2`: the sequences are Bernoulli products, the Bhattacharyya
/// coefficient multiplies, and the distance is
/// `1 − (√(λ₁λ₂) + √((1−λ₁)(1−λ₂)))ⁿ`.
pub fn luders_hellinger_closed_form(lambda1: f64, lambda2: f64, n: u32) -> Result<f64, Error> {
    for lambda in [lambda1, lambda2] {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::OutOfRange { value: lambda });
        }
    }
    let base = (lambda1 * lambda2).sqrt() + ((1.0 - lambda1) * (1.0 - lambda2)).sqrt();
    Ok((1.0 - Float::powi(base, n as i32)).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instrument::luders_binary;
    use crate::povm::StateVector;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn effect_a() -> HermitianOperator {
        HermitianOperator::from_real_diag(&[0.3, 0.7])
    }

    #[test]
    fn eigenstate_trajectories_are_bernoulli() {
        let inst = luders_binary(&effect_a(), &tol()).unwrap();
        let rho = DensityMatrix::from_pure(&StateVector::basis_state(2, 1));
        let batch = sample_trajectories(&inst, &rho, 200, 500, 42).unwrap();
        assert_eq!(batch.underflow_events(), 0);
        let freqs = batch.final_frequencies().unwrap();
        let mean: f64 = freqs.iter().sum::<f64>() / freqs.len() as f64;
        // X_200 has sd ~0.032; the mean of 500 trajectories sits within
        // a few thousandths of 0.7.
        assert!((mean - 0.7).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn zero_steps_gives_empty_rows() {
        let inst = luders_binary(&effect_a(), &tol()).unwrap();
        let rho = DensityMatrix::maximally_mixed(2);
        let batch = sample_trajectories(&inst, &rho, 0, 3, 7).unwrap();
        assert_eq!(batch.n_traj(), 3);
        assert_eq!(batch.outcome_indices(0).len(), 0);
        assert_eq!(batch.final_frequencies().unwrap(), vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn same_seed_reproduces_batch() {
        let inst = luders_binary(&effect_a(), &tol()).unwrap();
        let rho = DensityMatrix::maximally_mixed(2);
        let a = sample_trajectories(&inst, &rho, 50, 20, 9).unwrap();
        let b = sample_trajectories(&inst, &rho, 50, 20, 9).unwrap();
        assert_eq!(a.outcomes, b.outcomes);
        let c = sample_trajectories(&inst, &rho, 50, 20, 10).unwrap();
        assert_ne!(a.outcomes, c.outcomes);
    }

    #[test]
    fn histogram_single_bin_captures_everything() {
        let inst = luders_binary(&effect_a(), &tol()).unwrap();
        let rho = DensityMatrix::maximally_mixed(2);
        let batch = sample_trajectories(&inst, &rho, 20, 40, 3).unwrap();
        let hist = frequency_histogram(&batch, &[0.0, 1.0]).unwrap();
        assert_eq!(hist.masses, vec![1.0]);
    }

    #[test]
    fn histogram_concentrates_for_eigenstate() {
        let inst = luders_binary(&effect_a(), &tol()).unwrap();
        let rho = DensityMatrix::from_pure(&StateVector::basis_state(2, 1));
        let batch = sample_trajectories(&inst, &rho, 200, 400, 5).unwrap();
        let hist = frequency_histogram(&batch, &[0.0, 0.6, 0.8, 1.0]).unwrap();
        assert!(hist.masses[1] >= 0.99, "mass in [0.6, 0.8) was {}", hist.masses[1]);
        let total: f64 = hist.masses.iter().sum();
        assert!((total - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn per_step_outcome_law_is_bernoulli_for_eigenstates() {
        let inst = luders_binary(&effect_a(), &tol()).unwrap();
        let rho = DensityMatrix::from_pure(&StateVector::basis_state(2, 1));
        let n_traj = 500;
        let batch = sample_trajectories(&inst, &rho, 100, n_traj, 21).unwrap();
        // Across trajectories, every step is an independent draw with
        // success probability 0.7; allow four binomial standard deviations.
        let bound = 4.0 * (0.21f64 / n_traj as f64).sqrt();
        for step in [0usize, 49, 99] {
            let mean = (0..n_traj)
                .map(|traj| batch.outcome(traj, step).as_int().unwrap() as f64)
                .sum::<f64>()
                / n_traj as f64;
            assert!((mean - 0.7).abs() < bound, "step {step}: mean {mean}");
        }
    }

    #[test]
    fn mixed_state_frequencies_are_bimodal() {
        // An even mixture of the two eigenstates puts half the trajectories
        // on each Bernoulli branch.
        let inst = luders_binary(&effect_a(), &tol()).unwrap();
        let rho = DensityMatrix::maximally_mixed(2);
        let batch = sample_trajectories(&inst, &rho, 200, 1000, 17).unwrap();
        let hist = frequency_histogram(&batch, &[0.0, 0.45, 0.55, 1.0]).unwrap();
        assert!((hist.masses[0] - 0.5).abs() <= 0.05, "low mode {}", hist.masses[0]);
        assert!(hist.masses[1] <= 1e-9, "midpoint mass {}", hist.masses[1]);
        assert!((hist.masses[2] - 0.5).abs() <= 0.05, "high mode {}", hist.masses[2]);
    }

    #[test]
    fn histogram_rejects_unsorted_edges() {
        let inst = luders_binary(&effect_a(), &tol()).unwrap();
        let rho = DensityMatrix::maximally_mixed(2);
        let batch = sample_trajectories(&inst, &rho, 5, 5, 1).unwrap();
        assert!(frequency_histogram(&batch, &[0.0, 0.5, 0.5, 1.0]).is_err());
    }

    #[test]
    fn spectral_masses_for_eigenstate() {
        let inst = luders_binary(&effect_a(), &tol()).unwrap();
        let rho = DensityMatrix::from_pure(&StateVector::basis_state(2, 0));
        let batch = sample_trajectories(&inst, &rho, 200, 300, 11).unwrap();
        let masses = estimate_spectral_masses(&batch, &effect_a(), &tol()).unwrap();
        assert_eq!(masses.len(), 2);
        assert!((masses[0].0 - 0.3).abs() <= 1e-12);
        assert!((masses[0].1 - 1.0).abs() <= 1e-9);
        assert!(masses[1].1 <= 1e-9);
    }

    #[test]
    fn scalar_effect_has_single_atom_with_full_mass() {
        let a = HermitianOperator::identity(2).scale(0.5);
        let inst = luders_binary(&a, &tol()).unwrap();
        let rho = DensityMatrix::maximally_mixed(2);
        let batch = sample_trajectories(&inst, &rho, 50, 100, 2).unwrap();
        let masses = estimate_spectral_masses(&batch, &a, &tol()).unwrap();
        assert_eq!(masses.len(), 1);
        assert!((masses[0].1 - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn atoms_too_close_for_short_runs() {
        let a = HermitianOperator::from_real_diag(&[0.5, 0.55]);
        let inst = luders_binary(&a, &tol()).unwrap();
        let rho = DensityMatrix::maximally_mixed(2);
        let batch = sample_trajectories(&inst, &rho, 100, 10, 2).unwrap();
        // Gap 0.05 but 2/sqrt(100) = 0.2.
        assert!(matches!(
            estimate_spectral_masses(&batch, &a, &tol()),
            Err(Error::AtomsTooClose { .. })
        ));
    }

    fn bern(p: f64) -> BTreeMap<Label, f64> {
        let mut m = BTreeMap::new();
        m.insert(Label::int(0), 1.0 - p);
        m.insert(Label::int(1), p);
        m
    }

    #[test]
    fn hellinger_disjoint_supports() {
        let mut p = BTreeMap::new();
        p.insert(Label::int(0), 1.0);
        let mut q = BTreeMap::new();
        q.insert(Label::int(1), 1.0);
        assert_eq!(hellinger_sq(&p, &q).unwrap(), 1.0);
    }

    #[test]
    fn hellinger_identical_distributions() {
        let p = bern(0.4);
        assert!(hellinger_sq(&p, &p).unwrap() <= 1e-15);
    }

    #[test]
    fn hellinger_bernoulli_pair() {
        let expected = 1.0 - 2.0 * 0.21f64.sqrt();
        let h2 = hellinger_sq(&bern(0.3), &bern(0.7)).unwrap();
        assert!((h2 - expected).abs() <= 1e-12);
        assert!((h2 - 0.0834849).abs() <= 1e-6);
    }

    #[test]
    fn hellinger_rejects_unnormalized() {
        let mut p = bern(0.3);
        p.insert(Label::int(2), 0.5);
        assert!(matches!(
            hellinger_sq(&p, &bern(0.3)),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn closed_form_matches_hand_values() {
        let h1 = luders_hellinger_closed_form(0.3, 0.7, 1).unwrap();
        assert!((h1 - (1.0 - 2.0 * 0.21f64.sqrt())).abs() <= 1e-15);
        let h2 = luders_hellinger_closed_form(0.3, 0.7, 2).unwrap();
        assert!((h2 - 0.16).abs() <= 1e-12);
    }

    #[test]
    fn closed_form_zero_for_equal_eigenvalues() {
        for n in [1, 3, 8] {
            assert_eq!(luders_hellinger_closed_form(0.4, 0.4, n).unwrap(), 0.0);
        }
    }

    #[test]
    fn closed_form_rejects_out_of_range() {
        assert!(matches!(
            luders_hellinger_closed_form(-0.1, 0.5, 1),
            Err(Error::OutOfRange { .. })
        ));
        assert!(matches!(
            luders_hellinger_closed_form(0.5, 1.1, 1),
            Err(Error::OutOfRange { .. })
        ));
    }
}
