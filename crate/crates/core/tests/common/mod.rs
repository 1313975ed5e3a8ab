//! Seeded random generators shared by the integration suites. Everything is
//! deterministic in the seed; no ambient entropy.

#![allow(dead_code)]

use std::collections::BTreeMap;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use satrep_core::{
    eigh, Complex64, ComplexMatrix, DensityMatrix, HermitianOperator, Label, MarkovKernel, Povm,
    StateVector, Tolerances,
};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Standard normal via Box-Muller.
pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1 = uniform(rng).max(1e-300);
    let u2 = uniform(rng);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn complex_normal(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(normal(rng), normal(rng))
}

pub fn random_matrix(dim: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let rows: Vec<Vec<Complex64>> =
        (0..dim).map(|_| (0..dim).map(|_| complex_normal(rng)).collect()).collect();
    ComplexMatrix::from_rows(&rows).expect("square finite rows")
}

pub fn random_hermitian(dim: usize, rng: &mut ChaCha8Rng) -> HermitianOperator {
    let g = random_matrix(dim, rng);
    let sym = &g + &g.adjoint();
    HermitianOperator::from_matrix(sym.scale(0.5)).expect("symmetrized")
}

/// Random PSD matrix `G†G`, scaled to keep entries order one.
pub fn random_psd(dim: usize, rng: &mut ChaCha8Rng) -> HermitianOperator {
    let g = random_matrix(dim, rng);
    HermitianOperator::from_matrix(g.adjoint().mul(&g).scale(1.0 / dim as f64))
        .expect("Gram matrix")
}

/// Random effect with eigenvalues drawn uniformly from `[0, 1]`.
pub fn random_effect(dim: usize, rng: &mut ChaCha8Rng) -> HermitianOperator {
    let basis = eigh(&random_hermitian(dim, rng)).expect("eigenbasis");
    let values: Vec<f64> = (0..dim).map(|_| uniform(rng)).collect();
    let mut index = 0;
    basis.map_eigenvalues(|_| {
        let v = values[index % values.len()];
        index += 1;
        v
    })
}

pub fn random_state(dim: usize, rng: &mut ChaCha8Rng) -> StateVector {
    let amplitudes: Vec<Complex64> = (0..dim).map(|_| complex_normal(rng)).collect();
    StateVector::normalized(amplitudes).expect("nonzero Gaussian vector")
}

pub fn random_density(dim: usize, rng: &mut ChaCha8Rng) -> DensityMatrix {
    let psd = random_psd(dim, rng);
    let scaled = psd.scale(1.0 / psd.trace());
    DensityMatrix::new(scaled, &Tolerances::default()).expect("normalized PSD")
}

pub fn random_rank1_projection(dim: usize, rng: &mut ChaCha8Rng) -> HermitianOperator {
    let psi = random_state(dim, rng);
    HermitianOperator::from_matrix(ComplexMatrix::outer(psi.amplitudes(), psi.amplitudes()))
        .expect("outer product")
}

/// Random observable: Gram terms conjugated by the inverse square root of
/// their sum, so the effects are PSD and complete by construction.
pub fn random_povm(dim: usize, n_outcomes: usize, rng: &mut ChaCha8Rng) -> Povm {
    assert!(n_outcomes >= 1);
    let terms: Vec<HermitianOperator> =
        (0..n_outcomes).map(|_| random_psd(dim, rng)).collect();
    let mut sum = terms[0].clone();
    for t in &terms[1..] {
        sum = sum.add(t);
    }
    let eigen = eigh(&sum).expect("sum of Gram matrices");
    assert!(
        eigen.min_eigenvalue() > 1e-6,
        "degenerate normalization for this seed: {}",
        eigen.min_eigenvalue()
    );
    let inv_sqrt = eigen.map_eigenvalues(|x| 1.0 / x.sqrt());
    let outcomes = terms
        .into_iter()
        .enumerate()
        .map(|(i, t)| {
            let conj = inv_sqrt.matrix().mul(&t.matrix().mul(inv_sqrt.matrix()));
            let sym = (&conj + &conj.adjoint()).scale(0.5);
            let effect = HermitianOperator::from_matrix(sym).expect("conjugated PSD");
            (Label::int(i as i64), effect)
        })
        .collect();
    Povm::new(outcomes).expect("complete by construction")
}

/// Random column-stochastic kernel.
pub fn random_kernel(
    target_labels: Vec<Label>,
    source_labels: Vec<Label>,
    rng: &mut ChaCha8Rng,
) -> MarkovKernel {
    let t = target_labels.len();
    let s = source_labels.len();
    let mut entries = vec![0.0; t * s];
    for j in 0..s {
        let column: Vec<f64> = (0..t).map(|_| uniform(rng) + 1e-9).collect();
        let total: f64 = column.iter().sum();
        for i in 0..t {
            entries[i * s + j] = column[i] / total;
        }
    }
    MarkovKernel::new(target_labels, source_labels, entries).expect("stochastic by construction")
}

pub fn int_labels(n: usize) -> Vec<Label> {
    (0..n).map(|i| Label::int(i as i64)).collect()
}

pub fn density_map(
    povm: &Povm,
    rng: &mut ChaCha8Rng,
) -> BTreeMap<Label, DensityMatrix> {
    povm.labels().map(|l| (l.clone(), random_density(povm.dim(), rng))).collect()
}
