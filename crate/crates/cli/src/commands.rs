//! The four commands: saturation, preorder, simulate, hellinger.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use serde_json::{json, Value};

use satrep_core::{
    frequency_histogram, hellinger_sq, luders_hellinger_closed_form, preceq, sample_trajectories,
    saturation_step, uniform_edges, Complex64, SaturationVerdict, StateVector,
    Tolerances,
};

use crate::problem::{hermitian_from_json, ProblemFile, TolerancesJson};
use crate::report::{
    certificate_json, emit, histogram_json, saturation_json, tolerances_json,
};

/// Exit status: 0 for an affirmative decision, 2 for a negative one.
pub enum Outcome {
    Affirmative,
    Negative,
}

impl Outcome {
    pub fn code(&self) -> i32 {
        match self {
            Outcome::Affirmative => 0,
            Outcome::Negative => 2,
        }
    }
}

pub fn load_problem(path: &Path) -> Result<ProblemFile> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading problem file {}", path.display()))?;
    ProblemFile::parse(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Resolves tolerances: defaults, then the problem file's overrides, then the
/// `--tol-file` overrides.
pub fn resolve_tolerances(
    problems: &[&ProblemFile],
    tol_file: Option<&PathBuf>,
) -> Result<Tolerances> {
    let mut tol = Tolerances::default();
    for problem in problems {
        tol = problem.tolerances(tol);
    }
    if let Some(path) = tol_file {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading tolerance file {}", path.display()))?;
        let overrides: TolerancesJson = serde_json::from_str(&text)
            .with_context(|| format!("parsing {}", path.display()))?;
        tol = overrides.apply(tol);
    }
    Ok(tol)
}

pub struct SaturationArgs {
    pub problem: PathBuf,
    pub n_max: usize,
    pub enum_cap: usize,
    pub tol_file: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

pub fn cmd_saturation(args: &SaturationArgs) -> Result<Outcome> {
    let started = Instant::now();
    let problem = load_problem(&args.problem)?;
    let tol = resolve_tolerances(&[&problem], args.tol_file.as_ref())?;
    let instrument = problem.to_instrument(&tol)?;
    let report = saturation_step(&instrument, args.n_max, args.enum_cap, &tol)
        .map_err(|e| anyhow!("saturation search failed: {e}"))?;
    let outcome = match report.verdict {
        SaturationVerdict::Finite(_) => Outcome::Affirmative,
        SaturationVerdict::ExceededCap(_) => Outcome::Negative,
    };
    let config = json!({
        "problem": serde_json::from_str::<Value>(&problem.to_canonical_json())?,
        "n_max": args.n_max,
        "enum_cap": args.enum_cap,
        "tolerances": tolerances_json(&tol),
    });
    emit("saturation", config, saturation_json(&report), started, args.out.as_deref())?;
    Ok(outcome)
}

pub struct PreorderArgs {
    pub problem_a: PathBuf,
    pub problem_b: PathBuf,
    pub tol_file: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

pub fn cmd_preorder(args: &PreorderArgs) -> Result<Outcome> {
    let started = Instant::now();
    let problem_a = load_problem(&args.problem_a)?;
    let problem_b = load_problem(&args.problem_b)?;
    let tol = resolve_tolerances(&[&problem_a, &problem_b], args.tol_file.as_ref())?;
    let a = problem_a.to_povm(&tol).context("left observable")?;
    let b = problem_b.to_povm(&tol).context("right observable")?;
    let certificate = preceq(&a, &b, &tol).map_err(|e| anyhow!("preorder decision failed: {e}"))?;
    let outcome =
        if certificate.holds() { Outcome::Affirmative } else { Outcome::Negative };
    let config = json!({
        "problem_a": serde_json::from_str::<Value>(&problem_a.to_canonical_json())?,
        "problem_b": serde_json::from_str::<Value>(&problem_b.to_canonical_json())?,
        "tolerances": tolerances_json(&tol),
    });
    emit("preorder", config, certificate_json(&certificate), started, args.out.as_deref())?;
    Ok(outcome)
}

pub struct SimulateArgs {
    pub problem: PathBuf,
    pub seed: u64,
    pub n_steps: usize,
    pub n_traj: usize,
    pub bins: usize,
    pub tol_file: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<Outcome> {
    let started = Instant::now();
    let problem = load_problem(&args.problem)?;
    let tol = resolve_tolerances(&[&problem], args.tol_file.as_ref())?;
    let instrument = problem.to_instrument(&tol)?;
    let initial = problem.initial_state(instrument.dim(), &tol)?;
    let batch = sample_trajectories(&instrument, &initial, args.n_steps, args.n_traj, args.seed)
        .map_err(|e| anyhow!("sampling failed: {e}"))?;
    if batch.underflow_events() > 0 {
        eprintln!(
            "warning: {} state update(s) hit the trace underflow threshold and were renormalized",
            batch.underflow_events()
        );
    }
    let histogram = frequency_histogram(&batch, &uniform_edges(args.bins))
        .map_err(|e| anyhow!("frequency histogram failed: {e}"))?;
    if let Some(path) = &args.csv {
        let frequencies = batch.final_frequencies().map_err(|e| anyhow!("{e}"))?;
        let mut csv = String::from("trajectory,frequency\n");
        for (i, f) in frequencies.iter().enumerate() {
            csv.push_str(&format!("{i},{f}\n"));
        }
        fs::write(path, csv.as_bytes())
            .with_context(|| format!("writing CSV to {}", path.display()))?;
    }
    let config = json!({
        "problem": serde_json::from_str::<Value>(&problem.to_canonical_json())?,
        "seed": args.seed,
        "n_steps": args.n_steps,
        "n_traj": args.n_traj,
        "bins": args.bins,
        "tolerances": tolerances_json(&tol),
    });
    let result = json!({
        "histogram": histogram_json(&histogram),
        "underflow_events": batch.underflow_events(),
    });
    emit("simulate", config, result, started, args.out.as_deref())?;
    Ok(Outcome::Affirmative)
}

pub struct HellingerArgs {
    pub problem: PathBuf,
    pub n_max: usize,
    pub enum_cap: usize,
    pub tol_file: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

pub fn cmd_hellinger(args: &HellingerArgs) -> Result<Outcome> {
    let started = Instant::now();
    let problem = load_problem(&args.problem)?;
    let tol = resolve_tolerances(&[&problem], args.tol_file.as_ref())?;
    let instrument = problem.to_instrument(&tol)?;
    let (psi1, psi2) = problem.witness_pair(&tol)?;
    if psi1.dim() != instrument.dim() || psi2.dim() != instrument.dim() {
        bail!("witness states must match the instrument dimension {}", instrument.dim());
    }

    // Closed-form column applies when the instrument is the binary
    // measurement of an effect and both states are its eigenvectors.
    let closed_form_eigenvalues: Option<(f64, f64)> = match problem.luders_effect() {
        Some(matrix) => {
            let effect = hermitian_from_json(matrix, &tol)?;
            let eigenvalue_of = |psi: &StateVector| -> Option<f64> {
                let lambda = effect.matrix().expectation(psi.amplitudes()).re;
                let image = effect.matrix().mul_vec(psi.amplitudes());
                let residual = image
                    .iter()
                    .zip(psi.amplitudes())
                    .map(|(got, amp)| (got - amp * lambda).norm())
                    .fold(0.0f64, f64::max);
                (residual <= 1e-8).then_some(lambda)
            };
            match (eigenvalue_of(&psi1), eigenvalue_of(&psi2)) {
                (Some(l1), Some(l2)) => Some((l1, l2)),
                _ => None,
            }
        }
        None => None,
    };

    let mut rows = Vec::with_capacity(args.n_max);
    for n in 1..=args.n_max {
        let observable = instrument
            .repeated_observable(n, args.enum_cap)
            .map_err(|e| anyhow!("enumerating level {n}: {e}"))?;
        let enumerated = hellinger_sq(
            &observable.outcome_distribution(&psi1).map_err(|e| anyhow!("{e}"))?,
            &observable.outcome_distribution(&psi2).map_err(|e| anyhow!("{e}"))?,
        )
        .map_err(|e| anyhow!("{e}"))?;
        let closed_form = match closed_form_eigenvalues {
            Some((l1, l2)) => Some(
                luders_hellinger_closed_form(l1, l2, n as u32).map_err(|e| anyhow!("{e}"))?,
            ),
            None => None,
        };
        rows.push(json!({
            "n": n,
            "enumerated": enumerated,
            "closed_form": closed_form,
        }));
    }

    let state_json = |psi: &StateVector| -> Vec<(f64, f64)> {
        psi.amplitudes().iter().map(|z: &Complex64| (z.re, z.im)).collect()
    };
    let config = json!({
        "problem": serde_json::from_str::<Value>(&problem.to_canonical_json())?,
        "n_max": args.n_max,
        "enum_cap": args.enum_cap,
        "tolerances": tolerances_json(&tol),
        "states": [state_json(&psi1), state_json(&psi2)],
    });
    emit("hellinger", config, json!({ "rows": rows }), started, args.out.as_deref())?;
    Ok(Outcome::Affirmative)
}
