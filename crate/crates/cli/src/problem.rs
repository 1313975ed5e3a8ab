//! Problem-file schema (JSON, `"version": 1`) and conversion into domain
//! objects.
//!
//! A problem file describes one measurement object: a bare `effect` matrix, an
//! explicit `instrument` (labels plus Kraus matrices), an explicit `povm`
//! (labels plus effects), or a named `builder` with its parameters. Complex
//! scalars are `[re, im]` pairs; matrices are row-major arrays of rows.

use std::collections::BTreeMap;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use satrep_core::{
    eigh, ladder, luders_binary, mixture, preparative, spectral_measure_of_effect, Atom,
    Complex64, ComplexMatrix, DensityMatrix, HermitianOperator, Instrument, Label, Povm,
    StateVector, Tolerances,
};

pub type MatrixJson = Vec<Vec<(f64, f64)>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AtomJson {
    Int(i64),
    Real(f64),
    Text(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelJson {
    Int(i64),
    Real(f64),
    Text(String),
    Seq(Vec<AtomJson>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateJson {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vector: Option<Vec<(f64, f64)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density: Option<MatrixJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PovmOutcomeJson {
    pub label: LabelJson,
    pub effect: MatrixJson,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PovmJson {
    pub outcomes: Vec<PovmOutcomeJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstrumentOutcomeJson {
    pub label: LabelJson,
    pub kraus: Vec<MatrixJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstrumentJson {
    pub outcomes: Vec<InstrumentOutcomeJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreparedStateJson {
    pub label: LabelJson,
    pub state: StateJson,
}

/// Optional per-file tolerance overrides; unset fields keep their defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TolerancesJson {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub herm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psd: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eig: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cluster: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sum: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zero: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prop: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub feas: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<f64>,
}

impl TolerancesJson {
    pub fn apply(&self, base: Tolerances) -> Tolerances {
        Tolerances {
            herm: self.herm.unwrap_or(base.herm),
            psd: self.psd.unwrap_or(base.psd),
            eig: self.eig.unwrap_or(base.eig),
            cluster: self.cluster.unwrap_or(base.cluster),
            sum: self.sum.unwrap_or(base.sum),
            zero: self.zero.unwrap_or(base.zero),
            prop: self.prop.unwrap_or(base.prop),
            feas: self.feas.unwrap_or(base.feas),
            witness: self.witness.unwrap_or(base.witness),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub version: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub effect: Option<MatrixJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instrument: Option<InstrumentJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub povm: Option<PovmJson>,
    /// One of `luders`, `ladder`, `preparative`, `mixture`, `spectral`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub builder: Option<String>,
    /// Space dimension, used by the `ladder` builder.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    /// Mixing weight of the first component, used by the `mixture` builder.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first: Option<Box<ProblemFile>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub second: Option<Box<ProblemFile>>,
    /// Outcome-labeled states for the `preparative` builder.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prepared_states: Option<Vec<PreparedStateJson>>,
    /// Initial state for trajectory simulation.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state: Option<StateJson>,
    /// State pair for Hellinger tables.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_states: Option<Vec<StateJson>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<TolerancesJson>,
}

pub fn label_from_json(json: &LabelJson) -> Label {
    match json {
        LabelJson::Int(i) => Label::int(*i),
        LabelJson::Real(x) => Label::real(*x),
        LabelJson::Text(s) => Label::text(s.clone()),
        LabelJson::Seq(atoms) => Label::from_atoms(
            atoms
                .iter()
                .map(|a| match a {
                    AtomJson::Int(i) => Atom::Int(*i),
                    AtomJson::Real(x) => Atom::Real((*x).into()),
                    AtomJson::Text(s) => Atom::Text(s.clone()),
                })
                .collect(),
        ),
    }
}

pub fn label_to_json(label: &Label) -> LabelJson {
    let atom_to_json = |a: &Atom| match a {
        Atom::Int(i) => AtomJson::Int(*i),
        Atom::Real(x) => AtomJson::Real(x.0),
        Atom::Text(s) => AtomJson::Text(s.clone()),
    };
    match label.atoms() {
        [single] => match atom_to_json(single) {
            AtomJson::Int(i) => LabelJson::Int(i),
            AtomJson::Real(x) => LabelJson::Real(x),
            AtomJson::Text(s) => LabelJson::Text(s),
        },
        atoms => LabelJson::Seq(atoms.iter().map(atom_to_json).collect()),
    }
}

pub fn matrix_from_json(json: &MatrixJson) -> Result<ComplexMatrix> {
    let rows: Vec<Vec<Complex64>> = json
        .iter()
        .map(|row| row.iter().map(|&(re, im)| Complex64::new(re, im)).collect())
        .collect();
    ComplexMatrix::from_rows(&rows).map_err(|e| anyhow!("bad matrix: {e}"))
}

pub fn hermitian_from_json(json: &MatrixJson, tol: &Tolerances) -> Result<HermitianOperator> {
    let m = matrix_from_json(json)?;
    HermitianOperator::new(m, tol).map_err(|e| anyhow!("bad Hermitian matrix: {e}"))
}

fn state_vector_from_json(json: &StateJson) -> Result<StateVector> {
    match (&json.vector, &json.density) {
        (Some(v), None) => {
            let amps = v.iter().map(|&(re, im)| Complex64::new(re, im)).collect();
            StateVector::new(amps).map_err(|e| anyhow!("bad state vector: {e}"))
        }
        (None, Some(_)) => bail!("this context needs a pure state vector, not a density matrix"),
        _ => bail!("state must set exactly one of \"vector\" or \"density\""),
    }
}

fn density_from_json(json: &StateJson, tol: &Tolerances) -> Result<DensityMatrix> {
    match (&json.vector, &json.density) {
        (Some(_), None) => Ok(DensityMatrix::from_pure(&state_vector_from_json(json)?)),
        (None, Some(m)) => DensityMatrix::new(hermitian_from_json(m, tol)?, tol)
            .map_err(|e| anyhow!("bad density matrix: {e}")),
        _ => bail!("state must set exactly one of \"vector\" or \"density\""),
    }
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self> {
        let problem: ProblemFile = serde_json::from_str(text)?;
        if problem.version != 1 {
            bail!("unsupported problem version {} (expected 1)", problem.version);
        }
        Ok(problem)
    }

    /// Canonical serialization: parsing the output reproduces this value.
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schema serializes")
    }

    /// Tolerances embedded in the file, applied on top of `base`.
    pub fn tolerances(&self, base: Tolerances) -> Tolerances {
        match &self.tolerances {
            Some(overrides) => overrides.apply(base),
            None => base,
        }
    }

    /// The effect matrix when this problem is binary-measurement shaped
    /// (a bare `effect` or the `luders` builder); drives closed-form columns.
    pub fn luders_effect(&self) -> Option<&MatrixJson> {
        match self.builder.as_deref() {
            None if self.instrument.is_none() && self.povm.is_none() => self.effect.as_ref(),
            Some("luders") => self.effect.as_ref(),
            _ => None,
        }
    }

    /// Builds the instrument this problem describes.
    pub fn to_instrument(&self, tol: &Tolerances) -> Result<Instrument> {
        if let Some(given) = &self.instrument {
            let mut outcomes = Vec::with_capacity(given.outcomes.len());
            for outcome in &given.outcomes {
                let kraus: Result<Vec<ComplexMatrix>> =
                    outcome.kraus.iter().map(matrix_from_json).collect();
                outcomes.push((label_from_json(&outcome.label), kraus?));
            }
            return Instrument::new(outcomes).map_err(|e| anyhow!("bad instrument: {e}"));
        }
        match self.builder.as_deref() {
            None => {
                let effect = self
                    .effect
                    .as_ref()
                    .ok_or_else(|| anyhow!("problem defines no instrument; give \"effect\", \"instrument\", or \"builder\""))?;
                luders_binary(&hermitian_from_json(effect, tol)?, tol)
                    .map_err(|e| anyhow!("building binary measurement: {e}"))
            }
            Some("luders") => {
                let effect = self
                    .effect
                    .as_ref()
                    .ok_or_else(|| anyhow!("\"luders\" builder needs an \"effect\" matrix"))?;
                luders_binary(&hermitian_from_json(effect, tol)?, tol)
                    .map_err(|e| anyhow!("building binary measurement: {e}"))
            }
            Some("ladder") => {
                let dim = self.dim.ok_or_else(|| anyhow!("\"ladder\" builder needs \"dim\""))?;
                ladder(dim).map_err(|e| anyhow!("building ladder instrument: {e}"))
            }
            Some("preparative") => {
                let povm = self.povm_from_field(tol)?.ok_or_else(|| {
                    anyhow!("\"preparative\" builder needs a \"povm\" block")
                })?;
                let entries = self.prepared_states.as_ref().ok_or_else(|| {
                    anyhow!("\"preparative\" builder needs \"prepared_states\"")
                })?;
                let mut states: BTreeMap<Label, DensityMatrix> = BTreeMap::new();
                for entry in entries {
                    states.insert(
                        label_from_json(&entry.label),
                        density_from_json(&entry.state, tol)?,
                    );
                }
                preparative(&povm, &states, tol)
                    .map_err(|e| anyhow!("building preparative instrument: {e}"))
            }
            Some("mixture") => {
                let weight = self.t.ok_or_else(|| anyhow!("\"mixture\" builder needs \"t\""))?;
                let first = self
                    .first
                    .as_ref()
                    .ok_or_else(|| anyhow!("\"mixture\" builder needs \"first\""))?
                    .to_instrument(tol)
                    .context("first mixture component")?;
                let second = self
                    .second
                    .as_ref()
                    .ok_or_else(|| anyhow!("\"mixture\" builder needs \"second\""))?
                    .to_instrument(tol)
                    .context("second mixture component")?;
                mixture(&first, &second, weight).map_err(|e| anyhow!("building mixture: {e}"))
            }
            Some("spectral") => bail!("\"spectral\" builds an observable, not an instrument"),
            Some(other) => bail!("unknown builder {other:?}"),
        }
    }

    fn povm_from_field(&self, tol: &Tolerances) -> Result<Option<Povm>> {
        let Some(given) = &self.povm else {
            return Ok(None);
        };
        let mut outcomes = Vec::with_capacity(given.outcomes.len());
        for outcome in &given.outcomes {
            outcomes.push((
                label_from_json(&outcome.label),
                hermitian_from_json(&outcome.effect, tol)?,
            ));
        }
        Povm::with_tolerances(outcomes, tol)
            .map(Some)
            .map_err(|e| anyhow!("bad observable: {e}"))
    }

    /// Builds the observable this problem describes. Bare effects become the
    /// two-outcome observable `{1-A, A}`; instrument-shaped problems
    /// contribute the observable they measure.
    pub fn to_povm(&self, tol: &Tolerances) -> Result<Povm> {
        if let Some(povm) = self.povm_from_field(tol)? {
            return Ok(povm);
        }
        if self.builder.as_deref() == Some("spectral") {
            let effect = self
                .effect
                .as_ref()
                .ok_or_else(|| anyhow!("\"spectral\" builder needs an \"effect\" matrix"))?;
            return spectral_measure_of_effect(&hermitian_from_json(effect, tol)?, tol)
                .map_err(|e| anyhow!("building spectral measure: {e}"));
        }
        if self.builder.is_none() && self.instrument.is_none() {
            if let Some(effect) = &self.effect {
                return Povm::binary_from_effect(&hermitian_from_json(effect, tol)?, tol)
                    .map_err(|e| anyhow!("building binary observable: {e}"));
            }
        }
        Ok(self.to_instrument(tol)?.derived_observable())
    }

    /// Initial state for simulation: the file's `state` if present, otherwise
    /// the maximally mixed state.
    pub fn initial_state(&self, dim: usize, tol: &Tolerances) -> Result<DensityMatrix> {
        match &self.state {
            Some(json) => {
                let rho = density_from_json(json, tol)?;
                if rho.dim() != dim {
                    bail!("initial state has dimension {}, instrument has {dim}", rho.dim());
                }
                Ok(rho)
            }
            None => Ok(DensityMatrix::maximally_mixed(dim)),
        }
    }

    /// State pair for Hellinger tables: explicit `witness_states`, or for
    /// effect-shaped problems the eigenvectors of the smallest and largest
    /// eigenvalue.
    pub fn witness_pair(&self, tol: &Tolerances) -> Result<(StateVector, StateVector)> {
        if let Some(states) = &self.witness_states {
            if states.len() != 2 {
                bail!("\"witness_states\" must list exactly two states");
            }
            return Ok((state_vector_from_json(&states[0])?, state_vector_from_json(&states[1])?));
        }
        let Some(effect) = self.effect.as_ref() else {
            bail!("no \"witness_states\" given and the problem has no \"effect\" to derive them from");
        };
        let eigen = eigh(&hermitian_from_json(effect, tol)?)
            .map_err(|e| anyhow!("eigendecomposition failed: {e}"))?;
        let dim = eigen.eigenvalues.len();
        let low = StateVector::new(eigen.eigenvector(0))
            .map_err(|e| anyhow!("bad eigenvector: {e}"))?;
        let high = StateVector::new(eigen.eigenvector(dim - 1))
            .map_err(|e| anyhow!("bad eigenvector: {e}"))?;
        Ok((low, high))
    }
}
