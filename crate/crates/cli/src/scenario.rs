//! JSON scenario files.
//!
//! A scenario names a model, an object state, an observable pair and value
//! maps. Complex numbers are `[re, im]` pairs and matrices are arrays of
//! rows. Unknown keys are rejected.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "id": "plus-y-90",
//!   "model": { "family": "sigma_phi", "phi_degrees": 90.0 },
//!   "state": "+y",
//!   "observables": { "x0": "X", "y0": "Y" },
//!   "value_map": "identity",
//!   "tolerance": 1e-9,
//!   "seed": 0
//! }
//! ```

use std::fmt;

use qmeas_core::{
    named_matrix, named_state, ComplexMatrix, Configuration, HermitianObservable, ModelSpec, PureState, RelationId,
    ValueMap, Witness, C64, DEFAULT_TOL,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

pub type Complex = [f64; 2];
pub type MatrixRows = Vec<Vec<Complex>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub model: ModelFile,
    pub state: StateFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observables: Option<ObservablesFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value_map: Option<ValueMapFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value_map_xt: Option<ValueMapFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Default relation for `check`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relation: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelFamily {
    SigmaPhi,
    Shift,
    Explicit,
}

/// Model section. `sigma_phi` takes `phi_degrees`; `shift` takes `probe_dim`
/// and `probe_state`; `explicit` takes every field except `phi_degrees`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub family: ModelFamily,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_degrees: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub object_dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe_dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unitary: Option<MatrixRows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe_state: Option<Vec<Complex>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meter: Option<MatrixRows>,
}

impl ModelFile {
    fn empty(family: ModelFamily) -> Self {
        Self { family, phi_degrees: None, object_dim: None, probe_dim: None, unitary: None, probe_state: None, meter: None }
    }

    fn present(&self) -> [(&'static str, bool); 6] {
        [
            ("model.phi_degrees", self.phi_degrees.is_some()),
            ("model.object_dim", self.object_dim.is_some()),
            ("model.probe_dim", self.probe_dim.is_some()),
            ("model.unitary", self.unitary.is_some()),
            ("model.probe_state", self.probe_state.is_some()),
            ("model.meter", self.meter.is_some()),
        ]
    }
}

fn required<'a, T>(v: &'a Option<T>, field: &'static str) -> Result<&'a T, ScenarioError> {
    v.as_ref().ok_or(ScenarioError::Field { field, message: "missing field".into() })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateFile {
    Named(String),
    Amplitudes(Vec<Complex>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservablesFile {
    pub x0: ObservableFile,
    pub y0: ObservableFile,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ObservableFile {
    Named(String),
    Matrix(MatrixRows),
}

/// A single map (`"scale:100"`, or `>`-chained) or a list applied in order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ValueMapFile {
    One(String),
    Chain(Vec<String>),
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },

    #[error("schema violation at `{path}` (line {line}, column {column}): {message}")]
    Schema { path: String, line: usize, column: usize, message: String },

    #[error("invalid `{field}`: {source}")]
    Invalid {
        field: &'static str,
        #[source]
        source: qmeas_core::Error,
    },

    #[error("invalid `{field}`: {message}")]
    Field { field: &'static str, message: String },
}

/// A validated scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub id: String,
    pub witness: Witness,
    pub tolerance: f64,
    pub seed: u64,
    pub relation: Option<RelationId>,
}

impl Scenario {
    pub fn configuration(&self) -> qmeas_core::Result<Configuration> {
        self.witness.build()
    }

    pub fn family(&self) -> &'static str {
        self.witness.model.family_name()
    }

    /// The family's natural parameter, if it has one.
    pub fn family_parameter(&self) -> Option<(&'static str, f64)> {
        match &self.witness.model {
            ModelSpec::SigmaPhi { phi_degrees } => Some(("phi_degrees", *phi_degrees)),
            ModelSpec::Shift { probe_dim, .. } => Some(("probe_dim", *probe_dim as f64)),
            ModelSpec::Explicit { .. } => None,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.id, self.family())
    }
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let file: ScenarioFile = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        classify(inner, path)
    })?;
    de.end().map_err(|e| classify(e, String::new()))?;
    validate(file)
}

fn classify(e: serde_json::Error, path: String) -> ScenarioError {
    use serde_json::error::Category;
    let (line, column) = (e.line(), e.column());
    match e.classify() {
        Category::Data => ScenarioError::Schema { path, line, column, message: e.to_string() },
        _ => ScenarioError::Syntax { line, column, message: e.to_string() },
    }
}

fn complex(v: &[Complex]) -> Vec<C64> {
    v.iter().map(|[re, im]| C64::new(*re, *im)).collect()
}

fn matrix(rows: &MatrixRows, field: &'static str) -> Result<ComplexMatrix, ScenarioError> {
    let rows: Vec<Vec<C64>> = rows.iter().map(|r| complex(r)).collect();
    ComplexMatrix::from_rows(&rows).map_err(|source| ScenarioError::Invalid { field, source })
}

fn finite(value: f64, field: &'static str) -> Result<f64, ScenarioError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(ScenarioError::Field { field, message: format!("expected a finite number, found {value}") })
    }
}

fn value_map(spec: &ValueMapFile, field: &'static str) -> Result<ValueMap, ScenarioError> {
    let parsed = match spec {
        ValueMapFile::One(s) => s.parse(),
        ValueMapFile::Chain(names) => ValueMap::from_names(names),
    };
    parsed.map_err(|source| ScenarioError::Invalid { field, source })
}

fn observable(spec: &ObservableFile, field: &'static str) -> Result<ComplexMatrix, ScenarioError> {
    let m = match spec {
        ObservableFile::Named(name) => named_matrix(name)
            .ok_or_else(|| ScenarioError::Field { field, message: format!("unknown observable name `{name}`") })?,
        ObservableFile::Matrix(rows) => matrix(rows, field)?,
    };
    HermitianObservable::new(m.clone()).map_err(|source| ScenarioError::Invalid { field, source })?;
    Ok(m)
}

fn model_spec(m: &ModelFile) -> Result<ModelSpec, ScenarioError> {
    let allowed: &[&str] = match m.family {
        ModelFamily::SigmaPhi => &["model.phi_degrees"],
        ModelFamily::Shift => &["model.probe_dim", "model.probe_state"],
        ModelFamily::Explicit => &["model.object_dim", "model.probe_dim", "model.unitary", "model.probe_state", "model.meter"],
    };
    if let Some((field, _)) = m.present().into_iter().find(|(f, set)| *set && !allowed.contains(f)) {
        return Err(ScenarioError::Field { field, message: format!("not a parameter of the {:?} family", m.family) });
    }
    let probe_state = |field| -> Result<Vec<C64>, ScenarioError> {
        let amps = complex(required(&m.probe_state, field)?);
        PureState::new(amps.clone()).map_err(|source| ScenarioError::Invalid { field, source })?;
        Ok(amps)
    };
    Ok(match m.family {
        ModelFamily::SigmaPhi => {
            ModelSpec::SigmaPhi { phi_degrees: finite(*required(&m.phi_degrees, "model.phi_degrees")?, "model.phi_degrees")? }
        }
        ModelFamily::Shift => ModelSpec::Shift {
            probe_dim: *required(&m.probe_dim, "model.probe_dim")?,
            probe_state: probe_state("model.probe_state")?,
        },
        ModelFamily::Explicit => {
            let unitary = matrix(required(&m.unitary, "model.unitary")?, "model.unitary")?;
            let deviation = unitary.unitarity_defect();
            if deviation > qmeas_core::model::UNITARY_TOL {
                return Err(ScenarioError::Invalid {
                    field: "model.unitary",
                    source: qmeas_core::Error::NotUnitary { deviation },
                });
            }
            let meter = matrix(required(&m.meter, "model.meter")?, "model.meter")?;
            HermitianObservable::new(meter.clone())
                .map_err(|source| ScenarioError::Invalid { field: "model.meter", source })?;
            ModelSpec::Explicit {
                object_dim: *required(&m.object_dim, "model.object_dim")?,
                probe_dim: *required(&m.probe_dim, "model.probe_dim")?,
                unitary,
                probe_state: probe_state("model.probe_state")?,
                meter,
            }
        }
    })
}

fn validate(file: ScenarioFile) -> Result<Scenario, ScenarioError> {
    if file.schema_version != SCHEMA_VERSION {
        return Err(ScenarioError::Field {
            field: "schema_version",
            message: format!("unsupported version {} (expected {SCHEMA_VERSION})", file.schema_version),
        });
    }
    let model = model_spec(&file.model)?;

    let state = match &file.state {
        StateFile::Named(name) => named_state(name)
            .ok_or_else(|| ScenarioError::Field { field: "state", message: format!("unknown state name `{name}`") })?
            .amplitudes()
            .to_vec(),
        StateFile::Amplitudes(a) => {
            let amps = complex(a);
            PureState::new(amps.clone()).map_err(|source| ScenarioError::Invalid { field: "state", source })?;
            amps
        }
    };

    let (x0, y0) = match &file.observables {
        Some(obs) => (observable(&obs.x0, "observables.x0")?, observable(&obs.y0, "observables.y0")?),
        None => (qmeas_core::sigma_x(), qmeas_core::sigma_y()),
    };
    if x0.dim() != y0.dim() {
        return Err(ScenarioError::Invalid {
            field: "observables.y0",
            source: qmeas_core::Error::DimensionMismatch { expected: x0.dim(), found: y0.dim() },
        });
    }

    let default_model = model
        .build(&HermitianObservable::new(x0.clone()).expect("validated above"))
        .map_err(|source| ScenarioError::Invalid { field: "model", source })?;
    let value_map_x0 = match &file.value_map {
        Some(v) => value_map(v, "value_map")?,
        None => default_model.value_map_x0().clone(),
    };
    let value_map_xt = file.value_map_xt.as_ref().map(|v| value_map(v, "value_map_xt")).transpose()?;

    let tolerance = finite(file.tolerance.unwrap_or(DEFAULT_TOL), "tolerance")?;
    if tolerance < 0.0 {
        return Err(ScenarioError::Field { field: "tolerance", message: "must be non-negative".into() });
    }
    let relation = file
        .relation
        .as_deref()
        .map(str::parse::<RelationId>)
        .transpose()
        .map_err(|source| ScenarioError::Invalid { field: "relation", source })?;

    let witness = Witness { model, state, x0, y0, value_map_x0, value_map_xt };
    witness.build().map_err(|source| ScenarioError::Invalid { field: "state", source })?;
    Ok(Scenario {
        id: file.id.unwrap_or_else(|| "scenario".to_string()),
        witness,
        tolerance,
        seed: file.seed.unwrap_or(0),
        relation,
    })
}

fn pairs(v: &[C64]) -> Vec<Complex> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

fn rows(m: &ComplexMatrix) -> MatrixRows {
    m.rows().iter().map(|r| pairs(r)).collect()
}

/// Scenario file that rebuilds `witness` exactly.
pub fn scenario_file(
    id: &str,
    witness: &Witness,
    tolerance: f64,
    seed: u64,
    relation: Option<RelationId>,
) -> ScenarioFile {
    let model = match &witness.model {
        ModelSpec::SigmaPhi { phi_degrees } => {
            ModelFile { phi_degrees: Some(*phi_degrees), ..ModelFile::empty(ModelFamily::SigmaPhi) }
        }
        ModelSpec::Shift { probe_dim, probe_state } => ModelFile {
            probe_dim: Some(*probe_dim),
            probe_state: Some(pairs(probe_state)),
            ..ModelFile::empty(ModelFamily::Shift)
        },
        ModelSpec::Explicit { object_dim, probe_dim, unitary, probe_state, meter } => ModelFile {
            family: ModelFamily::Explicit,
            phi_degrees: None,
            object_dim: Some(*object_dim),
            probe_dim: Some(*probe_dim),
            unitary: Some(rows(unitary)),
            probe_state: Some(pairs(probe_state)),
            meter: Some(rows(meter)),
        },
    };
    ScenarioFile {
        schema_version: SCHEMA_VERSION,
        id: Some(id.to_string()),
        model,
        state: StateFile::Amplitudes(pairs(&witness.state)),
        observables: Some(ObservablesFile {
            x0: ObservableFile::Matrix(rows(&witness.x0)),
            y0: ObservableFile::Matrix(rows(&witness.y0)),
        }),
        value_map: Some(ValueMapFile::One(witness.value_map_x0.to_string())),
        value_map_xt: witness.value_map_xt.as_ref().map(|m| ValueMapFile::One(m.to_string())),
        tolerance: Some(tolerance),
        seed: Some(seed),
        relation: relation.map(|r| r.name().to_string()),
    }
}

pub fn to_json(file: &ScenarioFile) -> String {
    let mut s = serde_json::to_string_pretty(file).expect("scenario files contain only finite numbers");
    s.push('\n');
    s
}
