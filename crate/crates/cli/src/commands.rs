use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use qmeas_core::search::CERTIFY_TOL;
use qmeas_core::{
    certify, check, search_min_slack, Family, ModelSpec, ObservablePair, RelationId, SearchResult, SearchSpace,
    ValueMap, C64,
};
use serde::Serialize;

use crate::error::CliError;
use crate::report::{num, write_csv, write_json_lines, write_rows, Format, ReportRow};
use crate::scenario::{parse_scenario, scenario_file, to_json, Scenario};

pub const CHECK_VERSION: &str = "# qmeas-check v1";
pub const SEARCH_VERSION: &str = "# qmeas-search v1";

pub fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read scenario `{}`: {e}", path.display())))?;
    parse_scenario(&text).map_err(|source| CliError::Scenario { path: path.display().to_string(), source })
}

fn scenario_row(s: &Scenario, param: Option<(&str, f64)>) -> Result<ReportRow, CliError> {
    let cfg = s.configuration()?;
    Ok(ReportRow::evaluate(&s.id, s.family(), param.or(s.family_parameter()), &cfg, s.tolerance)?)
}

pub fn cmd_metrics<W: Write>(paths: &[PathBuf], format: Format, out: &mut W) -> Result<(), CliError> {
    let mut rows = Vec::with_capacity(paths.len());
    for path in paths {
        rows.push(scenario_row(&load_scenario(path)?, None)?);
    }
    write_rows(out, &rows, format)?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepParam {
    PhiDegrees,
    /// Factor composed after the scenario's `(x_0)_m` value map.
    Scale,
}

impl std::str::FromStr for SweepParam {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "phi_degrees" => Ok(SweepParam::PhiDegrees),
            "scale" => Ok(SweepParam::Scale),
            other => Err(format!("unknown sweep parameter `{other}` (expected phi_degrees or scale)")),
        }
    }
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::PhiDegrees => "phi_degrees",
            SweepParam::Scale => "scale",
        }
    }
}

/// Comma-separated reals; the empty string is the empty grid.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, String> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|t| {
            let t = t.trim();
            match t.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(format!("invalid grid value `{t}`")),
            }
        })
        .collect()
}

pub fn sweep_scenario(s: &Scenario, param: SweepParam, value: f64) -> Result<Scenario, CliError> {
    let mut s = s.clone();
    match param {
        SweepParam::PhiDegrees => match &mut s.witness.model {
            ModelSpec::SigmaPhi { phi_degrees } => *phi_degrees = value,
            other => {
                return Err(CliError::Usage(format!(
                    "parameter phi_degrees does not exist in the {} family",
                    other.family_name()
                )))
            }
        },
        SweepParam::Scale => {
            let w = &mut s.witness;
            let xt = w.value_map_xt.clone().unwrap_or_else(|| w.value_map_x0.clone());
            w.value_map_x0 = w.value_map_x0.then(ValueMap::Scale(value));
            w.value_map_xt = Some(xt);
        }
    }
    Ok(s)
}

pub fn cmd_sweep<W: Write>(
    path: &Path,
    param: SweepParam,
    grid: &[f64],
    format: Format,
    out: &mut W,
) -> Result<(), CliError> {
    let base = load_scenario(path)?;
    let mut rows = Vec::with_capacity(grid.len());
    for &value in grid {
        let s = sweep_scenario(&base, param, value)?;
        rows.push(scenario_row(&s, Some((param.name(), value)))?);
    }
    write_rows(out, &rows, format)?;
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckRow {
    pub scenario_id: String,
    pub relation: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub holds: bool,
    pub tol: f64,
    pub guaranteed: bool,
}

const CHECK_COLUMNS: [&str; 8] = ["scenario_id", "relation", "lhs", "rhs", "slack", "holds", "tol", "guaranteed"];

/// Checks one relation (the argument, else the scenario's own), or every relation.
pub fn cmd_check<W: Write>(
    path: &Path,
    relation: Option<RelationId>,
    format: Format,
    out: &mut W,
) -> Result<(), CliError> {
    let s = load_scenario(path)?;
    let cfg = s.configuration()?;
    let ids: Vec<RelationId> = match relation.or(s.relation) {
        Some(r) => vec![r],
        None => RelationId::ALL.to_vec(),
    };
    let mut rows = Vec::new();
    for id in ids {
        let v = check(id, &cfg, s.tolerance)?;
        rows.push(CheckRow {
            scenario_id: s.id.clone(),
            relation: id.name(),
            lhs: v.lhs,
            rhs: v.rhs,
            slack: v.slack,
            holds: v.holds,
            tol: v.tol,
            guaranteed: v.guaranteed,
        });
    }
    match format {
        Format::Csv => {
            let records: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.scenario_id.clone(),
                        r.relation.to_string(),
                        num(r.lhs),
                        num(r.rhs),
                        num(r.slack),
                        r.holds.to_string(),
                        num(r.tol),
                        r.guaranteed.to_string(),
                    ]
                })
                .collect();
            let header: Vec<String> = CHECK_COLUMNS.iter().map(|s| s.to_string()).collect();
            write_csv(out, CHECK_VERSION, &header, &records)?;
        }
        Format::Json => write_json_lines(out, &rows)?,
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ObservableChoice {
    #[default]
    Pauli,
    RandomPauliType,
}

impl std::str::FromStr for ObservableChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "pauli" => Ok(ObservableChoice::Pauli),
            "random_pauli_type" | "random" => Ok(ObservableChoice::RandomPauliType),
            other => Err(format!("unknown observable pair `{other}` (expected pauli or random_pauli_type)")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SearchOptions {
    pub relation: RelationId,
    pub family: Family,
    pub budget: usize,
    pub seed: u64,
    pub observables: ObservableChoice,
    pub object_dim: Option<usize>,
    pub probe_dim: Option<usize>,
    pub probe_support: Option<usize>,
    pub rescale: Option<ValueMap>,
    pub tol: f64,
    /// Witness scenario destination.
    pub out: Option<PathBuf>,
}

impl SearchOptions {
    pub fn new(relation: RelationId, family: Family, budget: usize, seed: u64) -> Self {
        Self {
            relation,
            family,
            budget,
            seed,
            observables: ObservableChoice::Pauli,
            object_dim: None,
            probe_dim: None,
            probe_support: None,
            rescale: None,
            tol: qmeas_core::DEFAULT_TOL,
            out: None,
        }
    }

    pub fn space(&self) -> SearchSpace {
        let mut space = SearchSpace::new(self.family);
        if self.observables == ObservableChoice::RandomPauliType {
            space = space.with_observables(ObservablePair::RandomPauliType);
        }
        let (object_dim, probe_dim) = (self.object_dim.unwrap_or(space.object_dim), self.probe_dim.unwrap_or(space.probe_dim));
        space = space.with_dims(object_dim, probe_dim);
        if let Some(k) = self.probe_support {
            space = space.with_probe_support(k);
        }
        if let Some(f) = &self.rescale {
            space = space.with_rescale(f.clone());
        }
        space.tol = self.tol;
        space
    }
}

fn render_model(spec: &ModelSpec) -> String {
    match spec {
        ModelSpec::SigmaPhi { phi_degrees } => format!("sigma_phi(phi_degrees={})", num(*phi_degrees)),
        ModelSpec::Shift { probe_dim, probe_state } => {
            format!("shift(probe_dim={probe_dim}, probe_state={})", render_vector(probe_state))
        }
        ModelSpec::Explicit { object_dim, probe_dim, .. } => format!("explicit({object_dim}x{probe_dim})"),
    }
}

fn render_vector(v: &[C64]) -> String {
    let parts: Vec<String> = v.iter().map(|z| format!("{}{:+?}i", num(z.re), z.im)).collect();
    format!("[{}]", parts.join(" "))
}

pub fn summary_text(result: &SearchResult) -> &'static str {
    if result.violation_found() {
        "violation found"
    } else {
        "no violation"
    }
}

const SEARCH_COLUMNS: [&str; 14] = [
    "relation",
    "family",
    "budget",
    "seed",
    "evaluations",
    "best_slack",
    "lhs",
    "rhs",
    "holds",
    "summary",
    "model",
    "state",
    "witness_file",
    "rng",
];

/// Runs the search, certifies the witness and writes the summary row.
pub fn cmd_search<W: Write>(opts: &SearchOptions, out: &mut W) -> Result<SearchResult, CliError> {
    let result = search_min_slack(opts.relation, &opts.space(), opts.budget, opts.seed)?;
    if result.witness.is_some() {
        let verdict = certify(&result)?;
        if verdict.slack.to_bits() != result.best_slack.to_bits() {
            return Err(CliError::Consistency(format!(
                "witness replay differs in the last bits: stored {}, replayed {} (within {CERTIFY_TOL:e})",
                num(result.best_slack),
                num(verdict.slack)
            )));
        }
    }

    let mut witness_file = String::new();
    if let (Some(path), Some(witness)) = (&opts.out, &result.witness) {
        let id = format!("search-{}-{}-seed{}", opts.relation.name(), opts.family.name(), opts.seed).to_lowercase();
        let file = scenario_file(&id, witness, opts.tol, opts.seed, Some(opts.relation));
        fs::write(path, to_json(&file))?;
        witness_file = path.display().to_string();
    }

    let verdict = result.verdict.as_ref();
    let record = vec![
        result.relation.name().to_string(),
        result.family.name().to_string(),
        result.budget.to_string(),
        result.seed.to_string(),
        result.evaluations.to_string(),
        num(result.best_slack),
        verdict.map(|v| num(v.lhs)).unwrap_or_default(),
        verdict.map(|v| num(v.rhs)).unwrap_or_default(),
        verdict.map(|v| v.holds.to_string()).unwrap_or_default(),
        summary_text(&result).to_string(),
        result.witness.as_ref().map(|w| render_model(&w.model)).unwrap_or_default(),
        result.witness.as_ref().map(|w| render_vector(&w.state)).unwrap_or_default(),
        witness_file,
        result.rng.to_string(),
    ];
    let header: Vec<String> = SEARCH_COLUMNS.iter().map(|s| s.to_string()).collect();
    write_csv(out, SEARCH_VERSION, &header, &[record])?;
    Ok(result)
}
