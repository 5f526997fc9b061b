//! Report rows and their CSV / JSON-lines encodings.
//!
//! CSV reports start with the comment line [`REPORT_VERSION`] followed by a
//! header with the columns of [`columns`]:
//!
//! | column | content |
//! |---|---|
//! | `scenario_id`, `family` | scenario identity |
//! | `param_name`, `param_value` | swept or family parameter (empty if none) |
//! | `p_plus`, `p_minus` | probability of the measurement values `+1` and `-1` |
//! | `outcomes` | every measurement value as `value:probability`, `;`-separated |
//! | `eps_x0` ... `unbias_res_xt` | the metrics report (`eps_rand` empty unless `sigma_x0 = 0`) |
//! | `variance_identity_res` | `sigma_mvo^2 - sigma_x0^2 - eps_x0^2` |
//! | `<RELATION>_lhs/_rhs/_slack/_holds` | one group per relation id |
//!
//! Numbers use Rust's shortest round-trip formatting with a `.` decimal point.

use std::io::{self, Write};

use qmeas_core::metrics::MetricsReport;
use qmeas_core::model::{outcome_probabilities, probability_of_value, Outcome};
use qmeas_core::{check_all, full_report, Configuration, RelationId, RelationVerdict};
use serde::Serialize;

pub const REPORT_VERSION: &str = "# qmeas-report v1";

const METRIC_COLUMNS: [&str; 11] = [
    "eps_x0",
    "eps_xt",
    "eta_y0",
    "sigma_x0",
    "sigma_y0",
    "sigma_mvo",
    "delta",
    "eps_sys",
    "eps_rand",
    "unbias_res_x0",
    "unbias_res_xt",
];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

/// Shortest round-trip representation.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutcomeRecord {
    pub value: f64,
    pub probability: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricsRecord {
    pub eps_x0: f64,
    pub eps_xt: f64,
    pub eta_y0: f64,
    pub sigma_x0: f64,
    pub sigma_y0: f64,
    pub sigma_mvo: f64,
    pub delta: f64,
    pub eps_sys: f64,
    pub eps_rand: Option<f64>,
    pub unbias_res_x0: f64,
    pub unbias_res_xt: f64,
}

impl From<&MetricsReport> for MetricsRecord {
    fn from(m: &MetricsReport) -> Self {
        Self {
            eps_x0: m.eps_x0,
            eps_xt: m.eps_xt,
            eta_y0: m.eta_y0,
            sigma_x0: m.sigma_x0,
            sigma_y0: m.sigma_y0,
            sigma_mvo: m.sigma_mvo,
            delta: m.delta,
            eps_sys: m.eps_sys,
            eps_rand: m.eps_rand,
            unbias_res_x0: m.unbias_res_x0,
            unbias_res_xt: m.unbias_res_xt,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerdictRecord {
    pub relation: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub holds: bool,
}

impl From<&RelationVerdict> for VerdictRecord {
    fn from(v: &RelationVerdict) -> Self {
        Self { relation: v.relation.name(), lhs: v.lhs, rhs: v.rhs, slack: v.slack, holds: v.holds }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub scenario_id: String,
    pub family: String,
    pub param_name: Option<String>,
    pub param_value: Option<f64>,
    pub p_plus: f64,
    pub p_minus: f64,
    pub outcomes: Vec<OutcomeRecord>,
    pub metrics: MetricsRecord,
    pub variance_identity_res: f64,
    pub relations: Vec<VerdictRecord>,
}

impl ReportRow {
    pub fn evaluate(
        scenario_id: &str,
        family: &str,
        param: Option<(&str, f64)>,
        cfg: &Configuration,
        tol: f64,
    ) -> qmeas_core::Result<Self> {
        let outcomes: Vec<Outcome> = outcome_probabilities(&cfg.model, &cfg.state)?;
        let report = full_report(cfg)?;
        let verdicts = check_all(cfg, tol)?;
        Ok(Self {
            scenario_id: scenario_id.to_string(),
            family: family.to_string(),
            param_name: param.map(|(n, _)| n.to_string()),
            param_value: param.map(|(_, v)| v),
            p_plus: probability_of_value(&outcomes, 1.0),
            p_minus: probability_of_value(&outcomes, -1.0),
            outcomes: outcomes.iter().map(|o| OutcomeRecord { value: o.value, probability: o.probability }).collect(),
            metrics: MetricsRecord::from(&report),
            variance_identity_res: report.variance_identity_residual(),
            relations: verdicts.iter().map(VerdictRecord::from).collect(),
        })
    }

    pub fn verdict(&self, relation: RelationId) -> Option<&VerdictRecord> {
        self.relations.iter().find(|v| v.relation == relation.name())
    }

    fn csv_fields(&self) -> Vec<String> {
        let m = &self.metrics;
        let mut out = vec![
            self.scenario_id.clone(),
            self.family.clone(),
            self.param_name.clone().unwrap_or_default(),
            self.param_value.map(num).unwrap_or_default(),
            num(self.p_plus),
            num(self.p_minus),
            self.outcomes
                .iter()
                .map(|o| format!("{}:{}", num(o.value), num(o.probability)))
                .collect::<Vec<_>>()
                .join(";"),
        ];
        out.extend(
            [
                Some(m.eps_x0),
                Some(m.eps_xt),
                Some(m.eta_y0),
                Some(m.sigma_x0),
                Some(m.sigma_y0),
                Some(m.sigma_mvo),
                Some(m.delta),
                Some(m.eps_sys),
                m.eps_rand,
                Some(m.unbias_res_x0),
                Some(m.unbias_res_xt),
            ]
            .into_iter()
            .map(|v| v.map(num).unwrap_or_default()),
        );
        out.push(num(self.variance_identity_res));
        for v in &self.relations {
            out.extend([num(v.lhs), num(v.rhs), num(v.slack), v.holds.to_string()]);
        }
        out
    }
}

pub fn columns() -> Vec<String> {
    let mut cols: Vec<String> = ["scenario_id", "family", "param_name", "param_value", "p_plus", "p_minus", "outcomes"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    cols.extend(METRIC_COLUMNS.iter().map(|s| s.to_string()));
    cols.push("variance_identity_res".into());
    for r in RelationId::ALL {
        for suffix in ["lhs", "rhs", "slack", "holds"] {
            cols.push(format!("{}_{suffix}", r.name()));
        }
    }
    cols
}

fn csv_error(e: csv::Error) -> io::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => e,
        other => io::Error::other(format!("{other:?}")),
    }
}

/// Writes `header` (with the version comment) and `records` as CSV.
pub fn write_csv<W: Write>(out: &mut W, version: &str, header: &[String], records: &[Vec<String>]) -> io::Result<()> {
    writeln!(out, "{version}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(csv_error)?;
    for r in records {
        w.write_record(r).map_err(csv_error)?;
    }
    w.flush()
}

pub fn write_json_lines<W: Write, T: Serialize>(out: &mut W, rows: &[T]) -> io::Result<()> {
    for row in rows {
        serde_json::to_writer(&mut *out, row)?;
        writeln!(out)?;
    }
    Ok(())
}

/// Writes report rows. An empty slice writes nothing.
pub fn write_rows<W: Write>(out: &mut W, rows: &[ReportRow], format: Format) -> io::Result<()> {
    if rows.is_empty() {
        return Ok(());
    }
    match format {
        Format::Csv => {
            let records: Vec<Vec<String>> = rows.iter().map(ReportRow::csv_fields).collect();
            write_csv(out, REPORT_VERSION, &columns(), &records)
        }
        Format::Json => write_json_lines(out, rows),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use qmeas_core::{build_sigma_phi, named_state, observable, sigma_x, sigma_y};

    #[test]
    fn header_and_row_widths_agree() {
        let cfg = Configuration::new(
            build_sigma_phi(0.5).unwrap(),
            named_state("+x").unwrap(),
            observable(sigma_x()),
            observable(sigma_y()),
        )
        .unwrap();
        let row = ReportRow::evaluate("a", "sigma_phi", Some(("phi_degrees", 0.5)), &cfg, 1e-9).unwrap();
        assert_eq!(row.csv_fields().len(), columns().len());
        assert_eq!(columns().len(), 7 + 11 + 1 + 4 * RelationId::ALL.len());
    }

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, -0.0, 1e-300, 2f64.sqrt()] {
            assert_eq!(num(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
        assert_eq!(num(0.5), "0.5");
    }

    #[test]
    fn fields_with_commas_are_quoted() {
        let mut buf = Vec::new();
        write_csv(&mut buf, "# v", &["a".into(), "b".into()], &[vec!["x,y".into(), "1".into()]]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "# v\na,b\n\"x,y\",1\n");
    }
}
