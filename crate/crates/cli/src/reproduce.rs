//! Worked spin-1/2 example: a projective `sigma_phi` measurement reported as a
//! measurement of `sigma_x`.
//!
//! The table is long-format: one quantity per row, with an analytic reference
//! value where one exists. `eps_rand` rows compare the value implied by
//! `eps^2 = eps_r^2 + eps_s^2` (which equals `sin(phi)` on `+-x`) with the
//! closed form `sin(phi/2)`; rows where the two differ are flagged.

use std::io::Write;

use qmeas_core::metrics::full_report;
use qmeas_core::model::{outcome_probabilities, probability_of_value};
use qmeas_core::{
    build_shift_model, build_sigma_phi, check, check_all, named_state, observable, rescale_mvo, sigma_x, sigma_y,
    Configuration, IndirectModel, PureState, RelationId, ValueMap, C64,
};
use serde::Serialize;

use crate::error::CliError;
use crate::report::{num, write_csv, write_json_lines, Format};

pub const SPIN_VERSION: &str = "# qmeas-spin v1";

/// Agreement threshold for the `note` column.
const AGREE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpinRow {
    pub section: &'static str,
    pub state: String,
    pub phi_degrees: Option<f64>,
    pub quantity: String,
    pub value: f64,
    pub reference: Option<f64>,
    pub note: String,
}

const COLUMNS: [&str; 7] = ["section", "state", "phi_degrees", "quantity", "value", "reference", "note"];

fn sigma_phi_config(state: &str, phi_degrees: f64) -> qmeas_core::Result<Configuration> {
    Configuration::new(
        build_sigma_phi(phi_degrees.to_radians())?,
        named_state(state).expect("fixed state names"),
        observable(sigma_x()),
        observable(sigma_y()),
    )
}

struct Table(Vec<SpinRow>);

impl Table {
    fn push(&mut self, section: &'static str, state: &str, phi: Option<f64>, quantity: &str, value: f64, reference: Option<f64>) {
        let note = match reference {
            Some(r) if (value - r).abs() <= AGREE_TOL => "agrees".to_string(),
            Some(_) => "differs from reference".to_string(),
            None => String::new(),
        };
        self.0.push(SpinRow {
            section,
            state: state.to_string(),
            phi_degrees: phi,
            quantity: quantity.to_string(),
            value,
            reference,
            note,
        });
    }

    fn push_note(&mut self, section: &'static str, state: &str, phi: Option<f64>, quantity: &str, value: f64, note: String) {
        self.0.push(SpinRow {
            section,
            state: state.to_string(),
            phi_degrees: phi,
            quantity: quantity.to_string(),
            value,
            reference: None,
            note,
        });
    }

    fn push_verdicts(&mut self, section: &'static str, state: &str, phi: Option<f64>, cfg: &Configuration, ids: &[RelationId]) -> qmeas_core::Result<()> {
        for &id in ids {
            let v = check(id, cfg, qmeas_core::DEFAULT_TOL)?;
            self.push_note(section, state, phi, &format!("{}_slack", id.name()), v.slack, format!("holds={}", v.holds));
        }
        Ok(())
    }
}

pub fn spin_table() -> qmeas_core::Result<Vec<SpinRow>> {
    let mut t = Table(Vec::new());

    let cfg = sigma_phi_config("+y", 90.0)?;
    let out = outcome_probabilities(&cfg.model, &cfg.state)?;
    t.push("born_rule", "+y", Some(90.0), "p_plus", probability_of_value(&out, 1.0), Some(1.0));
    t.push("born_rule", "+y", Some(90.0), "p_minus", probability_of_value(&out, -1.0), Some(0.0));
    t.push("born_rule", "+y", Some(90.0), "eps_x0", full_report(&cfg)?.eps_x0, Some(2f64.sqrt()));

    for phi in [0.0, 40.0, 90.0] {
        let cfg = sigma_phi_config("+z", phi)?;
        let out = outcome_probabilities(&cfg.model, &cfg.state)?;
        t.push("error_independence", "+z", Some(phi), "p_plus", probability_of_value(&out, 1.0), Some(0.5));
        t.push("error_independence", "+z", Some(phi), "p_minus", probability_of_value(&out, -1.0), Some(0.5));
        t.push("error_independence", "+z", Some(phi), "eps_x0", full_report(&cfg)?.eps_x0, None);
    }

    for (state, sign) in [("+x", 1.0), ("-x", -1.0)] {
        for phi in [0.0, 40.0, 90.0] {
            let r = phi_rad(phi);
            let cfg = sigma_phi_config(state, phi)?;
            let m = full_report(&cfg)?;
            t.push("eigenstate_errors", state, Some(phi), "eps_x0", m.eps_x0, Some(2.0 * (r / 2.0).sin()));
            t.push("eigenstate_errors", state, Some(phi), "delta", m.delta, Some(sign * (r.cos() - 1.0)));
            t.push("eigenstate_errors", state, Some(phi), "eps_sys", m.eps_sys, Some(1.0 - r.cos()));
            let eps_rand = m.eps_rand.expect("eigenstates of sigma_x have no spread");
            t.push("eigenstate_errors", state, Some(phi), "eps_rand", eps_rand, Some((r / 2.0).sin()));
        }
    }

    for phi in [0.0, 20.0, 40.0, 60.0, 90.0, 180.0] {
        let cfg = sigma_phi_config("+z", phi)?;
        let m = full_report(&cfg)?;
        t.push("unbiasedness", "any", Some(phi), "unbias_res_x0", m.unbias_res_x0, Some(2.0 * (phi_rad(phi) / 2.0).sin()));
    }

    for (state, phi) in [("+y", 90.0), ("+z", 40.0), ("+x", 40.0)] {
        let cfg = sigma_phi_config(state, phi)?;
        for v in check_all(&cfg, qmeas_core::DEFAULT_TOL)? {
            t.push_note("relations", state, Some(phi), &format!("{}_slack", v.relation.name()), v.slack, format!("holds={}", v.holds));
        }
    }

    let demo = [RelationId::OzawaE2, RelationId::MvoStdE12, RelationId::SumE13];
    let base = sigma_phi_config("+z", 90.0)?;
    for f in [ValueMap::Identity, ValueMap::Scale(100.0)] {
        let cfg = rescaled(&base, f.clone())?;
        let section = if f == ValueMap::Identity { "rescale_identity" } else { "rescale_100x" };
        t.push(section, "+z", Some(90.0), "eps_x0", full_report(&cfg)?.eps_x0, None);
        t.push_verdicts(section, "+z", Some(90.0), &cfg, &demo)?;
    }

    // Unbiased shift model of sigma_x; scaling its values by 100 keeps every relation.
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let z = C64::new(0.0, 0.0);
    let probe = PureState::new(vec![z, C64::new(h, 0.0), C64::new(h, 0.0), z]).expect("normalized");
    let shift = build_shift_model(&observable(sigma_x()), 4, probe)?;
    let shift_cfg = Configuration::new(shift, named_state("+z").expect("fixed"), observable(sigma_x()), observable(sigma_y()))?;
    for f in [ValueMap::Identity, ValueMap::Scale(100.0)] {
        let cfg = rescaled(&shift_cfg, f.clone())?;
        let section = if f == ValueMap::Identity { "shift_identity" } else { "shift_100x" };
        t.push(section, "+z", None, "eps_x0", full_report(&cfg)?.eps_x0, None);
        t.push_verdicts(section, "+z", None, &cfg, &demo)?;
    }

    Ok(t.0)
}

fn phi_rad(phi_degrees: f64) -> f64 {
    phi_degrees.to_radians()
}

fn rescaled(cfg: &Configuration, f: ValueMap) -> qmeas_core::Result<Configuration> {
    let model: IndirectModel = rescale_mvo(&cfg.model, f);
    Configuration::new(model, cfg.state.clone(), cfg.x0.clone(), cfg.y0.clone())
}

pub fn cmd_reproduce_spin<W: Write>(format: Format, out: &mut W) -> Result<(), CliError> {
    let rows = spin_table()?;
    match format {
        Format::Csv => {
            let records: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.section.to_string(),
                        r.state.clone(),
                        r.phi_degrees.map(num).unwrap_or_default(),
                        r.quantity.clone(),
                        num(r.value),
                        r.reference.map(num).unwrap_or_default(),
                        r.note.clone(),
                    ]
                })
                .collect();
            let header: Vec<String> = COLUMNS.iter().map(|s| s.to_string()).collect();
            write_csv(out, SPIN_VERSION, &header, &records)?;
        }
        Format::Json => write_json_lines(out, &rows)?,
    }
    Ok(())
}
