//! Uncertainty relations evaluated as `lhs >= rhs` with signed slack.
//!
//! `hbar = 1` throughout. The canonical-commutator special case of the
//! resolution relation is covered by [`RelationId::ResolutionE4`] with the
//! general commutator on the right-hand side.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{commutator, expectation, PureState};
use crate::metrics::{
    conditional_resolutions, disturbance_y0, error_x0, error_xt, mvo_stddev, stddev, unbiasedness_residual_x0,
    unbiasedness_residual_xt, Configuration,
};

pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RelationId {
    /// `eps(x0) eta(y0) >= |<[x0, y0]>| / 2`
    HeisenbergE1,
    /// `eps eta + eps sigma(y0) + sigma(x0) eta >= |<[x0, y0]>| / 2`
    OzawaE2,
    /// `eps_X(x_t) >= sigma_X(x_t)` for every readout `X`
    SqlCondE3,
    /// `eps(x_t) eta(y0) >= |<[x_t, y_t]>| / 2`
    ResolutionE4,
    /// `sigma((x0)_m) eta(y0) >= |<[x0, y0]>| / 2`
    MvoStdE12,
    /// `(eps(x0) + sigma(x0)) eta(y0) >= |<[x0, y0]>| / 2`
    SumE13,
    /// `sigma((x0)_m) >= sigma(x0)`
    SqlE14,
    /// `eps(x_t) sigma(y_t) >= |<[x_t, y_t]>| / 2`
    MenskyE17,
    /// `sigma(x0) sigma(y0) >= |<[x0, y0]>| / 2`
    Robertson,
}

impl RelationId {
    pub const ALL: [RelationId; 9] = [
        RelationId::HeisenbergE1,
        RelationId::OzawaE2,
        RelationId::SqlCondE3,
        RelationId::ResolutionE4,
        RelationId::MvoStdE12,
        RelationId::SumE13,
        RelationId::SqlE14,
        RelationId::MenskyE17,
        RelationId::Robertson,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RelationId::HeisenbergE1 => "HEISENBERG_E1",
            RelationId::OzawaE2 => "OZAWA_E2",
            RelationId::SqlCondE3 => "SQL_COND_E3",
            RelationId::ResolutionE4 => "RESOLUTION_E4",
            RelationId::MvoStdE12 => "MVOSTD_E12",
            RelationId::SumE13 => "SUM_E13",
            RelationId::SqlE14 => "SQL_E14",
            RelationId::MenskyE17 => "MENSKY_E17",
            RelationId::Robertson => "ROBERTSON",
        }
    }
}

impl fmt::Display for RelationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RelationId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let wanted = s.trim().to_ascii_uppercase();
        RelationId::ALL
            .into_iter()
            .find(|id| id.name() == wanted)
            .ok_or_else(|| Error::UnknownRelation(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RelationVerdict {
    pub relation: RelationId,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs - rhs`
    pub slack: f64,
    pub holds: bool,
    pub tol: f64,
    /// Whether the relation is a theorem for this configuration (universal
    /// relations always; accuracy-dependent ones only when unbiased).
    pub guaranteed: bool,
}

impl RelationVerdict {
    fn new(relation: RelationId, lhs: f64, rhs: f64, tol: f64, guaranteed: bool) -> Self {
        let slack = lhs - rhs;
        Self { relation, lhs, rhs, slack, holds: slack >= -tol, tol, guaranteed }
    }
}

/// Per-readout verdicts of the conditional relation, readouts with probability above `1e-12`.
pub fn sql_cond_readouts(cfg: &Configuration, tol: f64) -> Result<Vec<(f64, RelationVerdict)>> {
    Ok(conditional_resolutions(cfg, 0.0)?
        .into_iter()
        .map(|r| (r.readout, RelationVerdict::new(RelationId::SqlCondE3, r.eps_cond, r.sigma_cond, tol, true)))
        .collect())
}

/// Half the modulus of `<phi_0|[x0, y0]|phi_0>`.
pub fn object_commutator_bound(cfg: &Configuration) -> Result<f64> {
    let comm = commutator(cfg.x0.matrix(), cfg.y0.matrix())?;
    Ok(0.5 * expectation(&cfg.state, &comm)?.norm())
}

/// Half the modulus of `<phi_0, xi_0|[x_t, y_t]|phi_0, xi_0>`.
pub fn evolved_commutator_bound(cfg: &Configuration) -> Result<f64> {
    let comm = commutator(&cfg.evolved.x_t, &cfg.evolved.y_t)?;
    Ok(0.5 * expectation(&cfg.composite, &comm)?.norm())
}

fn object_stddev(state: &PureState, cfg: &Configuration, which_x: bool) -> Result<f64> {
    stddev(state, if which_x { cfg.x0.matrix() } else { cfg.y0.matrix() })
}

pub fn check(relation: RelationId, cfg: &Configuration, tol: f64) -> Result<RelationVerdict> {
    let accurate_x0 = || -> Result<bool> { Ok(unbiasedness_residual_x0(cfg)? <= tol) };
    let v = match relation {
        RelationId::HeisenbergE1 => {
            let lhs = error_x0(cfg)? * disturbance_y0(cfg)?;
            RelationVerdict::new(relation, lhs, object_commutator_bound(cfg)?, tol, false)
        }
        RelationId::OzawaE2 => {
            let eps = error_x0(cfg)?;
            let eta = disturbance_y0(cfg)?;
            let lhs = eps * eta + eps * object_stddev(&cfg.state, cfg, false)? + object_stddev(&cfg.state, cfg, true)? * eta;
            RelationVerdict::new(relation, lhs, object_commutator_bound(cfg)?, tol, true)
        }
        RelationId::SqlCondE3 => sql_cond_readouts(cfg, tol)?
            .into_iter()
            .map(|(_, v)| v)
            .min_by(|a, b| a.slack.total_cmp(&b.slack))
            .ok_or_else(|| Error::Consistency("no readout with positive probability".into()))?,
        RelationId::ResolutionE4 => {
            let lhs = error_xt(cfg)? * disturbance_y0(cfg)?;
            let accurate = unbiasedness_residual_xt(cfg)? <= tol;
            RelationVerdict::new(relation, lhs, evolved_commutator_bound(cfg)?, tol, accurate)
        }
        RelationId::MvoStdE12 => {
            let lhs = mvo_stddev(cfg)? * disturbance_y0(cfg)?;
            RelationVerdict::new(relation, lhs, object_commutator_bound(cfg)?, tol, accurate_x0()?)
        }
        RelationId::SumE13 => {
            let lhs = (error_x0(cfg)? + object_stddev(&cfg.state, cfg, true)?) * disturbance_y0(cfg)?;
            RelationVerdict::new(relation, lhs, object_commutator_bound(cfg)?, tol, accurate_x0()?)
        }
        RelationId::SqlE14 => {
            let lhs = mvo_stddev(cfg)?;
            RelationVerdict::new(relation, lhs, object_stddev(&cfg.state, cfg, true)?, tol, accurate_x0()?)
        }
        RelationId::MenskyE17 => {
            let lhs = error_xt(cfg)? * stddev(&cfg.composite, &cfg.evolved.y_t)?;
            RelationVerdict::new(relation, lhs, evolved_commutator_bound(cfg)?, tol, true)
        }
        RelationId::Robertson => {
            let lhs = object_stddev(&cfg.state, cfg, true)? * object_stddev(&cfg.state, cfg, false)?;
            RelationVerdict::new(relation, lhs, object_commutator_bound(cfg)?, tol, true)
        }
    };
    Ok(v)
}

/// Every relation, in [`RelationId::ALL`] order.
pub fn check_all(cfg: &Configuration, tol: f64) -> Result<Vec<RelationVerdict>> {
    RelationId::ALL.into_iter().map(|id| check(id, cfg, tol)).collect()
}
