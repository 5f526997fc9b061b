//! Derivative-free search for minimal-slack configurations.
//!
//! The evaluation sequence alternates blocks of random candidates (each drawn
//! from its own RNG stream, evaluated in parallel, reduced in index order)
//! with blocks of coordinate-wise shrinking-step refinement of the incumbent.
//! The sequence does not depend on the budget, which only truncates it, so a
//! larger budget with the same seed never returns a worse slack.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, HermitianObservable, PureState, C64};
use crate::metrics::Configuration;
use crate::model::{ModelSpec, ValueMap};
use crate::pauli;
use crate::random::{random_model, random_pauli_type, random_pure_state, stream_rng, RNG_NAME};
use crate::relations::{check, RelationId, RelationVerdict, DEFAULT_TOL};

const BLOCK: usize = 32;
const INITIAL_STEP_FRACTION: f64 = 0.125;
/// Refinement stops once every coordinate step is below this.
pub const MIN_STEP: f64 = 1e-6;
/// Allowed difference between a stored and a recomputed slack.
pub const CERTIFY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    SigmaPhi,
    Shift,
    RandomUnitary,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::SigmaPhi => "SIGMA_PHI",
            Family::Shift => "SHIFT",
            Family::RandomUnitary => "RANDOM_UNITARY",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().replace('-', "_").as_str() {
            "SIGMA_PHI" => Ok(Family::SigmaPhi),
            "SHIFT" => Ok(Family::Shift),
            "RANDOM_UNITARY" => Ok(Family::RandomUnitary),
            _ => Err(Error::Precondition(format!("unknown search family `{s}`"))),
        }
    }
}

#[derive(Clone, Debug)]
pub enum ObservablePair {
    /// `(sigma_x, sigma_y)`; object dimension 2.
    Pauli,
    Fixed { x0: HermitianObservable, y0: HermitianObservable },
    /// A fresh pair of random Hermitian involutions per random candidate.
    RandomPauliType,
}

#[derive(Clone, Debug)]
pub struct SearchSpace {
    pub family: Family,
    pub observables: ObservablePair,
    /// Applied to the family's value map through `rescale_mvo`.
    pub rescale: Option<ValueMap>,
    /// Object dimension for random observables and random unitaries.
    pub object_dim: usize,
    /// Probe dimension of the random-unitary family.
    pub probe_dim: usize,
    /// Number of populated pointer levels in the shift family.
    pub probe_support: usize,
    pub tol: f64,
}

impl SearchSpace {
    pub fn new(family: Family) -> Self {
        Self {
            family,
            observables: ObservablePair::Pauli,
            rescale: None,
            object_dim: 2,
            probe_dim: 2,
            probe_support: 3,
            tol: DEFAULT_TOL,
        }
    }

    pub fn with_observables(mut self, observables: ObservablePair) -> Self {
        if let ObservablePair::Fixed { x0, .. } = &observables {
            self.object_dim = x0.dim();
        }
        self.observables = observables;
        self
    }

    pub fn with_rescale(mut self, f: ValueMap) -> Self {
        self.rescale = Some(f);
        self
    }

    pub fn with_dims(mut self, object_dim: usize, probe_dim: usize) -> Self {
        self.object_dim = object_dim;
        self.probe_dim = probe_dim;
        self
    }

    pub fn with_probe_support(mut self, support: usize) -> Self {
        self.probe_support = support;
        self
    }

    fn validate(&self) -> Result<()> {
        let object_dim = match &self.observables {
            ObservablePair::Pauli => 2,
            ObservablePair::Fixed { x0, y0 } => {
                if x0.dim() != y0.dim() {
                    return Err(Error::DimensionMismatch { expected: x0.dim(), found: y0.dim() });
                }
                x0.dim()
            }
            ObservablePair::RandomPauliType => self.object_dim,
        };
        if object_dim != self.object_dim {
            return Err(Error::DimensionMismatch { expected: self.object_dim, found: object_dim });
        }
        if self.family == Family::SigmaPhi && object_dim != 2 {
            return Err(Error::Precondition("the sigma_phi family acts on a qubit".into()));
        }
        if self.family == Family::Shift && self.probe_support < 1 {
            return Err(Error::Precondition("shift family needs at least one populated pointer level".into()));
        }
        if object_dim < 2 && matches!(self.observables, ObservablePair::RandomPauliType) {
            return Err(Error::Precondition("random Pauli-type observables need dimension >= 2".into()));
        }
        Ok(())
    }
}

/// Complete, self-contained description of one evaluated configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub model: ModelSpec,
    pub state: Vec<C64>,
    pub x0: ComplexMatrix,
    pub y0: ComplexMatrix,
    pub value_map_x0: ValueMap,
    pub value_map_xt: Option<ValueMap>,
}

impl Witness {
    /// Builds the configuration from scratch.
    pub fn build(&self) -> Result<Configuration> {
        let x0 = HermitianObservable::new(self.x0.clone())?;
        let y0 = HermitianObservable::new(self.y0.clone())?;
        let model = self
            .model
            .build(&x0)?
            .with_value_maps(self.value_map_x0.clone(), self.value_map_xt.clone());
        Configuration::new(model, PureState::new(self.state.clone())?, x0, y0)
    }
}

#[derive(Clone, Debug)]
pub struct SearchResult {
    pub relation: RelationId,
    pub family: Family,
    /// `+inf` when nothing was evaluated.
    pub best_slack: f64,
    pub witness: Option<Witness>,
    /// Continuous search parameters of the witness, for display.
    pub parameters: Vec<f64>,
    pub verdict: Option<RelationVerdict>,
    pub evaluations: usize,
    pub budget: usize,
    pub seed: u64,
    pub tol: f64,
    pub rng: &'static str,
}

impl SearchResult {
    pub fn violation_found(&self) -> bool {
        self.best_slack < -self.tol
    }
}

#[derive(Clone, Copy, Debug)]
struct Bound {
    lo: f64,
    hi: f64,
    periodic: bool,
}

impl Bound {
    fn clamp(&self, x: f64) -> f64 {
        if self.periodic {
            let span = self.hi - self.lo;
            self.lo + (x - self.lo).rem_euclid(span)
        } else {
            x.clamp(self.lo, self.hi)
        }
    }
}

/// Per-candidate data that refinement does not change.
#[derive(Clone, Debug)]
enum Fixed {
    SigmaPhi,
    Shift { offset: usize, probe_dim: usize },
    Explicit { object_dim: usize, probe_dim: usize, unitary: ComplexMatrix, probe_state: Vec<C64>, meter: ComplexMatrix },
}

#[derive(Clone, Debug)]
struct Candidate {
    fixed: Fixed,
    x0: HermitianObservable,
    y0: HermitianObservable,
    params: Vec<f64>,
}

/// Hyperspherical moduli angles in `[0, pi/2]` followed by relative phases.
fn state_bounds(dim: usize) -> Vec<Bound> {
    let moduli = (1..dim).map(|_| Bound { lo: 0.0, hi: FRAC_PI_2, periodic: false });
    let phases = (1..dim).map(|_| Bound { lo: 0.0, hi: TAU, periodic: true });
    moduli.chain(phases).collect()
}

pub(crate) fn angles_to_amplitudes(dim: usize, angles: &[f64]) -> Vec<C64> {
    let (moduli_angles, phases) = angles.split_at(dim - 1);
    let mut out = Vec::with_capacity(dim);
    let mut remaining = 1.0;
    for k in 0..dim {
        let modulus = if k + 1 < dim { remaining * moduli_angles[k].cos() } else { remaining };
        if k + 1 < dim {
            remaining *= moduli_angles[k].sin();
        }
        let phase = if k == 0 { 0.0 } else { phases[k - 1] };
        out.push(C64::from_polar(modulus, phase));
    }
    out
}

pub(crate) fn amplitudes_to_angles(amps: &[C64]) -> Vec<f64> {
    let dim = amps.len();
    let mut moduli_angles = Vec::with_capacity(dim - 1);
    let mut remaining = 1.0f64;
    for amp in amps.iter().take(dim - 1) {
        let ratio = if remaining > 1e-300 { (amp.norm() / remaining).clamp(0.0, 1.0) } else { 1.0 };
        let theta = ratio.acos();
        moduli_angles.push(theta);
        remaining *= theta.sin();
    }
    let reference = amps[0].arg();
    let phases = amps[1..].iter().map(|a| (a.arg() - reference).rem_euclid(TAU));
    moduli_angles.into_iter().chain(phases).collect()
}

struct Searcher<'a> {
    relation: RelationId,
    space: &'a SearchSpace,
    seed: u64,
}

impl Searcher<'_> {
    fn bounds(&self, candidate: &Candidate) -> Vec<Bound> {
        let object = state_bounds(candidate.x0.dim());
        match candidate.fixed {
            Fixed::SigmaPhi => {
                let mut b = vec![Bound { lo: 0.0, hi: 360.0, periodic: true }];
                b.extend(object);
                b
            }
            Fixed::Shift { .. } => {
                let mut b = state_bounds(self.space.probe_support);
                b.extend(object);
                b
            }
            Fixed::Explicit { .. } => object,
        }
    }

    fn observables(&self, rng: &mut rand_chacha::ChaCha20Rng) -> (HermitianObservable, HermitianObservable) {
        match &self.space.observables {
            ObservablePair::Pauli => (pauli::observable(pauli::sigma_x()), pauli::observable(pauli::sigma_y())),
            ObservablePair::Fixed { x0, y0 } => (x0.clone(), y0.clone()),
            ObservablePair::RandomPauliType => {
                let x0 = random_pauli_type(self.space.object_dim, rng);
                let y0 = random_pauli_type(self.space.object_dim, rng);
                (x0, y0)
            }
        }
    }

    fn draw(&self, index: u64) -> Result<Candidate> {
        let mut rng = stream_rng(self.seed, index);
        let (x0, y0) = self.observables(&mut rng);
        let object_dim = x0.dim();
        match self.space.family {
            Family::SigmaPhi => {
                let phi = rand::Rng::random_range(&mut rng, 0.0..360.0);
                let state = random_pure_state(object_dim, &mut rng);
                let mut params = vec![phi];
                params.extend(amplitudes_to_angles(state.amplitudes()));
                Ok(Candidate { fixed: Fixed::SigmaPhi, x0, y0, params })
            }
            Family::Shift => {
                let (lo, hi) = integer_range(&x0)?;
                let offset = (-lo).max(0) as usize;
                let probe_dim = offset + self.space.probe_support + hi.max(0) as usize;
                let probe = random_pure_state(self.space.probe_support, &mut rng);
                let state = random_pure_state(object_dim, &mut rng);
                let mut params = amplitudes_to_angles(probe.amplitudes());
                params.extend(amplitudes_to_angles(state.amplitudes()));
                Ok(Candidate { fixed: Fixed::Shift { offset, probe_dim }, x0, y0, params })
            }
            Family::RandomUnitary => {
                let model = random_model(object_dim, self.space.probe_dim, &mut rng)?;
                let state = random_pure_state(object_dim, &mut rng);
                Ok(Candidate {
                    fixed: Fixed::Explicit {
                        object_dim,
                        probe_dim: model.probe_dim(),
                        unitary: model.unitary().clone(),
                        probe_state: model.probe_state().amplitudes().to_vec(),
                        meter: model.meter().matrix().clone(),
                    },
                    x0,
                    y0,
                    params: amplitudes_to_angles(state.amplitudes()),
                })
            }
        }
    }

    fn witness(&self, candidate: &Candidate) -> Witness {
        let object_dim = candidate.x0.dim();
        let object_angles = 2 * object_dim - 2;
        let params = &candidate.params;
        let state_angles = &params[params.len() - object_angles..];
        let (model, base_map) = match &candidate.fixed {
            Fixed::SigmaPhi => (ModelSpec::SigmaPhi { phi_degrees: params[0] }, ValueMap::Identity),
            Fixed::Shift { offset, probe_dim } => {
                let support = self.space.probe_support;
                let levels = angles_to_amplitudes(support, &params[..2 * support - 2]);
                let mut probe_state = vec![C64::new(0.0, 0.0); *probe_dim];
                probe_state[*offset..*offset + support].copy_from_slice(&levels);
                (ModelSpec::Shift { probe_dim: *probe_dim, probe_state }, ValueMap::CenterOnMeterMean)
            }
            Fixed::Explicit { object_dim, probe_dim, unitary, probe_state, meter } => (
                ModelSpec::Explicit {
                    object_dim: *object_dim,
                    probe_dim: *probe_dim,
                    unitary: unitary.clone(),
                    probe_state: probe_state.clone(),
                    meter: meter.clone(),
                },
                ValueMap::Identity,
            ),
        };
        let (value_map_x0, value_map_xt) = match &self.space.rescale {
            Some(f) => (base_map.then(f.clone()), Some(base_map)),
            None => (base_map, None),
        };
        Witness {
            model,
            state: angles_to_amplitudes(object_dim, state_angles),
            x0: candidate.x0.matrix().clone(),
            y0: candidate.y0.matrix().clone(),
            value_map_x0,
            value_map_xt,
        }
    }

    fn evaluate(&self, candidate: &Candidate) -> Result<(Witness, RelationVerdict)> {
        let witness = self.witness(candidate);
        let verdict = check(self.relation, &witness.build()?, self.space.tol)?;
        Ok((witness, verdict))
    }
}

fn integer_range(x0: &HermitianObservable) -> Result<(i64, i64)> {
    let mut out = (i64::MAX, i64::MIN);
    for &v in x0.eigenvalues() {
        let r = v.round();
        if (v - r).abs() > crate::linalg::DEGENERACY_GAP {
            return Err(Error::NonIntegerSpectrum { value: v });
        }
        out = (out.0.min(r as i64), out.1.max(r as i64));
    }
    Ok(out)
}

struct Incumbent {
    candidate: Candidate,
    witness: Witness,
    verdict: RelationVerdict,
}

/// Coordinate pattern search around the incumbent with a shrinking step.
struct Refinement {
    bounds: Vec<Bound>,
    fraction: f64,
    coordinate: usize,
    direction: f64,
    improved_this_pass: bool,
}

impl Refinement {
    fn new(bounds: Vec<Bound>) -> Self {
        Self { bounds, fraction: INITIAL_STEP_FRACTION, coordinate: 0, direction: 1.0, improved_this_pass: false }
    }

    fn largest_step(&self) -> f64 {
        self.bounds.iter().map(|b| (b.hi - b.lo) * self.fraction).fold(0.0, f64::max)
    }

    fn halted(&self) -> bool {
        self.bounds.is_empty() || self.largest_step() < MIN_STEP
    }

    fn propose(&self, params: &[f64]) -> Vec<f64> {
        let b = self.bounds[self.coordinate];
        let mut next = params.to_vec();
        next[self.coordinate] = b.clamp(params[self.coordinate] + self.direction * (b.hi - b.lo) * self.fraction);
        next
    }

    fn record(&mut self, improved: bool) {
        if improved {
            self.improved_this_pass = true;
            return;
        }
        if self.direction > 0.0 {
            self.direction = -1.0;
            return;
        }
        self.direction = 1.0;
        self.coordinate += 1;
        if self.coordinate == self.bounds.len() {
            self.coordinate = 0;
            if !self.improved_this_pass {
                self.fraction *= 0.5;
            }
            self.improved_this_pass = false;
        }
    }
}

pub fn search_min_slack(relation: RelationId, space: &SearchSpace, budget: usize, seed: u64) -> Result<SearchResult> {
    space.validate()?;
    let searcher = Searcher { relation, space, seed };
    let mut evaluations = 0usize;
    let mut next_index = 0u64;
    let mut best: Option<Incumbent> = None;
    let mut refinement: Option<Refinement> = None;

    while evaluations < budget {
        let n = BLOCK.min(budget - evaluations);
        let results: Vec<Result<(Candidate, Witness, RelationVerdict)>> = (next_index..next_index + n as u64)
            .into_par_iter()
            .map(|index| {
                let candidate = searcher.draw(index)?;
                let (witness, verdict) = searcher.evaluate(&candidate)?;
                Ok((candidate, witness, verdict))
            })
            .collect();
        next_index += n as u64;
        let mut new_incumbent = false;
        for r in results {
            let (candidate, witness, verdict) = r?;
            evaluations += 1;
            if best.as_ref().is_none_or(|b| verdict.slack < b.verdict.slack) {
                best = Some(Incumbent { candidate, witness, verdict });
                new_incumbent = true;
            }
        }
        if new_incumbent {
            let incumbent = best.as_ref().expect("set above");
            refinement = Some(Refinement::new(searcher.bounds(&incumbent.candidate)));
        }

        if let (Some(refine), Some(incumbent)) = (refinement.as_mut(), best.as_mut()) {
            let mut steps = 0;
            while steps < BLOCK && evaluations < budget && !refine.halted() {
                let mut trial = incumbent.candidate.clone();
                trial.params = refine.propose(&incumbent.candidate.params);
                let (witness, verdict) = searcher.evaluate(&trial)?;
                evaluations += 1;
                steps += 1;
                let improved = verdict.slack < incumbent.verdict.slack;
                if improved {
                    *incumbent = Incumbent { candidate: trial, witness, verdict };
                }
                refine.record(improved);
            }
        }
    }

    let (best_slack, witness, verdict, parameters) = match best {
        Some(b) => (b.verdict.slack, Some(b.witness), Some(b.verdict), b.candidate.params),
        None => (f64::INFINITY, None, None, Vec::new()),
    };
    Ok(SearchResult {
        relation,
        family: space.family,
        best_slack,
        witness,
        parameters,
        verdict,
        evaluations,
        budget,
        seed,
        tol: space.tol,
        rng: RNG_NAME,
    })
}

/// Re-evaluates a witness from scratch and checks it against the stored slack.
pub fn certify(result: &SearchResult) -> Result<RelationVerdict> {
    let witness = result
        .witness
        .as_ref()
        .ok_or_else(|| Error::Precondition("search result has no witness".into()))?;
    let verdict = check(result.relation, &witness.build()?, result.tol)?;
    let deviation = (verdict.slack - result.best_slack).abs();
    if deviation.is_nan() || deviation > CERTIFY_TOL {
        return Err(Error::ReproductionMismatch { stored: result.best_slack, recomputed: verdict.slack });
    }
    Ok(verdict)
}
