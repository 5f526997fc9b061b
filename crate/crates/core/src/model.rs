//! Indirect measurement models: an object coupled to a probe by a unitary,
//! followed by an exact readout of a probe meter observable.
//!
//! Measurement values are functions of the evolved meter `X_t`, so every
//! measurement-value operator built here commutes with `y_t`.

use std::fmt;
use std::str::FromStr;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{
    apply_spectral, expectation, herm_eig, partial_trace_probe, tensor, ComplexMatrix, HermitianObservable,
    MixedState, PureState, C64, DEGENERACY_GAP,
};
use crate::pauli;

/// Accepted deviation of `U^dagger U` from the identity.
pub const UNITARY_TOL: f64 = 1e-10;
/// Readouts below this probability cannot be conditioned on.
pub const MIN_READOUT_PROBABILITY: f64 = 1e-12;
/// Outcome values closer than this are merged.
const VALUE_MERGE_TOL: f64 = 1e-9;

/// Real-valued map from meter readouts to measurement values.
#[derive(Clone, Debug, PartialEq)]
pub enum ValueMap {
    Identity,
    Scale(f64),
    Shift(f64),
    /// `x - <X_0>` with the mean taken in the probe state.
    CenterOnMeterMean,
    /// Applied left to right.
    Chain(Vec<ValueMap>),
}

impl ValueMap {
    pub fn apply(&self, x: f64, meter_mean: f64) -> f64 {
        match self {
            ValueMap::Identity => x,
            ValueMap::Scale(c) => c * x,
            ValueMap::Shift(c) => x + c,
            ValueMap::CenterOnMeterMean => x - meter_mean,
            ValueMap::Chain(maps) => maps.iter().fold(x, |acc, m| m.apply(acc, meter_mean)),
        }
    }

    /// `outer(self(x))`, flattened.
    pub fn then(&self, outer: ValueMap) -> ValueMap {
        let mut parts = self.parts();
        parts.extend(outer.parts());
        parts.retain(|m| *m != ValueMap::Identity);
        match parts.len() {
            0 => ValueMap::Identity,
            1 => parts.pop().unwrap(),
            _ => ValueMap::Chain(parts),
        }
    }

    /// Flat list of the named maps, in application order.
    pub fn parts(&self) -> Vec<ValueMap> {
        match self {
            ValueMap::Chain(maps) => maps.iter().flat_map(ValueMap::parts).collect(),
            other => vec![other.clone()],
        }
    }

    /// Parses a list of named maps applied in order.
    pub fn from_names<S: AsRef<str>>(names: &[S]) -> Result<ValueMap> {
        names.iter().try_fold(ValueMap::Identity, |acc, name| Ok(acc.then(name.as_ref().parse()?)))
    }
}

impl fmt::Display for ValueMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueMap::Identity => write!(f, "identity"),
            ValueMap::Scale(c) => write!(f, "scale:{c:?}"),
            ValueMap::Shift(c) => write!(f, "shift:{c:?}"),
            ValueMap::CenterOnMeterMean => write!(f, "center_on_meter_mean"),
            ValueMap::Chain(maps) => {
                let names: Vec<String> = maps.iter().map(ToString::to_string).collect();
                write!(f, "{}", names.join(">"))
            }
        }
    }
}

impl FromStr for ValueMap {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidValueMap(s.to_string());
        let parse_constant = |text: &str| -> Result<f64> {
            let c: f64 = text.trim().parse().map_err(|_| bad())?;
            if c.is_finite() {
                Ok(c)
            } else {
                Err(bad())
            }
        };
        match s.trim() {
            "identity" => Ok(ValueMap::Identity),
            "center_on_meter_mean" => Ok(ValueMap::CenterOnMeterMean),
            other => {
                if let Some(rest) = other.strip_prefix("scale:") {
                    Ok(ValueMap::Scale(parse_constant(rest)?))
                } else if let Some(rest) = other.strip_prefix("shift:") {
                    Ok(ValueMap::Shift(parse_constant(rest)?))
                } else if other.contains('>') {
                    ValueMap::from_names(&other.split('>').collect::<Vec<_>>())
                } else {
                    Err(bad())
                }
            }
        }
    }
}

/// Object system coupled to a probe prepared in a fixed pure state.
#[derive(Clone, Debug)]
pub struct IndirectModel {
    object_dim: usize,
    probe_dim: usize,
    unitary: ComplexMatrix,
    probe_state: PureState,
    meter: HermitianObservable,
    value_map_x0: ValueMap,
    value_map_xt: Option<ValueMap>,
}

impl IndirectModel {
    pub fn new(
        object_dim: usize,
        probe_dim: usize,
        unitary: ComplexMatrix,
        probe_state: PureState,
        meter: HermitianObservable,
        value_map_x0: ValueMap,
        value_map_xt: Option<ValueMap>,
    ) -> Result<Self> {
        if object_dim == 0 || probe_dim == 0 {
            return Err(Error::Precondition("object and probe dimensions must be positive".into()));
        }
        check_dim(object_dim * probe_dim, unitary.dim())?;
        check_dim(probe_dim, probe_state.dim())?;
        check_dim(probe_dim, meter.dim())?;
        let deviation = unitary.unitarity_defect();
        if deviation > UNITARY_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self { object_dim, probe_dim, unitary, probe_state, meter, value_map_x0, value_map_xt })
    }

    pub fn object_dim(&self) -> usize {
        self.object_dim
    }

    pub fn probe_dim(&self) -> usize {
        self.probe_dim
    }

    pub fn unitary(&self) -> &ComplexMatrix {
        &self.unitary
    }

    pub fn probe_state(&self) -> &PureState {
        &self.probe_state
    }

    pub fn meter(&self) -> &HermitianObservable {
        &self.meter
    }

    pub fn value_map_x0(&self) -> &ValueMap {
        &self.value_map_x0
    }

    /// The map for `(x_t)_m`; falls back to the `(x_0)_m` map.
    pub fn value_map_xt(&self) -> &ValueMap {
        self.value_map_xt.as_ref().unwrap_or(&self.value_map_x0)
    }

    pub fn explicit_value_map_xt(&self) -> Option<&ValueMap> {
        self.value_map_xt.as_ref()
    }

    pub fn with_value_maps(mut self, x0: ValueMap, xt: Option<ValueMap>) -> Self {
        self.value_map_x0 = x0;
        self.value_map_xt = xt;
        self
    }

    /// `<xi_0|X_0|xi_0>`.
    pub fn meter_mean(&self) -> f64 {
        expectation(&self.probe_state, self.meter.matrix()).map(|z| z.re).unwrap_or(f64::NAN)
    }

    pub fn value_x0(&self, readout: f64) -> f64 {
        self.value_map_x0.apply(readout, self.meter_mean())
    }

    pub fn value_xt(&self, readout: f64) -> f64 {
        self.value_map_xt().apply(readout, self.meter_mean())
    }

    /// `|phi_0> (x) |xi_0>`.
    pub fn composite_state(&self, state: &PureState) -> Result<PureState> {
        check_dim(self.object_dim, state.dim())?;
        Ok(state.tensor(&self.probe_state))
    }

    /// `X_t = U^dagger (I (x) X_0) U`, decomposed.
    pub fn evolved_meter(&self) -> Result<HermitianObservable> {
        let lifted = tensor(&ComplexMatrix::identity(self.object_dim), self.meter.matrix());
        herm_eig(&lifted.conjugate_by(&self.unitary)?)
    }

    /// Distinct meter eigenvalues (possible readouts), ascending.
    pub fn readouts(&self) -> Vec<f64> {
        self.meter.clusters().into_iter().map(|c| c.value).collect()
    }

    fn lift(&self, object_op: &ComplexMatrix) -> Result<ComplexMatrix> {
        check_dim(self.object_dim, object_op.dim())?;
        Ok(tensor(object_op, &ComplexMatrix::identity(self.probe_dim)))
    }
}

/// Heisenberg-picture operators on the composite space after the interaction.
#[derive(Clone, Debug)]
pub struct EvolvedOperators {
    pub x_t: ComplexMatrix,
    pub meter_t: HermitianObservable,
    pub y_t: ComplexMatrix,
    pub mvo_x0: ComplexMatrix,
    pub mvo_xt: ComplexMatrix,
    /// `x_0 (x) I`.
    pub x0_lifted: ComplexMatrix,
    /// `y_0 (x) I`.
    pub y0_lifted: ComplexMatrix,
}

impl EvolvedOperators {
    pub fn big_x_t(&self) -> &ComplexMatrix {
        self.meter_t.matrix()
    }
}

pub fn evolve(model: &IndirectModel, x0: &HermitianObservable, y0: &HermitianObservable) -> Result<EvolvedOperators> {
    let x0_lifted = model.lift(x0.matrix())?;
    let y0_lifted = model.lift(y0.matrix())?;
    let x_t = x0_lifted.conjugate_by(&model.unitary)?;
    let y_t = y0_lifted.conjugate_by(&model.unitary)?;
    let meter_t = model.evolved_meter()?;
    let mean = model.meter_mean();
    let mvo_x0 = apply_spectral(|x| model.value_map_x0.apply(x, mean), &meter_t)?.matrix().clone();
    let mvo_xt = apply_spectral(|x| model.value_map_xt().apply(x, mean), &meter_t)?.matrix().clone();
    Ok(EvolvedOperators { x_t, meter_t, y_t, mvo_x0, mvo_xt, x0_lifted, y0_lifted })
}

/// Two-qubit model whose readout statistics are those of a projective
/// measurement of `sigma_phi = cos(phi) sigma_x + sin(phi) sigma_y`.
///
/// `U = P+ (x) I + P- (x) sigma_x`, probe `|0>`, meter `diag(+1, -1)`, so
/// `|psi>|0>` maps to `P+|psi>|0> + P-|psi>|1>` and `X_t = sigma_phi (x) sigma_z`.
pub fn build_sigma_phi(phi: f64) -> Result<IndirectModel> {
    if !phi.is_finite() {
        return Err(Error::NonFinite { what: "phi" });
    }
    let s_phi = pauli::sigma_phi(phi);
    let id = ComplexMatrix::identity(2);
    let p_plus = (&id + &s_phi).scale_real(0.5);
    let p_minus = (&id - &s_phi).scale_real(0.5);
    let unitary = &tensor(&p_plus, &id) + &tensor(&p_minus, &pauli::sigma_x());
    IndirectModel::new(
        2,
        2,
        unitary,
        PureState::basis(2, 0),
        HermitianObservable::from_real_diagonal(&[1.0, -1.0]),
        ValueMap::Identity,
        None,
    )
}

/// Von Neumann pointer model: `U |x>|k> = |x>|k + x>` in the eigenbasis of
/// `x0`, meter `diag(0, 1, ..., probe_dim - 1)`, values centered on the
/// probe's mean pointer position.
///
/// Every populated pointer level shifted by every eigenvalue of `x0` must stay
/// inside `[0, probe_dim)`.
pub fn build_shift_model(x0: &HermitianObservable, probe_dim: usize, probe_state: PureState) -> Result<IndirectModel> {
    check_dim(probe_dim, probe_state.dim())?;
    let object_dim = x0.dim();
    let mut shifts = Vec::with_capacity(object_dim);
    for &value in x0.eigenvalues() {
        let rounded = value.round();
        if (value - rounded).abs() > DEGENERACY_GAP {
            return Err(Error::NonIntegerSpectrum { value });
        }
        shifts.push(rounded as i64);
    }
    for (level, amp) in probe_state.amplitudes().iter().enumerate() {
        if amp.norm() <= 1e-12 {
            continue;
        }
        for &shift in &shifts {
            let target = level as i64 + shift;
            if target < 0 || target >= probe_dim as i64 {
                return Err(Error::Wraparound { level, shift, probe_dim });
            }
        }
    }

    // Cyclic permutation per eigenvector; only the unpopulated tail can wrap.
    let n = object_dim * probe_dim;
    let mut unitary = ComplexMatrix::zeros(n);
    for (k, &shift) in shifts.iter().enumerate() {
        let projector = ComplexMatrix::outer(&x0.eigenvector(k));
        let p = probe_dim as i64;
        let permutation = ComplexMatrix::from_fn(probe_dim, |row, col| {
            if row as i64 == (col as i64 + shift).rem_euclid(p) {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        unitary = &unitary + &tensor(&projector, &permutation);
    }
    let pointer: Vec<f64> = (0..probe_dim).map(|k| k as f64).collect();
    IndirectModel::new(
        object_dim,
        probe_dim,
        unitary,
        probe_state,
        HermitianObservable::from_real_diagonal(&pointer),
        ValueMap::CenterOnMeterMean,
        None,
    )
}

/// Serializable description of a model, independent of the observables it
/// is used with (the shift family takes its object observable at build time).
#[derive(Clone, Debug, PartialEq)]
pub enum ModelSpec {
    SigmaPhi { phi_degrees: f64 },
    Shift { probe_dim: usize, probe_state: Vec<C64> },
    Explicit { object_dim: usize, probe_dim: usize, unitary: ComplexMatrix, probe_state: Vec<C64>, meter: ComplexMatrix },
}

impl ModelSpec {
    pub fn family_name(&self) -> &'static str {
        match self {
            ModelSpec::SigmaPhi { .. } => "sigma_phi",
            ModelSpec::Shift { .. } => "shift",
            ModelSpec::Explicit { .. } => "explicit",
        }
    }

    /// Builds the model with its family's default value maps.
    pub fn build(&self, x0: &HermitianObservable) -> Result<IndirectModel> {
        match self {
            ModelSpec::SigmaPhi { phi_degrees } => build_sigma_phi(phi_degrees.to_radians()),
            ModelSpec::Shift { probe_dim, probe_state } => {
                build_shift_model(x0, *probe_dim, PureState::new(probe_state.clone())?)
            }
            ModelSpec::Explicit { object_dim, probe_dim, unitary, probe_state, meter } => IndirectModel::new(
                *object_dim,
                *probe_dim,
                unitary.clone(),
                PureState::new(probe_state.clone())?,
                HermitianObservable::new(meter.clone())?,
                ValueMap::Identity,
                None,
            ),
        }
    }
}

/// Replaces the `(x_0)_m` value map by `f` composed after it.
///
/// The `(x_t)_m` map is pinned to its previous value so only `(x_0)_m` changes.
pub fn rescale_mvo(model: &IndirectModel, f: ValueMap) -> IndirectModel {
    let xt = model.value_map_xt().clone();
    let x0 = model.value_map_x0.then(f);
    model.clone().with_value_maps(x0, Some(xt))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Outcome {
    pub value: f64,
    pub probability: f64,
}

/// Distribution of measurement values, from the eigenprojectors of `X_t`
/// in the initial composite state. Equal mapped values are merged; zero
/// probability outcomes are kept. Sorted by value.
pub fn outcome_probabilities(model: &IndirectModel, state: &PureState) -> Result<Vec<Outcome>> {
    let psi = model.composite_state(state)?;
    let meter_t = model.evolved_meter()?;
    let mut out: Vec<Outcome> = Vec::new();
    for cluster in meter_t.clusters() {
        let probability: f64 = cluster
            .indices
            .iter()
            .map(|&k| {
                let v = meter_t.eigenvector(k);
                v.iter().zip(psi.amplitudes()).map(|(a, b)| a.conj() * b).sum::<C64>().norm_sqr()
            })
            .sum();
        let value = model.value_x0(cluster.value);
        match out.iter_mut().find(|o| (o.value - value).abs() <= VALUE_MERGE_TOL) {
            Some(existing) => existing.probability += probability,
            None => out.push(Outcome { value, probability }),
        }
    }
    out.sort_by(|a, b| a.value.total_cmp(&b.value));
    Ok(out)
}

/// Probability of the measurement value `value` (0 when it cannot occur).
pub fn probability_of_value(outcomes: &[Outcome], value: f64) -> f64 {
    outcomes.iter().filter(|o| (o.value - value).abs() <= VALUE_MERGE_TOL).map(|o| o.probability).sum()
}

/// Object state after the readout `readout` of the meter, with its probability.
///
/// Computed in the Schroedinger picture: `(I (x) Pi_X) U |phi_0, xi_0>`,
/// probe traced out, renormalized.
pub fn conditional_post_state(model: &IndirectModel, state: &PureState, readout: f64) -> Result<(MixedState, f64)> {
    let psi = model.composite_state(state)?;
    let evolved = model.unitary.apply(psi.amplitudes())?;
    let cluster = model
        .meter
        .clusters()
        .into_iter()
        .find(|c| (c.value - readout).abs() <= DEGENERACY_GAP)
        .ok_or(Error::UnknownReadout { readout })?;
    let projector = tensor(&ComplexMatrix::identity(model.object_dim), &model.meter.projector(&cluster.indices));
    let projected = projector.apply(&evolved)?;
    let probability: f64 = projected.iter().map(C64::norm_sqr).sum();
    if probability <= MIN_READOUT_PROBABILITY {
        return Err(Error::ZeroProbability { readout, probability });
    }
    let rho = partial_trace_probe(&ComplexMatrix::outer(&projected), model.probe_dim)?.scale_real(1.0 / probability);
    Ok((MixedState::new(rho)?, probability))
}
