//! Error, disturbance and spread statistics for one configuration.
//!
//! All statistics are exact expectations in the initial composite state
//! `|phi_0> (x) |xi_0>`; RMS quantities are computed as vector norms so they
//! are nonnegative by construction.

use crate::error::{Error, Result};
use crate::linalg::{
    commutator, expectation, probe_partial_expectation, spectral_norm, ComplexMatrix, HermitianObservable,
    PureState, C64,
};
use crate::model::{conditional_post_state, evolve, EvolvedOperators, IndirectModel, MIN_READOUT_PROBABILITY};

/// `sigma(x_0)` below this counts as zero spread (random error is defined).
pub const EIGENSTATE_TOL: f64 = 1e-9;
/// Negative round-off under a square root up to this size is clamped.
const ROUNDOFF_TOL: f64 = 1e-12;

/// Model, object state and observable pair with the evolved operators cached.
#[derive(Clone, Debug)]
pub struct Configuration {
    pub model: IndirectModel,
    pub state: PureState,
    pub x0: HermitianObservable,
    pub y0: HermitianObservable,
    pub evolved: EvolvedOperators,
    pub composite: PureState,
}

impl Configuration {
    pub fn new(model: IndirectModel, state: PureState, x0: HermitianObservable, y0: HermitianObservable) -> Result<Self> {
        let composite = model.composite_state(&state)?;
        let evolved = evolve(&model, &x0, &y0)?;
        Ok(Self { model, state, x0, y0, evolved, composite })
    }

    fn composite_mean(&self, a: &ComplexMatrix) -> f64 {
        expectation(&self.composite, a).map(|z| z.re).unwrap_or(f64::NAN)
    }
}

/// `sqrt(v)` with tiny negative round-off clamped to zero.
pub fn clamped_sqrt(v: f64, scale: f64) -> Result<f64> {
    if v >= 0.0 {
        Ok(v.sqrt())
    } else if v >= -ROUNDOFF_TOL * scale.abs().max(1.0) {
        Ok(0.0)
    } else {
        Err(Error::Consistency(format!("negative variance {v:e}")))
    }
}

/// `<psi|A^2|psi>^{1/2}` for Hermitian `A`.
pub fn rms(psi: &PureState, a: &ComplexMatrix) -> Result<f64> {
    let v = a.apply(psi.amplitudes())?;
    Ok(v.iter().map(C64::norm_sqr).sum::<f64>().sqrt())
}

/// Standard deviation `||(A - <A>) psi||`.
pub fn stddev(psi: &PureState, a: &ComplexMatrix) -> Result<f64> {
    let mean = expectation(psi, a)?.re;
    let v = a.apply(psi.amplitudes())?;
    Ok(v.iter()
        .zip(psi.amplitudes())
        .map(|(av, p)| (av - p * mean).norm_sqr())
        .sum::<f64>()
        .sqrt())
}

/// `epsilon(x_0)`: RMS of `(x_0)_m - x_0`.
pub fn error_x0(cfg: &Configuration) -> Result<f64> {
    rms(&cfg.composite, &(&cfg.evolved.mvo_x0 - &cfg.evolved.x0_lifted))
}

/// `epsilon(x_t)`: RMS of `(x_t)_m - x_t`.
pub fn error_xt(cfg: &Configuration) -> Result<f64> {
    rms(&cfg.composite, &(&cfg.evolved.mvo_xt - &cfg.evolved.x_t))
}

/// `eta(y_0)`: RMS of `y_t - y_0`.
pub fn disturbance_y0(cfg: &Configuration) -> Result<f64> {
    rms(&cfg.composite, &(&cfg.evolved.y_t - &cfg.evolved.y0_lifted))
}

/// `sigma((x_0)_m)`.
pub fn mvo_stddev(cfg: &Configuration) -> Result<f64> {
    stddev(&cfg.composite, &cfg.evolved.mvo_x0)
}

/// Bias `Delta = <(x_0)_m> - <x_0>` and the systematic error `|Delta|`.
pub fn systematic_error(cfg: &Configuration) -> Result<(f64, f64)> {
    let delta = cfg.composite_mean(&cfg.evolved.mvo_x0) - expectation(&cfg.state, cfg.x0.matrix())?.re;
    Ok((delta, delta.abs()))
}

/// Random error from `epsilon^2 = epsilon_r^2 + epsilon_s^2`; only defined
/// when the state has no spread in `x_0`.
pub fn random_error(cfg: &Configuration) -> Result<f64> {
    let sigma = stddev(&cfg.state, cfg.x0.matrix())?;
    if sigma > EIGENSTATE_TOL {
        return Err(Error::Precondition(format!(
            "random error needs sigma(x0) = 0, found {sigma:e}"
        )));
    }
    let eps = error_x0(cfg)?;
    let (_, eps_s) = systematic_error(cfg)?;
    clamped_sqrt(eps * eps - eps_s * eps_s, eps * eps)
}

/// Spectral norm of `<xi_0|(x_0)_m - x_0|xi_0>_probe`; zero iff unbiased for every object state.
pub fn unbiasedness_residual_x0(cfg: &Configuration) -> Result<f64> {
    let diff = &cfg.evolved.mvo_x0 - &cfg.evolved.x0_lifted;
    Ok(spectral_norm(&probe_partial_expectation(&diff, cfg.model.probe_state().amplitudes())?))
}

/// Spectral norm of `<xi_0|(x_t)_m - x_t|xi_0>_probe`.
pub fn unbiasedness_residual_xt(cfg: &Configuration) -> Result<f64> {
    let diff = &cfg.evolved.mvo_xt - &cfg.evolved.x_t;
    Ok(spectral_norm(&probe_partial_expectation(&diff, cfg.model.probe_state().amplitudes())?))
}

/// Spectral norm of `<xi_0|[(x_0)_m - x_0, y_0]|xi_0>_probe`, which vanishes
/// for unbiased measurement-value operators.
pub fn commutator_identity_residual(cfg: &Configuration) -> Result<f64> {
    let diff = &cfg.evolved.mvo_x0 - &cfg.evolved.x0_lifted;
    let comm = commutator(&diff, &cfg.evolved.y0_lifted)?;
    Ok(spectral_norm(&probe_partial_expectation(&comm, cfg.model.probe_state().amplitudes())?))
}

/// Spread and error of `x_0` in the object state conditioned on one readout.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConditionalResolution {
    pub readout: f64,
    pub probability: f64,
    /// Value assigned to the readout by the `(x_t)_m` map.
    pub assigned_value: f64,
    pub mean: f64,
    pub eps_cond: f64,
    pub sigma_cond: f64,
}

impl ConditionalResolution {
    /// `eps^2 - sigma^2 - (mean - assigned)^2`.
    pub fn decomposition_residual(&self) -> f64 {
        let bias = self.mean - self.assigned_value;
        self.eps_cond * self.eps_cond - self.sigma_cond * self.sigma_cond - bias * bias
    }
}

/// Moments are taken over the weights of the post-readout state on the
/// eigenbasis of `x_0`, so both spreads are sums of non-negative terms.
pub fn conditional_resolution(cfg: &Configuration, readout: f64) -> Result<ConditionalResolution> {
    let (rho, probability) = conditional_post_state(&cfg.model, &cfg.state, readout)?;
    let x = &cfg.x0;
    let mut weights = Vec::with_capacity(x.dim());
    for k in 0..x.dim() {
        let v = x.eigenvector(k);
        let rv = rho.density().apply(&v)?;
        let w = v.iter().zip(&rv).map(|(a, b)| a.conj() * b).sum::<C64>().re;
        if w < -ROUNDOFF_TOL {
            return Err(Error::Consistency(format!("negative eigenbasis weight {w:e}")));
        }
        weights.push(w.max(0.0));
    }
    let total: f64 = weights.iter().sum();
    let lambda = x.eigenvalues();
    let mean = weights.iter().zip(lambda).map(|(w, l)| w * l).sum::<f64>() / total;
    let moment = |c: f64| weights.iter().zip(lambda).map(|(w, l)| w * (l - c) * (l - c)).sum::<f64>() / total;
    let assigned_value = cfg.model.value_xt(readout);
    Ok(ConditionalResolution {
        readout,
        probability,
        assigned_value,
        mean,
        eps_cond: moment(assigned_value).sqrt(),
        sigma_cond: moment(mean).sqrt(),
    })
}

/// Conditional resolution for every readout whose probability exceeds `min_probability`.
pub fn conditional_resolutions(cfg: &Configuration, min_probability: f64) -> Result<Vec<ConditionalResolution>> {
    let threshold = min_probability.max(MIN_READOUT_PROBABILITY);
    let mut out = Vec::new();
    for readout in cfg.model.readouts() {
        match conditional_resolution(cfg, readout) {
            Ok(r) if r.probability > threshold => out.push(r),
            Ok(_) | Err(Error::ZeroProbability { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricsReport {
    pub eps_x0: f64,
    pub eps_xt: f64,
    pub eta_y0: f64,
    pub sigma_x0: f64,
    pub sigma_y0: f64,
    pub sigma_mvo: f64,
    pub delta: f64,
    pub eps_sys: f64,
    /// Only present when `sigma_x0 <= EIGENSTATE_TOL`.
    pub eps_rand: Option<f64>,
    pub unbias_res_x0: f64,
    pub unbias_res_xt: f64,
}

impl MetricsReport {
    /// `sigma((x_0)_m)^2 - sigma(x_0)^2 - epsilon(x_0)^2`.
    pub fn variance_identity_residual(&self) -> f64 {
        self.sigma_mvo * self.sigma_mvo - self.sigma_x0 * self.sigma_x0 - self.eps_x0 * self.eps_x0
    }
}

pub fn full_report(cfg: &Configuration) -> Result<MetricsReport> {
    let sigma_x0 = stddev(&cfg.state, cfg.x0.matrix())?;
    let (delta, eps_sys) = systematic_error(cfg)?;
    let eps_rand = if sigma_x0 <= EIGENSTATE_TOL { Some(random_error(cfg)?) } else { None };
    let report = MetricsReport {
        eps_x0: error_x0(cfg)?,
        eps_xt: error_xt(cfg)?,
        eta_y0: disturbance_y0(cfg)?,
        sigma_x0,
        sigma_y0: stddev(&cfg.state, cfg.y0.matrix())?,
        sigma_mvo: mvo_stddev(cfg)?,
        delta,
        eps_sys,
        eps_rand,
        unbias_res_x0: unbiasedness_residual_x0(cfg)?,
        unbias_res_xt: unbiasedness_residual_xt(cfg)?,
    };
    let finite = [
        report.eps_x0,
        report.eps_xt,
        report.eta_y0,
        report.sigma_x0,
        report.sigma_y0,
        report.sigma_mvo,
        report.delta,
        report.unbias_res_x0,
        report.unbias_res_xt,
    ];
    if finite.iter().any(|v| !v.is_finite()) {
        return Err(Error::Consistency("non-finite statistic in metrics report".into()));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::tensor;
    use crate::model::{build_shift_model, build_sigma_phi, rescale_mvo, ValueMap};
    use crate::pauli::{named_state, observable, sigma_x, sigma_y};
    use std::f64::consts::{FRAC_PI_2, SQRT_2};

    fn sigma_phi_cfg(phi: f64, state: &str) -> Configuration {
        Configuration::new(
            build_sigma_phi(phi).unwrap(),
            named_state(state).unwrap(),
            observable(sigma_x()),
            observable(sigma_y()),
        )
        .unwrap()
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn spin_example_at_ninety_degrees() {
        let cfg = sigma_phi_cfg(FRAC_PI_2, "+y");
        assert!((error_x0(&cfg).unwrap() - SQRT_2).abs() < 1e-12);
        let r = full_report(&cfg).unwrap();
        assert!(r.sigma_mvo.abs() < 1e-12);
        assert!((r.sigma_x0 - 1.0).abs() < 1e-12);
        assert!(r.eps_rand.is_none());
        // Biased model: the variance identity fails.
        assert!((r.variance_identity_residual() + 3.0).abs() < 1e-12);
    }

    #[test]
    fn error_laws_on_x_eigenstates() {
        for deg in [0.0, 10.0, 40.0, 90.0, 135.0, 180.0] {
            let phi = f64::to_radians(deg);
            let plus = sigma_phi_cfg(phi, "+x");
            let minus = sigma_phi_cfg(phi, "-x");
            assert!((error_x0(&plus).unwrap() - 2.0 * (phi / 2.0).sin()).abs() < 1e-12);
            assert!((systematic_error(&plus).unwrap().0 - (phi.cos() - 1.0)).abs() < 1e-12);
            assert!((systematic_error(&minus).unwrap().0 - (1.0 - phi.cos())).abs() < 1e-12);
            assert!((random_error(&plus).unwrap() - phi.sin().abs()).abs() < 1e-9);
        }
        assert!(random_error(&sigma_phi_cfg(0.0, "+x")).unwrap() < 1e-12);
        assert!(matches!(random_error(&sigma_phi_cfg(0.4, "+z")), Err(Error::Precondition(_))));
    }

    #[test]
    fn zero_detuning_is_exact() {
        for s in ["+x", "-x", "+y", "+z"] {
            let cfg = sigma_phi_cfg(0.0, s);
            assert!(error_x0(&cfg).unwrap() < 1e-12);
        }
        assert!(error_xt(&sigma_phi_cfg(0.0, "+x")).unwrap() < 1e-12);
        assert!(unbiasedness_residual_x0(&sigma_phi_cfg(0.0, "+z")).unwrap() < 1e-12);
        assert!(unbiasedness_residual_x0(&sigma_phi_cfg(FRAC_PI_2, "+z")).unwrap() > 0.5);
    }

    #[test]
    fn disturbance_at_zero_detuning_by_hand() {
        // U = P+x (x) I + P-x (x) X gives y_t = sigma_y (x) X, so
        // eta^2 = <0|(X - I)^2|0> = 2.
        let cfg = sigma_phi_cfg(0.0, "+z");
        let expected = tensor(&sigma_y(), &sigma_x());
        assert!(cfg.evolved.y_t.max_abs_diff(&expected) < 1e-14);
        assert!((disturbance_y0(&cfg).unwrap() - SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn stddev_cases() {
        let z = named_state("+z").unwrap();
        assert!((stddev(&z, &sigma_x()).unwrap() - 1.0).abs() < 1e-15);
        assert!(stddev(&named_state("+x").unwrap(), &sigma_x()).unwrap() < 1e-15);
    }

    #[test]
    fn shift_model_error_is_pointer_spread() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let x0 = HermitianObservable::from_real_diagonal(&[0.0, 1.0]);
        let probe = PureState::new(vec![c(h, 0.0), c(h, 0.0), c(0.0, 0.0)]).unwrap();
        let model = build_shift_model(&x0, 3, probe).unwrap();
        let state = PureState::normalized(vec![c(0.3, 0.1), c(-0.2, 0.9)]).unwrap();
        let cfg = Configuration::new(model, state, x0, observable(sigma_x())).unwrap();
        assert!((error_x0(&cfg).unwrap() - 0.5).abs() < 1e-12);
        assert!(unbiasedness_residual_x0(&cfg).unwrap() < 1e-12);
        assert!(unbiasedness_residual_xt(&cfg).unwrap() < 1e-12);
        let r = full_report(&cfg).unwrap();
        assert!(r.variance_identity_residual().abs() < 1e-12);
        assert!(r.delta.abs() < 1e-12);
    }

    #[test]
    fn shift_model_eigenstate_and_diagonal_disturbance() {
        let x0 = HermitianObservable::from_real_diagonal(&[0.0, 1.0, 2.0]);
        let y0 = HermitianObservable::from_real_diagonal(&[1.0, -2.0, 0.5]);
        let probe = PureState::normalized(vec![c(1.0, 0.0), c(0.5, 0.5), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        let model = build_shift_model(&x0, 4, probe).unwrap();
        let cfg = Configuration::new(model, PureState::basis(3, 1), x0, y0).unwrap();
        assert!(disturbance_y0(&cfg).unwrap() < 1e-12);
        let r = full_report(&cfg).unwrap();
        assert!((r.sigma_mvo - r.eps_x0).abs() < 1e-12);
        assert!((r.eps_rand.unwrap() - r.eps_x0).abs() < 1e-12);
    }

    #[test]
    fn shift_by_constant_moves_bias() {
        let cfg = sigma_phi_cfg(0.6, "+y");
        let (delta, _) = systematic_error(&cfg).unwrap();
        let shifted = Configuration::new(
            rescale_mvo(&cfg.model, ValueMap::Shift(0.25)),
            cfg.state.clone(),
            cfg.x0.clone(),
            cfg.y0.clone(),
        )
        .unwrap();
        assert!((systematic_error(&shifted).unwrap().0 - delta - 0.25).abs() < 1e-12);
    }

    #[test]
    fn conditional_resolution_cases() {
        let cfg = sigma_phi_cfg(0.0, "+x");
        let r = conditional_resolution(&cfg, 1.0).unwrap();
        assert!(r.eps_cond < 1e-10 && r.sigma_cond < 1e-10);
        let cfg = sigma_phi_cfg(0.0, "+z");
        for readout in [1.0, -1.0] {
            let r = conditional_resolution(&cfg, readout).unwrap();
            assert!(r.eps_cond < 1e-10 && r.sigma_cond < 1e-10, "{r:?}");
            assert!(r.decomposition_residual().abs() < 1e-10);
        }
        assert!(matches!(conditional_resolution(&sigma_phi_cfg(0.0, "+x"), -1.0), Err(Error::ZeroProbability { .. })));
        let all = conditional_resolutions(&sigma_phi_cfg(0.7, "+y"), 0.0).unwrap();
        assert_eq!(all.len(), 2);
        for r in all {
            assert!(r.eps_cond >= r.sigma_cond);
        }
    }

    #[test]
    fn clamped_sqrt_contract() {
        assert_eq!(clamped_sqrt(-1e-14, 1.0).unwrap(), 0.0);
        assert!(clamped_sqrt(-1e-6, 1.0).is_err());
        assert_eq!(clamped_sqrt(4.0, 1.0).unwrap(), 2.0);
    }
}
