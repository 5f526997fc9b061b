use super::eigen::herm_eig;
use super::matrix::{ComplexMatrix, C64};
use crate::error::{check_dim, Error, Result};

/// Accepted deviation of a pure state's norm from 1.
pub const NORM_TOL: f64 = 1e-12;

/// Normalized state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: Vec<C64>,
}

impl PureState {
    /// Validates normalization without rescaling, so stored amplitudes are kept bit-for-bit.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite { what: "state" });
        }
        let norm = norm(&amplitudes);
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { amplitudes })
    }

    /// Rescales an arbitrary nonzero vector to unit norm.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        let n = norm(&amplitudes);
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::NotNormalized { norm: n });
        }
        Self::new(amplitudes.into_iter().map(|z| z / n).collect())
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim, "basis index out of range");
        let mut amplitudes = vec![C64::new(0.0, 0.0); dim];
        amplitudes[index] = C64::new(1.0, 0.0);
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    /// `|self> (x) |other>`, object-major.
    pub fn tensor(&self, other: &PureState) -> PureState {
        let amplitudes = self
            .amplitudes
            .iter()
            .flat_map(|a| other.amplitudes.iter().map(move |b| a * b))
            .collect();
        PureState { amplitudes }
    }

    pub fn inner(&self, other: &PureState) -> Result<C64> {
        check_dim(self.dim(), other.dim())?;
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum())
    }

    /// Multiplies every amplitude by `e^{i theta}`.
    pub fn with_global_phase(&self, theta: f64) -> PureState {
        let phase = C64::from_polar(1.0, theta);
        PureState { amplitudes: self.amplitudes.iter().map(|z| z * phase).collect() }
    }
}

pub(crate) fn norm(v: &[C64]) -> f64 {
    v.iter().map(C64::norm_sqr).sum::<f64>().sqrt()
}

/// `<psi|A|psi>`.
pub fn expectation(psi: &PureState, a: &ComplexMatrix) -> Result<C64> {
    let av = a.apply(&psi.amplitudes)?;
    Ok(psi.amplitudes.iter().zip(&av).map(|(x, y)| x.conj() * y).sum())
}

/// Density matrix on a finite-dimensional space.
#[derive(Clone, Debug)]
pub struct MixedState {
    rho: ComplexMatrix,
}

impl MixedState {
    pub fn new(rho: ComplexMatrix) -> Result<Self> {
        let deviation = rho.hermiticity_defect();
        if deviation > 1e-12 {
            return Err(Error::InvalidDensity { reason: format!("not Hermitian (deviation {deviation:e})") });
        }
        let trace = rho.trace();
        if (trace.re - 1.0).abs() > 1e-10 || trace.im.abs() > 1e-10 {
            return Err(Error::InvalidDensity { reason: format!("trace {trace} differs from 1") });
        }
        let spectrum = herm_eig(&rho)?;
        if let Some(&lowest) = spectrum.eigenvalues().first() {
            if lowest < -1e-10 {
                return Err(Error::InvalidDensity { reason: format!("negative eigenvalue {lowest}") });
            }
        }
        Ok(Self { rho: rho.hermitian_part() })
    }

    pub fn from_pure(psi: &PureState) -> Self {
        Self { rho: ComplexMatrix::outer(psi.amplitudes()) }
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    pub fn density(&self) -> &ComplexMatrix {
        &self.rho
    }

    /// `Tr(rho A)`; real part only, which is exact for Hermitian `A`.
    pub fn expectation(&self, a: &ComplexMatrix) -> Result<f64> {
        check_dim(self.dim(), a.dim())?;
        Ok(self.rho.matmul(a)?.trace().re)
    }

    pub fn purity(&self) -> f64 {
        (&self.rho * &self.rho).trace().re
    }
}
