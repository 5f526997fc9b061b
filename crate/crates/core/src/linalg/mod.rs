//! Dense complex linear algebra on small Hilbert spaces.

mod eigen;
mod matrix;
mod state;

pub use eigen::{
    apply_spectral, herm_eig, spectral_norm, HermitianObservable, SpectralCluster, DEGENERACY_GAP,
    HERMITIAN_INPUT_TOL, OBSERVABLE_TOL,
};
pub use matrix::{
    adjoint, commutator, complex_close, partial_trace_probe, probe_partial_expectation, tensor, ComplexMatrix, C64,
};
pub use state::{expectation, MixedState, PureState, NORM_TOL};
