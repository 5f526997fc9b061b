//! Seeded random states, unitaries and models.
//!
//! All randomness flows through [`stream_rng`]: ChaCha20 seeded from a
//! 64-bit seed, with one ChaCha stream per candidate index. Workers that
//! evaluate different candidate indices therefore draw disjoint substreams and
//! results do not depend on evaluation order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, HermitianObservable, PureState, C64};
use crate::model::{IndirectModel, ValueMap};

/// Recorded in search output so runs can be reproduced elsewhere.
pub const RNG_NAME: &str = "chacha20(seed_from_u64(seed), stream=candidate_index)";

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

/// Haar-random pure state: a normalized vector of independent complex Gaussians.
pub fn random_pure_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> PureState {
    assert!(dim >= 1, "state dimension must be positive");
    loop {
        let v: Vec<C64> = (0..dim).map(|_| complex_gaussian(rng)).collect();
        if let Ok(s) = PureState::normalized(v) {
            return s;
        }
    }
}

/// Haar-random unitary: Gram-Schmidt on the columns of a complex Ginibre
/// matrix. Gram-Schmidt yields a positive diagonal in the implied `R`
/// factor, which is the phase fixing that makes the distribution Haar.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    loop {
        let mut columns: Vec<Vec<C64>> = (0..dim).map(|_| (0..dim).map(|_| complex_gaussian(rng)).collect()).collect();
        let mut degenerate = false;
        for k in 0..dim {
            for j in 0..k {
                let proj: C64 = columns[j].iter().zip(&columns[k]).map(|(a, b)| a.conj() * b).sum();
                let qj = columns[j].clone();
                for (x, q) in columns[k].iter_mut().zip(&qj) {
                    *x -= proj * q;
                }
            }
            let norm = columns[k].iter().map(C64::norm_sqr).sum::<f64>().sqrt();
            if norm < 1e-8 {
                degenerate = true;
                break;
            }
            for x in &mut columns[k] {
                *x /= norm;
            }
        }
        if !degenerate {
            return ComplexMatrix::from_fn(dim, |i, j| columns[j][i]);
        }
    }
}

/// Random Hermitian involution (spectrum in `{-1, +1}`, both signs present):
/// the finite-dimensional analogue of a Pauli observable.
pub fn random_pauli_type<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> HermitianObservable {
    assert!(dim >= 2, "a Pauli-type observable needs dimension >= 2");
    let positives = rng.random_range(1..dim);
    let signs: Vec<f64> = (0..dim).map(|k| if k < positives { 1.0 } else { -1.0 }).collect();
    let u = random_unitary(dim, rng);
    let m = ComplexMatrix::from_real_diagonal(&signs).conjugate_by(&u.adjoint()).expect("square");
    crate::linalg::herm_eig(&m).expect("conjugated diagonal is Hermitian")
}

/// Model with a Haar-random interaction, a Haar-random probe state, meter
/// `diag(0, 1, ..., probe_dim - 1)` and identity value map.
pub fn random_model<R: Rng + ?Sized>(object_dim: usize, probe_dim: usize, rng: &mut R) -> Result<IndirectModel> {
    if object_dim < 2 || probe_dim < 2 || object_dim * probe_dim > 16 {
        return Err(Error::Precondition(format!(
            "random models need dims >= 2 with product <= 16, got {object_dim}x{probe_dim}"
        )));
    }
    let unitary = random_unitary(object_dim * probe_dim, rng);
    let probe_state = random_pure_state(probe_dim, rng);
    let pointer: Vec<f64> = (0..probe_dim).map(|k| k as f64).collect();
    IndirectModel::new(
        object_dim,
        probe_dim,
        unitary,
        probe_state,
        HermitianObservable::from_real_diagonal(&pointer),
        ValueMap::Identity,
        None,
    )
}
