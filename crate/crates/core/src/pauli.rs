//! Pauli matrices and the named single-qubit states.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::linalg::{ComplexMatrix, HermitianObservable, PureState, C64};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn sigma_x() -> ComplexMatrix {
    ComplexMatrix::from_fn(2, |i, j| if i != j { c(1.0, 0.0) } else { c(0.0, 0.0) })
}

pub fn sigma_y() -> ComplexMatrix {
    ComplexMatrix::from_fn(2, |i, j| match (i, j) {
        (0, 1) => c(0.0, -1.0),
        (1, 0) => c(0.0, 1.0),
        _ => c(0.0, 0.0),
    })
}

pub fn sigma_z() -> ComplexMatrix {
    ComplexMatrix::from_real_diagonal(&[1.0, -1.0])
}

/// `cos(phi) sigma_x + sin(phi) sigma_y`.
pub fn sigma_phi(phi: f64) -> ComplexMatrix {
    &sigma_x().scale_real(phi.cos()) + &sigma_y().scale_real(phi.sin())
}

pub fn observable(m: ComplexMatrix) -> HermitianObservable {
    HermitianObservable::new(m).expect("Pauli matrices are Hermitian")
}

/// Named eigenstates `+x`, `-x`, `+y`, `-y`, `+z`, `-z` in the `sigma_z` basis.
pub fn named_state(name: &str) -> Option<PureState> {
    let h = FRAC_1_SQRT_2;
    let amps = match name {
        "+x" => vec![c(h, 0.0), c(h, 0.0)],
        "-x" => vec![c(h, 0.0), c(-h, 0.0)],
        "+y" => vec![c(h, 0.0), c(0.0, h)],
        "-y" => vec![c(h, 0.0), c(0.0, -h)],
        "+z" => vec![c(1.0, 0.0), c(0.0, 0.0)],
        "-z" => vec![c(0.0, 0.0), c(1.0, 0.0)],
        _ => return None,
    };
    Some(PureState::new(amps).expect("named states are normalized"))
}

/// Named Pauli matrix (`X`, `Y`, `Z`, `I`, also `sigma_x` style).
pub fn named_matrix(name: &str) -> Option<ComplexMatrix> {
    match name {
        "X" | "x" | "sigma_x" => Some(sigma_x()),
        "Y" | "y" | "sigma_y" => Some(sigma_y()),
        "Z" | "z" | "sigma_z" => Some(sigma_z()),
        "I" | "identity" => Some(ComplexMatrix::identity(2)),
        _ => None,
    }
}
