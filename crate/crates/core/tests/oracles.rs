//! Cross-checks against independent computations: characteristic-polynomial
//! roots, explicit basis enumeration, Born-rule projectors.

use qmeas_core::linalg::{commutator, herm_eig, probe_partial_expectation, tensor};
use qmeas_core::metrics::{error_x0, unbiasedness_residual_x0};
use qmeas_core::model::{build_shift_model, build_sigma_phi, evolve, outcome_probabilities, probability_of_value};
use qmeas_core::pauli::{sigma_phi, sigma_x, sigma_y, sigma_z};
use qmeas_core::random::{random_pure_state, random_unitary, stream_rng};
use qmeas_core::{observable, ComplexMatrix, Configuration, HermitianObservable, PureState, C64};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Characteristic polynomial coefficients (monic, highest degree first) by Faddeev-LeVerrier.
fn char_poly(a: &ComplexMatrix) -> Vec<C64> {
    let n = a.dim();
    let mut coeffs = vec![c(1.0, 0.0)];
    let mut m = ComplexMatrix::zeros(n);
    let id = ComplexMatrix::identity(n);
    for k in 1..=n {
        m = &(a * &m) + &id.scale(coeffs[k - 1]);
        let am = a * &m;
        coeffs.push(am.trace() * (-1.0 / k as f64));
    }
    coeffs
}

fn poly_eval(coeffs: &[C64], z: C64) -> C64 {
    coeffs.iter().fold(c(0.0, 0.0), |acc, &k| acc * z + k)
}

/// Durand-Kerner simultaneous root iteration.
fn poly_roots(coeffs: &[C64]) -> Vec<C64> {
    let n = coeffs.len() - 1;
    let seed = c(0.4, 0.9);
    let mut roots: Vec<C64> = (0..n).map(|k| seed.powu(k as u32) * 3.0).collect();
    for _ in 0..2000 {
        let prev = roots.clone();
        for i in 0..n {
            let mut denom = c(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    denom *= roots[i] - roots[j];
                }
            }
            let step = poly_eval(coeffs, roots[i]) / denom;
            roots[i] -= step;
        }
        let change = roots.iter().zip(&prev).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        if change < 1e-15 {
            break;
        }
    }
    roots
}

fn random_hermitian(dim: usize, seed: u64) -> ComplexMatrix {
    let u = random_unitary(dim, &mut stream_rng(seed, 1));
    let v = random_unitary(dim, &mut stream_rng(seed, 2));
    (&u + &v).hermitian_part()
}

#[test]
fn eigenvalues_match_characteristic_polynomial_roots() {
    for dim in 2..=4 {
        for seed in 0..10 {
            let a = random_hermitian(dim, seed);
            let mut roots: Vec<f64> = poly_roots(&char_poly(&a)).into_iter().map(|z| z.re).collect();
            roots.sort_by(f64::total_cmp);
            let eig = herm_eig(&a).unwrap();
            for (r, e) in roots.iter().zip(eig.eigenvalues()) {
                assert!((r - e).abs() < 1e-9, "dim {dim} seed {seed}: root {r} vs eigenvalue {e}");
            }
            assert!(eig.reconstruct().max_abs_diff(&a) < 1e-10);
            let v = eig.eigenvectors();
            assert!((&v.adjoint() * v).max_abs_diff(&ComplexMatrix::identity(dim)) < 1e-10);
        }
    }
}

#[test]
fn sigma_z_tensor_sigma_z_spectrum() {
    let zz = tensor(&sigma_z(), &sigma_z());
    let mut roots: Vec<f64> = poly_roots(&char_poly(&zz)).into_iter().map(|z| z.re).collect();
    roots.sort_by(f64::total_cmp);
    let eig = herm_eig(&zz).unwrap();
    for (r, e) in roots.iter().zip(eig.eigenvalues()) {
        assert!((r - e).abs() < 1e-7);
    }
    assert_eq!(eig.eigenvalues(), &[-1.0, -1.0, 1.0, 1.0]);
}

#[test]
fn tensor_expectation_on_product_eigenstate() {
    let plus_x = qmeas_core::named_state("+x").unwrap();
    let psi = plus_x.tensor(&PureState::basis(2, 0));
    let e = qmeas_core::linalg::expectation(&psi, &tensor(&sigma_x(), &ComplexMatrix::identity(2))).unwrap();
    assert!((e.re - 1.0).abs() < 1e-15 && e.im.abs() < 1e-15);
}

#[test]
fn evolved_commutator_is_conjugated_commutator() {
    let id = ComplexMatrix::identity(3);
    for seed in 0..5 {
        let u = random_unitary(6, &mut stream_rng(seed, 0));
        let x = tensor(&sigma_x(), &id);
        let y = tensor(&sigma_y(), &id);
        let xt = x.conjugate_by(&u).unwrap();
        let yt = y.conjugate_by(&u).unwrap();
        let lhs = commutator(&xt, &yt).unwrap();
        // explicit U^dagger [x, y] U with plain products
        let rhs = &(&u.adjoint() * &(&(&x * &y) - &(&y * &x))) * &u;
        assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }
}

#[test]
fn sigma_phi_model_matches_born_rule() {
    let mut rng = stream_rng(42, 0);
    for k in 0..40 {
        let phi = k as f64 * 0.17;
        let model = build_sigma_phi(phi).unwrap();
        let psi = random_pure_state(2, &mut rng);
        let id = ComplexMatrix::identity(2);
        let s = sigma_phi(phi);
        let p_plus = qmeas_core::linalg::expectation(&psi, &(&id + &s).scale_real(0.5)).unwrap().re;
        let out = outcome_probabilities(&model, &psi).unwrap();
        assert!((probability_of_value(&out, 1.0) - p_plus).abs() < 1e-12);
        assert!((probability_of_value(&out, -1.0) - (1.0 - p_plus)).abs() < 1e-12);
    }
}

/// `X_t` of the shift model built by enumerating `|v_i> (x) |k>` directly.
fn enumerated_shift_meter(x0: &HermitianObservable, probe_dim: usize) -> ComplexMatrix {
    let d = x0.dim();
    let n = d * probe_dim;
    let mut out = ComplexMatrix::zeros(n);
    for i in 0..d {
        let v = x0.eigenvector(i);
        let shift = x0.eigenvalues()[i].round() as i64;
        for k in 0..probe_dim {
            let pointer = (k as i64 + shift).rem_euclid(probe_dim as i64) as f64;
            let mut basis = vec![c(0.0, 0.0); n];
            for (a, va) in v.iter().enumerate() {
                basis[a * probe_dim + k] = *va;
            }
            out = &out + &ComplexMatrix::outer(&basis).scale_real(pointer);
        }
    }
    out
}

#[test]
fn shift_model_meter_matches_enumeration() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let x0 = observable(sigma_x());
    let probe = PureState::new(vec![c(0.0, 0.0), c(h, 0.0), c(0.0, h), c(0.0, 0.0)]).unwrap();
    let model = build_shift_model(&x0, 4, probe.clone()).unwrap();
    let meter_t = model.evolved_meter().unwrap();
    assert!(meter_t.matrix().max_abs_diff(&enumerated_shift_meter(&x0, 4)) < 1e-12);

    // partial expectation of X_t is x0 + <X_0> I
    let m = probe_partial_expectation(meter_t.matrix(), probe.amplitudes()).unwrap();
    let expected = &sigma_x() + &ComplexMatrix::identity(2).scale_real(1.5);
    assert!(m.max_abs_diff(&expected) < 1e-12);

    let x0 = HermitianObservable::new(ComplexMatrix::from_real_diagonal(&[0.0, 2.0, 1.0])).unwrap();
    let model = build_shift_model(&x0, 5, PureState::basis(5, 1)).unwrap();
    assert!(model.evolved_meter().unwrap().matrix().max_abs_diff(&enumerated_shift_meter(&x0, 5)) < 1e-12);
}

#[test]
fn shift_model_two_level_probe_is_unbiased_with_pointer_spread_error() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let x0 = HermitianObservable::from_real_diagonal(&[0.0, 1.0]);
    let probe = PureState::new(vec![c(h, 0.0), c(h, 0.0), c(0.0, 0.0)]).unwrap();
    let model = build_shift_model(&x0, 3, probe).unwrap();
    let mut rng = stream_rng(9, 0);
    for _ in 0..20 {
        let state = random_pure_state(2, &mut rng);
        let cfg = Configuration::new(model.clone(), state.clone(), x0.clone(), observable(sigma_y())).unwrap();
        assert!(unbiasedness_residual_x0(&cfg).unwrap() < 1e-12);
        // brute force: sum over basis |x, k> of |amp|^2 (k + x - 1/2 - x)^2
        let mut eps_sq = 0.0;
        for (xi, amp) in state.amplitudes().iter().enumerate() {
            for (k, p) in [0.5, 0.5].iter().enumerate() {
                let reading = (k + xi) as f64 - 0.5;
                eps_sq += amp.norm_sqr() * p * (reading - xi as f64).powi(2);
            }
        }
        assert!((error_x0(&cfg).unwrap() - eps_sq.sqrt()).abs() < 1e-12);
        assert!((eps_sq - 0.25).abs() < 1e-12);
    }
}

#[test]
fn sigma_phi_disturbance_by_explicit_algebra() {
    // phi = 0, |+z>: y_t = sigma_y (x) sigma_x, so eta^2 = <0|(sigma_x - I)^2|0> = 2.
    let model = build_sigma_phi(0.0).unwrap();
    let ev = evolve(&model, &observable(sigma_x()), &observable(sigma_y())).unwrap();
    let psi = qmeas_core::named_state("+z").unwrap().tensor(&PureState::basis(2, 0));
    let d = &ev.y_t - &ev.y0_lifted;
    let eta_sq = qmeas_core::linalg::expectation(&psi, &(&d * &d)).unwrap().re;
    assert!((eta_sq - 2.0).abs() < 1e-12);
}

#[test]
fn haar_state_marginals_are_uniform() {
    let dim = 3;
    let draws = 100_000;
    let mut rng = stream_rng(2024, 0);
    let mut sums = vec![0.0; dim];
    let mut sq = vec![0.0; dim];
    for _ in 0..draws {
        let s = random_pure_state(dim, &mut rng);
        for (i, a) in s.amplitudes().iter().enumerate() {
            let p = a.norm_sqr();
            sums[i] += p;
            sq[i] += p * p;
        }
    }
    for i in 0..dim {
        let mean = sums[i] / draws as f64;
        let var = sq[i] / draws as f64 - mean * mean;
        let se = (var / draws as f64).sqrt();
        assert!((mean - 1.0 / dim as f64).abs() < 3.0 * se, "component {i}: mean {mean}, se {se}");
    }
}
