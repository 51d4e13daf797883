//! Randomized structural properties of the coupled-model pipeline: the
//! coefficient-tensor conditions, equivalence of every functional with the
//! densely evolved composite state, the Cauchy-Schwarz decoherence bound,
//! and the no-distinguishability case of equal couplings.

use num_complex::Complex64;

use qmeasure::linalg::{evolve_unitary, tensor_product, ComplexMatrix, DensityMatrix};
use qmeasure::random::{
    random_apparatus, random_coupled, random_hermitian, random_state, seeded_rng,
};
use qmeasure::sewell::{
    conditional_expectation, expectation, pointer_probabilities, CoupledModel, SystemModel,
    NULL_WEIGHT,
};

fn trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Complex64 {
    let n = a.dim();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += a.get(i, j) * b.get(j, i);
        }
    }
    acc
}

/// Densely evolved composite state at time t (the independent route).
fn dense_state(model: &CoupledModel, t: f64) -> ComplexMatrix {
    let u = evolve_unitary(&model.hamiltonian(), t).unwrap();
    let phi0 = tensor_product(
        DensityMatrix::pure(model.system().amplitudes()).unwrap().matrix(),
        model.apparatus().initial_state().matrix(),
    );
    &(&u.matrix().adjoint() * &phi0) * u.matrix()
}

#[test]
fn tensor_conditions_hold_for_random_models() {
    let mut rng = seeded_rng(90001);
    let mut checked = 0;
    for trial in 0..100 {
        let n = 2 + trial % 3;
        let dim_k = n.max(2 + (trial * 7) % 15);
        let model = random_coupled(n, dim_k, &mut rng).unwrap();
        for t in [0.0, 0.5, 1.7] {
            let f = model.f_coefficients(t).unwrap();
            let report = f.condition_report();
            assert!(
                report.passes(1e-10),
                "conditions violated at trial {trial}, t={t}: {report:?}"
            );
            checked += 1;
        }
    }
    assert_eq!(checked, 300);
}

#[test]
fn functionals_match_dense_state() {
    let mut rng = seeded_rng(90002);
    for trial in 0..50 {
        let n = 2 + trial % 3;
        let dim_k = n.max(2 + (trial * 5) % 12);
        if n * dim_k > 64 {
            continue;
        }
        let model = random_coupled(n, dim_k, &mut rng).unwrap();
        let t = 0.3 + 0.05 * trial as f64;
        let f = model.f_coefficients(t).unwrap();
        let a = random_hermitian(n, &mut rng);
        let phi_t = dense_state(&model, t);
        let i_h = ComplexMatrix::identity(n);
        let i_k = ComplexMatrix::identity(dim_k);

        let e_f = expectation(model.system(), &f, &a).unwrap();
        let e_dense = trace_product(&phi_t, &tensor_product(a.matrix(), &i_k));
        assert!(
            (e_f - e_dense.re).abs() < 1e-9 && e_dense.im.abs() < 1e-9,
            "expectation mismatch at trial {trial}: {e_f} vs {e_dense}"
        );

        let w = pointer_probabilities(model.system(), &f).unwrap();
        for (alpha, proj) in model.apparatus().macrostates().iter().enumerate() {
            let w_dense = trace_product(&phi_t, &tensor_product(&i_h, proj.matrix()));
            assert!(
                (w[alpha] - w_dense.re).abs() < 1e-9,
                "weight mismatch at trial {trial}, alpha {alpha}"
            );
            assert!(w[alpha] >= -1e-10);

            if w[alpha] > NULL_WEIGHT.max(1e-6) {
                let cond = conditional_expectation(model.system(), &f, &a, alpha).unwrap();
                let cond_dense =
                    trace_product(&phi_t, &tensor_product(a.matrix(), proj.matrix())).re
                        / w_dense.re;
                assert!(
                    (cond - cond_dense).abs() < 1e-9,
                    "conditional mismatch at trial {trial}, alpha {alpha}"
                );
            }
        }
        let total: f64 = w.iter().sum();
        assert!((total - 1.0).abs() < 1e-10);
    }
}

#[test]
fn cross_terms_obey_cauchy_schwarz() {
    let mut rng = seeded_rng(90003);
    for trial in 0..30 {
        let n = 2 + trial % 3;
        let model = random_coupled(n, 6, &mut rng).unwrap();
        let f = model.f_coefficients(1.1).unwrap();
        for r in 0..n {
            for s in 0..n {
                for a in 0..f.macrostate_count() {
                    let lhs = f.get(r, s, a).norm_sqr();
                    let rhs = f.get(r, r, a).re * f.get(s, s, a).re;
                    assert!(lhs <= rhs + 1e-12, "bound broken at ({r},{s},{a})");
                }
            }
        }
    }
}

#[test]
fn equal_couplings_share_one_modulus() {
    // With every level coupled identically, the tensor factorizes as a
    // phase e^{i (e_s - e_r) t} times a level-independent macrostate term,
    // so all moduli agree across (r, s) for each macrostate.
    let mut rng = seeded_rng(90004);
    for trial in 0..20 {
        let n = 2 + trial % 3;
        let dim_k = 3 + trial % 6;
        let energies: Vec<f64> = (0..n).map(|i| 0.3 * i as f64 - 0.4).collect();
        let system = SystemModel::new(energies.clone(), random_state(n, &mut rng)).unwrap();
        let apparatus = random_apparatus(dim_k, n, &mut rng).unwrap();
        let shared = random_hermitian(dim_k, &mut rng);
        let model =
            CoupledModel::build(system, apparatus, vec![shared; n]).unwrap();
        let t = 0.9;
        let f = model.f_coefficients(t).unwrap();
        for a in 0..f.macrostate_count() {
            let base = f.get(0, 0, a);
            for r in 0..n {
                for s in 0..n {
                    assert!(
                        (f.get(r, s, a).norm() - base.norm()).abs() < 1e-10,
                        "modulus varies at trial {trial} ({r},{s},{a})"
                    );
                    let phase = Complex64::from_polar(1.0, (energies[s] - energies[r]) * t);
                    assert!(
                        (f.get(r, s, a) - phase * base).norm() < 1e-10,
                        "phase relation broken at trial {trial} ({r},{s},{a})"
                    );
                }
            }
        }
    }
}
