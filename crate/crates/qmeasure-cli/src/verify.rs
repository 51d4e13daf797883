//! Structural verification of the coefficient tensor on a configured
//! model: one named check per condition, a pass/fail line each, and an
//! aggregate verdict. An optional fault injection corrupts the tensor
//! first so the checks themselves can be exercised.

use num_complex::Complex64;

use qmeasure::coleman_hepp::{
    f_coefficients_structured, to_coupled, MagnetizationBands, SpinChainApparatus,
};
use qmeasure::linalg::{evolve_unitary, tensor_product, ComplexMatrix, DensityMatrix};
use qmeasure::random::{random_coupled, random_state, seeded_rng};
use qmeasure::sewell::{
    conditional_expectation, expectation, pointer_probabilities, NULL_WEIGHT,
};

use crate::config::VerifyConfig;
use crate::runner::{build_observable, inject_fault};

#[derive(Clone, Debug, serde::Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub worst: f64,
    pub tolerance: f64,
    pub passed: bool,
}

fn check(name: &'static str, worst: f64, tolerance: f64) -> CheckResult {
    CheckResult {
        name,
        worst,
        tolerance,
        passed: worst <= tolerance,
    }
}

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

/// Run every check; returns the list in a fixed order.
pub fn run_checks(cfg: &VerifyConfig, seed: u64) -> qmeasure::Result<Vec<CheckResult>> {
    let mut rng = seeded_rng(seed);
    let model = random_coupled(cfg.levels, cfg.apparatus_dim, &mut rng)?;
    let observable = build_observable(cfg.levels, "all-ones");

    let mut conjugate_symmetry = 0.0f64;
    let mut diagonal_range = 0.0f64;
    let mut diagonal_sum = 0.0f64;
    let mut positivity = 0.0f64;
    let mut cauchy_schwarz = 0.0f64;
    let mut total_expectation = 0.0f64;
    let mut dense_match = 0.0f64;

    for &t in &cfg.times {
        let mut f = model.f_coefficients(t)?;
        if let Some(fault) = &cfg.inject {
            f = inject_fault(&f, fault);
        }
        let report = f.condition_report();
        conjugate_symmetry = conjugate_symmetry.max(report.conjugate_symmetry);
        diagonal_range = diagonal_range.max(report.diagonal_range.max(report.diagonal_imag));
        diagonal_sum = diagonal_sum.max(report.diagonal_sum);
        positivity = positivity.max(report.positivity);
        cauchy_schwarz = cauchy_schwarz.max(report.cauchy_schwarz);

        // Law of total expectation within the tensor route.
        let w = pointer_probabilities(model.system(), &f)?;
        let e_total = expectation(model.system(), &f, &observable).unwrap_or(f64::NAN);
        let mut recomposed = 0.0;
        for (alpha, &w_a) in w.iter().enumerate() {
            if w_a > NULL_WEIGHT {
                recomposed +=
                    w_a * conditional_expectation(model.system(), &f, &observable, alpha)?;
            }
        }
        total_expectation = total_expectation.max((recomposed - e_total).abs());

        // Independent dense route for the same functionals.
        let u = evolve_unitary(&model.hamiltonian(), t)?;
        let phi0 = tensor_product(
            DensityMatrix::pure(model.system().amplitudes())?.matrix(),
            model.apparatus().initial_state().matrix(),
        );
        let phi_t = &(&u.matrix().adjoint() * &phi0) * u.matrix();
        let i_k = ComplexMatrix::identity(cfg.apparatus_dim);
        let e_dense = trace_product(&phi_t, &tensor_product(observable.matrix(), &i_k)).re;
        dense_match = dense_match.max((e_total - e_dense).abs());
        let i_h = ComplexMatrix::identity(cfg.levels);
        for (alpha, proj) in model.apparatus().macrostates().iter().enumerate() {
            let w_dense = trace_product(&phi_t, &tensor_product(&i_h, proj.matrix())).re;
            dense_match = dense_match.max((w[alpha] - w_dense).abs());
        }
    }

    let mut checks = vec![
        check("conjugate-symmetry", conjugate_symmetry, 1e-10),
        check("diagonal-range", diagonal_range, 1e-10),
        check("diagonal-sum", diagonal_sum, 1e-10),
        check("positivity", positivity, 1e-10),
        check("cauchy-schwarz", cauchy_schwarz, 1e-10),
        check("total-expectation", total_expectation, 1e-9),
        check("dense-functional-match", dense_match, 1e-9),
    ];

    if let Some(sites) = cfg.spin_sites {
        let app = SpinChainApparatus::new(sites, vec![0.4, 1.3])?;
        let bands = MagnetizationBands::majority(sites);
        let t = *cfg.times.last().expect("validated nonempty");
        let structured = f_coefficients_structured(&app, &bands, t)?;
        let dense = to_coupled(&app, &bands, random_state(2, &mut rng))?
            .f_coefficients(t)?;
        let mut worst = 0.0f64;
        for r in 0..2 {
            for s in 0..2 {
                for a in 0..2 {
                    worst = worst.max((structured.get(r, s, a) - dense.get(r, s, a)).norm());
                }
            }
        }
        checks.push(check("structured-dense-match", worst, 1e-10));
    }
    Ok(checks)
}
