//! Contract properties of the spectral approximant and the rational
//! instrument: error bound, commutation, idempotence, refinement
//! monotonicity, scalar binning agreement, and a mediant-walk oracle for
//! the bounded-denominator rational search.

use qmeasure::approximant::{
    approximant, l_measurable, make_partition, rationalize, ContinuumProxy, Rational,
    RepresentativeRule,
};
use qmeasure::linalg::{commutator_norm, spectral_decompose, HermitianOperator, Projector};
use qmeasure::random::{random_hermitian, seeded_rng};
use rand::RngExt;

/// Rescale a random hermitian matrix so its spectrum sits inside [a, b]
/// with a small interior margin.
fn random_proxy(dim: usize, a: f64, b: f64, rng: &mut impl rand::Rng) -> ContinuumProxy {
    let h = random_hermitian(dim, rng);
    let vals = h.eigenvalues().unwrap();
    let (lo, hi) = (vals[0], vals[vals.len() - 1]);
    let margin = 0.02 * (b - a);
    let scale = (b - a - 2.0 * margin) / (hi - lo);
    let mut m = h.matrix().scale(num_complex::Complex64::new(scale, 0.0));
    let shift = a + margin - lo * scale;
    for i in 0..dim {
        let cur = m.get(i, i);
        m.set(i, i, cur + num_complex::Complex64::new(shift, 0.0));
    }
    ContinuumProxy::new(HermitianOperator::new(m).unwrap(), a, b).unwrap()
}

#[test]
fn approximant_contract_on_random_proxies() {
    let mut rng = seeded_rng(50001);
    for trial in 0..40 {
        let dim = 4 + trial % 24;
        let proxy = random_proxy(dim, -1.0, 1.0, &mut rng);
        let epsilon = rng.random_range(0.05..0.5);
        let p = make_partition(-1.0, 1.0, epsilon, RepresentativeRule::Midpoint).unwrap();
        let f = approximant(&proxy, &p).unwrap();

        let diff = proxy.operator().matrix() - f.matrix();
        assert!(
            diff.op_norm().unwrap() <= epsilon + 1e-12,
            "error bound broken at trial {trial}"
        );
        assert!(commutator_norm(proxy.operator(), &f).unwrap() < 1e-10);

        // Spectrum contained in the representative set.
        for value in f.eigenvalues().unwrap() {
            let nearest = p
                .representatives()
                .iter()
                .map(|r| (r - value).abs())
                .fold(f64::INFINITY, f64::min);
            assert!(nearest < 1e-9, "spectral value {value} is not a representative");
        }

        // Idempotence under the same partition.
        let again = approximant(
            &ContinuumProxy::new(f.clone(), -1.0, 1.0).unwrap(),
            &p,
        )
        .unwrap();
        assert!((again.matrix() - f.matrix()).max_abs() < 1e-12);

        // Refinement never hurts.
        let finer = make_partition(-1.0, 1.0, epsilon / 2.0, RepresentativeRule::Midpoint)
            .unwrap();
        let f2 = approximant(&proxy, &finer).unwrap();
        let coarse_err = (proxy.operator().matrix() - f.matrix()).op_norm().unwrap();
        let fine_err = (proxy.operator().matrix() - f2.matrix()).op_norm().unwrap();
        assert!(fine_err <= coarse_err + 1e-12);
    }
}

#[test]
fn approximant_agrees_with_scalar_binning() {
    // Independent scalar oracle: bin each spectral value by walking the
    // cut points, then compare the rebuilt operator entry by entry.
    let mut rng = seeded_rng(50002);
    let proxy = random_proxy(64, -1.0, 1.0, &mut rng);
    let epsilon = 0.1;
    let p = make_partition(-1.0, 1.0, epsilon, RepresentativeRule::Midpoint).unwrap();
    let f = approximant(&proxy, &p).unwrap();

    let mut rebuilt = qmeasure::linalg::ComplexMatrix::zeros(64);
    for (value, projector) in spectral_decompose(proxy.operator()).unwrap() {
        let mut k = 0;
        while k + 1 < p.bin_count() && value >= p.cut(k + 1) {
            k += 1;
        }
        let rep = p.representatives()[k];
        rebuilt = &rebuilt + &projector.matrix().scale(num_complex::Complex64::new(rep, 0.0));
    }
    assert!((f.matrix() - &rebuilt).max_abs() < 1e-12);
}

/// Largest fraction p/q <= x with q <= max_den, and smallest p/q > x, by a
/// plain Stern-Brocot mediant walk (valid for x >= 0).
fn mediant_neighbors(x: f64, max_den: i64) -> ((i64, i64), (i64, i64)) {
    assert!(x >= 0.0);
    let mut left = (0i64, 1i64);
    let mut right = (1i64, 0i64);
    loop {
        let mediant = (left.0 + right.0, left.1 + right.1);
        if mediant.1 > max_den {
            break;
        }
        if mediant.0 as f64 <= x * mediant.1 as f64 {
            left = mediant;
        } else {
            right = mediant;
        }
    }
    (left, right)
}

/// Best in-bin rational by the mediant walk: the constrained optimum is
/// one of the two Farey neighbors of the target, when admissible.
fn mediant_oracle(lo: f64, hi: f64, target: f64, max_den: i64) -> Option<(i64, i64)> {
    let (below, above) = mediant_neighbors(target, max_den);
    let below_ok = below.0 as f64 / below.1 as f64 >= lo;
    let above_ok = above.1 != 0 && (above.0 as f64 / above.1 as f64) < hi;
    let midpoint = 0.5 * (lo + hi);
    match (below_ok, above_ok) {
        (false, false) => None,
        (true, false) => Some(below),
        (false, true) => Some(above),
        (true, true) => {
            let db = target - below.0 as f64 / below.1 as f64;
            let da = above.0 as f64 / above.1 as f64 - target;
            if (db - da).abs() < 1e-15 {
                let mb = (below.0 as f64 / below.1 as f64 - midpoint).abs();
                let ma = (above.0 as f64 / above.1 as f64 - midpoint).abs();
                Some(if mb <= ma { below } else { above })
            } else if db < da {
                Some(below)
            } else {
                Some(above)
            }
        }
    }
}

#[test]
fn rationalize_matches_mediant_oracle() {
    let mut rng = seeded_rng(50003);
    let max_den = 64i64;
    for trial in 0..100 {
        let width: f64 = rng.random_range(1.0 / 60.0..0.05);
        let lo: f64 = rng.random_range(0.0..0.9);
        let b = (lo + width).min(1.0);
        let p = make_partition(lo, b, width * 1.01, RepresentativeRule::Midpoint).unwrap();
        assert_eq!(p.bin_count(), 1);
        let inst = rationalize(&p, max_den).unwrap();
        let got = inst.readouts()[0];
        let (bin_lo, bin_hi) = p.bin(0);
        let target = p.representatives()[0];

        // In-bin, and within 1/max_den of the representative.
        let value = got.to_f64();
        assert!(value >= bin_lo && value < bin_hi, "trial {trial}: {got} escapes bin");
        assert!((value - target).abs() <= 1.0 / max_den as f64);

        let (op, oq) = mediant_oracle(bin_lo, bin_hi, target, max_den)
            .expect("oracle found no admissible rational");
        let oracle = Rational::new(op, oq).unwrap();
        assert!(
            (got.to_f64() - oracle.to_f64()).abs() < 1e-12,
            "trial {trial}: got {got}, oracle {oracle}"
        );
    }
}

#[test]
fn rationalize_keeps_bins_distinct_across_a_partition() {
    let mut rng = seeded_rng(50004);
    for _ in 0..20 {
        // Bin width divides the range exactly so every bin is wide enough
        // for denominator 64; the starved case is tested separately.
        let bins = rng.random_range(10..=60);
        let epsilon = 2.0 / bins as f64;
        let p = make_partition(-1.0, 1.0, epsilon, RepresentativeRule::Midpoint).unwrap();
        let inst = rationalize(&p, 64).unwrap();
        assert_eq!(inst.state_count(), p.bin_count());
        for (k, r) in inst.readouts().iter().enumerate() {
            let (lo, hi) = p.bin(k);
            let v = r.to_f64();
            assert!(v >= lo && v < hi);
        }
        for pair in inst.readouts().windows(2) {
            assert!(pair[0].to_f64() < pair[1].to_f64());
        }
    }
}

#[test]
fn common_basis_algebra_is_abelian() {
    let mut rng = seeded_rng(50005);
    let dim = 5;
    let basis = {
        // Orthonormal rank-1 projectors from a random hermitian eigenbasis.
        let spectrum = spectral_decompose(&random_hermitian(dim, &mut rng)).unwrap();
        spectrum
            .into_iter()
            .map(|(_, p)| p)
            .collect::<Vec<Projector>>()
    };
    if basis.len() < dim {
        return; // random degeneracy (vanishing probability)
    }
    let ops: Vec<_> = (0..4)
        .map(|_| {
            let values: Vec<f64> = (0..dim).map(|_| rng.random_range(-3.0..3.0)).collect();
            l_measurable(&values, basis.clone()).unwrap()
        })
        .collect();
    for (i, a) in ops.iter().enumerate() {
        for b in ops.iter().skip(i + 1) {
            assert!(a.commutator_with(b).unwrap() <= 1e-12);
        }
    }
}
