//! Discrete measurable approximants of continuous-spectrum observables,
//! finite instruments with exact rational readouts, and laboratory
//! operators assembled from rank-1 projectors.
//!
//! A continuous spectrum is represented by a fine-grid proxy operator whose
//! spectrum lies in a declared range. A partition of that range with bin
//! width epsilon and one representative per bin turns the proxy into an
//! operator with finitely many spectral values; measuring the approximant
//! exactly is an epsilon-accurate measurement of the proxy.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    commutator_norm, spectral_decompose, ComplexMatrix, HermitianOperator, Projector,
    TOL_ALGEBRAIC,
};

/// Fine-grid stand-in for an operator with continuous spectrum.
#[derive(Clone, Debug)]
pub struct ContinuumProxy {
    operator: HermitianOperator,
    range: (f64, f64),
}

impl ContinuumProxy {
    /// Wrap an operator after checking its spectrum lies inside `[a, b]`.
    pub fn new(operator: HermitianOperator, a: f64, b: f64) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() || b <= a {
            return Err(Error::InvalidPartition(format!(
                "range [{a}, {b}] is empty"
            )));
        }
        let vals = operator.eigenvalues()?;
        let lo = vals.first().copied().unwrap_or(a);
        let hi = vals.last().copied().unwrap_or(a);
        let slack = 1e-12 * (1.0 + hi.abs().max(lo.abs()));
        if lo < a - slack || hi > b + slack {
            return Err(Error::SpectrumOutOfRange { lo, hi, a, b });
        }
        Ok(Self { operator, range: (a, b) })
    }

    #[inline]
    pub fn grid_dim(&self) -> usize {
        self.operator.dim()
    }

    #[inline]
    pub fn operator(&self) -> &HermitianOperator {
        &self.operator
    }

    #[inline]
    pub fn range(&self) -> (f64, f64) {
        self.range
    }
}

/// How bin representatives are chosen when building a [`Partition`].
#[derive(Clone, Debug)]
pub enum RepresentativeRule {
    /// Midpoint of each (truncated) bin.
    Midpoint,
    /// Left cut point of each bin.
    Left,
    /// Explicit list, one value per bin, each inside its bin.
    Custom(Vec<f64>),
}

/// Uniform spectral grid over `[a, b]`: cuts at `a + k*epsilon`, half-open
/// bins, the last bin truncated at `b`, and one representative inside each
/// bin. A value sitting exactly on a cut belongs to the bin on its right;
/// the top endpoint `b` belongs to the last bin.
#[derive(Clone, Debug)]
pub struct Partition {
    a: f64,
    b: f64,
    epsilon: f64,
    bin_count: usize,
    representatives: Vec<f64>,
}

/// Build a partition of `[a, b]` with bin width `epsilon`.
pub fn make_partition(
    a: f64,
    b: f64,
    epsilon: f64,
    rule: RepresentativeRule,
) -> Result<Partition> {
    if !epsilon.is_finite() || epsilon <= 0.0 {
        return Err(Error::InvalidPartition(format!(
            "bin width must be positive, got {epsilon}"
        )));
    }
    if !a.is_finite() || !b.is_finite() || b <= a {
        return Err(Error::InvalidPartition(format!("range [{a}, {b}] is empty")));
    }
    let mut bin_count = ((b - a) / epsilon).ceil() as usize;
    // A ceiling artifact can announce a bin that starts at or past b.
    while bin_count > 1 && a + (bin_count - 1) as f64 * epsilon >= b {
        bin_count -= 1;
    }
    let cut = |k: usize| a + k as f64 * epsilon;
    let upper = |k: usize| if k + 1 == bin_count { b } else { cut(k + 1).min(b) };
    let representatives = match rule {
        RepresentativeRule::Midpoint => (0..bin_count)
            .map(|k| 0.5 * (cut(k) + upper(k)))
            .collect(),
        RepresentativeRule::Left => (0..bin_count).map(cut).collect(),
        RepresentativeRule::Custom(reps) => {
            if reps.len() != bin_count {
                return Err(Error::InvalidPartition(format!(
                    "expected {bin_count} representatives, got {}",
                    reps.len()
                )));
            }
            for (k, &rep) in reps.iter().enumerate() {
                if rep < cut(k) || rep >= upper(k) {
                    return Err(Error::InvalidPartition(format!(
                        "representative {rep} escapes bin {k} = [{}, {})",
                        cut(k),
                        upper(k)
                    )));
                }
            }
            reps
        }
    };
    Ok(Partition {
        a,
        b,
        epsilon,
        bin_count,
        representatives,
    })
}

impl Partition {
    #[inline]
    pub fn bin_count(&self) -> usize {
        self.bin_count
    }

    #[inline]
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    #[inline]
    pub fn range(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    #[inline]
    pub fn representatives(&self) -> &[f64] {
        &self.representatives
    }

    /// Cut point `a + k*epsilon`.
    pub fn cut(&self, k: usize) -> f64 {
        self.a + k as f64 * self.epsilon
    }

    /// Half-open extent of bin `k` (the last bin is truncated at `b`).
    pub fn bin(&self, k: usize) -> (f64, f64) {
        let hi = if k + 1 == self.bin_count {
            self.b
        } else {
            self.cut(k + 1).min(self.b)
        };
        (self.cut(k), hi)
    }

    /// Bin index of a value in `[a, b]`; cut points bin rightward, `b`
    /// lands in the last bin.
    pub fn bin_of(&self, x: f64) -> Result<usize> {
        let slack = 1e-12 * (1.0 + x.abs());
        if x < self.a - slack || x > self.b + slack {
            return Err(Error::InvalidPartition(format!(
                "value {x} outside partition range [{}, {}]",
                self.a, self.b
            )));
        }
        let mut k = (((x - self.a) / self.epsilon).floor() as isize)
            .clamp(0, self.bin_count as isize - 1) as usize;
        while k + 1 < self.bin_count && x >= self.cut(k + 1) {
            k += 1;
        }
        while k > 0 && x < self.cut(k) {
            k -= 1;
        }
        Ok(k)
    }
}

/// Reduced fraction with positive denominator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Rational {
    num: i64,
    den: i64,
}

impl Rational {
    pub fn new(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidModel("rational with zero denominator".into()));
        }
        let sign = if den < 0 { -1 } else { 1 };
        let g = gcd(num.unsigned_abs(), den.unsigned_abs()) as i64;
        Ok(Self {
            num: sign * num / g,
            den: sign * den / g,
        })
    }

    #[inline]
    pub fn numerator(&self) -> i64 {
        self.num
    }

    #[inline]
    pub fn denominator(&self) -> i64 {
        self.den
    }

    #[inline]
    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.max(1)
}

/// A finite instrument: one exact rational readout per internal state.
#[derive(Clone, Debug)]
pub struct QInstrument {
    readouts: Vec<Rational>,
}

impl QInstrument {
    #[inline]
    pub fn state_count(&self) -> usize {
        self.readouts.len()
    }

    #[inline]
    pub fn readouts(&self) -> &[Rational] {
        &self.readouts
    }
}

/// The measurable approximant: every spectral value of the proxy is
/// replaced by the representative of its bin. The result commutes with the
/// proxy and differs from it by at most `epsilon` in operator norm.
pub fn approximant(proxy: &ContinuumProxy, p: &Partition) -> Result<HermitianOperator> {
    let (a, b) = proxy.range();
    let slack = 1e-12 * (1.0 + a.abs().max(b.abs()));
    if p.range().0 > a + slack || p.range().1 < b - slack {
        return Err(Error::InvalidPartition(format!(
            "partition range [{}, {}] does not cover proxy range [{a}, {b}]",
            p.range().0,
            p.range().1
        )));
    }
    let components = spectral_decompose(proxy.operator())?;
    let dim = proxy.grid_dim();
    let mut out = ComplexMatrix::zeros(dim);
    for (value, projector) in components {
        let rep = p.representatives()[p.bin_of(value)?];
        out = &out + &projector.matrix().scale(Complex64::new(rep, 0.0));
    }
    HermitianOperator::new(out)
}

/// Replace each representative by the nearest rational with denominator at
/// most `max_denominator` that still lies inside its bin. Ties break toward
/// the bin midpoint.
pub fn rationalize(p: &Partition, max_denominator: i64) -> Result<QInstrument> {
    if max_denominator < 1 {
        return Err(Error::InvalidModel(format!(
            "max_denominator must be >= 1, got {max_denominator}"
        )));
    }
    let mut readouts = Vec::with_capacity(p.bin_count());
    for k in 0..p.bin_count() {
        let (lo, hi) = p.bin(k);
        let target = p.representatives()[k];
        let midpoint = 0.5 * (lo + hi);
        let best = best_rational_in_bin(lo, hi, target, midpoint, max_denominator).ok_or(
            Error::NoAdmissibleRational {
                bin: k,
                max_denominator,
            },
        )?;
        readouts.push(best);
    }
    Ok(QInstrument { readouts })
}

/// Bounded-denominator best approximation constrained to `[lo, hi)`:
/// for every denominator q, the admissible numerator closest to the target
/// is tried; the global winner minimizes |target - p/q|, with ties broken
/// toward `midpoint` and then toward the smaller denominator.
fn best_rational_in_bin(
    lo: f64,
    hi: f64,
    target: f64,
    midpoint: f64,
    max_denominator: i64,
) -> Option<Rational> {
    let mut best: Option<(Rational, f64, f64)> = None;
    for den in 1..=max_denominator {
        let d = den as f64;
        let mut p_lo = (lo * d).ceil() as i64;
        while (p_lo as f64) / d < lo {
            p_lo += 1;
        }
        while p_lo > i64::MIN && ((p_lo - 1) as f64) / d >= lo {
            p_lo -= 1;
        }
        let mut p_hi = (hi * d).floor() as i64;
        while (p_hi as f64) / d >= hi {
            p_hi -= 1;
        }
        while p_hi < i64::MAX && ((p_hi + 1) as f64) / d < hi {
            p_hi += 1;
        }
        if p_lo > p_hi {
            continue;
        }
        let cand = ((target * d).round() as i64).clamp(p_lo, p_hi);
        for p in [cand - 1, cand, cand + 1] {
            if p < p_lo || p > p_hi {
                continue;
            }
            let value = p as f64 / d;
            let dist = (value - target).abs();
            let mid_dist = (value - midpoint).abs();
            let better = match &best {
                None => true,
                Some((_, bd, bm)) => {
                    dist < *bd - 0.0 && (dist - bd).abs() > 1e-15 * (1.0 + dist)
                        || ((dist - bd).abs() <= 1e-15 * (1.0 + dist) && mid_dist < *bm)
                }
            };
            if better {
                best = Some((Rational::new(p, den).ok()?, dist, mid_dist));
            }
        }
    }
    best.map(|(r, _, _)| r)
}

/// Resolution/reliability trade-off: resolving `[a, b]` to within `epsilon`
/// needs `levels = ceil((b-a)/epsilon)` distinguishable readings, and an
/// intensive pointer on an N-particle apparatus misreads with exponent
/// N / levels^2. The `reliable` verdict uses the documented convention
/// `levels <= sqrt(N) / 3`.
#[derive(Clone, Copy, Debug)]
pub struct TradeoffReport {
    pub levels: usize,
    pub reliable: bool,
    pub risk_exponent: f64,
}

pub fn tradeoff_report(range: (f64, f64), epsilon: f64, apparatus_size: usize) -> Result<TradeoffReport> {
    let (a, b) = range;
    if !epsilon.is_finite() || epsilon <= 0.0 {
        return Err(Error::InvalidPartition(format!(
            "bin width must be positive, got {epsilon}"
        )));
    }
    if !a.is_finite() || !b.is_finite() || b <= a || apparatus_size == 0 {
        return Err(Error::InvalidModel(format!(
            "bad trade-off inputs: range [{a}, {b}], apparatus size {apparatus_size}"
        )));
    }
    let levels = ((b - a) / epsilon).ceil() as usize;
    let n = apparatus_size as f64;
    let risk_exponent = n / (levels as f64 * levels as f64);
    let reliable = (levels as f64) <= n.sqrt() / 3.0;
    Ok(TradeoffReport {
        levels,
        reliable,
        risk_exponent,
    })
}

/// Laboratory-measurable operator: finitely many values carried by
/// orthogonal rank-1 projectors.
#[derive(Clone, Debug)]
pub struct LMeasurableOperator {
    values: Vec<f64>,
    projectors: Vec<Projector>,
    operator: HermitianOperator,
}

impl LMeasurableOperator {
    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn projectors(&self) -> &[Projector] {
        &self.projectors
    }

    #[inline]
    pub fn operator(&self) -> &HermitianOperator {
        &self.operator
    }

    /// Commutator norm against another laboratory operator.
    pub fn commutator_with(&self, other: &LMeasurableOperator) -> Result<f64> {
        commutator_norm(&self.operator, &other.operator)
    }
}

/// Assemble `sum_j values[j] * projectors[j]` from an orthogonal family of
/// rank-1 projectors.
pub fn l_measurable(values: &[f64], projectors: Vec<Projector>) -> Result<LMeasurableOperator> {
    if values.len() != projectors.len() {
        return Err(Error::DimensionMismatch {
            context: "l_measurable",
            expected: projectors.len(),
            found: values.len(),
        });
    }
    if projectors.is_empty() {
        return Err(Error::InvalidModel("empty projector family".into()));
    }
    let dim = projectors[0].dim();
    for (j, proj) in projectors.iter().enumerate() {
        if proj.dim() != dim {
            return Err(Error::DimensionMismatch {
                context: "l_measurable projector dim",
                expected: dim,
                found: proj.dim(),
            });
        }
        if proj.rank() != 1 {
            return Err(Error::NotProjector {
                detail: format!("projector {j} has rank {}, need rank 1", proj.rank()),
            });
        }
    }
    for (i, pi) in projectors.iter().enumerate() {
        for pj in projectors.iter().skip(i + 1) {
            let overlap = (pi.matrix() * pj.matrix()).max_abs();
            if overlap > TOL_ALGEBRAIC {
                return Err(Error::NotProjector {
                    detail: format!("projector family not orthogonal (overlap {overlap:.3e})"),
                });
            }
        }
    }
    let mut out = ComplexMatrix::zeros(dim);
    for (&value, proj) in values.iter().zip(projectors.iter()) {
        out = &out + &proj.matrix().scale(Complex64::new(value, 0.0));
    }
    Ok(LMeasurableOperator {
        values: values.to_vec(),
        projectors,
        operator: HermitianOperator::new(out)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midpoint_partition_on_unit_interval() {
        let p = make_partition(0.0, 1.0, 0.5, RepresentativeRule::Midpoint).unwrap();
        assert_eq!(p.bin_count(), 2);
        assert_eq!(p.representatives(), &[0.25, 0.75]);
        assert_eq!(p.cut(0), 0.0);
        assert_eq!(p.cut(1), 0.5);
        assert_eq!(p.cut(2), 1.0);
    }

    #[test]
    fn degenerate_single_bin() {
        let p = make_partition(0.0, 1.0, 1.0, RepresentativeRule::Midpoint).unwrap();
        assert_eq!(p.bin_count(), 1);
        assert_eq!(p.representatives(), &[0.5]);
    }

    #[test]
    fn truncated_last_bin() {
        let p = make_partition(0.0, 1.0, 0.3, RepresentativeRule::Midpoint).unwrap();
        assert_eq!(p.bin_count(), 4);
        let (lo, hi) = p.bin(3);
        assert!((lo - 0.9).abs() < 1e-12);
        assert_eq!(hi, 1.0);
        let rep = p.representatives()[3];
        assert!(rep >= lo && rep < hi);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(make_partition(0.0, 1.0, 0.0, RepresentativeRule::Midpoint).is_err());
        assert!(make_partition(0.0, 1.0, -0.1, RepresentativeRule::Midpoint).is_err());
        assert!(make_partition(1.0, 0.0, 0.1, RepresentativeRule::Midpoint).is_err());
        // Custom representative outside its bin.
        assert!(make_partition(
            0.0,
            1.0,
            0.5,
            RepresentativeRule::Custom(vec![0.25, 1.5])
        )
        .is_err());
    }

    #[test]
    fn cut_values_bin_rightward() {
        let p = make_partition(0.0, 1.0, 0.25, RepresentativeRule::Midpoint).unwrap();
        assert_eq!(p.bin_of(0.0).unwrap(), 0);
        assert_eq!(p.bin_of(0.25).unwrap(), 1);
        assert_eq!(p.bin_of(0.5).unwrap(), 2);
        assert_eq!(p.bin_of(0.75).unwrap(), 3);
        assert_eq!(p.bin_of(1.0).unwrap(), 3); // top endpoint: last bin
    }

    #[test]
    fn eight_point_grid_worked_example() {
        // Spectrum j/8 on [0, 1], bins of width 1/4, midpoint reps: values
        // map to {1/8, 3/8, 5/8, 7/8} and the error is exactly 1/8.
        let diag: Vec<f64> = (0..8).map(|j| j as f64 / 8.0).collect();
        let proxy =
            ContinuumProxy::new(HermitianOperator::from_real_diag(&diag), 0.0, 1.0).unwrap();
        let p = make_partition(0.0, 1.0, 0.25, RepresentativeRule::Midpoint).unwrap();
        let f = approximant(&proxy, &p).unwrap();
        for j in 0..diag.len() {
            let expected = [0.125, 0.125, 0.375, 0.375, 0.625, 0.625, 0.875, 0.875][j];
            assert_eq!(f.matrix().get(j, j).re, expected);
        }
        let diff = &proxy.operator().matrix().clone() - f.matrix();
        assert_eq!(diff.op_norm().unwrap(), 0.125);
    }

    #[test]
    fn spectrum_already_on_representatives_is_fixed() {
        let diag = [0.25, 0.75];
        let proxy =
            ContinuumProxy::new(HermitianOperator::from_real_diag(&diag), 0.0, 1.0).unwrap();
        let p = make_partition(0.0, 1.0, 0.5, RepresentativeRule::Midpoint).unwrap();
        let f = approximant(&proxy, &p).unwrap();
        assert!((f.matrix() - proxy.operator().matrix()).max_abs() < 1e-15);
    }

    #[test]
    fn proxy_rejects_escaping_spectrum() {
        let op = HermitianOperator::from_real_diag(&[0.0, 1.5]);
        assert!(matches!(
            ContinuumProxy::new(op, 0.0, 1.0),
            Err(Error::SpectrumOutOfRange { .. })
        ));
    }

    #[test]
    fn rational_reduction_and_display() {
        let r = Rational::new(6, -4).unwrap();
        assert_eq!(r.numerator(), -3);
        assert_eq!(r.denominator(), 2);
        assert_eq!(r.to_string(), "-3/2");
    }

    #[test]
    fn already_rational_representatives_are_kept() {
        let p = make_partition(
            0.0,
            1.0,
            0.5,
            RepresentativeRule::Custom(vec![0.25, 0.75]),
        )
        .unwrap();
        let inst = rationalize(&p, 1000).unwrap();
        assert_eq!(inst.readouts()[0], Rational::new(1, 4).unwrap());
        assert_eq!(inst.readouts()[1], Rational::new(3, 4).unwrap());
    }

    #[test]
    fn exact_third_inside_bin() {
        let p = make_partition(
            0.3,
            0.4,
            0.1,
            RepresentativeRule::Custom(vec![1.0 / 3.0]),
        )
        .unwrap();
        let inst = rationalize(&p, 3).unwrap();
        assert_eq!(inst.readouts()[0], Rational::new(1, 3).unwrap());
    }

    #[test]
    fn starved_denominator_bound_errors() {
        // Bin (0.30, 0.32): denominators <= 3 offer only 1/3 = 0.333...,
        // which is outside; no admissible rational exists.
        let p = make_partition(
            0.30,
            0.32,
            0.02,
            RepresentativeRule::Midpoint,
        )
        .unwrap();
        assert!(matches!(
            rationalize(&p, 3),
            Err(Error::NoAdmissibleRational { .. })
        ));
        assert!(rationalize(&p, 100).is_ok());
    }

    #[test]
    fn tradeoff_examples() {
        let r = tradeoff_report((0.0, 1.0), 0.5, 1_000_000).unwrap();
        assert_eq!(r.levels, 2);
        assert!(r.reliable);
        assert!((r.risk_exponent - 250_000.0).abs() < 1e-6);

        // levels = sqrt(N) exactly: risk exponent 1, not reliable.
        let r = tradeoff_report((0.0, 1.0), 1.0 / 100.0, 10_000).unwrap();
        assert_eq!(r.levels, 100);
        assert!((r.risk_exponent - 1.0).abs() < 1e-12);
        assert!(!r.reliable);

        let r = tradeoff_report((0.0, 1.0), 1e-3, 10_000).unwrap();
        assert_eq!(r.levels, 1000);
        assert!((r.risk_exponent - 0.01).abs() < 1e-12);
        assert!(!r.reliable);
    }

    #[test]
    fn l_measurable_on_coordinate_basis_is_diagonal() {
        let projs: Vec<Projector> = (0..3)
            .map(|j| Projector::from_basis_indices(3, &[j]).unwrap())
            .collect();
        let op = l_measurable(&[1.0, 2.0, 3.0], projs).unwrap();
        let expect = HermitianOperator::from_real_diag(&[1.0, 2.0, 3.0]);
        assert!((op.operator().matrix() - expect.matrix()).max_abs() < 1e-15);
    }

    #[test]
    fn common_basis_operators_commute() {
        let projs: Vec<Projector> = (0..3)
            .map(|j| Projector::from_basis_indices(3, &[j]).unwrap())
            .collect();
        let q = l_measurable(&[1.0, 2.0, 3.0], projs.clone()).unwrap();
        let q2 = l_measurable(&[-0.5, 4.0, 0.25], projs).unwrap();
        assert!(q.commutator_with(&q2).unwrap() < 1e-12);
    }

    #[test]
    fn rotated_basis_operators_do_not_commute() {
        // Coordinate basis versus the discrete-Fourier-rotated basis.
        let dim = 3;
        let coord: Vec<Projector> = (0..dim)
            .map(|j| Projector::from_basis_indices(dim, &[j]).unwrap())
            .collect();
        let fourier: Vec<Projector> = (0..dim)
            .map(|k| {
                let col: Vec<Complex64> = (0..dim)
                    .map(|j| {
                        Complex64::from_polar(
                            1.0 / (dim as f64).sqrt(),
                            2.0 * std::f64::consts::PI * (j * k) as f64 / dim as f64,
                        )
                    })
                    .collect();
                Projector::from_orthonormal_columns(&[col]).unwrap()
            })
            .collect();
        let q = l_measurable(&[1.0, 2.0, 3.0], coord).unwrap();
        let q2 = l_measurable(&[1.0, 2.0, 3.0], fourier).unwrap();
        assert!(q.commutator_with(&q2).unwrap() > 0.1);
    }

    #[test]
    fn rank_one_and_orthogonality_enforced() {
        let rank2 = Projector::from_basis_indices(3, &[0, 1]).unwrap();
        let rank1 = Projector::from_basis_indices(3, &[2]).unwrap();
        assert!(l_measurable(&[1.0, 2.0], vec![rank2, rank1.clone()]).is_err());
        let overlapping = Projector::from_basis_indices(3, &[2]).unwrap();
        assert!(l_measurable(&[1.0, 2.0], vec![rank1, overlapping]).is_err());
    }
}
