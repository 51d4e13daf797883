//! Finite Coleman-Hepp spin-chain apparatus.
//!
//! The apparatus is a chain of N spins prepared all-down; coupling to
//! system level r rotates every site by the same angle `theta_r * t / 2`
//! about the y axis (the free apparatus Hamiltonian vanishes). Macrostates
//! are bands of the total up-spin count m, realizing an intensive pointer.
//!
//! Because the sites evolve independently, the coefficient tensor
//! factorizes over sites and its band sums are read off a counting
//! polynomial in one variable -- cost O(N^2) via convolution (or O(N) in
//! log domain for very long chains), never O(2^N). The dense route through
//! [`crate::sewell::CoupledModel`] stays available for small N as an
//! independent cross-check.

use std::ops::Range;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, DensityMatrix, HermitianOperator, Projector};
use crate::sewell::{ApparatusModel, CoupledModel, FTensor, SystemModel};

/// Chains longer than this switch the counting polynomial to log-domain
/// per-coefficient evaluation to dodge underflow in long products.
const LOG_DOMAIN_THRESHOLD: usize = 1024;

/// Dense cross-checks build a 2^N-dimensional model; stop well before that
/// becomes unusable.
const MAX_DENSE_SITES: usize = 12;

/// N-site spin chain with one rotation rate per system level.
#[derive(Clone, Debug)]
pub struct SpinChainApparatus {
    n_spins: usize,
    rotation_angles: Vec<f64>,
}

impl SpinChainApparatus {
    pub fn new(n_spins: usize, rotation_angles: Vec<f64>) -> Result<Self> {
        if n_spins == 0 {
            return Err(Error::InvalidModel("spin chain needs at least one site".into()));
        }
        if rotation_angles.len() < 2 {
            return Err(Error::InvalidModel(
                "need one rotation angle per system level (at least 2)".into(),
            ));
        }
        if rotation_angles.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidModel("non-finite rotation angle".into()));
        }
        Ok(Self {
            n_spins,
            rotation_angles,
        })
    }

    #[inline]
    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    #[inline]
    pub fn levels(&self) -> usize {
        self.rotation_angles.len()
    }

    #[inline]
    pub fn rotation_angles(&self) -> &[f64] {
        &self.rotation_angles
    }
}

/// Partition of the up-spin count range {0, ..., N} into contiguous bands.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MagnetizationBands {
    n_spins: usize,
    /// Interior cut points; band a covers [cuts[a-1], cuts[a]) with the
    /// implicit outer cuts 0 and N+1.
    cuts: Vec<usize>,
}

impl MagnetizationBands {
    pub fn new(n_spins: usize, interior_cuts: Vec<usize>) -> Result<Self> {
        let mut prev = 0usize;
        for &cut in &interior_cuts {
            if cut <= prev || cut > n_spins {
                return Err(Error::InvalidModel(format!(
                    "band cut {cut} out of order or outside 1..={n_spins}"
                )));
            }
            prev = cut;
        }
        Ok(Self {
            n_spins,
            cuts: interior_cuts,
        })
    }

    /// Two bands split at the majority threshold; the exact tie at even N
    /// goes to the upper band.
    pub fn majority(n_spins: usize) -> Self {
        Self {
            n_spins,
            cuts: vec![n_spins.div_ceil(2)],
        }
    }

    /// `count` bands of (as near as possible) equal width in m/N.
    pub fn equal_width(n_spins: usize, count: usize) -> Result<Self> {
        if count == 0 || count > n_spins + 1 {
            return Err(Error::InvalidModel(format!(
                "cannot split {} magnetization values into {count} bands",
                n_spins + 1
            )));
        }
        let mut cuts = Vec::with_capacity(count - 1);
        for k in 1..count {
            cuts.push((k * n_spins).div_ceil(count));
        }
        Self::new(n_spins, cuts)
    }

    #[inline]
    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    #[inline]
    pub fn count(&self) -> usize {
        self.cuts.len() + 1
    }

    /// Up-spin counts covered by band `a`, as a half-open range.
    pub fn band_range(&self, a: usize) -> Range<usize> {
        let lo = if a == 0 { 0 } else { self.cuts[a - 1] };
        let hi = if a == self.cuts.len() {
            self.n_spins + 1
        } else {
            self.cuts[a]
        };
        lo..hi
    }

    pub fn band_of(&self, m: usize) -> usize {
        self.cuts.partition_point(|&cut| cut <= m)
    }
}

/// Per-site transfer weights between sector propagators r and s: the
/// contribution of one site counted up (`up`) or down (`down`) to the
/// site-factorized coefficient tensor.
#[derive(Clone, Copy, Debug)]
pub struct SiteTransfer {
    pub up: Complex64,
    pub down: Complex64,
}

/// Weights for a y-axis rotation by `theta * t / 2` per site: products of
/// the two single-site rotation matrix elements for each outcome.
pub fn site_transfer(theta_r: f64, theta_s: f64, t: f64) -> SiteTransfer {
    let a_r = theta_r * t / 2.0;
    let a_s = theta_s * t / 2.0;
    SiteTransfer {
        up: Complex64::new(a_r.sin() * a_s.sin(), 0.0),
        down: Complex64::new(a_r.cos() * a_s.cos(), 0.0),
    }
}

/// Coefficients of `(down + up x)^N`: entry m weights exactly m sites
/// counted up.
pub(crate) fn counting_polynomial(down: Complex64, up: Complex64, n: usize) -> Vec<Complex64> {
    if n <= LOG_DOMAIN_THRESHOLD {
        counting_polynomial_conv(down, up, n)
    } else {
        counting_polynomial_log(down, up, n)
    }
}

fn counting_polynomial_conv(down: Complex64, up: Complex64, n: usize) -> Vec<Complex64> {
    let zero = Complex64::new(0.0, 0.0);
    let mut coeffs = vec![zero; n + 1];
    coeffs[0] = Complex64::new(1.0, 0.0);
    for step in 0..n {
        for m in (0..=step + 1).rev() {
            let from_down = if m <= step { down * coeffs[m] } else { zero };
            let from_up = if m > 0 { up * coeffs[m - 1] } else { zero };
            coeffs[m] = from_down + from_up;
        }
    }
    coeffs
}

/// All N factors are identical, so coefficient m is the binomial term
/// C(N,m) down^(N-m) up^m, evaluated with log magnitudes and accumulated
/// phases so that deep tails survive far below f64 range limits of the
/// naive product.
fn counting_polynomial_log(down: Complex64, up: Complex64, n: usize) -> Vec<Complex64> {
    let zero = Complex64::new(0.0, 0.0);
    let mut coeffs = vec![zero; n + 1];
    if down.norm() == 0.0 && up.norm() == 0.0 {
        return coeffs;
    }
    if up.norm() == 0.0 {
        coeffs[0] = powc(down, n);
        return coeffs;
    }
    if down.norm() == 0.0 {
        coeffs[n] = powc(up, n);
        return coeffs;
    }
    let lf = log_factorials(n);
    let (ln_d, arg_d) = (down.norm().ln(), down.arg());
    let (ln_u, arg_u) = (up.norm().ln(), up.arg());
    for m in 0..=n {
        let ln_mag = lf[n] - lf[m] - lf[n - m]
            + (n - m) as f64 * ln_d
            + m as f64 * ln_u;
        let arg = (n - m) as f64 * arg_d + m as f64 * arg_u;
        coeffs[m] = Complex64::from_polar(ln_mag.exp(), arg);
    }
    coeffs
}

fn powc(base: Complex64, n: usize) -> Complex64 {
    Complex64::from_polar((n as f64 * base.norm().ln()).exp(), n as f64 * base.arg())
}

fn log_factorials(n: usize) -> Vec<f64> {
    let mut lf = vec![0.0f64; n + 1];
    for k in 1..=n {
        lf[k] = lf[k - 1] + (k as f64).ln();
    }
    lf
}

/// Coefficient tensor of the spin-chain model at time `t`, computed through
/// the site-factorized counting polynomial: `F[r][s][a]` is the sum of the
/// polynomial coefficients over the up-spin counts in band `a`.
pub fn f_coefficients_structured(
    app: &SpinChainApparatus,
    bands: &MagnetizationBands,
    t: f64,
) -> Result<FTensor> {
    if bands.n_spins() != app.n_spins() {
        return Err(Error::DimensionMismatch {
            context: "f_coefficients_structured bands",
            expected: app.n_spins(),
            found: bands.n_spins(),
        });
    }
    let n_levels = app.levels();
    let nu = bands.count();
    let n_sites = app.n_spins();
    let mut values = vec![Complex64::new(0.0, 0.0); n_levels * n_levels * nu];
    for r in 0..n_levels {
        for s in 0..n_levels {
            let transfer = site_transfer(
                app.rotation_angles()[r],
                app.rotation_angles()[s],
                t,
            );
            let coeffs = counting_polynomial(transfer.down, transfer.up, n_sites);
            let mut sums: Vec<Complex64> = (0..nu)
                .map(|a| bands.band_range(a).map(|m| coeffs[m]).sum())
                .collect();
            if r == s {
                // The diagonal band sums total exactly one. Recomputing a
                // dominant band as one minus its complement keeps deficits
                // of order exp(-c N) free of the summation noise of the
                // bulk term.
                let (peak, peak_val) = sums
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.norm().partial_cmp(&b.1.norm()).unwrap())
                    .map(|(i, v)| (i, *v))
                    .unwrap();
                if peak_val.re >= 0.5 {
                    let complement: Complex64 = sums
                        .iter()
                        .enumerate()
                        .filter(|(a, _)| *a != peak)
                        .map(|(_, v)| v)
                        .sum();
                    sums[peak] = Complex64::new(1.0, 0.0) - complement;
                }
            }
            for (a, sum) in sums.into_iter().enumerate() {
                values[(r * n_levels + s) * nu + a] = sum;
            }
        }
    }
    FTensor::from_values(t, n_levels, nu, values)
}

/// Dense composite model equivalent to the spin chain: 2^N-dimensional
/// apparatus, all-down initial state, y-rotation couplings, band
/// projectors over bitstring weight. For small N only; the generic dense
/// pipeline on this model is the independent cross-check of the
/// structured computation.
pub fn to_coupled(
    app: &SpinChainApparatus,
    bands: &MagnetizationBands,
    amplitudes: Vec<Complex64>,
) -> Result<CoupledModel> {
    let n_sites = app.n_spins();
    if n_sites > MAX_DENSE_SITES {
        return Err(Error::InvalidModel(format!(
            "dense construction limited to {MAX_DENSE_SITES} sites, got {n_sites}"
        )));
    }
    if amplitudes.len() != app.levels() {
        return Err(Error::DimensionMismatch {
            context: "to_coupled amplitudes",
            expected: app.levels(),
            found: amplitudes.len(),
        });
    }
    if bands.n_spins() != n_sites {
        return Err(Error::DimensionMismatch {
            context: "to_coupled bands",
            expected: n_sites,
            found: bands.n_spins(),
        });
    }
    let dim = 1usize << n_sites;
    let system = SystemModel::new(vec![0.0; app.levels()], amplitudes)?;

    // All spins down = bitstring 0.
    let mut down_state = vec![Complex64::new(0.0, 0.0); dim];
    down_state[0] = Complex64::new(1.0, 0.0);
    let initial = DensityMatrix::pure(&down_state)?;

    let mut macrostates = Vec::with_capacity(bands.count());
    for a in 0..bands.count() {
        let range = bands.band_range(a);
        let indices: Vec<usize> = (0..dim)
            .filter(|x| range.contains(&(x.count_ones() as usize)))
            .collect();
        macrostates.push(Projector::from_basis_indices(dim, &indices)?);
    }
    let apparatus = ApparatusModel::new(HermitianOperator::zero(dim), initial, macrostates)?;

    // V_r = (theta_r / 2) * sum_k sigma_y at site k, with sigma_y|0> = i|1>.
    let mut couplings = Vec::with_capacity(app.levels());
    for &theta in app.rotation_angles() {
        let half = theta / 2.0;
        let mut v = ComplexMatrix::zeros(dim);
        for x in 0..dim {
            for k in 0..n_sites {
                let flipped = x ^ (1 << k);
                let elem = if x & (1 << k) == 0 {
                    Complex64::new(0.0, half)
                } else {
                    Complex64::new(0.0, -half)
                };
                let cur = v.get(flipped, x);
                v.set(flipped, x, cur + elem);
            }
        }
        couplings.push(HermitianOperator::new(v)?);
    }
    CoupledModel::build(system, apparatus, couplings)
}

/// How macrostate bands are generated for each chain length in a sweep.
#[derive(Clone, Debug)]
pub enum BandRule {
    /// Two bands split at the majority threshold.
    Majority,
    /// A fixed number of equal-width bands.
    EqualWidth(usize),
}

impl BandRule {
    pub fn bands_for(&self, n_spins: usize) -> Result<MagnetizationBands> {
        match self {
            BandRule::Majority => Ok(MagnetizationBands::majority(n_spins)),
            BandRule::EqualWidth(count) => MagnetizationBands::equal_width(n_spins, *count),
        }
    }
}

/// Measurement error eta(N) = worst diagonal deficit at the readout time,
/// for each chain length. The pointer map must be bijective at `t_star`
/// for every N.
pub fn eta_sweep(
    n_values: &[usize],
    angles: &[f64],
    rule: &BandRule,
    t_star: f64,
) -> Result<Vec<(usize, f64)>> {
    let mut out = Vec::with_capacity(n_values.len());
    for &n_sites in n_values {
        let app = SpinChainApparatus::new(n_sites, angles.to_vec())?;
        let bands = rule.bands_for(n_sites)?;
        let f = f_coefficients_structured(&app, &bands, t_star)?;
        let map = crate::sewell::infer_pointer_map(&f)?;
        if !map.is_bijective() {
            return Err(Error::NonBijectivePointer);
        }
        let eta = crate::sewell::ideality_report(&f, &map).diag_deficit.max(0.0);
        out.push((n_sites, eta));
    }
    Ok(out)
}

/// Least-squares fit of `log eta = intercept - (c_hat / levels) * N`.
#[derive(Clone, Copy, Debug)]
pub struct ScalingFit {
    pub c_hat: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Points discarded because eta <= 0 (log undefined).
    pub dropped: usize,
}

pub fn fit_exponential(points: &[(usize, f64)], levels: usize) -> Result<ScalingFit> {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, eta)| *eta > 0.0)
        .map(|&(n, eta)| (n as f64, eta.ln()))
        .collect();
    let dropped = points.len() - usable.len();
    if usable.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            found: usable.len(),
        });
    }
    let count = usable.len() as f64;
    let mean_x = usable.iter().map(|(x, _)| x).sum::<f64>() / count;
    let mean_y = usable.iter().map(|(_, y)| y).sum::<f64>() / count;
    let sxx: f64 = usable.iter().map(|(x, _)| (x - mean_x).powi(2)).sum();
    let sxy: f64 = usable
        .iter()
        .map(|(x, y)| (x - mean_x) * (y - mean_y))
        .sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData {
            needed: 2,
            found: 1,
        });
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_tot: f64 = usable.iter().map(|(_, y)| (y - mean_y).powi(2)).sum();
    let ss_res: f64 = usable
        .iter()
        .map(|(x, y)| (y - (intercept + slope * x)).powi(2))
        .sum();
    let r_squared = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else if ss_res <= f64::EPSILON {
        1.0
    } else {
        0.0
    };
    Ok(ScalingFit {
        c_hat: -slope * levels as f64,
        intercept,
        r_squared,
        dropped,
    })
}

/// Probability mass function of Binomial(n, p) at m, via log factorials.
pub fn binomial_pmf(n: usize, p: f64, m: usize) -> f64 {
    debug_assert!((0.0..=1.0).contains(&p));
    if m > n {
        return 0.0;
    }
    if p == 0.0 {
        return if m == 0 { 1.0 } else { 0.0 };
    }
    if p == 1.0 {
        return if m == n { 1.0 } else { 0.0 };
    }
    let lf = log_factorials(n);
    let ln = lf[n] - lf[m] - lf[n - m]
        + m as f64 * p.ln()
        + (n - m) as f64 * (1.0 - p).ln();
    ln.exp()
}

/// Exact tail P[Binomial(n, p) < threshold], summed term by term.
pub fn binomial_tail_below(n: usize, p: f64, threshold: usize) -> f64 {
    (0..threshold.min(n + 1)).map(|m| binomial_pmf(n, p, m)).sum()
}

/// Exact P[Binomial(n, p) outside [band.start, band.end)], summed term by
/// term over the complement.
pub fn binomial_outside_band(n: usize, p: f64, band: Range<usize>) -> f64 {
    let below: f64 = (0..band.start.min(n + 1)).map(|m| binomial_pmf(n, p, m)).sum();
    let above: f64 = (band.end..=n).map(|m| binomial_pmf(n, p, m)).sum();
    below + above
}

/// Misread probability of an intensive pointer with `n_bands` equal-width
/// bands: the per-site up-probability is aimed at the center of
/// `target_band`, and the probability that the observed up-spin count
/// falls outside that band is summed exactly.
pub fn reliability_probe(n_sites: usize, n_bands: usize, target_band: usize) -> Result<f64> {
    let bands = MagnetizationBands::equal_width(n_sites, n_bands)?;
    if target_band >= n_bands {
        return Err(Error::InvalidModel(format!(
            "target band {target_band} out of range (bands: {n_bands})"
        )));
    }
    let p = (target_band as f64 + 0.5) / n_bands as f64;
    Ok(binomial_outside_band(n_sites, p, bands.band_range(target_band)))
}
