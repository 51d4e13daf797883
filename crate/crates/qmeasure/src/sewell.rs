//! Coupled system-apparatus measurement models.
//!
//! A microscopic n-level system is coupled to a finite apparatus carrying a
//! family of orthogonal macrostate projectors. The coupling is diagonal in
//! the system eigenbasis, so the composite Hamiltonian splits into sector
//! Hamiltonians `K_r = K + V_r + e_r I` and the composite propagator into
//! sector propagators `U_r(t) = exp(i K_r t)`.
//!
//! All measurement statistics are carried by the coefficient tensor
//! `F[r][s][a] = Tr(U_r(t)* W U_s(t) P_a)` (W the apparatus initial state,
//! P_a the macrostate projectors): pointer probabilities, expectation
//! values conditioned on a pointer reading, decoherence of the off-diagonal
//! entries, and the collapse/Born-rule residuals all reduce to sums over it.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eigen, tensor_product, ComplexMatrix, DensityMatrix, HermitianOperator, Projector,
    UnitaryMatrix, TOL_ALGEBRAIC,
};

/// Normalization tolerance for system amplitudes.
pub const TOL_NORMALIZATION: f64 = 1e-12;
/// Weights below this cannot be conditioned on.
pub const NULL_WEIGHT: f64 = 1e-12;
/// Diagonal coefficients within this of each other tie the pointer argmax.
pub const POINTER_TIE_TOL: f64 = 1e-12;

/// An n-level system: energies `e_r` and amplitudes `c_r` of the prepared
/// pure state, both expressed in the coordinate eigenbasis.
#[derive(Clone, Debug)]
pub struct SystemModel {
    energies: Vec<f64>,
    amplitudes: Vec<Complex64>,
}

impl SystemModel {
    pub fn new(energies: Vec<f64>, amplitudes: Vec<Complex64>) -> Result<Self> {
        if energies.len() != amplitudes.len() {
            return Err(Error::DimensionMismatch {
                context: "SystemModel::new",
                expected: energies.len(),
                found: amplitudes.len(),
            });
        }
        if energies.len() < 2 {
            return Err(Error::InvalidModel(format!(
                "system needs at least 2 levels, got {}",
                energies.len()
            )));
        }
        let norm_sq: f64 = amplitudes.iter().map(|c| c.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > TOL_NORMALIZATION {
            return Err(Error::NotNormalized { norm_sq });
        }
        Ok(Self {
            energies,
            amplitudes,
        })
    }

    #[inline]
    pub fn levels(&self) -> usize {
        self.energies.len()
    }

    #[inline]
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    #[inline]
    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// The system Hamiltonian, diagonal in the coordinate basis.
    pub fn hamiltonian(&self) -> HermitianOperator {
        HermitianOperator::from_real_diag(&self.energies)
    }
}

/// Finite apparatus: free Hamiltonian, prepared state, and a complete
/// family of pairwise orthogonal macrostate projectors.
#[derive(Clone, Debug)]
pub struct ApparatusModel {
    free_hamiltonian: HermitianOperator,
    initial_state: DensityMatrix,
    macrostates: Vec<Projector>,
}

impl ApparatusModel {
    pub fn new(
        free_hamiltonian: HermitianOperator,
        initial_state: DensityMatrix,
        macrostates: Vec<Projector>,
    ) -> Result<Self> {
        let dim = free_hamiltonian.dim();
        if initial_state.dim() != dim {
            return Err(Error::DimensionMismatch {
                context: "ApparatusModel initial state",
                expected: dim,
                found: initial_state.dim(),
            });
        }
        if macrostates.is_empty() {
            return Err(Error::InvalidModel("no macrostates".into()));
        }
        let mut sum = ComplexMatrix::zeros(dim);
        for (a, p) in macrostates.iter().enumerate() {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch {
                    context: "ApparatusModel macrostate",
                    expected: dim,
                    found: p.dim(),
                });
            }
            if p.rank() == 0 {
                return Err(Error::InvalidModel(format!("macrostate {a} has rank 0")));
            }
            sum = &sum + p.matrix();
        }
        for (a, pa) in macrostates.iter().enumerate() {
            for pb in macrostates.iter().skip(a + 1) {
                let overlap = (pa.matrix() * pb.matrix()).max_abs();
                if overlap > TOL_ALGEBRAIC {
                    return Err(Error::InvalidModel(format!(
                        "macrostates are not orthogonal (overlap {overlap:.3e})"
                    )));
                }
            }
        }
        let completeness = (&sum - &ComplexMatrix::identity(dim)).max_abs();
        if completeness > TOL_ALGEBRAIC {
            return Err(Error::InvalidModel(format!(
                "macrostates do not span the apparatus space (defect {completeness:.3e})"
            )));
        }
        Ok(Self {
            free_hamiltonian,
            initial_state,
            macrostates,
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.free_hamiltonian.dim()
    }

    #[inline]
    pub fn free_hamiltonian(&self) -> &HermitianOperator {
        &self.free_hamiltonian
    }

    #[inline]
    pub fn initial_state(&self) -> &DensityMatrix {
        &self.initial_state
    }

    #[inline]
    pub fn macrostates(&self) -> &[Projector] {
        &self.macrostates
    }

    #[inline]
    pub fn macrostate_count(&self) -> usize {
        self.macrostates.len()
    }
}

/// System and apparatus joined by level-diagonal couplings `V_r`.
///
/// The sector Hamiltonians `K_r = K + V_r + e_r I` are eigendecomposed at
/// build time; their spectral data drives every later propagator request.
#[derive(Clone, Debug)]
pub struct CoupledModel {
    system: SystemModel,
    apparatus: ApparatusModel,
    couplings: Vec<HermitianOperator>,
    sector_hamiltonians: Vec<HermitianOperator>,
    sector_spectra: Vec<(Vec<f64>, ComplexMatrix)>,
}

impl CoupledModel {
    pub fn build(
        system: SystemModel,
        apparatus: ApparatusModel,
        couplings: Vec<HermitianOperator>,
    ) -> Result<Self> {
        let n = system.levels();
        let dim_k = apparatus.dim();
        if couplings.len() != n {
            return Err(Error::DimensionMismatch {
                context: "CoupledModel couplings",
                expected: n,
                found: couplings.len(),
            });
        }
        for v in &couplings {
            if v.dim() != dim_k {
                return Err(Error::DimensionMismatch {
                    context: "CoupledModel coupling dim",
                    expected: dim_k,
                    found: v.dim(),
                });
            }
        }
        let mut sector_hamiltonians = Vec::with_capacity(n);
        let mut sector_spectra = Vec::with_capacity(n);
        for (r, v) in couplings.iter().enumerate() {
            let e_r = Complex64::new(system.energies()[r], 0.0);
            let shift = ComplexMatrix::identity(dim_k).scale(e_r);
            let k_r = &(apparatus.free_hamiltonian().matrix() + v.matrix()) + &shift;
            let k_r = HermitianOperator::new(k_r)?;
            sector_spectra.push(hermitian_eigen(k_r.matrix())?);
            sector_hamiltonians.push(k_r);
        }
        Ok(Self {
            system,
            apparatus,
            couplings,
            sector_hamiltonians,
            sector_spectra,
        })
    }

    #[inline]
    pub fn system(&self) -> &SystemModel {
        &self.system
    }

    #[inline]
    pub fn apparatus(&self) -> &ApparatusModel {
        &self.apparatus
    }

    #[inline]
    pub fn couplings(&self) -> &[HermitianOperator] {
        &self.couplings
    }

    #[inline]
    pub fn sector_hamiltonians(&self) -> &[HermitianOperator] {
        &self.sector_hamiltonians
    }

    #[inline]
    pub fn levels(&self) -> usize {
        self.system.levels()
    }

    #[inline]
    pub fn apparatus_dim(&self) -> usize {
        self.apparatus.dim()
    }

    /// Composite Hamiltonian assembled from the sectors:
    /// `sum_r P(u_r) (x) K_r`.
    pub fn hamiltonian(&self) -> HermitianOperator {
        let n = self.levels();
        let dim_k = self.apparatus_dim();
        let mut total = ComplexMatrix::zeros(n * dim_k);
        for r in 0..n {
            let mut level = ComplexMatrix::zeros(n);
            level.set(r, r, Complex64::new(1.0, 0.0));
            total = &total + &tensor_product(&level, self.sector_hamiltonians[r].matrix());
        }
        HermitianOperator::new_unchecked(total)
    }

    /// Composite Hamiltonian assembled term by term:
    /// `H (x) I + I (x) K + sum_r P(u_r) (x) V_r`.
    pub fn hamiltonian_sum_form(&self) -> HermitianOperator {
        let n = self.levels();
        let dim_k = self.apparatus_dim();
        let h_part = tensor_product(
            self.system.hamiltonian().matrix(),
            &ComplexMatrix::identity(dim_k),
        );
        let k_part = tensor_product(
            &ComplexMatrix::identity(n),
            self.apparatus.free_hamiltonian().matrix(),
        );
        let mut v_part = ComplexMatrix::zeros(n * dim_k);
        for r in 0..n {
            let mut level = ComplexMatrix::zeros(n);
            level.set(r, r, Complex64::new(1.0, 0.0));
            v_part = &v_part + &tensor_product(&level, self.couplings[r].matrix());
        }
        HermitianOperator::new_unchecked(&(&h_part + &k_part) + &v_part)
    }

    /// Sector propagators `U_r(t) = exp(i K_r t)` from the cached spectra.
    pub fn sector_propagators(&self, t: f64) -> Result<Vec<UnitaryMatrix>> {
        if !t.is_finite() {
            return Err(Error::InvalidModel(format!("non-finite time {t}")));
        }
        let dim_k = self.apparatus_dim();
        let mut out = Vec::with_capacity(self.levels());
        for (vals, q) in &self.sector_spectra {
            let mut scaled = q.clone();
            for j in 0..dim_k {
                let phase = Complex64::from_polar(1.0, vals[j] * t);
                for i in 0..dim_k {
                    let cur = scaled.get(i, j);
                    scaled.set(i, j, cur * phase);
                }
            }
            out.push(UnitaryMatrix::new_unchecked(&scaled * &q.adjoint()));
        }
        Ok(out)
    }

    /// The coefficient tensor at time `t`:
    /// `F[r][s][a] = Tr(U_r(t)* W U_s(t) P_a)`.
    ///
    /// All entries are computed independently (no symmetry fill), so the
    /// conjugate-symmetry condition remains a genuine numerical check.
    pub fn f_coefficients(&self, t: f64) -> Result<FTensor> {
        let n = self.levels();
        let nu = self.apparatus.macrostate_count();
        let props = self.sector_propagators(t)?;
        let omega = self.apparatus.initial_state().matrix();
        let evolved: Vec<ComplexMatrix> = props.iter().map(|u| omega * u.matrix()).collect();
        let mut values = vec![Complex64::new(0.0, 0.0); n * n * nu];
        for r in 0..n {
            let u_r_adj = props[r].matrix().adjoint();
            for s in 0..n {
                let omega_rs = &u_r_adj * &evolved[s];
                for (a, proj) in self.apparatus.macrostates().iter().enumerate() {
                    values[(r * n + s) * nu + a] = trace_product(&omega_rs, proj.matrix());
                }
            }
        }
        let f = FTensor::from_values(t, n, nu, values)?;
        Ok(f)
    }
}

/// `Tr(a b)` without forming the product matrix.
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

/// The coefficient tensor `F[r][s][a]`, indexed by two system levels and a
/// macrostate. Immutable once built; `validate` checks the structural
/// conditions it must satisfy for any model and any time.
#[derive(Clone, Debug)]
pub struct FTensor {
    time: f64,
    levels: usize,
    macrostates: usize,
    values: Vec<Complex64>,
}

/// Worst-case deviations of an [`FTensor`] from its structural conditions.
/// Each field is a violation magnitude: zero is perfect.
#[derive(Clone, Copy, Debug)]
pub struct TensorConditionReport {
    /// max `|F[r][s][a] - conj(F[s][r][a])|`
    pub conjugate_symmetry: f64,
    /// max `|Im F[r][r][a]|`
    pub diagonal_imag: f64,
    /// max distance of `Re F[r][r][a]` outside `[0, 1]`
    pub diagonal_range: f64,
    /// max `|sum_a F[r][r][a] - 1|`
    pub diagonal_sum: f64,
    /// most negative eigenvalue over the per-macrostate level matrices
    /// (reported as a violation: max(0, -min_eig))
    pub positivity: f64,
    /// max over indices of `|F[r][s][a]|^2 - F[r][r][a] F[s][s][a]`
    pub cauchy_schwarz: f64,
}

impl TensorConditionReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.conjugate_symmetry <= tol
            && self.diagonal_imag <= tol
            && self.diagonal_range <= tol
            && self.diagonal_sum <= tol
            && self.positivity <= tol
            && self.cauchy_schwarz <= tol
    }
}

impl FTensor {
    /// Build and validate.
    pub fn from_values(
        time: f64,
        levels: usize,
        macrostates: usize,
        values: Vec<Complex64>,
    ) -> Result<Self> {
        let f = Self::from_values_unchecked(time, levels, macrostates, values)?;
        f.validate()?;
        Ok(f)
    }

    /// Build without condition checks (dimension check only). Intended for
    /// synthetic tensors and fault-injection paths; call [`FTensor::validate`]
    /// to check the structural conditions.
    pub fn from_values_unchecked(
        time: f64,
        levels: usize,
        macrostates: usize,
        values: Vec<Complex64>,
    ) -> Result<Self> {
        if values.len() != levels * levels * macrostates || levels == 0 || macrostates == 0 {
            return Err(Error::DimensionMismatch {
                context: "FTensor::from_values",
                expected: levels * levels * macrostates,
                found: values.len(),
            });
        }
        Ok(Self {
            time,
            levels,
            macrostates,
            values,
        })
    }

    #[inline]
    pub fn time(&self) -> f64 {
        self.time
    }

    #[inline]
    pub fn levels(&self) -> usize {
        self.levels
    }

    #[inline]
    pub fn macrostate_count(&self) -> usize {
        self.macrostates
    }

    #[inline]
    pub fn get(&self, r: usize, s: usize, alpha: usize) -> Complex64 {
        self.values[(r * self.levels + s) * self.macrostates + alpha]
    }

    #[inline]
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Worst-case deviations from the structural conditions.
    pub fn condition_report(&self) -> TensorConditionReport {
        let n = self.levels;
        let nu = self.macrostates;
        let mut conjugate_symmetry = 0.0f64;
        let mut diagonal_imag = 0.0f64;
        let mut diagonal_range = 0.0f64;
        let mut diagonal_sum = 0.0f64;
        let mut cauchy_schwarz = 0.0f64;
        for r in 0..n {
            let mut sum = Complex64::new(0.0, 0.0);
            for a in 0..nu {
                let diag = self.get(r, r, a);
                sum += diag;
                diagonal_imag = diagonal_imag.max(diag.im.abs());
                diagonal_range = diagonal_range
                    .max(-diag.re)
                    .max(diag.re - 1.0);
                for s in 0..n {
                    conjugate_symmetry = conjugate_symmetry
                        .max((self.get(r, s, a) - self.get(s, r, a).conj()).norm());
                    let cross = self.get(r, s, a).norm_sqr()
                        - self.get(r, r, a).re * self.get(s, s, a).re;
                    cauchy_schwarz = cauchy_schwarz.max(cross);
                }
            }
            diagonal_sum = diagonal_sum.max((sum - Complex64::new(1.0, 0.0)).norm());
        }
        let diagonal_range = diagonal_range.max(0.0);

        // Per-macrostate positivity of the level matrix M_a[r][s] = F[r][s][a].
        let mut positivity = 0.0f64;
        for a in 0..nu {
            let mut m = ComplexMatrix::zeros(n);
            for r in 0..n {
                for s in 0..n {
                    m.set(r, s, self.get(r, s, a));
                }
            }
            let sym = &m + &m.adjoint();
            let sym = sym.scale(Complex64::new(0.5, 0.0));
            if let Ok((vals, _)) = hermitian_eigen(&sym) {
                let min_eig = vals.first().copied().unwrap_or(0.0);
                positivity = positivity.max(-min_eig);
            } else {
                positivity = f64::INFINITY;
            }
        }
        TensorConditionReport {
            conjugate_symmetry,
            diagonal_imag,
            diagonal_range,
            diagonal_sum,
            positivity: positivity.max(0.0),
            cauchy_schwarz,
        }
    }

    /// Check the structural conditions at the standard tolerance.
    pub fn validate(&self) -> Result<()> {
        let report = self.condition_report();
        if report.conjugate_symmetry > TOL_ALGEBRAIC {
            return Err(Error::TensorCondition {
                condition: "conjugate symmetry",
                detail: format!("deviation {:.3e}", report.conjugate_symmetry),
            });
        }
        if report.diagonal_imag > TOL_ALGEBRAIC || report.diagonal_range > TOL_ALGEBRAIC {
            return Err(Error::TensorCondition {
                condition: "diagonal range",
                detail: format!(
                    "imag {:.3e}, range violation {:.3e}",
                    report.diagonal_imag, report.diagonal_range
                ),
            });
        }
        if report.diagonal_sum > TOL_ALGEBRAIC {
            return Err(Error::TensorCondition {
                condition: "diagonal sum",
                detail: format!("deviation {:.3e}", report.diagonal_sum),
            });
        }
        if report.positivity > TOL_ALGEBRAIC {
            return Err(Error::TensorCondition {
                condition: "positivity",
                detail: format!("negative eigenvalue {:.3e}", -report.positivity),
            });
        }
        Ok(())
    }
}

/// Map from system levels to macrostates, with a bijectivity verdict.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointerMap {
    mapping: Vec<usize>,
    bijective: bool,
}

impl PointerMap {
    #[inline]
    pub fn mapping(&self) -> &[usize] {
        &self.mapping
    }

    #[inline]
    pub fn target(&self, level: usize) -> usize {
        self.mapping[level]
    }

    #[inline]
    pub fn is_bijective(&self) -> bool {
        self.bijective
    }
}

/// Decoherence/ideality diagnostics of a coefficient tensor under a
/// pointer map.
#[derive(Clone, Copy, Debug)]
pub struct IdealityReport {
    /// max over r != s and a of `|F[r][s][a]|`
    pub offdiag_max: f64,
    /// max over r of `1 - Re F[r][r][a(r)]`
    pub diag_deficit: f64,
}

/// Residuals of the collapse, post-measurement projection, and Born-rule
/// identities.
#[derive(Clone, Copy, Debug)]
pub struct CollapseReport {
    pub collapse_residual: f64,
    pub projection_residual: f64,
    pub born_residual: f64,
}

/// Probability of each pointer reading: `w_a = sum_r |c_r|^2 F[r][r][a]`.
pub fn pointer_probabilities(system: &SystemModel, f: &FTensor) -> Result<Vec<f64>> {
    if f.levels() != system.levels() {
        return Err(Error::DimensionMismatch {
            context: "pointer_probabilities",
            expected: system.levels(),
            found: f.levels(),
        });
    }
    let c = system.amplitudes();
    Ok((0..f.macrostate_count())
        .map(|a| {
            (0..f.levels())
                .map(|r| c[r].norm_sqr() * f.get(r, r, a).re)
                .sum()
        })
        .collect())
}

/// Numerator of the conditional expectation:
/// `sum_{r,s} F[r][s][a] c_r conj(c_s) A[s][r]`.
fn conditional_numerator(
    system: &SystemModel,
    f: &FTensor,
    a: &HermitianOperator,
    alpha: usize,
) -> Complex64 {
    let n = f.levels();
    let c = system.amplitudes();
    let mut acc = Complex64::new(0.0, 0.0);
    for r in 0..n {
        for s in 0..n {
            acc += f.get(r, s, alpha) * c[r] * c[s].conj() * a.matrix().get(s, r);
        }
    }
    acc
}

fn check_observable(system: &SystemModel, f: &FTensor, a: &HermitianOperator) -> Result<()> {
    if f.levels() != system.levels() || a.dim() != system.levels() {
        return Err(Error::DimensionMismatch {
            context: "system observable",
            expected: system.levels(),
            found: a.dim(),
        });
    }
    Ok(())
}

/// Expectation value of a system observable in the evolved composite state.
pub fn expectation(system: &SystemModel, f: &FTensor, a: &HermitianOperator) -> Result<f64> {
    check_observable(system, f, a)?;
    let total: Complex64 = (0..f.macrostate_count())
        .map(|alpha| conditional_numerator(system, f, a, alpha))
        .sum();
    if total.im.abs() > 1e-9 {
        return Err(Error::TensorCondition {
            condition: "real expectation",
            detail: format!("imaginary part {:.3e}", total.im),
        });
    }
    Ok(total.re)
}

/// Expectation of a system observable conditioned on pointer reading `alpha`.
pub fn conditional_expectation(
    system: &SystemModel,
    f: &FTensor,
    a: &HermitianOperator,
    alpha: usize,
) -> Result<f64> {
    check_observable(system, f, a)?;
    let w = pointer_probabilities(system, f)?[alpha];
    if w <= NULL_WEIGHT {
        return Err(Error::NullMacrostate {
            index: alpha,
            weight: w,
        });
    }
    let num = conditional_numerator(system, f, a, alpha);
    Ok(num.re / w)
}

/// Read the pointer map off the diagonal coefficients: each level maps to
/// the macrostate carrying its largest diagonal weight. An exact or
/// near-exact tie is reported as an error rather than silently broken.
pub fn infer_pointer_map(f: &FTensor) -> Result<PointerMap> {
    let n = f.levels();
    let nu = f.macrostate_count();
    let mut mapping = Vec::with_capacity(n);
    let mut min_peak = f64::INFINITY;
    for r in 0..n {
        let mut best = 0usize;
        let mut best_val = f64::NEG_INFINITY;
        let mut second_val = f64::NEG_INFINITY;
        for a in 0..nu {
            let v = f.get(r, r, a).re;
            if v > best_val {
                second_val = best_val;
                best_val = v;
                best = a;
            } else if v > second_val {
                second_val = v;
            }
        }
        if nu > 1 && (best_val - second_val).abs() <= POINTER_TIE_TOL {
            return Err(Error::AmbiguousPointer { level: r });
        }
        min_peak = min_peak.min(best_val);
        mapping.push(best);
    }
    let mut seen = vec![false; nu];
    let mut is_permutation = nu == n;
    for &a in &mapping {
        if seen[a] {
            is_permutation = false;
        }
        seen[a] = true;
    }
    let bijective = is_permutation && min_peak > 0.5;
    Ok(PointerMap { mapping, bijective })
}

/// Decoherence diagnostics: largest off-diagonal magnitude and largest
/// diagonal deficit along the pointer map.
pub fn ideality_report(f: &FTensor, map: &PointerMap) -> IdealityReport {
    let n = f.levels();
    let nu = f.macrostate_count();
    let mut offdiag_max = 0.0f64;
    for r in 0..n {
        for s in 0..n {
            if r == s {
                continue;
            }
            for a in 0..nu {
                offdiag_max = offdiag_max.max(f.get(r, s, a).norm());
            }
        }
    }
    let mut diag_deficit = 0.0f64;
    for (r, &a) in map.mapping().iter().enumerate() {
        diag_deficit = diag_deficit.max(1.0 - f.get(r, r, a).re);
    }
    IdealityReport {
        offdiag_max,
        diag_deficit,
    }
}

/// Residuals of the measurement identities for a bijective pointer map:
/// loss of interference in `E(A)`, agreement of the conditioned state with
/// the corresponding eigenstate, and the Born weights.
pub fn collapse_check(
    system: &SystemModel,
    f: &FTensor,
    a: &HermitianOperator,
    map: &PointerMap,
) -> Result<CollapseReport> {
    check_observable(system, f, a)?;
    if !map.is_bijective() {
        return Err(Error::NonBijectivePointer);
    }
    let c = system.amplitudes();
    let n = system.levels();

    let diag_part: f64 = (0..n)
        .map(|r| c[r].norm_sqr() * a.matrix().get(r, r).re)
        .sum();
    let collapse_residual = (expectation(system, f, a)? - diag_part).abs();

    let mut projection_residual = 0.0f64;
    for r in 0..n {
        if c[r].norm_sqr() <= 1e-8 {
            continue;
        }
        let cond = conditional_expectation(system, f, a, map.target(r))?;
        projection_residual = projection_residual.max((cond - a.matrix().get(r, r).re).abs());
    }

    let w = pointer_probabilities(system, f)?;
    let mut born_residual = 0.0f64;
    for r in 0..n {
        born_residual = born_residual.max((w[map.target(r)] - c[r].norm_sqr()).abs());
    }

    Ok(CollapseReport {
        collapse_residual,
        projection_residual,
        born_residual,
    })
}
