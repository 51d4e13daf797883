//! Seeded random model generators, shared by the simulation runner and the
//! randomized test suites.

use num_complex::Complex64;
use rand::{Rng, RngExt};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::Result;
use crate::linalg::{hermitian_eigen, ComplexMatrix, DensityMatrix, HermitianOperator, Projector};
use crate::sewell::{ApparatusModel, CoupledModel, SystemModel};

/// Deterministic generator for a given seed.
pub fn seeded_rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

#[cfg(test)]
pub(crate) fn test_rng(seed: u64) -> ChaCha12Rng {
    seeded_rng(seed)
}

/// Random hermitian operator with entries of order one.
pub fn random_hermitian(dim: usize, rng: &mut impl Rng) -> HermitianOperator {
    let mut m = ComplexMatrix::zeros(dim);
    for i in 0..dim {
        m.set(i, i, Complex64::new(rng.random_range(-1.0..1.0), 0.0));
        for j in i + 1..dim {
            let z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            m.set(i, j, z);
            m.set(j, i, z.conj());
        }
    }
    HermitianOperator::new_unchecked(m)
}

/// Random full-rank density matrix (normalized Gram matrix).
pub fn random_density(dim: usize, rng: &mut impl Rng) -> Result<DensityMatrix> {
    let mut g = ComplexMatrix::zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            g.set(
                i,
                j,
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
            );
        }
    }
    let gram = &g * &g.adjoint();
    let tr = gram.trace().re;
    DensityMatrix::new(gram.scale(Complex64::new(1.0 / tr, 0.0)))
}

/// Random normalized amplitude vector with no nearly-vanishing component,
/// so cross-term diagnostics stay well conditioned.
pub fn random_state(dim: usize, rng: &mut impl Rng) -> Vec<Complex64> {
    let mut state = vec![Complex64::new(0.0, 0.0); dim];
    for z in state.iter_mut() {
        loop {
            let cand = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            if cand.norm() >= 0.3 {
                *z = cand;
                break;
            }
        }
    }
    let norm: f64 = state.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in state.iter_mut() {
        *z /= norm;
    }
    state
}

/// A complete family of `count` random orthogonal macrostate projectors,
/// built from the eigenbasis of a random hermitian matrix.
pub fn random_macrostates(
    dim: usize,
    count: usize,
    rng: &mut impl Rng,
) -> Result<Vec<Projector>> {
    assert!(count >= 1 && count <= dim, "need 1 <= count <= dim");
    let (_, q) = hermitian_eigen(random_hermitian(dim, rng).matrix())?;
    // Random group sizes, each at least one.
    let mut sizes = vec![1usize; count];
    for _ in 0..dim - count {
        sizes[rng.random_range(0..count)] += 1;
    }
    let mut projectors = Vec::with_capacity(count);
    let mut col = 0;
    for &size in &sizes {
        let columns: Vec<Vec<Complex64>> = (col..col + size)
            .map(|c| (0..dim).map(|i| q.get(i, c)).collect())
            .collect();
        projectors.push(Projector::from_orthonormal_columns(&columns)?);
        col += size;
    }
    Ok(projectors)
}

/// Random apparatus: random free Hamiltonian, random full-rank initial
/// state, random macrostate family.
pub fn random_apparatus(
    dim_k: usize,
    macrostates: usize,
    rng: &mut impl Rng,
) -> Result<ApparatusModel> {
    ApparatusModel::new(
        random_hermitian(dim_k, rng),
        random_density(dim_k, rng)?,
        random_macrostates(dim_k, macrostates, rng)?,
    )
}

/// Random coupled model with `n` system levels, apparatus dimension
/// `dim_k`, and as many macrostates as levels.
pub fn random_coupled(n: usize, dim_k: usize, rng: &mut impl Rng) -> Result<CoupledModel> {
    let energies: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let system = SystemModel::new(energies, random_state(n, rng))?;
    let apparatus = random_apparatus(dim_k, n, rng)?;
    let couplings: Vec<HermitianOperator> =
        (0..n).map(|_| random_hermitian(dim_k, rng)).collect();
    CoupledModel::build(system, apparatus, couplings)
}
