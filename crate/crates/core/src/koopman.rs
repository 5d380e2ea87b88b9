//! Koopman averaging operator of the LPS rotations on the spherical
//! harmonic subspaces `H_ℓ ⊂ L²(S²)`, computed in exact rational arithmetic.
//!
//! A block is found by interpolation: `H_ℓ` is invariant under rotations,
//! so `Σ_g b_k(gᵀv)` lies in `H_ℓ` again and its coordinates follow from its
//! exact values at `2ℓ + 1` integer points where evaluation is injective.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{pow, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{self, IndependentRows, RatMatrix};
use crate::generators::{build_generator_set, GeneratorSet};
use crate::harmonic::{gram_matrix, harmonic_basis, HarmonicBasis};
use crate::jacobi::symmetric_eigenvalues;
use crate::quaternion::check_lps_prime;
use crate::spectral::{hecke_family, lps_discrepancy, Shape};
use crate::words::{biguint_to_f64, word_counts};

/// Default largest harmonic degree.
pub const DEFAULT_L_MAX: u32 = 24;
/// Slack allowed above `2√p` for a float eigenvalue.
pub const RAMANUJAN_TOL: f64 = 1e-8;
/// Allowed `‖S − Sᵀ‖_max` after symmetrization.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// `π(Σ_g g)` restricted to `H_ℓ`: column `k` holds the coordinates of the
/// image of basis polynomial `k`.
#[derive(Clone, Debug)]
pub struct KoopmanBlock {
    pub degree: u32,
    pub matrix: RatMatrix,
    pub gram: RatMatrix,
}

impl KoopmanBlock {
    /// `G·A = Aᵀ·G`, exactly.
    pub fn is_self_adjoint(&self) -> bool {
        let ga = exact::mat_mul(&self.gram, &self.matrix);
        let atg = exact::mat_mul(&exact::transpose(&self.matrix), &self.gram);
        ga == atg
    }

    pub fn trace(&self) -> BigRational {
        (0..self.matrix.len()).map(|i| self.matrix[i][i].clone()).sum()
    }
}

/// Integer points in growing sup-norm shells, lexicographic within a shell.
fn candidate_points() -> impl Iterator<Item = [i64; 3]> {
    (1i64..).flat_map(|r| {
        let mut shell = Vec::new();
        for x in -r..=r {
            for y in -r..=r {
                for z in -r..=r {
                    if x.abs().max(y.abs()).max(z.abs()) == r {
                        shell.push([x, y, z]);
                    }
                }
            }
        }
        shell
    })
}

/// `2ℓ + 1` integer points with an invertible evaluation matrix.
fn interpolation_points(basis: &HarmonicBasis) -> (Vec<[BigInt; 3]>, Vec<Vec<BigInt>>) {
    let dim = basis.dim();
    let mut independent = IndependentRows::new();
    let mut points = Vec::with_capacity(dim);
    let mut rows = Vec::with_capacity(dim);
    for c in candidate_points() {
        let point = c.map(BigInt::from);
        let row = basis.evaluation_row(&point);
        if independent.try_insert(&row) {
            points.push(point);
            rows.push(row);
            if points.len() == dim {
                break;
            }
        }
    }
    (points, rows)
}

fn transpose_apply(m: &[[BigInt; 3]; 3], v: &[BigInt; 3]) -> [BigInt; 3] {
    std::array::from_fn(|c| (0..3).map(|r| &m[r][c] * &v[r]).sum())
}

/// Builds the exact block of `π(1_Σ)` on `H_ℓ` with `π(g)f(v) = f(g⁻¹v)`.
pub fn koopman_block(genset: &GeneratorSet, degree: u32) -> Result<KoopmanBlock> {
    let basis = harmonic_basis(degree);
    let gram = gram_matrix(&basis);
    let (points, evaluation) = interpolation_points(&basis);

    // Σ_g b_k(Mᵀ x_j); the true value carries the factor p^{−ℓ}
    let dim = basis.dim();
    let mut images = vec![vec![BigInt::zero(); dim]; dim];
    for rot in &genset.rotations {
        debug_assert_eq!(rot.den_exp(), 1);
        for (j, x) in points.iter().enumerate() {
            let moved = transpose_apply(rot.num(), x);
            for (k, v) in basis.evaluation_row(&moved).into_iter().enumerate() {
                images[j][k] += v;
            }
        }
    }
    let coords = exact::solve_integer(&evaluation, &images)
        .expect("interpolation points have an invertible evaluation matrix");
    let scale = BigRational::from_integer(pow(BigInt::from(genset.p), degree as usize));
    let matrix: RatMatrix = coords
        .into_iter()
        .map(|row| row.into_iter().map(|x| x / &scale).collect())
        .collect();

    let block = KoopmanBlock { degree, matrix, gram };
    if !block.is_self_adjoint() {
        return Err(Error::NotSelfAdjoint { degree: degree as usize });
    }
    Ok(block)
}

/// Real eigenvalues of a block, ascending.
///
/// With the exact factorization `G = L·D·Lᵀ`, the matrix `Lᵀ·A·L^{−T}` is
/// `D`-self-adjoint; rescaling by `D^{1/2}` gives a symmetric matrix with the
/// same spectrum. Only that final rescaling is done in floating point.
pub fn block_spectrum(block: &KoopmanBlock) -> Result<Vec<f64>> {
    let (l, d) = exact::ldlt(&block.gram).ok_or(Error::NotSelfAdjoint { degree: block.degree as usize })?;
    let l_inv = exact::unit_lower_inverse(&l);
    let similar = exact::mat_mul(
        &exact::mat_mul(&exact::transpose(&l), &block.matrix),
        &exact::transpose(&l_inv),
    );
    let n = d.len();
    let s: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if similar[i][j].is_zero() {
                        0.0
                    } else {
                        exact::to_f64(&similar[i][j]) * exact::to_f64(&(&d[i] / &d[j])).sqrt()
                    }
                })
                .collect()
        })
        .collect();
    let residual = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| (s[i][j] - s[j][i]).abs())
        .fold(0.0, f64::max);
    if !(residual < SYMMETRY_TOL) {
        return Err(Error::NumericalAsymmetry { residual });
    }
    let sym: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| 0.5 * (s[i][j] + s[j][i])).collect())
        .collect();
    symmetric_eigenvalues(&sym)
}

/// Eigenvalues of one degree.
#[derive(Clone, Debug, Serialize)]
pub struct DegreeSpectrum {
    pub degree: u32,
    pub eigenvalues: Vec<f64>,
    pub max_abs: f64,
}

/// Spectra of the blocks `1 ≤ ℓ ≤ l_max`, computed in parallel and returned
/// in degree order.
pub fn degree_spectra(genset: &GeneratorSet, l_max: u32) -> Result<Vec<DegreeSpectrum>> {
    (1..=l_max)
        .into_par_iter()
        .map(|degree| {
            let block = koopman_block(genset, degree)?;
            let eigenvalues = block_spectrum(&block)?;
            let max_abs = eigenvalues.iter().map(|x| x.abs()).fold(0.0, f64::max);
            Ok(DegreeSpectrum { degree, eigenvalues, max_abs })
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct RamanujanReport {
    pub p: u64,
    pub per_degree: Vec<DegreeSpectrum>,
    pub global_max_abs: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Checks `σ(π₀(1_Σ)) ⊂ [−2√p, 2√p]` on every `H_ℓ` with `1 ≤ ℓ ≤ l_max`.
pub fn verify_ramanujan(p: u64, l_max: u32) -> Result<RamanujanReport> {
    check_lps_prime(p)?;
    if l_max == 0 {
        return Err(Error::InvalidArgument("l_max must be ≥ 1".into()));
    }
    let genset = build_generator_set(p)?;
    let per_degree = degree_spectra(&genset, l_max)?;
    Ok(ramanujan_report(p, per_degree))
}

pub fn ramanujan_report(p: u64, per_degree: Vec<DegreeSpectrum>) -> RamanujanReport {
    let global_max_abs = per_degree.iter().map(|d| d.max_abs).fold(0.0, f64::max);
    let bound = 2.0 * (p as f64).sqrt();
    RamanujanReport { p, per_degree, global_max_abs, bound, pass: global_max_abs <= bound + RAMANUJAN_TOL }
}

/// `max_ℓ max_λ |P_n(λ)|/|S_n|` (sphere) or `|Σ_{k≤n} P_k(λ)|/|B_n|` (ball)
/// over the given spectra.
pub fn discrepancy_from_spectra(q: u64, n: u32, shape: Shape, spectra: &[DegreeSpectrum]) -> f64 {
    let family = hecke_family(q, n as usize);
    let (sphere, ball) = word_counts(q, n);
    let value = |x: f64| -> f64 {
        match shape {
            Shape::Sphere => family[n as usize].eval(x).abs() / biguint_to_f64(&sphere),
            Shape::Ball => family.iter().map(|p| p.eval(x)).sum::<f64>().abs() / biguint_to_f64(&ball),
        }
    };
    spectra
        .iter()
        .flat_map(|d| d.eigenvalues.iter())
        .map(|&x| value(x))
        .fold(0.0, f64::max)
}

/// Finite-`ℓ` lower estimate of the discrepancy of the `S_n` or `B_n` average.
pub fn sphere_discrepancy_estimate(p: u64, n: u32, shape: Shape, l_max: u32) -> Result<f64> {
    lps_discrepancy(p, n, shape)?;
    if l_max == 0 {
        return Err(Error::InvalidArgument("l_max must be ≥ 1".into()));
    }
    let genset = build_generator_set(p)?;
    let spectra = degree_spectra(&genset, l_max)?;
    Ok(discrepancy_from_spectra(p, n, shape, &spectra))
}
