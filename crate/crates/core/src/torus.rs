//! Koopman averaging operators of free subgroups of GL(2, ℤ) acting on the
//! 2-torus, seen through their action on the characters `e_m`, `m ∈ ℤ² ∖ {0}`.
//!
//! `π(g)e_m = e_{(g⁻¹)ᵀm}`, so the averaging operator of a symmetric word set
//! is a weighted Schreier-graph operator on the nonzero lattice points. It is
//! compressed to a sup-norm box and its norm estimated from below.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::{regular_norm, Shape};
use crate::words::{check_budget, walk_ball, WordGroup};

pub type IntMatrix2 = [[BigInt; 2]; 2];
pub type LatticePoint = [i64; 2];

/// Default power-iteration seed.
pub const DEFAULT_SEED: u64 = 42;
/// Default convergence tolerance for norm estimates.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Default window radii.
pub const DEFAULT_RADII: [u32; 3] = [64, 128, 256];
/// Slack allowed above the free-group value.
pub const UPPER_TOL: f64 = 1e-8;
/// Slack allowed for a decrease between nested windows.
pub const MONOTONE_TOL: f64 = 1e-6;

const MAX_ITERATIONS: usize = 20_000;

fn mat2_mul(a: &IntMatrix2, b: &IntMatrix2) -> IntMatrix2 {
    std::array::from_fn(|i| std::array::from_fn(|j| &a[i][0] * &b[0][j] + &a[i][1] * &b[1][j]))
}

fn det2(m: &IntMatrix2) -> BigInt {
    &m[0][0] * &m[1][1] - &m[0][1] * &m[1][0]
}

/// An element of GL(2, ℤ) together with its action on characters.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TorusGenerator {
    matrix: IntMatrix2,
    /// `(g⁻¹)ᵀ`, the induced map on character indices.
    dual: [[i64; 2]; 2],
}

impl TorusGenerator {
    pub fn new(matrix: IntMatrix2) -> Result<Self> {
        let det = det2(&matrix);
        if !(det.is_one() || (-&det).is_one()) {
            return Err(Error::InvalidDeterminant(det.to_string()));
        }
        let s = det.to_i64().expect("±1");
        let entry = |x: &BigInt| x.to_i64().ok_or(Error::LatticeOverflow);
        let [[a, b], [c, d]] = &matrix;
        // g⁻¹ = det·[[d, −b], [−c, a]], transposed
        let dual = [[s * entry(d)?, -s * entry(c)?], [-s * entry(b)?, s * entry(a)?]];
        Ok(Self { matrix, dual })
    }

    pub fn from_i64(m: [[i64; 2]; 2]) -> Result<Self> {
        Self::new(m.map(|r| r.map(BigInt::from)))
    }

    pub fn matrix(&self) -> &IntMatrix2 {
        &self.matrix
    }

    pub fn inverse(&self) -> Self {
        let det = det2(&self.matrix);
        let [[a, b], [c, d]] = &self.matrix;
        let inv = [[d * &det, -b * &det], [-c * &det, a * &det]];
        Self::new(inv).expect("inverse of a unimodular matrix is unimodular")
    }

    fn act(&self, m: LatticePoint) -> Option<LatticePoint> {
        let row = |r: [i64; 2]| r[0].checked_mul(m[0])?.checked_add(r[1].checked_mul(m[1])?);
        Some([row(self.dual[0])?, row(self.dual[1])?])
    }
}

/// `m ↦ (g⁻¹)ᵀm`, the index of `π(g)e_m`.
pub fn character_action(g: &TorusGenerator, m: LatticePoint) -> Result<LatticePoint> {
    if m == [0, 0] {
        return Err(Error::ZeroLatticePoint);
    }
    g.act(m).ok_or(Error::LatticeOverflow)
}

/// `{a_1, …, a_r, a_1⁻¹, …, a_r⁻¹}`.
#[derive(Clone, Debug)]
pub struct TorusGeneratorSet {
    pub generators: Vec<TorusGenerator>,
    pub inverse_of: Vec<usize>,
    pub q: u64,
}

/// Appends the inverses of `matrices`. Matrices must be unimodular and no
/// matrix may equal the inverse of a listed one (itself included).
pub fn build_torus_genset(matrices: &[[[i64; 2]; 2]]) -> Result<TorusGeneratorSet> {
    if matrices.is_empty() {
        return Err(Error::InvalidArgument("at least one generator is required".into()));
    }
    let base = matrices
        .iter()
        .map(|m| TorusGenerator::from_i64(*m))
        .collect::<Result<Vec<_>>>()?;
    for (i, g) in base.iter().enumerate() {
        let inv = g.inverse();
        if base.contains(&inv) {
            return Err(Error::InvalidArgument(format!(
                "generator {i} is the inverse of a listed generator"
            )));
        }
    }
    let r = base.len();
    let mut generators = base.clone();
    generators.extend(base.iter().map(TorusGenerator::inverse));
    let inverse_of = (0..2 * r).map(|i| (i + r) % (2 * r)).collect();
    Ok(TorusGeneratorSet { generators, inverse_of, q: (2 * r - 1) as u64 })
}

/// Named generator presets.
pub fn preset(name: &str) -> Option<Vec<[[i64; 2]; 2]>> {
    match name {
        "sanov" => Some(vec![[[1, 2], [0, 1]], [[1, 0], [2, 1]]]),
        "rank1" => Some(vec![[[1, 1], [0, 1]]]),
        _ => None,
    }
}

impl WordGroup for TorusGeneratorSet {
    type Element = IntMatrix2;

    fn num_generators(&self) -> usize {
        self.generators.len()
    }

    fn inverse_letter(&self, letter: usize) -> usize {
        self.inverse_of[letter]
    }

    fn identity(&self) -> IntMatrix2 {
        [[BigInt::one(), BigInt::zero()], [BigInt::zero(), BigInt::one()]]
    }

    fn generator(&self, letter: usize) -> &IntMatrix2 {
        &self.generators[letter].matrix
    }

    fn compose(&self, a: &IntMatrix2, b: &IntMatrix2) -> IntMatrix2 {
        mat2_mul(a, b)
    }
}

/// The nonzero lattice points of the box `‖m‖∞ ≤ R`.
#[derive(Clone, Debug, Serialize)]
pub struct LatticeWindow {
    pub radius: u32,
}

impl LatticeWindow {
    pub fn new(radius: u32) -> Self {
        Self { radius }
    }

    /// `(2R + 1)² − 1`.
    pub fn len(&self) -> usize {
        let side = 2 * self.radius as usize + 1;
        side * side - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, m: LatticePoint) -> Option<usize> {
        let r = self.radius as i64;
        if m == [0, 0] || m[0].abs() > r || m[1].abs() > r {
            return None;
        }
        let side = 2 * r + 1;
        let raw = ((m[0] + r) * side + (m[1] + r)) as usize;
        let center = (r * side + r) as usize;
        Some(if raw > center { raw - 1 } else { raw })
    }

    pub fn point(&self, index: usize) -> LatticePoint {
        let r = self.radius as i64;
        let side = 2 * r + 1;
        let center = (r * side + r) as usize;
        let raw = if index >= center { index + 1 } else { index } as i64;
        [raw / side - r, raw % side - r]
    }

    pub fn points(&self) -> impl Iterator<Item = LatticePoint> + '_ {
        (0..self.len()).map(|i| self.point(i))
    }
}

/// Anything that can be multiplied against a vector, symmetric by contract.
pub trait SymmetricOperator: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

/// Compression `P·π₀(μ_E)·P` to a lattice window, stored as integer
/// multiplicities in compressed rows; entry values are `count / |E|`.
#[derive(Clone, Debug)]
pub struct WindowOperator {
    pub window: LatticeWindow,
    pub word_count: u64,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    counts: Vec<u32>,
}

impl WindowOperator {
    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        let range = self.row_ptr[row]..self.row_ptr[row + 1];
        match self.cols[range.clone()].binary_search(&(col as u32)) {
            Ok(k) => self.counts[range.start + k] as f64 / self.word_count as f64,
            Err(_) => 0.0,
        }
    }

    pub fn row(&self, row: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let w = self.word_count as f64;
        (self.row_ptr[row]..self.row_ptr[row + 1]).map(move |k| (self.cols[k] as usize, self.counts[k] as f64 / w))
    }

    pub fn row_sum(&self, row: usize) -> f64 {
        let total: u64 = self.counts[self.row_ptr[row]..self.row_ptr[row + 1]].iter().map(|&c| c as u64).sum();
        total as f64 / self.word_count as f64
    }

    /// Exact structural symmetry: equal multiplicities at `(i, j)` and `(j, i)`.
    pub fn is_symmetric(&self) -> bool {
        (0..self.window.len()).into_par_iter().all(|i| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).all(|k| {
                let j = self.cols[k] as usize;
                let range = self.row_ptr[j]..self.row_ptr[j + 1];
                match self.cols[range.clone()].binary_search(&(i as u32)) {
                    Ok(t) => self.counts[range.start + t] == self.counts[k],
                    Err(_) => false,
                }
            })
        })
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.window.len();
        let mut out = vec![vec![0.0; n]; n];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] = v;
            }
        }
        out
    }
}

impl SymmetricOperator for WindowOperator {
    fn dim(&self) -> usize {
        self.window.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let w = 1.0 / self.word_count as f64;
        y.par_iter_mut().enumerate().for_each(|(i, yi)| {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.counts[k] as f64 * x[self.cols[k] as usize];
            }
            *yi = acc * w;
        });
    }
}

/// A dense symmetric matrix, mostly for testing the estimators.
pub struct DenseSymmetric(pub Vec<Vec<f64>>);

impl SymmetricOperator for DenseSymmetric {
    fn dim(&self) -> usize {
        self.0.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (row, yi) in self.0.iter().zip(y.iter_mut()) {
            *yi = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }
}

/// Assembles the compression of `μ_{S_n}` or `μ_{B_n}` to the window of
/// radius `R`. Every reduced word moves every window point letter by letter;
/// an image inside the window adds one to entry `(image, source)`. The word
/// set is closed under reversal, so the letter order does not change the sum.
pub fn window_operator(
    genset: &TorusGeneratorSet,
    n: u32,
    shape: Shape,
    radius: u32,
    budget: u64,
) -> Result<WindowOperator> {
    if radius == 0 {
        return Err(Error::InvalidArgument("window radius must be ≥ 1".into()));
    }
    let words_in_ball = check_budget(genset.q, n, budget)?;
    let word_count = match shape {
        Shape::Ball => words_in_ball,
        Shape::Sphere => {
            let (s, _) = crate::words::word_counts(genset.q, n);
            s.to_u64().expect("bounded by the ball")
        }
    };
    let window = LatticeWindow::new(radius);
    let dim = window.len();

    let columns: Vec<Vec<(u32, u32)>> = (0..dim)
        .into_par_iter()
        .map(|source| -> Result<Vec<(u32, u32)>> {
            let start = window.point(source);
            let mut hits: Vec<u32> = Vec::new();
            let mut overflow = false;
            walk_ball(
                genset,
                n as usize,
                Some(start),
                &|m: &Option<LatticePoint>, l| m.and_then(|m| genset.generators[l].act(m)),
                &mut |letters, m| {
                    let wanted = match shape {
                        Shape::Sphere => letters.len() == n as usize,
                        Shape::Ball => true,
                    };
                    if !wanted {
                        return;
                    }
                    match m {
                        Some(m) => {
                            if let Some(i) = window.index(*m) {
                                hits.push(i as u32);
                            }
                        }
                        None => overflow = true,
                    }
                },
            );
            if overflow {
                return Err(Error::LatticeOverflow);
            }
            hits.sort_unstable();
            let mut out: Vec<(u32, u32)> = Vec::new();
            for h in hits {
                match out.last_mut() {
                    Some((i, c)) if *i == h => *c += 1,
                    _ => out.push((h, 1)),
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    // transpose the per-source columns into rows
    let mut row_len = vec![0usize; dim];
    for col in &columns {
        for &(i, _) in col {
            row_len[i as usize] += 1;
        }
    }
    let mut row_ptr = vec![0usize; dim + 1];
    for i in 0..dim {
        row_ptr[i + 1] = row_ptr[i] + row_len[i];
    }
    let nnz = row_ptr[dim];
    let mut cols = vec![0u32; nnz];
    let mut counts = vec![0u32; nnz];
    let mut fill = row_ptr.clone();
    for (j, col) in columns.iter().enumerate() {
        for &(i, c) in col {
            let slot = &mut fill[i as usize];
            cols[*slot] = j as u32;
            counts[*slot] = c;
            *slot += 1;
        }
    }
    Ok(WindowOperator { window, word_count, row_ptr, cols, counts })
}

/// Iteration used by [`operator_norm_estimate_with`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NormMethod {
    /// Lanczos tridiagonalization; the extreme Ritz values bound the
    /// spectrum from inside and improve monotonically.
    Lanczos,
    /// Power iteration on `A²` through `‖Ax‖/‖x‖`.
    Power,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    // fixed chunking keeps the reduction order independent of the thread pool
    a.par_chunks(4096)
        .zip(b.par_chunks(4096))
        .map(|(x, y)| x.iter().zip(y).map(|(u, v)| u * v).sum::<f64>())
        .collect::<Vec<f64>>()
        .into_iter()
        .sum()
}

fn start_vector(dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let norm = dot(&v, &v).sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    v
}

/// Largest `|λ|` of a symmetric operator, estimated from below by Lanczos.
pub fn operator_norm_estimate<A: SymmetricOperator + ?Sized>(op: &A, tol: f64, seed: u64) -> Result<f64> {
    operator_norm_estimate_with(op, tol, seed, NormMethod::Lanczos, MAX_ITERATIONS)
}

pub fn operator_norm_estimate_with<A: SymmetricOperator + ?Sized>(
    op: &A,
    tol: f64,
    seed: u64,
    method: NormMethod,
    max_iterations: usize,
) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    if op.dim() == 0 {
        return Ok(0.0);
    }
    match method {
        NormMethod::Lanczos => lanczos(op, tol, seed, max_iterations),
        NormMethod::Power => power(op, tol, seed, max_iterations),
    }
}

fn power<A: SymmetricOperator + ?Sized>(op: &A, tol: f64, seed: u64, max_iterations: usize) -> Result<f64> {
    let mut x = start_vector(op.dim(), seed);
    let mut y = vec![0.0; op.dim()];
    let mut last = 0.0;
    for it in 0..max_iterations {
        op.apply(&x, &mut y);
        let norm = dot(&y, &y).sqrt();
        if norm == 0.0 {
            return Ok(0.0);
        }
        if it > 0 && (norm - last).abs() < tol {
            return Ok(norm);
        }
        last = norm;
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / norm;
        }
    }
    Err(Error::NoConvergence { iterations: max_iterations, last })
}

/// Number of eigenvalues of the tridiagonal matrix below `x`.
fn sturm_count(alpha: &[f64], beta: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0;
    for i in 0..alpha.len() {
        let off = if i == 0 { 0.0 } else { beta[i - 1] * beta[i - 1] / d };
        d = alpha[i] - x - off;
        if d == 0.0 {
            d = -f64::EPSILON * (alpha[i].abs() + x.abs() + f64::MIN_POSITIVE);
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Smallest and largest eigenvalues of a symmetric tridiagonal matrix.
fn tridiagonal_extremes(alpha: &[f64], beta: &[f64]) -> (f64, f64) {
    let m = alpha.len();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..m {
        let r = if i > 0 { beta[i - 1].abs() } else { 0.0 } + if i + 1 < m { beta[i].abs() } else { 0.0 };
        lo = lo.min(alpha[i] - r);
        hi = hi.max(alpha[i] + r);
    }
    let bisect = |mut a: f64, mut b: f64, below: &dyn Fn(usize) -> bool| {
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if below(sturm_count(alpha, beta, mid)) {
                b = mid;
            } else {
                a = mid;
            }
        }
        0.5 * (a + b)
    };
    let min = bisect(lo, hi, &|c| c >= 1);
    let max = bisect(lo, hi, &|c| c >= m);
    (min, max)
}

fn lanczos<A: SymmetricOperator + ?Sized>(op: &A, tol: f64, seed: u64, max_iterations: usize) -> Result<f64> {
    const CHECK_EVERY: usize = 10;
    let dim = op.dim();
    let mut v = start_vector(dim, seed);
    let mut v_prev = vec![0.0; dim];
    let mut w = vec![0.0; dim];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut last = f64::NAN;
    for it in 0..max_iterations.min(dim + 1) {
        op.apply(&v, &mut w);
        let a = dot(&w, &v);
        let b_prev = beta.last().copied().unwrap_or(0.0);
        w.par_iter_mut()
            .zip(v.par_iter().zip(v_prev.par_iter()))
            .for_each(|(wi, (vi, pi))| *wi -= a * vi + b_prev * pi);
        alpha.push(a);
        let b = dot(&w, &w).sqrt();
        let exhausted = b <= 1e-13 * (a.abs() + b_prev + f64::MIN_POSITIVE) || alpha.len() == dim;
        if exhausted || (it + 1) % CHECK_EVERY == 0 {
            let (lo, hi) = tridiagonal_extremes(&alpha, &beta);
            let estimate = lo.abs().max(hi.abs());
            if exhausted || (estimate - last).abs() < tol {
                return Ok(estimate);
            }
            last = estimate;
        }
        beta.push(b);
        std::mem::swap(&mut v_prev, &mut v);
        v.par_iter_mut().zip(w.par_iter()).for_each(|(vi, wi)| *vi = wi / b);
    }
    Err(Error::NoConvergence { iterations: max_iterations, last })
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceRow {
    pub radius: u32,
    pub points: usize,
    pub estimate: f64,
    pub below_theoretical: bool,
    pub nondecreasing: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceTable {
    pub q: u64,
    pub n: u32,
    pub shape: Shape,
    pub theoretical: f64,
    pub rows: Vec<ConvergenceRow>,
    pub pass: bool,
}

/// Windowed norm estimates for increasing radii against the free-group
/// value `regular_norm(q, n, shape)`.
pub fn torus_discrepancy_check(
    genset: &TorusGeneratorSet,
    n: u32,
    shape: Shape,
    radii: &[u32],
    tol: f64,
    seed: u64,
    budget: u64,
) -> Result<ConvergenceTable> {
    if radii.is_empty() || radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("radii must be nonempty and strictly increasing".into()));
    }
    let theoretical = regular_norm(genset.q, n, shape)?;
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for &radius in radii {
        let op = window_operator(genset, n, shape, radius, budget)?;
        let estimate = operator_norm_estimate(&op, tol, seed)?;
        let nondecreasing = rows.last().is_none_or(|prev| estimate >= prev.estimate - MONOTONE_TOL);
        rows.push(ConvergenceRow {
            radius,
            points: op.window.len(),
            estimate,
            below_theoretical: estimate <= theoretical + UPPER_TOL,
            nondecreasing,
        });
    }
    let pass = rows.iter().all(|r| r.below_theoretical && r.nondecreasing);
    Ok(ConvergenceTable { q: genset.q, n, shape, theoretical, rows, pass })
}
