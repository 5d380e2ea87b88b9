//! Homogeneous harmonic polynomials in `x, y, z` with integer coefficients,
//! and their exact inner products on the round 2-sphere.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::exact::{integer_nullspace, RatMatrix};

pub type Exponent = [u32; 3];

/// Degree-`d` monomials ordered by decreasing power of `x`, then of `y`.
pub fn monomials(degree: u32) -> Vec<Exponent> {
    let mut out = Vec::with_capacity(((degree + 1) * (degree + 2) / 2) as usize);
    for a in (0..=degree).rev() {
        for b in (0..=degree - a).rev() {
            out.push([a, b, degree - a - b]);
        }
    }
    out
}

fn monomial_index(degree: u32) -> HashMap<Exponent, usize> {
    monomials(degree).into_iter().enumerate().map(|(i, e)| (e, i)).collect()
}

/// A homogeneous polynomial stored as coefficients over [`monomials`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomogeneousPoly {
    pub degree: u32,
    pub coeffs: Vec<BigInt>,
}

impl HomogeneousPoly {
    pub fn terms(&self) -> impl Iterator<Item = (Exponent, &BigInt)> {
        monomials(self.degree)
            .into_iter()
            .zip(self.coeffs.iter())
            .filter(|(_, c)| !c.is_zero())
    }

    /// `Δ = ∂²/∂x² + ∂²/∂y² + ∂²/∂z²`.
    pub fn laplacian(&self) -> HomogeneousPoly {
        if self.degree < 2 {
            return HomogeneousPoly { degree: 0, coeffs: vec![BigInt::zero()] };
        }
        let target = monomial_index(self.degree - 2);
        let mut coeffs = vec![BigInt::zero(); target.len()];
        for (e, c) in self.terms() {
            for axis in 0..3 {
                if e[axis] >= 2 {
                    let mut f = e;
                    f[axis] -= 2;
                    coeffs[target[&f]] += c * BigInt::from(e[axis] * (e[axis] - 1));
                }
            }
        }
        HomogeneousPoly { degree: self.degree - 2, coeffs }
    }

    pub fn is_harmonic(&self) -> bool {
        self.laplacian().coeffs.iter().all(Zero::is_zero)
    }

    /// Exact value at an integer point.
    pub fn eval(&self, point: &[BigInt; 3]) -> BigInt {
        eval_with_powers(&self.coeffs, &monomial_values(self.degree, point))
    }
}

/// Values of every degree-`d` monomial at `point`, in [`monomials`] order.
pub fn monomial_values(degree: u32, point: &[BigInt; 3]) -> Vec<BigInt> {
    let powers: Vec<Vec<BigInt>> = point
        .iter()
        .map(|x| {
            let mut v = vec![BigInt::one()];
            for k in 1..=degree as usize {
                let next = &v[k - 1] * x;
                v.push(next);
            }
            v
        })
        .collect();
    monomials(degree)
        .into_iter()
        .map(|[a, b, c]| &powers[0][a as usize] * &powers[1][b as usize] * &powers[2][c as usize])
        .collect()
}

fn eval_with_powers(coeffs: &[BigInt], values: &[BigInt]) -> BigInt {
    coeffs
        .iter()
        .zip(values)
        .filter(|(c, _)| !c.is_zero())
        .map(|(c, v)| c * v)
        .sum()
}

/// A basis of the space `H_ℓ` of degree-`ℓ` harmonic polynomials.
#[derive(Clone, Debug)]
pub struct HarmonicBasis {
    pub degree: u32,
    pub polynomials: Vec<HomogeneousPoly>,
}

impl HarmonicBasis {
    pub fn dim(&self) -> usize {
        self.polynomials.len()
    }

    /// `E[j][k] = b_k(point_j)`.
    pub fn evaluation_row(&self, point: &[BigInt; 3]) -> Vec<BigInt> {
        let values = monomial_values(self.degree, point);
        self.polynomials.iter().map(|b| eval_with_powers(&b.coeffs, &values)).collect()
    }
}

/// The Laplacian as an integer matrix from degree-`ℓ` coefficients to
/// degree-`(ℓ−2)` coefficients.
pub fn laplacian_matrix(degree: u32) -> Vec<Vec<BigInt>> {
    let cols = monomials(degree);
    let target = monomial_index(degree - 2);
    let mut rows = vec![vec![BigInt::zero(); cols.len()]; target.len()];
    for (j, e) in cols.iter().enumerate() {
        for axis in 0..3 {
            if e[axis] >= 2 {
                let mut f = *e;
                f[axis] -= 2;
                rows[target[&f]][j] += BigInt::from(e[axis] * (e[axis] - 1));
            }
        }
    }
    rows
}

/// Exact nullspace of the Laplacian on degree-`ℓ` polynomials; the result
/// has `2ℓ + 1` primitive integer polynomials.
pub fn harmonic_basis(degree: u32) -> HarmonicBasis {
    let n = monomials(degree).len();
    let vectors = if degree < 2 {
        (0..n)
            .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
            .collect()
    } else {
        integer_nullspace(&laplacian_matrix(degree), n)
    };
    let polynomials: Vec<_> = vectors
        .into_iter()
        .map(|coeffs| HomogeneousPoly { degree, coeffs })
        .collect();
    assert_eq!(polynomials.len(), 2 * degree as usize + 1, "dim H_ℓ = 2ℓ + 1");
    HarmonicBasis { degree, polynomials }
}

fn double_factorial_odd(k: i64) -> BigInt {
    // (k)!! for odd k ≥ −1
    let mut acc = BigInt::one();
    let mut i = k;
    while i > 1 {
        acc *= i;
        i -= 2;
    }
    acc
}

/// `∫ x^a y^b z^c dν` for the normalized surface measure: zero if an
/// exponent is odd, otherwise `(a−1)!!(b−1)!!(c−1)!!/(a+b+c+1)!!`.
pub fn sphere_moment(e: Exponent) -> BigRational {
    if e.iter().any(|x| x % 2 == 1) {
        return BigRational::zero();
    }
    let num: BigInt = e.iter().map(|&x| double_factorial_odd(x as i64 - 1)).product();
    let den = double_factorial_odd((e[0] + e[1] + e[2]) as i64 + 1);
    BigRational::new(num, den)
}

/// Exact `L²(S², ν)` Gram matrix of the basis.
///
/// All moments of total degree `2ℓ` share the denominator `(2ℓ+1)!!`, so the
/// contraction runs over integers.
pub fn gram_matrix(basis: &HarmonicBasis) -> RatMatrix {
    let degree = basis.degree;
    let monos = monomials(degree);
    let common = double_factorial_odd(2 * degree as i64 + 1);
    let moment_num = |e: Exponent, f: Exponent| -> Option<BigInt> {
        let s = [e[0] + f[0], e[1] + f[1], e[2] + f[2]];
        if s.iter().any(|x| x % 2 == 1) {
            None
        } else {
            Some(s.iter().map(|&x| double_factorial_odd(x as i64 - 1)).product())
        }
    };
    // sparse moment pairs (i, j, m) with m the integer numerator
    let mut pairs: Vec<(usize, usize, BigInt)> = Vec::new();
    for (i, e) in monos.iter().enumerate() {
        for (j, f) in monos.iter().enumerate() {
            if let Some(m) = moment_num(*e, *f) {
                pairs.push((i, j, m));
            }
        }
    }
    let contracted: Vec<Vec<BigInt>> = basis
        .polynomials
        .iter()
        .map(|b| {
            let mut w = vec![BigInt::zero(); monos.len()];
            for (i, j, m) in &pairs {
                if !b.coeffs[*j].is_zero() {
                    w[*i] += m * &b.coeffs[*j];
                }
            }
            w
        })
        .collect();
    let dim = basis.dim();
    let mut g = vec![vec![BigRational::zero(); dim]; dim];
    for r in 0..dim {
        for c in r..dim {
            let num: BigInt = basis.polynomials[r]
                .coeffs
                .iter()
                .zip(&contracted[c])
                .filter(|(a, _)| !a.is_zero())
                .map(|(a, w)| a * w)
                .sum();
            let v = BigRational::new(num, common.clone());
            g[c][r] = v.clone();
            g[r][c] = v;
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{gauss_jordan, ldlt, rat};

    fn big3(p: [i64; 3]) -> [BigInt; 3] {
        p.map(BigInt::from)
    }

    #[test]
    fn low_degree_bases() {
        let b0 = harmonic_basis(0);
        assert_eq!(b0.dim(), 1);
        assert_eq!(gram_matrix(&b0), vec![vec![rat(1, 1)]]);

        let b1 = harmonic_basis(1);
        assert_eq!(b1.dim(), 3);
        let g1 = gram_matrix(&b1);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(g1[i][j], if i == j { rat(1, 3) } else { rat(0, 1) });
            }
        }
    }

    #[test]
    fn degree_two_spans_traceless_quadratics() {
        let b2 = harmonic_basis(2);
        assert_eq!(b2.dim(), 5);
        // x²−z², y²−z², xy, xz, yz in monomial order x², xy, xz, y², yz, z²
        let expected: Vec<Vec<i64>> = vec![
            vec![1, 0, 0, 0, 0, -1],
            vec![0, 0, 0, 1, 0, -1],
            vec![0, 1, 0, 0, 0, 0],
            vec![0, 0, 1, 0, 0, 0],
            vec![0, 0, 0, 0, 1, 0],
        ];
        let mut rows: Vec<Vec<BigInt>> = b2.polynomials.iter().map(|p| p.coeffs.clone()).collect();
        rows.extend(expected.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()));
        assert_eq!(gauss_jordan(&mut rows, 6).len(), 5, "same span");
    }

    #[test]
    fn bases_are_harmonic_and_independent() {
        for degree in 0..=10 {
            let b = harmonic_basis(degree);
            assert_eq!(b.dim(), 2 * degree as usize + 1);
            for p in &b.polynomials {
                assert!(p.is_harmonic());
            }
            let mut rows: Vec<Vec<BigInt>> = b.polynomials.iter().map(|p| p.coeffs.clone()).collect();
            let n = rows[0].len();
            assert_eq!(gauss_jordan(&mut rows, n).len(), b.dim());
        }
    }

    #[test]
    fn moments() {
        assert_eq!(sphere_moment([0, 0, 0]), rat(1, 1));
        assert_eq!(sphere_moment([2, 0, 0]), rat(1, 3));
        assert_eq!(sphere_moment([2, 2, 0]), rat(1, 15));
        assert_eq!(sphere_moment([4, 0, 0]), rat(1, 5));
        assert_eq!(sphere_moment([1, 1, 0]), rat(0, 1));
    }

    /// Monte-Carlo-free check of the moment formula: a Fibonacci-lattice
    /// quadrature on the sphere integrates low-degree polynomials closely.
    #[test]
    fn moments_match_quadrature() {
        let n = 200_000;
        let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
        let mut sums = HashMap::new();
        let exps: Vec<Exponent> = vec![[2, 0, 0], [2, 2, 0], [4, 2, 0], [2, 2, 2], [6, 0, 0]];
        for k in 0..n {
            let z = 1.0 - 2.0 * (k as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let t = golden * k as f64;
            let (x, y) = (r * t.cos(), r * t.sin());
            for e in &exps {
                *sums.entry(*e).or_insert(0.0) += x.powi(e[0] as i32) * y.powi(e[1] as i32) * z.powi(e[2] as i32);
            }
        }
        for e in &exps {
            let q = sums[e] / n as f64;
            let exact = crate::exact::to_f64(&sphere_moment(*e));
            assert!((q - exact).abs() < 1e-4, "{e:?}: {q} vs {exact}");
        }
    }

    #[test]
    fn gram_is_positive_definite() {
        for degree in 0..=8 {
            let g = gram_matrix(&harmonic_basis(degree));
            assert!(ldlt(&g).is_some(), "degree {degree}");
        }
    }

    #[test]
    fn gram_matches_direct_product_integration() {
        let b = harmonic_basis(3);
        let g = gram_matrix(&b);
        for (r, p) in b.polynomials.iter().enumerate() {
            for (c, q) in b.polynomials.iter().enumerate() {
                let mut acc = BigRational::zero();
                for (e, a) in p.terms() {
                    for (f, bq) in q.terms() {
                        let s = [e[0] + f[0], e[1] + f[1], e[2] + f[2]];
                        acc += sphere_moment(s) * BigRational::from_integer(a * bq);
                    }
                }
                assert_eq!(acc, g[r][c]);
            }
        }
    }

    #[test]
    fn evaluation() {
        let b = harmonic_basis(1);
        let row = b.evaluation_row(&big3([2, -3, 5]));
        let mut sorted: Vec<i64> = row.iter().map(|x| i64::try_from(x).unwrap()).collect();
        sorted.sort();
        assert_eq!(sorted, vec![-3, 2, 5]);
    }
}
