//! Lipschitz quaternions (integer coordinates) and the construction of the
//! norm-`p` representatives that generate the free rotation group.

use std::fmt;
use std::ops::Mul;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rotation::ExactRotation;

/// `x0 + x1 i + x2 j + x3 k` with integer coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LipschitzQuaternion {
    pub x0: BigInt,
    pub x1: BigInt,
    pub x2: BigInt,
    pub x3: BigInt,
}

impl LipschitzQuaternion {
    pub fn new(
        x0: impl Into<BigInt>,
        x1: impl Into<BigInt>,
        x2: impl Into<BigInt>,
        x3: impl Into<BigInt>,
    ) -> Self {
        Self { x0: x0.into(), x1: x1.into(), x2: x2.into(), x3: x3.into() }
    }

    pub fn from_coords(c: [i64; 4]) -> Self {
        Self::new(c[0], c[1], c[2], c[3])
    }

    pub fn coords(&self) -> [&BigInt; 4] {
        [&self.x0, &self.x1, &self.x2, &self.x3]
    }

    pub fn norm(&self) -> BigInt {
        self.coords().iter().map(|x| *x * *x).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.coords().iter().all(|x| x.is_zero())
    }

    /// The involution `τ(x0 + x1 i + x2 j + x3 k) = x0 − x1 i − x2 j − x3 k`.
    pub fn conjugate(&self) -> Self {
        Self {
            x0: self.x0.clone(),
            x1: -&self.x1,
            x2: -&self.x2,
            x3: -&self.x3,
        }
    }

    /// Hamilton product with `ij = k`, `jk = i`, `ki = j`.
    pub fn multiply(&self, other: &Self) -> Self {
        let (a0, a1, a2, a3) = (&self.x0, &self.x1, &self.x2, &self.x3);
        let (b0, b1, b2, b3) = (&other.x0, &other.x1, &other.x2, &other.x3);
        Self {
            x0: a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
            x1: a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
            x2: a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
            x3: a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
        }
    }
}

impl Mul for &LipschitzQuaternion {
    type Output = LipschitzQuaternion;

    fn mul(self, rhs: Self) -> LipschitzQuaternion {
        self.multiply(rhs)
    }
}

impl fmt::Display for LipschitzQuaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {})", self.x0, self.x1, self.x2, self.x3)
    }
}

/// Deterministic trial division.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Rejects anything but a prime `p ≡ 1 mod 4`.
pub fn check_lps_prime(p: u64) -> Result<()> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if p % 4 != 1 {
        return Err(Error::WrongResidue(p));
    }
    Ok(())
}

/// Number of integer solutions of `x0² + x1² + x2² + x3² = n`, via Jacobi's
/// four-square theorem: eight times the sum of the divisors of `n` that are
/// not multiples of 4.
pub fn jacobi_count(n: u64) -> Result<u64> {
    if n == 0 {
        return Err(Error::InvalidArgument("jacobi_count needs n ≥ 1".into()));
    }
    let mut sum = 0u64;
    let mut d = 1u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            let e = n / d;
            if !d.is_multiple_of(4) {
                sum += d;
            }
            if e != d && !e.is_multiple_of(4) {
                sum += e;
            }
        }
        d += 1;
    }
    Ok(8 * sum)
}

fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// The `p + 1` quaternions of norm `p` with positive odd real part, sorted
/// lexicographically by `(x0, x1, x2, x3)`.
pub fn enumerate_representatives(p: u64) -> Result<Vec<LipschitzQuaternion>> {
    check_lps_prime(p)?;
    let bound = isqrt(p) as i64;
    let p = p as i64;
    let mut out = Vec::new();
    for x0 in (1..=bound).step_by(2) {
        for x1 in -bound..=bound {
            for x2 in -bound..=bound {
                let rest = p - x0 * x0 - x1 * x1 - x2 * x2;
                if rest < 0 {
                    continue;
                }
                let r = isqrt(rest as u64) as i64;
                if r * r != rest {
                    continue;
                }
                out.push(LipschitzQuaternion::from_coords([x0, x1, x2, -r]));
                if r != 0 {
                    out.push(LipschitzQuaternion::from_coords([x0, x1, x2, r]));
                }
            }
        }
    }
    out.sort();
    Ok(out)
}

/// `Ad(q): v ↦ q v q⁻¹` on the pure quaternions, as the integer matrix whose
/// column `c` is `q e_c τ(q)` over the denominator `N(q)`.
pub fn adjoint_rotation(q: &LipschitzQuaternion) -> Result<ExactRotation> {
    if q.is_zero() {
        return Err(Error::ZeroQuaternion);
    }
    let units = [
        LipschitzQuaternion::from_coords([0, 1, 0, 0]),
        LipschitzQuaternion::from_coords([0, 0, 1, 0]),
        LipschitzQuaternion::from_coords([0, 0, 0, 1]),
    ];
    let tau = q.conjugate();
    let mut num: [[BigInt; 3]; 3] = Default::default();
    for (c, e) in units.iter().enumerate() {
        let image = q.multiply(e).multiply(&tau);
        debug_assert!(image.x0.is_zero());
        num[0][c] = image.x1;
        num[1][c] = image.x2;
        num[2][c] = image.x3;
    }
    let norm = q.norm();
    let base: u64 = norm
        .abs()
        .try_into()
        .map_err(|_| Error::InvalidArgument(format!("norm {norm} does not fit in 64 bits")))?;
    Ok(ExactRotation::new(num, base, 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lq(c: [i64; 4]) -> LipschitzQuaternion {
        LipschitzQuaternion::from_coords(c)
    }

    fn brute_four_squares(n: i64) -> u64 {
        let b = isqrt(n as u64) as i64;
        let mut count = 0;
        for a in -b..=b {
            for c in -b..=b {
                for d in -b..=b {
                    for e in -b..=b {
                        if a * a + c * c + d * d + e * e == n {
                            count += 1;
                        }
                    }
                }
            }
        }
        count
    }

    #[test]
    fn multiply_examples() {
        assert_eq!(lq([0, 1, 0, 0]).multiply(&lq([0, 0, 1, 0])), lq([0, 0, 0, 1]));
        assert_eq!(lq([1, 2, 0, 0]).multiply(&lq([1, -2, 0, 0])), lq([5, 0, 0, 0]));
        assert_eq!(lq([1, 2, 0, 0]).multiply(&lq([0, 0, 1, 0])), lq([0, 0, 1, 2]));
        // jk = i, ki = j
        assert_eq!(lq([0, 0, 1, 0]).multiply(&lq([0, 0, 0, 1])), lq([0, 1, 0, 0]));
        assert_eq!(lq([0, 0, 0, 1]).multiply(&lq([0, 1, 0, 0])), lq([0, 0, 1, 0]));
    }

    #[test]
    fn conjugate_examples() {
        assert_eq!(lq([1, 2, 0, 0]).conjugate(), lq([1, -2, 0, 0]));
        assert_eq!(lq([3, 0, 2, 0]).conjugate(), lq([3, 0, -2, 0]));
        assert_eq!(lq([0, 0, 0, 0]).conjugate(), lq([0, 0, 0, 0]));
        let q = lq([3, -1, 4, 1]);
        assert_eq!(q.multiply(&q.conjugate()), lq([27, 0, 0, 0]));
    }

    #[test]
    fn jacobi_count_examples() {
        assert_eq!(jacobi_count(1).unwrap(), 8);
        assert_eq!(jacobi_count(5).unwrap(), 48);
        assert_eq!(jacobi_count(4).unwrap(), 24);
        assert!(jacobi_count(0).is_err());
    }

    #[test]
    fn jacobi_count_matches_brute_force_up_to_200() {
        for n in 1..=200u64 {
            assert_eq!(jacobi_count(n).unwrap(), brute_four_squares(n as i64), "n = {n}");
        }
    }

    #[test]
    fn representatives_for_five() {
        let reps = enumerate_representatives(5).unwrap();
        let expected: Vec<_> = [
            [1, -2, 0, 0],
            [1, 0, -2, 0],
            [1, 0, 0, -2],
            [1, 0, 0, 2],
            [1, 0, 2, 0],
            [1, 2, 0, 0],
        ]
        .into_iter()
        .map(lq)
        .collect();
        assert_eq!(reps, expected);
    }

    #[test]
    fn representatives_for_thirteen() {
        let reps = enumerate_representatives(13).unwrap();
        assert_eq!(reps.len(), 14);
        for q in &reps {
            assert_eq!(q.norm(), BigInt::from(13));
            assert!(q.x0 == BigInt::from(1) || q.x0 == BigInt::from(3));
        }
    }

    #[test]
    fn representatives_reject_bad_primes() {
        assert_eq!(enumerate_representatives(7), Err(Error::WrongResidue(7)));
        assert_eq!(enumerate_representatives(9), Err(Error::NotPrime(9)));
        assert_eq!(enumerate_representatives(1), Err(Error::NotPrime(1)));
        assert_eq!(enumerate_representatives(2), Err(Error::WrongResidue(2)));
    }

    #[test]
    fn representatives_split_into_conjugate_pairs() {
        for p in [5u64, 13, 17, 29, 37] {
            let reps = enumerate_representatives(p).unwrap();
            assert_eq!(reps.len() as u64, p + 1);
            assert_eq!(8 * (p + 1), jacobi_count(p).unwrap());
            let mut self_conj = 0;
            for q in &reps {
                let t = q.conjugate();
                assert!(reps.contains(&t));
                if &t == q {
                    self_conj += 1;
                }
            }
            assert_eq!(self_conj, 0);
        }
    }

    #[test]
    fn adjoint_examples() {
        let id = adjoint_rotation(&lq([1, 0, 0, 0])).unwrap();
        assert!(id.is_identity());

        let r = adjoint_rotation(&lq([1, 2, 0, 0])).unwrap();
        assert_eq!(r.den_base(), 5);
        assert_eq!(r.den_exp(), 1);
        assert_eq!(r.num_i64(), [[5, 0, 0], [0, -3, -4], [0, 4, -3]]);

        let rt = adjoint_rotation(&lq([1, -2, 0, 0])).unwrap();
        assert_eq!(rt, r.transpose());

        assert_eq!(adjoint_rotation(&lq([0, 0, 0, 0])), Err(Error::ZeroQuaternion));
    }

    #[test]
    fn adjoint_of_representatives_is_scaled_orthogonal() {
        for p in [5u64, 13, 17, 29] {
            for q in enumerate_representatives(p).unwrap() {
                let r = adjoint_rotation(&q).unwrap();
                assert_eq!(r.den_exp(), 1);
                assert!(r.is_scaled_orthogonal());
                assert!(r.has_positive_determinant());
                assert_eq!(adjoint_rotation(&q.conjugate()).unwrap(), r.transpose());
            }
        }
    }

    #[test]
    fn primality() {
        let primes: Vec<u64> = (0..60).filter(|&n| is_prime(n)).collect();
        assert_eq!(primes, [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59]);
    }
}
