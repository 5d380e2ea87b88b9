//! Exact elements of SO(3) with denominators that are powers of a fixed prime.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

pub type IntMatrix3 = [[BigInt; 3]; 3];

/// The rotation `num / den_base^den_exp`, kept in canonical form: `den_exp`
/// is minimal, and `den_base` is 1 whenever `den_exp` is 0. Equality and
/// hashing are therefore plain field comparisons.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExactRotation {
    num: IntMatrix3,
    den_base: u64,
    den_exp: u32,
}

impl ExactRotation {
    pub fn new(num: IntMatrix3, den_base: u64, den_exp: u32) -> Self {
        assert!(den_base > 0, "denominator base must be positive");
        let mut r = Self { num, den_base, den_exp };
        r.canonicalize();
        r
    }

    pub fn identity() -> Self {
        let mut num: IntMatrix3 = Default::default();
        for (i, row) in num.iter_mut().enumerate() {
            row[i] = BigInt::one();
        }
        Self { num, den_base: 1, den_exp: 0 }
    }

    fn canonicalize(&mut self) {
        if self.den_base == 1 {
            self.den_exp = 0;
        }
        let base = BigInt::from(self.den_base);
        while self.den_exp > 0
            && self.num.iter().flatten().all(|x| (x % &base).is_zero())
        {
            for x in self.num.iter_mut().flatten() {
                *x /= &base;
            }
            self.den_exp -= 1;
        }
        if self.den_exp == 0 {
            self.den_base = 1;
        }
    }

    pub fn num(&self) -> &IntMatrix3 {
        &self.num
    }

    pub fn den_base(&self) -> u64 {
        self.den_base
    }

    pub fn den_exp(&self) -> u32 {
        self.den_exp
    }

    pub fn denominator(&self) -> BigInt {
        num_traits::pow(BigInt::from(self.den_base), self.den_exp as usize)
    }

    /// Numerator entries as `i64`; panics if any entry overflows.
    pub fn num_i64(&self) -> [[i64; 3]; 3] {
        let mut out = [[0i64; 3]; 3];
        for (i, row) in self.num.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                out[i][j] = x.to_i64().expect("entry fits in i64");
            }
        }
        out
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity()
    }

    pub fn transpose(&self) -> Self {
        let mut num: IntMatrix3 = Default::default();
        for (i, row) in self.num.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                num[j][i] = x.clone();
            }
        }
        Self { num, den_base: self.den_base, den_exp: self.den_exp }
    }

    /// Exact product. Panics if both factors carry different nontrivial bases.
    pub fn multiply(&self, other: &Self) -> Self {
        let base = match (self.den_exp, other.den_exp) {
            (0, _) => other.den_base,
            (_, 0) => self.den_base,
            _ => {
                assert_eq!(
                    self.den_base, other.den_base,
                    "cannot multiply rotations over different primes"
                );
                self.den_base
            }
        };
        let num = mat_mul(&self.num, &other.num);
        Self::new(num, base, self.den_exp + other.den_exp)
    }

    /// `MᵀM = d²·I` where `d` is the full denominator.
    pub fn is_scaled_orthogonal(&self) -> bool {
        let d = self.denominator();
        let d2 = &d * &d;
        let mtm = mat_mul(&self.transpose().num, &self.num);
        (0..3).all(|i| {
            (0..3).all(|j| if i == j { mtm[i][j] == d2 } else { mtm[i][j].is_zero() })
        })
    }

    /// `det M = d³`, i.e. the rotation preserves orientation.
    pub fn has_positive_determinant(&self) -> bool {
        let d = self.denominator();
        det3(&self.num) == &d * &d * &d
    }

    /// Trace as a float, used for rotation angles.
    pub fn trace_f64(&self) -> f64 {
        let t: BigInt = (0..3).map(|i| self.num[i][i].clone()).sum();
        ratio_to_f64(&t, &self.denominator())
    }

    pub fn to_f64(&self) -> [[f64; 3]; 3] {
        let d = self.denominator();
        let mut out = [[0.0; 3]; 3];
        for (i, row) in self.num.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                out[i][j] = ratio_to_f64(x, &d);
            }
        }
        out
    }
}

fn ratio_to_f64(n: &BigInt, d: &BigInt) -> f64 {
    num_rational::BigRational::new(n.clone(), d.clone())
        .to_f64()
        .unwrap_or(f64::NAN)
}

pub(crate) fn mat_mul(a: &IntMatrix3, b: &IntMatrix3) -> IntMatrix3 {
    let mut out: IntMatrix3 = Default::default();
    for i in 0..3 {
        for j in 0..3 {
            let mut acc = BigInt::zero();
            for k in 0..3 {
                acc += &a[i][k] * &b[k][j];
            }
            out[i][j] = acc;
        }
    }
    out
}

fn det3(m: &IntMatrix3) -> BigInt {
    &m[0][0] * (&m[1][1] * &m[2][2] - &m[1][2] * &m[2][1])
        - &m[0][1] * (&m[1][0] * &m[2][2] - &m[1][2] * &m[2][0])
        + &m[0][2] * (&m[1][0] * &m[2][1] - &m[1][1] * &m[2][0])
}

impl fmt::Display for ExactRotation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .num
            .iter()
            .map(|r| format!("[{}, {}, {}]", r[0], r[1], r[2]))
            .collect();
        write!(f, "[{}] / {}^{}", rows.join(", "), self.den_base, self.den_exp)
    }
}
