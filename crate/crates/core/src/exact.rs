//! Exact linear algebra over ℤ and ℚ.
//!
//! Elimination is fraction-free: rows stay integral and are divided by
//! their content after every update, which keeps coefficient growth in
//! check without rational arithmetic in the inner loop.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type IntMatrix = Vec<Vec<BigInt>>;
pub type RatMatrix = Vec<Vec<BigRational>>;

fn content(row: &[BigInt]) -> BigInt {
    let mut g = BigInt::zero();
    for x in row {
        if !x.is_zero() {
            g = g.gcd(x);
            if g.is_one() {
                break;
            }
        }
    }
    g
}

/// Divides a row by the gcd of its entries.
pub fn make_primitive(row: &mut [BigInt]) {
    let g = content(row);
    if !g.is_zero() && !g.is_one() {
        for x in row.iter_mut() {
            if !x.is_zero() {
                *x /= &g;
            }
        }
    }
}

/// `target ← a·target − b·pivot` where `a, b` cancel column `col`.
fn eliminate(target: &mut [BigInt], pivot: &[BigInt], pivot_support: &[usize], col: usize) {
    let a = &pivot[col];
    let b = &target[col];
    let g = a.gcd(b);
    let (ma, mb) = (a / &g, b / &g);
    if !ma.is_one() {
        for x in target.iter_mut() {
            if !x.is_zero() {
                *x *= &ma;
            }
        }
    }
    for &k in pivot_support {
        target[k] -= &mb * &pivot[k];
    }
    make_primitive(target);
}

/// In-place Gauss–Jordan elimination over ℤ. Pivots are sought only in the
/// first `pivot_cols` columns, so augmented systems can be reduced. On return
/// the first `rank` rows carry the pivots (every other row is zero in each
/// pivot column); the returned vector lists the pivot columns.
pub fn gauss_jordan(rows: &mut [Vec<BigInt>], pivot_cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for row in rows.iter_mut() {
        make_primitive(row);
    }
    for c in 0..pivot_cols {
        if r == rows.len() {
            break;
        }
        // smallest nonzero entry keeps multipliers small
        let Some(best) = (r..rows.len())
            .filter(|&i| !rows[i][c].is_zero())
            .min_by(|&i, &j| rows[i][c].abs().cmp(&rows[j][c].abs()))
        else {
            continue;
        };
        rows.swap(r, best);
        if rows[r][c].is_negative() {
            for x in rows[r].iter_mut() {
                *x = -&*x;
            }
        }
        let pivot = rows[r].clone();
        let support: Vec<usize> = (0..pivot.len()).filter(|&k| !pivot[k].is_zero()).collect();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                eliminate(row, &pivot, &support, c);
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Primitive integer basis of `{x : M x = 0}` for an `m × ncols` matrix.
/// Vectors are indexed by free column, in increasing column order.
pub fn integer_nullspace(matrix: &[Vec<BigInt>], ncols: usize) -> Vec<Vec<BigInt>> {
    let mut rows: IntMatrix = matrix.to_vec();
    let pivots = gauss_jordan(&mut rows, ncols);
    let is_pivot = {
        let mut v = vec![false; ncols];
        for &c in &pivots {
            v[c] = true;
        }
        v
    };
    let lcm = pivots
        .iter()
        .enumerate()
        .fold(BigInt::one(), |l, (r, &c)| l.lcm(&rows[r][c]));
    (0..ncols)
        .filter(|&f| !is_pivot[f])
        .map(|f| {
            let mut v = vec![BigInt::zero(); ncols];
            v[f] = lcm.clone();
            for (r, &c) in pivots.iter().enumerate() {
                if !rows[r][f].is_zero() {
                    v[c] = -(&rows[r][f] * &lcm) / &rows[r][c];
                }
            }
            make_primitive(&mut v);
            v
        })
        .collect()
}

/// Solves `lhs · X = rhs` for square nonsingular `lhs`; `None` if singular.
pub fn solve_integer(lhs: &[Vec<BigInt>], rhs: &[Vec<BigInt>]) -> Option<RatMatrix> {
    let n = lhs.len();
    let k = rhs.first().map_or(0, Vec::len);
    let mut rows: IntMatrix = lhs
        .iter()
        .zip(rhs)
        .map(|(l, r)| l.iter().chain(r.iter()).cloned().collect())
        .collect();
    let pivots = gauss_jordan(&mut rows, n);
    if pivots.len() < n {
        return None;
    }
    Some(
        (0..n)
            .map(|i| {
                let d = &rows[i][i];
                (0..k).map(|j| BigRational::new(rows[i][n + j].clone(), d.clone())).collect()
            })
            .collect(),
    )
}

/// Incrementally grown set of linearly independent integer rows.
#[derive(Default)]
pub struct IndependentRows {
    rows: Vec<(usize, Vec<BigInt>)>,
}

impl IndependentRows {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Adds `row` if it is independent of the rows kept so far.
    pub fn try_insert(&mut self, row: &[BigInt]) -> bool {
        let mut v = row.to_vec();
        make_primitive(&mut v);
        for (c, pivot) in &self.rows {
            if !v[*c].is_zero() {
                let support: Vec<usize> = (0..pivot.len()).filter(|&k| !pivot[k].is_zero()).collect();
                eliminate(&mut v, pivot, &support, *c);
            }
        }
        match v.iter().position(|x| !x.is_zero()) {
            Some(c) => {
                self.rows.push((c, v));
                true
            }
            None => false,
        }
    }
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

pub fn identity(n: usize) -> RatMatrix {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }).collect())
        .collect()
}

pub fn transpose(a: &RatMatrix) -> RatMatrix {
    let n = a.len();
    let m = a.first().map_or(0, Vec::len);
    (0..m).map(|j| (0..n).map(|i| a[i][j].clone()).collect()).collect()
}

pub fn mat_mul(a: &RatMatrix, b: &RatMatrix) -> RatMatrix {
    let m = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..m)
                .map(|j| {
                    let mut acc = BigRational::zero();
                    for (k, x) in row.iter().enumerate() {
                        if !x.is_zero() && !b[k][j].is_zero() {
                            acc += x * &b[k][j];
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

/// `G = L·D·Lᵀ` with `L` unit lower triangular; `None` unless `G` is
/// symmetric positive definite.
pub fn ldlt(g: &RatMatrix) -> Option<(RatMatrix, Vec<BigRational>)> {
    let n = g.len();
    let mut l = identity(n);
    let mut d: Vec<BigRational> = Vec::with_capacity(n);
    for j in 0..n {
        let mut dj = g[j][j].clone();
        for k in 0..j {
            if !l[j][k].is_zero() {
                dj -= &l[j][k] * &l[j][k] * &d[k];
            }
        }
        if !dj.is_positive() {
            return None;
        }
        for i in j + 1..n {
            if g[i][j] != g[j][i] {
                return None;
            }
            let mut v = g[i][j].clone();
            for k in 0..j {
                if !l[i][k].is_zero() && !l[j][k].is_zero() {
                    v -= &l[i][k] * &l[j][k] * &d[k];
                }
            }
            l[i][j] = v / &dj;
        }
        d.push(dj);
    }
    Some((l, d))
}

/// Inverse of a unit lower-triangular matrix.
pub fn unit_lower_inverse(l: &RatMatrix) -> RatMatrix {
    let n = l.len();
    let mut inv = identity(n);
    for j in 0..n {
        for i in j + 1..n {
            let mut acc = BigRational::zero();
            for k in j..i {
                if !l[i][k].is_zero() && !inv[k][j].is_zero() {
                    acc -= &l[i][k] * &inv[k][j];
                }
            }
            inv[i][j] = acc;
        }
    }
    inv
}

pub fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

pub fn matrix_to_f64(a: &RatMatrix) -> Vec<Vec<f64>> {
    a.iter().map(|r| r.iter().map(to_f64).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(rows: &[&[i64]]) -> IntMatrix {
        rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
    }

    fn int_mat_vec(m: &IntMatrix, v: &[BigInt]) -> Vec<BigInt> {
        m.iter().map(|r| r.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    #[test]
    fn nullspace_of_small_matrix() {
        let m = ints(&[&[1, 2, 3], &[2, 4, 6]]);
        let ns = integer_nullspace(&m, 3);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!(int_mat_vec(&m, v).iter().all(Zero::is_zero));
        }
        let full = ints(&[&[2, 1], &[1, 3]]);
        assert!(integer_nullspace(&full, 2).is_empty());
    }

    #[test]
    fn solve_matches_hand_inverse() {
        let lhs = ints(&[&[2, 1], &[1, 3]]);
        let rhs = ints(&[&[1, 0], &[0, 1]]);
        let x = solve_integer(&lhs, &rhs).unwrap();
        assert_eq!(x, vec![vec![rat(3, 5), rat(-1, 5)], vec![rat(-1, 5), rat(2, 5)]]);
        assert!(solve_integer(&ints(&[&[1, 2], &[2, 4]]), &rhs).is_none());
    }

    #[test]
    fn independent_rows_rank() {
        let mut ir = IndependentRows::new();
        assert!(ir.try_insert(&ints(&[&[1, 2, 3]])[0]));
        assert!(!ir.try_insert(&ints(&[&[2, 4, 6]])[0]));
        assert!(ir.try_insert(&ints(&[&[0, 1, 1]])[0]));
        assert!(!ir.try_insert(&ints(&[&[1, 3, 4]])[0]));
        assert!(ir.try_insert(&ints(&[&[0, 0, 7]])[0]));
        assert!(!ir.try_insert(&ints(&[&[5, -1, 2]])[0]));
        assert_eq!(ir.rank(), 3);
    }

    #[test]
    fn ldlt_reconstructs() {
        let g = vec![
            vec![rat(4, 1), rat(2, 1), rat(2, 3)],
            vec![rat(2, 1), rat(5, 1), rat(1, 1)],
            vec![rat(2, 3), rat(1, 1), rat(3, 1)],
        ];
        let (l, d) = ldlt(&g).unwrap();
        let dm: RatMatrix = (0..3)
            .map(|i| (0..3).map(|j| if i == j { d[i].clone() } else { BigRational::zero() }).collect())
            .collect();
        assert_eq!(mat_mul(&mat_mul(&l, &dm), &transpose(&l)), g);
        assert_eq!(mat_mul(&l, &unit_lower_inverse(&l)), identity(3));
        let indefinite = vec![vec![rat(1, 1), rat(2, 1)], vec![rat(2, 1), rat(1, 1)]];
        assert!(ldlt(&indefinite).is_none());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn nullspace_vectors_are_annihilated(
                entries in proptest::collection::vec(-4i64..=4, 12)
            ) {
                let m: IntMatrix = entries.chunks(4).map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
                let ns = integer_nullspace(&m, 4);
                let mut rows = m.clone();
                let rank = gauss_jordan(&mut rows, 4).len();
                prop_assert_eq!(ns.len(), 4 - rank);
                for v in &ns {
                    prop_assert!(int_mat_vec(&m, v).iter().all(Zero::is_zero));
                    prop_assert!(v.iter().any(|x| !x.is_zero()));
                }
            }
        }
    }
}
