//! Cyclic Jacobi eigenvalue iteration for small dense symmetric matrices.

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Eigenvalues of a symmetric matrix, ascending.
///
/// Sweeps plane rotations over every off-diagonal pair until the
/// off-diagonal mass is negligible against the Frobenius norm.
pub fn symmetric_eigenvalues(matrix: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = matrix.len();
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    let frob: f64 = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    if frob == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let off = |a: &Vec<Vec<f64>>| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[i][j] * a[i][j];
                }
            }
        }
        s.sqrt()
    };
    let mut sweeps = 0;
    while off(&a) > 1e-15 * frob {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence { iterations: sweeps, last: off(&a) });
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
        sweeps += 1;
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    eig.sort_by(|x, y| x.total_cmp(y));
    Ok(eig)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_and_identity() {
        assert_eq!(symmetric_eigenvalues(&[vec![3.0, 0.0], vec![0.0, -1.0]]).unwrap(), vec![-1.0, 3.0]);
        let id: Vec<Vec<f64>> = (0..4).map(|i| (0..4).map(|j| (i == j) as u8 as f64).collect()).collect();
        for e in symmetric_eigenvalues(&id).unwrap() {
            assert!((e - 1.0).abs() < 1e-15);
        }
        assert_eq!(symmetric_eigenvalues(&vec![vec![0.0; 3]; 3]).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn path_graph_spectrum() {
        // adjacency of the path on n vertices: 2 cos(kπ/(n+1))
        let n: usize = 30;
        let a: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i.abs_diff(j) == 1 { 1.0 } else { 0.0 }).collect())
            .collect();
        let eig = symmetric_eigenvalues(&a).unwrap();
        let mut expected: Vec<f64> = (1..=n)
            .map(|k| 2.0 * (k as f64 * std::f64::consts::PI / (n + 1) as f64).cos())
            .collect();
        expected.sort_by(|x, y| x.total_cmp(y));
        for (e, x) in eig.iter().zip(&expected) {
            assert!((e - x).abs() < 1e-12);
        }
    }

    #[test]
    fn trace_and_frobenius_are_preserved() {
        let n = 12;
        let a: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| ((i * 7 + j * 7 + i * j) % 11) as f64 - 5.0).collect())
            .collect();
        let eig = symmetric_eigenvalues(&a).unwrap();
        let trace: f64 = (0..n).map(|i| a[i][i]).sum();
        let frob2: f64 = a.iter().flatten().map(|x| x * x).sum();
        assert!((eig.iter().sum::<f64>() - trace).abs() < 1e-10);
        assert!((eig.iter().map(|x| x * x).sum::<f64>() - frob2).abs() < 1e-9);
    }
}
