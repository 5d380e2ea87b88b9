//! Closed forms on the `(q+1)`-regular tree: Hecke polynomials, the
//! Harish-Chandra function, and the regular-representation norms of sphere
//! and ball averages on a free group of rank `(q+1)/2`.
//!
//! All tree formulas are valid for any integer `q ≥ 1`; odd `q` is the case
//! that comes from a free group.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quaternion::check_lps_prime;
use crate::words::{biguint_to_f64, sphere_count, word_counts};

/// Word-metric sphere `S_n` or ball `B_n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Sphere,
    Ball,
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Shape::Sphere => "sphere",
            Shape::Ball => "ball",
        })
    }
}

impl FromStr for Shape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sphere" => Ok(Shape::Sphere),
            "ball" => Ok(Shape::Ball),
            other => Err(Error::InvalidArgument(format!("unknown shape `{other}`"))),
        }
    }
}

/// `P_n` with `T_n = P_n(T_1)` in the Hecke algebra of the free group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeckePolynomial {
    pub q: u64,
    pub degree: usize,
    /// Coefficient of `X^k` at index `k`.
    pub coefficients: Vec<BigInt>,
}

impl HeckePolynomial {
    pub fn eval(&self, x: f64) -> f64 {
        self.coefficients
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + c.to_f64().unwrap_or(f64::NAN))
    }
}

/// `P_0 = 1`, `P_1 = X`, `P_2 = X² − (q+1)`, `P_{n+1} = X·P_n − q·P_{n−1}`.
pub fn hecke_polynomial(q: u64, n: usize) -> HeckePolynomial {
    hecke_family(q, n).pop().expect("family has n + 1 members")
}

/// `P_0, …, P_n`.
pub fn hecke_family(q: u64, n: usize) -> Vec<HeckePolynomial> {
    let qb = BigInt::from(q);
    let mut coeffs: Vec<Vec<BigInt>> = vec![vec![BigInt::from(1)]];
    if n >= 1 {
        coeffs.push(vec![BigInt::zero(), BigInt::from(1)]);
    }
    if n >= 2 {
        coeffs.push(vec![-BigInt::from(q + 1), BigInt::zero(), BigInt::from(1)]);
    }
    for k in 2..n {
        let (prev, cur) = (&coeffs[k - 1], &coeffs[k]);
        let mut next = vec![BigInt::zero(); k + 2];
        for (i, c) in cur.iter().enumerate() {
            next[i + 1] += c;
        }
        for (i, c) in prev.iter().enumerate() {
            next[i] -= &qb * c;
        }
        coeffs.push(next);
    }
    coeffs
        .into_iter()
        .enumerate()
        .map(|(degree, coefficients)| HeckePolynomial { q, degree, coefficients })
        .collect()
}

/// `Ξ(n) = (1 + n(q−1)/(q+1))·q^{−n/2}`.
pub fn harish_chandra(q: u64, n: u32) -> f64 {
    let qf = q as f64;
    (1.0 + (qf - 1.0) / (qf + 1.0) * n as f64) * qf.powf(-(n as f64) / 2.0)
}

/// `Ξ(n)` summed over the boundary partition of the tree.
///
/// Let `[x₀, gx₀]` be a geodesic of length `n`. Every boundary point lies in
/// exactly one shadow `U_x` of a vertex `x` at distance 1 from the geodesic:
/// `q` branches hang off each endpoint and `q − 1` off each interior vertex.
/// The shadow of `x` has mass `[(q+1)q^{d(x₀,x)−1}]⁻¹` and carries the
/// constant weight `q^{(d(x₀,x) − d(gx₀,x))/2}`.
pub fn harish_chandra_boundary_sum(q: u64, n: u32) -> Result<f64> {
    if q < 2 || n < 1 {
        return Err(Error::InvalidArgument(format!(
            "boundary sum needs q ≥ 2 and n ≥ 1, got q = {q}, n = {n}"
        )));
    }
    let qf = q as f64;
    let n = n as i64;
    let mut total = 0.0;
    for i in 0..=n {
        let branches = if i == 0 || i == n { q } else { q - 1 };
        // a branch vertex hanging off the geodesic vertex at position i
        let d_start = i + 1;
        let d_end = (n - i) + 1;
        let mass = 1.0 / ((qf + 1.0) * qf.powi((d_start - 1) as i32));
        let weight = qf.powf((d_start - d_end) as f64 / 2.0);
        for _ in 0..branches {
            total += weight * mass;
        }
    }
    Ok(total)
}

fn rel_err(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn agree(what: &'static str, a: f64, b: f64, tol: f64) -> Result<()> {
    if rel_err(a, b) <= tol {
        Ok(())
    } else {
        Err(Error::Inconsistent { what, lhs: a, rhs: b })
    }
}

/// `c(q, n) = (1 + 2q^{−n} Σ_{k<n} q^k)⁻¹`, cross-checked against
/// `(q−1)/(q+1 − 2q^{−n})`.
pub fn c_factor(q: u64, n: u32) -> Result<f64> {
    if q < 2 || n < 1 {
        return Err(Error::InvalidArgument(format!("c(q, n) needs q ≥ 2 and n ≥ 1, got q = {q}, n = {n}")));
    }
    let qf = q as f64;
    let geometric: f64 = (0..n).map(|k| qf.powi(k as i32)).sum();
    let sum_form = 1.0 / (1.0 + 2.0 * qf.powi(-(n as i32)) * geometric);
    let closed = (qf - 1.0) / (qf + 1.0 - 2.0 / qf.powi(n as i32));
    agree("c_factor two forms", sum_form, closed, 1e-14)?;
    Ok(sum_form)
}

/// `(1/|B_n|) Σ_{k≤n} Ξ(k)|S_k|`.
pub fn ball_norm_sum_form(q: u64, n: u32) -> f64 {
    let total: f64 = (0..=n)
        .map(|k| harish_chandra(q, k) * biguint_to_f64(&sphere_count(q, k)))
        .sum();
    total / biguint_to_f64(&word_counts(q, n).1)
}

/// Closed form of `‖ρ_Γ(μ_{B_n})‖`.
pub fn ball_norm_closed_form(q: u64, n: u32) -> Result<f64> {
    if q == 1 {
        return Ok(1.0);
    }
    if n == 0 {
        return Ok(1.0);
    }
    let qf = q as f64;
    Ok(c_factor(q, n)? * (1.0 + (1.0 + 1.0 / qf.sqrt()) * n as f64) * qf.powf(-(n as f64) / 2.0))
}

/// Norm of the sphere or ball average in the regular representation of the
/// free group with branching `q`. The ball value is cross-checked against
/// the `Ξ`-weighted sum.
pub fn regular_norm(q: u64, n: u32, shape: Shape) -> Result<f64> {
    if q == 0 {
        return Err(Error::InvalidArgument("q must be ≥ 1".into()));
    }
    if q == 1 {
        return Ok(1.0);
    }
    match shape {
        Shape::Sphere => Ok(harish_chandra(q, n)),
        Shape::Ball => {
            let closed = ball_norm_closed_form(q, n)?;
            agree("ball norm closed vs sum form", closed, ball_norm_sum_form(q, n), 1e-12)?;
            Ok(closed)
        }
    }
}

/// `sup |P_n|` over `[−2√q, 2√q]` by a dense grid refined with golden-section
/// search. The result is checked against `P_n(2√q)` and `Ξ(n)|S_n|`.
pub fn hecke_sup(q: u64, n: usize, grid_points: usize) -> Result<f64> {
    if grid_points < 1001 {
        return Err(Error::InvalidArgument("hecke_sup needs at least 1001 grid points".into()));
    }
    let poly = hecke_polynomial(q, n);
    let edge = 2.0 * (q as f64).sqrt();
    let f = |x: f64| poly.eval(x).abs();
    let step = 2.0 * edge / (grid_points - 1) as f64;
    let grid = |i: usize| -edge + step * i as f64;
    let (best_i, mut best) = (0..grid_points)
        .map(|i| (i, f(grid(i))))
        .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
    let lo = grid(best_i.saturating_sub(1));
    let hi = grid((best_i + 1).min(grid_points - 1));
    best = best.max(golden_section_max(&f, lo, hi, 200));

    let endpoint = poly.eval(edge);
    agree("hecke sup vs endpoint value", best, endpoint.abs(), 1e-9)?;
    let via_xi = harish_chandra(q, n as u32) * biguint_to_f64(&sphere_count(q, n as u32));
    agree("hecke endpoint vs Ξ(n)|S_n|", endpoint, via_xi, 1e-9)?;
    Ok(best)
}

fn golden_section_max(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> f64 {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
        if (b - a).abs() < 1e-15 * (1.0 + a.abs()) {
            break;
        }
    }
    fc.max(fd).max(f(a)).max(f(b))
}

/// The exact L² discrepancy of the `S_n` or `B_n` average of the LPS
/// rotations on the 2-sphere.
pub fn lps_discrepancy(p: u64, n: u32, shape: Shape) -> Result<f64> {
    check_lps_prime(p)?;
    if n == 0 {
        return Err(Error::InvalidArgument("radius must be ≥ 1".into()));
    }
    regular_norm(p, n, shape)
}

/// One row of the closed-form identity suite.
#[derive(Clone, Debug, Serialize)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub q: u64,
    pub n: u32,
    pub measured: f64,
    pub reference: f64,
    pub rel_err: f64,
    pub tol: f64,
    pub pass: bool,
}

impl IdentityCheck {
    fn new(name: &'static str, q: u64, n: u32, measured: f64, reference: f64, tol: f64) -> Self {
        let rel_err = rel_err(measured, reference);
        Self { name, q, n, measured, reference, rel_err, tol, pass: rel_err <= tol }
    }

    fn failed(name: &'static str, q: u64, n: u32, tol: f64) -> Self {
        Self {
            name,
            q,
            n,
            measured: f64::NAN,
            reference: f64::NAN,
            rel_err: f64::INFINITY,
            tol,
            pass: false,
        }
    }
}

/// Boundary-sum oracle, ball sum form, both `c(q,n)` forms and, for odd `q`,
/// the Hecke endpoint identities, over `qs × 1..=n_max`.
pub fn identity_suite(qs: &[u64], n_max: u32) -> Vec<IdentityCheck> {
    let mut out = Vec::new();
    for &q in qs {
        for n in 1..=n_max {
            let xi = harish_chandra(q, n);
            match harish_chandra_boundary_sum(q, n) {
                Ok(v) => out.push(IdentityCheck::new("boundary_sum_vs_closed_form", q, n, v, xi, 1e-12)),
                Err(_) => out.push(IdentityCheck::failed("boundary_sum_vs_closed_form", q, n, 1e-12)),
            }
            match ball_norm_closed_form(q, n) {
                Ok(v) => out.push(IdentityCheck::new(
                    "ball_closed_vs_sum_form",
                    q,
                    n,
                    v,
                    ball_norm_sum_form(q, n),
                    1e-12,
                )),
                Err(_) => out.push(IdentityCheck::failed("ball_closed_vs_sum_form", q, n, 1e-12)),
            }
            if q >= 2 {
                let qf = q as f64;
                let geometric: f64 = (0..n).map(|k| qf.powi(k as i32)).sum();
                let sum_form = 1.0 / (1.0 + 2.0 * qf.powi(-(n as i32)) * geometric);
                let closed = (qf - 1.0) / (qf + 1.0 - 2.0 / qf.powi(n as i32));
                out.push(IdentityCheck::new("c_factor_two_forms", q, n, sum_form, closed, 1e-14));
            }
            if q % 2 == 1 {
                let poly = hecke_polynomial(q, n as usize);
                let endpoint = poly.eval(2.0 * (q as f64).sqrt());
                let via_xi = xi * biguint_to_f64(&sphere_count(q, n));
                out.push(IdentityCheck::new("hecke_endpoint_vs_xi_sphere", q, n, endpoint, via_xi, 1e-9));
                match hecke_sup(q, n as usize, 4001) {
                    Ok(s) => out.push(IdentityCheck::new("hecke_sup_vs_endpoint", q, n, s, endpoint.abs(), 1e-9)),
                    Err(_) => out.push(IdentityCheck::failed("hecke_sup_vs_endpoint", q, n, 1e-9)),
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        rel_err(a, b) <= tol
    }

    #[test]
    fn hecke_examples() {
        assert_eq!(hecke_polynomial(5, 2).coefficients, ints(&[-6, 0, 1]));
        assert_eq!(hecke_polynomial(5, 3).coefficients, ints(&[0, -11, 0, 1]));
        assert_eq!(hecke_polynomial(1, 4).coefficients, ints(&[2, 0, -4, 0, 1]));
        assert_eq!(hecke_polynomial(3, 0).coefficients, ints(&[1]));
        assert_eq!(hecke_polynomial(3, 1).coefficients, ints(&[0, 1]));
    }

    #[test]
    fn hecke_polynomials_are_monic_with_right_degree() {
        for q in [1u64, 3, 5, 13] {
            for (n, p) in hecke_family(q, 12).iter().enumerate() {
                assert_eq!(p.degree, n);
                assert_eq!(p.coefficients.len(), n + 1);
                assert_eq!(p.coefficients[n], BigInt::from(1));
            }
        }
    }

    /// Group-ring oracle: expand `P_n(T_1)` over freely reduced words of the
    /// rank-`r` free group and compare with the indicator of `S_n`.
    #[test]
    fn hecke_polynomials_expand_to_sphere_indicators() {
        use std::collections::HashMap;
        type Elem = Vec<usize>;
        fn times_t1(f: &HashMap<Elem, i64>, gens: usize) -> HashMap<Elem, i64> {
            let mut out: HashMap<Elem, i64> = HashMap::new();
            for (w, c) in f {
                for l in 0..gens {
                    let mut v = w.clone();
                    if v.last() == Some(&(l ^ 1)) {
                        v.pop();
                    } else {
                        v.push(l);
                    }
                    *out.entry(v).or_default() += c;
                }
            }
            out.retain(|_, c| *c != 0);
            out
        }
        for rank in [1usize, 2, 3] {
            let gens = 2 * rank;
            let q = (gens - 1) as u64;
            let mut powers = vec![HashMap::from([(Elem::new(), 1i64)])];
            for k in 1..=6 {
                let next = times_t1(&powers[k - 1], gens);
                powers.push(next);
            }
            for n in 0..=6 {
                let poly = hecke_polynomial(q, n);
                let mut total: HashMap<Elem, i64> = HashMap::new();
                for (k, c) in poly.coefficients.iter().enumerate() {
                    let c = c.to_i64().unwrap();
                    for (w, m) in &powers[k] {
                        *total.entry(w.clone()).or_default() += c * m;
                    }
                }
                total.retain(|_, c| *c != 0);
                assert_eq!(total.len() as u64, sphere_count(q, n as u32).to_u64().unwrap());
                assert!(total.iter().all(|(w, c)| w.len() == n && *c == 1), "rank {rank} n {n}");
            }
        }
    }

    #[test]
    fn harish_chandra_examples() {
        for q in [1u64, 2, 3, 5, 13] {
            assert_eq!(harish_chandra(q, 0), 1.0);
        }
        assert!(close(harish_chandra(5, 1), 2.0 * 5f64.sqrt() / 6.0, 1e-15));
        assert!((harish_chandra(5, 1) - 0.7453559925).abs() < 1e-10);
        assert!(close(harish_chandra(3, 2), 2.0 / 3.0, 1e-15));
    }

    #[test]
    fn boundary_sum_examples() {
        assert!(close(harish_chandra_boundary_sum(3, 2).unwrap(), 2.0 / 3.0, 1e-14));
        assert!(close(harish_chandra_boundary_sum(5, 1).unwrap(), 2.0 * 5f64.sqrt() / 6.0, 1e-14));
        assert!(close(harish_chandra_boundary_sum(9, 7).unwrap(), harish_chandra(9, 7), 1e-12));
        assert!(harish_chandra_boundary_sum(1, 3).is_err());
        assert!(harish_chandra_boundary_sum(3, 0).is_err());
    }

    #[test]
    fn boundary_partition_masses_sum_to_one() {
        for q in 2u64..=13 {
            for n in 1..=12i64 {
                let qf = q as f64;
                let mut mass = 0.0;
                for i in 0..=n {
                    let b = if i == 0 || i == n { q } else { q - 1 };
                    mass += b as f64 / ((qf + 1.0) * qf.powi(i as i32));
                }
                assert!((mass - 1.0).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn boundary_sum_oracle_identity() {
        for q in 2u64..=13 {
            for n in 1..=12 {
                let a = harish_chandra_boundary_sum(q, n).unwrap();
                assert!(close(a, harish_chandra(q, n), 1e-12), "q={q} n={n}");
            }
        }
    }

    #[test]
    fn c_factor_examples() {
        assert!(close(c_factor(3, 1).unwrap(), 3.0 / 5.0, 1e-15));
        assert!(close(c_factor(3, 2).unwrap(), 9.0 / 17.0, 1e-15));
        assert!((c_factor(5, 30).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!(c_factor(1, 2).is_err());
    }

    #[test]
    fn regular_norm_examples() {
        for n in 0..=10 {
            assert_eq!(regular_norm(1, n, Shape::Sphere).unwrap(), 1.0);
            assert_eq!(regular_norm(1, n, Shape::Ball).unwrap(), 1.0);
        }
        let b = regular_norm(3, 1, Shape::Ball).unwrap();
        assert!(close(b, (1.0 + 2.0 * 3f64.sqrt()) / 5.0, 1e-14));
        assert!((b - 0.8928203).abs() < 1e-7);
        let s = regular_norm(5, 3, Shape::Sphere).unwrap();
        assert!(close(s, 3.0 * 5f64.powf(-1.5), 1e-14));
        assert!((s - 0.2683281).abs() < 1e-7);
    }

    #[test]
    fn ball_identity_and_sphere_monotonicity() {
        for q in [2u64, 3, 5, 9, 13] {
            for n in 0..=12 {
                let closed = ball_norm_closed_form(q, n).unwrap();
                assert!(close(closed, ball_norm_sum_form(q, n), 1e-12), "q={q} n={n}");
            }
            for n in 0..14 {
                assert!(regular_norm(q, n + 1, Shape::Sphere).unwrap() < regular_norm(q, n, Shape::Sphere).unwrap());
            }
        }
    }

    #[test]
    fn hecke_sup_examples() {
        let s = hecke_sup(5, 3, 1001).unwrap();
        assert!(close(s, 40.2492236, 1e-8));
        let expected = (2.0 * 5f64.sqrt()).powi(3) - 22.0 * 5f64.sqrt();
        assert!(close(s, expected, 1e-12));
        assert!(close(hecke_sup(5, 1, 1001).unwrap(), 2.0 * 5f64.sqrt(), 1e-12));
        assert!(close(hecke_sup(1, 6, 1001).unwrap(), 2.0, 1e-12));
        assert!(hecke_sup(5, 3, 1000).is_err());
    }

    #[test]
    fn hecke_recursion_consistency() {
        for q in [1u64, 3, 5, 9, 13] {
            for n in 0..=14 {
                hecke_sup(q, n, 2001).unwrap_or_else(|e| panic!("q={q} n={n}: {e}"));
            }
        }
    }

    #[test]
    fn lps_discrepancy_examples() {
        assert!(close(lps_discrepancy(5, 1, Shape::Sphere).unwrap(), 0.7453560, 1e-7));
        assert!(close(lps_discrepancy(5, 2, Shape::Sphere).unwrap(), 7.0 / 15.0, 1e-14));
        let c = 12.0 / (14.0 - 2.0 / 13.0);
        let expected = c * (2.0 + 13f64.powf(-0.5)) * 13f64.powf(-0.5);
        assert!(close(lps_discrepancy(13, 1, Shape::Ball).unwrap(), expected, 1e-14));
        assert!(lps_discrepancy(7, 1, Shape::Sphere).is_err());
        assert!(lps_discrepancy(5, 0, Shape::Sphere).is_err());
    }

    #[test]
    fn identity_suite_passes() {
        let rows = identity_suite(&[2, 3, 5, 9, 13], 12);
        assert!(!rows.is_empty());
        for r in &rows {
            assert!(r.pass, "{r:?}");
        }
    }
}
