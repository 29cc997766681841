//! A finite set of primes outside of which local solubility is automatic.
//!
//! Small primes are always included. Beyond them, a prime is added when it
//! divides a discriminant whose nonvanishing mod `p` means the reduction is
//! smooth: the Hessian determinant of a quadric, the discriminant of the
//! determinant form of a pencil of quadrics, or `d * prod(c_i)` for a
//! diagonal form. Other shapes get the small-prime scan only and are
//! flagged incomplete.

use std::collections::BTreeSet;
use std::ops::ControlFlow;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::ResidueEngine;
use crate::arith::{factorize, is_prime_u64};
use crate::error::Result;
use crate::poly::{Polynomial, PolynomialSystem};

pub const DEFAULT_SMALL_PRIME_BOUND: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BadPrimeMethod {
    DiagonalForm,
    QuadricDiscriminant,
    QuadricPencilDiscriminant,
    /// No discriminant applies; only the small primes are listed.
    SmallPrimesOnly,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BadPrimes {
    pub small_prime_bound: u64,
    pub method: BadPrimeMethod,
    #[serde(with = "crate::text::option")]
    pub discriminant: Option<BigInt>,
    /// Primes dividing the discriminant (plus 2 for quadrics).
    pub discriminant_primes: BTreeSet<u64>,
    /// Union of the small primes and the discriminant primes.
    pub primes: BTreeSet<u64>,
}

impl BadPrimes {
    pub fn is_complete(&self) -> bool {
        self.method != BadPrimeMethod::SmallPrimesOnly
    }

    pub fn contains(&self, p: u64) -> bool {
        self.primes.contains(&p)
    }
}

pub fn bad_prime_superset(system: &PolynomialSystem) -> Result<BadPrimes> {
    bad_prime_superset_with_bound(system, DEFAULT_SMALL_PRIME_BOUND)
}

pub fn bad_prime_superset_with_bound(system: &PolynomialSystem, bound: u64) -> Result<BadPrimes> {
    let polys = system.nonzero_polys();
    let (method, discriminant, extra) = if let Some(d) = diagonal_discriminant(&polys) {
        (BadPrimeMethod::DiagonalForm, Some(d), vec![])
    } else if polys.len() == 1 && polys[0].degree() == Some(2) {
        let h = hessian(polys[0]);
        (BadPrimeMethod::QuadricDiscriminant, Some(bareiss_det(h)), vec![2])
    } else if polys.len() == 2 && polys.iter().all(|p| p.degree() == Some(2)) {
        let d = pencil_discriminant(&hessian(polys[0]), &hessian(polys[1]));
        (BadPrimeMethod::QuadricPencilDiscriminant, Some(d), vec![2])
    } else {
        (BadPrimeMethod::SmallPrimesOnly, None, vec![])
    };
    let mut discriminant_primes: BTreeSet<u64> = extra.into_iter().collect();
    if let Some(d) = &discriminant {
        if d.is_zero() {
            // Singular over Q: no finite discriminant set exists.
            return Ok(BadPrimes {
                small_prime_bound: bound,
                method: BadPrimeMethod::SmallPrimesOnly,
                discriminant: Some(d.clone()),
                discriminant_primes,
                primes: small_primes(bound),
            });
        }
        for (p, _) in factorize(&d.magnitude().clone())? {
            discriminant_primes.insert(p);
        }
    }
    let mut primes = small_primes(bound);
    primes.extend(discriminant_primes.iter().copied());
    Ok(BadPrimes { small_prime_bound: bound, method, discriminant, discriminant_primes, primes })
}

fn small_primes(bound: u64) -> BTreeSet<u64> {
    (2..=bound).filter(|p| is_prime_u64(*p)).collect()
}

/// `d * prod(c_i)` for a single form `sum c_i x_i^d` in every variable.
fn diagonal_discriminant(polys: &[&Polynomial]) -> Option<BigInt> {
    if polys.len() != 1 {
        return None;
    }
    let f = polys[0];
    let n = f.nvars();
    let d = f.degree()?;
    let mut seen = vec![false; n];
    let mut product = BigInt::from(d);
    for (m, c) in f.terms() {
        let nz: Vec<usize> = (0..n).filter(|i| m[*i] > 0).collect();
        if nz.len() != 1 || seen[nz[0]] {
            return None;
        }
        seen[nz[0]] = true;
        product *= c;
    }
    seen.iter().all(|s| *s).then_some(product)
}

/// Matrix of second derivatives of a quadratic form.
fn hessian(q: &Polynomial) -> Vec<Vec<BigInt>> {
    let n = q.nvars();
    (0..n)
        .map(|i| {
            let di = q.derivative(i);
            (0..n)
                .map(|j| {
                    let dij = di.derivative(j);
                    let c = dij.terms().next().map(|(_, c)| c.clone()).unwrap_or_default();
                    c
                })
                .collect()
        })
        .collect()
}

/// Fraction-free Gaussian elimination.
pub(crate) fn bareiss_det(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            let Some(swap) = (k + 1..n).find(|i| !m[*i][k].is_zero()) else {
                return BigInt::zero();
            };
            m.swap(k, swap);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    sign * m[n - 1][n - 1].clone()
}

fn combine(a: &[Vec<BigInt>], b: &[Vec<BigInt>], la: &BigInt, lb: &BigInt) -> Vec<Vec<BigInt>> {
    a.iter().zip(b).map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| la * x + lb * y).collect()).collect()
}

/// Coefficients (low to high) of the degree-`n` polynomial through the
/// given integer samples at `0..=n`.
fn interpolate(values: &[BigInt]) -> Vec<BigInt> {
    let n = values.len();
    let mut coeffs = vec![BigRational::zero(); n];
    for (i, yi) in values.iter().enumerate() {
        // Lagrange basis polynomial for node i.
        let mut basis = vec![BigRational::one()];
        let mut denom = BigRational::one();
        for j in 0..n {
            if j == i {
                continue;
            }
            let mut next = vec![BigRational::zero(); basis.len() + 1];
            for (k, c) in basis.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= c * BigRational::from_integer(BigInt::from(j));
            }
            basis = next;
            denom *= BigRational::from_integer(BigInt::from(i as i64 - j as i64));
        }
        for (k, c) in basis.iter().enumerate() {
            coeffs[k] += c * BigRational::from_integer(yi.clone()) / &denom;
        }
    }
    coeffs.into_iter().map(|c| c.to_integer()).collect()
}

fn resultant(f: &[BigInt], g: &[BigInt]) -> BigInt {
    // Sylvester matrix with f, g given low to high.
    let (m, n) = (f.len() - 1, g.len() - 1);
    let size = m + n;
    let mut rows = Vec::with_capacity(size);
    for i in 0..n {
        let mut row = vec![BigInt::zero(); size];
        for (k, c) in f.iter().rev().enumerate() {
            row[i + k] = c.clone();
        }
        rows.push(row);
    }
    for i in 0..m {
        let mut row = vec![BigInt::zero(); size];
        for (k, c) in g.iter().rev().enumerate() {
            row[i + k] = c.clone();
        }
        rows.push(row);
    }
    bareiss_det(rows)
}

/// Discriminant of the binary form `det(l A + m B)`, computed after a
/// unimodular change of the pencil parameter that makes the leading
/// coefficient nonzero.
fn pencil_discriminant(a: &[Vec<BigInt>], b: &[Vec<BigInt>]) -> BigInt {
    let n = a.len();
    let mut shift = BigInt::zero();
    let a_shifted = loop {
        let candidate = combine(a, b, &BigInt::one(), &shift);
        if !bareiss_det(candidate.clone()).is_zero() {
            break candidate;
        }
        shift += 1;
        if shift > BigInt::from(n as u64 + 2) {
            // det vanishes identically along the pencil.
            return BigInt::zero();
        }
    };
    let values: Vec<BigInt> =
        (0..=n).map(|t| bareiss_det(combine(&a_shifted, b, &BigInt::from(t), &BigInt::one()))).collect();
    let f = interpolate(&values);
    let lead = f[n].clone();
    let df: Vec<BigInt> = f.iter().enumerate().skip(1).map(|(k, c)| c * BigInt::from(k)).collect();
    let res = resultant(&f, &df);
    let sign = if (n * (n - 1) / 2) % 2 == 0 { BigInt::one() } else { -BigInt::one() };
    sign * res / lead
}

/// Primes among `candidates` at which the reduction has a singular
/// point over `F_p`, found by scanning points and Jacobian ranks.
pub fn singular_reduction_primes(system: &PolynomialSystem, candidates: &[u64]) -> Result<BTreeSet<u64>> {
    let mut out = BTreeSet::new();
    for &p in candidates {
        let engine = ResidueEngine::new(system, p)?;
        let mut singular = false;
        let mut failure = None;
        engine.for_each_point_mod_p(|pt| match engine.is_smooth_point(&pt) {
            Ok(true) => ControlFlow::Continue(()),
            Ok(false) => {
                singular = true;
                ControlFlow::Break(())
            }
            Err(e) => {
                failure = Some(e);
                ControlFlow::Break(())
            }
        })?;
        if let Some(e) = failure {
            return Err(e);
        }
        if singular {
            out.insert(p);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry;

    #[test]
    fn conic_bad_primes() {
        let bad = bad_prime_superset(&registry::diagonal_conic(3, 5, -7)).unwrap();
        assert_eq!(bad.method, BadPrimeMethod::DiagonalForm);
        assert_eq!(bad.discriminant, Some(BigInt::from(-210)));
        let skew = PolynomialSystem::parse("vars: x y z\n1 x y | 3 z^2\n").unwrap();
        let bad_skew = bad_prime_superset(&skew).unwrap();
        assert_eq!(bad_skew.method, BadPrimeMethod::QuadricDiscriminant);
        assert_eq!(bad_skew.discriminant, Some(BigInt::from(-6)));
        assert!(bad.discriminant_primes.is_superset(&[2, 3, 5, 7].into_iter().collect()));
        let bad = bad_prime_superset(&registry::diagonal_conic(1, 1, 103)).unwrap();
        assert!(bad.contains(103) && bad.contains(2) && bad.contains(97));
        assert!(!bad.contains(101));
    }

    #[test]
    fn corpus_surfaces() {
        let bsd = bad_prime_superset(&registry::bsd_surface()).unwrap();
        assert_eq!(bsd.method, BadPrimeMethod::QuadricPencilDiscriminant);
        assert!(bsd.discriminant_primes.contains(&2) && bsd.discriminant_primes.contains(&5));
        let lr = bad_prime_superset(&registry::lind_reichardt()).unwrap();
        assert!(lr.discriminant_primes.contains(&2) && lr.discriminant_primes.contains(&17));
        let cubic = bad_prime_superset(&registry::prologue_cubic()).unwrap();
        assert_eq!(cubic.method, BadPrimeMethod::DiagonalForm);
        assert_eq!(cubic.discriminant_primes, [2, 3, 5].into_iter().collect());
    }

    #[test]
    fn jacobian_scan_confirms_discriminant() {
        let small: Vec<u64> = (2..40).filter(|p| is_prime_u64(*p)).collect();
        for sys in [registry::bsd_surface(), registry::lind_reichardt()] {
            let bad = bad_prime_superset(&sys).unwrap();
            let singular = singular_reduction_primes(&sys, &small).unwrap();
            assert!(singular.is_subset(&bad.discriminant_primes), "{singular:?} vs {:?}", bad.discriminant_primes);
        }
        let lr = singular_reduction_primes(&registry::lind_reichardt(), &small).unwrap();
        assert_eq!(lr, [2, 17].into_iter().collect());
        let bsd = singular_reduction_primes(&registry::bsd_surface(), &small).unwrap();
        assert!(bsd.contains(&2) && bsd.contains(&5));
    }

    #[test]
    fn determinant_and_interpolation_helpers() {
        let m = |rows: &[&[i64]]| rows.iter().map(|r| r.iter().map(|x| BigInt::from(*x)).collect()).collect();
        assert_eq!(bareiss_det(m(&[&[0, 1], &[1, 0]])), BigInt::from(-1));
        assert_eq!(bareiss_det(m(&[&[2, 0, 1], &[1, 3, 2], &[1, 1, 1]])), BigInt::zero());
        // x^2 - 3x + 2 sampled at 0, 1, 2.
        let f = interpolate(&[2.into(), 0.into(), 0.into()]);
        assert_eq!(f, vec![BigInt::from(2), BigInt::from(-3), BigInt::from(1)]);
        // disc(x^2 - 3x + 2) = 1 via the resultant formula.
        let res = resultant(&f, &[BigInt::from(-3), BigInt::from(2)]);
        assert_eq!(-res / BigInt::from(1), BigInt::one());
    }
}
