//! Diagonal conics `a x^2 + b y^2 + c z^2 = 0`: normal form, solubility at
//! every place, the congruence criterion modulo `8abc`, and rational points.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{legendre_u64, reduce_mod, squarefree_decompose, SquareClass};
use crate::error::{Error, Result};
use crate::poly::PolynomialSystem;
use crate::registry::diagonal_conic_big;
use crate::search::{search_rational_points, ProjectiveRationalPoint};
use crate::symbols::Place;

/// Squarefree, pairwise coprime, nonzero coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DiagonalConic {
    #[serde(with = "crate::text::vec")]
    coeffs: Vec<BigInt>,
}

impl DiagonalConic {
    /// Checks the normal-form conditions; see [`normalize_conic`] for
    /// arbitrary input.
    pub fn new(a: impl Into<BigInt>, b: impl Into<BigInt>, c: impl Into<BigInt>) -> Result<DiagonalConic> {
        let coeffs = vec![a.into(), b.into(), c.into()];
        for x in &coeffs {
            if x.is_zero() {
                return Err(Error::InvalidArgument("conic coefficients must be nonzero".into()));
            }
            let (_, m) = squarefree_decompose(x)?;
            if !m.is_one() {
                return Err(Error::InvalidArgument(format!("{x} is not squarefree")));
            }
        }
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            if !coeffs[i].gcd(&coeffs[j]).is_one() {
                return Err(Error::InvalidArgument(format!("{} and {} share a factor", coeffs[i], coeffs[j])));
            }
        }
        Ok(DiagonalConic { coeffs })
    }

    pub fn coefficients(&self) -> (&BigInt, &BigInt, &BigInt) {
        (&self.coeffs[0], &self.coeffs[1], &self.coeffs[2])
    }

    pub fn system(&self) -> PolynomialSystem {
        diagonal_conic_big(&self.coeffs[0], &self.coeffs[1], &self.coeffs[2])
    }

    pub fn contains(&self, point: &[BigInt]) -> bool {
        point.len() == 3 && point.iter().zip(&self.coeffs).map(|(x, a)| a * x * x).sum::<BigInt>().is_zero()
    }

    /// Primes dividing `abc`.
    pub fn odd_bad_primes(&self) -> Result<Vec<u64>> {
        let mut out = BTreeSet::new();
        for x in &self.coeffs {
            out.extend(SquareClass::from_integer(x)?.primes()?.into_iter().filter(|p| *p != 2));
        }
        Ok(out.into_iter().collect())
    }

    /// `Real`, `2`, and every odd prime dividing `abc`: outside these the
    /// conic always has local points.
    pub fn relevant_places(&self) -> Result<Vec<Place>> {
        let mut out = vec![Place::Real, Place::Finite(2)];
        out.extend(self.odd_bad_primes()?.into_iter().map(Place::Finite));
        Ok(out)
    }
}

impl fmt::Display for DiagonalConic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b, c) = self.coefficients();
        write!(f, "{a} x^2 + {b} y^2 + {c} z^2")
    }
}

/// Brings `a x^2 + b y^2 + c z^2` to an equivalent normal form: each
/// coefficient is replaced by its square class, a common factor is
/// divided out, and a prime `g` shared by two coefficients is moved onto
/// the third (`(ga', gb', c) -> (a', b', gc)` after scaling `x, y` by `g`).
pub fn normalize_conic(a: &BigRational, b: &BigRational, c: &BigRational) -> Result<DiagonalConic> {
    let mut k: Vec<BigInt> = Vec::with_capacity(3);
    for q in [a, b, c] {
        if q.is_zero() {
            return Err(Error::InvalidArgument("conic coefficients must be nonzero".into()));
        }
        k.push(SquareClass::from_rational(q)?.to_integer());
    }
    loop {
        let g = k[0].gcd(&k[1]).gcd(&k[2]);
        if !g.is_one() {
            for x in k.iter_mut() {
                *x = &*x / &g;
            }
            continue;
        }
        let mut changed = false;
        for (i, j, l) in [(0, 1, 2), (0, 2, 1), (1, 2, 0)] {
            let g = k[i].gcd(&k[j]);
            if !g.is_one() {
                k[i] = &k[i] / &g;
                k[j] = &k[j] / &g;
                k[l] = squarefree_decompose(&(&k[l] * &g))?.0;
                changed = true;
                break;
            }
        }
        if !changed {
            break;
        }
    }
    DiagonalConic::new(k[0].clone(), k[1].clone(), k[2].clone())
}

/// Integer convenience wrapper around [`normalize_conic`].
pub fn normalize_conic_i64(a: i64, b: i64, c: i64) -> Result<DiagonalConic> {
    let q = |x: i64| BigRational::from_integer(BigInt::from(x));
    normalize_conic(&q(a), &q(b), &q(c))
}

/// Whether the conic has a nontrivial point over the completion at `v`.
pub fn conic_locally_soluble(conic: &DiagonalConic, v: Place) -> bool {
    let k = &conic.coeffs;
    match v {
        Place::Real => {
            let pos = k.iter().filter(|x| x.is_positive()).count();
            pos != 0 && pos != 3
        }
        Place::Finite(2) => two_adic_soluble(k),
        Place::Finite(p) => {
            let Some(i) = k.iter().position(|x| reduce_mod(x, p) == 0) else {
                // Good reduction: a smooth conic over F_p has points, and
                // they lift.
                return true;
            };
            let (j, l) = match i {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            let minus_bc = -(&k[j] * &k[l]);
            legendre_u64(reduce_mod(&minus_bc, p), p) == 1
        }
    }
}

/// A primitive solution modulo 8 in which some term `a_i x_i` is odd
/// lifts to `Z_2` by Hensel; for a normalized conic every 2-adic point
/// reduces to one.
fn two_adic_soluble(k: &[BigInt]) -> bool {
    let r: Vec<u64> = k.iter().map(|x| reduce_mod(x, 8)).collect();
    for x in 0..8u64 {
        for y in 0..8u64 {
            for z in 0..8u64 {
                if x % 2 == 0 && y % 2 == 0 && z % 2 == 0 {
                    continue;
                }
                let v = (r[0] * x * x + r[1] * y * y + r[2] * z * z) % 8;
                let odd_term = (r[0] * x) % 2 == 1 || (r[1] * y) % 2 == 1 || (r[2] * z) % 2 == 1;
                if v == 0 && odd_term {
                    return true;
                }
            }
        }
    }
    false
}

/// The congruence criterion: the coefficients do not all have the same
/// sign, and there is a solution modulo `8abc` with at least two
/// coordinates nonzero modulo each prime dividing `8abc`. By the Chinese
/// remainder theorem this is checked one prime power at a time.
pub fn z8abc_criterion(conic: &DiagonalConic) -> Result<bool> {
    let k = &conic.coeffs;
    let pos = k.iter().filter(|x| x.is_positive()).count();
    if pos == 0 || pos == 3 {
        return Ok(false);
    }
    for p in conic.odd_bad_primes()? {
        if !odd_component_has_solution(k, p) {
            return Ok(false);
        }
    }
    let v2: u32 = k.iter().map(|x| x.trailing_zeros().unwrap_or(0) as u32).sum();
    Ok(two_component_has_solution(k, 3 + v2))
}

/// A solution modulo `p` with at least two coordinates nonzero. Scaling
/// lets one of the two be 1; the third is found by Euler's criterion.
fn odd_component_has_solution(k: &[BigInt], p: u64) -> bool {
    let r: Vec<u64> = k.iter().map(|x| reduce_mod(x, p)).collect();
    for (i, j, l) in [(0, 1, 2), (0, 2, 1), (1, 2, 0)] {
        for xj in 1..p {
            // r_i + r_j xj^2 + r_l xl^2 = 0 with x_i = 1
            let partial = (r[i] + crate::arith::mul_mod(r[j], crate::arith::mul_mod(xj, xj, p), p)) % p;
            let target = (p - partial) % p;
            let ok = if r[l] == 0 {
                target == 0
            } else {
                let inv = crate::arith::pow_mod(r[l], p - 2, p);
                let t = crate::arith::mul_mod(target, inv, p);
                t == 0 || legendre_u64(t, p) == 1
            };
            if ok {
                return true;
            }
        }
    }
    false
}

/// A solution modulo `2^e` with at least two odd coordinates.
fn two_component_has_solution(k: &[BigInt], e: u32) -> bool {
    let m = 1u64 << e;
    let r: Vec<u64> = k.iter().map(|x| reduce_mod(x, m)).collect();
    for x in 0..m {
        for y in 0..m {
            for z in 0..m {
                let odd = [x, y, z].iter().filter(|c| *c % 2 == 1).count();
                if odd >= 2 && (r[0] * x % m * x + r[1] * y % m * y + r[2] * z % m * z) % m == 0 {
                    return true;
                }
            }
        }
    }
    false
}

/// Exhaustive check for a `Q_p`-point: primitive solutions modulo `p^j`
/// for `j = 1..=k` (`k = 3` for odd `p`, 5 for `p = 2`), lifted digit by
/// digit, accepting a solution whose gradient has valuation `e` with
/// `j >= 2e + 1`. `None` if solutions persist to depth `k` without such a
/// certificate. Independent of every other decider in the crate; used as a
/// test oracle.
pub fn brute_force_local_oracle(a: i64, b: i64, c: i64, p: u64) -> Option<bool> {
    let k = if p == 2 { 5 } else { 3 };
    let coeffs = [a as i128, b as i128, c as i128];
    // Normalized representatives: first unit coordinate equal to 1, the
    // earlier ones divisible by p.
    let mut level: Vec<[i128; 3]> = Vec::new();
    let p128 = p as i128;
    for chart in 0..3 {
        for u in 0..p128 {
            for w in 0..p128 {
                let mut pt = [0i128; 3];
                pt[chart] = 1;
                let others: Vec<usize> = (0..3).filter(|i| *i != chart).collect();
                pt[others[0]] = u;
                pt[others[1]] = w;
                if others.iter().any(|i| *i < chart && pt[*i] % p128 != 0) {
                    continue;
                }
                level.push(pt);
            }
        }
    }
    let mut modulus = 1i128;
    for depth in 1..=k {
        modulus *= p128;
        let m = modulus;
        let eval = |pt: &[i128; 3]| (0..3).map(|i| coeffs[i] * pt[i] % m * pt[i]).sum::<i128>().rem_euclid(m);
        let survivors: Vec<[i128; 3]> = level.into_iter().filter(|pt| eval(pt) == 0).collect();
        if survivors.is_empty() {
            return Some(false);
        }
        for pt in &survivors {
            let e = (0..3)
                .map(|i| valuation_i128((2 * coeffs[i] * pt[i]).rem_euclid(m), p128, depth))
                .min()
                .unwrap();
            if depth >= 2 * e + 1 {
                return Some(true);
            }
        }
        if depth == k {
            return None;
        }
        // All lifts modulo p^(depth+1) of the surviving points, keeping the
        // chart coordinate equal to 1.
        let mut next = Vec::new();
        for pt in survivors {
            let chart = pt.iter().position(|x| x % p128 != 0).unwrap();
            let others: Vec<usize> = (0..3).filter(|i| *i != chart).collect();
            for d0 in 0..p128 {
                for d1 in 0..p128 {
                    let mut q = pt;
                    q[others[0]] += d0 * m;
                    q[others[1]] += d1 * m;
                    next.push(q);
                }
            }
        }
        level = next;
    }
    None
}

fn valuation_i128(x: i128, p: i128, cap: u32) -> u32 {
    if x == 0 {
        return cap;
    }
    let mut v = 0;
    let mut x = x;
    while x % p == 0 {
        x /= p;
        v += 1;
    }
    v
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlaceVerdict {
    pub place: Place,
    pub soluble: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalSolubilityReport {
    pub conic: DiagonalConic,
    /// Verdicts at `Real`, 2 and the odd primes dividing `abc`; every other
    /// place is soluble.
    pub places: Vec<PlaceVerdict>,
    pub place_by_place: bool,
    pub congruence_criterion: bool,
    pub witness: Option<ProjectiveRationalPoint>,
}

impl LocalSolubilityReport {
    pub fn everywhere_locally_soluble(&self) -> bool {
        self.place_by_place
    }

    /// The two deciders agree.
    pub fn consistent(&self) -> bool {
        self.place_by_place == self.congruence_criterion
    }

    pub fn insoluble_places(&self) -> Vec<Place> {
        self.places.iter().filter(|v| !v.soluble).map(|v| v.place).collect()
    }
}

pub fn conic_everywhere_locally_soluble(conic: &DiagonalConic) -> Result<LocalSolubilityReport> {
    let places: Vec<PlaceVerdict> = conic
        .relevant_places()?
        .into_iter()
        .map(|place| PlaceVerdict { place, soluble: conic_locally_soluble(conic, place) })
        .collect();
    let place_by_place = places.iter().all(|v| v.soluble);
    let congruence_criterion = z8abc_criterion(conic)?;
    Ok(LocalSolubilityReport { conic: conic.clone(), places, place_by_place, congruence_criterion, witness: None })
}

/// The least point (height, then coordinates) of height at most
/// `height_cap`, or `None` when the conic is not everywhere locally
/// soluble or no point is that small. Boxes double in size so small
/// points are found quickly.
pub fn conic_rational_point(conic: &DiagonalConic, height_cap: u64) -> Result<Option<ProjectiveRationalPoint>> {
    if !conic_everywhere_locally_soluble(conic)?.place_by_place {
        return Ok(None);
    }
    least_point_doubling(&conic.system(), height_cap)
}

pub(crate) fn least_point_doubling(system: &PolynomialSystem, cap: u64) -> Result<Option<ProjectiveRationalPoint>> {
    let mut bound = 1u64;
    loop {
        let b = bound.min(cap.max(1));
        if let Some(p) = search_rational_points(system, b, 1)?.into_iter().next() {
            return Ok(Some(p));
        }
        if b >= cap {
            return Ok(None);
        }
        bound = bound.saturating_mul(2);
    }
}

/// A solution of `u^2 - b w^2 = a` with `u, w >= 0`, from a point of the
/// conic `x^2 - b y^2 - a z^2 = 0` of height at most `height_cap`.
pub fn norm_equation_witness(
    a: &BigRational,
    b: &BigRational,
    height_cap: u64,
) -> Result<Option<(BigRational, BigRational)>> {
    if a.is_zero() || b.is_zero() {
        return Err(Error::InvalidArgument("norm equation needs nonzero a and b".into()));
    }
    if SquareClass::from_rational(b)?.is_square() {
        return Err(Error::InvalidArgument(format!("{b} is a square; the algebra is split")));
    }
    let normalized = normalize_conic(&BigRational::one(), &-b, &-a)?;
    if !conic_everywhere_locally_soluble(&normalized)?.place_by_place {
        return Ok(None);
    }
    // Clear denominators: D x^2 - D b y^2 - D a z^2.
    let d = a.denom().lcm(b.denom());
    let scale = |q: &BigRational| (q * BigRational::from_integer(d.clone())).to_integer();
    let system = diagonal_conic_big(&d, &-scale(b), &-scale(a));
    let Some(pt) = least_point_doubling(&system, height_cap)? else {
        return Ok(None);
    };
    let z = &pt.coords[2];
    debug_assert!(!z.is_zero());
    let u = BigRational::new(pt.coords[0].abs(), z.abs());
    let w = BigRational::new(pt.coords[1].abs(), z.abs());
    Ok(Some((u, w)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::{class_of, hilbert_symbol};

    fn conic(a: i64, b: i64, c: i64) -> DiagonalConic {
        DiagonalConic::new(a, b, c).unwrap()
    }

    fn q(x: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(x))
    }

    fn pt(c: &[i64]) -> ProjectiveRationalPoint {
        ProjectiveRationalPoint::from_i64(c).unwrap()
    }

    #[test]
    fn normalization_examples() {
        assert_eq!(normalize_conic_i64(1, 1, 7).unwrap(), conic(1, 1, 7));
        assert_eq!(normalize_conic_i64(4, 9, -25).unwrap(), conic(1, 1, -1));
        assert_eq!(normalize_conic_i64(6, 10, 15).unwrap(), conic(5, 3, 2));
        assert!(normalize_conic(&q(0), &q(1), &q(1)).is_err());
        assert!(DiagonalConic::new(2, 4, 1).is_err());
        assert!(DiagonalConic::new(6, 10, 1).is_err());
    }

    #[test]
    fn normalization_preserves_local_behaviour() {
        // Compare Hilbert-symbol solubility of the raw and normalized forms
        // at every place that can matter for either.
        for (a, b, c) in [(6, 10, 15), (12, -18, 35), (-3, 21, 14), (2, 2, -2), (45, -20, 6)] {
            let n = normalize_conic_i64(a, b, c).unwrap();
            let raw = |v: Place| {
                let ac = class_of(-a * c);
                let bc = class_of(-b * c);
                hilbert_symbol(&ac, &bc, v) == 1
            };
            for p in [2u64, 3, 5, 7, 11, 13] {
                assert_eq!(raw(Place::Finite(p)), conic_locally_soluble(&n, Place::Finite(p)), "({a},{b},{c}) at {p}");
            }
            assert_eq!(raw(Place::Real), conic_locally_soluble(&n, Place::Real));
        }
    }

    #[test]
    fn local_examples() {
        assert!(!conic_locally_soluble(&conic(1, 1, 7), Place::Finite(7)));
        assert!(conic_locally_soluble(&conic(1, 1, 7), Place::Finite(11)));
        let c = conic(5, 7, -3);
        for v in [Place::Real, Place::Finite(2), Place::Finite(3), Place::Finite(5), Place::Finite(7)] {
            assert!(conic_locally_soluble(&c, v), "{v}");
        }
    }

    #[test]
    fn report_examples() {
        let r = conic_everywhere_locally_soluble(&conic(1, 1, 7)).unwrap();
        assert!(!r.everywhere_locally_soluble() && r.consistent());
        assert_eq!(r.insoluble_places(), vec![Place::Real, Place::Finite(7)]);
        let r = conic_everywhere_locally_soluble(&conic(5, 7, -3)).unwrap();
        assert!(r.everywhere_locally_soluble() && r.consistent());
        let r = conic_everywhere_locally_soluble(&conic(1, 1, 1)).unwrap();
        assert!(!r.everywhere_locally_soluble() && r.consistent());
        // x^2 + y^2 + z^2 also fails at 2, as (-1, -1) ramifies there.
        assert_eq!(r.insoluble_places(), vec![Place::Real, Place::Finite(2)]);
    }

    #[test]
    fn rational_point_examples() {
        let c = conic(5, 7, -3);
        let p = conic_rational_point(&c, 10).unwrap().unwrap();
        assert_eq!(p, pt(&[1, 1, 2]));
        assert!(c.contains(&p.coords));
        // The point (2 : 1 : 3) is also on the conic and inside the box.
        let all = search_rational_points(&c.system(), 10, usize::MAX).unwrap();
        assert!(all.contains(&pt(&[2, 1, 3])));
        assert_eq!(conic_rational_point(&conic(1, 1, 7), 1000).unwrap(), None);
        for c3 in [1, 2, 3, 5, -7] {
            let sys = conic(1, -1, c3);
            let p = conic_rational_point(&sys, 1).unwrap().unwrap();
            assert_eq!(p.height(), BigInt::one());
            assert!(search_rational_points(&sys.system(), 1, usize::MAX).unwrap().contains(&pt(&[1, 1, 0])));
        }
    }

    #[test]
    fn norm_equation_examples() {
        assert_eq!(norm_equation_witness(&q(4), &q(5), 10).unwrap(), Some((q(2), q(0))));
        assert_eq!(norm_equation_witness(&q(-1), &q(-1), 1000).unwrap(), None);
        assert_eq!(norm_equation_witness(&q(-1), &q(2), 10).unwrap(), Some((q(1), q(1))));
        assert!(norm_equation_witness(&q(3), &q(9), 10).is_err());
        let (u, w) = norm_equation_witness(&q(2), &q(7), 100).unwrap().unwrap();
        assert_eq!(&u * &u - q(7) * &w * &w, q(2));
        let half = BigRational::new(1.into(), 2.into());
        let (u, w) = norm_equation_witness(&half, &q(-1), 100).unwrap().unwrap();
        assert_eq!(&u * &u + &w * &w, half);
    }

    #[test]
    fn oracle_agrees_with_decider() {
        for a in -12i64..=12 {
            for b in -12i64..=12 {
                for c in [-7i64, -3, -2, -1, 1, 5] {
                    let Ok(n) = DiagonalConic::new(a, b, c) else { continue };
                    for p in [2u64, 3, 5, 7, 11] {
                        let oracle = brute_force_local_oracle(a, b, c, p);
                        assert_eq!(oracle, Some(conic_locally_soluble(&n, Place::Finite(p))), "({a},{b},{c}) at {p}");
                    }
                }
            }
        }
    }

    #[test]
    fn deciders_agree_on_small_box() {
        for a in -10i64..=10 {
            for b in a..=10 {
                for c in b..=10 {
                    let Ok(n) = DiagonalConic::new(a, b, c) else { continue };
                    let r = conic_everywhere_locally_soluble(&n).unwrap();
                    assert!(r.consistent(), "{n}: {r:?}");
                }
            }
        }
    }
}
