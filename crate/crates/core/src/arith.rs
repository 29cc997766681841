//! Integer and rational primitives: valuations, squarefree parts, primality,
//! factorization, Legendre symbols, square roots modulo primes and the
//! `p`-adic square tests built on them.
//!
//! Primes are carried as `u64`. Arbitrary-precision integers may be passed
//! anywhere, but factoring is only attempted for numbers whose prime factors
//! fit in 64 bits.

use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Errors raised by the arithmetic layer.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ArithError {
    #[error("zero is not allowed here")]
    Zero,
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("expected an odd prime, got {0}")]
    EvenPrime(u64),
    #[error("{value} is not a unit at {prime}")]
    NotUnit { value: String, prime: u64 },
    #[error("cannot factor {0}: a prime factor exceeds 64 bits")]
    FactorizationTooHard(BigUint),
    #[error("cannot parse `{0}` as a rational number")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, ArithError>;

const SMALL_PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

#[inline]
pub(crate) fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in SMALL_PRIMES {
        if n % p == 0 {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in SMALL_PRIMES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Miller-Rabin over arbitrary precision. Exact below 2^64, probabilistic
/// (fixed bases) above.
pub fn is_prime(n: &BigUint) -> bool {
    if let Some(small) = n.to_u64() {
        return is_prime_u64(small);
    }
    for p in SMALL_PRIMES {
        if (n % p).is_zero() {
            return false;
        }
    }
    let one = BigUint::one();
    let n_minus_one = n - &one;
    let s = n_minus_one.trailing_zeros().unwrap_or(0);
    let d = &n_minus_one >> s;
    'witness: for a in SMALL_PRIMES.iter().chain([41u64, 43, 47, 53].iter()) {
        let mut x = BigUint::from(*a).modpow(&d, n);
        if x == one || x == n_minus_one {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n_minus_one {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn gcd_u64(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

/// Pollard-Brent on a 64-bit odd composite.
fn pollard_brent(n: u64) -> u64 {
    if n % 2 == 0 {
        return 2;
    }
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut g, mut q) = (2u64, 2u64, 1u64, 1u64);
        let mut ys = 2u64;
        let mut r = 1u64;
        let m = 128u64;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..m.min(r - k) {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = gcd_u64(q, n);
                k += m;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys);
                g = gcd_u64(x.abs_diff(ys), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
        c += 1;
    }
}

fn factor_u64_into(n: u64, out: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if is_prime_u64(n) {
        out.push(n);
        return;
    }
    let d = pollard_brent(n);
    factor_u64_into(d, out);
    factor_u64_into(n / d, out);
}

/// Prime factorization of a positive integer, sorted by prime.
pub fn factorize(n: &BigUint) -> Result<Vec<(u64, u32)>> {
    if n.is_zero() {
        return Err(ArithError::Zero);
    }
    let mut rest = n.clone();
    let mut primes: Vec<u64> = Vec::new();
    let mut d = 2u64;
    while d < 1 << 14 && rest.to_u64().is_none() {
        while (&rest % d).is_zero() {
            rest /= d;
            primes.push(d);
        }
        d += if d == 2 { 1 } else { 2 };
    }
    match rest.to_u64() {
        Some(small) => factor_u64_into(small, &mut primes),
        None => return Err(ArithError::FactorizationTooHard(n.clone())),
    }
    primes.sort_unstable();
    let mut out: Vec<(u64, u32)> = Vec::new();
    for p in primes {
        match out.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => out.push((p, 1)),
        }
    }
    Ok(out)
}

/// Writes `n = s * m^2` with `s` squarefree carrying the sign of `n`.
pub fn squarefree_decompose(n: &BigInt) -> Result<(BigInt, BigUint)> {
    if n.is_zero() {
        return Err(ArithError::Zero);
    }
    let mut s = BigUint::one();
    let mut m = BigUint::one();
    for (p, e) in factorize(n.magnitude())? {
        if e % 2 == 1 {
            s *= p;
        }
        m *= BigUint::from(p).pow(e / 2);
    }
    let s = BigInt::from_biguint(n.sign(), s);
    Ok((s, m))
}

/// `p`-adic valuation with an exactness flag. Truncated residue data yields
/// lower bounds, which are flagged `exact: false`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Valuation {
    pub prime: u64,
    pub value: i64,
    pub exact: bool,
}

impl Valuation {
    pub fn of_integer(n: &BigInt, prime: u64) -> Result<Valuation> {
        if n.is_zero() {
            return Err(ArithError::Zero);
        }
        Ok(Valuation {
            prime,
            value: strip_prime(n.magnitude(), prime).0 as i64,
            exact: true,
        })
    }

    pub fn of_rational(q: &BigRational, prime: u64) -> Result<Valuation> {
        if q.is_zero() {
            return Err(ArithError::Zero);
        }
        let num = Valuation::of_integer(q.numer(), prime)?.value;
        let den = Valuation::of_integer(q.denom(), prime)?.value;
        Ok(Valuation { prime, value: num - den, exact: true })
    }
}

/// Removes every factor `p` from `n`; returns `(count, cofactor)`.
pub(crate) fn strip_prime(n: &BigUint, p: u64) -> (u32, BigUint) {
    let mut k = 0;
    let mut rest = n.clone();
    if rest.is_zero() {
        return (0, rest);
    }
    loop {
        let (q, r) = rest.div_rem(&BigUint::from(p));
        if !r.is_zero() {
            return (k, rest);
        }
        rest = q;
        k += 1;
    }
}

pub(crate) fn reduce_mod(a: &BigInt, m: u64) -> u64 {
    a.mod_floor(&BigInt::from(m)).to_u64().expect("residue fits")
}

fn check_odd_prime(p: u64) -> Result<()> {
    if p == 2 {
        return Err(ArithError::EvenPrime(p));
    }
    if !is_prime_u64(p) {
        return Err(ArithError::NotPrime(p));
    }
    Ok(())
}

/// Legendre symbol via Euler's criterion `a^((p-1)/2) mod p`.
///
/// Reciprocity is deliberately not used: it is one of the identities the
/// symbol layer checks.
pub fn legendre_symbol(a: &BigInt, p: u64) -> Result<i8> {
    check_odd_prime(p)?;
    Ok(legendre_u64(reduce_mod(a, p), p))
}

pub(crate) fn legendre_u64(a: u64, p: u64) -> i8 {
    let a = a % p;
    if a == 0 {
        return 0;
    }
    if pow_mod(a, (p - 1) / 2, p) == 1 {
        1
    } else {
        -1
    }
}

const EXHAUSTIVE_SQRT_BOUND: u64 = 10_000;

/// A square root of `a` modulo the odd prime `p`, if one exists. Below
/// 10^4 the least root is found by exhaustive search; above, Tonelli-Shanks
/// with the least quadratic non-residue, normalized to the smaller root.
pub fn sqrt_mod_prime(a: &BigInt, p: u64) -> Result<Option<u64>> {
    check_odd_prime(p)?;
    Ok(sqrt_mod_u64(reduce_mod(a, p), p))
}

pub(crate) fn sqrt_mod_u64(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        return Some(0);
    }
    if p == 2 {
        return Some(a);
    }
    if legendre_u64(a, p) != 1 {
        return None;
    }
    if p < EXHAUSTIVE_SQRT_BOUND {
        return (1..p).find(|r| mul_mod(*r, *r, p) == a);
    }
    let r = tonelli_shanks(a, p);
    Some(r.min(p - r))
}

fn tonelli_shanks(a: u64, p: u64) -> u64 {
    let s = (p - 1).trailing_zeros();
    let q = (p - 1) >> s;
    if s == 1 {
        return pow_mod(a, (p + 1) / 4, p);
    }
    let z = (2..p).find(|z| legendre_u64(*z, p) == -1).expect("non-residue exists");
    let mut m = s;
    let mut c = pow_mod(z, q, p);
    let mut t = pow_mod(a, q, p);
    let mut r = pow_mod(a, q.div_ceil(2), p);
    while t != 1 {
        let mut i = 0;
        let mut t2 = t;
        while t2 != 1 {
            t2 = mul_mod(t2, t2, p);
            i += 1;
        }
        let b = pow_mod(c, 1 << (m - i - 1), p);
        m = i;
        c = mul_mod(b, b, p);
        t = mul_mod(t, c, p);
        r = mul_mod(r, b, p);
    }
    r
}

/// Square test for a `p`-adic unit: the residue is a nonzero square mod `p`
/// for odd `p`, and `u = 1 mod 8` for `p = 2`.
pub fn is_square_in_zp_units(u: &BigRational, p: u64) -> Result<bool> {
    if !is_prime_u64(p) {
        return Err(ArithError::NotPrime(p));
    }
    let modulus = if p == 2 { 8 } else { p };
    let num = reduce_mod(u.numer(), modulus);
    let den = reduce_mod(u.denom(), modulus);
    if num % p == 0 || den % p == 0 {
        return Err(ArithError::NotUnit { value: u.to_string(), prime: p });
    }
    // u = num / den is a square iff num * den is.
    let prod = mul_mod(num, den, modulus);
    Ok(if p == 2 { prod == 1 } else { legendre_u64(prod, p) == 1 })
}

/// Square test in `Q_p`: even valuation and a square unit part.
pub fn is_square_in_qp(q: &BigRational, p: u64) -> Result<bool> {
    let v = Valuation::of_rational(q, p)?;
    if v.value % 2 != 0 {
        return Ok(false);
    }
    let unit = q / pow_rational(p, v.value);
    is_square_in_zp_units(&unit, p)
}

fn pow_rational(p: u64, e: i64) -> BigRational {
    let base = BigInt::from(p).pow(e.unsigned_abs() as u32);
    if e >= 0 {
        BigRational::from_integer(base)
    } else {
        BigRational::new(BigInt::one(), base)
    }
}

/// Class of a nonzero rational modulo squares: a sign and a positive
/// squarefree integer.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SquareClass {
    negative: bool,
    squarefree: BigUint,
}

impl SquareClass {
    pub fn one() -> SquareClass {
        SquareClass { negative: false, squarefree: BigUint::one() }
    }

    pub fn from_integer(n: &BigInt) -> Result<SquareClass> {
        let (s, _) = squarefree_decompose(n)?;
        Ok(SquareClass {
            negative: s.sign() == Sign::Minus,
            squarefree: s.magnitude().clone(),
        })
    }

    pub fn from_i64(n: i64) -> Result<SquareClass> {
        SquareClass::from_integer(&BigInt::from(n))
    }

    /// The class of `num/den` is the class of `num * den`.
    pub fn from_rational(q: &BigRational) -> Result<SquareClass> {
        if q.is_zero() {
            return Err(ArithError::Zero);
        }
        let a = SquareClass::from_integer(q.numer())?;
        let b = SquareClass::from_integer(q.denom())?;
        Ok(a.mul(&b))
    }

    pub fn is_negative(&self) -> bool {
        self.negative
    }

    pub fn squarefree_part(&self) -> &BigUint {
        &self.squarefree
    }

    /// The signed squarefree representative.
    pub fn to_integer(&self) -> BigInt {
        let sign = if self.negative { Sign::Minus } else { Sign::Plus };
        BigInt::from_biguint(sign, self.squarefree.clone())
    }

    pub fn is_square(&self) -> bool {
        !self.negative && self.squarefree.is_one()
    }

    /// Product of classes. `s t / gcd(s, t)^2` is squarefree whenever `s`
    /// and `t` are, so no factoring is needed.
    pub fn mul(&self, other: &SquareClass) -> SquareClass {
        let g = self.squarefree.gcd(&other.squarefree);
        let prod = &self.squarefree * &other.squarefree / (&g * &g);
        SquareClass { negative: self.negative != other.negative, squarefree: prod }
    }

    /// Primes dividing the squarefree part.
    pub fn primes(&self) -> Result<Vec<u64>> {
        Ok(factorize(&self.squarefree)?.into_iter().map(|(p, _)| p).collect())
    }

    /// `p`-adic valuation parity (0 or 1) of the representative.
    pub fn valuation_parity(&self, p: u64) -> u32 {
        strip_prime(&self.squarefree, p).0
    }

    /// Unit part of the representative modulo `m` with the sign applied.
    pub(crate) fn unit_residue(&self, p: u64, m: u64) -> u64 {
        let (_, unit) = strip_prime(&self.squarefree, p);
        let r = (unit % m).to_u64().expect("small modulus");
        if self.negative {
            (m - r) % m
        } else {
            r
        }
    }
}

impl fmt::Display for SquareClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_integer())
    }
}

/// Accepts an integer or a fraction `n/d`.
impl std::str::FromStr for SquareClass {
    type Err = ArithError;

    fn from_str(s: &str) -> Result<SquareClass> {
        let q: BigRational = s.trim().parse().map_err(|_| ArithError::Parse(s.trim().to_string()))?;
        SquareClass::from_rational(&q)
    }
}

impl Serialize for SquareClass {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for SquareClass {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<SquareClass, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Integer square root of a nonnegative `BigInt`, if it is a perfect square.
pub(crate) fn exact_sqrt(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

/// Exact `k`-th root of an integer, respecting sign for odd `k`.
pub(crate) fn exact_root(n: &BigInt, k: u32) -> Option<BigInt> {
    if k == 1 {
        return Some(n.clone());
    }
    if n.is_negative() && k % 2 == 0 {
        return None;
    }
    let r = n.nth_root(k);
    (r.pow(k) == *n).then_some(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_squarefree(n: i64) -> bool {
        let n = n.unsigned_abs();
        (2..).take_while(|d| d * d <= n).all(|d| n % (d * d) != 0)
    }

    #[test]
    fn squarefree_examples() {
        let cases = [(1, 1, 1u32), (-12, -3, 2), (49, 1, 7)];
        for (n, s, m) in cases {
            let (gs, gm) = squarefree_decompose(&BigInt::from(n)).unwrap();
            assert_eq!((gs, gm), (BigInt::from(s), BigUint::from(m)), "n = {n}");
        }
        assert_eq!(squarefree_decompose(&BigInt::zero()), Err(ArithError::Zero));
    }

    #[test]
    fn squarefree_decomposition_reconstructs_input() {
        for n in (-3000i64..3000).chain(999_000..1_000_001).filter(|n| *n != 0) {
            let (s, m) = squarefree_decompose(&BigInt::from(n)).unwrap();
            let m = BigInt::from(m);
            assert_eq!(&s * &m * &m, BigInt::from(n));
            assert!(brute_squarefree(s.to_i64().unwrap()), "{n}");
            assert_eq!(s.sign(), BigInt::from(n).sign());
        }
    }

    #[test]
    fn legendre_examples() {
        assert_eq!(legendre_symbol(&BigInt::from(2), 7), Ok(1));
        assert_eq!(legendre_symbol(&BigInt::from(7), 7), Ok(0));
        assert_eq!(legendre_symbol(&BigInt::from(3), 7), Ok(-1));
        assert_eq!(legendre_symbol(&BigInt::from(-1), 7), Ok(-1));
        assert_eq!(legendre_symbol(&BigInt::from(3), 2), Err(ArithError::EvenPrime(2)));
        assert_eq!(legendre_symbol(&BigInt::from(3), 9), Err(ArithError::NotPrime(9)));
    }

    #[test]
    fn legendre_matches_exhaustive_squaring() {
        for p in (3u64..200).filter(|p| is_prime_u64(*p)) {
            let squares: Vec<u64> = (1..p).map(|x| x * x % p).collect();
            for a in 0..p {
                let expected = if a == 0 {
                    0
                } else if squares.contains(&a) {
                    1
                } else {
                    -1
                };
                assert_eq!(legendre_symbol(&BigInt::from(a), p).unwrap(), expected, "({a}/{p})");
            }
        }
    }

    #[test]
    fn sqrt_mod_prime_examples() {
        let r = sqrt_mod_prime(&BigInt::from(2), 7).unwrap().unwrap();
        assert!(r == 3 || r == 4);
        assert_eq!(sqrt_mod_prime(&BigInt::from(0), 7), Ok(Some(0)));
        assert_eq!(sqrt_mod_prime(&BigInt::from(3), 7), Ok(None));
    }

    #[test]
    fn tonelli_shanks_above_exhaustive_bound() {
        for p in [10_007u64, 65_537, 1_000_000_007, 998_244_353] {
            for a in [2u64, 3, 5, 10, 12345] {
                match sqrt_mod_u64(a, p) {
                    Some(r) => assert_eq!(mul_mod(r, r, p), a % p),
                    None => assert_eq!(legendre_u64(a, p), -1),
                }
            }
        }
    }

    #[test]
    fn unit_square_examples() {
        let q = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
        assert_eq!(is_square_in_zp_units(&q(17, 1), 2), Ok(true));
        for p in [2u64, 3, 5, 7, 101] {
            assert_eq!(is_square_in_zp_units(&q(1, 1), p), Ok(true));
        }
        assert_eq!(is_square_in_zp_units(&q(5, 1), 7), Ok(false));
        assert!(matches!(is_square_in_zp_units(&q(14, 1), 7), Err(ArithError::NotUnit { .. })));
        assert_eq!(is_square_in_qp(&q(4, 1), 5), Ok(true));
        assert_eq!(is_square_in_qp(&q(5, 1), 5), Ok(false));
        assert_eq!(is_square_in_qp(&q(50, 1), 2), Ok(false));
        assert_eq!(is_square_in_qp(&q(9, 4), 2), Ok(true));
        assert_eq!(is_square_in_qp(&q(0, 1), 2), Err(ArithError::Zero));
    }

    /// Exhaustive oracle: the unit squares modulo `p^4`.
    fn unit_squares_mod_p4(p: u64) -> (u64, std::collections::HashSet<u64>) {
        let m = p.pow(4);
        let set = (1..m).filter(|x| x % p != 0).map(|x| mul_mod(x, x, m)).collect();
        (m, set)
    }

    #[test]
    fn unit_square_criterion_matches_mod_p4_oracle() {
        for p in (2u64..=50).filter(|p| is_prime_u64(*p)) {
            let (m, squares) = unit_squares_mod_p4(p);
            for num in -100i64..=100 {
                for den in 1i64..=100 {
                    if num.rem_euclid(p as i64) == 0 || den % p as i64 == 0 {
                        continue;
                    }
                    let den_inv = BigInt::from(den).modinv(&BigInt::from(m)).unwrap();
                    let u = reduce_mod(&(den_inv * num), m);
                    let q = BigRational::new(BigInt::from(num), BigInt::from(den));
                    assert_eq!(
                        is_square_in_zp_units(&q, p).unwrap(),
                        squares.contains(&u),
                        "{num}/{den} at {p}"
                    );
                }
            }
        }
    }

    #[test]
    fn square_class_identifies_ratios_of_squares() {
        let class = |n: i64, d: i64| {
            SquareClass::from_rational(&BigRational::new(BigInt::from(n), BigInt::from(d))).unwrap()
        };
        let is_rational_square = |n: i64, d: i64| {
            let r = BigRational::new(BigInt::from(n), BigInt::from(d));
            r.numer().sign() != Sign::Minus
                && exact_sqrt(r.numer()).is_some()
                && exact_sqrt(r.denom()).is_some()
        };
        let values: Vec<(i64, i64)> =
            (-12..=12).filter(|n| *n != 0).flat_map(|n| (1..=6).map(move |d| (n, d))).collect();
        for &(n1, d1) in &values {
            for &(n2, d2) in &values {
                let same = class(n1, d1) == class(n2, d2);
                // q1 / q2 = n1 d2 / (d1 n2)
                assert_eq!(same, is_rational_square(n1 * d2 * n2.signum(), d1 * n2.abs()));
            }
        }
    }

    #[test]
    fn square_class_product_is_squarefree() {
        let a = SquareClass::from_i64(6).unwrap();
        let b = SquareClass::from_i64(-10).unwrap();
        assert_eq!(a.mul(&b), SquareClass::from_i64(-15).unwrap());
        assert!(a.mul(&a).is_square());
    }

    #[test]
    fn factorization_of_large_semiprime() {
        let n = BigUint::from(1_000_000_007u64) * BigUint::from(998_244_353u64);
        assert_eq!(factorize(&n).unwrap(), vec![(998_244_353, 1), (1_000_000_007, 1)]);
        // 2^64 + 13 is prime; its square has no factor that fits in 64 bits.
        let big_prime = (BigUint::one() << 64u32) + 13u32;
        assert!(is_prime(&big_prime));
        let huge = &big_prime * &big_prime;
        assert!(matches!(factorize(&huge), Err(ArithError::FactorizationTooHard(_))));
    }

    proptest::proptest! {
        #[test]
        fn legendre_is_multiplicative(a in 1i64..10_000, b in 1i64..10_000, idx in 0usize..20) {
            let primes = [3u64, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73];
            let p = primes[idx];
            proptest::prop_assume!(a % p as i64 != 0 && b % p as i64 != 0);
            let ab = BigInt::from(a) * BigInt::from(b);
            let lhs = legendre_symbol(&ab, p).unwrap();
            let rhs = legendre_symbol(&BigInt::from(a), p).unwrap() * legendre_symbol(&BigInt::from(b), p).unwrap();
            proptest::prop_assert_eq!(lhs, rhs);
        }
    }
}
