//! Places of `Q`, the Hilbert symbol at every place, the 2-torsion invariant
//! map and the reciprocity identities that tie the local symbols together.
//!
//! The symbol is computed from closed-form local formulas. Nothing here
//! consults a conic solver or assumes quadratic reciprocity; both are checked
//! against these formulas elsewhere.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::Add;
use std::str::FromStr;

use num_bigint::BigInt;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arith::{is_prime_u64, legendre_u64, ArithError, SquareClass};
use crate::error::{Error, Result};

/// A completion of `Q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Place {
    Real,
    Finite(u64),
}

impl Place {
    /// A finite place; `p` must be prime.
    pub fn finite(p: u64) -> Result<Place> {
        if is_prime_u64(p) {
            Ok(Place::Finite(p))
        } else {
            Err(ArithError::NotPrime(p).into())
        }
    }

    pub fn prime(self) -> Option<u64> {
        match self {
            Place::Real => None,
            Place::Finite(p) => Some(p),
        }
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Real => f.write_str("real"),
            Place::Finite(p) => write!(f, "{p}"),
        }
    }
}

impl FromStr for Place {
    type Err = Error;

    fn from_str(s: &str) -> Result<Place> {
        match s.trim() {
            "real" | "inf" | "infinity" | "R" => Ok(Place::Real),
            other => {
                let p: u64 = other
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("`{other}` is not a place")))?;
                Place::finite(p)
            }
        }
    }
}

impl Serialize for Place {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Place {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Place, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// An element of the 2-torsion of `Q/Z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum HalfInvariant {
    #[default]
    Zero,
    Half,
}

impl HalfInvariant {
    pub fn from_symbol(symbol: i8) -> HalfInvariant {
        if symbol == -1 {
            HalfInvariant::Half
        } else {
            HalfInvariant::Zero
        }
    }

    pub fn is_zero(self) -> bool {
        self == HalfInvariant::Zero
    }
}

impl Add for HalfInvariant {
    type Output = HalfInvariant;

    fn add(self, rhs: HalfInvariant) -> HalfInvariant {
        if self == rhs {
            HalfInvariant::Zero
        } else {
            HalfInvariant::Half
        }
    }
}

impl std::iter::Sum for HalfInvariant {
    fn sum<I: Iterator<Item = HalfInvariant>>(iter: I) -> HalfInvariant {
        iter.fold(HalfInvariant::Zero, |acc, x| acc + x)
    }
}

impl fmt::Display for HalfInvariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HalfInvariant::Zero => "0",
            HalfInvariant::Half => "1/2",
        })
    }
}

impl Serialize for HalfInvariant {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for HalfInvariant {
    fn deserialize<D: Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<HalfInvariant, D::Error> {
        match String::deserialize(deserializer)?.as_str() {
            "0" => Ok(HalfInvariant::Zero),
            "1/2" => Ok(HalfInvariant::Half),
            other => Err(serde::de::Error::custom(format!("`{other}` is not in {{0, 1/2}}"))),
        }
    }
}

/// The image of a nonzero rational in `Q_v^x / Q_v^x2`, as far as the
/// symbol formulas need it.
///
/// For odd `p` the unit residue is taken mod `p`, for `p = 2` mod 8.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalClass {
    Real { negative: bool },
    Finite { prime: u64, odd_valuation: bool, unit: u64 },
}

impl LocalClass {
    pub fn of(class: &SquareClass, place: Place) -> LocalClass {
        match place {
            Place::Real => LocalClass::Real { negative: class.is_negative() },
            Place::Finite(p) => {
                let modulus = if p == 2 { 8 } else { p };
                LocalClass::Finite {
                    prime: p,
                    odd_valuation: class.valuation_parity(p) == 1,
                    unit: class.unit_residue(p, modulus),
                }
            }
        }
    }
}

fn sign(odd: bool) -> i8 {
    if odd {
        -1
    } else {
        1
    }
}

/// The local Hilbert symbol from local square-class data. Both arguments
/// must live at the same place.
pub fn local_symbol(a: LocalClass, b: LocalClass) -> i8 {
    match (a, b) {
        (LocalClass::Real { negative: na }, LocalClass::Real { negative: nb }) => sign(na && nb),
        (
            LocalClass::Finite { prime: p, odd_valuation: alpha, unit: u },
            LocalClass::Finite { prime: q, odd_valuation: beta, unit: v },
        ) => {
            assert_eq!(p, q, "local classes at different places");
            if p == 2 {
                let eps = |x: u64| (x % 8 - 1) / 2 % 2 == 1;
                let omega = |x: u64| (x * x - 1) / 8 % 2 == 1;
                let odd = (eps(u) && eps(v)) ^ (alpha && omega(v)) ^ (beta && omega(u));
                sign(odd)
            } else {
                let eps_p = (p - 1) / 2 % 2 == 1;
                let mut s = sign(alpha && beta && eps_p);
                if beta {
                    s *= legendre_u64(u, p);
                }
                if alpha {
                    s *= legendre_u64(v, p);
                }
                s
            }
        }
        _ => panic!("local classes at different places"),
    }
}

/// The Hilbert symbol `(a, b)_v`: `-1` exactly when `a x^2 + b y^2 = z^2` has
/// no nontrivial point over the completion at `v`.
pub fn hilbert_symbol(a: &SquareClass, b: &SquareClass, v: Place) -> i8 {
    local_symbol(LocalClass::of(a, v), LocalClass::of(b, v))
}

/// The invariant of the quaternion class `(a, b)` at `v`.
pub fn invariant(a: &SquareClass, b: &SquareClass, v: Place) -> HalfInvariant {
    HalfInvariant::from_symbol(hilbert_symbol(a, b, v))
}

/// Places outside which `(a, b)_v = 1`: the real place, 2, and the primes
/// dividing either squarefree part.
pub fn symbol_support(a: &SquareClass, b: &SquareClass) -> Result<BTreeSet<Place>> {
    let mut places = BTreeSet::from([Place::Real, Place::Finite(2)]);
    for p in a.primes()?.into_iter().chain(b.primes()?) {
        places.insert(Place::Finite(p));
    }
    Ok(places)
}

/// The product of all local symbols with the places that contribute `-1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolProduct {
    pub product: i8,
    pub nontrivial: BTreeSet<Place>,
}

pub fn product_of_symbols(a: &SquareClass, b: &SquareClass) -> Result<SymbolProduct> {
    let nontrivial: BTreeSet<Place> = symbol_support(a, b)?
        .into_iter()
        .filter(|v| hilbert_symbol(a, b, *v) == -1)
        .collect();
    let product = sign(nontrivial.len() % 2 == 1);
    Ok(SymbolProduct { product, nontrivial })
}

/// A quantity computed by a closed formula and again from local symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualRoute {
    pub closed_form: i8,
    pub computed: i8,
}

impl DualRoute {
    pub fn agrees(&self) -> bool {
        self.closed_form == self.computed
    }
}

/// The reciprocity identities for a pair of distinct odd primes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReciprocityReport {
    pub p: u64,
    pub q: u64,
    /// `(p,q)_2` against `(-1)^((p-1)(q-1)/4)`.
    pub pq_at_2: DualRoute,
    /// `(p,q)_p` against the Legendre symbol `(q/p)`.
    pub pq_at_p: DualRoute,
    /// `(p,q)_q` against `(p/q)`.
    pub pq_at_q: DualRoute,
    /// `prod_v (p,q)_v` against `(q/p)(p/q)(-1)^((p-1)(q-1)/4)`.
    pub product_pq: DualRoute,
    /// `prod_v (2,p)_v` against `(2/p)(-1)^((p^2-1)/8)`, then the same for `q`.
    pub product_2p: DualRoute,
    pub product_2q: DualRoute,
    /// `prod_v (-1,p)_v` against `(-1/p)(-1)^((p-1)/2)`, then the same for `q`.
    pub product_minus1_p: DualRoute,
    pub product_minus1_q: DualRoute,
}

impl ReciprocityReport {
    fn routes(&self) -> [DualRoute; 8] {
        [
            self.pq_at_2,
            self.pq_at_p,
            self.pq_at_q,
            self.product_pq,
            self.product_2p,
            self.product_2q,
            self.product_minus1_p,
            self.product_minus1_q,
        ]
    }

    /// Every pair agrees.
    pub fn all_agree(&self) -> bool {
        self.routes().iter().all(DualRoute::agrees)
    }

    /// Every product is `+1` by both routes.
    pub fn products_trivial(&self) -> bool {
        self.routes()[3..].iter().all(|r| r.closed_form == 1 && r.computed == 1)
    }
}

fn check_odd_prime(p: u64) -> Result<()> {
    if p == 2 {
        return Err(ArithError::EvenPrime(p).into());
    }
    if !is_prime_u64(p) {
        return Err(ArithError::NotPrime(p).into());
    }
    Ok(())
}

pub fn reciprocity_identities(p: u64, q: u64) -> Result<ReciprocityReport> {
    check_odd_prime(p)?;
    check_odd_prime(q)?;
    if p == q {
        return Err(Error::InvalidArgument(format!("primes must be distinct, got {p} twice")));
    }
    let class = |n: i64| SquareClass::from_i64(n).expect("nonzero");
    let (cp, cq) = (class(p as i64), class(q as i64));
    let (two, minus_one) = (class(2), class(-1));

    let at_2 = sign((p - 1) * (q - 1) / 4 % 2 == 1);
    let leg_qp = legendre_u64(q, p);
    let leg_pq = legendre_u64(p, q);
    let product = |a: &SquareClass, b: &SquareClass| -> Result<i8> {
        Ok(product_of_symbols(a, b)?.product)
    };
    let two_closed = |r: u64| legendre_u64(2, r) * sign((r * r - 1) / 8 % 2 == 1);
    let minus_one_closed = |r: u64| legendre_u64(r - 1, r) * sign((r - 1) / 2 % 2 == 1);

    Ok(ReciprocityReport {
        p,
        q,
        pq_at_2: DualRoute { closed_form: at_2, computed: hilbert_symbol(&cp, &cq, Place::Finite(2)) },
        pq_at_p: DualRoute { closed_form: leg_qp, computed: hilbert_symbol(&cp, &cq, Place::Finite(p)) },
        pq_at_q: DualRoute { closed_form: leg_pq, computed: hilbert_symbol(&cp, &cq, Place::Finite(q)) },
        product_pq: DualRoute { closed_form: leg_qp * leg_pq * at_2, computed: product(&cp, &cq)? },
        product_2p: DualRoute { closed_form: two_closed(p), computed: product(&two, &cp)? },
        product_2q: DualRoute { closed_form: two_closed(q), computed: product(&two, &cq)? },
        product_minus1_p: DualRoute {
            closed_form: minus_one_closed(p),
            computed: product(&minus_one, &cp)?,
        },
        product_minus1_q: DualRoute {
            closed_form: minus_one_closed(q),
            computed: product(&minus_one, &cq)?,
        },
    })
}

/// Convenience for tests and examples: the square class of a machine integer.
pub fn class_of(n: i64) -> SquareClass {
    SquareClass::from_integer(&BigInt::from(n)).expect("nonzero integer")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbol_examples() {
        assert_eq!(hilbert_symbol(&class_of(-1), &class_of(-1), Place::Real), -1);
        assert_eq!(hilbert_symbol(&class_of(3), &class_of(7), Place::Finite(7)), -1);
        assert_eq!(hilbert_symbol(&class_of(3), &class_of(5), Place::Finite(7)), 1);
        for v in [Place::Real, Place::Finite(2), Place::Finite(3), Place::Finite(5)] {
            assert_eq!(hilbert_symbol(&class_of(2), &class_of(-1), v), 1, "(2, 1-2) at {v}");
        }
    }

    #[test]
    fn invariant_examples() {
        assert_eq!(invariant(&class_of(-1), &class_of(-1), Place::Real), HalfInvariant::Half);
        assert_eq!(invariant(&class_of(5), &class_of(2), Place::Finite(5)), HalfInvariant::Half);
        for b in [-7, -1, 2, 3, 30] {
            for v in [Place::Real, Place::Finite(2), Place::Finite(3), Place::Finite(7)] {
                assert_eq!(invariant(&class_of(1), &class_of(b), v), HalfInvariant::Zero);
            }
        }
    }

    #[test]
    fn support_examples() {
        let places = |ps: &[u64]| {
            let mut s: BTreeSet<Place> = ps.iter().map(|p| Place::Finite(*p)).collect();
            s.insert(Place::Real);
            s
        };
        assert_eq!(symbol_support(&class_of(3), &class_of(5)).unwrap(), places(&[2, 3, 5]));
        assert_eq!(symbol_support(&class_of(1), &class_of(1)).unwrap(), places(&[2]));
        assert_eq!(symbol_support(&class_of(-17), &class_of(2)).unwrap(), places(&[2, 17]));
    }

    #[test]
    fn product_examples() {
        let r = product_of_symbols(&class_of(-1), &class_of(-1)).unwrap();
        assert_eq!(r.product, 1);
        assert_eq!(r.nontrivial, BTreeSet::from([Place::Real, Place::Finite(2)]));
        let r = product_of_symbols(&class_of(1), &class_of(77)).unwrap();
        assert_eq!((r.product, r.nontrivial.len()), (1, 0));
        let r = product_of_symbols(&class_of(3), &class_of(7)).unwrap();
        assert_eq!(r.product, 1);
        assert_eq!(r.nontrivial.len() % 2, 0);
    }

    #[test]
    fn reciprocity_examples() {
        let r = reciprocity_identities(3, 5).unwrap();
        assert_eq!(r.pq_at_2.closed_form, 1);
        let r = reciprocity_identities(3, 7).unwrap();
        assert_eq!(r.pq_at_2.closed_form, -1);
        let r = reciprocity_identities(5, 13).unwrap();
        assert!(r.all_agree() && r.products_trivial());
        assert!(reciprocity_identities(5, 5).is_err());
        assert!(reciprocity_identities(2, 5).is_err());
        assert!(reciprocity_identities(9, 5).is_err());
    }

    #[test]
    fn half_invariant_arithmetic() {
        use HalfInvariant::*;
        assert_eq!(Half + Half, Zero);
        assert_eq!(Half + Zero, Half);
        assert_eq!([Half, Half, Half].into_iter().sum::<HalfInvariant>(), Half);
        let json = serde_json::to_string(&Half).unwrap();
        assert_eq!(json, "\"1/2\"");
        assert_eq!(serde_json::from_str::<HalfInvariant>(&json).unwrap(), Half);
    }

    #[test]
    fn place_parsing() {
        assert_eq!("real".parse::<Place>().unwrap(), Place::Real);
        assert_eq!("7".parse::<Place>().unwrap(), Place::Finite(7));
        assert!("8".parse::<Place>().is_err());
        assert!(Place::finite(91).is_err());
        assert!(Place::Real < Place::Finite(2));
    }

    proptest::proptest! {
        #[test]
        fn symbol_is_symmetric_bimultiplicative_and_square_invariant(
            a in -300i64..300, b1 in -300i64..300, b2 in -300i64..300, s in 1i64..12, idx in 0usize..8
        ) {
            proptest::prop_assume!(a != 0 && b1 != 0 && b2 != 0);
            let places = [Place::Real, Place::Finite(2), Place::Finite(3), Place::Finite(5),
                          Place::Finite(7), Place::Finite(11), Place::Finite(13), Place::Finite(101)];
            let v = places[idx];
            let (ca, c1, c2) = (class_of(a), class_of(b1), class_of(b2));
            proptest::prop_assert_eq!(hilbert_symbol(&ca, &c1, v), hilbert_symbol(&c1, &ca, v));
            proptest::prop_assert_eq!(
                hilbert_symbol(&ca, &c1.mul(&c2), v),
                hilbert_symbol(&ca, &c1, v) * hilbert_symbol(&ca, &c2, v)
            );
            proptest::prop_assert_eq!(hilbert_symbol(&class_of(a * s * s), &c1, v), hilbert_symbol(&ca, &c1, v));
        }
    }
}
