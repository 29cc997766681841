//! Quaternion classes `(a, f)` on a variety, evaluated at local points.
//!
//! A class is given by a constant slot `a` and several rational functions
//! `f_i` that define the same class wherever they are defined. At a local
//! point we pick a representation whose value has a square class that the
//! known digits pin down, then apply the local symbol. Over `Z/p^n` that
//! means the valuation is below `n` and enough further digits are known to
//! fix the unit part mod `p` (mod 8 when `p = 2`). At the real place only
//! the sign matters.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{legendre_u64, pow_mod, SquareClass};
use crate::error::{Error, Result};
use crate::padic::{
    bad_prime_superset, locally_soluble, real_points_nonempty, RealWitness, ResidueEngine, ResiduePoint, TriState,
    Witness,
};
use crate::poly::{ParseError, Polynomial, PolynomialSystem};
use crate::search::{search_rational_points, ProjectiveRationalPoint};
use crate::symbols::{local_symbol, HalfInvariant, LocalClass, Place};

/// Residue points are deepened at most to this precision before an
/// evaluation is reported as undeterminable.
pub const MAX_EVALUATION_DEPTH: u32 = 6;

/// `num / den` with homogeneous numerator and denominator of equal degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalFunction {
    pub num: Polynomial,
    pub den: Polynomial,
    /// Where the representation is known to be regular, in words.
    pub note: String,
}

impl RationalFunction {
    pub fn new(num: Polynomial, den: Polynomial, note: impl Into<String>) -> Result<RationalFunction> {
        if den.is_zero() || num.is_zero() {
            return Err(Error::InvalidArgument("a representation must be a nonzero function".into()));
        }
        if num.nvars() != den.nvars() || !num.is_homogeneous() || !den.is_homogeneous() || num.degree() != den.degree() {
            return Err(Error::InvalidArgument(
                "numerator and denominator must be homogeneous of the same degree".into(),
            ));
        }
        Ok(RationalFunction { num, den, note: note.into() })
    }

    pub fn parse(vars: &[String], num: &str, den: &str, note: &str) -> std::result::Result<RationalFunction, ParseError> {
        let (n, d) = (Polynomial::parse(vars, num)?, Polynomial::parse(vars, den)?);
        RationalFunction::new(n, d, note).map_err(|e| ParseError { line: 1, column: 1, message: e.to_string() })
    }

    pub fn constant(nvars: usize, c: impl Into<BigInt>) -> Result<RationalFunction> {
        RationalFunction::new(Polynomial::constant(nvars, c), Polynomial::constant(nvars, 1), "constant")
    }

    pub fn is_constant(&self) -> bool {
        self.num.degree() == Some(0)
    }

    pub fn render(&self, vars: &[String]) -> String {
        format!("({}) / ({})", self.num.to_text(vars), self.den.to_text(vars))
    }
}

/// Why the class vanishes at places nobody lists: the constant slot is a
/// unit there and some representation takes a unit value at every local
/// point. The exceptional primes are where that argument is not claimed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitArgument {
    pub exceptional_primes: BTreeSet<u64>,
    pub statement: String,
}

/// A 2-torsion class `(a, f_i)` on a projective variety. Membership in the
/// Brauer group of the variety is asserted by whoever builds it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolClassOnVariety {
    pub name: String,
    pub system: PolynomialSystem,
    pub constant: SquareClass,
    pub representations: Vec<RationalFunction>,
    pub unit_argument: UnitArgument,
}

impl SymbolClassOnVariety {
    pub fn new(
        name: impl Into<String>,
        system: PolynomialSystem,
        constant: SquareClass,
        representations: Vec<RationalFunction>,
        unit_argument: UnitArgument,
    ) -> Result<SymbolClassOnVariety> {
        if representations.is_empty() {
            return Err(Error::InvalidArgument("a class needs at least one representation".into()));
        }
        if representations.iter().any(|r| r.num.nvars() != system.num_vars()) {
            return Err(Error::InvalidArgument("representation arity does not match the system".into()));
        }
        Ok(SymbolClassOnVariety { name: name.into(), system, constant, representations, unit_argument })
    }

    /// The pullback of the constant class `(a, b)`.
    pub fn constant_class(name: impl Into<String>, system: PolynomialSystem, a: SquareClass, b: SquareClass) -> Result<SymbolClassOnVariety> {
        let f = RationalFunction::constant(system.num_vars(), b.to_integer())?;
        let unit_argument = UnitArgument {
            exceptional_primes: b.primes()?.into_iter().collect(),
            statement: "both slots are odd units, so the symbol is trivial".into(),
        };
        SymbolClassOnVariety::new(name, system, a, vec![f], unit_argument)
    }

    pub fn is_constant(&self) -> bool {
        self.representations.iter().all(RationalFunction::is_constant)
    }

    /// The real place, 2, primes dividing `a` and the class's own
    /// exceptions: everywhere the unit argument is not claimed.
    pub fn exceptional_places(&self) -> Result<BTreeSet<Place>> {
        let mut out = BTreeSet::from([Place::Real, Place::Finite(2)]);
        out.extend(self.constant.primes()?.into_iter().map(Place::Finite));
        out.extend(self.unit_argument.exceptional_primes.iter().copied().map(Place::Finite));
        Ok(out)
    }

    pub fn describe(&self) -> String {
        let reps: Vec<String> = self.representations.iter().map(|r| r.render(self.system.vars())).collect();
        format!("({}, {})", self.constant, reps.join(" = "))
    }

    /// Whether `a` is a square in the completion, which kills the class
    /// there outright.
    pub fn constant_is_local_square(&self, place: Place) -> bool {
        is_local_square(LocalClass::of(&self.constant, place))
    }
}

fn is_local_square(c: LocalClass) -> bool {
    match c {
        LocalClass::Real { negative } => !negative,
        LocalClass::Finite { prime: 2, odd_valuation, unit } => !odd_valuation && unit == 1,
        LocalClass::Finite { prime, odd_valuation, unit } => !odd_valuation && legendre_u64(unit, prime) == 1,
    }
}

/// A point over one completion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LocalPoint {
    Rational { point: ProjectiveRationalPoint },
    Residue { point: ResiduePoint },
    Real { witness: RealWitness },
}

impl LocalPoint {
    /// Whether the point lies on the variety to its stated precision.
    pub fn lies_on(&self, system: &PolynomialSystem) -> bool {
        match self {
            LocalPoint::Rational { point } => system.contains_point(&point.coords),
            LocalPoint::Residue { point } => point.coords.len() == system.num_vars() && point.lies_on(system),
            LocalPoint::Real { witness } => witness.verify(system),
        }
    }

    fn fits(&self, place: Place) -> bool {
        match (self, place) {
            (LocalPoint::Rational { .. }, _) => true,
            (LocalPoint::Residue { point }, Place::Finite(p)) => point.prime == p,
            (LocalPoint::Real { .. }, Place::Real) => true,
            _ => false,
        }
    }
}

/// The outcome of one evaluation. `representation` is `None` when the
/// constant slot is a local square and no function value was needed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evaluation {
    pub place: Place,
    pub invariant: HalfInvariant,
    pub representation: Option<usize>,
    pub valuation: Option<i64>,
}

enum RepValue {
    Determined { class: LocalClass, valuation: Option<i64> },
    Undetermined { extra: u32 },
}

fn valuation_bigint(n: &BigInt, p: u64) -> (i64, BigInt) {
    let p = BigInt::from(p);
    let mut n = n.clone();
    let mut v = 0;
    while n.is_multiple_of(&p) {
        n /= &p;
        v += 1;
    }
    (v, n)
}

fn unit_modulus(p: u64) -> u64 {
    if p == 2 {
        8
    } else {
        p
    }
}

fn inverse_unit(x: u64, p: u64) -> u64 {
    if p == 2 {
        x % 8 // every odd residue is its own inverse mod 8
    } else {
        pow_mod(x, p - 2, p)
    }
}

/// The local class of a nonzero rational at a finite place.
fn finite_class(num: &BigInt, den: &BigInt, p: u64) -> (LocalClass, i64) {
    let m = unit_modulus(p);
    let (vn, un) = valuation_bigint(num, p);
    let (vd, ud) = valuation_bigint(den, p);
    let bm = BigInt::from(m);
    let un = un.mod_floor(&bm).to_u64().expect("small");
    let ud = ud.mod_floor(&bm).to_u64().expect("small");
    let unit = un * inverse_unit(ud, p) % m;
    let v = vn - vd;
    (LocalClass::Finite { prime: p, odd_valuation: v.rem_euclid(2) == 1, unit }, v)
}

fn rep_at_rational(f: &RationalFunction, pt: &ProjectiveRationalPoint, place: Place) -> Option<RepValue> {
    let num = f.num.eval(&pt.coords);
    let den = f.den.eval(&pt.coords);
    if num.is_zero() || den.is_zero() {
        return None;
    }
    Some(match place {
        Place::Real => RepValue::Determined {
            class: LocalClass::Real { negative: num.is_negative() != den.is_negative() },
            valuation: None,
        },
        Place::Finite(p) => {
            let (class, v) = finite_class(&num, &den, p);
            RepValue::Determined { class, valuation: Some(v) }
        }
    })
}

fn rep_at_residue(f: &RationalFunction, pt: &ResiduePoint) -> RepValue {
    let p = pt.prime;
    if f.is_constant() {
        // Known exactly, whatever the precision of the point.
        let c = |g: &Polynomial| g.terms().next().map(|(_, c)| c.clone()).unwrap_or_default();
        let (class, v) = finite_class(&c(&f.num), &c(&f.den), p);
        return RepValue::Determined { class, valuation: Some(v) };
    }
    let n = pt.precision;
    let m = pt.modulus();
    let need = if p == 2 { 3 } else { 1 };
    let um = unit_modulus(p);
    // Valuation and unit residue of a value known modulo p^n.
    let part = |poly: &Polynomial| -> std::result::Result<(u32, u64), u32> {
        let mut r = poly.eval_mod(&pt.coords, m);
        if r == 0 {
            return Err(need);
        }
        let mut v = 0;
        while r % p == 0 {
            r /= p;
            v += 1;
        }
        if v + need > n {
            return Err(v + need - n);
        }
        Ok((v, r % um))
    };
    match (part(&f.num), part(&f.den)) {
        (Ok((vn, un)), Ok((vd, ud))) => {
            let v = vn as i64 - vd as i64;
            let unit = un * inverse_unit(ud, p) % um;
            RepValue::Determined {
                class: LocalClass::Finite { prime: p, odd_valuation: v.rem_euclid(2) == 1, unit },
                valuation: Some(v),
            }
        }
        (a, b) => RepValue::Undetermined { extra: a.err().unwrap_or(0).max(b.err().unwrap_or(0)) },
    }
}

type Interval = (BigRational, BigRational);

fn iv_mul(a: &Interval, b: &Interval) -> Interval {
    let c = [&a.0 * &b.0, &a.0 * &b.1, &a.1 * &b.0, &a.1 * &b.1];
    let lo = c.iter().min().expect("four").clone();
    let hi = c.iter().max().expect("four").clone();
    (lo, hi)
}

/// An enclosure of `f` over a box.
fn iv_eval(f: &Polynomial, boxes: &[Interval]) -> Interval {
    let mut lo = BigRational::zero();
    let mut hi = BigRational::zero();
    for (m, c) in f.terms() {
        let mut acc: Interval = (BigRational::one(), BigRational::one());
        for (i, e) in m.iter().enumerate() {
            for _ in 0..*e {
                acc = iv_mul(&acc, &boxes[i]);
            }
        }
        let c = BigRational::from_integer(c.clone());
        let (a, b) = (&acc.0 * &c, &acc.1 * &c);
        if a <= b {
            lo += a;
            hi += b;
        } else {
            lo += b;
            hi += a;
        }
    }
    (lo, hi)
}

fn sign_on_box(f: &Polynomial, boxes: &[Interval]) -> Option<bool> {
    let (lo, hi) = iv_eval(f, boxes);
    if lo.is_positive() {
        Some(false)
    } else if hi.is_negative() {
        Some(true)
    } else {
        None
    }
}

fn rep_at_real(f: &RationalFunction, boxes: &[Interval]) -> RepValue {
    match (sign_on_box(&f.num, boxes), sign_on_box(&f.den, boxes)) {
        (Some(a), Some(b)) => RepValue::Determined { class: LocalClass::Real { negative: a != b }, valuation: None },
        _ => RepValue::Undetermined { extra: 1 },
    }
}

/// Unit values first, then the smallest absolute valuation, then the
/// lowest index.
fn choose(values: Vec<(usize, RepValue)>, a: LocalClass, place: Place) -> Result<Evaluation> {
    let mut best: Option<(usize, LocalClass, Option<i64>)> = None;
    let mut extra = u32::MAX;
    for (i, v) in values {
        match v {
            RepValue::Determined { class, valuation } => {
                let key = |val: Option<i64>| val.map_or((false, 0), |v| (v != 0, v.abs()));
                if best.as_ref().map_or(true, |(_, _, bv)| key(valuation) < key(*bv)) {
                    best = Some((i, class, valuation));
                }
            }
            RepValue::Undetermined { extra: e } => extra = extra.min(e),
        }
    }
    match best {
        Some((i, class, valuation)) => Ok(Evaluation {
            place,
            invariant: HalfInvariant::from_symbol(local_symbol(a, class)),
            representation: Some(i),
            valuation,
        }),
        None => Err(Error::InsufficientPrecision { place, extra: if extra == u32::MAX { 1 } else { extra } }),
    }
}

/// Evaluates the class at a local point, reporting which representation
/// was used.
pub fn evaluate_detailed(alpha: &SymbolClassOnVariety, point: &LocalPoint, place: Place) -> Result<Evaluation> {
    if !point.fits(place) {
        return Err(Error::InvalidArgument(format!("local point does not live at the place {place}")));
    }
    if !point.lies_on(&alpha.system) {
        return Err(Error::NotOnVariety(format!("{point:?}")));
    }
    let a = LocalClass::of(&alpha.constant, place);
    if is_local_square(a) {
        return Ok(Evaluation { place, invariant: HalfInvariant::Zero, representation: None, valuation: None });
    }
    let reps = &alpha.representations;
    match point {
        LocalPoint::Rational { point } => {
            let values = reps.iter().enumerate().filter_map(|(i, f)| rep_at_rational(f, point, place).map(|v| (i, v)));
            choose(values.collect(), a, place).map_err(|_| {
                Error::InvalidArgument(format!("every representation is undefined or zero at {point}"))
            })
        }
        LocalPoint::Residue { point } => {
            let values = reps.iter().enumerate().map(|(i, f)| (i, rep_at_residue(f, point))).collect();
            choose(values, a, place)
        }
        LocalPoint::Real { witness } => {
            let mut w = witness.clone();
            for _ in 0..8 {
                let boxes = w.boxes();
                let values = reps.iter().enumerate().map(|(i, f)| (i, rep_at_real(f, &boxes))).collect();
                match choose(values, a, place) {
                    Ok(e) => return Ok(e),
                    Err(Error::InsufficientPrecision { .. }) => w = w.refine(&alpha.system, 16),
                    Err(other) => return Err(other),
                }
            }
            Err(Error::InsufficientPrecision { place, extra: 1 })
        }
    }
}

/// `inv_v alpha(P)`.
pub fn evaluate_at_local_point(alpha: &SymbolClassOnVariety, point: &LocalPoint, place: Place) -> Result<HalfInvariant> {
    evaluate_detailed(alpha, point, place).map(|e| e.invariant)
}

/// The invariant of a single representation, when it is determinable.
/// Used to test that the representations agree.
pub fn evaluate_representation(
    alpha: &SymbolClassOnVariety,
    index: usize,
    point: &ResiduePoint,
) -> Option<HalfInvariant> {
    let place = Place::Finite(point.prime);
    let a = LocalClass::of(&alpha.constant, place);
    match rep_at_residue(alpha.representations.get(index)?, point) {
        RepValue::Determined { class, .. } => Some(HalfInvariant::from_symbol(local_symbol(a, class))),
        RepValue::Undetermined { .. } => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImageMethod {
    /// The constant slot is a local square; every point gives 0.
    ConstantSquare,
    /// Every residue point at the requested depth was evaluated, deepening
    /// where needed.
    ResidueCover,
    /// Real points were sampled; the result is a subset of the image.
    Sampled,
}

/// The set of invariants attained over the points of one completion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalImage {
    pub place: Place,
    pub depth: u32,
    /// Highest precision any point had to be lifted to.
    pub deepest: u32,
    pub values: BTreeSet<HalfInvariant>,
    pub counts: BTreeMap<HalfInvariant, usize>,
    pub determinations: usize,
    pub indeterminate: usize,
    /// Set when the image may be missing values.
    pub partial: bool,
    pub method: ImageMethod,
}

impl LocalImage {
    /// The single attained value when the image is complete and constant.
    pub fn constant_value(&self) -> Option<HalfInvariant> {
        (!self.partial && self.values.len() == 1).then(|| *self.values.iter().next().expect("one value"))
    }
}

#[derive(Default)]
struct Tally {
    counts: BTreeMap<HalfInvariant, usize>,
    indeterminate: usize,
    deepest: u32,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        for (k, v) in other.counts {
            *self.counts.entry(k).or_default() += v;
        }
        self.indeterminate += other.indeterminate;
        self.deepest = self.deepest.max(other.deepest);
        self
    }
}

fn resolve(engine: &ResidueEngine<'_>, alpha: &SymbolClassOnVariety, pt: &ResiduePoint) -> Result<Tally> {
    let place = Place::Finite(pt.prime);
    let a = LocalClass::of(&alpha.constant, place);
    let values = alpha.representations.iter().enumerate().map(|(i, f)| (i, rep_at_residue(f, pt))).collect();
    match choose(values, a, place) {
        Ok(e) => Ok(Tally { counts: BTreeMap::from([(e.invariant, 1)]), indeterminate: 0, deepest: pt.precision }),
        Err(Error::InsufficientPrecision { extra, .. }) => {
            if pt.precision >= MAX_EVALUATION_DEPTH {
                return Ok(Tally { counts: BTreeMap::new(), indeterminate: 1, deepest: pt.precision });
            }
            // Deepen by doubling, but at least as far as the estimate asks.
            let target = (2 * pt.precision).max(pt.precision + extra).min(MAX_EVALUATION_DEPTH);
            let mut level = vec![pt.clone()];
            while level.first().is_some_and(|q| q.precision < target) {
                let mut next = Vec::new();
                for q in &level {
                    next.extend(engine.lift_fiber(q)?);
                }
                level = next;
            }
            // Residue points with no lifts carry no local points at all.
            let mut tally = Tally { deepest: target, ..Tally::default() };
            for q in &level {
                tally = tally.merge(resolve(engine, alpha, q)?);
            }
            Ok(tally)
        }
        Err(other) => Err(other),
    }
}

/// Candidate real points: a witness from the real solver plus small
/// rational points.
fn real_samples(system: &PolynomialSystem) -> Vec<LocalPoint> {
    let mut out = Vec::new();
    if let TriState::ProvedYes { witness: Witness::Real(w) } = real_points_nonempty(system) {
        out.push(LocalPoint::Real { witness: w });
    }
    if let Ok(points) = search_rational_points(system, 6, 64) {
        out.extend(points.into_iter().map(|point| LocalPoint::Rational { point }));
    }
    out
}

/// The invariants attained over all points of `X(Q_v)`. At a finite place
/// this is exhaustive: every residue point modulo `p^depth` is evaluated,
/// and undeterminable ones are deepened up to [`MAX_EVALUATION_DEPTH`].
pub fn local_image(alpha: &SymbolClassOnVariety, place: Place, depth: u32) -> Result<LocalImage> {
    if alpha.constant_is_local_square(place) {
        return Ok(LocalImage {
            place,
            depth,
            deepest: 0,
            values: BTreeSet::from([HalfInvariant::Zero]),
            counts: BTreeMap::new(),
            determinations: 0,
            indeterminate: 0,
            partial: false,
            method: ImageMethod::ConstantSquare,
        });
    }
    match place {
        Place::Real => {
            let mut counts: BTreeMap<HalfInvariant, usize> = BTreeMap::new();
            let mut indeterminate = 0;
            for pt in real_samples(&alpha.system) {
                match evaluate_at_local_point(alpha, &pt, place) {
                    Ok(v) => *counts.entry(v).or_default() += 1,
                    Err(_) => indeterminate += 1,
                }
            }
            Ok(LocalImage {
                place,
                depth: 0,
                deepest: 0,
                values: counts.keys().copied().collect(),
                determinations: counts.values().sum(),
                counts,
                indeterminate,
                partial: true,
                method: ImageMethod::Sampled,
            })
        }
        Place::Finite(p) => {
            let engine = ResidueEngine::new(&alpha.system, p)?;
            let points = engine.enumerate(depth)?;
            let tally = points
                .par_iter()
                .map(|pt| resolve(&engine, alpha, pt))
                .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))?;
            Ok(LocalImage {
                place,
                depth,
                deepest: tally.deepest.max(depth),
                values: tally.counts.keys().copied().collect(),
                determinations: tally.counts.values().sum(),
                counts: tally.counts,
                indeterminate: tally.indeterminate,
                partial: tally.indeterminate > 0,
                method: ImageMethod::ResidueCover,
            })
        }
    }
}

/// What stands in for the places an adelic point does not list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnlistedPlaces {
    /// Every unlisted prime up to this bound has a Hensel-certified point.
    pub checked_up_to: u64,
    pub argument: String,
}

/// Local points at finitely many places; the rest are vouched for by
/// [`UnlistedPlaces`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdelicPoint {
    pub points: BTreeMap<Place, LocalPoint>,
    pub unlisted: UnlistedPlaces,
}

impl AdelicPoint {
    /// Finds local points at `places`, each deep enough for the class to
    /// be evaluated, and checks local solubility at the unlisted primes up
    /// to `checked_up_to`.
    pub fn assemble(alpha: &SymbolClassOnVariety, places: &BTreeSet<Place>, checked_up_to: u64) -> Result<AdelicPoint> {
        let unlisted: Vec<u64> = (2..=checked_up_to)
            .filter(|p| crate::arith::is_prime_u64(*p) && !places.contains(&Place::Finite(*p)))
            .collect();
        unlisted.par_iter().try_for_each(|p| match locally_soluble(&alpha.system, *p, MAX_EVALUATION_DEPTH)? {
            TriState::ProvedYes { .. } => Ok(()),
            _ => Err(Error::InvalidArgument(format!("no local point certified at {p}"))),
        })?;
        let points = places
            .par_iter()
            .map(|v| default_local_point(alpha, *v).map(|pt| (*v, pt)))
            .collect::<Vec<_>>()
            .into_iter()
            .collect::<Result<BTreeMap<_, _>>>()?;
        Ok(AdelicPoint {
            points,
            unlisted: UnlistedPlaces {
                checked_up_to,
                argument: format!(
                    "Hensel-certified points at every unlisted prime up to {checked_up_to}; beyond that the \
                     discriminant primes are all listed or below the bound, so the reduction is smooth"
                ),
            },
        })
    }

    pub fn with_point(&self, place: Place, point: LocalPoint) -> AdelicPoint {
        let mut out = self.clone();
        out.points.insert(place, point);
        out
    }
}

/// Deepens a Hensel-certified residue point until the class evaluates.
fn make_determinable(engine: &ResidueEngine<'_>, alpha: &SymbolClassOnVariety, pt: ResiduePoint) -> Result<Option<ResiduePoint>> {
    let place = Place::Finite(pt.prime);
    let mut pt = pt;
    loop {
        match evaluate_detailed(alpha, &LocalPoint::Residue { point: pt.clone() }, place) {
            Ok(_) => return Ok(Some(pt)),
            Err(Error::InsufficientPrecision { extra, .. }) => {
                if pt.precision >= 3 * MAX_EVALUATION_DEPTH {
                    return Ok(None);
                }
                let target = pt.precision + extra;
                if engine.is_smooth_point(&pt.reduce(1))? {
                    pt = engine.hensel_lift(&pt, target)?;
                } else {
                    let child = engine
                        .lift_fiber(&pt)?
                        .into_iter()
                        .find(|c| engine.hensel_certificate(c).is_ok_and(|e| e.is_some()));
                    match child {
                        Some(c) => pt = c,
                        None => return Ok(None),
                    }
                }
            }
            Err(other) => return Err(other),
        }
    }
}

fn default_local_point(alpha: &SymbolClassOnVariety, place: Place) -> Result<LocalPoint> {
    match place {
        Place::Real => match real_points_nonempty(&alpha.system) {
            TriState::ProvedYes { witness: Witness::Real(w) } => Ok(LocalPoint::Real { witness: w }),
            _ => Err(Error::InvalidArgument("no real point certified".into())),
        },
        Place::Finite(p) => {
            let engine = ResidueEngine::new(&alpha.system, p)?;
            match engine.locally_soluble(MAX_EVALUATION_DEPTH)? {
                TriState::ProvedYes { witness: Witness::Hensel(w) } => make_determinable(&engine, alpha, w.point)?
                    .map(|point| LocalPoint::Residue { point })
                    .ok_or(Error::InsufficientPrecision { place, extra: 1 }),
                _ => Err(Error::InvalidArgument(format!("no local point certified at {place}"))),
            }
        }
    }
}

/// Why an unlisted place contributes nothing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum UnitReason {
    /// The constant slot is a square in the completion.
    ConstantIsLocalSquare,
    /// Every point modulo `p` has a representation with unit value, and the
    /// constant slot is a unit.
    UnitRepresentationCover { points: usize },
    /// The class's own unit argument, claimed at every non-exceptional prime.
    UnitRepresentationArgument { statement: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum TermSource {
    Listed { representation: Option<usize> },
    UnitSymbolArgument { reason: UnitReason },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SumTerm {
    pub place: Place,
    pub invariant: HalfInvariant,
    pub source: TermSource,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdelicSum {
    pub total: HalfInvariant,
    pub terms: Vec<SumTerm>,
}

/// Why the class vanishes at an unlisted place, if it does.
pub fn unit_reason(alpha: &SymbolClassOnVariety, place: Place) -> Result<Option<UnitReason>> {
    if alpha.constant_is_local_square(place) {
        return Ok(Some(UnitReason::ConstantIsLocalSquare));
    }
    if alpha.exceptional_places()?.contains(&place) {
        return Ok(None);
    }
    Ok(Some(UnitReason::UnitRepresentationArgument { statement: alpha.unit_argument.statement.clone() }))
}

/// `sum_v inv_v alpha(x_v)`. Every exceptional place of the class and
/// every bad prime of the variety must be listed or covered by a unit
/// argument; other places contribute 0 under the class's unit argument.
pub fn adelic_sum(alpha: &SymbolClassOnVariety, x: &AdelicPoint) -> Result<AdelicSum> {
    let mut required = alpha.exceptional_places()?;
    required.extend(bad_prime_superset(&alpha.system)?.primes.into_iter().map(Place::Finite));
    required.extend(x.points.keys().copied());
    let mut terms = Vec::new();
    for place in required {
        let term = match x.points.get(&place) {
            Some(pt) => {
                let e = evaluate_detailed(alpha, pt, place)?;
                SumTerm { place, invariant: e.invariant, source: TermSource::Listed { representation: e.representation } }
            }
            None => match unit_reason(alpha, place)? {
                Some(reason) => SumTerm { place, invariant: HalfInvariant::Zero, source: TermSource::UnitSymbolArgument { reason } },
                None => return Err(Error::UncoveredPlace(place)),
            },
        };
        terms.push(term);
    }
    Ok(AdelicSum { total: terms.iter().map(|t| t.invariant).sum(), terms })
}

/// A genuine local point at `place` whose invariant is `target`, if the
/// residue points modulo `p^depth` (or the real samples) contain one.
pub fn local_point_with_invariant(
    alpha: &SymbolClassOnVariety,
    place: Place,
    target: HalfInvariant,
    depth: u32,
) -> Result<Option<LocalPoint>> {
    match place {
        Place::Real => {
            for pt in real_samples(&alpha.system) {
                if evaluate_at_local_point(alpha, &pt, place).ok() == Some(target) {
                    return Ok(Some(pt));
                }
            }
            Ok(None)
        }
        Place::Finite(p) => {
            let engine = ResidueEngine::new(&alpha.system, p)?;
            for pt in engine.enumerate(depth)? {
                if engine.hensel_certificate(&pt)?.is_none() {
                    continue;
                }
                if let Some(pt) = make_determinable(&engine, alpha, pt)? {
                    let lp = LocalPoint::Residue { point: pt };
                    if evaluate_at_local_point(alpha, &lp, place)? == target {
                        return Ok(Some(lp));
                    }
                }
            }
            Ok(None)
        }
    }
}

/// Changes `x` at `v0` only, so that its invariant there becomes `target`.
/// `None` when no such local point turns up at this depth.
pub fn adjust_adelic_point(
    alpha: &SymbolClassOnVariety,
    x: &AdelicPoint,
    v0: Place,
    target: HalfInvariant,
    depth: u32,
) -> Result<Option<AdelicPoint>> {
    if let Some(pt) = x.points.get(&v0) {
        if evaluate_at_local_point(alpha, pt, v0)? == target {
            return Ok(Some(x.clone()));
        }
    }
    Ok(local_point_with_invariant(alpha, v0, target, depth)?.map(|pt| x.with_point(v0, pt)))
}
