//! Brauer-Manin obstruction certificates.
//!
//! A certificate proves that every adelic point of a registered example
//! has the same nonzero invariant sum for its class, so no adelic point is
//! orthogonal to it and the variety has no rational point. It records
//! local solubility everywhere, the invariant at every place together with
//! the reason it is constant, and what covers the places past the
//! small-prime bound. [`ObstructionCertificate::recheck`] recomputes every
//! entry from the stored data.

use std::collections::BTreeSet;
use std::ops::ControlFlow;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::arith::{is_prime_u64, SquareClass};
use crate::bm::{evaluate_representation, local_image, SymbolClassOnVariety, UnitReason, MAX_EVALUATION_DEPTH};
use crate::error::{Error, Result};
use crate::padic::{
    bad_prime_superset_with_bound, locally_soluble, real_points_nonempty, BadPrimeMethod, ResidueEngine, TriState,
    Witness,
};
use crate::poly::PolynomialSystem;
use crate::registry::{self, Example};
use crate::symbols::{HalfInvariant, Place};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
/// Seed for the sampled representation check. Fixed so that certificates
/// are reproducible byte for byte.
pub const DEFAULT_SEED: u64 = 0x5EED_B5D4;

/// Knobs for [`certify_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CertifyOptions {
    pub small_prime_bound: u64,
    /// Depth of the exhaustive cover at exceptional odd primes (at 2 the
    /// cover starts at depth 3, the least at which units mod 8 show).
    pub cover_depth: u32,
    pub seed: u64,
    /// Residue points sampled per prime for the representation check.
    pub samples_per_prime: usize,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions { small_prime_bound: 100, cover_depth: 3, seed: DEFAULT_SEED, samples_per_prime: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassRecord {
    pub name: String,
    pub constant: SquareClass,
    pub representations: Vec<String>,
    pub exceptional_places: BTreeSet<Place>,
    pub unit_argument: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolubilityEntry {
    pub place: Place,
    pub verdict: TriState,
}

/// Why local points exist past the small-prime bound.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BeyondArgument {
    /// Degrees sum to less than the number of variables, so there is a
    /// nontrivial zero mod `p`; smooth reduction lets Hensel lift it.
    ChevalleyWarning { degree_sum: u32, variables: usize },
    /// A smooth genus one curve over `F_p` has at least
    /// `p + 1 - 2 sqrt(p) > 0` points, all smooth, all lifting.
    HasseWeilGenusOne,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolubilityBeyond {
    /// Applies to every prime above this bound that is not listed.
    pub beyond: u64,
    pub method: BadPrimeMethod,
    pub discriminant_primes: BTreeSet<u64>,
    pub argument: BeyondArgument,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Justification {
    /// Every residue point modulo `p^depth` was evaluated; the invariant is
    /// nonzero.
    ExhaustiveResidueCover { depth: u32, deepest: u32, determinations: usize },
    UnitSymbolArgument { argument: UnitReason },
    /// The constant slot is positive, so every real symbol is trivial.
    RealSignArgument { constant_positive: bool },
    /// Every residue point modulo `p^depth` was evaluated; the invariant
    /// is zero.
    DirectEvaluation { depth: u32, deepest: u32, determinations: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantEntry {
    pub place: Place,
    /// The value taken at every local point.
    pub invariant: HalfInvariant,
    pub justification: Justification,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantBeyond {
    pub beyond: u64,
    pub invariant: HalfInvariant,
    pub justification: Justification,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepresentationCheck {
    pub seed: u64,
    pub primes: Vec<u64>,
    pub depth: u32,
    pub sampled: usize,
    /// Points where at least two representations were determinable.
    pub compared: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict")]
pub enum Conclusion {
    /// Every adelic sum equals `sum`, which is nonzero.
    #[serde(rename = "EMPTY_BRAUER_SET")]
    EmptyBrauerSet { sum: HalfInvariant, obstructing_places: BTreeSet<Place> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObstructionCertificate {
    pub schema_version: u32,
    pub tool_version: String,
    pub example: String,
    pub input_hash: String,
    pub seed: u64,
    pub system: String,
    pub class: ClassRecord,
    pub small_prime_bound: u64,
    pub solubility: Vec<SolubilityEntry>,
    pub solubility_beyond: SolubilityBeyond,
    pub invariants: Vec<InvariantEntry>,
    pub invariants_beyond: InvariantBeyond,
    pub representation_check: RepresentationCheck,
    pub conclusion: Conclusion,
}

fn refuse(leg: impl Into<String>, reason: impl Into<String>) -> Error {
    Error::CertificateRefused { leg: leg.into(), reason: reason.into() }
}

/// SHA-256 of arbitrary input text, hex encoded.
pub fn hash_text(text: &str) -> String {
    format!("{:x}", Sha256::digest(text.as_bytes()))
}

/// SHA-256 of the system text and the class description.
pub fn input_hash(system: &PolynomialSystem, class: Option<&SymbolClassOnVariety>) -> String {
    let mut h = Sha256::new();
    h.update(system.to_text().as_bytes());
    if let Some(c) = class {
        h.update(c.describe().as_bytes());
    }
    format!("{:x}", h.finalize())
}

pub fn certify_empty_brauer_set(example_id: &str) -> Result<ObstructionCertificate> {
    certify_with(&registry::lookup(example_id)?, CertifyOptions::default())
}

fn primes_up_to(bound: u64) -> Vec<u64> {
    (2..=bound).filter(|p| is_prime_u64(*p)).collect()
}

fn solubility_leg(system: &PolynomialSystem, place: Place) -> Result<SolubilityEntry> {
    let verdict = match place {
        Place::Real => real_points_nonempty(system),
        Place::Finite(p) => locally_soluble(system, p, MAX_EVALUATION_DEPTH)?,
    };
    if !verdict.is_yes() {
        return Err(refuse(format!("solubility at {place}"), format!("no local point certified: {verdict:?}")));
    }
    Ok(SolubilityEntry { place, verdict })
}

fn beyond_argument(system: &PolynomialSystem) -> Option<BeyondArgument> {
    let polys = system.nonzero_polys();
    let degree_sum: u32 = polys.iter().filter_map(|f| f.degree()).sum();
    if (degree_sum as usize) < system.num_vars() {
        return Some(BeyondArgument::ChevalleyWarning { degree_sum, variables: system.num_vars() });
    }
    let quadrics = polys.iter().all(|f| f.degree() == Some(2));
    if quadrics && polys.len() == 2 && system.num_vars() == 4 {
        return Some(BeyondArgument::HasseWeilGenusOne);
    }
    None
}

/// Every point mod `p` has a representation with unit value.
fn unit_cover(alpha: &SymbolClassOnVariety, p: u64) -> Result<Option<usize>> {
    let engine = ResidueEngine::new(&alpha.system, p)?;
    let mut points = 0;
    let mut ok = true;
    engine.for_each_point_mod_p(|pt| {
        points += 1;
        let unit = alpha.representations.iter().any(|f| {
            f.num.eval_mod(&pt.coords, p) != 0 && f.den.eval_mod(&pt.coords, p) != 0
        });
        if unit {
            ControlFlow::Continue(())
        } else {
            ok = false;
            ControlFlow::Break(())
        }
    })?;
    Ok(ok.then_some(points))
}

fn image_depth(place: Place, cover_depth: u32) -> u32 {
    if place == Place::Finite(2) {
        cover_depth.max(3)
    } else {
        cover_depth
    }
}

fn invariant_leg(
    alpha: &SymbolClassOnVariety,
    place: Place,
    exceptional: bool,
    options: &CertifyOptions,
) -> Result<InvariantEntry> {
    let leg = || format!("invariant at {place}");
    if alpha.constant_is_local_square(place) {
        let justification = match place {
            Place::Real => Justification::RealSignArgument { constant_positive: true },
            Place::Finite(_) => Justification::UnitSymbolArgument { argument: UnitReason::ConstantIsLocalSquare },
        };
        return Ok(InvariantEntry { place, invariant: HalfInvariant::Zero, justification });
    }
    if let (false, Place::Finite(p)) = (exceptional, place) {
        if let Some(points) = unit_cover(alpha, p)? {
            let argument = UnitReason::UnitRepresentationCover { points };
            return Ok(InvariantEntry {
                place,
                invariant: HalfInvariant::Zero,
                justification: Justification::UnitSymbolArgument { argument },
            });
        }
    }
    if place == Place::Real {
        return Err(refuse(leg(), "the constant slot is negative and real points cannot be covered exhaustively"));
    }
    let depth = image_depth(place, options.cover_depth);
    let img = local_image(alpha, place, depth)?;
    if img.partial {
        return Err(refuse(
            leg(),
            format!("{} residue points stayed undeterminable at depth {}", img.indeterminate, MAX_EVALUATION_DEPTH),
        ));
    }
    let value = match img.constant_value() {
        Some(v) => v,
        None if img.values.is_empty() => return Err(refuse(leg(), "no local points at this depth")),
        None => {
            return Err(refuse(
                leg(),
                "the local image is {0, 1/2}: adelic sums take both values, so the set is not empty",
            ))
        }
    };
    let (deepest, determinations) = (img.deepest, img.determinations);
    let justification = if value.is_zero() {
        Justification::DirectEvaluation { depth, deepest, determinations }
    } else {
        Justification::ExhaustiveResidueCover { depth, deepest, determinations }
    };
    Ok(InvariantEntry { place, invariant: value, justification })
}

fn representation_check(alpha: &SymbolClassOnVariety, primes: &[u64], options: &CertifyOptions) -> Result<RepresentationCheck> {
    let depth = 2;
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let (mut sampled, mut compared) = (0, 0);
    for p in primes {
        let engine = ResidueEngine::new(&alpha.system, *p)?;
        let points = engine.enumerate(depth)?;
        for pt in points.choose_multiple(&mut rng, options.samples_per_prime) {
            sampled += 1;
            let values: Vec<HalfInvariant> =
                (0..alpha.representations.len()).filter_map(|i| evaluate_representation(alpha, i, pt)).collect();
            if values.len() >= 2 {
                compared += 1;
                if values.iter().any(|v| *v != values[0]) {
                    return Err(refuse("representations", format!("representations disagree at {pt:?}")));
                }
            }
        }
    }
    Ok(RepresentationCheck { seed: options.seed, primes: primes.to_vec(), depth, sampled, compared })
}

/// Builds the certificate or names the first leg that fails.
pub fn certify_with(example: &Example, options: CertifyOptions) -> Result<ObstructionCertificate> {
    let system = &example.system;
    let bound = options.small_prime_bound;
    let bad = bad_prime_superset_with_bound(system, bound)?;

    // Local solubility: the real place, every small prime, every
    // discriminant prime; smooth reduction covers the rest.
    let argument = match (bad.is_complete(), beyond_argument(system)) {
        (true, Some(a)) => a,
        _ => return Err(refuse(format!("solubility beyond {bound}"), "no good-reduction argument for this shape")),
    };
    let mut sol_places: Vec<Place> = vec![Place::Real];
    sol_places.extend(bad.primes.iter().copied().map(Place::Finite));
    let mut solubility = sol_places
        .par_iter()
        .map(|v| solubility_leg(system, *v))
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    solubility.sort_by_key(|e| e.place);

    let alpha = match &example.class {
        Some(c) => c,
        None => return Err(refuse("class", format!("no obstruction class is registered for `{}`", example.id))),
    };
    if alpha.is_constant() {
        return Err(refuse(
            "class",
            "the class is constant: every adelic sum is 0 by the product formula, so the Brauer-Manin set is not empty",
        ));
    }

    let exceptional = alpha.exceptional_places()?;
    let mut places: BTreeSet<Place> = exceptional.clone();
    places.extend(primes_up_to(bound).into_iter().map(Place::Finite));
    places.extend(bad.primes.iter().copied().map(Place::Finite));
    let places: Vec<Place> = places.into_iter().collect();
    let mut invariants = places
        .par_iter()
        .map(|v| invariant_leg(alpha, *v, exceptional.contains(v), &options))
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    invariants.sort_by_key(|e| e.place);

    let check_primes: Vec<u64> = exceptional
        .iter()
        .filter_map(|v| v.prime())
        .filter(|p| *p > 2)
        .chain([3, 7, 11, 13])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let representation_check = representation_check(alpha, &check_primes, &options)?;

    let sum: HalfInvariant = invariants.iter().map(|e| e.invariant).sum();
    if sum.is_zero() {
        return Err(refuse("conclusion", "every adelic sum is 0; this class does not obstruct"));
    }
    let obstructing_places = invariants.iter().filter(|e| !e.invariant.is_zero()).map(|e| e.place).collect();

    Ok(ObstructionCertificate {
        schema_version: SCHEMA_VERSION,
        tool_version: TOOL_VERSION.to_string(),
        example: example.id.clone(),
        input_hash: input_hash(system, Some(alpha)),
        seed: options.seed,
        system: system.to_text(),
        class: ClassRecord {
            name: alpha.name.clone(),
            constant: alpha.constant.clone(),
            representations: alpha.representations.iter().map(|r| r.render(system.vars())).collect(),
            exceptional_places: exceptional,
            unit_argument: alpha.unit_argument.statement.clone(),
        },
        small_prime_bound: bound,
        solubility,
        solubility_beyond: SolubilityBeyond {
            beyond: bound,
            method: bad.method,
            discriminant_primes: bad.discriminant_primes.clone(),
            argument,
        },
        invariants,
        invariants_beyond: InvariantBeyond {
            beyond: bound,
            invariant: HalfInvariant::Zero,
            justification: Justification::UnitSymbolArgument {
                argument: UnitReason::UnitRepresentationArgument { statement: alpha.unit_argument.statement.clone() },
            },
        },
        representation_check,
        conclusion: Conclusion::EmptyBrauerSet { sum, obstructing_places },
    })
}

impl ObstructionCertificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificates serialize")
    }

    pub fn from_json(text: &str) -> Result<ObstructionCertificate> {
        serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("bad certificate: {e}")))
    }

    /// Recomputes every entry. Witnesses are checked directly; covers and
    /// unit arguments are redone from scratch.
    pub fn recheck(&self) -> Result<()> {
        let example = registry::lookup(&self.example)?;
        let alpha = example.class.as_ref().ok_or_else(|| refuse("class", "example has no class"))?;
        let system = &example.system;
        if input_hash(system, Some(alpha)) != self.input_hash || system.to_text() != self.system {
            return Err(refuse("input", "the registered example no longer matches the certificate"));
        }
        let bound = self.small_prime_bound;
        let bad = bad_prime_superset_with_bound(system, bound)?;
        if bad.discriminant_primes != self.solubility_beyond.discriminant_primes
            || beyond_argument(system).as_ref() != Some(&self.solubility_beyond.argument)
        {
            return Err(refuse("solubility beyond", "bad primes or argument differ"));
        }
        let listed: BTreeSet<Place> = self.solubility.iter().map(|e| e.place).collect();
        let mut needed = BTreeSet::from([Place::Real]);
        needed.extend(bad.primes.iter().copied().map(Place::Finite));
        if !needed.is_subset(&listed) {
            return Err(refuse("solubility", "a required place is missing"));
        }
        self.solubility.par_iter().try_for_each(|e| recheck_solubility(system, e))?;

        let exceptional = alpha.exceptional_places()?;
        let covered: BTreeSet<Place> = self.invariants.iter().map(|e| e.place).collect();
        let mut needed = exceptional.clone();
        needed.extend(primes_up_to(bound).into_iter().map(Place::Finite));
        if !needed.is_subset(&covered) || exceptional.iter().any(|v| v.prime().is_some_and(|p| p > bound) && !covered.contains(v)) {
            return Err(refuse("invariants", "a required place is missing"));
        }
        self.invariants.par_iter().try_for_each(|e| recheck_invariant(alpha, e))?;

        let sum: HalfInvariant = self.invariants.iter().map(|e| e.invariant).sum();
        let Conclusion::EmptyBrauerSet { sum: claimed, .. } = &self.conclusion;
        if sum != *claimed || sum.is_zero() {
            return Err(refuse("conclusion", "the invariants do not sum to the claimed nonzero value"));
        }
        Ok(())
    }
}

fn recheck_solubility(system: &PolynomialSystem, e: &SolubilityEntry) -> Result<()> {
    let leg = || format!("solubility at {}", e.place);
    let ok = match (&e.verdict, e.place) {
        (TriState::ProvedYes { witness: Witness::Real(w) }, Place::Real) => w.verify(system),
        (TriState::ProvedYes { witness: Witness::Hensel(h) }, Place::Finite(p)) => {
            let engine = ResidueEngine::new(system, p)?;
            h.point.prime == p && h.point.lies_on(system) && engine.hensel_certificate(&h.point)? == Some(h.minor_valuation)
        }
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(refuse(leg(), "witness does not check"))
    }
}

fn recheck_invariant(alpha: &SymbolClassOnVariety, e: &InvariantEntry) -> Result<()> {
    let leg = || format!("invariant at {}", e.place);
    let ok = match &e.justification {
        Justification::RealSignArgument { .. } | Justification::UnitSymbolArgument { argument: UnitReason::ConstantIsLocalSquare } => {
            alpha.constant_is_local_square(e.place) && e.invariant.is_zero()
        }
        Justification::UnitSymbolArgument { argument: UnitReason::UnitRepresentationCover { points } } => match e.place {
            Place::Finite(p) => {
                !alpha.exceptional_places()?.contains(&e.place)
                    && e.invariant.is_zero()
                    && unit_cover(alpha, p)? == Some(*points)
            }
            Place::Real => false,
        },
        Justification::UnitSymbolArgument { argument: UnitReason::UnitRepresentationArgument { .. } } => false,
        Justification::ExhaustiveResidueCover { depth, determinations, .. }
        | Justification::DirectEvaluation { depth, determinations, .. } => {
            let img = local_image(alpha, e.place, *depth)?;
            img.constant_value() == Some(e.invariant) && img.determinations == *determinations
        }
    };
    if ok {
        Ok(())
    } else {
        Err(refuse(leg(), "entry does not check"))
    }
}
