//! Rational points of bounded height.
//!
//! The box `max |x_i| <= B` is searched through a solve plan: some
//! coordinates are enumerated and the rest are read off as exact integer
//! roots of univariate polynomials, so a conic costs `B^2` rather than
//! `B^3`. Only free tuples whose first nonzero entry is positive are
//! visited, since a projective point and its negative coincide.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{exact_root, exact_sqrt};
use crate::error::{Error, Result};
use crate::padic::work_budget;
use crate::plan::{make_plan, Chaining, SolvePlan};
use crate::poly::{canonical_projective, CompiledInt, PolynomialSystem};

/// A primitive integer point with its first nonzero coordinate positive.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProjectiveRationalPoint {
    #[serde(with = "crate::text::vec")]
    pub coords: Vec<BigInt>,
}

impl ProjectiveRationalPoint {
    /// Canonical representative of the line through `coords`, or `None`
    /// for the zero vector.
    pub fn new(coords: &[BigInt]) -> Option<ProjectiveRationalPoint> {
        canonical_projective(coords).map(|coords| ProjectiveRationalPoint { coords })
    }

    pub fn from_i64(coords: &[i64]) -> Option<ProjectiveRationalPoint> {
        let big: Vec<BigInt> = coords.iter().map(|x| BigInt::from(*x)).collect();
        ProjectiveRationalPoint::new(&big)
    }

    pub fn height(&self) -> BigInt {
        self.coords.iter().map(|x| x.abs()).max().unwrap_or_default()
    }

    /// Height, then coordinates compared by absolute value with the
    /// positive sign first.
    fn key(&self) -> (BigInt, Vec<(BigInt, bool)>) {
        (self.height(), self.coords.iter().map(|x| (x.abs(), x.is_negative())).collect())
    }
}

impl PartialOrd for ProjectiveRationalPoint {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Height first, then lexicographic on `(|x_i|, x_i < 0)`.
impl Ord for ProjectiveRationalPoint {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.key().cmp(&other.key())
    }
}

impl std::fmt::Display for ProjectiveRationalPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(|x| x.to_string()).collect();
        write!(f, "({})", parts.join(" : "))
    }
}

/// Estimated number of inner iterations for a search to height `bound`.
pub fn search_work(system: &PolynomialSystem, bound: u64) -> f64 {
    let plan = search_plan(system);
    let side = 2.0 * bound as f64 + 1.0;
    side.powi(plan.free.len() as i32) / 2.0 * (1 + plan.steps.len()) as f64
}

fn search_plan(system: &PolynomialSystem) -> SolvePlan {
    let all: Vec<usize> = (0..system.num_vars()).collect();
    make_plan(system, &all, Chaining::Allowed)
}

/// All canonical points of height at most `bound`, in (height, lex) order,
/// truncated to the first `limit`.
pub fn search_rational_points(
    system: &PolynomialSystem,
    bound: u64,
    limit: usize,
) -> Result<Vec<ProjectiveRationalPoint>> {
    if bound == 0 {
        return Err(Error::InvalidArgument("height bound must be at least 1".into()));
    }
    if bound > i64::MAX as u64 / 4 {
        return Err(Error::InvalidArgument("height bound too large".into()));
    }
    let work = search_work(system, bound);
    let budget = work_budget();
    if work > budget {
        return Err(Error::BudgetExceeded { estimated: work, budget });
    }
    let searcher = Searcher::new(system, bound as i64);
    let b = bound as i64;
    if searcher.plan.free.is_empty() {
        let mut found = Found::new(limit);
        searcher.solve(&mut vec![0; system.num_vars()], &mut found);
        return Ok(found.into_sorted());
    }
    // The first free coordinate is split across workers; it ranges over
    // 0..=B because of the sign normalization.
    let chunks: Vec<Found> = (0..=b)
        .into_par_iter()
        .map(|lead| {
            let mut found = Found::new(limit);
            searcher.sweep(lead, &mut found);
            found
        })
        .collect();
    let mut merged = Found::new(limit);
    for chunk in chunks {
        for p in chunk.points {
            merged.insert(p);
        }
    }
    Ok(merged.into_sorted())
}

/// Keeps the `limit` least points seen.
struct Found {
    limit: usize,
    points: BTreeSet<ProjectiveRationalPoint>,
}

impl Found {
    fn new(limit: usize) -> Found {
        Found { limit, points: BTreeSet::new() }
    }

    fn insert(&mut self, p: ProjectiveRationalPoint) {
        if self.limit == 0 {
            return;
        }
        if self.points.len() == self.limit {
            if let Some(last) = self.points.last() {
                if p >= *last {
                    return;
                }
            }
        }
        self.points.insert(p);
        if self.points.len() > self.limit {
            self.points.pop_last();
        }
    }

    fn into_sorted(self) -> Vec<ProjectiveRationalPoint> {
        self.points.into_iter().collect()
    }
}

struct Searcher<'a> {
    system: &'a PolynomialSystem,
    plan: SolvePlan,
    bound: i64,
    /// Machine-size evaluators for each step's coefficients, when they fit.
    step_coeffs: Vec<Option<Vec<CompiledInt>>>,
    checks: Vec<Option<CompiledInt>>,
}

impl<'a> Searcher<'a> {
    fn new(system: &'a PolynomialSystem, bound: i64) -> Searcher<'a> {
        let plan = search_plan(system);
        let step_coeffs = plan
            .steps
            .iter()
            .map(|s| s.coeffs.iter().map(CompiledInt::new).collect::<Option<Vec<_>>>())
            .collect();
        let checks = plan.checks.iter().map(|i| CompiledInt::new(&system.polys()[*i])).collect();
        Searcher { system, plan, bound, step_coeffs, checks }
    }

    /// All free tuples whose first coordinate is `lead`, restricted to the
    /// canonical sign.
    fn sweep(&self, lead: i64, found: &mut Found) {
        let b = self.bound;
        let free = &self.plan.free;
        let mut point = vec![0i128; self.system.num_vars()];
        point[free[0]] = lead as i128;
        let rest = &free[1..];
        if lead == 0 {
            // The all-zero free tuple, then tuples whose first nonzero entry
            // is positive.
            self.solve(&mut point.clone(), found);
            for pivot in 0..rest.len() {
                // rest[..pivot] = 0, rest[pivot] in 1..=b, rest[pivot+1..] free.
                let tail = &rest[pivot + 1..];
                for v in 1..=b {
                    let mut pt = point.clone();
                    pt[rest[pivot]] = v as i128;
                    self.sweep_tail(&mut pt, tail, found);
                }
            }
            return;
        }
        self.sweep_tail(&mut point, rest, found);
    }

    fn sweep_tail(&self, point: &mut Vec<i128>, tail: &[usize], found: &mut Found) {
        let b = self.bound as i128;
        if tail.is_empty() {
            self.solve(point, found);
            return;
        }
        let mut counters = vec![-b; tail.len()];
        loop {
            for (slot, v) in tail.iter().zip(&counters) {
                point[*slot] = *v;
            }
            self.solve(point, found);
            let mut k = 0;
            while k < counters.len() {
                counters[k] += 1;
                if counters[k] <= b {
                    break;
                }
                counters[k] = -b;
                k += 1;
            }
            if k == counters.len() {
                break;
            }
        }
    }

    fn solve(&self, point: &mut Vec<i128>, found: &mut Found) {
        self.solve_step(0, point, found);
    }

    fn solve_step(&self, index: usize, point: &mut Vec<i128>, found: &mut Found) {
        if index == self.plan.steps.len() {
            self.finish(point, found);
            return;
        }
        let var = self.plan.steps[index].var;
        let roots = match &self.step_coeffs[index] {
            Some(compiled) => {
                let coeffs: Option<Vec<i128>> = compiled.iter().map(|c| c.eval(point)).collect();
                match coeffs {
                    Some(c) => small_roots(&c, self.bound as i128),
                    None => self.big_roots(index, point),
                }
            }
            None => self.big_roots(index, point),
        };
        for r in roots {
            point[var] = r;
            self.solve_step(index + 1, point, found);
        }
        point[var] = 0;
    }

    fn big_roots(&self, index: usize, point: &[i128]) -> Vec<i128> {
        let big: Vec<BigInt> = point.iter().map(|x| BigInt::from(*x)).collect();
        let coeffs: Vec<BigInt> = self.plan.steps[index].coeffs.iter().map(|c| c.eval(&big)).collect();
        big_integer_roots(&coeffs, self.bound)
            .into_iter()
            .map(|r| r.to_i128().expect("root within bound"))
            .collect()
    }

    fn finish(&self, point: &[i128], found: &mut Found) {
        for (k, check) in self.checks.iter().enumerate() {
            let zero = match check.as_ref().and_then(|c| c.eval(point)) {
                Some(v) => v == 0,
                None => {
                    let big: Vec<BigInt> = point.iter().map(|x| BigInt::from(*x)).collect();
                    self.system.polys()[self.plan.checks[k]].eval(&big).is_zero()
                }
            };
            if !zero {
                return;
            }
        }
        let big: Vec<BigInt> = point.iter().map(|x| BigInt::from(*x)).collect();
        if let Some(p) = ProjectiveRationalPoint::new(&big) {
            found.insert(p);
        }
    }
}

fn is_square_candidate(n: i128) -> bool {
    // Quadratic residues mod 64, 63 and 65 reject most non-squares cheaply.
    const Q64: u128 = squares_mod(64);
    const Q63: u128 = squares_mod(63);
    const Q65: u128 = squares_mod(65);
    n >= 0 && Q64 >> (n % 64) & 1 == 1 && Q63 >> (n % 63) & 1 == 1 && Q65 >> (n % 65) & 1 == 1
}

const fn squares_mod(m: u64) -> u128 {
    let mut mask = 0u128;
    let mut x = 0;
    while x < m {
        mask |= 1 << (x * x % m);
        x += 1;
    }
    mask
}

fn isqrt_exact(n: i128) -> Option<i128> {
    if !is_square_candidate(n) {
        return None;
    }
    let mut r = (n as f64).sqrt() as i128;
    while r > 0 && r.checked_mul(r).map_or(true, |s| s > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|s| s <= n) {
        r += 1;
    }
    (r * r == n).then_some(r)
}

fn iroot_exact(n: i128, k: u32) -> Option<i128> {
    if k == 1 {
        return Some(n);
    }
    if k == 2 {
        return isqrt_exact(n);
    }
    if n < 0 {
        return if k % 2 == 1 { iroot_exact(-n, k).map(|r| -r) } else { None };
    }
    let guess = (n as f64).powf(1.0 / k as f64).round() as i128;
    [guess - 1, guess, guess + 1].into_iter().find(|&r| r >= 0 && r.checked_pow(k) == Some(n))
}

/// Integer roots in `[-bound, bound]` of `sum c[k] t^k`.
fn small_roots(c: &[i128], bound: i128) -> Vec<i128> {
    let nz: Vec<usize> = (0..c.len()).filter(|k| c[*k] != 0).collect();
    let in_box = |t: &i128| t.abs() <= bound;
    match nz.len() {
        0 => (-bound..=bound).collect(),
        1 => {
            if nz[0] == 0 {
                vec![]
            } else {
                vec![0]
            }
        }
        2 => {
            let (j, k) = (nz[0], nz[1]);
            let mut out = if j > 0 { vec![0] } else { vec![] };
            // c_k t^(k-j) = -c_j
            let (num, den) = (-c[j], c[k]);
            if num % den == 0 {
                let q = num / den;
                let e = (k - j) as u32;
                if let Some(r) = iroot_exact(q, e) {
                    if r != 0 {
                        out.push(r);
                        if e % 2 == 0 {
                            out.push(-r);
                        }
                    }
                }
            }
            out.retain(in_box);
            out.sort_unstable();
            out.dedup();
            out
        }
        _ if c.len() == 3 => {
            let disc = c[1].checked_mul(c[1]).and_then(|b2| c[0].checked_mul(c[2]).and_then(|ac| ac.checked_mul(4)).and_then(|f| b2.checked_sub(f)));
            let Some(disc) = disc else {
                let big: Vec<BigInt> = c.iter().map(|x| BigInt::from(*x)).collect();
                return big_integer_roots(&big, bound as i64).into_iter().filter_map(|r| r.to_i128()).collect();
            };
            let Some(s) = isqrt_exact(disc) else { return vec![] };
            let mut out = Vec::new();
            for num in [-c[1] + s, -c[1] - s] {
                let den = 2 * c[2];
                if num % den == 0 {
                    out.push(num / den);
                }
            }
            out.retain(in_box);
            out.sort_unstable();
            out.dedup();
            out
        }
        _ => {
            let big: Vec<BigInt> = c.iter().map(|x| BigInt::from(*x)).collect();
            big_integer_roots(&big, bound as i64).into_iter().filter_map(|r| r.to_i128()).collect()
        }
    }
}

/// Integer roots in `[-bound, bound]`, exact big-integer arithmetic.
fn big_integer_roots(c: &[BigInt], bound: i64) -> Vec<BigInt> {
    let nz: Vec<usize> = (0..c.len()).filter(|k| !c[*k].is_zero()).collect();
    let bound_big = BigInt::from(bound);
    let mut out = match nz.len() {
        0 => (-bound..=bound).map(BigInt::from).collect(),
        1 => {
            if nz[0] == 0 {
                vec![]
            } else {
                vec![BigInt::zero()]
            }
        }
        2 => {
            let (j, k) = (nz[0], nz[1]);
            let mut out = if j > 0 { vec![BigInt::zero()] } else { vec![] };
            let (q, r) = (-&c[j]).div_rem(&c[k]);
            if r.is_zero() {
                let e = (k - j) as u32;
                let root = if e == 2 { exact_sqrt(&q) } else { exact_root(&q, e) };
                if let Some(root) = root.filter(|r| !r.is_zero()) {
                    if e % 2 == 0 {
                        out.push(-&root);
                    }
                    out.push(root);
                }
            }
            out
        }
        _ => {
            // Every nonzero integer root divides the lowest nonzero
            // coefficient; scanning the box is simpler and bounded.
            let mut out = Vec::new();
            if nz[0] > 0 {
                out.push(BigInt::zero());
            }
            for t in -bound..=bound {
                if t == 0 {
                    continue;
                }
                let t = BigInt::from(t);
                let v = c.iter().rev().fold(BigInt::zero(), |acc, k| acc * &t + k);
                if v.is_zero() {
                    out.push(t);
                }
            }
            out
        }
    };
    out.retain(|t| t.abs() <= bound_big);
    out.sort();
    out.dedup();
    out
}

/// How the bound grows between rounds of [`escalating_search`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Growth {
    Add(u64),
    Multiply(u64),
}

impl Growth {
    fn next(self, b: u64) -> u64 {
        match self {
            Growth::Add(k) => b.saturating_add(k.max(1)),
            Growth::Multiply(k) => b.saturating_mul(k.max(2)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum EscalationOutcome {
    Found { point: ProjectiveRationalPoint, bound: u64, rounds: u32 },
    /// Nothing up to `bound`. This says nothing about larger heights.
    Exhausted { bound: u64, rounds: u32, disclaimer: String },
}

pub const SEARCH_DISCLAIMER: &str = "no point found up to this height; a finite search cannot certify that there are no rational points";

impl EscalationOutcome {
    pub fn point(&self) -> Option<&ProjectiveRationalPoint> {
        match self {
            EscalationOutcome::Found { point, .. } => Some(point),
            EscalationOutcome::Exhausted { .. } => None,
        }
    }
}

/// Searches boxes of growing height and returns the least point of the
/// first box that has one.
pub fn escalating_search(
    system: &PolynomialSystem,
    start: u64,
    growth: Growth,
    max_rounds: u32,
) -> Result<EscalationOutcome> {
    let mut bound = start.max(1);
    let mut searched = 0;
    for round in 1..=max_rounds.max(1) {
        if let Some(point) = search_rational_points(system, bound, 1)?.into_iter().next() {
            return Ok(EscalationOutcome::Found { point, bound, rounds: round });
        }
        searched = bound;
        if round < max_rounds {
            bound = growth.next(bound);
        }
    }
    Ok(EscalationOutcome::Exhausted { bound: searched, rounds: max_rounds.max(1), disclaimer: SEARCH_DISCLAIMER.into() })
}

/// Whether `point` is a projective point of `system`.
pub fn is_point_on(system: &PolynomialSystem, point: &ProjectiveRationalPoint) -> bool {
    point.coords.len() == system.num_vars()
        && point.coords.iter().any(|x| !x.is_zero())
        && system.contains_point(&point.coords)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry;
    use num_traits::One;

    fn pt(c: &[i64]) -> ProjectiveRationalPoint {
        ProjectiveRationalPoint::from_i64(c).unwrap()
    }

    /// Exhaustive box enumeration without plans.
    fn brute(system: &PolynomialSystem, b: i64) -> Vec<ProjectiveRationalPoint> {
        let n = system.num_vars();
        let side = (2 * b + 1) as usize;
        let mut out = BTreeSet::new();
        for code in 0..side.pow(n as u32) {
            let coords: Vec<BigInt> =
                (0..n).map(|i| BigInt::from((code / side.pow(i as u32) % side) as i64 - b)).collect();
            if system.contains_point(&coords) {
                if let Some(p) = ProjectiveRationalPoint::new(&coords) {
                    out.insert(p);
                }
            }
        }
        out.into_iter().collect()
    }

    #[test]
    fn prologue_cubic_contains_known_point() {
        let found = search_rational_points(&registry::prologue_cubic(), 10, usize::MAX).unwrap();
        assert!(found.contains(&pt(&[2, 1, -1])));
        for p in &found {
            assert!(is_point_on(&registry::prologue_cubic(), p));
        }
    }

    #[test]
    fn line_in_p1() {
        let sys = PolynomialSystem::parse("vars: x y\n1 x\n").unwrap();
        assert_eq!(search_rational_points(&sys, 1, 10).unwrap(), vec![pt(&[0, 1])]);
    }

    #[test]
    fn matches_brute_force_on_small_boxes() {
        let systems = [
            registry::diagonal_conic(5, 7, -3),
            registry::diagonal_conic(1, -1, 1),
            registry::diagonal_conic(1, 1, -2),
            registry::prologue_cubic(),
            PolynomialSystem::parse("vars: x y z\n1 x y | -1 z^2\n").unwrap(),
            PolynomialSystem::parse("vars: x y z\n1 x^2 y | 1 y^3 | -2 z^3\n").unwrap(),
            PolynomialSystem::parse("vars: w x y z\n1 w z | -1 x^2\n1 x z | -1 y^2\n").unwrap(),
        ];
        for sys in &systems {
            let b = if sys.num_vars() == 4 { 4 } else { 7 };
            assert_eq!(search_rational_points(sys, b as u64, usize::MAX).unwrap(), brute(sys, b), "{sys}");
        }
    }

    #[test]
    fn ordering_and_limit() {
        let sys = registry::diagonal_conic(1, 1, -2);
        let all = search_rational_points(&sys, 20, usize::MAX).unwrap();
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        let first3 = search_rational_points(&sys, 20, 3).unwrap();
        assert_eq!(first3, all[..3].to_vec());
        assert_eq!(all[0], pt(&[1, 1, 1]));
    }

    #[test]
    fn larger_bound_gives_superset() {
        let sys = registry::diagonal_conic(5, 7, -3);
        let small = search_rational_points(&sys, 10, usize::MAX).unwrap();
        let big = search_rational_points(&sys, 25, usize::MAX).unwrap();
        assert!(small.iter().all(|p| big.contains(p)));
        assert!(small.contains(&pt(&[2, 1, 3])));
    }

    #[test]
    fn escalation() {
        match escalating_search(&registry::diagonal_conic(5, 7, -3), 1, Growth::Add(1), 10).unwrap() {
            EscalationOutcome::Found { point, bound, .. } => {
                assert_eq!(point, pt(&[1, 1, 2]));
                assert_eq!(bound, 2);
            }
            other => panic!("{other:?}"),
        }
        let out = escalating_search(&registry::diagonal_conic(1, 1, 7), 1, Growth::Multiply(2), 6).unwrap();
        match out {
            EscalationOutcome::Exhausted { bound, disclaimer, .. } => {
                assert_eq!(bound, 32);
                assert!(disclaimer.contains("cannot certify"));
            }
            other => panic!("{other:?}"),
        }
        let zero = PolynomialSystem::parse("vars: x y z\n0\n").unwrap();
        let hit = escalating_search(&zero, 1, Growth::Add(1), 3).unwrap();
        assert_eq!(hit.point().unwrap().height(), BigInt::one());
    }

    #[test]
    fn budget_refusal() {
        let sys = PolynomialSystem::parse("vars: a b c d e f\n1 a^2 | -1 b^2\n").unwrap();
        assert!(matches!(search_rational_points(&sys, 1_000_000, 1), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn square_filter() {
        for n in 0..5000i128 {
            let r = (n as f64).sqrt() as i128;
            let is_sq = r * r == n || (r + 1) * (r + 1) == n;
            assert_eq!(isqrt_exact(n).is_some(), is_sq, "{n}");
        }
        assert_eq!(iroot_exact(-27, 3), Some(-3));
        assert_eq!(iroot_exact(1 << 60, 3), Some(1 << 20));
        assert_eq!(iroot_exact(17, 3), None);
    }
}
