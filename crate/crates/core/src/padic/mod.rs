//! Points of projective schemes over the residue rings `Z/p^n`, Hensel
//! lifting, and local solubility decisions at finite and real places.
//!
//! Residue points are normalized representatives of primitive solutions up
//! to units: the first coordinate that is a unit mod `p` (the *chart*) is 1
//! and every earlier coordinate is divisible by `p`. Points mod `p` come
//! from a triangular solve plan per chart; deeper points come from lifting
//! whole fibers, which is exact because a solution mod `p^(j+1)` reduces to
//! one mod `p^j` and the lifting condition is linear mod `p`.

mod bad_primes;
mod linalg;
mod real;

use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::arith::{is_prime_u64, mul_mod, sqrt_mod_u64};
use crate::error::{Error, Result};
use crate::plan::{make_plan, Chaining, SolvePlan};
use crate::poly::{CompiledMod, Polynomial, PolynomialSystem};

pub use bad_primes::{
    bad_prime_superset, bad_prime_superset_with_bound, singular_reduction_primes, BadPrimeMethod, BadPrimes,
    DEFAULT_SMALL_PRIME_BOUND,
};
pub use real::{real_points_nonempty, RealCoord, RealWitness};

pub(crate) use linalg::{rank_mod_p, subsets};

/// Environment variable overriding the work budget (an estimate of
/// elementary evaluations).
pub const WORK_BUDGET_ENV: &str = "BRAUER_WORK_BUDGET";
pub const DEFAULT_WORK_BUDGET: f64 = 2e9;

pub fn work_budget() -> f64 {
    std::env::var(WORK_BUDGET_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<f64>().ok())
        .filter(|b| *b > 0.0)
        .unwrap_or(DEFAULT_WORK_BUDGET)
}

/// A normalized primitive solution modulo `p^precision`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ResiduePoint {
    pub prime: u64,
    pub precision: u32,
    pub coords: Vec<u64>,
    pub primitive: bool,
}

impl ResiduePoint {
    pub fn modulus(&self) -> u64 {
        self.prime.pow(self.precision)
    }

    /// Index of the first coordinate that is a unit.
    pub fn chart(&self) -> Option<usize> {
        self.coords.iter().position(|c| c % self.prime != 0)
    }

    /// The image modulo a lower power of `p`.
    pub fn reduce(&self, precision: u32) -> ResiduePoint {
        assert!(precision <= self.precision && precision >= 1);
        let m = self.prime.pow(precision);
        ResiduePoint {
            prime: self.prime,
            precision,
            coords: self.coords.iter().map(|c| c % m).collect(),
            primitive: self.primitive,
        }
    }

    /// Whether every polynomial vanishes modulo `p^precision`.
    pub fn lies_on(&self, system: &PolynomialSystem) -> bool {
        let m = self.modulus();
        system.polys().iter().all(|f| f.eval_mod(&self.coords, m) == 0)
    }
}

/// A residue point whose lift to a `Q_p`-point is guaranteed by Hensel's
/// lemma: some maximal minor of the Jacobian has valuation `e` and the
/// point is known modulo `p^n` with `n >= 2e + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HenselWitness {
    pub point: ResiduePoint,
    pub minor_valuation: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    Hensel(HenselWitness),
    Real(RealWitness),
}

/// An honest three-way answer to a local solubility question.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum TriState {
    ProvedYes { witness: Witness },
    /// No residue points at all modulo `p^depth` (depth 0 for the real place).
    ProvedNo { depth: u32 },
    UnknownAtDepth { depth: u32 },
}

impl TriState {
    pub fn is_yes(&self) -> bool {
        matches!(self, TriState::ProvedYes { .. })
    }

    pub fn is_no(&self) -> bool {
        matches!(self, TriState::ProvedNo { .. })
    }
}

/// Residue arithmetic for one system at one prime.
pub struct ResidueEngine<'a> {
    system: &'a PolynomialSystem,
    prime: u64,
    polys: Vec<&'a Polynomial>,
    jacobian: Vec<Vec<Polynomial>>,
    chart_plans: Vec<SolvePlan>,
    budget: f64,
}

impl<'a> ResidueEngine<'a> {
    pub fn new(system: &'a PolynomialSystem, prime: u64) -> Result<ResidueEngine<'a>> {
        if !is_prime_u64(prime) {
            return Err(Error::InvalidArgument(format!("{prime} is not prime")));
        }
        let n = system.num_vars();
        let polys = system.nonzero_polys();
        let jacobian = polys.iter().map(|f| (0..n).map(|v| f.derivative(v)).collect()).collect();
        let chart_plans = (0..n)
            .map(|chart| {
                let unknown: Vec<usize> = (chart + 1..n).collect();
                make_plan(system, &unknown, Chaining::Allowed)
            })
            .collect();
        Ok(ResidueEngine { system, prime, polys, jacobian, chart_plans, budget: work_budget() })
    }

    pub fn with_budget(mut self, budget: f64) -> ResidueEngine<'a> {
        self.budget = budget;
        self
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    fn check_budget(&self, estimated: f64) -> Result<()> {
        if estimated > self.budget {
            Err(Error::BudgetExceeded { estimated, budget: self.budget })
        } else {
            Ok(())
        }
    }

    fn check_modulus(&self, precision: u32) -> Result<u64> {
        let m = (self.prime as u128).checked_pow(precision).filter(|m| *m < 1u128 << 62);
        m.map(|m| m as u64).ok_or_else(|| Error::BudgetExceeded {
            estimated: (self.prime as f64).powi(precision as i32),
            budget: (1u64 << 62) as f64,
        })
    }

    /// Estimated work for enumerating all points modulo `p`.
    pub fn depth_one_work(&self) -> f64 {
        let p = self.prime as f64;
        self.chart_plans
            .iter()
            .map(|plan| {
                let steps: f64 = plan
                    .steps
                    .iter()
                    .map(|s| if s.coeffs.len() <= 3 { 2.0 } else { p })
                    .product();
                p.powi(plan.free.len() as i32) * steps.max(1.0)
            })
            .sum()
    }

    /// Visits every normalized point modulo `p`, in chart order.
    pub fn for_each_point_mod_p<F>(&self, mut visit: F) -> Result<()>
    where
        F: FnMut(ResiduePoint) -> ControlFlow<()>,
    {
        self.check_budget(self.depth_one_work())?;
        let p = self.prime;
        let n = self.system.num_vars();
        let checks: Vec<Vec<CompiledMod>> = self
            .chart_plans
            .iter()
            .map(|plan| plan.checks.iter().map(|i| CompiledMod::new(&self.system.polys()[*i], p)).collect())
            .collect();
        for (chart, plan) in self.chart_plans.iter().enumerate() {
            let steps: Vec<Vec<CompiledMod>> =
                plan.steps.iter().map(|s| s.coeffs.iter().map(|c| CompiledMod::new(c, p)).collect()).collect();
            let mut point = vec![0u64; n];
            point[chart] = 1;
            let free = &plan.free;
            let mut odometer = vec![0u64; free.len()];
            loop {
                for (slot, v) in free.iter().zip(&odometer) {
                    point[*slot] = *v;
                }
                let flow = solve_steps(plan, &steps, &checks[chart], 0, &mut point, p, &mut visit);
                if flow.is_break() {
                    return Ok(());
                }
                // Advance the odometer.
                let mut k = 0;
                loop {
                    if k == odometer.len() {
                        break;
                    }
                    odometer[k] += 1;
                    if odometer[k] < p {
                        break;
                    }
                    odometer[k] = 0;
                    k += 1;
                }
                if k == odometer.len() {
                    break;
                }
            }
        }
        Ok(())
    }

    /// All normalized points modulo `p`.
    pub fn points_mod_p(&self) -> Result<Vec<ResiduePoint>> {
        let mut out = Vec::new();
        self.for_each_point_mod_p(|pt| {
            out.push(pt);
            ControlFlow::Continue(())
        })?;
        out.sort();
        Ok(out)
    }

    fn jacobian_mod(&self, coords: &[u64], m: u64) -> Vec<Vec<u64>> {
        self.jacobian.iter().map(|row| row.iter().map(|d| d.eval_mod(coords, m)).collect()).collect()
    }

    /// Every point modulo `p^(j+1)` above `point` (known modulo `p^j`).
    pub fn lift_fiber(&self, point: &ResiduePoint) -> Result<Vec<ResiduePoint>> {
        let (base, kernel) = match self.lift_system(point)? {
            Some(x) => x,
            None => return Ok(Vec::new()),
        };
        self.check_budget((self.prime as f64).powi(kernel.len() as i32))?;
        let p = self.prime;
        let mut out = Vec::new();
        let mut combo = vec![0u64; kernel.len()];
        loop {
            let mut t = base.clone();
            for (coef, vec) in combo.iter().zip(&kernel) {
                for (ti, vi) in t.iter_mut().zip(vec) {
                    *ti = (*ti + mul_mod(*coef, *vi, p)) % p;
                }
            }
            out.push(self.apply_step(point, &t));
            let mut k = 0;
            while k < combo.len() {
                combo[k] += 1;
                if combo[k] < p {
                    break;
                }
                combo[k] = 0;
                k += 1;
            }
            if k == combo.len() {
                break;
            }
        }
        out.sort();
        Ok(out)
    }

    /// The linear lifting condition at `point`, solved over `F_p`: a
    /// particular correction and a kernel basis, indexed by non-chart
    /// coordinates.
    #[allow(clippy::type_complexity)]
    fn lift_system(&self, point: &ResiduePoint) -> Result<Option<(Vec<u64>, Vec<Vec<u64>>)>> {
        let p = self.prime;
        let chart = point.chart().ok_or_else(|| Error::InvalidArgument("point is not primitive".into()))?;
        let pj = self.check_modulus(point.precision)?;
        let m = self.check_modulus(point.precision + 1)?;
        let mut rhs = Vec::with_capacity(self.polys.len());
        for f in &self.polys {
            let v = f.eval_mod(&point.coords, m);
            if v % pj != 0 {
                return Err(Error::NotOnVariety(format!("{:?} mod {}", point.coords, pj)));
            }
            rhs.push((p - (v / pj) % p) % p);
        }
        let jac = self.jacobian_mod(&point.coords, p);
        let cols: Vec<usize> = (0..self.system.num_vars()).filter(|c| *c != chart).collect();
        let a: Vec<Vec<u64>> = jac.iter().map(|row| cols.iter().map(|c| row[*c]).collect()).collect();
        Ok(linalg::solve_mod_p(&a, &rhs, cols.len(), p))
    }

    fn apply_step(&self, point: &ResiduePoint, t: &[u64]) -> ResiduePoint {
        let chart = point.chart().expect("primitive");
        let pj = point.modulus();
        let mut coords = point.coords.clone();
        let mut k = 0;
        for (i, c) in coords.iter_mut().enumerate() {
            if i == chart {
                continue;
            }
            *c += pj * t[k];
            k += 1;
        }
        ResiduePoint { prime: self.prime, precision: point.precision + 1, coords, primitive: true }
    }

    /// Minimal valuation of a maximal minor of the Jacobian in the chart,
    /// capped at the known precision.
    pub fn minor_valuation(&self, point: &ResiduePoint) -> Result<Option<u32>> {
        let chart = point.chart().ok_or_else(|| Error::InvalidArgument("point is not primitive".into()))?;
        let m = self.check_modulus(point.precision)?;
        let rows = self.polys.len();
        let cols: Vec<usize> = (0..self.system.num_vars()).filter(|c| *c != chart).collect();
        if rows > cols.len() {
            return Ok(None);
        }
        let jac = self.jacobian_mod(&point.coords, m);
        let mut best: Option<u32> = None;
        for subset in subsets(cols.len(), rows) {
            let minor: Vec<Vec<u64>> =
                jac.iter().map(|row| subset.iter().map(|k| row[cols[*k]]).collect()).collect();
            let det = linalg::det_mod(&minor, m);
            let v = if det == 0 { point.precision } else { valuation_u64(det, self.prime) };
            best = Some(best.map_or(v, |b| b.min(v)));
            if v == 0 {
                break;
            }
        }
        Ok(best)
    }

    /// `Some(e)` when Hensel's lemma certifies a `Q_p`-point above `point`.
    pub fn hensel_certificate(&self, point: &ResiduePoint) -> Result<Option<u32>> {
        Ok(self.minor_valuation(point)?.filter(|e| point.precision >= 2 * e + 1))
    }

    /// Full-rank Jacobian modulo `p` at a point known modulo `p`.
    pub fn is_smooth_point(&self, point: &ResiduePoint) -> Result<bool> {
        if point.precision != 1 {
            return Err(Error::InvalidArgument("smoothness is decided at precision 1".into()));
        }
        let jac = self.jacobian_mod(&point.coords, self.prime);
        Ok(rank_mod_p(&jac, self.prime) == self.polys.len())
    }

    /// Newton iteration from a smooth point to `target` precision. The free
    /// part of each correction is zero, so the result is deterministic.
    pub fn hensel_lift(&self, point: &ResiduePoint, target: u32) -> Result<ResiduePoint> {
        if !self.is_smooth_point(&point.reduce(1))? {
            return Err(Error::InvalidArgument("Hensel lifting needs a smooth point".into()));
        }
        let mut current = point.clone();
        while current.precision < target {
            let (t, _) = self
                .lift_system(&current)?
                .ok_or_else(|| Error::NotOnVariety("lifting condition is inconsistent".into()))?;
            current = self.apply_step(&current, &t);
        }
        Ok(current)
    }

    /// Every normalized point modulo `p^depth`, sorted.
    pub fn enumerate(&self, depth: u32) -> Result<Vec<ResiduePoint>> {
        if depth == 0 {
            return Err(Error::InvalidArgument("depth must be at least 1".into()));
        }
        self.check_modulus(depth)?;
        let mut level = self.points_mod_p()?;
        let mut work = level.len() as f64;
        for _ in 1..depth {
            let mut next = Vec::new();
            for pt in &level {
                let children = self.lift_fiber(pt)?;
                work += children.len() as f64;
                self.check_budget(work)?;
                next.extend(children);
            }
            level = next;
        }
        level.sort();
        Ok(level)
    }

    /// Breadth-first search for a Hensel-certified point.
    pub fn locally_soluble(&self, max_depth: u32) -> Result<TriState> {
        let mut found = None;
        let mut level = Vec::new();
        let mut failure = None;
        self.for_each_point_mod_p(|pt| match self.hensel_certificate(&pt) {
            Ok(Some(e)) => {
                found = Some(HenselWitness { point: pt, minor_valuation: e });
                ControlFlow::Break(())
            }
            Ok(None) => {
                level.push(pt);
                ControlFlow::Continue(())
            }
            Err(err) => {
                failure = Some(err);
                ControlFlow::Break(())
            }
        })?;
        if let Some(err) = failure {
            return Err(err);
        }
        if let Some(w) = found {
            return Ok(TriState::ProvedYes { witness: Witness::Hensel(w) });
        }
        let mut depth = 1;
        let mut work = level.len() as f64;
        loop {
            if level.is_empty() {
                return Ok(TriState::ProvedNo { depth });
            }
            if depth >= max_depth {
                return Ok(TriState::UnknownAtDepth { depth });
            }
            let mut next = Vec::new();
            for pt in &level {
                for child in self.lift_fiber(pt)? {
                    if let Some(e) = self.hensel_certificate(&child)? {
                        let w = HenselWitness { point: child, minor_valuation: e };
                        return Ok(TriState::ProvedYes { witness: Witness::Hensel(w) });
                    }
                    next.push(child);
                }
                work += next.len() as f64;
                self.check_budget(work)?;
            }
            level = next;
            depth += 1;
        }
    }
}

fn valuation_u64(mut x: u64, p: u64) -> u32 {
    let mut v = 0;
    while x % p == 0 {
        x /= p;
        v += 1;
    }
    v
}

fn solve_steps<F>(
    plan: &SolvePlan,
    steps: &[Vec<CompiledMod>],
    checks: &[CompiledMod],
    index: usize,
    point: &mut Vec<u64>,
    p: u64,
    visit: &mut F,
) -> ControlFlow<()>
where
    F: FnMut(ResiduePoint) -> ControlFlow<()>,
{
    if index == steps.len() {
        if checks.iter().all(|c| c.eval(point) == 0) {
            return visit(ResiduePoint { prime: p, precision: 1, coords: point.clone(), primitive: true });
        }
        return ControlFlow::Continue(());
    }
    let coeffs: Vec<u64> = steps[index].iter().map(|c| c.eval(point)).collect();
    let var = plan.steps[index].var;
    for root in roots_mod_p(&coeffs, p) {
        point[var] = root;
        solve_steps(plan, steps, checks, index + 1, point, p, visit)?;
    }
    point[var] = 0;
    ControlFlow::Continue(())
}

/// All roots in `F_p` of `sum_k coeffs[k] t^k`, ascending. The zero
/// polynomial has every residue as a root.
pub(crate) fn roots_mod_p(coeffs: &[u64], p: u64) -> Vec<u64> {
    let mut c: Vec<u64> = coeffs.iter().map(|x| x % p).collect();
    while c.last() == Some(&0) {
        c.pop();
    }
    match c.len() {
        0 => (0..p).collect(),
        1 => Vec::new(),
        2 => {
            let inv = crate::arith::pow_mod(c[1], p - 2, p);
            vec![mul_mod(p - c[0], inv, p) % p]
        }
        3 if p != 2 => {
            let (a, b, k) = (c[2], c[1], c[0]);
            let disc = (mul_mod(b, b, p) + p - mul_mod(4 % p, mul_mod(a, k, p), p)) % p;
            let Some(r) = sqrt_mod_u64(disc, p) else {
                return Vec::new();
            };
            let inv = crate::arith::pow_mod(mul_mod(2, a, p), p - 2, p);
            let mut roots = vec![mul_mod((p - b + r) % p, inv, p), mul_mod((2 * p - b - r) % p, inv, p)];
            roots.sort_unstable();
            roots.dedup();
            roots
        }
        _ => (0..p).filter(|t| horner_mod(&c, *t, p) == 0).collect(),
    }
}

fn horner_mod(c: &[u64], t: u64, p: u64) -> u64 {
    c.iter().rev().fold(0u64, |acc, k| (mul_mod(acc, t, p) + k) % p)
}

/// Decides local solubility at a finite prime by searching for a
/// Hensel-certified residue point up to `max_depth`.
pub fn locally_soluble(system: &PolynomialSystem, p: u64, max_depth: u32) -> Result<TriState> {
    ResidueEngine::new(system, p)?.locally_soluble(max_depth)
}

/// All normalized primitive points modulo `p^n`.
pub fn enumerate_residue_points(system: &PolynomialSystem, p: u64, n: u32) -> Result<Vec<ResiduePoint>> {
    ResidueEngine::new(system, p)?.enumerate(n)
}

pub fn is_smooth_point(system: &PolynomialSystem, point: &ResiduePoint) -> Result<bool> {
    ResidueEngine::new(system, point.prime)?.is_smooth_point(point)
}

pub fn hensel_lift(system: &PolynomialSystem, point: &ResiduePoint, target: u32) -> Result<ResiduePoint> {
    ResidueEngine::new(system, point.prime)?.hensel_lift(point, target)
}
