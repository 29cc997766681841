//! Real points. A witness fixes some coordinates to exact rationals and
//! brackets each remaining one between two rationals where the single
//! polynomial that involves it changes sign; the intermediate value theorem
//! does the rest.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::TriState;
use crate::plan::{make_plan, Chaining};
use crate::poly::{Polynomial, PolynomialSystem};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RealCoord {
    Exact(#[serde(with = "crate::text")] BigRational),
    /// A root of `polys[poly]` lies strictly between `lo` and `hi`.
    Bracket {
        #[serde(with = "crate::text")]
        lo: BigRational,
        #[serde(with = "crate::text")]
        hi: BigRational,
        poly: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RealWitness {
    pub coords: Vec<RealCoord>,
}

impl RealWitness {
    pub fn exact(coords: Vec<BigRational>) -> RealWitness {
        RealWitness { coords: coords.into_iter().map(RealCoord::Exact).collect() }
    }

    /// Rechecks the witness against `system` using exact arithmetic only.
    pub fn verify(&self, system: &PolynomialSystem) -> bool {
        if self.coords.len() != system.num_vars() {
            return false;
        }
        let nonzero = self.coords.iter().any(|c| match c {
            RealCoord::Exact(x) => !x.is_zero(),
            RealCoord::Bracket { lo, hi, .. } => lo.is_positive() || hi.is_negative(),
        });
        if !nonzero {
            return false;
        }
        let mut used = vec![false; system.polys().len()];
        for (var, c) in self.coords.iter().enumerate() {
            if let RealCoord::Bracket { lo, hi, poly } = c {
                if *poly >= used.len() || used[*poly] || lo >= hi {
                    return false;
                }
                used[*poly] = true;
                let f = &system.polys()[*poly];
                if f.variables().iter().any(|v| *v != var && !matches!(self.coords[*v], RealCoord::Exact(_))) {
                    return false;
                }
                let at = |t: &BigRational| {
                    let mut pt = self.exact_values();
                    pt[var] = t.clone();
                    f.eval_rational(&pt)
                };
                let (a, b) = (at(lo), at(hi));
                if !(a.is_positive() && b.is_negative() || a.is_negative() && b.is_positive()) {
                    return false;
                }
            }
        }
        system.polys().iter().zip(&used).all(|(f, u)| {
            *u || (f.variables().iter().all(|v| matches!(self.coords[*v], RealCoord::Exact(_)))
                && f.eval_rational(&self.exact_values()).is_zero())
        })
    }

    fn exact_values(&self) -> Vec<BigRational> {
        self.coords
            .iter()
            .map(|c| match c {
                RealCoord::Exact(x) => x.clone(),
                RealCoord::Bracket { .. } => BigRational::zero(),
            })
            .collect()
    }

    /// Halves every bracket `rounds` times, keeping the half with the sign
    /// change (or an exact root if a midpoint hits one).
    pub fn refine(&self, system: &PolynomialSystem, rounds: u32) -> RealWitness {
        let mut out = self.clone();
        let two = BigInt::from(2);
        for var in 0..out.coords.len() {
            for _ in 0..rounds {
                let RealCoord::Bracket { lo, hi, poly } = &out.coords[var] else { break };
                let (lo, hi, poly) = (lo.clone(), hi.clone(), *poly);
                let f = &system.polys()[poly];
                let at = |t: &BigRational| {
                    let mut pt = out.exact_values();
                    pt[var] = t.clone();
                    f.eval_rational(&pt)
                };
                let mid = (&lo + &hi) / &two;
                let fm = at(&mid);
                out.coords[var] = if fm.is_zero() {
                    RealCoord::Exact(mid)
                } else if fm.is_positive() == at(&lo).is_positive() {
                    RealCoord::Bracket { lo: mid, hi, poly }
                } else {
                    RealCoord::Bracket { lo, hi: mid, poly }
                };
            }
        }
        out
    }

    /// Each coordinate as a closed interval.
    pub fn boxes(&self) -> Vec<(BigRational, BigRational)> {
        self.coords
            .iter()
            .map(|c| match c {
                RealCoord::Exact(x) => (x.clone(), x.clone()),
                RealCoord::Bracket { lo, hi, .. } => (lo.clone(), hi.clone()),
            })
            .collect()
    }

    /// Floating approximation, for display.
    pub fn approximate(&self) -> Vec<f64> {
        use num_traits::ToPrimitive;
        self.coords
            .iter()
            .map(|c| match c {
                RealCoord::Exact(x) => x.to_f64().unwrap_or(f64::NAN),
                RealCoord::Bracket { lo, hi, .. } => ((lo + hi) / BigInt::from(2)).to_f64().unwrap_or(f64::NAN),
            })
            .collect()
    }
}

fn grid() -> Vec<BigRational> {
    let mut out = vec![BigRational::zero()];
    let mut push = |n: i64, d: i64| {
        let q = BigRational::new(n.into(), d.into());
        out.push(q.clone());
        out.push(-q);
    };
    for (n, d) in [(1, 1), (2, 1), (1, 2), (3, 1), (1, 3), (3, 2), (5, 1), (2, 3), (7, 1)] {
        push(n, d);
    }
    out
}

/// A definite diagonal even-degree form in every variable has no real
/// zero besides the origin.
fn is_definite_diagonal(f: &Polynomial) -> bool {
    let n = f.nvars();
    let mut seen = vec![false; n];
    let mut sign = 0;
    for (m, c) in f.terms() {
        let nz: Vec<usize> = (0..n).filter(|i| m[*i] > 0).collect();
        if nz.len() != 1 || m[nz[0]] % 2 != 0 {
            return false;
        }
        let s = if c.is_positive() { 1 } else { -1 };
        if sign != 0 && s != sign {
            return false;
        }
        sign = s;
        seen[nz[0]] = true;
    }
    seen.iter().all(|s| *s)
}

/// Coefficients of `f` as a polynomial in `var`, with the other
/// coordinates substituted; trailing zeros removed.
fn univariate(f: &Polynomial, var: usize, point: &[BigRational]) -> Vec<BigRational> {
    let mut c: Vec<BigRational> = f.coefficients_in(var).iter().map(|g| g.eval_rational(point)).collect();
    while c.last().is_some_and(|x| x.is_zero()) {
        c.pop();
    }
    c
}

fn horner(c: &[BigRational], t: &BigRational) -> BigRational {
    c.iter().rev().fold(BigRational::zero(), |acc, k| acc * t + k)
}

/// An exact root or a sign-change bracket of a nonzero univariate
/// polynomial, preferring small values.
fn locate_root(c: &[BigRational], poly: usize) -> Option<RealCoord> {
    if c.is_empty() {
        return Some(RealCoord::Exact(BigRational::zero()));
    }
    if c.len() == 1 {
        return None;
    }
    let lead = c.last().unwrap().abs();
    let bound = c.iter().map(|k| k.abs() / &lead).fold(BigRational::zero(), |a, b| if b > a { b } else { a })
        + BigRational::one();
    let bound = bound.ceil();
    // Scan [-bound, bound] in steps of 1/4, coarser for large bounds, and
    // keep the root closest to zero so witnesses stay short.
    let quarter = BigRational::new(BigInt::one(), BigInt::from(4));
    let coarse = (bound.clone() / BigInt::from(400)).ceil();
    let step = if coarse > quarter { coarse } else { quarter };
    let mut t = -bound.clone();
    let mut prev: Option<(BigRational, BigRational)> = None;
    let mut best: Option<RealCoord> = None;
    while t <= bound {
        let v = horner(c, &t);
        if v.is_zero() {
            if best.as_ref().map_or(true, |b| magnitude(b) > t.abs()) {
                best = Some(RealCoord::Exact(t.clone()));
            }
        } else if let Some((pt, pv)) = &prev {
            if !pv.is_zero() && pv.is_positive() != v.is_positive() {
                let cand = RealCoord::Bracket { lo: pt.clone(), hi: t.clone(), poly };
                if best.as_ref().map_or(true, |b| magnitude(b) > magnitude(&cand)) {
                    best = Some(cand);
                }
            }
        }
        prev = Some((t.clone(), v));
        t += &step;
    }
    best
}

fn magnitude(c: &RealCoord) -> BigRational {
    match c {
        RealCoord::Exact(x) => x.abs(),
        RealCoord::Bracket { lo, hi, .. } => {
            let (a, b) = (lo.abs(), hi.abs());
            if a < b {
                a
            } else {
                b
            }
        }
    }
}

fn sample_witness(system: &PolynomialSystem) -> Option<RealWitness> {
    let n = system.num_vars();
    let all: Vec<usize> = (0..n).collect();
    let plan = make_plan(system, &all, Chaining::Forbidden);
    if !plan.checks.iter().all(|i| system.polys()[*i].is_zero()) {
        return None;
    }
    let grid = grid();
    let free = &plan.free;
    let total = grid.len().checked_pow(free.len() as u32)?.min(200_000);
    for code in 0..total {
        let mut point = vec![BigRational::zero(); n];
        let mut rest = code;
        for v in free {
            point[*v] = grid[rest % grid.len()].clone();
            rest /= grid.len();
        }
        let mut coords: Vec<RealCoord> = point.iter().cloned().map(RealCoord::Exact).collect();
        let mut ok = true;
        for step in &plan.steps {
            let c = univariate(&system.polys()[step.poly], step.var, &point);
            match locate_root(&c, step.poly) {
                Some(RealCoord::Exact(x)) => {
                    point[step.var] = x.clone();
                    coords[step.var] = RealCoord::Exact(x);
                }
                Some(b) => coords[step.var] = b,
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            let w = RealWitness { coords };
            if w.verify(system) {
                return Some(w);
            }
        }
    }
    None
}

/// Decides whether the real locus is nonempty, exactly where a sign
/// argument applies.
pub fn real_points_nonempty(system: &PolynomialSystem) -> TriState {
    if system.polys().iter().any(is_definite_diagonal) {
        return TriState::ProvedNo { depth: 0 };
    }
    if let Some(w) = sample_witness(system) {
        return TriState::ProvedYes { witness: super::Witness::Real(w) };
    }
    // A rational point is also a real point.
    if let Ok(points) = crate::search::search_rational_points(system, 12, 1) {
        if let Some(p) = points.first() {
            let coords = p.coords.iter().map(|x| BigRational::from_integer(x.clone())).collect();
            return TriState::ProvedYes { witness: super::Witness::Real(RealWitness::exact(coords)) };
        }
    }
    TriState::UnknownAtDepth { depth: 0 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::Witness;
    use crate::registry;

    fn witness(t: TriState) -> RealWitness {
        match t {
            TriState::ProvedYes { witness: Witness::Real(w) } => w,
            other => panic!("expected a real witness, got {other:?}"),
        }
    }

    #[test]
    fn definite_conic_has_no_real_point() {
        assert_eq!(real_points_nonempty(&registry::diagonal_conic(1, 1, 7)), TriState::ProvedNo { depth: 0 });
        assert_eq!(real_points_nonempty(&registry::diagonal_conic(-1, -2, -3)), TriState::ProvedNo { depth: 0 });
    }

    #[test]
    fn indefinite_conic_witness() {
        let sys = registry::diagonal_conic(1, 1, -1);
        let w = witness(real_points_nonempty(&sys));
        assert!(w.verify(&sys));
        let approx = w.approximate();
        assert!((approx[0] * approx[0] + approx[1] * approx[1] - approx[2] * approx[2]).abs() < 1.0);
    }

    #[test]
    fn corpus_surfaces_have_real_points() {
        for sys in [registry::bsd_surface(), registry::lind_reichardt(), registry::prologue_cubic()] {
            let w = witness(real_points_nonempty(&sys));
            assert!(w.verify(&sys), "{sys}");
        }
    }

    #[test]
    fn tampered_witness_fails() {
        let sys = registry::bsd_surface();
        let mut w = witness(real_points_nonempty(&sys));
        for c in w.coords.iter_mut() {
            if let RealCoord::Bracket { lo, hi, .. } = c {
                *lo = hi.clone() + BigRational::one();
                *hi = lo.clone() + BigRational::one();
            }
        }
        assert!(!w.verify(&sys));
        let bogus = RealWitness::exact(vec![BigRational::one(); 5]);
        assert!(!bogus.verify(&sys));
    }

    #[test]
    fn witness_round_trips_through_json() {
        let sys = registry::bsd_surface();
        let w = witness(real_points_nonempty(&sys));
        let text = serde_json::to_string(&w).unwrap();
        let back: RealWitness = serde_json::from_str(&text).unwrap();
        assert_eq!(w, back);
    }
}
