//! Triangular solve plans: which variables to enumerate and which to solve
//! for, one polynomial at a time.
//!
//! A plan over a set of unknown variables splits them into `free` variables
//! (enumerated) and a sequence of steps. Step `j` solves polynomial
//! `steps[j].poly` for `steps[j].var`; at that point every other variable in
//! the polynomial is fixed, free, or determined by an earlier step. Unused
//! polynomials become checks.

use crate::poly::{Polynomial, PolynomialSystem};

#[derive(Debug, Clone)]
pub(crate) struct Step {
    pub var: usize,
    pub poly: usize,
    /// `coeffs[k]` multiplies `x_var^k`.
    pub coeffs: Vec<Polynomial>,
}

#[derive(Debug, Clone)]
pub(crate) struct SolvePlan {
    pub free: Vec<usize>,
    pub steps: Vec<Step>,
    pub checks: Vec<usize>,
}

/// Whether a step may use variables determined by earlier steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Chaining {
    Allowed,
    /// Each step polynomial may only involve fixed and free variables and
    /// its own unknown. Needed when solved values are not exact.
    Forbidden,
}

pub(crate) fn make_plan(system: &PolynomialSystem, unknown: &[usize], chaining: Chaining) -> SolvePlan {
    let polys = system.polys();
    let var_sets: Vec<_> = polys.iter().map(|p| p.variables()).collect();

    #[derive(Clone)]
    struct Partial {
        steps: Vec<(usize, usize)>,
        cost: u32,
    }
    let mut best = Partial { steps: Vec::new(), cost: 0 };

    fn step_cost(p: &Polynomial, var: usize) -> u32 {
        let coeffs = p.coefficients_in(var);
        let nonzero = coeffs.iter().filter(|c| !c.is_zero()).count() as u32;
        // Binomials and low degree solve exactly; prefer them.
        let deg = p.degree_in(var);
        if nonzero <= 2 {
            deg
        } else {
            deg * 4
        }
    }

    fn search(
        polys: &[Polynomial],
        var_sets: &[std::collections::BTreeSet<usize>],
        unknown: &[usize],
        chaining: Chaining,
        current: &mut Partial,
        best: &mut Partial,
    ) {
        let better = current.steps.len() > best.steps.len()
            || (current.steps.len() == best.steps.len() && current.cost < best.cost);
        if better {
            *best = current.clone();
        }
        let full = polys.iter().filter(|p| !p.is_zero()).count().min(unknown.len());
        if best.steps.len() == full && best.cost <= current.cost {
            return;
        }
        let determined: Vec<usize> = current.steps.iter().map(|s| s.1).collect();
        for (pi, vars) in var_sets.iter().enumerate() {
            if current.steps.iter().any(|s| s.0 == pi) || polys[pi].is_zero() {
                continue;
            }
            for &v in unknown {
                if determined.contains(&v) || !vars.contains(&v) {
                    continue;
                }
                // Earlier steps must not involve v.
                if current.steps.iter().any(|s| var_sets[s.0].contains(&v)) {
                    continue;
                }
                if chaining == Chaining::Forbidden && determined.iter().any(|d| vars.contains(d)) {
                    continue;
                }
                current.steps.push((pi, v));
                current.cost += step_cost(&polys[pi], v);
                search(polys, var_sets, unknown, chaining, current, best);
                current.cost -= step_cost(&polys[pi], v);
                current.steps.pop();
            }
        }
    }

    let mut current = Partial { steps: Vec::new(), cost: 0 };
    search(polys, &var_sets, unknown, chaining, &mut current, &mut best);

    let determined: Vec<usize> = best.steps.iter().map(|s| s.1).collect();
    let free = unknown.iter().copied().filter(|v| !determined.contains(v)).collect();
    let steps = best
        .steps
        .iter()
        .map(|&(poly, var)| Step { var, poly, coeffs: polys[poly].coefficients_in(var) })
        .collect();
    let checks = (0..polys.len()).filter(|i| !best.steps.iter().any(|s| s.0 == *i)).collect();
    SolvePlan { free, steps, checks }
}
