//! Sparse multivariate integer polynomials and the homogeneous systems that
//! cut out projective schemes, with the line-oriented text format used on
//! the command line.
//!
//! ```text
//! # comment
//! vars: s t x y z
//! 1 s t | -1 x^2 | 5 y^2
//! 1 s^2 | 3 s t | 2 t^2 | -1 x^2 | 5 z^2
//! ```
//!
//! Each non-directive line is one polynomial; terms are separated by `|`
//! and consist of an integer coefficient followed by variables, optionally
//! raised to a power with `^`. An optional `example: <id>` line names a
//! registry entry.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Exponent vector of a monomial.
pub type Monomial = Vec<u32>;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Monomial, BigInt>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Polynomial {
        Polynomial { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: impl Into<BigInt>) -> Polynomial {
        let mut p = Polynomial::zero(nvars);
        p.add_term(vec![0; nvars], c.into());
        p
    }

    pub fn variable(nvars: usize, var: usize) -> Polynomial {
        let mut exps = vec![0; nvars];
        exps[var] = 1;
        let mut p = Polynomial::zero(nvars);
        p.add_term(exps, BigInt::one());
        p
    }

    /// Builds a polynomial from `(coefficient, exponents)` pairs.
    pub fn from_terms<I, C>(nvars: usize, terms: I) -> Polynomial
    where
        I: IntoIterator<Item = (C, Monomial)>,
        C: Into<BigInt>,
    {
        let mut p = Polynomial::zero(nvars);
        for (c, m) in terms {
            p.add_term(m, c.into());
        }
        p
    }

    pub fn add_term(&mut self, exps: Monomial, coeff: BigInt) {
        assert_eq!(exps.len(), self.nvars, "monomial arity");
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(exps).or_insert_with(BigInt::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.retain(|_, c| !c.is_zero());
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigInt)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.iter().sum()).max()
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degrees = self.terms.keys().map(|m| m.iter().sum::<u32>());
        match degrees.next() {
            None => true,
            Some(d) => degrees.all(|e| e == d),
        }
    }

    pub fn degree_in(&self, var: usize) -> u32 {
        self.terms.keys().map(|m| m[var]).max().unwrap_or(0)
    }

    pub fn variables(&self) -> BTreeSet<usize> {
        self.terms
            .keys()
            .flat_map(|m| m.iter().enumerate().filter(|(_, e)| **e > 0).map(|(i, _)| i))
            .collect()
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero(self.nvars);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let m: Monomial = m1.iter().zip(m2).map(|(a, b)| a + b).collect();
                out.add_term(m, c1 * c2);
            }
        }
        out
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &BigInt) -> Polynomial {
        Polynomial::from_terms(self.nvars, self.terms.iter().map(|(m, k)| (k * c, m.clone())))
    }

    pub fn derivative(&self, var: usize) -> Polynomial {
        let mut out = Polynomial::zero(self.nvars);
        for (m, c) in &self.terms {
            if m[var] > 0 {
                let mut m2 = m.clone();
                m2[var] -= 1;
                out.add_term(m2, c * BigInt::from(m[var]));
            }
        }
        out
    }

    /// Splits `f = sum_k C_k t^k` for `t = x_var`; entry `k` is `C_k`.
    pub fn coefficients_in(&self, var: usize) -> Vec<Polynomial> {
        let deg = self.degree_in(var) as usize;
        let mut out = vec![Polynomial::zero(self.nvars); deg + 1];
        for (m, c) in &self.terms {
            let mut m2 = m.clone();
            let k = m2[var] as usize;
            m2[var] = 0;
            out[k].add_term(m2, c.clone());
        }
        out
    }

    pub fn eval(&self, point: &[BigInt]) -> BigInt {
        let mut acc = BigInt::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, e) in point.iter().zip(m) {
                if *e > 0 {
                    t *= x.pow(*e);
                }
            }
            acc += t;
        }
        acc
    }

    pub fn eval_rational(&self, point: &[BigRational]) -> BigRational {
        let mut acc = BigRational::zero();
        for (m, c) in &self.terms {
            let mut t = BigRational::from_integer(c.clone());
            for (x, e) in point.iter().zip(m) {
                if *e > 0 {
                    t *= num_traits::pow(x.clone(), *e as usize);
                }
            }
            acc += t;
        }
        acc
    }

    /// Evaluation modulo `m < 2^63` at residues.
    pub fn eval_mod(&self, point: &[u64], m: u64) -> u64 {
        CompiledMod::new(self, m).eval(point)
    }

    /// Content: gcd of the coefficients.
    pub fn content(&self) -> BigInt {
        self.terms.values().fold(BigInt::zero(), |g, c| g.gcd(c))
    }
}

/// A polynomial with coefficients reduced modulo a fixed `m < 2^63`.
#[derive(Debug, Clone)]
pub(crate) struct CompiledMod {
    modulus: u64,
    terms: Vec<(u64, Vec<(usize, u32)>)>,
}

impl CompiledMod {
    pub(crate) fn new(poly: &Polynomial, modulus: u64) -> CompiledMod {
        let m = BigInt::from(modulus);
        let terms = poly
            .terms
            .iter()
            .map(|(exps, c)| {
                let c = c.mod_floor(&m).to_u64().expect("reduced");
                let vars = exps.iter().enumerate().filter(|(_, e)| **e > 0).map(|(i, e)| (i, *e)).collect();
                (c, vars)
            })
            .filter(|(c, _)| *c != 0)
            .collect();
        CompiledMod { modulus, terms }
    }

    pub(crate) fn eval(&self, point: &[u64]) -> u64 {
        let m = self.modulus as u128;
        let mut acc: u128 = 0;
        for (c, vars) in &self.terms {
            let mut t = *c as u128;
            for (i, e) in vars {
                let x = point[*i] as u128 % m;
                for _ in 0..*e {
                    t = t * x % m;
                }
            }
            acc = (acc + t) % m;
        }
        acc as u64
    }
}

/// A polynomial with machine-size coefficients, evaluated with overflow
/// checks.
#[derive(Debug, Clone)]
pub(crate) struct CompiledInt {
    terms: Vec<(i128, Vec<(usize, u32)>)>,
}

impl CompiledInt {
    /// `None` if a coefficient does not fit.
    pub(crate) fn new(poly: &Polynomial) -> Option<CompiledInt> {
        let terms = poly
            .terms
            .iter()
            .map(|(exps, c)| {
                let vars = exps.iter().enumerate().filter(|(_, e)| **e > 0).map(|(i, e)| (i, *e)).collect();
                c.to_i128().map(|c| (c, vars))
            })
            .collect::<Option<Vec<_>>>()?;
        Some(CompiledInt { terms })
    }

    /// `None` on overflow.
    #[inline]
    pub(crate) fn eval(&self, point: &[i128]) -> Option<i128> {
        let mut acc: i128 = 0;
        for (c, vars) in &self.terms {
            let mut t = *c;
            for &(i, e) in vars {
                let x = point[i];
                for _ in 0..e {
                    t = t.checked_mul(x)?;
                }
            }
            acc = acc.checked_add(t)?;
        }
        Some(acc)
    }
}

/// Homogeneous integer polynomials in named variables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolynomialSystem {
    vars: Vec<String>,
    polys: Vec<Polynomial>,
}

impl PolynomialSystem {
    pub fn new(vars: Vec<String>, polys: Vec<Polynomial>) -> Result<PolynomialSystem, ParseError> {
        if vars.is_empty() {
            return Err(ParseError::new(0, 0, "a system needs at least one variable"));
        }
        for (i, p) in polys.iter().enumerate() {
            if p.nvars() != vars.len() {
                return Err(ParseError::new(i + 1, 0, "polynomial arity does not match variables"));
            }
            if !p.is_homogeneous() {
                return Err(ParseError::new(i + 1, 0, "polynomial is not homogeneous"));
            }
        }
        Ok(PolynomialSystem { vars, polys })
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn polys(&self) -> &[Polynomial] {
        &self.polys
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    /// Polynomials that are not identically zero.
    pub fn nonzero_polys(&self) -> Vec<&Polynomial> {
        self.polys.iter().filter(|p| !p.is_zero()).collect()
    }

    /// Projective dimension assuming a complete intersection.
    pub fn expected_dimension(&self) -> i64 {
        self.num_vars() as i64 - 1 - self.nonzero_polys().len() as i64
    }

    pub fn contains_point(&self, point: &[BigInt]) -> bool {
        self.polys.iter().all(|p| p.eval(point).is_zero())
    }

    pub fn parse(text: &str) -> Result<PolynomialSystem, ParseError> {
        Ok(SystemDocument::parse(text)?.system)
    }

    /// Renders in the text format accepted by [`PolynomialSystem::parse`].
    pub fn to_text(&self) -> String {
        let mut out = format!("vars: {}\n", self.vars.join(" "));
        for p in &self.polys {
            out.push_str(&format_poly(p, &self.vars));
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for PolynomialSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl Polynomial {
    /// Parses one line of the system format (`coeff monomial | ...`) over `vars`.
    pub fn parse(vars: &[String], text: &str) -> Result<Polynomial, ParseError> {
        parse_poly_line(text, 1, vars)
    }

    /// Renders in the line format accepted by [`Polynomial::parse`].
    pub fn to_text(&self, vars: &[String]) -> String {
        format_poly(self, vars)
    }
}

pub(crate) fn format_poly(p: &Polynomial, vars: &[String]) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    // Highest-degree-first in the variable order reads naturally.
    let mut terms: Vec<_> = p.terms().collect();
    terms.sort_by(|a, b| b.0.cmp(a.0));
    terms
        .into_iter()
        .map(|(m, c)| {
            let mut s = c.to_string();
            for (i, e) in m.iter().enumerate() {
                match e {
                    0 => {}
                    1 => s.push_str(&format!(" {}", vars[i])),
                    _ => s.push_str(&format!(" {}^{}", vars[i], e)),
                }
            }
            s
        })
        .collect::<Vec<_>>()
        .join(" | ")
}

/// A parsed input file: the system plus an optional registry identifier.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemDocument {
    pub system: PolynomialSystem,
    pub example: Option<String>,
}

/// A parse failure with a 1-based line and column.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, column: usize, message: impl Into<String>) -> ParseError {
        ParseError { line, column, message: message.into() }
    }
}

impl SystemDocument {
    pub fn parse(text: &str) -> Result<SystemDocument, ParseError> {
        let mut vars: Option<Vec<String>> = None;
        let mut example = None;
        let mut polys = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("");
            if line.trim().is_empty() {
                continue;
            }
            if let Some(rest) = line.trim_start().strip_prefix("vars:") {
                let names: Vec<String> = rest.split_whitespace().map(str::to_string).collect();
                if names.is_empty() {
                    return Err(ParseError::new(line_no, 1, "empty variable list"));
                }
                let mut seen = BTreeSet::new();
                for n in &names {
                    if !n.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
                        || n.chars().next().map_or(true, |c| c.is_ascii_digit())
                    {
                        return Err(ParseError::new(line_no, col_of(raw, n), format!("bad variable name `{n}`")));
                    }
                    if !seen.insert(n.clone()) {
                        return Err(ParseError::new(line_no, col_of(raw, n), format!("duplicate variable `{n}`")));
                    }
                }
                vars = Some(names);
                continue;
            }
            if let Some(rest) = line.trim_start().strip_prefix("example:") {
                example = Some(rest.trim().to_string());
                continue;
            }
            let names = vars
                .as_ref()
                .ok_or_else(|| ParseError::new(line_no, 1, "polynomial before `vars:` line"))?;
            let poly = parse_poly_line(line, line_no, names)?;
            if !poly.is_homogeneous() {
                return Err(ParseError::new(line_no, 1, "polynomial is not homogeneous"));
            }
            polys.push(poly);
        }
        let vars = vars.ok_or_else(|| ParseError::new(1, 1, "missing `vars:` line"))?;
        let system = PolynomialSystem::new(vars, polys)?;
        Ok(SystemDocument { system, example })
    }
}

fn col_of(line: &str, token: &str) -> usize {
    line.find(token).map_or(1, |i| i + 1)
}

fn parse_poly_line(line: &str, line_no: usize, vars: &[String]) -> Result<Polynomial, ParseError> {
    let mut poly = Polynomial::zero(vars.len());
    let mut offset = 0;
    for term in line.split('|') {
        let base = offset;
        offset += term.len() + 1;
        let mut tokens = tokenize(term, base);
        let Some((col, first)) = tokens.next() else {
            return Err(ParseError::new(line_no, base + 1, "empty term"));
        };
        let coeff: BigInt = first
            .parse()
            .map_err(|_| ParseError::new(line_no, col, format!("expected an integer coefficient, found `{first}`")))?;
        let mut exps = vec![0u32; vars.len()];
        for (col, tok) in tokens {
            let (name, power) = match tok.split_once('^') {
                Some((n, e)) => {
                    let e: u32 = e
                        .parse()
                        .map_err(|_| ParseError::new(line_no, col, format!("bad exponent in `{tok}`")))?;
                    (n, e)
                }
                None => (tok, 1),
            };
            let var = vars
                .iter()
                .position(|v| v == name)
                .ok_or_else(|| ParseError::new(line_no, col, format!("unknown variable `{name}`")))?;
            exps[var] += power;
        }
        poly.add_term(exps, coeff);
    }
    Ok(poly)
}

fn tokenize(term: &str, base: usize) -> impl Iterator<Item = (usize, &str)> {
    let mut pos = 0;
    term.split_whitespace().map(move |tok| {
        let at = term[pos..].find(tok).map_or(pos, |i| pos + i);
        pos = at + tok.len();
        (base + at + 1, tok)
    })
}

/// Reduces an integer point to its primitive representative with the first
/// nonzero coordinate positive. `None` for the zero vector.
pub fn canonical_projective(point: &[BigInt]) -> Option<Vec<BigInt>> {
    let g = point.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    if g.is_zero() {
        return None;
    }
    let first_negative = point.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative());
    let g = if first_negative { -g } else { g };
    Some(point.iter().map(|x| x / &g).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bsd_text() -> &'static str {
        "vars: s t x y z\n1 s t | -1 x^2 | 5 y^2\n1 s^2 | 3 s t | 2 t^2 | -1 x^2 | 5 z^2\n"
    }

    #[test]
    fn parses_and_renders() {
        let sys = PolynomialSystem::parse(bsd_text()).unwrap();
        assert_eq!(sys.num_vars(), 5);
        assert_eq!(sys.polys().len(), 2);
        assert_eq!(sys.expected_dimension(), 2);
        let again = PolynomialSystem::parse(&sys.to_text()).unwrap();
        assert_eq!(sys, again);
        let p = BigInt::from;
        assert!(sys.contains_point(&[p(0), p(0), p(0), p(0), p(0)]));
        assert!(!sys.contains_point(&[p(1), p(0), p(0), p(0), p(0)]));
    }

    #[test]
    fn positioned_diagnostics() {
        let err = PolynomialSystem::parse("vars: x y\n1 x^2 | 3 w y\n").unwrap_err();
        assert_eq!((err.line, err.column), (2, 11));
        let err = PolynomialSystem::parse("vars: x y\n1 x^2 | y\n").unwrap_err();
        assert_eq!((err.line, err.column), (2, 9));
        let err = PolynomialSystem::parse("vars: x y\n1 x^2 | 1 y\n").unwrap_err();
        assert!(err.message.contains("homogeneous"));
        let err = PolynomialSystem::parse("1 x\n").unwrap_err();
        assert_eq!(err.line, 1);
        let err = PolynomialSystem::parse("vars: x x\n").unwrap_err();
        assert!(err.message.contains("duplicate"));
    }

    #[test]
    fn example_directive_and_comments() {
        let doc = SystemDocument::parse("# header\nexample: bsd-dp4\nvars: x y # names\n1 x y\n").unwrap();
        assert_eq!(doc.example.as_deref(), Some("bsd-dp4"));
        assert_eq!(doc.system.polys().len(), 1);
    }

    #[test]
    fn repeated_variables_multiply() {
        let sys = PolynomialSystem::parse("vars: x y\n1 x x | -1 y^2\n").unwrap();
        assert_eq!(sys.polys()[0].degree(), Some(2));
        assert_eq!(sys.polys()[0].num_terms(), 2);
    }

    #[test]
    fn zero_polynomial_is_accepted() {
        let sys = PolynomialSystem::parse("vars: x y\n0\n").unwrap();
        assert!(sys.polys()[0].is_zero());
    }

    #[test]
    fn coefficients_and_derivatives() {
        let sys = PolynomialSystem::parse(bsd_text()).unwrap();
        let f = &sys.polys()[1];
        let c = f.coefficients_in(0);
        assert_eq!(c.len(), 3);
        // (s + t)(s + 2t): s^2 + 3 s t + 2 t^2
        assert_eq!(c[2], Polynomial::constant(5, 1));
        let ds = f.derivative(0);
        let pt: Vec<BigInt> = [1, 1, 0, 0, 0].iter().map(|x| BigInt::from(*x)).collect();
        assert_eq!(ds.eval(&pt), BigInt::from(5));
        assert_eq!(f.eval_mod(&[1, 1, 0, 0, 0], 7), 6);
    }

    #[test]
    fn canonical_form() {
        let p = |v: &[i64]| v.iter().map(|x| BigInt::from(*x)).collect::<Vec<_>>();
        assert_eq!(canonical_projective(&p(&[0, -4, 6])), Some(p(&[0, 2, -3])));
        assert_eq!(canonical_projective(&p(&[0, 0])), None);
    }

    #[test]
    fn compiled_evaluators_agree() {
        let sys = PolynomialSystem::parse(bsd_text()).unwrap();
        let f = &sys.polys()[0];
        let ci = CompiledInt::new(f).unwrap();
        let pt = [3i128, -2, 5, 7, 1];
        let big: Vec<BigInt> = pt.iter().map(|x| BigInt::from(*x)).collect();
        assert_eq!(BigInt::from(ci.eval(&pt).unwrap()), f.eval(&big));
        assert_eq!(ci.eval(&[i128::MAX, 2, 0, 0, 0]), None);
    }
}
