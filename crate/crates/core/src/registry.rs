//! Built-in examples: the systems named on the command line and the
//! Brauer classes attached to them.

use std::collections::BTreeSet;

use num_bigint::BigInt;

use crate::arith::SquareClass;
use crate::bm::{RationalFunction, SymbolClassOnVariety, UnitArgument};
use crate::error::{Error, Result};
use crate::poly::{Polynomial, PolynomialSystem};
use crate::symbols::Place;

/// `s t - x^2 + 5 y^2 = (s + t)(s + 2t) - x^2 + 5 z^2 = 0` in `P^4`, a del
/// Pezzo surface of degree four with points everywhere locally and no
/// rational points.
pub const BSD_TEXT: &str = "\
vars: s t x y z
1 s t | -1 x^2 | 5 y^2
1 s^2 | 3 s t | 2 t^2 | -1 x^2 | 5 z^2
";

/// `2 y^2 = w^2 - 17 z^2`, `w z = x^2` in `P^3`: a genus one curve that is
/// everywhere locally soluble without rational points.
pub const LIND_REICHARDT_TEXT: &str = "\
vars: w x y z
2 y^2 | -1 w^2 | 17 z^2
1 w z | -1 x^2
";

/// The plane cubic `x^3 + 2 y^3 + 10 z^3 = 0`.
pub const PROLOGUE_CUBIC_TEXT: &str = "\
vars: x y z
1 x^3 | 2 y^3 | 10 z^3
";

pub fn bsd_surface() -> PolynomialSystem {
    PolynomialSystem::parse(BSD_TEXT).expect("built-in system")
}

pub fn lind_reichardt() -> PolynomialSystem {
    PolynomialSystem::parse(LIND_REICHARDT_TEXT).expect("built-in system")
}

pub fn prologue_cubic() -> PolynomialSystem {
    PolynomialSystem::parse(PROLOGUE_CUBIC_TEXT).expect("built-in system")
}

/// `a x^2 + b y^2 + c z^2` in variables `x y z`.
pub fn diagonal_conic(a: i64, b: i64, c: i64) -> PolynomialSystem {
    diagonal_conic_big(&BigInt::from(a), &BigInt::from(b), &BigInt::from(c))
}

pub fn diagonal_conic_big(a: &BigInt, b: &BigInt, c: &BigInt) -> PolynomialSystem {
    let f = Polynomial::from_terms(3, [(a.clone(), vec![2, 0, 0]), (b.clone(), vec![0, 2, 0]), (c.clone(), vec![0, 0, 2])]);
    PolynomialSystem::new(vec!["x".into(), "y".into(), "z".into()], vec![f]).expect("homogeneous")
}

/// `s t = x^2 - a y^2`, `(s + b t)(s + c t) = x^2 - a z^2` in `P^4`. The
/// surface with `(a, b, c) = (5, 1, 2)` is [`bsd_surface`].
pub fn dp4_surface(a: i64, b: i64, c: i64) -> PolynomialSystem {
    let text = format!(
        "vars: s t x y z\n1 s t | -1 x^2 | {a} y^2\n1 s^2 | {} s t | {} t^2 | -1 x^2 | {a} z^2\n",
        b + c,
        b * c
    );
    PolynomialSystem::parse(&text).expect("built-in system")
}

/// The class `(a, (s + b t)/s)` on [`dp4_surface`], with its four
/// representations. They agree because `s t` and `(s + b t)(s + c t)` are
/// norms from `Q(sqrt a)`.
pub fn dp4_class(a: i64, b: i64, c: i64) -> Result<SymbolClassOnVariety> {
    dp4_class_on(dp4_surface(a, b, c), a, b, c)
}

fn dp4_class_on(system: PolynomialSystem, a: i64, b: i64, c: i64) -> Result<SymbolClassOnVariety> {
    if b == c || b == 0 || c == 0 {
        return Err(Error::InvalidArgument("need b, c nonzero and distinct".into()));
    }
    let constant = SquareClass::from_i64(a)?;
    if constant.is_square() {
        return Err(Error::InvalidArgument("the constant slot must not be a square".into()));
    }
    let vars = system.vars().to_vec();
    let rep = |num: String, den: &str| {
        RationalFunction::parse(&vars, &num, den, &format!("regular and invertible off {{{num} = 0}} and {{{den} = 0}}"))
            .map_err(|e| Error::InvalidArgument(e.to_string()))
    };
    let representations = vec![
        rep(format!("1 s | {b} t"), "1 s")?,
        rep(format!("1 s | {c} t"), "1 s")?,
        rep(format!("1 s | {b} t"), "1 t")?,
        rep(format!("1 s | {c} t"), "1 t")?,
    ];
    let mut exceptional_primes = BTreeSet::new();
    for n in [b, c, b - c] {
        exceptional_primes.extend(SquareClass::from_i64(n)?.primes()?);
        // Square factors matter too: only coprimality to p is used.
        let mut m = n.unsigned_abs();
        let mut p = 2;
        while p * p <= m {
            while m % p == 0 {
                exceptional_primes.insert(p);
                m /= p;
            }
            p += 1;
        }
        if m > 1 {
            exceptional_primes.insert(m);
        }
    }
    let (lb, lc) = (linear(b), linear(c));
    let statement = format!(
        "for odd p not dividing {a}·{b}·{c}·({b} - {c}): if s, t are both divisible by p then so are x, y, z \
         when {a} is not a square mod p, so s or t is a unit; then {lb} or {lc} is a unit too, and \
         one of the four representations takes a unit value, on which the symbol with the unit {a} is trivial"
    );
    SymbolClassOnVariety::new(
        format!("({a}, ({lb})/s)"),
        system,
        constant,
        representations,
        UnitArgument { exceptional_primes, statement },
    )
}

/// `s + k t`, written the way a person would.
fn linear(k: i64) -> String {
    match k {
        1 => "s + t".into(),
        -1 => "s - t".into(),
        k if k < 0 => format!("s - {}t", -k),
        k => format!("s + {k}t"),
    }
}

/// The class `A = (5, (s + t)/s)` on the BSD surface.
pub fn bsd_class() -> SymbolClassOnVariety {
    dp4_class_on(bsd_surface(), 5, 1, 2).expect("built-in class")
}

/// A registered example: a system and possibly a class attached to it.
#[derive(Debug, Clone)]
pub struct Example {
    pub id: String,
    pub description: String,
    pub system: PolynomialSystem,
    pub class: Option<SymbolClassOnVariety>,
}

/// Identifiers with fixed meaning. `conic-A-B-C` (write `--` before a
/// negative coefficient) and `dp4-A-B-C` are parametric.
pub const FIXED_IDS: [&str; 4] = ["bsd-dp4", "lind-reichardt", "prologue-cubic", TWO_VALUED_EXAMPLE];

/// A surface of the dp4 family whose class has both invariants in its
/// local image at one place.
pub const TWO_VALUED_EXAMPLE: &str = "two-valued-dp4";
pub const TWO_VALUED_PARAMETERS: (i64, i64, i64) = (2, 1, 2);
pub const TWO_VALUED_PLACE: Place = Place::Finite(2);

/// Splits `5-7--3` into `[5, 7, -3]`.
fn parse_signed_list(s: &str) -> Option<Vec<i64>> {
    let mut out = Vec::new();
    let mut negative = false;
    for tok in s.split('-') {
        if tok.is_empty() {
            if negative {
                return None;
            }
            negative = true;
            continue;
        }
        let v: i64 = tok.parse().ok()?;
        out.push(if negative { -v } else { v });
        negative = false;
    }
    (!negative).then_some(out)
}

pub fn lookup(id: &str) -> Result<Example> {
    let unknown = || Error::UnknownExample(id.to_string());
    let ex = |description: &str, system: PolynomialSystem, class: Option<SymbolClassOnVariety>| Example {
        id: id.to_string(),
        description: description.to_string(),
        system,
        class,
    };
    match id {
        "bsd-dp4" => Ok(ex("the BSD quartic del Pezzo surface with the class (5, (s+t)/s)", bsd_surface(), Some(bsd_class()))),
        "lind-reichardt" => Ok(ex("the Lind-Reichardt genus one curve; no class is attached", lind_reichardt(), None)),
        "prologue-cubic" => Ok(ex("the plane cubic x^3 + 2y^3 + 10z^3", prologue_cubic(), None)),
        TWO_VALUED_EXAMPLE => {
            let (a, b, c) = TWO_VALUED_PARAMETERS;
            let class = dp4_class(a, b, c)?;
            Ok(ex("a dp4 surface whose class has a two-element local image", class.system.clone(), Some(class)))
        }
        _ => {
            if let Some(rest) = id.strip_prefix("conic-") {
                let v = parse_signed_list(rest).filter(|v| v.len() == 3 && v.iter().all(|x| *x != 0)).ok_or_else(unknown)?;
                let system = diagonal_conic(v[0], v[1], v[2]);
                // The conic is the norm conic of (-ac, -bc); that class dies on it.
                let a = SquareClass::from_i64(-v[0] * v[2])?;
                let b = SquareClass::from_i64(-v[1] * v[2])?;
                let class = SymbolClassOnVariety::constant_class(format!("({a}, {b})"), system.clone(), a, b)?;
                Ok(ex("a diagonal conic with the constant class it splits", system, Some(class)))
            } else if let Some(rest) = id.strip_prefix("dp4-") {
                let v = parse_signed_list(rest).filter(|v| v.len() == 3).ok_or_else(unknown)?;
                let class = dp4_class(v[0], v[1], v[2])?;
                Ok(ex("a surface of the dp4 family with its class", class.system.clone(), Some(class)))
            } else {
                Err(unknown())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dp4_family_contains_bsd() {
        assert_eq!(dp4_surface(5, 1, 2), bsd_surface());
    }

    #[test]
    fn ids_resolve() {
        for id in FIXED_IDS {
            lookup(id).unwrap();
        }
        let c = lookup("conic-5-7--3").unwrap();
        assert_eq!(c.system, diagonal_conic(5, 7, -3));
        assert!(c.class.unwrap().is_constant());
        assert!(matches!(lookup("conic-1-2"), Err(Error::UnknownExample(_))));
        assert!(matches!(lookup("nope"), Err(Error::UnknownExample(_))));
        assert_eq!(parse_signed_list("-1--2-3"), Some(vec![-1, -2, 3]));
        assert_eq!(parse_signed_list("1---2"), None);
    }
}
