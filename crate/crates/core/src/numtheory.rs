//! Exact integer and rational machinery: reduced fractions, modular inverses,
//! continued fractions and their continuants.

use std::fmt;
use std::str::FromStr;

use rug::{Integer, Rational};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{domain, Error, Result};

/// An exact rational number `num/den` in lowest terms with `den >= 1`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Fraction(Rational);

impl Fraction {
    /// Builds `num/den`, reducing and moving the sign into the numerator.
    pub fn new(num: impl Into<Integer>, den: impl Into<Integer>) -> Result<Self> {
        let den = den.into();
        if den == 0 {
            return Err(domain("zero denominator"));
        }
        Ok(Fraction(Rational::from((num.into(), den))))
    }

    pub fn from_integer(n: impl Into<Integer>) -> Self {
        Fraction(Rational::from(n.into()))
    }

    pub fn zero() -> Self {
        Fraction(Rational::new())
    }

    pub fn numer(&self) -> &Integer {
        self.0.numer()
    }

    pub fn denom(&self) -> &Integer {
        self.0.denom()
    }

    pub fn as_rational(&self) -> &Rational {
        &self.0
    }

    pub fn into_rational(self) -> Rational {
        self.0
    }

    pub fn is_integer(&self) -> bool {
        *self.0.denom() == 1
    }

    pub fn floor(&self) -> Integer {
        self.0.clone().floor().into_numer_denom().0
    }

    /// The fractional part `{x} = x - floor(x)`, always in `[0, 1)`.
    pub fn fract(&self) -> Fraction {
        let (frac, _) = self.0.clone().fract_floor(Integer::new());
        Fraction(frac)
    }

    /// Numerator and denominator as machine integers, when they fit.
    pub fn to_i64_u64(&self) -> Option<(i64, u64)> {
        Some((self.numer().to_i64()?, self.denom().to_u64()?))
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }
}

impl From<Rational> for Fraction {
    fn from(r: Rational) -> Self {
        Fraction(r)
    }
}

impl From<i64> for Fraction {
    fn from(n: i64) -> Self {
        Fraction::from_integer(n)
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl FromStr for Fraction {
    type Err = Error;

    /// Parses `"h/k"` or a bare integer `"h"`. No whitespace is accepted.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |reason: &str| Error::Parse {
            input: s.to_string(),
            reason: reason.to_string(),
        };
        let int = |t: &str| -> Result<Integer> {
            if t.is_empty() || t.chars().any(|c| c.is_whitespace() || c == '+') {
                return Err(bad("expected an integer"));
            }
            Integer::from_str(t).map_err(|_| bad("expected an integer"))
        };
        match s.split_once('/') {
            Some((n, d)) => {
                let d = int(d)?;
                if d == 0 {
                    return Err(bad("zero denominator"));
                }
                Fraction::new(int(n)?, d)
            }
            None => Ok(Fraction::from_integer(int(s)?)),
        }
    }
}

impl Serialize for Fraction {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Fraction {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn check_modulus(h: &Integer, k: &Integer) -> Result<()> {
    if *k < 2 {
        return Err(domain(format!("modulus {k} must be at least 2")));
    }
    if Integer::from(h.gcd_ref(k)) != 1 {
        return Err(Error::NotCoprime(h.to_string(), k.to_string()));
    }
    Ok(())
}

/// The inverse of `h` modulo `k`, as the representative in `[1, k-1]`.
pub fn mod_inverse(h: &Integer, k: &Integer) -> Result<Integer> {
    check_modulus(h, k)?;
    h.invert_ref(k)
        .map(Integer::from)
        .ok_or_else(|| Error::NotCoprime(h.to_string(), k.to_string()))
}

/// Machine-integer variant of [`mod_inverse`] for the O(k) summation code.
pub fn mod_inverse_u64(h: i64, k: u64) -> Result<u64> {
    if k < 2 {
        return Err(domain(format!("modulus {k} must be at least 2")));
    }
    let (mut r0, mut r1) = (k as i128, (h as i128).rem_euclid(k as i128));
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    if r0 != 1 {
        return Err(Error::NotCoprime(h.to_string(), k.to_string()));
    }
    Ok(s0.rem_euclid(k as i128) as u64)
}

pub fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Validates `gcd(h, k) = 1` for machine integers.
pub fn require_coprime(h: i64, k: u64) -> Result<()> {
    if k == 0 {
        return Err(domain("denominator must be positive"));
    }
    if gcd_u64(h.unsigned_abs(), k) != 1 {
        return Err(Error::NotCoprime(h.to_string(), k.to_string()));
    }
    Ok(())
}

/// Regular continued fraction `[0; b_1, ..., b_r]` of a rational in `(0, 1)`,
/// with its convergents `u_m / v_m` for `m = 0..=r`.
///
/// The expansion is normalized so that `b_r != 1` whenever `r > 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContinuedFraction {
    quotients: Vec<Integer>,
    numerators: Vec<Integer>,
    denominators: Vec<Integer>,
}

/// Continuants of a quotient list: `(u_0..u_r, v_0..v_r)` with
/// `u_{-1} = 1, u_0 = 0, v_{-1} = 0, v_0 = 1`.
fn continuants(quotients: &[Integer]) -> (Vec<Integer>, Vec<Integer>) {
    let mut u = Vec::with_capacity(quotients.len() + 1);
    let mut v = Vec::with_capacity(quotients.len() + 1);
    u.push(Integer::new());
    v.push(Integer::from(1));
    let (mut u_prev, mut v_prev) = (Integer::from(1), Integer::new());
    for b in quotients {
        let u_next = Integer::from(b * u.last().unwrap()) + &u_prev;
        let v_next = Integer::from(b * v.last().unwrap()) + &v_prev;
        u_prev = u.last().unwrap().clone();
        v_prev = v.last().unwrap().clone();
        u.push(u_next);
        v.push(v_next);
    }
    (u, v)
}

impl ContinuedFraction {
    /// Builds the expansion from partial quotients, merging a trailing
    /// `..., a, 1` into `..., a + 1`.
    pub fn from_quotients(mut quotients: Vec<Integer>) -> Result<Self> {
        if quotients.is_empty() {
            return Err(domain("empty continued fraction"));
        }
        if quotients.iter().any(|b| *b < 1) {
            return Err(domain("partial quotients must be positive"));
        }
        if quotients.len() > 1 && *quotients.last().unwrap() == 1 {
            quotients.pop();
            *quotients.last_mut().unwrap() += 1;
        }
        if quotients.len() == 1 && quotients[0] == 1 {
            return Err(domain("[0; 1] = 1 lies outside (0, 1)"));
        }
        let (numerators, denominators) = continuants(&quotients);
        Ok(ContinuedFraction {
            quotients,
            numerators,
            denominators,
        })
    }

    /// Partial quotients `b_1..b_r`.
    pub fn quotients(&self) -> &[Integer] {
        &self.quotients
    }

    /// Convergent numerators `u_0..u_r`.
    pub fn numerators(&self) -> &[Integer] {
        &self.numerators
    }

    /// Continuants `v_0..v_r`; `v_r` is the denominator of the value.
    pub fn denominators(&self) -> &[Integer] {
        &self.denominators
    }

    /// Number of partial quotients `r`.
    pub fn len(&self) -> usize {
        self.quotients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quotients.is_empty()
    }

    pub fn value(&self) -> Fraction {
        let r = self.len();
        Fraction::new(self.numerators[r].clone(), self.denominators[r].clone())
            .expect("continuants are positive")
    }
}

impl fmt::Display for ContinuedFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[0;")?;
        for (i, b) in self.quotients.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{b}")?;
        }
        write!(f, "]")
    }
}

fn require_unit_interval(x: &Fraction) -> Result<()> {
    if *x.numer() <= 0 || x.numer() >= x.denom() {
        return Err(domain(format!("{x} is not in (0, 1)")));
    }
    Ok(())
}

/// Expands `x` in `(0, 1)` by the Euclidean algorithm.
pub fn continued_fraction(x: &Fraction) -> Result<ContinuedFraction> {
    require_unit_interval(x)?;
    let mut quotients = Vec::new();
    let (mut a, mut b) = (x.numer().clone(), x.denom().clone());
    while a != 0 {
        let (q, r) = b.div_rem_floor(a.clone());
        quotients.push(q);
        b = a;
        a = r;
    }
    ContinuedFraction::from_quotients(quotients)
}

/// The fraction `h*/k = [0; b_r, ..., b_1]` whose expansion reverses that of
/// `h/k`. Equivalently `h* = v_{r-1}`, so `h* ≡ (-1)^{r+1} h̄ (mod k)`.
pub fn reversed_star(x: &Fraction) -> Result<Fraction> {
    let cf = continued_fraction(x)?;
    let r = cf.len();
    Fraction::new(cf.denominators[r - 1].clone(), cf.denominators[r].clone())
}

/// Checks `k = v_s v'_{r-s} + v_{s-1} v'_{r-s-1}` and `k/2 <= v_s v'_{r-s} <= k`
/// for all `0 <= s <= r`, where `v'` are the continuants of the reversed
/// quotient list.
pub fn cross_continuant_check(x: &Fraction) -> Result<bool> {
    let cf = continued_fraction(x)?;
    let r = cf.len();
    let reversed: Vec<Integer> = cf.quotients.iter().rev().cloned().collect();
    let (_, vp) = continuants(&reversed);
    let v = &cf.denominators;
    let k = &v[r];
    // index shifted by one so that position 0 holds v_{-1} = 0
    let at = |seq: &[Integer], i: isize| -> Integer {
        if i < 0 {
            Integer::new()
        } else {
            seq[i as usize].clone()
        }
    };
    for s in 0..=r as isize {
        let main = at(v, s) * at(&vp, r as isize - s);
        let rest = at(v, s - 1) * at(&vp, r as isize - s - 1);
        if Integer::from(&main + &rest) != *k {
            return Ok(false);
        }
        if Integer::from(&main * 2u32) < *k || main > *k {
            return Ok(false);
        }
    }
    Ok(true)
}
