//! Scalar special functions at a configurable binary precision: the sawtooth
//! `((x))`, digamma, `cot(πx)` and the truncated logarithm `log⁻`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rug::float::Constant;
use rug::ops::CompleteRound;
use rug::{Assign, Float, Integer, Rational};

use crate::error::{domain, Error, Result};
use crate::numtheory::Fraction;

pub const DEFAULT_BITS: u32 = 128;
const MIN_BITS: u32 = 64;
const MAX_BITS: u32 = 1 << 16;
/// Extra bits carried internally by every routine in this module.
pub const GUARD_BITS: u32 = 32;

/// Binary precision of real arithmetic, threaded through every numeric call.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Precision {
    bits: u32,
}

impl Precision {
    pub fn new(bits: u32) -> Result<Self> {
        if !(MIN_BITS..=MAX_BITS).contains(&bits) {
            return Err(domain(format!(
                "precision must be between {MIN_BITS} and {MAX_BITS} bits, got {bits}"
            )));
        }
        Ok(Precision { bits })
    }

    pub fn bits(self) -> u32 {
        self.bits
    }

    pub(crate) fn working(self) -> u32 {
        self.bits + GUARD_BITS
    }

    /// `2^(slack - bits)`, the natural absolute tolerance at this precision.
    pub fn tolerance(self, slack: i32) -> Float {
        let mut t = Float::with_val(self.bits, 1);
        t <<= slack - self.bits as i32;
        t
    }

    pub fn zero(self) -> Float {
        Float::new(self.bits)
    }

    pub fn float<T>(self, value: T) -> Float
    where
        Float: Assign<T>,
    {
        Float::with_val(self.bits, value)
    }

    pub fn pi(self) -> Float {
        Float::with_val(self.bits, Constant::Pi)
    }

    pub fn euler_gamma(self) -> Float {
        Float::with_val(self.bits, Constant::Euler)
    }
}

impl Default for Precision {
    fn default() -> Self {
        Precision { bits: DEFAULT_BITS }
    }
}

/// `((x))`: zero at integers, `1/2 - {x}` elsewhere. Exact.
pub fn sawtooth(x: &Fraction) -> Fraction {
    if x.is_integer() {
        return Fraction::zero();
    }
    let half = Rational::from((1, 2));
    Fraction::from(half - x.fract().into_rational())
}

/// Numerator of `((n/d))` over the common denominator `2d`.
#[inline]
pub fn sawtooth_num(n: i128, d: u64) -> i128 {
    let r = n.rem_euclid(d as i128);
    if r == 0 {
        0
    } else {
        d as i128 - 2 * r
    }
}

/// `min(log x, 0)` for `x > 0`.
pub fn log_minus(x: &Float) -> Result<Float> {
    if x.is_nan() || *x <= 0 {
        return Err(domain(format!("log⁻ needs a positive argument, got {x}")));
    }
    let l = x.clone().ln();
    Ok(if l.is_sign_positive() {
        Float::new(x.prec())
    } else {
        l
    })
}

/// `cot(πx)` for non-integer `x`.
pub fn cot_pi(x: &Fraction, prec: Precision) -> Result<Float> {
    let r = x.fract();
    if r.is_integer() {
        return Err(Error::Pole(format!("cot(π·{x})")));
    }
    // fold onto (0, 1/2] so the argument keeps full relative accuracy
    let half = Fraction::new(1, 2).unwrap();
    let (arg, negate) = if r > half {
        (Fraction::from(Rational::from(1) - r.into_rational()), true)
    } else {
        (r, false)
    };
    let wp = prec.working();
    let theta = Float::with_val(wp, Constant::Pi) * arg.as_rational();
    let c = Float::with_val(prec.bits(), theta.cot());
    Ok(if negate { -c } else { c })
}

/// `cot(π(start + i·step))` for `i = 0..count`, by complex rotation re-anchored
/// every few steps. Every argument must be a non-integer.
pub fn cot_pi_progression(
    start: &Fraction,
    step: &Fraction,
    count: usize,
    prec: Precision,
) -> Result<Vec<Float>> {
    const ANCHOR_EVERY: usize = 32;
    let spread = step.denom().significant_bits() + start.denom().significant_bits();
    let wp = prec.working() + spread + usize::BITS - count.leading_zeros();
    let pi = Float::with_val(wp, Constant::Pi);
    let (rot_s, rot_c) = Float::with_val(wp, &pi * step.as_rational()).sin_cos(Float::new(wp));
    let mut out = Vec::with_capacity(count);
    let (mut s, mut c) = (Float::new(wp), Float::new(wp));
    let mut arg = start.as_rational().clone();
    for i in 0..count {
        if i % ANCHOR_EVERY == 0 {
            let theta = Float::with_val(wp, &pi * &arg);
            (s, c) = theta.sin_cos(Float::new(wp));
        } else {
            let c_next = (&c * &rot_c - &s * &rot_s).complete(wp);
            s = (&s * &rot_c + &c * &rot_s).complete(wp);
            c = c_next;
        }
        if *arg.denom() == 1 {
            return Err(Error::Pole(format!("cot(π·{arg})")));
        }
        out.push(Float::with_val(prec.bits(), &c / &s));
        arg += step.as_rational();
    }
    Ok(out)
}

/// Table of `cot(πj/k)` for all residues `j mod k`.
#[derive(Clone, Debug)]
pub struct CotTable {
    k: u64,
    half: Vec<Float>,
}

impl CotTable {
    pub fn new(k: u64, prec: Precision) -> Result<Self> {
        if k < 2 {
            return Err(domain(format!("cotangent table needs k >= 2, got {k}")));
        }
        let unit = Fraction::new(1, k).unwrap();
        let mut half = cot_pi_progression(&unit, &unit, (k / 2) as usize, prec)?;
        if k % 2 == 0 {
            // cot(π/2) is exactly zero
            half[(k / 2) as usize - 1] = prec.zero();
        }
        Ok(CotTable { k, half })
    }

    pub fn modulus(&self) -> u64 {
        self.k
    }

    /// `cot(πj/k)`; `None` at the poles `j ≡ 0`.
    pub fn get(&self, j: i128) -> Option<Float> {
        let r = j.rem_euclid(self.k as i128) as u64;
        self.signed_ref(r).map(|(v, neg)| if neg { -v.clone() } else { v.clone() })
    }

    /// Borrowed entry for residue `r` in `[0, k)` and whether it must be negated.
    #[inline]
    pub fn signed_ref(&self, r: u64) -> Option<(&Float, bool)> {
        if r == 0 {
            None
        } else if 2 * r <= self.k {
            Some((&self.half[r as usize - 1], false))
        } else {
            Some((&self.half[(self.k - r) as usize - 1], true))
        }
    }
}

/// Table of `cos(2πj/k)` with exact mirror symmetry `cos[j] == cos[k-j]`.
#[derive(Clone, Debug)]
pub struct CosTable {
    k: u64,
    values: Vec<Float>,
}

impl CosTable {
    pub fn new(k: u64, prec: Precision) -> Self {
        let wp = prec.working();
        let two_pi = Float::with_val(wp, Constant::Pi) * 2u32;
        let mut values = vec![Float::new(prec.bits()); k as usize];
        for j in 0..=(k / 2) {
            let theta = Float::with_val(wp, &two_pi * j) / k;
            let c = Float::with_val(prec.bits(), theta.cos());
            if j > 0 {
                values[(k - j) as usize] = c.clone();
            }
            values[j as usize] = c;
        }
        CosTable { k, values }
    }

    #[inline]
    pub fn get(&self, j: i128) -> &Float {
        &self.values[j.rem_euclid(self.k as i128) as usize]
    }
}

/// Neumaier-compensated accumulator.
#[derive(Clone, Debug)]
pub struct CompensatedSum {
    sum: Float,
    comp: Float,
    tmp: Float,
    diff: Float,
}

impl CompensatedSum {
    pub fn new(prec: Precision) -> Self {
        CompensatedSum {
            sum: prec.zero(),
            comp: prec.zero(),
            tmp: prec.zero(),
            diff: prec.zero(),
        }
    }

    pub fn add(&mut self, x: &Float) {
        // t = sum + x; comp += (larger - t) + smaller
        self.tmp.assign(&self.sum + x);
        if self.sum.cmp_abs(x).map_or(true, |o| o.is_ge()) {
            self.diff.assign(&self.sum - &self.tmp);
            self.diff += x;
        } else {
            self.diff.assign(x - &self.tmp);
            self.diff += &self.sum;
        }
        self.comp += &self.diff;
        std::mem::swap(&mut self.sum, &mut self.tmp);
    }

    pub fn value(&self) -> Float {
        Float::with_val(self.sum.prec(), &self.sum + &self.comp)
    }
}

/// Even-index Bernoulli numbers `B_0, B_2, B_4, ...`, computed exactly and cached.
fn bernoulli_even(count: usize) -> Vec<Rational> {
    static CACHE: OnceLock<Mutex<Vec<Rational>>> = OnceLock::new();
    let mut all = CACHE.get_or_init(|| Mutex::new(Vec::new())).lock().unwrap();
    // all[n] holds B_n for every n (odd ones above 1 are zero)
    let needed = 2 * count;
    if all.len() <= needed {
        let mut binom_row: Vec<Integer> = vec![Integer::from(1)];
        // rebuild binomial rows incrementally from scratch; cheap next to the big-rational sums
        for m in 0..=needed {
            if m > 0 {
                let mut next = vec![Integer::from(1); m + 1];
                for j in 1..m {
                    next[j] = Integer::from(&binom_row[j - 1] + &binom_row[j]);
                }
                binom_row = next;
            }
            if m < all.len() {
                continue;
            }
            if m == 0 {
                all.push(Rational::from(1));
                continue;
            }
            if m % 2 == 1 && m > 1 {
                all.push(Rational::new());
                continue;
            }
            // sum_{j=0}^{m} C(m+1, j) B_j = 0, with C(m+1, j) = row_m[j-1] + row_m[j]
            let mut acc = Rational::new();
            for (j, b) in all.iter().enumerate().take(m) {
                if *b == 0 {
                    continue;
                }
                let c = if j == 0 {
                    Integer::from(1)
                } else {
                    Integer::from(&binom_row[j - 1] + &binom_row[j])
                };
                acc += Rational::from(b * &c);
            }
            all.push(-acc / Integer::from(m + 1));
        }
    }
    (0..count).map(|n| all[2 * n].clone()).collect()
}

struct DigammaSeries {
    shift_to: u32,
    /// `B_{2n} / (2n)` for `n = 1..`.
    coeffs: Vec<Float>,
}

fn digamma_series(wp: u32) -> Arc<DigammaSeries> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<DigammaSeries>>>> = OnceLock::new();
    let mut cache = CACHE.get_or_init(Default::default).lock().unwrap();
    cache
        .entry(wp)
        .or_insert_with(|| {
            // the smallest asymptotic term at z is about e^{-2πz}
            let shift_to = wp / 8 + 4;
            let terms = (std::f64::consts::PI * f64::from(shift_to)).ceil() as usize + 2;
            let coeffs = bernoulli_even(terms + 1)
                .into_iter()
                .enumerate()
                .skip(1)
                .map(|(n, b)| Float::with_val(wp, b / Integer::from(2 * n)))
                .collect();
            Arc::new(DigammaSeries { shift_to, coeffs })
        })
        .clone()
}

/// Digamma `ψ(x)` for `x > 0`: the recurrence `ψ(x) = ψ(x+1) - 1/x` raises the
/// argument past a precision-dependent threshold, where the asymptotic series
/// `ln z - 1/(2z) - Σ B_{2n} / (2n z^{2n})` is summed until its terms drop
/// below the working precision.
pub fn digamma(x: &Float, prec: Precision) -> Result<Float> {
    if x.is_nan() || *x <= 0 {
        return Err(domain(format!("digamma is only provided for x > 0, got {x}")));
    }
    if x.is_infinite() {
        return Ok(Float::with_val(prec.bits(), rug::float::Special::Infinity));
    }
    let wp = prec.working();
    let series = digamma_series(wp);
    let mut z = Float::with_val(wp, x);
    let mut shift = Float::new(wp);
    while z < series.shift_to {
        shift += Float::with_val(wp, z.recip_ref());
        z += 1u32;
    }
    let inv_z2 = Float::with_val(wp, z.recip_ref()).square();
    let mut acc = Float::with_val(wp, z.ln_ref());
    acc -= Float::with_val(wp, z.recip_ref()) / 2u32;
    let eps = Float::with_val(wp, 1u32) >> (wp as i32);
    let mut power = inv_z2.clone();
    let mut converged = false;
    for c in &series.coeffs {
        let term = Float::with_val(wp, c * &power);
        acc -= &term;
        if term.abs() <= eps {
            converged = true;
            break;
        }
        power *= &inv_z2;
    }
    debug_assert!(converged, "asymptotic digamma series did not settle at z = {z}");
    acc -= shift;
    Ok(Float::with_val(prec.bits(), acc))
}

/// `ψ(x)` at an exact rational argument.
pub fn digamma_at(x: &Fraction, prec: Precision) -> Result<Float> {
    let wp = prec.working();
    digamma(&Float::with_val(wp, x.as_rational()), prec)
}
