//! The conditionally convergent series
//!
//! ```text
//! V₁(h/k, ℓ/k) = 2 Σ_{m≥1} cos(2πmℓ/k) ((mh/k)) / m
//! V₂(a, β)     = Σ_{m∈Z, |m+β|≥1} ((a|m+β|)) / |m+β|     (terms m and -m paired)
//! ```
//!
//! Each has a slow truncated evaluation and an exact finite closed form.
//! For 1-periodic coefficients `c` with zero mean over a period `k`,
//! `Σ_{m≥1} c_m / m = -(1/k) Σ_{r=1}^{k} c_r ψ(r/k)`, which gives `V₁` in terms of
//! digamma values; `V₂` reduces by the reflection formula to a cotangent sum.

use rug::float::Constant;
use rug::{Assign, Float, Integer, Rational};

use crate::error::{domain, Error, Result};
use crate::numtheory::{gcd_u64, require_coprime, Fraction};
use crate::specialfn::{cot_pi_progression, digamma, sawtooth_num, CosTable, Precision};
use crate::sums::{Method, SumValue};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct V1Args {
    pub h: i64,
    pub k: u64,
    /// Taken modulo `k`.
    pub l: i64,
}

impl V1Args {
    pub fn new(h: i64, k: u64, l: i64) -> Result<Self> {
        if k < 2 {
            return Err(domain(format!("denominator must be at least 2, got {k}")));
        }
        require_coprime(h, k)?;
        Ok(V1Args { h, k, l })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct V2Args {
    /// In `(0, 1]`.
    pub a: Fraction,
    /// Nonnegative; values `>= 1` are allowed.
    pub beta: Fraction,
}

impl V2Args {
    pub fn new(a: Fraction, beta: Fraction) -> Result<Self> {
        if *a.numer() <= 0 || a.numer() > a.denom() {
            return Err(domain(format!("first argument {a} must lie in (0, 1]")));
        }
        if *beta.numer() < 0 {
            return Err(domain(format!("β = {beta} must be nonnegative")));
        }
        Ok(V2Args { a, beta })
    }

    fn small_parts(&self) -> Result<(i128, i128, i128, i128)> {
        let get = |x: &Integer| -> Result<i128> {
            x.to_i64()
                .map(i128::from)
                .ok_or_else(|| domain("V₂ arguments must have machine-size numerators and denominators"))
        };
        Ok((
            get(self.a.numer())?,
            get(self.a.denom())?,
            get(self.beta.numer())?,
            get(self.beta.denom())?,
        ))
    }
}

/// Per-denominator data for `V₁`: the digamma differences
/// `ψ(r/k) - ψ(1 - r/k)` for `1 <= r < k/2` and a mirrored cosine table.
#[derive(Clone, Debug)]
pub struct V1Kernel {
    k: u64,
    prec: Precision,
    diff: Vec<Float>,
    cos: CosTable,
}

/// `((rh/k)) (ψ(r/k) - ψ(1 - r/k))` for one numerator `h`, ready to be paired
/// with cosines.
#[derive(Clone, Debug)]
pub struct V1Weights {
    h: i64,
    w: Vec<Float>,
    mass: f64,
}

impl V1Kernel {
    pub fn new(k: u64, prec: Precision) -> Result<Self> {
        if k < 2 {
            return Err(domain(format!("denominator must be at least 2, got {k}")));
        }
        let wp = Precision::new(prec.working())?;
        let diff = (1..k.div_ceil(2))
            .map(|r| {
                let x = Float::with_val(wp.working(), r) / k;
                let y = Float::with_val(wp.working(), k - r) / k;
                Ok(digamma(&x, wp)? - digamma(&y, wp)?)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(V1Kernel {
            k,
            prec,
            diff,
            cos: CosTable::new(k, wp),
        })
    }

    pub fn modulus(&self) -> u64 {
        self.k
    }

    pub fn weights(&self, h: i64) -> Result<V1Weights> {
        require_coprime(h, self.k)?;
        let wp = self.prec.working();
        let mut mass = 0f64;
        let w = self
            .diff
            .iter()
            .enumerate()
            .map(|(i, d)| {
                let s = sawtooth_num((i as i128 + 1) * h as i128, self.k);
                let v = Float::with_val(wp, d * s);
                mass += v.to_f64().abs();
                v
            })
            .collect();
        Ok(V1Weights { h, w, mass })
    }

    /// `V₁(h/k, ℓ/k)` from precomputed weights.
    pub fn eval_weights(&self, weights: &V1Weights, l: i64) -> SumValue {
        // V₁ = -(2/k) Σ_{r<k} cos(2πrℓ/k) ((rh/k)) ψ(r/k); pairing r with k - r
        // and writing ((rh/k)) = s_r / 2k leaves -(1/k²) Σ_{r<k/2} cos · s_r · diff_r.
        let wp = self.prec.working();
        let mut acc = Float::new(wp);
        let mut term = Float::new(wp);
        let lk = l.rem_euclid(self.k as i64) as u64;
        let mut idx = 0u64;
        for w in &weights.w {
            idx = (idx + lk) % self.k;
            term.assign(self.cos.get(idx as i128) * w);
            acc += &term;
        }
        let k2 = Integer::from(self.k) * self.k;
        let value = Float::with_val(self.prec.bits(), -acc / &k2);
        let err = self.prec.tolerance(8) * (weights.mass / self.k as f64 / self.k as f64 + 1.0);
        SumValue {
            value,
            method: Method::ClosedForm,
            err_estimate: err,
        }
    }

    pub fn eval(&self, h: i64, l: i64) -> Result<SumValue> {
        Ok(self.eval_weights(&self.weights(h)?, l))
    }
}

impl V1Weights {
    pub fn numerator(&self) -> i64 {
        self.h
    }
}

/// `V₁(h/k, ℓ/k)` by the digamma closed form.
pub fn v1_closed(args: V1Args, prec: Precision) -> Result<SumValue> {
    let args = V1Args::new(args.h, args.k, args.l)?;
    V1Kernel::new(args.k, prec)?.eval(args.h, args.l)
}

/// Harmonic block sums `H_r = Σ_{j<M} 1/(jk + r)` for `r = 1..k-1`.
#[derive(Clone, Debug)]
pub struct TruncationKernel {
    k: u64,
    blocks: u64,
    prec: Precision,
    harmonic: Vec<Float>,
}

impl TruncationKernel {
    pub fn new(k: u64, blocks: u64, prec: Precision) -> Result<Self> {
        if k < 2 {
            return Err(domain(format!("denominator must be at least 2, got {k}")));
        }
        if blocks == 0 {
            return Err(domain("need at least one block"));
        }
        let wp = prec.working() + 16;
        let harmonic = (1..k)
            .map(|r| {
                let mut s = Float::new(wp);
                for j in (0..blocks).rev() {
                    s += Float::with_val(wp, j * k + r).recip();
                }
                s
            })
            .collect();
        Ok(TruncationKernel {
            k,
            blocks,
            prec,
            harmonic,
        })
    }

    /// The partial sum `2 Σ_{m=1}^{Mk} cos(2πmℓ/k) ((mh/k)) / m`.
    pub fn eval(&self, h: i64, l: i64) -> Result<SumValue> {
        require_coprime(h, self.k)?;
        let wp = self.prec.working() + 16;
        let k = self.k;
        let two_pi = Float::with_val(wp, Constant::Pi) * 2u32;
        let lk = l.rem_euclid(k as i64) as u64;
        let mut acc = Float::new(wp);
        let mut partial = Float::new(wp);
        let mut peak = Float::new(wp);
        for r in 1..k {
            // c_r = 2 cos(2πrℓ/k) ((rh/k)) = cos(2πrℓ/k) s_r / k
            let theta = Float::with_val(wp, &two_pi * ((r * lk) % k)) / k;
            let s = sawtooth_num(r as i128 * h as i128, k);
            let c = theta.cos() * s / k;
            acc += Float::with_val(wp, &c * &self.harmonic[r as usize - 1]);
            partial += &c;
            if Float::with_val(wp, partial.abs_ref()) > peak {
                peak.assign(partial.abs_ref());
            }
        }
        // Abel summation over whole periods: |tail| <= max|partial sums| / (Mk + 1)
        let tail = peak / (self.blocks * k + 1);
        let err = tail + self.prec.tolerance(8);
        Ok(SumValue {
            value: Float::with_val(self.prec.bits(), acc),
            method: Method::Truncated,
            err_estimate: Float::with_val(self.prec.bits(), err),
        })
    }
}

/// `V₁(h/k, ℓ/k)` summed over the first `blocks` full periods of `k` terms.
pub fn v1_truncated(args: V1Args, blocks: u64, prec: Precision) -> Result<SumValue> {
    let args = V1Args::new(args.h, args.k, args.l)?;
    TruncationKernel::new(args.k, blocks, prec)?.eval(args.h, args.l)
}

/// `V₂(a, β)` summed literally: terms `m` and `-m` paired, in blocks of the
/// coefficient period (the denominator of `a`), truncated after `blocks` blocks.
pub fn v2_eval(args: &V2Args, blocks: u64, prec: Precision) -> Result<SumValue> {
    let (c, d, p, q) = args.small_parts()?;
    let dq = (d * q) as u64;
    let n_end = blocks as i128 * d;
    if blocks == 0 || n_end <= p.div_euclid(q) + 2 {
        return Err(Error::Precondition(format!(
            "{blocks} blocks of length {d} do not reach past β = {}",
            args.beta
        )));
    }
    let wp = prec.working() + 16;
    let mut acc = Float::new(wp);
    let mut term = Float::new(wp);
    // w at |x| = t/q: ((a t/q)) / (t/q) = s / (2 d t) with s = sawtooth numerator over 2dq
    let mut add = |t: i128, acc: &mut Float| {
        if t >= q {
            let s = sawtooth_num(c * t, dq);
            if s != 0 {
                term.assign(s);
                term /= Integer::from(2 * d * t);
                *acc += &term;
            }
        }
    };
    for n in 0..n_end {
        add(n * q + p, &mut acc);
        if n > 0 {
            add((n * q - p).abs(), &mut acc);
        }
    }
    // tail: Σ_{n>=N} e_n/n is bounded by P/N, with e_n the paired numerators of one
    // period and P their largest partial sum, and the shifts ±β cost at most β/(N-1-β)
    let mut partial: i128 = 0;
    let mut peak: i128 = 0;
    for n in n_end..n_end + d {
        partial += sawtooth_num(c * (n * q + p), dq) + sawtooth_num(c * (n * q - p), dq);
        peak = peak.max(partial.abs());
    }
    let n0 = Float::with_val(wp, n_end);
    let beta = Float::with_val(wp, args.beta.as_rational());
    let abel = Float::with_val(wp, peak) / Integer::from(2 * dq as i128) / &n0;
    let shift = Float::with_val(wp, &beta / (n0 - 1u32 - &beta));
    let err = abel + shift + prec.tolerance(8);
    Ok(SumValue {
        value: Float::with_val(prec.bits(), acc),
        method: Method::Truncated,
        err_estimate: Float::with_val(prec.bits(), err),
    })
}

/// `V₂(a, β)` in closed form. With `a = c/d` and `b = {β}`,
///
/// ```text
/// V₂ = (π/d) Σ_{0<=r<d, r+b>0} ((c(r+b)/d)) cot(π(r+b)/d)
///      - [b ≠ 0] ( ((cb/d))/b + ((c(1-b)/d))/(1-b) )
/// ```
///
/// The value depends on `β` only through `{β}`.
pub fn v2_closed(args: &V2Args, prec: Precision) -> Result<SumValue> {
    let (c, d, p, q) = args.small_parts()?;
    let pf = p.rem_euclid(q);
    let dq = (d * q) as u64;
    let wp = Precision::new(prec.working())?;
    let (first, count) = if pf == 0 { (1, d - 1) } else { (0, d) };
    let start = Fraction::new((first * q + pf) as i64, dq)?;
    let step = Fraction::new(1, d as u64)?;
    let cots = cot_pi_progression(&start, &step, count as usize, wp)?;
    let mut acc = Float::new(wp.bits());
    let mut mass = 0f64;
    let mut term = Float::new(wp.bits());
    for (i, cot) in cots.iter().enumerate() {
        let s = sawtooth_num(c * ((first + i as i128) * q + pf), dq);
        if s != 0 {
            term.assign(cot * s);
            mass += term.to_f64().abs();
            acc += &term;
        }
    }
    // sawtooth numerators are over 2dq
    let pi = Float::with_val(wp.bits(), Constant::Pi);
    let mut value = acc * pi / Integer::from(2 * d * dq as i128);
    if pf != 0 {
        // excluded terms at |x| = b and |x| = 1 - b
        for t in [pf, q - pf] {
            let s = sawtooth_num(c * t, dq);
            value -= Float::with_val(wp.bits(), Rational::from((s * q, 2 * dq as i128 * t)));
        }
    }
    let err = prec.tolerance(8) * (mass / (2 * dq) as f64 * std::f64::consts::PI / d as f64 + 1.0);
    Ok(SumValue {
        value: Float::with_val(prec.bits(), value),
        method: Method::ClosedForm,
        err_estimate: err,
    })
}

/// The pieces of the second series' argument: `k₁ = k mod h`, `ℓ' = ℓ mod h`
/// and `β = ℓ'/k₁`, with `β = 0` when `k | ℓ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BetaParts {
    pub beta: Fraction,
    pub k1: u64,
    pub l_prime: u64,
}

pub fn beta_of(h: u64, k: u64, l: i64) -> Result<BetaParts> {
    if h < 2 {
        return Err(domain(format!("β needs h >= 2, got h = {h}")));
    }
    if gcd_u64(h, k) != 1 {
        return Err(Error::NotCoprime(h.to_string(), k.to_string()));
    }
    let k1 = k % h;
    let l_prime = l.rem_euclid(h as i64) as u64;
    let beta = if l.rem_euclid(k as i64) == 0 {
        Fraction::zero()
    } else {
        Fraction::new(l_prime, k1)?
    };
    Ok(BetaParts { beta, k1, l_prime })
}
