//! Direct O(k) evaluation of the finite cotangent sums, and the cotangent DFT.

use std::fmt;
use std::sync::Arc;

use rug::{Assign, Complex, Float, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::numtheory::{mod_inverse_u64, require_coprime, Fraction};
use crate::piecewise::PiecewisePoly;
use crate::specialfn::{sawtooth_num, CompensatedSum, CotTable, Precision};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Direct,
    ClosedForm,
    Truncated,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Direct => "direct",
            Method::ClosedForm => "closed_form",
            Method::Truncated => "truncated",
        })
    }
}

/// A real result together with the method that produced it and a claimed
/// bound on its absolute error.
#[derive(Clone, Debug, PartialEq)]
pub struct SumValue {
    pub value: Float,
    pub method: Method,
    pub err_estimate: Float,
}

impl SumValue {
    pub fn to_f64(&self) -> f64 {
        self.value.to_f64()
    }
}

fn check_pair(h: i64, k: u64) -> Result<()> {
    if k < 2 {
        return Err(domain(format!("denominator must be at least 2, got {k}")));
    }
    require_coprime(h, k)
}

/// Rounding budget for a direct sum whose terms have total magnitude `mass`.
fn direct_error(mass: f64, prec: Precision) -> Float {
    prec.tolerance(4) * mass
}

/// `s(h, k) = Σ_{m=1}^{k-1} ((m/k)) ((mh/k))`, exactly.
pub fn dedekind_exact(h: i64, k: u64) -> Result<Fraction> {
    require_coprime(h, k)?;
    let kk = k as i128;
    let hk = (h as i128).rem_euclid(kk);
    let mut acc: i128 = 0;
    let mut r: i128 = 0;
    for m in 1..kk {
        r += hk;
        if r >= kk {
            r -= kk;
        }
        acc += (kk - 2 * m) * sawtooth_num(r, k);
    }
    Ok(Fraction::from(Rational::from((acc, 4 * kk * kk))))
}

/// `(1/4k) Σ_{m=1}^{k-1} cot(πm/k) cot(πmh/k)`.
pub fn dedekind_cot(h: i64, k: u64, prec: Precision) -> Result<SumValue> {
    check_pair(h, k)?;
    let table = CotTable::new(k, prec)?;
    let mut sum = CompensatedSum::new(prec);
    let mut mass = 0f64;
    let mut term = prec.zero();
    let hk = h.rem_euclid(k as i64) as u64;
    let mut r = 0u64;
    for m in 1..k {
        r = (r + hk) % k;
        let (a, na) = table.signed_ref(m).unwrap();
        let (b, nb) = table.signed_ref(r).unwrap();
        term.assign(a * b);
        if na != nb {
            term = -term;
        }
        sum.add(&term);
        mass += term.to_f64().abs();
    }
    let scale = 4 * k;
    Ok(SumValue {
        value: sum.value() / scale,
        method: Method::Direct,
        err_estimate: direct_error(mass, prec) / scale,
    })
}

/// `V(h/k) = Σ_{m=1}^{k-1} (m/k) cot(π m h̄ / k)`.
pub fn vasyunin(h: i64, k: u64, prec: Precision) -> Result<SumValue> {
    check_pair(h, k)?;
    let hbar = mod_inverse_u64(h, k)?;
    let table = CotTable::new(k, prec)?;
    let mut sum = CompensatedSum::new(prec);
    let mut mass = 0f64;
    let mut term = prec.zero();
    let mut r = 0u64;
    for m in 1..k {
        r = (r + hbar) % k;
        let (c, neg) = table.signed_ref(r).unwrap();
        term.assign(c * m);
        if neg {
            term = -term;
        }
        sum.add(&term);
        mass += term.to_f64().abs();
    }
    Ok(SumValue {
        value: sum.value() / k,
        method: Method::Direct,
        err_estimate: direct_error(mass, prec) / k,
    })
}

fn partial_prefix(
    h: i64,
    k: u64,
    upto: u64,
    table: &CotTable,
    prec: Precision,
    mut emit: impl FnMut(u64, &CompensatedSum),
) {
    let hk = h.rem_euclid(k as i64) as u64;
    let mut sum = CompensatedSum::new(prec);
    let mut term = prec.zero();
    let mut r = 0u64;
    for m in 1..=upto {
        r = (r + hk) % k;
        let (c, neg) = table.signed_ref(r).unwrap();
        term.assign(c);
        if neg {
            term = -term;
        }
        sum.add(&term);
        emit(m, &sum);
    }
}

/// `C_ℓ(h/k) = (1/k) Σ_{m=1}^{ℓ} cot(πmh/k)` for `1 <= ℓ < k`.
pub fn partial_cot(h: i64, k: u64, l: u64, prec: Precision) -> Result<SumValue> {
    check_pair(h, k)?;
    if l == 0 || l >= k {
        return Err(domain(format!("ℓ = {l} must lie in [1, {}]", k - 1)));
    }
    let table = CotTable::new(k, prec)?;
    let mut value = prec.zero();
    partial_prefix(h, k, l, &table, prec, |_, s| value = s.value());
    let bound = table.get(1).unwrap().to_f64() * l as f64;
    Ok(SumValue {
        value: value / k,
        method: Method::Direct,
        err_estimate: direct_error(bound, prec) / k,
    })
}

/// `C_ℓ(h/k)` for every `ℓ = 1..k-1`; entry `ℓ - 1` is bit-identical to
/// [`partial_cot`] at `ℓ`.
pub fn partial_cot_profile(h: i64, k: u64, prec: Precision) -> Result<Vec<Float>> {
    check_pair(h, k)?;
    let table = CotTable::new(k, prec)?;
    Ok(partial_cot_profile_with(h, k, &table, prec))
}

pub(crate) fn partial_cot_profile_with(h: i64, k: u64, table: &CotTable, prec: Precision) -> Vec<Float> {
    let mut out = Vec::with_capacity(k as usize - 1);
    partial_prefix(h, k, k - 1, table, prec, |_, s| out.push(s.value() / k));
    out
}

/// Reusable pieces of `S_f(h/k)` for a fixed `f` and `k`: the grid values
/// `f(m/k)` and the cotangent table.
#[derive(Clone, Debug)]
pub struct SfKernel {
    k: u64,
    values: Vec<Float>,
    table: Arc<CotTable>,
    prec: Precision,
}

impl SfKernel {
    pub fn new(f: &PiecewisePoly, k: u64, prec: Precision) -> Result<Self> {
        let table = Arc::new(CotTable::new(k, prec)?);
        Ok(Self::with_table(f, table, prec))
    }

    pub fn with_table(f: &PiecewisePoly, table: Arc<CotTable>, prec: Precision) -> Self {
        let k = table.modulus();
        SfKernel {
            k,
            values: f.grid_values(k, prec),
            table,
            prec,
        }
    }

    pub fn modulus(&self) -> u64 {
        self.k
    }

    /// `S_f(h/k) = (1/k) Σ_{m=1}^{k-1} f(m/k) cot(πmh/k)`.
    pub fn eval(&self, h: i64) -> Result<SumValue> {
        let k = self.k;
        check_pair(h, k)?;
        let hk = h.rem_euclid(k as i64) as u64;
        let mut sum = CompensatedSum::new(self.prec);
        let mut mass = 0f64;
        let mut term = self.prec.zero();
        let mut r = 0u64;
        for m in 1..k {
            r += hk;
            if r >= k {
                r -= k;
            }
            let (c, neg) = self.table.signed_ref(r).unwrap();
            term.assign(&self.values[m as usize] * c);
            if neg {
                term = -term;
            }
            sum.add(&term);
            mass += term.to_f64().abs();
        }
        Ok(SumValue {
            value: sum.value() / k,
            method: Method::Direct,
            err_estimate: direct_error(mass, self.prec) / k,
        })
    }
}

/// `S_f(h/k) = (1/k) Σ_{m=1}^{k-1} f(m/k) cot(πmh/k)`, by direct summation.
pub fn s_f(f: &PiecewisePoly, h: i64, k: u64, prec: Precision) -> Result<SumValue> {
    check_pair(h, k)?;
    SfKernel::new(f, k, prec)?.eval(h)
}

/// `Σ_{m=1}^{k-1} cot(πmh/k) e(-nm/k)`, summed directly.
pub fn cot_dft(h: i64, k: u64, n: i64, prec: Precision) -> Result<Complex> {
    check_pair(h, k)?;
    let table = CotTable::new(k, prec)?;
    let wp = prec.working();
    let two_pi = Float::with_val(wp, rug::float::Constant::Pi) * 2u32;
    let hk = h.rem_euclid(k as i64) as u64;
    let nk = n.rem_euclid(k as i64) as u64;
    let (mut re, mut im) = (CompensatedSum::new(prec), CompensatedSum::new(prec));
    let mut term = prec.zero();
    for m in 1..k {
        let (c, neg) = table.signed_ref(m * hk % k).unwrap();
        let j = (m as u128 * nk as u128 % k as u128) as u64;
        let theta = Float::with_val(wp, &two_pi * j) / k;
        let (s, co) = theta.sin_cos(Float::new(wp));
        let c = if neg { -c.clone() } else { c.clone() };
        term.assign(&c * &co);
        re.add(&term);
        term.assign(&c * &s);
        im.add(&-term.clone());
    }
    Ok(Complex::with_val(prec.bits(), (re.value(), im.value())))
}

/// The closed form `-2ik ((n h̄ / k))` of [`cot_dft`].
pub fn cot_dft_closed(h: i64, k: u64, n: i64, prec: Precision) -> Result<Complex> {
    check_pair(h, k)?;
    let hbar = mod_inverse_u64(h, k)? as i128;
    // -2ik · num/(2k) = -i · num
    let num = sawtooth_num(n as i128 * hbar, k);
    Ok(Complex::with_val(prec.bits(), (0, -num)))
}
