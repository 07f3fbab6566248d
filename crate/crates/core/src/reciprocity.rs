//! Reciprocity relations between `V₁`, `V₂` and the partial cotangent sums,
//! and the continued-fraction bounds built from continuants.

use std::collections::HashMap;

use rug::float::Constant;
use rug::{Float, Integer};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{domain, Error, Result};
use crate::numtheory::{continued_fraction, gcd_u64, mod_inverse_u64, Fraction};
use crate::piecewise::PiecewisePoly;
use crate::specialfn::{log_minus, CotTable, Precision};
use crate::sums::partial_cot_profile_with;
use crate::vseries::{beta_of, v2_closed, V1Kernel, V1Weights, V2Args};

/// Extra data attached to a report: the reduced quantities a relation used.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ReportMeta {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k1: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l_prime: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<Fraction>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h1: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l1: Option<u64>,
}

/// Both sides of a reciprocity relation: `residual = lhs - main`, to be read
/// against `scale`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReciprocityReport {
    pub h: u64,
    pub k: u64,
    pub l: u64,
    pub lhs: Float,
    pub main: Float,
    pub residual: Float,
    pub scale: Float,
    pub meta: ReportMeta,
}

impl ReciprocityReport {
    /// `|residual| / scale`.
    pub fn ratio(&self) -> f64 {
        (self.residual.to_f64() / self.scale.to_f64()).abs()
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "h": self.h,
            "k": self.k,
            "l": self.l,
            "lhs": self.lhs.to_f64(),
            "main": self.main.to_f64(),
            "residual": self.residual.to_f64(),
            "scale": self.scale.to_f64(),
        });
        if let Value::Object(extra) = serde_json::to_value(&self.meta).unwrap() {
            v.as_object_mut().unwrap().extend(extra);
        }
        v
    }
}

fn ln(bits: u32, x: Float) -> Float {
    Float::with_val(bits, x.ln())
}

/// The predicted main term of the `V₁ + V₂` relation: for `k ∤ ℓ`, with `α = ℓ/k`,
///
/// ```text
/// (1/h)(log⁻({α}k/h) + log⁻({-α}k/h) - log{α} - log{-α}) - (1/k) log(k/h)
/// ```
///
/// and `(1/h - 1/k) log(k/h)` when `k | ℓ`.
pub fn prop_mp_main_term(h: u64, k: u64, l: i64, prec: Precision) -> Result<Float> {
    let wp = prec.working();
    let log_kh = ln(wp, Float::with_val(wp, k) / h);
    let r = l.rem_euclid(k as i64) as u64;
    let main = if r == 0 {
        let c = Float::with_val(wp, h).recip() - Float::with_val(wp, k).recip();
        c * log_kh
    } else {
        let alpha = Float::with_val(wp, r) / k;
        let co_alpha = Float::with_val(wp, k - r) / k;
        let kh = Float::with_val(wp, k) / h;
        let mut bracket = log_minus(&Float::with_val(wp, &alpha * &kh))?;
        bracket += log_minus(&Float::with_val(wp, &co_alpha * &kh))?;
        bracket -= ln(wp, alpha);
        bracket -= ln(wp, co_alpha);
        bracket / h - log_kh / k
    };
    Ok(Float::with_val(prec.bits(), main))
}

/// Evaluates the `V₁ + V₂` relation for one `(h, k)` and many `ℓ`, sharing the
/// `V₁` weights and the `V₂` values across `ℓ` with the same residue mod `h`.
pub struct PropMpPair<'a> {
    h: u64,
    k: u64,
    kernel: &'a V1Kernel,
    weights: V1Weights,
    v2: HashMap<(u64, bool), Float>,
    prec: Precision,
}

impl<'a> PropMpPair<'a> {
    pub fn new(kernel: &'a V1Kernel, h: u64, prec: Precision) -> Result<Self> {
        let k = kernel.modulus();
        if h == 0 {
            return Err(domain("h must be positive"));
        }
        let weights = kernel.weights(h as i64)?;
        Ok(PropMpPair {
            h,
            k,
            kernel,
            weights,
            v2: HashMap::new(),
            prec,
        })
    }

    pub fn report(&mut self, l: u64) -> Result<ReciprocityReport> {
        let (h, k, prec) = (self.h, self.k, self.prec);
        if l == 0 {
            return Err(domain("ℓ must be positive"));
        }
        let v1 = self.kernel.eval_weights(&self.weights, l as i64).value;
        let mut lhs = Float::with_val(prec.working(), &v1 / h);
        let mut meta = ReportMeta::default();
        if h >= 2 {
            let parts = beta_of(h, k, l as i64)?;
            let key = (parts.l_prime, l % k == 0);
            let v2 = match self.v2.get(&key) {
                Some(v) => v.clone(),
                None => {
                    let args = V2Args::new(Fraction::new(parts.k1, h)?, parts.beta.clone())?;
                    let v = v2_closed(&args, prec)?.value;
                    self.v2.insert(key, v.clone());
                    v
                }
            };
            lhs += v2 / k;
            meta = ReportMeta {
                k1: Some(parts.k1),
                l_prime: Some(parts.l_prime),
                beta: Some(parts.beta),
                ..ReportMeta::default()
            };
        }
        let main = prop_mp_main_term(h, k, l as i64, prec)?;
        let lhs = Float::with_val(prec.bits(), lhs);
        let residual = Float::with_val(prec.bits(), &lhs - &main);
        let scale = Float::with_val(prec.bits(), h).recip() + Float::with_val(prec.bits(), k).recip();
        Ok(ReciprocityReport {
            h,
            k,
            l,
            lhs,
            main,
            residual,
            scale,
            meta,
        })
    }
}

/// `(1/h) V₁(h/k, ℓ/k) + [h >= 2] (1/k) V₂({k/h}, β)` against its main term.
pub fn prop_mp_residual(h: u64, k: u64, l: u64, prec: Precision) -> Result<ReciprocityReport> {
    if h == 0 || k == 0 || l == 0 {
        return Err(domain("h, k and ℓ must be positive"));
    }
    if gcd_u64(h, k) != 1 {
        return Err(Error::NotCoprime(h.to_string(), k.to_string()));
    }
    if k == 1 {
        return Err(domain("k must be at least 2"));
    }
    let kernel = V1Kernel::new(k, prec)?;
    PropMpPair::new(&kernel, h, prec)?.report(l)
}

/// Reduced quantities of the alternating relation:
/// `k₁ ≡ k`, `ℓ' ≡ ℓ (mod h)` with `1 <= k₁, ℓ' <= h`, then
/// `ℓ₁ ≡ ℓ' (mod k₁)`, `h₁ ≡ h (mod k₁)` with `1 <= ℓ₁ <= k₁`, `0 <= h₁ < k₁`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MccReduction {
    pub h1: u64,
    pub k1: u64,
    pub l1: u64,
    pub l_prime: u64,
}

fn rep_in_one_to(x: u64, m: u64) -> u64 {
    (x + m - 1) % m + 1
}

pub fn mcc_reduce(h: u64, k: u64, l: u64) -> Result<MccReduction> {
    if h < 2 {
        return Err(domain(format!("the alternating relation needs h >= 2, got {h}")));
    }
    if h >= k {
        return Err(domain(format!("need h < k, got {h}/{k}")));
    }
    if gcd_u64(h, k) != 1 {
        return Err(Error::NotCoprime(h.to_string(), k.to_string()));
    }
    if l == 0 || l >= k {
        return Err(domain(format!("ℓ = {l} must lie in [1, {}]", k - 1)));
    }
    let k1 = rep_in_one_to(k, h);
    let l_prime = rep_in_one_to(l, h);
    let l1 = rep_in_one_to(l_prime, k1);
    let h1 = h % k1;
    Ok(MccReduction { h1, k1, l1, l_prime })
}

fn check_reduction(red: &MccReduction) -> Result<()> {
    if red.k1 < 2 || red.h1 == 0 {
        return Err(Error::DegenerateReduction(format!(
            "k₁ = {}, h₁ = {}: the reduced fraction is an integer",
            red.k1, red.h1
        )));
    }
    if red.l1 == red.k1 {
        return Err(Error::DegenerateReduction(format!(
            "ℓ₁ = k₁ = {} puts the last term of C_ℓ₁ on a pole",
            red.k1
        )));
    }
    Ok(())
}

/// Partial-sum profiles for one `(h, k)`: `C_ℓ(h̄/k)` and `C_ℓ₁(h̄₁/k₁)`.
pub struct MccPair {
    h: u64,
    k: u64,
    k1: u64,
    h1: u64,
    outer: Vec<Float>,
    inner: Vec<Float>,
    bracket_low: Float,
    prec: Precision,
}

impl MccPair {
    pub fn new(h: u64, k: u64, prec: Precision) -> Result<Self> {
        let red = mcc_reduce(h, k, 1)?;
        if red.k1 < 2 || red.h1 == 0 {
            check_reduction(&red)?;
        }
        let hbar = mod_inverse_u64(h as i64, k)? as i64;
        let h1bar = mod_inverse_u64(red.h1 as i64, red.k1)? as i64;
        let outer = partial_cot_profile_with(hbar, k, &CotTable::new(k, prec)?, prec);
        let inner = partial_cot_profile_with(h1bar, red.k1, &CotTable::new(red.k1, prec)?, prec);
        let wp = prec.working();
        let bracket_low = -ln(wp, Float::with_val(wp, k) / h) / Float::with_val(wp, Constant::Pi);
        Ok(MccPair {
            h,
            k,
            k1: red.k1,
            h1: red.h1,
            outer,
            inner,
            bracket_low: Float::with_val(prec.bits(), bracket_low),
            prec,
        })
    }

    /// The residual against the nearest point of the main-term bracket
    /// `[-(1/π) log(k/h), 0]`.
    pub fn report(&self, l: u64) -> Result<ReciprocityReport> {
        let red = mcc_reduce(self.h, self.k, l)?;
        check_reduction(&red)?;
        let bits = self.prec.bits();
        let lhs = Float::with_val(bits, &self.outer[l as usize - 1] - &self.inner[red.l1 as usize - 1]);
        let main = if lhs > 0 {
            Float::new(bits)
        } else if lhs < self.bracket_low {
            self.bracket_low.clone()
        } else {
            lhs.clone()
        };
        let residual = Float::with_val(bits, &lhs - &main);
        let scale = Float::with_val(bits, self.h) / self.k1;
        Ok(ReciprocityReport {
            h: self.h,
            k: self.k,
            l,
            lhs,
            main,
            residual,
            scale,
            meta: ReportMeta {
                k1: Some(self.k1),
                l_prime: Some(red.l_prime),
                h1: Some(self.h1),
                l1: Some(red.l1),
                ..ReportMeta::default()
            },
        })
    }

    /// Reports for every `ℓ` whose reduction is not degenerate.
    pub fn all_reports(&self) -> Vec<ReciprocityReport> {
        (1..self.k).filter_map(|l| self.report(l).ok()).collect()
    }
}

/// `C_ℓ(h̄/k) - C_ℓ₁(h̄₁/k₁)` against the bracket `(1/π)(γ - 1) log(k/h)`, `γ ∈ [0, 1]`.
pub fn mcc_check(h: u64, k: u64, l: u64, prec: Precision) -> Result<ReciprocityReport> {
    check_reduction(&mcc_reduce(h, k, l)?)?;
    MccPair::new(h, k, prec)?.report(l)
}

/// The two continuant sums bounding `V₁`:
/// `sum_small = Σ_{m=0}^{r-1} log(v_{m+1}/v_m) / v_m` and
/// `sum_large = (1/k) Σ_{m=1}^{r} v_m log(v_m / v_{m-1})`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub sum_small: f64,
    pub sum_large: f64,
    #[serde(serialize_with = "integers_as_strings")]
    pub continuants: Vec<Integer>,
}

fn integers_as_strings<S: serde::Serializer>(v: &[Integer], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| x.to_string()))
}

pub fn bound_v1(h: &Integer, k: &Integer) -> Result<BoundReport> {
    let x = Fraction::new(h.clone(), k.clone())?;
    if x.denom() != k {
        return Err(Error::NotCoprime(h.to_string(), k.to_string()));
    }
    let cf = continued_fraction(&x)?;
    let v = cf.denominators();
    let bits = 64;
    let log_ratio = |a: &Integer, b: &Integer| -> Float {
        (Float::with_val(bits, a) / Float::with_val(bits, b)).ln()
    };
    let mut small = Float::new(bits);
    let mut large = Float::new(bits);
    for m in 0..cf.len() {
        let step = log_ratio(&v[m + 1], &v[m]);
        small += Float::with_val(bits, &step / &v[m]);
        large += step * &v[m + 1];
    }
    large /= Float::with_val(bits, k);
    Ok(BoundReport {
        sum_small: small.to_f64(),
        sum_large: large.to_f64(),
        continuants: v.to_vec(),
    })
}

/// The two structured main terms of the bound on `S_f`:
/// `direct = (d D₀/π) sum_large` for `S_f(h/k)` and
/// `inverse = (d D₀/π) sum_small` for `S_f(h̄/k)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SfBound {
    pub direct: f64,
    pub inverse: f64,
}

pub fn bound_sf(f: &PiecewisePoly, h: &Integer, k: &Integer) -> Result<SfBound> {
    let b = bound_v1(h, k)?;
    let coeff = f.discontinuities() as f64 * f.d0().to_f64() / std::f64::consts::PI;
    Ok(SfBound {
        direct: coeff * b.sum_large,
        inverse: coeff * b.sum_small,
    })
}
