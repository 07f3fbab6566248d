//! Verification sweeps over coprime pairs, each producing a JSON-ready report
//! with maxima, fitted constants and a pass/fail verdict.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rug::{Complex, Float, Integer, Rational};
use serde::Serialize;
use serde_json::{json, Value};

use crate::bounds::calibrate_thm_mt;
use crate::error::{domain, Error, Result};
use crate::numtheory::{gcd_u64, mod_inverse_u64};
use crate::reciprocity::{bound_v1, MccPair, PropMpPair};
use crate::specialfn::Precision;
use crate::sums::{cot_dft, cot_dft_closed, dedekind_exact, vasyunin};
use crate::vseries::{TruncationKernel, V1Kernel};

/// Allowed growth of the normalized residual maximum between the lower and
/// upper denominator bands.
pub const BAND_GROWTH: f64 = 1.5;
/// Number of pseudorandom triples checked by the DFT suite.
pub const DFT_TRIPLES: usize = 500;
/// Blocks used by the truncated `V₁` reference.
pub const V1_BLOCKS: u64 = 1000;
/// Tolerance of the `V₁` reduction identity.
pub const V1_REDUCTION_TOL: f64 = 1e-20;
/// The pair whose partial sums are compared in the alternating relation.
pub const MCC_PAIR: (u64, u64) = (231, 677);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Dedekind,
    Dft,
    V1,
    PropMp,
    Mcc,
    ThmMt,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Dedekind,
        Suite::Dft,
        Suite::V1,
        Suite::PropMp,
        Suite::Mcc,
        Suite::ThmMt,
    ];

    pub fn default_kmax(self) -> u64 {
        match self {
            Suite::Dedekind => 300,
            Suite::Dft => 500,
            Suite::V1 => 100,
            Suite::PropMp => 200,
            Suite::Mcc => 300,
            Suite::ThmMt => 300,
        }
    }

    pub fn default_lmode(self) -> LMode {
        match self {
            Suite::PropMp => LMode::Sample(50),
            _ => LMode::All,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Dedekind => "dedekind",
            Suite::Dft => "dft",
            Suite::V1 => "v1",
            Suite::PropMp => "prop_mp",
            Suite::Mcc => "mcc",
            Suite::ThmMt => "thm_mt",
        })
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.to_string() == s)
            .ok_or_else(|| Error::Parse {
                input: s.to_string(),
                reason: "expected one of dedekind, dft, v1, prop_mp, mcc, thm_mt".into(),
            })
    }
}

/// Which `ℓ` a sweep visits for each pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LMode {
    All,
    /// At most this many distinct `ℓ` per pair, drawn from a seeded generator.
    Sample(usize),
}

impl FromStr for LMode {
    type Err = Error;

    /// `all` or `sample:N`.
    fn from_str(s: &str) -> Result<Self> {
        if s == "all" {
            return Ok(LMode::All);
        }
        s.strip_prefix("sample:")
            .and_then(|n| n.parse().ok())
            .filter(|&n| n > 0)
            .map(LMode::Sample)
            .ok_or_else(|| Error::Parse {
                input: s.to_string(),
                reason: "expected `all` or `sample:N` with N > 0".into(),
            })
    }
}

impl fmt::Display for LMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LMode::All => f.write_str("all"),
            LMode::Sample(n) => write!(f, "sample:{n}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SweepConfig {
    pub kmax: u64,
    pub lmode: LMode,
    #[serde(serialize_with = "bits_of")]
    pub prec: Precision,
    pub seed: u64,
}

fn bits_of<S: serde::Serializer>(p: &Precision, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_u32(p.bits())
}

impl SweepConfig {
    pub fn for_suite(suite: Suite) -> Self {
        SweepConfig {
            kmax: suite.default_kmax(),
            lmode: suite.default_lmode(),
            prec: Precision::default(),
            seed: 0,
        }
    }

    /// The `ℓ in 1..k` visited for the pair `(h, k)`, ascending.
    pub fn ells(&self, h: u64, k: u64) -> Vec<u64> {
        match self.lmode {
            LMode::Sample(n) if n < (k - 1) as usize => {
                let mut rng = ChaCha8Rng::seed_from_u64(pair_seed(self.seed, h, k));
                let mut picked: Vec<u64> = sample(&mut rng, (k - 1) as usize, n)
                    .into_iter()
                    .map(|i| i as u64 + 1)
                    .collect();
                picked.sort_unstable();
                picked
            }
            _ => (1..k).collect(),
        }
    }
}

fn pair_seed(seed: u64, h: u64, k: u64) -> u64 {
    seed ^ (k << 32 | h).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub config: SweepConfig,
    pub passed: bool,
    pub cases: u64,
    /// The headline maximum the verdict is based on.
    pub max_residual: f64,
    pub threshold: f64,
    pub fitted: BTreeMap<String, f64>,
    pub details: Value,
}

impl SuiteReport {
    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("reports serialize")
    }
}

fn coprime_below(k: u64) -> impl Iterator<Item = u64> {
    (1..k).filter(move |&h| gcd_u64(h, k) == 1)
}

pub fn run(suite: Suite, cfg: &SweepConfig) -> Result<SuiteReport> {
    if cfg.kmax < 2 {
        return Err(domain("kmax must be at least 2"));
    }
    match suite {
        Suite::Dedekind => dedekind_suite(cfg),
        Suite::Dft => dft_suite(cfg),
        Suite::V1 => v1_suite(cfg),
        Suite::PropMp => prop_mp_suite(cfg),
        Suite::Mcc => mcc_suite(cfg),
        Suite::ThmMt => thm_mt_suite(cfg),
    }
}

/// Reciprocity `s(h,k) + s(k,h) = -1/4 + (h/k + k/h + 1/(hk))/12` in exact arithmetic.
fn dedekind_suite(cfg: &SweepConfig) -> Result<SuiteReport> {
    let per_k: Vec<Result<(u64, Vec<(u64, u64)>)>> = (2..=cfg.kmax)
        .into_par_iter()
        .map(|k| {
            let mut cases = 0;
            let mut bad = Vec::new();
            for h in coprime_below(k) {
                cases += 1;
                let lhs = dedekind_exact(h as i64, k)?.into_rational() + dedekind_exact(k as i64, h)?.into_rational();
                let (hi, ki) = (Integer::from(h), Integer::from(k));
                let rhs = Rational::from((-1, 4))
                    + (Rational::from((hi.clone(), ki.clone()))
                        + Rational::from((ki.clone(), hi.clone()))
                        + Rational::from((1, hi * ki)))
                        / 12u32;
                if lhs != rhs {
                    bad.push((h, k));
                }
            }
            Ok((cases, bad))
        })
        .collect();
    let mut cases = 0;
    let mut violations = Vec::new();
    for r in per_k {
        let (c, b) = r?;
        cases += c;
        violations.extend(b);
    }
    Ok(SuiteReport {
        suite: Suite::Dedekind,
        config: *cfg,
        passed: violations.is_empty(),
        cases,
        max_residual: violations.len() as f64,
        threshold: 0.0,
        fitted: BTreeMap::new(),
        details: json!({ "violations": violations }),
    })
}

/// `(h, k, n)` triples for the DFT identity, drawn from the seed.
pub fn dft_triples(count: usize, kmax: u64, seed: u64) -> Vec<(i64, u64, i64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let k = rng.gen_range(2..=kmax);
        let h = rng.gen_range(1..k);
        if gcd_u64(h, k) != 1 {
            continue;
        }
        let n = rng.gen_range(-(2 * k as i64)..=2 * k as i64);
        out.push((h as i64, k, n));
    }
    out
}

fn dft_suite(cfg: &SweepConfig) -> Result<SuiteReport> {
    let triples = dft_triples(DFT_TRIPLES, cfg.kmax, cfg.seed);
    let prec = cfg.prec;
    let errors: Vec<Result<f64>> = triples
        .par_iter()
        .map(|&(h, k, n)| {
            let lhs = cot_dft(h, k, n, prec)?;
            let rhs = cot_dft_closed(h, k, n, prec)?;
            let d = Complex::with_val(prec.bits(), &lhs - &rhs);
            Ok(Complex::with_val(prec.bits(), d.abs_ref()).real().to_f64())
        })
        .collect();
    let mut worst = (0f64, (0i64, 0u64, 0i64));
    for (e, t) in errors.into_iter().zip(&triples) {
        let e = e?;
        if e > worst.0 {
            worst = (e, *t);
        }
    }
    let threshold = prec.tolerance(16).to_f64();
    Ok(SuiteReport {
        suite: Suite::Dft,
        config: *cfg,
        passed: worst.0 <= threshold,
        cases: triples.len() as u64,
        max_residual: worst.0,
        threshold,
        fitted: BTreeMap::new(),
        details: json!({ "worst": { "h": worst.1 .0, "k": worst.1 .1, "n": worst.1 .2 } }),
    })
}

/// Closed form against the truncated series for `k <= kmax/2`, and the
/// reduction to the Vasyunin sum at `ℓ = 0` for `k <= kmax`.
fn v1_suite(cfg: &SweepConfig) -> Result<SuiteReport> {
    let prec = cfg.prec;
    let k_trunc = cfg.kmax / 2;
    #[derive(Default)]
    struct PerK {
        cases: u64,
        trunc_fail: Vec<(u64, u64, u64)>,
        trunc_worst_ratio: f64,
        reduction_max: f64,
    }
    let per_k: Vec<Result<PerK>> = (2..=cfg.kmax)
        .into_par_iter()
        .map(|k| {
            let kernel = V1Kernel::new(k, prec)?;
            let trunc = if k <= k_trunc {
                Some(TruncationKernel::new(k, V1_BLOCKS, prec)?)
            } else {
                None
            };
            let mut out = PerK::default();
            for h in coprime_below(k) {
                let weights = kernel.weights(h as i64)?;
                let at_zero = kernel.eval_weights(&weights, 0).value;
                let v = Float::with_val(prec.bits(), vasyunin(h as i64, k, prec)?.value * prec.pi()) / k;
                let red = Float::with_val(prec.bits(), &at_zero + &v).abs().to_f64();
                out.reduction_max = out.reduction_max.max(red);
                out.cases += 1;
                if let Some(t) = &trunc {
                    for l in std::iter::once(0).chain(cfg.ells(h, k)) {
                        let closed = kernel.eval_weights(&weights, l as i64).value;
                        let series = t.eval(h as i64, l as i64)?;
                        let gap = Float::with_val(prec.bits(), &closed - &series.value).abs();
                        out.trunc_worst_ratio = out.trunc_worst_ratio.max((gap.clone() / &series.err_estimate).to_f64());
                        if gap > series.err_estimate {
                            out.trunc_fail.push((h, k, l));
                        }
                        out.cases += 1;
                    }
                }
            }
            Ok(out)
        })
        .collect();
    let mut total = PerK::default();
    for r in per_k {
        let r = r?;
        total.cases += r.cases;
        total.trunc_fail.extend(r.trunc_fail);
        total.trunc_worst_ratio = total.trunc_worst_ratio.max(r.trunc_worst_ratio);
        total.reduction_max = total.reduction_max.max(r.reduction_max);
    }
    let passed = total.trunc_fail.is_empty() && total.reduction_max <= V1_REDUCTION_TOL;
    Ok(SuiteReport {
        suite: Suite::V1,
        config: *cfg,
        passed,
        cases: total.cases,
        max_residual: total.reduction_max,
        threshold: V1_REDUCTION_TOL,
        fitted: BTreeMap::new(),
        details: json!({
            "truncation_kmax": k_trunc,
            "truncation_blocks": V1_BLOCKS,
            "truncation_failures": total.trunc_fail,
            "max_gap_over_err_estimate": total.trunc_worst_ratio,
            "reduction_max": total.reduction_max,
        }),
    })
}

/// Largest normalized residual in a band of denominators.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct BandMax {
    pub kmin: u64,
    pub kmax: u64,
    pub value: f64,
    pub h: u64,
    pub k: u64,
    pub l: u64,
}

impl BandMax {
    fn new(kmin: u64, kmax: u64) -> Self {
        BandMax { kmin, kmax, ..Default::default() }
    }

    fn offer(&mut self, value: f64, h: u64, k: u64, l: u64) {
        if (self.kmin..=self.kmax).contains(&k) && value > self.value {
            *self = BandMax { value, h, k, l, ..*self };
        }
    }

    fn absorb(&mut self, other: &BandMax) {
        if other.value > self.value {
            *self = BandMax { kmin: self.kmin, kmax: self.kmax, ..*other };
        }
    }
}

/// `|residual| / (1/h + 1/k)` over all coprime `h < k <= kmax` and the chosen
/// `ℓ`; the maximum over `[kmax/2, kmax]` may exceed that over
/// `[kmax/4, kmax/2]` by at most [`BAND_GROWTH`]. Also fits the constants of
/// `|V₁(h̄/k, ℓ/k)| - sum_large` and `|V₁(h/k, ℓ/k)| - sum_small`.
fn prop_mp_suite(cfg: &SweepConfig) -> Result<SuiteReport> {
    let prec = cfg.prec;
    let (lo, mid, hi) = (cfg.kmax / 4, cfg.kmax / 2, cfg.kmax);
    #[derive(Clone, Copy)]
    struct PerK {
        cases: u64,
        all: BandMax,
        low: BandMax,
        high: BandMax,
        mpc_large: f64,
        mpc_small: f64,
    }
    let per_k: Vec<Result<PerK>> = (2..=cfg.kmax)
        .into_par_iter()
        .map(|k| {
            let kernel = V1Kernel::new(k, prec)?;
            let mut out = PerK {
                cases: 0,
                all: BandMax::new(2, hi),
                low: BandMax::new(lo, mid),
                high: BandMax::new(mid, hi),
                mpc_large: f64::NEG_INFINITY,
                mpc_small: f64::NEG_INFINITY,
            };
            for h in coprime_below(k) {
                let mut pair = PropMpPair::new(&kernel, h, prec)?;
                let bound = bound_v1(&Integer::from(h), &Integer::from(k))?;
                let hbar = mod_inverse_u64(h as i64, k)? as i64;
                let inverse = kernel.weights(hbar)?;
                for l in cfg.ells(h, k) {
                    let r = pair.report(l)?;
                    let ratio = r.ratio();
                    out.all.offer(ratio, h, k, l);
                    out.low.offer(ratio, h, k, l);
                    out.high.offer(ratio, h, k, l);
                    out.cases += 1;
                    let v_inv = kernel.eval_weights(&inverse, l as i64).value.to_f64().abs();
                    out.mpc_large = out.mpc_large.max(v_inv - bound.sum_large);
                    let v_dir = kernel.eval(h as i64, l as i64)?.value.to_f64().abs();
                    out.mpc_small = out.mpc_small.max(v_dir - bound.sum_small);
                }
            }
            Ok(out)
        })
        .collect();
    let mut cases = 0;
    let (mut all, mut low, mut high) = (BandMax::new(2, hi), BandMax::new(lo, mid), BandMax::new(mid, hi));
    let (mut mpc_large, mut mpc_small) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for r in per_k {
        let r = r?;
        cases += r.cases;
        all.absorb(&r.all);
        low.absorb(&r.low);
        high.absorb(&r.high);
        mpc_large = mpc_large.max(r.mpc_large);
        mpc_small = mpc_small.max(r.mpc_small);
    }
    let passed = all.value.is_finite() && high.value <= BAND_GROWTH * low.value;
    let mut fitted = BTreeMap::new();
    fitted.insert("residual_constant".into(), all.value);
    fitted.insert("v1_inverse_minus_sum_large".into(), mpc_large);
    fitted.insert("v1_direct_minus_sum_small".into(), mpc_small);
    Ok(SuiteReport {
        suite: Suite::PropMp,
        config: *cfg,
        passed,
        cases,
        max_residual: all.value,
        threshold: BAND_GROWTH * low.value,
        fitted,
        details: json!({ "overall": all, "lower_band": low, "upper_band": high, "band_growth": BAND_GROWTH }),
    })
}

/// Global constant of `|residual| <= C h/k₁` over all valid `(h, k, ℓ)` with
/// `k <= kmax`, then the same check on the fixed pair (231, 677).
fn mcc_suite(cfg: &SweepConfig) -> Result<SuiteReport> {
    let prec = cfg.prec;
    let sweep = mcc_sweep(cfg.kmax, prec)?;
    let pair = mcc_pair_max(MCC_PAIR.0, MCC_PAIR.1, prec)?;
    let constant = sweep.value;
    let passed = constant.is_finite() && pair.value <= constant;
    let mut fitted = BTreeMap::new();
    fitted.insert("constant".into(), constant);
    fitted.insert("pair_ratio".into(), pair.value);
    Ok(SuiteReport {
        suite: Suite::Mcc,
        config: *cfg,
        passed,
        cases: sweep.cases,
        max_residual: pair.value,
        threshold: constant,
        fitted,
        details: json!({
            "sweep_worst": sweep,
            "pair": pair,
            "pair_scale": MCC_PAIR.0 as f64 / (MCC_PAIR.1 % MCC_PAIR.0) as f64,
        }),
    })
}

/// Largest `|residual| / scale` of the alternating relation with its location.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct RatioMax {
    pub value: f64,
    pub h: u64,
    pub k: u64,
    pub l: u64,
    pub cases: u64,
}

/// The maximum over one pair; `(h, k)` with a degenerate reduction gives zero cases.
pub fn mcc_pair_max(h: u64, k: u64, prec: Precision) -> Result<RatioMax> {
    let pair = match MccPair::new(h, k, prec) {
        Ok(p) => p,
        Err(Error::DegenerateReduction(_)) => return Ok(RatioMax::default()),
        Err(e) => return Err(e),
    };
    let mut best = RatioMax::default();
    for r in pair.all_reports() {
        best.cases += 1;
        let v = r.ratio();
        if v > best.value {
            best = RatioMax { value: v, h, k, l: r.l, cases: best.cases };
        }
    }
    Ok(best)
}

/// [`mcc_pair_max`] over all `2 <= h < k <= kmax`.
pub fn mcc_sweep(kmax: u64, prec: Precision) -> Result<RatioMax> {
    let per_k: Vec<Result<RatioMax>> = (3..=kmax)
        .into_par_iter()
        .map(|k| {
            let mut best = RatioMax::default();
            for h in coprime_below(k).filter(|&h| h >= 2) {
                let m = mcc_pair_max(h, k, prec)?;
                let cases = best.cases + m.cases;
                if m.value > best.value {
                    best = m;
                }
                best.cases = cases;
            }
            Ok(best)
        })
        .collect();
    per_k.into_iter().try_fold(RatioMax::default(), |acc, r| {
        let r = r?;
        let cases = acc.cases + r.cases;
        let mut best = if r.value > acc.value { r } else { acc };
        best.cases = cases;
        Ok(best)
    })
}

fn thm_mt_suite(cfg: &SweepConfig) -> Result<SuiteReport> {
    let cal = calibrate_thm_mt(cfg.kmax / 2, cfg.kmax, cfg.prec)?;
    let mut fitted = BTreeMap::new();
    fitted.insert("constant".into(), cal.constant);
    fitted.insert("calibration_max".into(), cal.calibration.value);
    fitted.insert("validation_max".into(), cal.validation.value);
    Ok(SuiteReport {
        suite: Suite::ThmMt,
        config: *cfg,
        passed: cal.passed,
        cases: cal.calibration.cases + cal.validation.cases,
        max_residual: cal.validation.value,
        threshold: cal.constant,
        fitted,
        details: serde_json::to_value(&cal).expect("calibration serializes"),
    })
}
