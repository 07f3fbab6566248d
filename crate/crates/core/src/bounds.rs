//! End-to-end checks of the bound `|S_f(h/k)| <= (dD₀/πk) Σ v_m log(v_m/v_{m-1}) + O(dD₀ + D₁)`
//! for piecewise-polynomial `f`, and the decomposition of `S_f` into `V₁` values
//! weighted by the jumps of `f`.

use std::sync::Arc;

use rayon::prelude::*;
use rug::{Float, Integer, Rational};
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::numtheory::{gcd_u64, mod_inverse_u64, Fraction};
use crate::piecewise::{Piece, PiecewisePoly};
use crate::reciprocity::bound_sf;
use crate::specialfn::{CotTable, Precision};
use crate::sums::SfKernel;
use crate::vseries::V1Kernel;

/// One instance of the bound: measured sizes of `S_f` at `h/k` and `h̄/k`
/// next to the two structured main terms and the slack budget `dD₀ + D₁`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TheoremMtCase {
    pub h: u64,
    pub k: u64,
    /// `|S_f(h/k)|` for the snapped `f`.
    pub measured: f64,
    /// `|S_f(h̄/k)|` for the snapped `f`.
    pub measured_inverse: f64,
    pub main_direct: f64,
    pub main_inverse: f64,
    pub slack_budget: f64,
}

impl TheoremMtCase {
    /// Smallest `C` with `measured <= main + C · slack` for both variants.
    pub fn excess(&self) -> f64 {
        let over = (self.measured - self.main_direct).max(self.measured_inverse - self.main_inverse);
        if self.slack_budget > 0.0 {
            over / self.slack_budget
        } else if over <= 1e-20 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

/// Per-function data reused across all `h` for a fixed `k`.
struct MtKernel {
    f: PiecewisePoly,
    sf: SfKernel,
    slack: f64,
}

impl MtKernel {
    fn new(f: &PiecewisePoly, table: Arc<CotTable>, prec: Precision) -> Result<Self> {
        let snapped = f.snap_to_grid(table.modulus())?;
        let slack = f.discontinuities() as f64 * f.d0().to_f64() + f.fprime_l2(prec).to_f64();
        Ok(MtKernel {
            f: f.clone(),
            sf: SfKernel::with_table(&snapped, table, prec),
            slack,
        })
    }

    fn case(&self, h: u64) -> Result<TheoremMtCase> {
        let k = self.sf.modulus();
        let hbar = mod_inverse_u64(h as i64, k)?;
        let main = bound_sf(&self.f, &Integer::from(h), &Integer::from(k))?;
        Ok(TheoremMtCase {
            h,
            k,
            measured: self.sf.eval(h as i64)?.value.to_f64().abs(),
            measured_inverse: self.sf.eval(hbar as i64)?.value.to_f64().abs(),
            main_direct: main.direct,
            main_inverse: main.inverse,
            slack_budget: self.slack,
        })
    }
}

/// Snaps the discontinuities of `f` to the grid `Z/k`, measures `S_f` directly
/// at `h/k` and `h̄/k`, and pairs the results with the bound's main terms.
pub fn check_thm_mt(f: &PiecewisePoly, h: u64, k: u64, prec: Precision) -> Result<TheoremMtCase> {
    if k < 2 || h == 0 || h >= k {
        return Err(domain(format!("need 0 < h < k, got {h}/{k}")));
    }
    if gcd_u64(h, k) != 1 {
        return Err(Error::NotCoprime(h.to_string(), k.to_string()));
    }
    let table = Arc::new(CotTable::new(k, prec)?);
    MtKernel::new(f, table, prec)?.case(h)
}

/// `S_f(h/k)` split as `(1/π) Σ_j V₁(h̄/k, ℓ_j/k) J_j` plus a remainder, where
/// `J_j` is the jump of `f` at `ℓ_j/k`.
#[derive(Clone, Debug, PartialEq)]
pub struct LemmaMl {
    pub combination: Float,
    pub residual: Float,
}

pub fn lemma_ml_decompose(f: &PiecewisePoly, h: u64, k: u64, prec: Precision) -> Result<LemmaMl> {
    let kernel = V1Kernel::new(k, prec)?;
    lemma_ml_with(f, h, &kernel, &SfKernel::new(f, k, prec)?, prec)
}

fn lemma_ml_with(f: &PiecewisePoly, h: u64, kernel: &V1Kernel, sf: &SfKernel, prec: Precision) -> Result<LemmaMl> {
    let k = kernel.modulus();
    let hbar = mod_inverse_u64(h as i64, k)? as i64;
    let weights = kernel.weights(hbar)?;
    let wp = prec.working();
    let mut acc = Float::new(wp);
    for (x, jump) in f.jumps() {
        let scaled = Rational::from(x.as_rational() * Integer::from(k));
        if *scaled.denom() != 1 {
            return Err(Error::Precondition(format!(
                "discontinuity at {x} is not on the grid of step 1/{k}; snap first"
            )));
        }
        let l = scaled.numer().to_i64().expect("grid index fits");
        let v1 = kernel.eval_weights(&weights, l).value;
        acc += v1 * jump.as_rational();
    }
    let combination = Float::with_val(prec.bits(), acc / prec.pi());
    let direct = sf.eval(h as i64)?.value;
    let residual = Float::with_val(prec.bits(), &direct - &combination);
    Ok(LemmaMl { combination, residual })
}

fn fr(n: i64, d: u64) -> Fraction {
    Fraction::new(n, d).expect("nonzero denominator")
}

fn piece(a: (i64, u64), b: (i64, u64), poly: &[(i64, u64)]) -> Piece {
    Piece {
        start: fr(a.0, a.1),
        end: fr(b.0, b.1),
        poly: poly.iter().map(|&(n, d)| fr(n, d)).collect(),
    }
}

/// The fixed family of test functions used by the bound sweeps.
pub fn test_function_suite() -> Vec<(&'static str, PiecewisePoly)> {
    let mk = |pieces| PiecewisePoly::new(pieces).expect("suite functions tile [0, 1)");
    vec![
        ("indicator_half", mk(vec![piece((0, 1), (1, 2), &[(1, 1)]), piece((1, 2), (1, 1), &[])])),
        ("indicator_third", mk(vec![piece((0, 1), (1, 3), &[(1, 1)]), piece((1, 3), (1, 1), &[])])),
        ("sawtooth", mk(vec![piece((0, 1), (1, 1), &[(0, 1), (1, 1)])])),
        ("square", mk(vec![piece((0, 1), (1, 1), &[(0, 1), (0, 1), (1, 1)])])),
        (
            "quadratic_spline",
            mk(vec![
                piece((0, 1), (1, 3), &[(0, 1), (0, 1), (9, 1)]),
                piece((1, 3), (1, 1), &[(9, 4), (-9, 2), (9, 4)]),
            ]),
        ),
        (
            "triangle",
            mk(vec![piece((0, 1), (1, 2), &[(0, 1), (2, 1)]), piece((1, 2), (1, 1), &[(2, 1), (-2, 1)])]),
        ),
        (
            "skew_triangle",
            mk(vec![piece((0, 1), (1, 3), &[(0, 1), (3, 1)]), piece((1, 3), (1, 1), &[(3, 2), (-3, 2)])]),
        ),
        (
            "mixed",
            mk(vec![
                piece((0, 1), (1, 5), &[(1, 1)]),
                piece((1, 5), (3, 7), &[(-1, 1), (2, 1)]),
                piece((3, 7), (1, 1), &[(1, 2), (0, 1), (1, 1)]),
            ]),
        ),
    ]
}

/// Largest excess over a range of denominators, with the case attaining it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExcessMax {
    pub value: f64,
    pub function: String,
    pub h: u64,
    pub k: u64,
    pub cases: u64,
}

impl ExcessMax {
    fn empty() -> Self {
        ExcessMax {
            value: f64::NEG_INFINITY,
            function: String::new(),
            h: 0,
            k: 0,
            cases: 0,
        }
    }

    fn merge(mut self, other: ExcessMax) -> Self {
        let cases = self.cases + other.cases;
        if other.value > self.value {
            self = other;
        }
        self.cases = cases;
        self
    }
}

/// Maximum of [`TheoremMtCase::excess`] over the suite and all coprime
/// `h < k` with `k` in `kmin..=kmax`. Denominators are processed in parallel
/// and merged in ascending order.
pub fn thm_mt_sweep(
    suite: &[(&'static str, PiecewisePoly)],
    kmin: u64,
    kmax: u64,
    prec: Precision,
) -> Result<ExcessMax> {
    let per_k: Vec<Result<ExcessMax>> = (kmin.max(2)..=kmax)
        .into_par_iter()
        .map(|k| {
            let table = Arc::new(CotTable::new(k, prec)?);
            let mut best = ExcessMax::empty();
            for (name, f) in suite {
                let kernel = MtKernel::new(f, table.clone(), prec)?;
                for h in (1..k).filter(|&h| gcd_u64(h, k) == 1) {
                    let e = kernel.case(h)?.excess();
                    best.cases += 1;
                    if e > best.value {
                        best = ExcessMax {
                            value: e,
                            function: name.to_string(),
                            h,
                            k,
                            cases: best.cases,
                        };
                    }
                }
            }
            Ok(best)
        })
        .collect();
    per_k
        .into_iter()
        .try_fold(ExcessMax::empty(), |acc, r| Ok(acc.merge(r?)))
}

/// Fit-then-validate protocol for the bound's unspecified constant.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Calibration {
    /// `C = max(0, calibration maximum)`.
    pub constant: f64,
    pub calibration: ExcessMax,
    pub validation: ExcessMax,
    /// Validation maximum over `C`.
    pub growth: f64,
    /// Whether the validation maximum stays within `C` (plus rounding).
    pub passed: bool,
}

/// Fits `C` on `k <= k_cal` and checks it on `k_cal < k <= k_val`.
pub fn calibrate_thm_mt(k_cal: u64, k_val: u64, prec: Precision) -> Result<Calibration> {
    let suite = test_function_suite();
    let calibration = thm_mt_sweep(&suite, 2, k_cal, prec)?;
    let validation = thm_mt_sweep(&suite, k_cal + 1, k_val, prec)?;
    let constant = calibration.value.max(0.0);
    let eps = prec.tolerance(16).to_f64();
    Ok(Calibration {
        constant,
        growth: validation.value / constant,
        passed: validation.value <= constant + eps,
        calibration,
        validation,
    })
}

/// Largest `|residual| / max(1, ‖f'‖₂)` and `|residual| / max(1, ‖f'‖₂^{1/2})` of
/// [`lemma_ml_decompose`] over the suite snapped to each grid, `k` in `kmin..=kmax`.
pub fn lemma_ml_sweep(kmin: u64, kmax: u64, prec: Precision) -> Result<(f64, f64)> {
    let suite = test_function_suite();
    let per_k: Vec<Result<(f64, f64)>> = (kmin.max(2)..=kmax)
        .into_par_iter()
        .map(|k| {
            let kernel = V1Kernel::new(k, prec)?;
            let table = Arc::new(CotTable::new(k, prec)?);
            let mut worst = (0f64, 0f64);
            for (_, f) in &suite {
                let g = f.snap_to_grid(k)?;
                let sf = SfKernel::with_table(&g, table.clone(), prec);
                let d1 = g.fprime_l2(prec).to_f64();
                for h in (1..k).filter(|&h| gcd_u64(h, k) == 1) {
                    let r = lemma_ml_with(&g, h, &kernel, &sf, prec)?.residual.to_f64().abs();
                    worst.0 = worst.0.max(r / d1.max(1.0));
                    worst.1 = worst.1.max(r / d1.sqrt().max(1.0));
                }
            }
            Ok(worst)
        })
        .collect();
    per_k.into_iter().try_fold((0f64, 0f64), |acc, r| {
        let r = r?;
        Ok((acc.0.max(r.0), acc.1.max(r.1)))
    })
}
