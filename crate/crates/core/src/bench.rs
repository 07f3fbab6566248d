//! Wall-clock timings of the direct, closed-form, truncated and bound routes.

use std::fmt;
use std::time::{Duration, Instant};

use rug::Integer;
use serde::Serialize;

use crate::error::Result;
use crate::numtheory::Fraction;
use crate::piecewise::PiecewisePoly;
use crate::reciprocity::bound_v1;
use crate::specialfn::Precision;
use crate::sums::s_f;
use crate::vseries::{v1_closed, v1_truncated, V1Args};

pub const SF_K: u64 = 1_000_000;
pub const SF_H: i64 = 617;
pub const SF_TARGET: Duration = Duration::from_secs(2);
pub const V1_K: u64 = 10_000;
pub const COMPARE_K: u64 = 100;
pub const COMPARE_BLOCKS: u64 = 1000;
pub const BOUND_DIGITS: usize = 60;
pub const BOUND_TARGET: Duration = Duration::from_millis(10);

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub name: String,
    pub seconds: f64,
    /// The computed value, so repeated runs can be compared exactly.
    pub value: String,
    pub target_seconds: Option<f64>,
}

impl BenchRow {
    pub fn within_target(&self) -> bool {
        self.target_seconds.map_or(true, |t| self.seconds < t)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    /// Truncated over closed-form time for `V₁` at the comparison size.
    pub truncated_over_closed: f64,
}

impl BenchReport {
    pub fn row(&self, name: &str) -> Option<&BenchRow> {
        self.rows.iter().find(|r| r.name == name)
    }
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.rows.iter().map(|r| r.name.len()).max().unwrap_or(0);
        writeln!(f, "{:<width$}  {:>12}  {:>10}  value", "case", "seconds", "target")?;
        for r in &self.rows {
            let target = match r.target_seconds {
                Some(t) if r.within_target() => format!("< {t}"),
                Some(t) => format!("MISSED {t}"),
                None => "-".into(),
            };
            writeln!(f, "{:<width$}  {:>12.6}  {:>10}  {}", r.name, r.seconds, target, r.value)?;
        }
        write!(f, "truncated/closed V1 time ratio at k={COMPARE_K}, M={COMPARE_BLOCKS}: {:.1}", self.truncated_over_closed)
    }
}

fn timed<T>(reps: usize, mut run: impl FnMut() -> Result<T>) -> Result<(Duration, T)> {
    let mut best = Duration::MAX;
    let mut out = None;
    for _ in 0..reps.max(1) {
        let t = Instant::now();
        let v = run()?;
        best = best.min(t.elapsed());
        out = Some(v);
    }
    Ok((best, out.expect("at least one repetition")))
}

/// Consecutive Fibonacci numbers `(F_n, F_{n+1})` with `F_{n+1}` the first of
/// at least `digits` decimal digits.
pub fn fibonacci_pair(digits: usize) -> (Integer, Integer) {
    let (mut a, mut b) = (Integer::from(1), Integer::from(1));
    while b.to_string().len() < digits {
        let next = Integer::from(&a + &b);
        a = std::mem::replace(&mut b, next);
    }
    (a, b)
}

pub fn run(prec: Precision) -> Result<BenchReport> {
    let mut rows = Vec::new();

    let x = PiecewisePoly::polynomial(&[Fraction::zero(), Fraction::from_integer(1)]);
    let (t, v) = timed(1, || s_f(&x, SF_H, SF_K, prec))?;
    rows.push(BenchRow {
        name: format!("s_f direct f=x h={SF_H} k={SF_K}"),
        seconds: t.as_secs_f64(),
        value: format!("{:.20e}", v.value),
        target_seconds: Some(SF_TARGET.as_secs_f64()),
    });

    let args = V1Args::new(SF_H, V1_K, 1)?;
    let (t, v) = timed(1, || v1_closed(args, prec))?;
    rows.push(BenchRow {
        name: format!("v1_closed h={SF_H} k={V1_K} l=1"),
        seconds: t.as_secs_f64(),
        value: format!("{:.20e}", v.value),
        target_seconds: None,
    });

    let args = V1Args::new(7, COMPARE_K, 3)?;
    let (tc, vc) = timed(3, || v1_closed(args, prec))?;
    let (tt, vt) = timed(1, || v1_truncated(args, COMPARE_BLOCKS, prec))?;
    rows.push(BenchRow {
        name: format!("v1_closed h=7 k={COMPARE_K} l=3"),
        seconds: tc.as_secs_f64(),
        value: format!("{:.20e}", vc.value),
        target_seconds: None,
    });
    rows.push(BenchRow {
        name: format!("v1_truncated h=7 k={COMPARE_K} l=3 M={COMPARE_BLOCKS}"),
        seconds: tt.as_secs_f64(),
        value: format!("{:.20e}", vt.value),
        target_seconds: None,
    });

    let (h, k) = fibonacci_pair(BOUND_DIGITS);
    let (t, b) = timed(5, || bound_v1(&h, &k))?;
    rows.push(BenchRow {
        name: format!("bound_v1 fibonacci k ({} digits)", k.to_string().len()),
        seconds: t.as_secs_f64(),
        value: format!("{:.12e} {:.12e}", b.sum_small, b.sum_large),
        target_seconds: Some(BOUND_TARGET.as_secs_f64()),
    });

    Ok(BenchReport {
        rows,
        truncated_over_closed: tt.as_secs_f64() / tc.as_secs_f64().max(1e-9),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fibonacci_pair_has_requested_size() {
        let (a, b) = fibonacci_pair(60);
        assert_eq!(b.to_string().len(), 60);
        assert!(a < b);
        let (a, b) = fibonacci_pair(2);
        assert_eq!((a, b), (Integer::from(8), Integer::from(13)));
    }
}
