//! Plot data for `ℓ ↦ C_ℓ(h/k)`.

use std::io::Write;

use rug::Float;

use crate::error::{domain, Result};
use crate::numtheory::Fraction;
use crate::specialfn::Precision;
use crate::sums::partial_cot_profile;

#[derive(Clone, Debug, PartialEq)]
pub struct FigureRow {
    pub l: u64,
    pub x: f64,
    pub value: Float,
}

/// Rows `(ℓ, ℓ/k, C_ℓ(h/k))` for `ℓ = 1..k-1`, where `frac = h/k` in lowest terms.
pub fn figure1(frac: &Fraction, prec: Precision) -> Result<Vec<FigureRow>> {
    let (h, k) = frac
        .to_i64_u64()
        .ok_or_else(|| domain(format!("{frac} is too large for a direct profile")))?;
    let profile = partial_cot_profile(h, k, prec)?;
    Ok(profile
        .into_iter()
        .zip(1u64..)
        .map(|(value, l)| FigureRow {
            l,
            x: l as f64 / k as f64,
            value,
        })
        .collect())
}

/// CSV with header `ell,x,value` and 17 significant digits per decimal.
pub fn write_csv<W: Write>(rows: &[FigureRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "ell,x,value")?;
    for r in rows {
        writeln!(w, "{},{:.16e},{:.16e}", r.l, r.x, r.value.to_f64())?;
    }
    w.flush()
}
