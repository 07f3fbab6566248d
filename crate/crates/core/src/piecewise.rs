//! 1-periodic piecewise-polynomial functions with exact rational coefficients.

use std::fmt;

use rug::float::Constant;
use rug::{Assign, Complex, Float, Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::numtheory::Fraction;
use crate::specialfn::Precision;

/// One segment `[start, end)` carrying the polynomial `poly[0] + poly[1] x + ...`
/// in the absolute variable `x`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Piece {
    pub start: Fraction,
    pub end: Fraction,
    pub poly: Vec<Fraction>,
}

/// A function on `R/Z` given by polynomial pieces tiling `[0, 1)`.
///
/// At breakpoints the value is the average of the one-sided limits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawPoly")]
pub struct PiecewisePoly {
    pieces: Vec<Piece>,
}

#[derive(Deserialize)]
struct RawPoly {
    pieces: Vec<Piece>,
}

impl TryFrom<RawPoly> for PiecewisePoly {
    type Error = Error;

    fn try_from(raw: RawPoly) -> Result<Self> {
        PiecewisePoly::new(raw.pieces)
    }
}

fn horner(poly: &[Rational], x: &Rational) -> Rational {
    let mut acc = Rational::new();
    for c in poly.iter().rev() {
        acc *= x;
        acc += c;
    }
    acc
}

fn derivative(poly: &[Rational]) -> Vec<Rational> {
    poly.iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| Rational::from(c * Integer::from(i)))
        .collect()
}

fn trim(mut poly: Vec<Fraction>) -> Vec<Fraction> {
    while poly.last().is_some_and(|c| *c.numer() == 0) {
        poly.pop();
    }
    poly
}

impl PiecewisePoly {
    /// Validates that the pieces tile `[0, 1)` in order.
    pub fn new(pieces: Vec<Piece>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(domain("a piecewise function needs at least one piece"));
        }
        let mut expected = Fraction::zero();
        for p in &pieces {
            if p.start != expected {
                return Err(domain(format!(
                    "pieces must tile [0, 1) in order: expected a piece starting at {expected}, got {}",
                    p.start
                )));
            }
            if p.end <= p.start {
                return Err(domain(format!("empty piece [{}, {})", p.start, p.end)));
            }
            expected = p.end.clone();
        }
        if expected != Fraction::from_integer(1) {
            return Err(domain(format!("pieces end at {expected}, not at 1")));
        }
        let pieces = pieces
            .into_iter()
            .map(|p| Piece {
                poly: trim(p.poly),
                ..p
            })
            .collect();
        Ok(PiecewisePoly { pieces })
    }

    /// A single polynomial on `[0, 1)`, extended periodically.
    pub fn polynomial(coeffs: &[Fraction]) -> Self {
        Self::new(vec![Piece {
            start: Fraction::zero(),
            end: Fraction::from_integer(1),
            poly: coeffs.to_vec(),
        }])
        .expect("one piece always tiles")
    }

    /// `value` on `(a, b)` and zero elsewhere, for `0 <= a < b <= 1`.
    pub fn indicator(a: &Fraction, b: &Fraction, value: &Fraction) -> Result<Self> {
        let zero = Fraction::zero();
        let one = Fraction::from_integer(1);
        if *a < zero || b > &one || a >= b {
            return Err(domain(format!("indicator interval ({a}, {b}) is not inside [0, 1]")));
        }
        let mut pieces = Vec::new();
        if *a > zero {
            pieces.push(Piece { start: zero, end: a.clone(), poly: vec![] });
        }
        pieces.push(Piece { start: a.clone(), end: b.clone(), poly: vec![value.clone()] });
        if *b < one {
            pieces.push(Piece { start: b.clone(), end: one, poly: vec![] });
        }
        Self::new(pieces)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            input: text.chars().take(80).collect(),
            reason: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("fractions always serialize")
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// Left endpoints of the pieces, `0 = x_1 < ... < x_d < 1`.
    pub fn breakpoints(&self) -> impl Iterator<Item = &Fraction> {
        self.pieces.iter().map(|p| &p.start)
    }

    fn poly_rational(&self, i: usize) -> Vec<Rational> {
        self.pieces[i].poly.iter().map(|c| c.as_rational().clone()).collect()
    }

    fn piece_index(&self, r: &Fraction) -> usize {
        self.pieces.partition_point(|p| p.start <= *r) - 1
    }

    /// `(f(x-), f(x+))` at a point of `[0, 1)`.
    fn one_sided(&self, r: &Fraction) -> (Rational, Rational) {
        let i = self.piece_index(r);
        let right = horner(&self.poly_rational(i), r.as_rational());
        if self.pieces[i].start != *r {
            return (right.clone(), right);
        }
        let (j, at) = if i == 0 {
            (self.pieces.len() - 1, Rational::from(1))
        } else {
            (i - 1, r.as_rational().clone())
        };
        (horner(&self.poly_rational(j), &at), right)
    }

    /// Exact value with the midpoint convention at breakpoints.
    pub fn eval_exact(&self, x: &Fraction) -> Fraction {
        let (left, right) = self.one_sided(&x.fract());
        Fraction::from((left + right) / 2u32)
    }

    pub fn eval(&self, x: &Fraction, prec: Precision) -> Float {
        prec.float(self.eval_exact(x).as_rational())
    }

    /// `f(m/k)` for `m = 0..k`, walking the pieces in order.
    pub fn grid_values(&self, k: u64, prec: Precision) -> Vec<Float> {
        let bits = prec.bits();
        let polys: Vec<Vec<Float>> = (0..self.pieces.len())
            .map(|i| {
                self.pieces[i]
                    .poly
                    .iter()
                    .map(|c| Float::with_val(bits + 32, c.as_rational()))
                    .collect()
            })
            .collect();
        // grid points sitting exactly on a breakpoint get the midpoint value
        let mut on_break = std::collections::HashMap::new();
        for p in &self.pieces {
            let scaled = Rational::from(p.start.as_rational() * Integer::from(k));
            if *scaled.denom() == 1 {
                let m = scaled.numer().to_u64().expect("grid index fits");
                on_break.insert(m, Float::with_val(bits, self.eval_exact(&p.start).as_rational()));
            }
        }
        // piece i covers the grid indices m >= ceil(start_i * k)
        let first_index: Vec<u64> = self
            .pieces
            .iter()
            .map(|p| {
                let scaled = Rational::from(p.start.as_rational() * Integer::from(k));
                scaled.ceil().numer().to_u64().expect("grid index fits")
            })
            .collect();
        let mut out = Vec::with_capacity(k as usize);
        let mut i = 0;
        let mut x = Float::new(bits + 32);
        let mut acc = Float::new(bits + 32);
        for m in 0..k {
            if let Some(v) = on_break.get(&m) {
                out.push(v.clone());
                continue;
            }
            // advance to the piece containing m/k
            while i + 1 < self.pieces.len() && first_index[i + 1] <= m {
                i += 1;
            }
            x.assign(m);
            x /= k;
            acc.assign(0u32);
            for c in polys[i].iter().rev() {
                acc *= &x;
                acc += c;
            }
            out.push(Float::with_val(bits, &acc));
        }
        out
    }

    /// Discontinuities as `(location, f(x+) - f(x-))`, locations in `[0, 1)`.
    pub fn jumps(&self) -> Vec<(Fraction, Fraction)> {
        self.pieces
            .iter()
            .filter_map(|p| {
                let (left, right) = self.one_sided(&p.start);
                let jump = right - left;
                (jump != 0).then(|| (p.start.clone(), Fraction::from(jump)))
            })
            .collect()
    }

    /// Number of genuine discontinuities per period.
    pub fn discontinuities(&self) -> usize {
        self.jumps().len()
    }

    /// Largest absolute jump.
    pub fn d0(&self) -> Fraction {
        self.jumps()
            .into_iter()
            .map(|(_, j)| Fraction::from(j.into_rational().abs()))
            .max()
            .unwrap_or_default()
    }

    /// `∫_0^1 f'(y)^2 dy`, exactly.
    pub fn fprime_l2_squared(&self) -> Fraction {
        let mut total = Rational::new();
        for (i, p) in self.pieces.iter().enumerate() {
            let d = derivative(&self.poly_rational(i));
            let mut sq = vec![Rational::new(); (2 * d.len()).saturating_sub(1)];
            for (a, ca) in d.iter().enumerate() {
                for (b, cb) in d.iter().enumerate() {
                    sq[a + b] += Rational::from(ca * cb);
                }
            }
            total += integrate(&sq, p.start.as_rational(), p.end.as_rational());
        }
        Fraction::from(total)
    }

    /// `‖f'‖₂`, the `L²` norm of the almost-everywhere derivative.
    pub fn fprime_l2(&self, prec: Precision) -> Float {
        prec.float(self.fprime_l2_squared().as_rational()).sqrt()
    }

    /// `∫_0^1 f'(y) dy`, which equals minus the sum of the jumps.
    pub fn fprime_mean(&self) -> Fraction {
        let mut total = Rational::new();
        for (i, p) in self.pieces.iter().enumerate() {
            let poly = self.poly_rational(i);
            total += horner(&poly, p.end.as_rational()) - horner(&poly, p.start.as_rational());
        }
        Fraction::from(total)
    }

    /// Fourier coefficient `∫_0^1 f'(y) e(-ny) dy` of the almost-everywhere
    /// derivative, by integrating each polynomial piece by parts.
    pub fn fprime_fourier(&self, n: i64, prec: Precision) -> Complex {
        let bits = prec.bits();
        if n == 0 {
            return Complex::with_val(bits, (self.fprime_mean().as_rational(), 0));
        }
        let wp = prec.working() + 16;
        let two_pi = Float::with_val(wp, Constant::Pi) * 2u32;
        // ∫ p e^{cy} dy = e^{cy} Σ_j (-1)^j p^{(j)}(y) / c^{j+1}, with c = -2πin
        let c = Complex::with_val(wp, (0, Float::with_val(wp, &two_pi * -n)));
        let inv_c = Complex::with_val(wp, c.recip_ref());
        let mut total = Complex::new(wp);
        for (i, p) in self.pieces.iter().enumerate() {
            let mut deriv = derivative(&self.poly_rational(i));
            let mut coeff = Complex::with_val(wp, &inv_c);
            let mut sign = 1;
            let bounds = [(p.end.as_rational(), 1), (p.start.as_rational(), -1)];
            let phases: Vec<Complex> = bounds
                .iter()
                .map(|(y, _)| {
                    let theta = Float::with_val(wp, &two_pi * *y) * -n;
                    let (s, co) = theta.sin_cos(Float::new(wp));
                    Complex::with_val(wp, (co, s))
                })
                .collect();
            while !deriv.is_empty() {
                for ((y, side), phase) in bounds.iter().zip(&phases) {
                    let val = Float::with_val(wp, horner(&deriv, y));
                    let term = Complex::with_val(wp, phase * &coeff) * val * (sign * side);
                    total += term;
                }
                deriv = derivative(&deriv);
                coeff *= &inv_c;
                sign = -sign;
            }
        }
        Complex::with_val(bits, total)
    }

    /// Moves every discontinuity to the nearest point of the grid `Z/k`
    /// (ties toward 0), keeping the jump sizes and the derivative unchanged.
    ///
    /// A jump `J` at `x` moved to `g` is realized as `f + J (H(· - g) - H(· - x))`.
    /// Breakpoints where `f` is continuous stay where they are.
    pub fn snap_to_grid(&self, k: u64) -> Result<PiecewisePoly> {
        if k < 2 {
            return Err(domain(format!("grid size must be at least 2, got {k}")));
        }
        let kk = Integer::from(k);
        let jumps = self.jumps();
        // (target in [0, 1], original point, jump); a target of 1 is the grid point 0
        let moves: Vec<(Fraction, Fraction, Fraction)> = jumps
            .into_iter()
            .map(|(x, jump)| {
                let scaled = Rational::from(x.as_rational() * &kk);
                let floor = scaled.clone().floor().into_numer_denom().0;
                let frac = scaled - &floor;
                let idx = if frac > Rational::from((1, 2)) { floor + 1 } else { floor };
                (Fraction::new(idx, kk.clone()).unwrap(), x, jump)
            })
            .collect();
        let one = Fraction::from_integer(1);
        let mut cuts: Vec<Fraction> = self.breakpoints().cloned().collect();
        cuts.extend(moves.iter().map(|(t, _, _)| t.fract()));
        cuts.sort();
        cuts.dedup();
        let mut pieces: Vec<Piece> = Vec::with_capacity(cuts.len());
        for (i, start) in cuts.iter().enumerate() {
            let end = cuts.get(i + 1).cloned().unwrap_or_else(|| one.clone());
            let src = &self.pieces[self.piece_index(start)];
            let mut shift = Rational::new();
            for (t, x, jump) in &moves {
                if t < x && start >= t && start < x {
                    shift += jump.as_rational();
                } else if t > x && start >= x && start < t {
                    shift -= jump.as_rational();
                }
            }
            let mut poly = src.poly.clone();
            if shift != 0 {
                if poly.is_empty() {
                    poly.push(Fraction::zero());
                }
                poly[0] = Fraction::from(Rational::from(poly[0].as_rational() + &shift));
            }
            let poly = trim(poly);
            match pieces.last_mut() {
                Some(prev) if prev.poly == poly => prev.end = end,
                _ => pieces.push(Piece { start: start.clone(), end, poly }),
            }
        }
        PiecewisePoly::new(pieces)
    }

    /// Scales every coefficient by `lambda`.
    pub fn scaled(&self, lambda: &Fraction) -> PiecewisePoly {
        let pieces = self
            .pieces
            .iter()
            .map(|p| Piece {
                start: p.start.clone(),
                end: p.end.clone(),
                poly: trim(
                    p.poly
                        .iter()
                        .map(|c| Fraction::from(Rational::from(c.as_rational() * lambda.as_rational())))
                        .collect(),
                ),
            })
            .collect();
        PiecewisePoly { pieces }
    }

    /// `self + other`, on the common refinement of the two partitions.
    pub fn add(&self, other: &PiecewisePoly) -> PiecewisePoly {
        let mut cuts: Vec<Fraction> = self.breakpoints().chain(other.breakpoints()).cloned().collect();
        cuts.sort();
        cuts.dedup();
        let one = Fraction::from_integer(1);
        let pieces = cuts
            .iter()
            .enumerate()
            .map(|(i, start)| {
                let a = &self.pieces[self.piece_index(start)].poly;
                let b = &other.pieces[other.piece_index(start)].poly;
                let n = a.len().max(b.len());
                let poly = (0..n)
                    .map(|j| {
                        let mut s = Rational::new();
                        if let Some(c) = a.get(j) {
                            s += c.as_rational();
                        }
                        if let Some(c) = b.get(j) {
                            s += c.as_rational();
                        }
                        Fraction::from(s)
                    })
                    .collect();
                Piece {
                    start: start.clone(),
                    end: cuts.get(i + 1).cloned().unwrap_or_else(|| one.clone()),
                    poly: trim(poly),
                }
            })
            .collect();
        PiecewisePoly { pieces }
    }
}

fn integrate(poly: &[Rational], a: &Rational, b: &Rational) -> Rational {
    let anti: Vec<Rational> = std::iter::once(Rational::new())
        .chain(
            poly.iter()
                .enumerate()
                .map(|(i, c)| Rational::from(c / Integer::from(i + 1))),
        )
        .collect();
    horner(&anti, b) - horner(&anti, a)
}

impl fmt::Display for PiecewisePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_json())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fr(s: &str) -> Fraction {
        s.parse().unwrap()
    }

    fn saw() -> PiecewisePoly {
        PiecewisePoly::polynomial(&[fr("0"), fr("1")])
    }

    fn half_indicator() -> PiecewisePoly {
        PiecewisePoly::indicator(&fr("0"), &fr("1/2"), &fr("1")).unwrap()
    }

    fn triangle() -> PiecewisePoly {
        PiecewisePoly::from_json(
            r#"{"pieces":[{"start":"0","end":"1/2","poly":["0","2"]},
                          {"start":"1/2","end":"1","poly":["2","-2"]}]}"#,
        )
        .unwrap()
    }

    #[test]
    fn rejects_bad_tilings() {
        let gap = r#"{"pieces":[{"start":"0","end":"1/2","poly":["1"]},{"start":"2/3","end":"1","poly":[]}]}"#;
        assert!(PiecewisePoly::from_json(gap).is_err());
        let short = r#"{"pieces":[{"start":"0","end":"1/2","poly":["1"]}]}"#;
        assert!(PiecewisePoly::from_json(short).is_err());
        assert!(PiecewisePoly::from_json("{").is_err());
    }

    #[test]
    fn json_round_trip() {
        let f = triangle();
        assert_eq!(PiecewisePoly::from_json(&f.to_json()).unwrap(), f);
    }

    #[test]
    fn eval_midpoint_convention() {
        let f = saw();
        assert_eq!(f.eval_exact(&fr("1/3")), fr("1/3"));
        assert_eq!(f.eval_exact(&fr("0")), fr("1/2"));
        assert_eq!(f.eval_exact(&fr("7/3")), fr("1/3"));
        assert_eq!(f.eval_exact(&fr("-2/3")), fr("1/3"));
        let g = PiecewisePoly::indicator(&fr("0"), &fr("3/7"), &fr("1")).unwrap();
        assert_eq!(g.eval_exact(&fr("3/14")), fr("1"));
        assert_eq!(g.eval_exact(&fr("3/7")), fr("1/2"));
        assert_eq!(g.eval_exact(&fr("1/2")), fr("0"));
        assert_eq!(triangle().eval_exact(&fr("1/2")), fr("1"));
    }

    #[test]
    fn grid_values_match_exact_eval() {
        let p = Precision::default();
        let f = PiecewisePoly::from_json(
            r#"{"pieces":[{"start":"0","end":"1/5","poly":["1"]},
                          {"start":"1/5","end":"3/7","poly":["-1","2"]},
                          {"start":"3/7","end":"1","poly":["0","0","1"]}]}"#,
        )
        .unwrap();
        for k in [2u64, 5, 7, 35, 36] {
            let vals = f.grid_values(k, p);
            for (m, v) in vals.iter().enumerate() {
                let exact = f.eval(&Fraction::new(m as u64, k).unwrap(), p);
                assert!((v.clone() - &exact).abs() < p.tolerance(2), "k={k} m={m}");
            }
        }
    }

    #[test]
    fn jump_lists() {
        assert_eq!(saw().jumps(), vec![(fr("0"), fr("-1"))]);
        assert_eq!(
            half_indicator().jumps(),
            vec![(fr("0"), fr("1")), (fr("1/2"), fr("-1"))]
        );
        assert!(triangle().jumps().is_empty());
        assert_eq!(triangle().d0(), fr("0"));
    }

    #[test]
    fn d0_and_d1() {
        let p = Precision::default();
        assert_eq!(saw().d0(), fr("1"));
        assert_eq!(saw().fprime_l2(p), 1);
        assert_eq!(half_indicator().d0(), fr("1"));
        assert_eq!(half_indicator().fprime_l2(p), 0);
        // 2/sqrt(3)
        let sq = PiecewisePoly::polynomial(&[fr("0"), fr("0"), fr("1")]);
        assert_eq!(sq.fprime_l2_squared(), fr("4/3"));
        let expect = (p.float(4) / 3u32).sqrt();
        assert!((sq.fprime_l2(p) - expect).abs() < p.tolerance(1));
    }

    #[test]
    fn mean_derivative_cancels_jumps() {
        for f in [saw(), half_indicator(), triangle()] {
            let jumps: Rational = f.jumps().into_iter().map(|(_, j)| j.into_rational()).sum();
            assert_eq!(f.fprime_mean().into_rational(), -jumps);
        }
    }

    #[test]
    fn fourier_coefficients_of_sawtooth_derivative() {
        // f' = 1 on (0,1): all nonzero modes vanish
        let p = Precision::default();
        let c = saw().fprime_fourier(3, p);
        assert!(c.abs().real().clone() < p.tolerance(8));
        assert_eq!(saw().fprime_fourier(0, p).real().clone(), 1);
        // f = x^2: f' = 2y, coefficient at n != 0 is i/(πn)
        let sq = PiecewisePoly::polynomial(&[fr("0"), fr("0"), fr("1")]);
        for n in [1i64, -2, 5] {
            let c = sq.fprime_fourier(n, p);
            let expect = p.pi().recip() / n;
            assert!(c.real().clone().abs() < p.tolerance(8));
            assert!((c.imag().clone() - expect).abs() < p.tolerance(8), "n={n}");
        }
    }

    #[test]
    fn snapping_examples() {
        let f = PiecewisePoly::indicator(&fr("0"), &fr("501/1000"), &fr("1")).unwrap();
        let g = f.snap_to_grid(2).unwrap();
        let starts: Vec<_> = g.breakpoints().cloned().collect();
        assert_eq!(starts, vec![fr("0"), fr("1/2")]);
        assert_eq!(g, half_indicator());

        assert_eq!(half_indicator().snap_to_grid(4).unwrap(), half_indicator());

        let third = PiecewisePoly::indicator(&fr("0"), &fr("1/3"), &fr("1")).unwrap();
        let snapped = third.snap_to_grid(4).unwrap();
        let locs: Vec<_> = snapped.jumps().into_iter().map(|(x, _)| x).collect();
        assert_eq!(locs, vec![fr("0"), fr("1/4")]);

        // ties go down: 1/4 on the grid of halves lands on 0
        let quarter = PiecewisePoly::indicator(&fr("1/4"), &fr("1"), &fr("1")).unwrap();
        let s = quarter.snap_to_grid(2).unwrap();
        assert!(s.jumps().is_empty());
        assert_eq!(s.eval_exact(&fr("1/8")), fr("1"));
        assert!(PiecewisePoly::polynomial(&[]).snap_to_grid(1).is_err());
    }

    #[test]
    fn snapping_wraps_past_one() {
        // jump at 9/10 rounds up to 1 = 0 on the grid of thirds
        let f = PiecewisePoly::indicator(&fr("1/3"), &fr("9/10"), &fr("1")).unwrap();
        let g = f.snap_to_grid(3).unwrap();
        let locs: Vec<_> = g.jumps().into_iter().collect();
        assert_eq!(locs, vec![(fr("0"), fr("-1")), (fr("1/3"), fr("1"))]);
        assert_eq!(g.eval_exact(&fr("19/20")), fr("1"));
        assert_eq!(g.eval_exact(&fr("1/20")), fr("0"));
    }

    #[test]
    fn snapping_keeps_derivative() {
        let f = PiecewisePoly::from_json(
            r#"{"pieces":[{"start":"0","end":"1/5","poly":["1"]},
                          {"start":"1/5","end":"3/7","poly":["-1","2"]},
                          {"start":"3/7","end":"1","poly":["0","0","1"]}]}"#,
        )
        .unwrap();
        for k in 2..40 {
            let g = f.snap_to_grid(k).unwrap();
            assert_eq!(g.fprime_l2_squared(), f.fprime_l2_squared(), "k={k}");
            let sum = |h: &PiecewisePoly| -> Rational {
                h.jumps().into_iter().map(|(_, j)| j.into_rational()).sum()
            };
            assert_eq!(sum(&g), sum(&f));
            for (x, _) in g.jumps() {
                assert_eq!(Rational::from(x.as_rational() * k).denom().to_u32(), Some(1));
            }
        }
    }

    #[test]
    fn linear_combinations() {
        let f = saw().add(&half_indicator().scaled(&fr("2")));
        assert_eq!(f.eval_exact(&fr("1/4")), fr("9/4"));
        assert_eq!(f.eval_exact(&fr("3/4")), fr("3/4"));
        assert_eq!(f.eval_exact(&fr("1/2")), fr("3/2"));
    }
}
