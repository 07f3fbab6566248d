use cotsums::bounds::test_function_suite;
use cotsums::piecewise::Piece;
use cotsums::{Fraction, PiecewisePoly, Precision};
use proptest::prelude::*;
use rug::{Float, Rational};

fn frac(n: i64, d: u64) -> Fraction {
    Fraction::new(n, d).unwrap()
}

fn f64_of(x: &Fraction) -> f64 {
    x.to_f64()
}

/// `f'(y)` in double precision from the raw coefficients.
fn fprime_f64(f: &PiecewisePoly, y: f64) -> f64 {
    let p = f.pieces().iter().rev().find(|p| f64_of(&p.start) <= y).unwrap();
    p.poly
        .iter()
        .enumerate()
        .skip(1)
        .map(|(j, c)| j as f64 * f64_of(c) * y.powi(j as i32 - 1))
        .sum()
}

#[test]
fn fourier_coefficients_match_quadrature() {
    let p = Precision::new(64).unwrap();
    for (name, f) in test_function_suite() {
        for n in [-7i64, -1, 1, 2, 5, 13] {
            // composite Simpson on every piece
            let (mut re, mut im) = (0f64, 0f64);
            for piece in f.pieces() {
                let (a, b) = (f64_of(&piece.start), f64_of(&piece.end));
                let steps = 4000;
                let h = (b - a) / steps as f64;
                for i in 0..=steps {
                    let y = (a + i as f64 * h).clamp(a + 1e-15, b - 1e-15);
                    let w = if i == 0 || i == steps { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
                    let theta = -2.0 * std::f64::consts::PI * n as f64 * y;
                    let v = fprime_f64(&f, y) * w * h / 3.0;
                    re += v * theta.cos();
                    im += v * theta.sin();
                }
            }
            let z = f.fprime_fourier(n, p);
            assert!((z.real().to_f64() - re).abs() < 1e-9, "{name} n={n}");
            assert!((z.imag().to_f64() - im).abs() < 1e-9, "{name} n={n}");
        }
    }
}

#[test]
fn parseval_partial_sums_increase_to_the_variance() {
    let p = Precision::new(64).unwrap();
    for (name, f) in test_function_suite() {
        let target = {
            let l2 = f.fprime_l2_squared().to_f64();
            let mean = f.fprime_mean().to_f64();
            l2 - mean * mean
        };
        let mut partial = 0f64;
        let mut checkpoints = Vec::new();
        for n in 1..=10_000i64 {
            for m in [n, -n] {
                let z = f.fprime_fourier(m, p);
                partial += z.real().to_f64().powi(2) + z.imag().to_f64().powi(2);
            }
            if [10, 100, 1000, 10_000].contains(&n) {
                checkpoints.push(partial);
            }
        }
        assert!(checkpoints.windows(2).all(|w| w[0] <= w[1] + 1e-12), "{name}");
        assert!(partial <= target + 1e-9, "{name}: {partial} > {target}");
        if target > 0.0 {
            assert!(partial >= 0.99 * target, "{name}: {partial} vs {target}");
        } else {
            assert!(partial < 1e-20, "{name}");
        }
    }
}

#[test]
fn bessel_sum_is_a_small_multiple_of_the_l2_norm() {
    let p = Precision::new(64).unwrap();
    for (name, f) in test_function_suite() {
        let norm = f.fprime_l2(p).to_f64();
        let mut total = 0f64;
        for n in 1..=10_000i64 {
            for m in [n, -n] {
                let z = f.fprime_fourier(m, p);
                total += (z.real().to_f64().hypot(z.imag().to_f64())) / n as f64;
            }
        }
        if norm == 0.0 {
            assert!(total < 1e-12, "{name}");
        } else {
            assert!(total / norm <= 3.0, "{name}: ratio {}", total / norm);
        }
    }
}

#[test]
fn suite_functions_survive_json() {
    for (_, f) in test_function_suite() {
        assert_eq!(PiecewisePoly::from_json(&f.to_json()).unwrap(), f);
    }
}

fn piecewise() -> impl Strategy<Value = PiecewisePoly> {
    (
        proptest::collection::btree_set(1i64..64, 0..4),
        proptest::collection::vec(proptest::collection::vec(-20i64..20, 0..4), 5),
    )
        .prop_map(|(cuts, coeffs)| {
            let mut ends: Vec<Fraction> = cuts.into_iter().map(|n| frac(n, 64)).collect();
            ends.push(Fraction::from_integer(1));
            let mut start = Fraction::zero();
            let pieces = ends
                .into_iter()
                .zip(coeffs)
                .map(|(end, c)| {
                    let piece = Piece {
                        start: start.clone(),
                        end: end.clone(),
                        poly: c.into_iter().map(|v| frac(v, 3)).collect(),
                    };
                    start = end;
                    piece
                })
                .collect();
            PiecewisePoly::new(pieces).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn eval_is_periodic(f in piecewise(), n in -500i64..500, d in 1u64..200, shift in -3i64..3) {
        let x = frac(n, d);
        let y = Fraction::from(x.as_rational().clone() + Rational::from(shift));
        prop_assert_eq!(f.eval_exact(&x), f.eval_exact(&y));
        let p = Precision::default();
        prop_assert_eq!(f.eval(&x, p), f.eval(&y, p));
    }

    #[test]
    fn json_round_trip(f in piecewise()) {
        prop_assert_eq!(PiecewisePoly::from_json(&f.to_json()).unwrap(), f);
    }

    #[test]
    fn snapping_lands_jumps_on_the_grid(f in piecewise(), k in 2u64..200) {
        let g = f.snap_to_grid(k).unwrap();
        let before: Vec<Fraction> = f.jumps().into_iter().map(|(_, j)| j).collect();
        let mut after: Vec<Fraction> = Vec::new();
        for (x, j) in g.jumps() {
            prop_assert!((x.as_rational().clone() * k).denom() == &1, "{x} off the 1/{k} grid");
            after.push(j);
        }
        prop_assert_eq!(g.fprime_l2_squared(), f.fprime_l2_squared());
        // jumps landing on the same grid point merge, so compare the total
        let sum = |v: &[Fraction]| v.iter().fold(Rational::new(), |a, x| a + x.as_rational());
        prop_assert_eq!(sum(&after), sum(&before));
    }

    #[test]
    fn grid_values_agree_with_eval(f in piecewise(), k in 2u64..100) {
        let p = Precision::default();
        let values = f.grid_values(k, p);
        for (m, v) in values.iter().enumerate() {
            let exact = f.eval(&frac(m as i64, k), p);
            let diff = Float::with_val(p.bits(), v - &exact).abs();
            prop_assert!(diff <= p.tolerance(8) * (Float::with_val(p.bits(), exact.abs_ref()) + 1u32));
        }
    }
}
