use std::time::Instant;

use cotsums::bounds::{check_thm_mt, lemma_ml_decompose, lemma_ml_sweep, test_function_suite};
use cotsums::numtheory::gcd_u64;
use cotsums::sums::{partial_cot, s_f};
use cotsums::vseries::V1Kernel;
use cotsums::{Error, Fraction, PiecewisePoly, Precision};
use proptest::prelude::*;
use rug::Float;

fn frac(n: i64, d: u64) -> Fraction {
    Fraction::new(n, d).unwrap()
}

fn suite_fn(name: &str) -> PiecewisePoly {
    test_function_suite().into_iter().find(|(n, _)| *n == name).unwrap().1
}

#[test]
fn decomposition_residuals_do_not_grow_with_k() {
    let p = Precision::default();
    let t = Instant::now();
    let low = lemma_ml_sweep(2, 150, p).unwrap();
    let high = lemma_ml_sweep(151, 300, p).unwrap();
    println!(
        "residual / max(1, |f'|_2): {:.4} (k <= 150), {:.4} (150 < k <= 300); \
         residual / max(1, |f'|_2^(1/2)): {:.4}, {:.4}; {:.1?}",
        low.0,
        high.0,
        low.1,
        high.1,
        t.elapsed()
    );
    assert!(low.0.is_finite() && high.0.is_finite());
    assert!(high.0 <= 1.5 * low.0, "{high:?} vs {low:?}");
}

#[test]
fn snapping_costs_at_most_half_the_jump_budget_up_to_300() {
    let p = Precision::default();
    for (name, f) in test_function_suite() {
        if f.discontinuities() == 0 {
            continue;
        }
        let budget = f.discontinuities() as f64 * f.d0().to_f64();
        for k in (61..=300u64).step_by(7) {
            let g = f.snap_to_grid(k).unwrap();
            for h in (1..k).filter(|&h| gcd_u64(h, k) == 1).step_by(3) {
                let a = s_f(&f, h as i64, k, p).unwrap().value.to_f64();
                let b = s_f(&g, h as i64, k, p).unwrap().value.to_f64();
                assert!((a - b).abs() <= 0.5 * budget, "{name} k={k} h={h}");
            }
        }
    }
}

#[test]
fn continuous_functions_are_bounded_by_their_derivative_norm() {
    let p = Precision::default();
    for name in ["quadratic_spline", "triangle", "skew_triangle"] {
        let f = suite_fn(name);
        let d1 = f.fprime_l2(p).to_f64();
        let mut worst = 0f64;
        for k in 2..=200u64 {
            for h in (1..k).filter(|&h| gcd_u64(h, k) == 1) {
                let c = check_thm_mt(&f, h, k, p).unwrap();
                assert_eq!((c.main_direct, c.main_inverse), (0.0, 0.0));
                worst = worst.max(c.measured / d1);
            }
        }
        assert!(worst < 1.0, "{name}: {worst}");
    }
}

#[test]
fn decomposition_of_the_identity_has_a_bounded_tail() {
    let p = Precision::default();
    let x = suite_fn("sawtooth");
    for k in [7u64, 50, 101, 256] {
        for h in (1..k).filter(|&h| gcd_u64(h, k) == 1) {
            let d = lemma_ml_decompose(&x, h, k, p).unwrap();
            assert!(d.residual.to_f64().abs() <= 1.0, "k={k} h={h}: {}", d.residual);
        }
    }
}

#[test]
fn constants_decompose_trivially() {
    let p = Precision::default();
    let one = PiecewisePoly::polynomial(&[Fraction::from_integer(3)]);
    let d = lemma_ml_decompose(&one, 4, 11, p).unwrap();
    assert_eq!(d.combination, 0);
    assert!(d.residual.to_f64().abs() < 1e-30);
}

#[test]
fn indicator_combination_tracks_the_partial_sum() {
    let p = Precision::default();
    for (k, l) in [(11u64, 4i64), (37, 10), (64, 31)] {
        let f = PiecewisePoly::indicator(&Fraction::zero(), &frac(l, k), &Fraction::from_integer(1)).unwrap();
        let kernel = V1Kernel::new(k, p).unwrap();
        for h in (1..k).filter(|&h| gcd_u64(h, k) == 1) {
            let d = lemma_ml_decompose(&f, h, k, p).unwrap();
            // two jumps: +1 at 0 and -1 at l/k
            let hbar = cotsums::numtheory::mod_inverse_u64(h as i64, k).unwrap() as i64;
            let want = Float::with_val(p.bits(), kernel.eval(hbar, 0).unwrap().value - kernel.eval(hbar, l).unwrap().value) / p.pi();
            assert!(Float::with_val(p.bits(), &d.combination - &want).abs() <= p.tolerance(16));
            // S_f is the partial sum up to l with half weight at m = l
            let c = partial_cot(h as i64, k, l as u64, p).unwrap().value.to_f64();
            let sf = d.combination.to_f64() + d.residual.to_f64();
            let cot_last = 1.0 / (std::f64::consts::PI * ((l as u64 * h) % k) as f64 / k as f64).tan();
            assert!((sf - (c - 0.5 * cot_last / k as f64)).abs() < 1e-12, "k={k} h={h}");
        }
    }
}

#[test]
fn off_grid_jumps_are_rejected() {
    let f = suite_fn("indicator_third");
    assert!(matches!(lemma_ml_decompose(&f, 1, 10, Precision::default()), Err(Error::Precondition(_))));
    assert!(lemma_ml_decompose(&f.snap_to_grid(10).unwrap(), 1, 10, Precision::default()).is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn cases_are_well_formed(i in 0usize..8, k in 2u64..400, h_seed in any::<u64>()) {
        prop_assume!(k >= 3);
        let h = 1 + h_seed % (k - 1);
        prop_assume!(gcd_u64(h, k) == 1);
        let (_, f) = &test_function_suite()[i];
        let c = check_thm_mt(f, h, k, Precision::default()).unwrap();
        prop_assert!(c.measured >= 0.0 && c.measured_inverse >= 0.0);
        prop_assert!(c.slack_budget >= 0.0);
        prop_assert!(c.main_direct >= 0.0 && c.main_inverse >= 0.0);
        prop_assert!(c.excess().is_finite());
    }
}
