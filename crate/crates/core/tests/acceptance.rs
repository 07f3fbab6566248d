//! Acceptance criteria 1-8, one PASS/FAIL line each. Reports and the figure
//! CSVs are written under the cargo target tmpdir.

use std::fs;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use cotsums::bench;
use cotsums::figure::{figure1, write_csv};
use cotsums::numtheory::continued_fraction;
use cotsums::reciprocity::mcc_reduce;
use cotsums::verify::{self, LMode, Suite, SweepConfig};
use cotsums::{Fraction, Precision};
use serde_json::{json, Value};

const SEED: u64 = 20_240_229;

struct Outcome {
    passed: bool,
    summary: String,
    report: Value,
}

fn frac(s: &str) -> Fraction {
    s.parse().unwrap()
}

fn out_dir() -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn config(kmax: u64, lmode: LMode) -> SweepConfig {
    SweepConfig { kmax, lmode, prec: Precision::new(128).unwrap(), seed: SEED }
}

fn dedekind() -> Outcome {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let t = Instant::now();
    let r = pool.install(|| verify::run(Suite::Dedekind, &config(300, LMode::All))).unwrap();
    let elapsed = t.elapsed();
    Outcome {
        passed: r.passed && elapsed < Duration::from_secs(30),
        summary: format!(
            "exact Dedekind reciprocity, k <= 300: {} pairs, {} violations, {:.2?} on one thread",
            r.cases, r.max_residual, elapsed
        ),
        report: r.to_json(),
    }
}

fn continued_fractions() -> Outcome {
    let a = continued_fraction(&frac("231/677")).unwrap().to_string();
    let b = continued_fraction(&frac("16/215")).unwrap().to_string();
    let red = mcc_reduce(231, 677, 1).unwrap();
    let passed = a == "[0;2,1,13,2,3,2]" && b == "[0;13,2,3,2]" && (red.h1, red.k1) == (16, 215);
    Outcome {
        passed,
        summary: format!("231/677 = {a}, 16/215 = {b}, reduction (h1, k1) = ({}, {})", red.h1, red.k1),
        report: json!({ "231/677": a, "16/215": b, "h1": red.h1, "k1": red.k1 }),
    }
}

fn dft() -> Outcome {
    let r = verify::run(Suite::Dft, &config(500, LMode::All)).unwrap();
    Outcome {
        passed: r.passed,
        summary: format!(
            "cotangent DFT, {} triples with k <= 500: max error {:.3e} <= {:.3e}",
            r.cases, r.max_residual, r.threshold
        ),
        report: r.to_json(),
    }
}

fn v1() -> Outcome {
    let r = verify::run(Suite::V1, &config(100, LMode::All)).unwrap();
    let failures = r.details["truncation_failures"].as_array().map_or(0, |a| a.len());
    Outcome {
        passed: r.passed,
        summary: format!(
            "V1 closed vs truncated (M = 1000, k <= 50): {failures} outside the estimate, worst gap/estimate {:.3}; \
             reduction identity (k <= 100): max {:.3e} <= 1e-20",
            r.details["max_gap_over_err_estimate"].as_f64().unwrap_or(f64::NAN),
            r.max_residual
        ),
        report: r.to_json(),
    }
}

fn prop_mp() -> Outcome {
    let r = verify::run(Suite::PropMp, &config(200, LMode::Sample(50))).unwrap();
    let low = r.details["lower_band"]["value"].as_f64().unwrap();
    let high = r.details["upper_band"]["value"].as_f64().unwrap();
    Outcome {
        passed: r.passed,
        summary: format!(
            "V1 + V2 relation, k <= 200, 50 sampled l per pair: C = {:.4}; max over k in [100,200] = {high:.4} \
             vs 1.5 x {low:.4} over [50,100] (ratio {:.3})",
            r.max_residual,
            high / low
        ),
        report: r.to_json(),
    }
}

fn mcc() -> Outcome {
    let r = verify::run(Suite::Mcc, &config(300, LMode::All)).unwrap();
    let dir = out_dir();
    let mut rows = Vec::new();
    let mut deterministic = true;
    for (name, f) in [("231_677", "231/677"), ("16_215", "16/215")] {
        let render = || {
            let mut buf = Vec::new();
            write_csv(&figure1(&frac(f), Precision::new(128).unwrap()).unwrap(), &mut buf).unwrap();
            buf
        };
        let first = render();
        deterministic &= first == render();
        rows.push(first.iter().filter(|&&b| b == b'\n').count() - 1);
        fs::write(dir.join(format!("figure1_{name}.csv")), &first).unwrap();
    }
    let pair = r.fitted["pair_ratio"];
    let c = r.fitted["constant"];
    Outcome {
        passed: r.passed && rows == [676, 214] && deterministic,
        summary: format!(
            "(231,677): max |residual| / (231/215) = {pair:.4} <= C = {c:.4} (fitted over k <= 300); \
             figure rows {rows:?}, deterministic: {deterministic}"
        ),
        report: r.to_json(),
    }
}

fn thm_mt() -> Outcome {
    let t = Instant::now();
    let r = verify::run(Suite::ThmMt, &config(300, LMode::All)).unwrap();
    let elapsed = t.elapsed();
    let c = r.fitted["constant"];
    let val = r.fitted["validation_max"];
    let worst = &r.details["validation"];
    Outcome {
        passed: r.passed && elapsed < Duration::from_secs(300),
        summary: format!(
            "C fitted on k <= 150 = {c:.6}; validation max on 150 < k <= 300 = {val:.6} ({} at h = {}, k = {}), \
             {:.4} x C; {:.1?}",
            worst["function"].as_str().unwrap_or("?"),
            worst["h"],
            worst["k"],
            val / c,
            elapsed
        ),
        report: r.to_json(),
    }
}

fn performance() -> Outcome {
    let b = bench::run(Precision::new(128).unwrap()).unwrap();
    let sf = b.rows.iter().find(|r| r.name.starts_with("s_f direct")).unwrap();
    let bound = b.rows.iter().find(|r| r.name.starts_with("bound_v1")).unwrap();
    Outcome {
        passed: sf.within_target() && bound.within_target(),
        summary: format!(
            "s_f at k = 10^6: {:.3} s (< 2 s); bound_v1 at a 60-digit k: {:.3} ms (< 10 ms)",
            sf.seconds,
            bound.seconds * 1e3
        ),
        report: serde_json::to_value(&b).unwrap(),
    }
}

fn main() {
    let criteria: [(u32, fn() -> Outcome); 8] = [
        (1, dedekind),
        (2, continued_fractions),
        (3, dft),
        (4, v1),
        (5, prop_mp),
        (6, mcc),
        (7, thm_mt),
        (8, performance),
    ];
    let mut all = true;
    let mut reports = serde_json::Map::new();
    for (n, run) in criteria {
        let o = run();
        all &= o.passed;
        println!("criterion {n}: {} {}", if o.passed { "PASS" } else { "FAIL" }, o.summary);
        reports.insert(n.to_string(), json!({ "passed": o.passed, "summary": o.summary, "report": o.report }));
    }
    let path = out_dir().join("acceptance.json");
    fs::write(&path, serde_json::to_string_pretty(&Value::Object(reports)).unwrap()).unwrap();
    println!("reports: {}", path.display());
    if !all {
        std::process::exit(1);
    }
}
