//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any criterion fails.

mod common;

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use common::{integration_oracle, FROZEN_ORACLE};
use roi_accuracy::propagation::{
    exact_worst_case_bounds, max_probable_error, probable_error, taylor_validity_table,
};
use roi_accuracy::rng::{StreamDomain, Substream};
use roi_accuracy::simulation::{
    compare_with_analytic, convergence_study, run_simulation, run_sweep, simulate_draws,
    CaseSource, SimulationConfig, SweepConfig, SweepRange,
};
use roi_accuracy::{compute_roi, Estimate, Money};

const REL_TOL: f64 = 1e-12;

struct Outcome {
    passed: bool,
    detail: String,
}

fn check(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn rel_close(got: f64, want: f64, tol: f64) -> bool {
    (got - want).abs() <= tol * want.abs().max(f64::MIN_POSITIVE)
}

fn explicit(cost: f64) -> CaseSource {
    CaseSource::ActualCost(Money::new(cost).unwrap())
}

fn sim(cost: f64, ratio: f64, e: f64, n: usize, seed: u64) -> SimulationConfig {
    SimulationConfig {
        iterations: n,
        seed,
        case_source: explicit(cost),
        benefit_cost_ratio: ratio,
        e_benefit: e,
        e_cost: e,
    }
}

fn ac1_formula_table() -> Outcome {
    let b = Estimate::new(200.0, 20.0).unwrap();
    let c = Estimate::new(100.0, 10.0).unwrap();
    let roi = compute_roi(b.value, c.value).unwrap().fraction();
    let mpe = max_probable_error(&b, &c).unwrap();
    let pe = probable_error(&b, &c).unwrap();
    let (lo, hi) = exact_worst_case_bounds(&b, &c).unwrap();
    let checks = [
        ("roi", roi, 1.0),
        ("max_probable_error", mpe, 0.4),
        ("probable_error", pe, 0.2_f64.hypot(0.2)),
        ("roi_upper", hi.fraction(), 220.0 / 90.0 - 1.0),
        ("roi_lower", lo.fraction(), 180.0 / 110.0 - 1.0),
    ];
    let mut ok = checks
        .iter()
        .all(|&(_, got, want)| rel_close(got, want, REL_TOL));
    // printed 7-digit values
    ok &= (pe - 0.2828427).abs() < 5e-8 && (hi.fraction() - 1.4444444).abs() < 5e-8;
    ok &= (lo.fraction() - 0.6363636).abs() < 5e-8;
    check(
        ok,
        format!(
            "roi={roi} mpe={mpe} pe={pe} bounds=({}, {})",
            hi.fraction(),
            lo.fraction()
        ),
    )
}

fn ac2_oracle_agreement() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for (e, frozen) in FROZEN_ORACLE {
        let oracle = integration_oracle(2.0, e, e, 2001);
        ok &= rel_close(oracle, frozen, 1e-5);
        let mc = run_simulation(&sim(100.0, 2.0, e, 100_000, 42))
            .unwrap()
            .mean_abs_error;
        let rel = (mc - frozen).abs() / frozen;
        ok &= rel <= 0.03;
        detail.push(format!("e={e}: mc={mc:.6} oracle={frozen} rel={rel:.4}"));
    }
    let (_, first) = FROZEN_ORACLE[0];
    ok &= (first - 0.0667).abs() < 0.0005;
    check(ok, detail.join("; "))
}

fn ac3_validity_table() -> Outcome {
    let rows = taylor_validity_table(0.95, 0.05).unwrap();
    let gap_pct = |x: f64| {
        rows.iter()
            .find(|r| (r.rel_error - x).abs() < 1e-12)
            .map(|r| r.relative_gap * 100.0)
            .unwrap()
    };
    let (g1, g2, g5) = (gap_pct(0.1), gap_pct(0.2), gap_pct(0.5));
    let mut ok = (g1 - 1.0).abs() <= 0.05 && (g2 - 4.0).abs() <= 0.05 && (g5 - 25.0).abs() <= 0.05;
    ok &= rows
        .windows(2)
        .all(|w| w[1].relative_gap > w[0].relative_gap);
    ok &= g2 >= 4.0 * g1 * 0.9;
    check(ok, format!("gap% at 0.1={g1:.4} 0.2={g2:.4} 0.5={g5:.4}"))
}

fn ac4_ordering_and_sandwich() -> Outcome {
    let mut stream = Substream::new(2024, StreamDomain::Draw, 0);
    let mut violations = 0;
    let mut with_cost_error = 0;
    for _ in 0..1000 {
        let bv = stream.uniform(1.0, 1e6);
        let cv = stream.uniform(1.0, 1e6);
        let rb = stream.next_f64();
        let rc = stream.uniform(0.0, 0.99);
        let b = Estimate::new(bv, bv * rb).unwrap();
        let c = Estimate::new(cv, cv * rc).unwrap();
        let mpe = max_probable_error(&b, &c).unwrap();
        let pe = probable_error(&b, &c).unwrap();
        if pe > mpe * (1.0 + REL_TOL) {
            violations += 1;
        }
        if c.abs_error() > 0.0 {
            with_cost_error += 1;
            let r = compute_roi(b.value, c.value).unwrap().fraction();
            let (lo, hi) = exact_worst_case_bounds(&b, &c).unwrap();
            let slack = REL_TOL * (mpe + r.abs() + 1.0);
            if r - lo.fraction() > mpe + slack || mpe > hi.fraction() - r + slack {
                violations += 1;
            }
        }
    }
    check(
        violations == 0,
        format!("1000 tuples ({with_cost_error} with δC>0), {violations} violations"),
    )
}

fn ac5_containment() -> Outcome {
    let config = sim(100.0, 2.0, 0.3, 30_000, 42);
    let (case, draws) = simulate_draws(&config).unwrap();
    let b = case.benefit_act.amount();
    let c = case.cost_act.amount();
    let (lo, hi) = exact_worst_case_bounds(
        &Estimate::new(b, b * 0.3).unwrap(),
        &Estimate::new(c, c * 0.3).unwrap(),
    )
    .unwrap();
    let (lo, hi) = (lo.fraction(), hi.fraction());
    let inside = draws
        .iter()
        .filter(|d| {
            let r = d.roi_est.fraction();
            r >= lo - REL_TOL * lo.abs().max(1.0) && r <= hi + REL_TOL * hi.abs().max(1.0)
        })
        .count();
    let flag = compare_with_analytic(&run_simulation(&config).unwrap())
        .unwrap()
        .draws_contained;
    check(
        inside == draws.len() && draws.len() == 30_000 && flag,
        format!("{inside}/{} draws inside [{lo:.6}, {hi:.6}]", draws.len()),
    )
}

fn ac6_convergence() -> Outcome {
    let config = sim(100.0, 2.0, 0.3, 1, 42);
    let rows = convergence_study(&config, &[1_000, 20_000, 100_000], 20).unwrap();
    let spread = |n: usize| rows.iter().find(|r| r.n == n).unwrap().spread;
    let (s1k, s20k, s100k) = (spread(1_000), spread(20_000), spread(100_000));
    let factor = s1k / s100k;
    check(
        s20k <= 0.01 && (2.0..=30.0).contains(&factor),
        format!("spread N=1000: {s1k:.5}, N=20000: {s20k:.5}, N=100000: {s100k:.5}, shrink factor {factor:.2}"),
    )
}

fn ac7_size_invariance() -> Outcome {
    let (small_case, small) = simulate_draws(&sim(100.0, 2.0, 0.3, 30_000, 7)).unwrap();
    let (large_case, large) = simulate_draws(&sim(1300.0, 2.0, 0.3, 30_000, 7)).unwrap();
    let same_draws = small
        .iter()
        .zip(&large)
        .all(|(a, b)| a.roi_est.fraction().to_bits() == b.roi_est.fraction().to_bits());
    let d_small = run_simulation(&sim(100.0, 2.0, 0.3, 30_000, 7))
        .unwrap()
        .mean_abs_error;
    let d_large = run_simulation(&sim(1300.0, 2.0, 0.3, 30_000, 7))
        .unwrap()
        .mean_abs_error;
    check(
        same_draws
            && small.len() == large.len()
            && d_small.to_bits() == d_large.to_bits()
            && small_case.roi_act == large_case.roi_act,
        format!("δR(100)={d_small} δR(1300)={d_large}"),
    )
}

fn ac8_sweep_shape() -> Outcome {
    let base = SweepConfig {
        ratio: 2.0,
        iterations: 30_000,
        seed: 42,
        step: 0.05,
        ..SweepConfig::default()
    };
    let low = run_sweep(&SweepConfig {
        range: SweepRange::Low,
        ..base.clone()
    })
    .unwrap();
    let full = run_sweep(&SweepConfig {
        range: SweepRange::Custom {
            start: 0.0,
            stop: 0.95,
        },
        ..base
    })
    .unwrap();
    let strictly_increasing =
        |rows: &[roi_accuracy::SweepRow]| rows.windows(2).all(|w| w[1].delta_r > w[0].delta_r);
    let mut ok = low.len() == 10 && strictly_increasing(&low) && strictly_increasing(&full);
    ok &= full[0].e == 0.0 && full[0].delta_r == 0.0 && full.len() == 20;
    let per_unit: Vec<f64> = full
        .iter()
        .filter(|r| r.e > 0.0)
        .map(|r| r.delta_r / r.e)
        .collect();
    ok &= per_unit.windows(2).all(|w| w[1] >= w[0]);
    let at = |e: f64| {
        full.iter()
            .find(|r| (r.e - e).abs() < 1e-12)
            .unwrap()
            .delta_r
    };
    let doubling = at(0.9) / at(0.45);
    ok &= doubling > 2.0;
    check(
        ok,
        format!(
            "δR/e from {:.4} (e=0.05) to {:.4} (e=0.95); δR(0.9)/δR(0.45)={doubling:.3}",
            per_unit[0],
            per_unit[per_unit.len() - 1]
        ),
    )
}

fn run_cli(args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_roi-accuracy"))
        .args(args)
        .output()
        .expect("binary runs");
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn ac9_cli_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("scenario.toml");
    std::fs::write(
        &scenario,
        "name = \"det\"\n[[benefits]]\nlabel = \"b\"\namount = 300.0\nrelative_error = 0.2\n\
         [[costs]]\nlabel = \"c\"\namount = 150.0\nrelative_error = 0.25\n",
    )
    .unwrap();
    let file = scenario.to_str().unwrap();
    let invocations: Vec<Vec<&str>> = vec![
        vec![
            "sweep", "--range", "low", "--step", "0.05", "--ratio", "2", "--seed", "7",
        ],
        vec![
            "simulate",
            "--band",
            "medium",
            "--e-benefit",
            "0.3",
            "--e-cost",
            "0.2",
            "--seed",
            "3",
        ],
        vec!["simulate", file, "--format", "csv"],
        vec![
            "convergence",
            "--cost",
            "100",
            "--e-benefit",
            "0.3",
            "--e-cost",
            "0.3",
            "--seeds",
            "3",
            "--n-list",
            "1000,5000",
        ],
        vec!["analyze", file, "--mode", "quadrature"],
        vec!["validity"],
    ];
    let mut failures = Vec::new();
    for args in &invocations {
        let (code, reference) = run_cli(args);
        for threads in ["1", "3", "8"] {
            let mut with_threads = args.clone();
            with_threads.extend(["--threads", threads]);
            let (c1, a) = run_cli(&with_threads);
            let (c2, b) = run_cli(&with_threads);
            if code != 0 || c1 != 0 || c2 != 0 || a != b || a != reference || reference.is_empty() {
                failures.push(format!("{} (threads {threads})", args[0]));
            }
        }
    }
    check(
        failures.is_empty(),
        if failures.is_empty() {
            format!(
                "{} invocations byte-identical across repeats and 1/3/8 threads",
                invocations.len()
            )
        } else {
            format!("differing: {}", failures.join(", "))
        },
    )
}

fn main() {
    assert!(Path::new(env!("CARGO_BIN_EXE_roi-accuracy")).exists());
    type Criterion = (&'static str, &'static str, fn() -> Outcome, Duration);
    let criteria: [Criterion; 9] = [
        (
            "AC1",
            "formula table",
            ac1_formula_table,
            Duration::from_secs(1),
        ),
        (
            "AC2",
            "oracle agreement",
            ac2_oracle_agreement,
            Duration::from_secs(10),
        ),
        (
            "AC3",
            "validity table",
            ac3_validity_table,
            Duration::from_secs(1),
        ),
        (
            "AC4",
            "ordering and sandwich",
            ac4_ordering_and_sandwich,
            Duration::from_secs(1),
        ),
        (
            "AC5",
            "containment",
            ac5_containment,
            Duration::from_secs(1),
        ),
        (
            "AC6",
            "convergence",
            ac6_convergence,
            Duration::from_secs(60),
        ),
        (
            "AC7",
            "size invariance",
            ac7_size_invariance,
            Duration::from_secs(5),
        ),
        (
            "AC8",
            "sweep shape",
            ac8_sweep_shape,
            Duration::from_secs(30),
        ),
        (
            "AC9",
            "CLI determinism",
            ac9_cli_determinism,
            Duration::from_secs(10),
        ),
    ];
    let mut failed = 0;
    for (id, name, run, budget) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= budget;
        let passed = outcome.passed && in_time;
        if !passed {
            failed += 1;
        }
        println!(
            "{} {id} {name}: {} [{:.2}s / {}s budget{}]",
            if passed { "PASS" } else { "FAIL" },
            outcome.detail,
            elapsed.as_secs_f64(),
            budget.as_secs(),
            if in_time { "" } else { ", over budget" }
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
