//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines always reach the log; any failure exits nonzero.

use std::process::ExitCode;

use casimir_piston::acceptance::{criterion_names, run, Outcome, DEFAULT_SEED};

fn report(outcome: &Outcome, seed: u64) {
    let status = if outcome.passed { "PASS" } else { "FAIL" };
    let limit = outcome
        .runtime_limit_seconds
        .map_or("no limit".to_string(), |l| format!("limit {l} s"));
    println!(
        "[{status}] criterion {:>2} {:<24} seed {seed:<9} {} checks, {:.3} s ({limit}) - {}",
        outcome.id,
        outcome.name,
        outcome.checks.len(),
        outcome.runtime_seconds,
        outcome.summary
    );
    if let Some(f) = &outcome.failure {
        println!("    error: {f}");
    }
    for c in outcome.failed_checks() {
        println!(
            "    failed: {} observed {:e} expected {:e} (error {:e} > {:e})",
            c.label,
            c.observed,
            c.expected,
            c.error(),
            c.tolerance
        );
    }
}

const PROPERTY_SEEDS: [u64; 3] = [DEFAULT_SEED, 7, 1_000_003];

fn main() -> ExitCode {
    let mut failed = 0;
    let mut total = 0;
    for name in criterion_names() {
        let seeds: &[u64] = if name == "property-suites" { &PROPERTY_SEEDS } else { &[DEFAULT_SEED] };
        for &seed in seeds {
            let outcome = run(name, seed).expect("known criterion");
            report(&outcome, seed);
            total += 1;
            if !outcome.passed {
                failed += 1;
            }
        }
    }
    println!("acceptance: {} of {total} runs passed", total - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
