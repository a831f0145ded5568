//! Acceptance gate for the workbench: one timed pass/fail line per
//! criterion, asserted together at the end so a failure still prints the
//! full scoreboard.
//!
//! The default tier runs q = 3 in both ring flavors; q = 5 (equal
//! characteristic) is the extended tier. Budgets are wall-clock upper
//! bounds; exceeding one fails the criterion even if the mathematics
//! passed.

use std::time::{Duration, Instant};

use whittaker_core::gl2table::{BType, CharacterTable};
use whittaker_core::tower::{RingFlavor, Q4};
use whittaker_core::verifier::{
    all_passed, default_sweep, tower_checks, verify_datum, CheckResult, DatumOutcome,
    HeavyChecks, TowerSummary, Workbench,
};

struct Criterion {
    name: &'static str,
    passed: bool,
    elapsed: Duration,
    detail: String,
}

fn named<'a>(checks: &'a [CheckResult], name: &str) -> &'a CheckResult {
    checks
        .iter()
        .find(|c| c.name == name)
        .unwrap_or_else(|| panic!("checklist is missing {name}"))
}

/// True when the named check passed in every outcome.
fn check_everywhere(outcomes: &[(Q4, u32, DatumOutcome)], names: &[&str]) -> (bool, String) {
    let mut failures = Vec::new();
    for (x, c, outcome) in outcomes {
        for name in names {
            let check = named(&outcome.checks, name);
            if !check.passed {
                failures.push(format!("x={x:?} c={c} {name}: {}", check.detail));
            }
        }
    }
    if failures.is_empty() {
        (true, format!("{} checks x {} data all pass", names.len(), outcomes.len()))
    } else {
        (false, failures.join("; "))
    }
}

struct FlavorRun {
    workbench: Workbench,
    tower_checks: Vec<CheckResult>,
    tower_summary: TowerSummary,
    outcomes: Vec<(Q4, u32, DatumOutcome)>,
    elapsed: Duration,
}

fn run_flavor(q: u32, flavor: RingFlavor, data: &[(Q4, u32)]) -> FlavorRun {
    let t0 = Instant::now();
    let workbench = Workbench::new(q, flavor).expect("workbench builds");
    let (checks, summary) = tower_checks(&workbench);
    let outcomes: Vec<(Q4, u32, DatumOutcome)> = data
        .iter()
        .map(|&(x, c)| (x, c, verify_datum(&workbench, x, c, HeavyChecks::none())))
        .collect();
    FlavorRun {
        workbench,
        tower_checks: checks,
        tower_summary: summary,
        outcomes,
        elapsed: t0.elapsed(),
    }
}

#[test]
fn acceptance_criteria() {
    let sweep = default_sweep();
    let eq = run_flavor(3, RingFlavor::EqualChar, &sweep);
    let witt = run_flavor(3, RingFlavor::MixedChar, &sweep);
    let q5 = run_flavor(5, RingFlavor::EqualChar, &[([0, 1, 1, 0], 1)]);

    let mut results: Vec<Criterion> = Vec::new();

    // 1. Double cosets: transversal size, pairing partition, antidiagonal
    //    coverage.
    {
        let a = named(&eq.tower_checks, "coset-transversal-and-pairing");
        let b = named(&witt.tower_checks, "coset-transversal-and-pairing");
        let elapsed = Duration::from_millis((a.millis + b.millis) as u64);
        let passed = a.passed && b.passed && elapsed < Duration::from_secs(5);
        results.push(Criterion {
            name: "double-cosets",
            passed,
            elapsed,
            detail: format!("both flavors: {}", a.detail),
        });
    }

    // 2. Determinant closed form, exact, with a unique vanishing coset, at
    //    q=3 (both flavors) and q=5.
    {
        let t0 = Instant::now();
        let (p3, d3) = check_everywhere(&eq.outcomes, &["det-l-closed-form"]);
        let (p3w, _) = check_everywhere(&witt.outcomes, &["det-l-closed-form"]);
        let (p5, d5) = check_everywhere(&q5.outcomes, &["det-l-closed-form"]);
        results.push(Criterion {
            name: "det-l-closed-form",
            passed: p3 && p3w && p5,
            elapsed: t0.elapsed(),
            detail: format!("q=3 both flavors ({d3}); q=5 ({d5})"),
        });
    }

    // 3. Per-coset dimensions q(q-1) / q(q^2-1) / 0 summing to q^3(q-1).
    {
        let t0 = Instant::now();
        let (p3, _) = check_everywhere(&eq.outcomes, &["coset-dimensions"]);
        let (p3w, _) = check_everywhere(&witt.outcomes, &["coset-dimensions"]);
        let (p5, _) = check_everywhere(&q5.outcomes, &["coset-dimensions"]);
        let dims_ok = eq.outcomes.iter().all(|(_, _, o)| {
            o.summary.as_ref().map(|s| s.dim_total == 54).unwrap_or(false)
        }) && q5.outcomes.iter().all(|(_, _, o)| {
            o.summary.as_ref().map(|s| s.dim_total == 500).unwrap_or(false)
        });
        results.push(Criterion {
            name: "coset-dimensions",
            passed: p3 && p3w && p5 && dims_ok,
            elapsed: t0.elapsed(),
            detail: "totals 54 at q=3 and 500 at q=5 with per-coset values as prescribed".into(),
        });
    }

    // 4. Character table completeness at q=3: squared dimensions sum to the
    //    group order, Gram matrix is the identity, and the census matches
    //    the predicted counts and dimensions.
    {
        let t0 = Instant::now();
        let table = CharacterTable::build(&eq.workbench.tw).expect("table builds");
        let certified = table.certify().is_ok();
        let q: i64 = 3;
        let census = table.regular_census();
        let census_ok = census
            == vec![
                (BType::Elliptic, q * (q - 1), ((q * q - q) / 2 * (q + 1) * (q - 1)) as usize),
                (BType::NonSemisimple, q * q - 1, (q * q * (q - 1)) as usize),
                (
                    BType::SplitSemisimple,
                    q * (q + 1),
                    (q * (q - 1) / 2 * (q - 1) * (q - 1)) as usize,
                ),
            ];
        let elapsed = t0.elapsed();
        results.push(Criterion {
            name: "character-table",
            passed: certified && census_ok && elapsed < Duration::from_secs(60),
            elapsed,
            detail: format!(
                "78 rows, dim^2 sum 3888, Gram = I; per-class counts (q+1, q, q-1) at dims \
                 (q(q-1), q^2-1, q(q+1)): {census:?}"
            ),
        });
    }

    // 5. Oracle equality: the raw double-coset evaluator matches the closed
    //    forms, and the kernel pairing sums reproduce the q^4/0 and q^8
    //    patterns on sampled inputs.
    let heavy_outcome;
    {
        let t0 = Instant::now();
        let outcome = verify_datum(&eq.workbench, [0, 1, 1, 0], 0, HeavyChecks::standard());
        let elapsed = t0.elapsed();
        let oracle = named(&outcome.checks, "oracle-vs-closed-form");
        let pairing = named(&outcome.checks, "kernel-pairing-vanishing");
        let average = named(&outcome.checks, "kernel-average");
        let passed = oracle.passed
            && pairing.passed
            && average.passed
            && elapsed < Duration::from_secs(600);
        results.push(Criterion {
            name: "oracle-equality",
            passed,
            elapsed,
            detail: format!("{}; {}; {}", oracle.detail, pairing.detail, average.detail),
        });
        heavy_outcome = outcome;
    }

    // 6. Main theorem: identical {0,1} multiplicity vectors for the whole
    //    sweep at q=3 (both flavors) and one datum at q=5.
    {
        let names = ["main-equality", "multiplicity-vectors"];
        let (p_eq, _) = check_everywhere(&eq.outcomes, &names);
        let (p_witt, _) = check_everywhere(&witt.outcomes, &names);
        let (p5, _) = check_everywhere(&q5.outcomes, &names);
        let q3_in_budget = eq.elapsed < Duration::from_secs(120)
            && witt.elapsed < Duration::from_secs(120);
        let q5_in_budget = q5.elapsed < Duration::from_secs(1800);
        results.push(Criterion {
            name: "main-theorem",
            passed: p_eq && p_witt && p5 && q3_in_budget && q5_in_budget,
            elapsed: eq.elapsed + witt.elapsed + q5.elapsed,
            detail: format!(
                "10 data per q=3 flavor in {:.1?}/{:.1?}, one q=5 datum in {:.1?}; \
                 5 theta indices x 2 parameter kinds",
                eq.elapsed, witt.elapsed, q5.elapsed
            ),
        });
    }

    // 7. Structural classification: constituent types, central characters,
    //    invariant classes, the identity-coset block, and the Mackey
    //    multiplicities all match the predictions, with zero mismatches.
    {
        let t0 = Instant::now();
        let names = [
            "b-matrix-nonscalar",
            "b-class-census",
            "coset-separating-discriminant",
            "identity-irreducibility-dichotomy",
            "per-coset-constituents",
            "constituent-structure",
            "mackey-multiplicity-cross-check",
            "central-twist",
            "conjugated-embedding-invariance",
        ];
        let (p_eq, d_eq) = check_everywhere(&eq.outcomes, &names);
        let (p_witt, _) = check_everywhere(&witt.outcomes, &names);
        results.push(Criterion {
            name: "structural-classification",
            passed: p_eq && p_witt,
            elapsed: t0.elapsed(),
            detail: format!("both flavors, both parameter kinds: {d_eq}"),
        });
    }

    // 8. Restriction law: the kernel characters inside the induced
    //    character form exactly the predicted two-parameter family, and the
    //    invariant character has multiplicity one in the non-central case.
    {
        let t0 = Instant::now();
        let names = [
            "kernel-support-family",
            "scalar-kernel-multiplicity",
            "family-characteristic-polynomial",
            "kernel-content-per-coset",
        ];
        let (p_eq, d_eq) = check_everywhere(&eq.outcomes, &names);
        let (p_witt, _) = check_everywhere(&witt.outcomes, &names);
        results.push(Criterion {
            name: "restriction-law",
            passed: p_eq && p_witt,
            elapsed: t0.elapsed(),
            detail: format!("exhaustive residue-matrix scans: {d_eq}"),
        });
    }

    // 9. Flavor invariance: every integer summary agrees between the two
    //    base rings at q = p = 3.
    {
        let t0 = Instant::now();
        let tower_match = eq.tower_summary == witt.tower_summary;
        let mut datum_match = true;
        let mut mismatch = String::new();
        for ((x, c, a), (_, _, b)) in eq.outcomes.iter().zip(&witt.outcomes) {
            if a.summary != b.summary {
                datum_match = false;
                mismatch = format!("x={x:?} c={c} summaries differ");
                break;
            }
        }
        results.push(Criterion {
            name: "flavor-invariance",
            passed: tower_match && datum_match,
            elapsed: t0.elapsed(),
            detail: if tower_match && datum_match {
                format!(
                    "tower summary and {} datum summaries identical across flavors",
                    eq.outcomes.len()
                )
            } else {
                format!("tower match: {tower_match}; {mismatch}")
            },
        });
    }

    println!("\nacceptance scoreboard");
    for (i, r) in results.iter().enumerate() {
        println!(
            "  {} criterion {}: {} ({:.2?}) {}",
            if r.passed { "PASS" } else { "FAIL" },
            i + 1,
            r.name,
            r.elapsed,
            r.detail
        );
    }

    // The heavy run doubles as a full checklist pass on one datum; surface
    // any non-criterion failure it found as well.
    assert!(
        all_passed(&heavy_outcome.checks),
        "heavy checklist failures: {:?}",
        heavy_outcome
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| format!("{}: {}", c.name, c.detail))
            .collect::<Vec<_>>()
    );
    assert!(
        all_passed(&eq.tower_checks) && all_passed(&witt.tower_checks) && all_passed(&q5.tower_checks),
        "tower checklist failure"
    );
    let failed: Vec<&str> = results.iter().filter(|r| !r.passed).map(|r| r.name).collect();
    assert!(failed.is_empty(), "failed acceptance criteria: {failed:?}");
}
