//! The acceptance gate: runs every criterion in the self-verification suite
//! and prints one pass/fail line per criterion. Run with
//! `cargo test --test acceptance -- --nocapture` to see the table.

use spinsim::verify::{render_report, run_acceptance};

#[test]
fn acceptance_criteria() {
    let outcomes = run_acceptance();
    for o in &outcomes {
        println!(
            "{}: criterion {} ({}) — {} [{:.2}s]",
            if o.passed { "PASS" } else { "FAIL" },
            o.id,
            o.name,
            o.detail,
            o.seconds
        );
    }
    let total: f64 = outcomes.iter().map(|o| o.seconds).sum();
    println!("total: {total:.2}s");
    assert!(
        outcomes.iter().all(|o| o.passed),
        "failed criteria:\n{}",
        render_report(&outcomes)
    );
    assert!(total < 60.0, "acceptance suite took {total:.1}s (budget 60s)");
}
