//! Prints one PASS/FAIL line per acceptance criterion, then fails if any failed.

use yule_bins_validation::evaluate;

#[test]
fn acceptance_criteria() {
    let verdicts = evaluate().expect("experiments run");
    println!();
    for v in &verdicts {
        println!("{}", v.line());
    }
    let failed: Vec<&str> = verdicts.iter().filter(|v| !v.pass).map(|v| v.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
