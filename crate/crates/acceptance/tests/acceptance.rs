use egr_acceptance::{run_all, DEFAULT_SEED, SUITE_BUDGET};

#[test]
fn acceptance() {
    let (outcomes, total) = run_all(DEFAULT_SEED, |o| println!("{}", o.line()));
    let suite_ok = total <= SUITE_BUDGET;
    println!(
        "{} suite runtime {:.1}s (budget {}s)",
        if suite_ok { "PASS" } else { "FAIL" },
        total.as_secs_f64(),
        SUITE_BUDGET.as_secs()
    );
    let failed: Vec<_> = outcomes.iter().filter(|o| !o.passed).collect();
    for o in &failed {
        for f in &o.failures {
            println!("  [{}] {f}", o.id);
        }
        for n in &o.notes {
            println!("  [{}] note: {n}", o.id);
        }
    }
    assert!(failed.is_empty() && suite_ok, "{} criteria failed", failed.len());
}
