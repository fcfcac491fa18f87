//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! All scenarios run inside one test so the sweep and scan computed for the
//! phenomenology checks are reused by the determinism check.

use mapode::scenarios::registry;

#[test]
fn acceptance_criteria() {
    let mut failed = Vec::new();
    for s in registry() {
        match s.run() {
            Ok(o) => {
                let tag = if o.passed { "PASS" } else { "FAIL" };
                println!("{tag} [{:>2}] {}: {} ({:.2?})", s.criterion, s.id, o.summary, o.elapsed);
                for d in &o.details {
                    println!("           {d}");
                }
                if !o.passed {
                    failed.push(s.id);
                }
            }
            Err(e) => {
                println!("FAIL [{:>2}] {}: error: {e}", s.criterion, s.id);
                failed.push(s.id);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
