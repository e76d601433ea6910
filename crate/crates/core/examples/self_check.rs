// The invariant checks behind `riskeysim validate`.

use riskeysim::harness::invariant_suite;

pub fn run_example() -> riskeysim::Result<()> {
    let checks = invariant_suite()?;
    for c in &checks {
        println!("{} {}: {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail);
    }
    println!("{}/{} checks pass", checks.iter().filter(|c| c.passed).count(), checks.len());
    Ok(())
}

#[allow(dead_code)]
fn main() -> riskeysim::Result<()> {
    run_example()
}
