//! Run the randomized verification suites and summarize each check.

use qvelab::suites::{run_suite, Suite};

fn main() -> qvelab::Result<()> {
    for suite in [Suite::Identities, Suite::Inequalities, Suite::Oracles] {
        let report = run_suite(suite, 20, 1)?;
        println!("{}: {}", suite.name(), if report.passed() { "passed" } else { "FAILED" });
        for c in &report.checks {
            println!("  {:<18} {:>3}/{:<3} failures, worst {:.2e}", c.name, c.failures, c.trials, c.worst);
        }
    }
    Ok(())
}
