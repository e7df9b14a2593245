//! Weak regularity refinement and the upper regularity check on a planted
//! block kernel.

use qvelab::kernel::{upper_regularity_check, weak_regularity_refinement, ThresholdTable};
use qvelab::StepKernel;

fn main() -> qvelab::Result<()> {
    let k = 8;
    let rows: Vec<Vec<f64>> =
        (0..k).map(|i| (0..k).map(|j| if (i < 4) == (j < 4) { 3.0 } else { 0.5 }).collect()).collect();
    let w = StepKernel::uniform(rows)?;

    let weak = weak_regularity_refinement(&w, 1e-6, 8)?;
    println!("groups {:?}, residual {:.2e}, converged {}", weak.groups, weak.residual, weak.converged);

    // Threshold 4 clears the planted value 3; threshold 2 does not.
    for k in [4.0, 2.0] {
        let report = upper_regularity_check(&w, 0.25, &ThresholdTable::constant(k), &[0.5, 1.0], 0)?;
        println!("K = {k}: tested {} partitions, passed {}", report.partitions_tested, report.passed);
        if let Some(v) = report.violation {
            println!("  violation at eps {}: excess mass {:.4} on {:?}", v.eps, v.excess_mass, v.groups);
        }
    }
    Ok(())
}
