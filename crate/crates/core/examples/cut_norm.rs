//! Cut norm of a signed step function, and cut distance between two kernels
//! that differ by a relabelling.

use qvelab::kernel::{cut_distance, cut_norm, CutDistanceMode, CutNormMode};
use qvelab::{Partition, Relabel, StepFunction, StepKernel};

fn main() -> qvelab::Result<()> {
    let f = StepFunction::new(
        Partition::new(vec![0.2, 0.5, 1.0])?,
        vec![vec![1.0, -0.5, 0.25], vec![-0.5, -1.0, 0.75], vec![0.25, 0.75, 0.0]],
    )?;
    let c = cut_norm(&f, CutNormMode::Exact)?;
    println!("cut norm {:.6} on S = {:?}, T = {:?} (l1 norm {:.6})", c.value, c.rows, c.cols, f.l1_norm());
    let h = cut_norm(&f, CutNormMode::heuristic())?;
    println!("heuristic lower bound {:.6}", h.value);

    let a = StepKernel::uniform(vec![vec![2.0, 0.5, 0.0], vec![0.5, 1.0, 0.3], vec![0.0, 0.3, 0.1]])?;
    let b = a.relabel(&Relabel::new(vec![2, 0, 1])?)?;
    let d = cut_distance(a.as_function(), b.as_function(), CutDistanceMode::Exact)?;
    println!("cut distance {:.3e} via permutation {:?}", d.value, d.permutation.as_slice());
    Ok(())
}
