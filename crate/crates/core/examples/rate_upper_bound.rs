//! Upper bound on the rate of a target spectral measure by searching a small
//! family of kernels whose QVE measure lands near it.

use qvelab::qve::{qve_measure, SpectralGrid};
use qvelab::rate::{rate_upper_bound, EntryLaw, LegendrePair};
use qvelab::StepKernel;

fn main() -> qvelab::Result<()> {
    let pair = LegendrePair::new(EntryLaw::rademacher());
    let target_kernel = StepKernel::constant(1.5)?;
    let target = qve_measure(&target_kernel, &SpectralGrid::new(-4.0, 4.0, 4001, 1e-3)?)?;

    let family: Vec<StepKernel> =
        [0.5, 1.0, 1.5, 2.0].iter().map(|&c| StepKernel::constant(c)).collect::<qvelab::Result<_>>()?;
    let best = rate_upper_bound(&pair, &target, &family, 1e-2)?;
    println!(
        "best constant {:.2}, rate bound {:.6}, distance {:.2e}",
        best.best_kernel.as_function().value(0, 0),
        best.h_value,
        best.attained_distance
    );
    Ok(())
}
