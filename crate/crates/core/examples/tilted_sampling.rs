//! Exponentially tilted sampling towards a two-block variance profile.

use qvelab::matrices::{empirical_kernel, esm, tilted_effective_kernel, tilted_sample};
use qvelab::measure::ks_distance;
use qvelab::qve::{qve_measure, SpectralGrid};
use qvelab::rate::{kernel_entropy, EntryLaw, LegendrePair};
use qvelab::StepKernel;

fn main() -> qvelab::Result<()> {
    let pair = LegendrePair::new(EntryLaw::rademacher());
    let u = StepKernel::uniform(vec![vec![2.0, 0.5], vec![0.5, 2.0]])?;
    let (n, p) = (1000, 0.05);

    let sample = tilted_sample(n, p, &pair, &u, 7)?;
    let realized = empirical_kernel(&sample)?.step_average(u.partition());
    println!("block averages of the sample: {:?}", realized.as_function().rows());
    println!("expected at this p: {:?}", tilted_effective_kernel(&pair, p, &u)?.as_function().rows());

    let target = qve_measure(&u, &SpectralGrid::for_kernel(&u))?;
    println!("KS to the QVE measure of U: {:.4}", ks_distance(&esm(&sample.entries)?, &target));
    println!("entropy cost H(U) = {:.4}", kernel_entropy(&pair, &u)?);
    Ok(())
}
