//! Recover the QVE density by Stieltjes inversion and print a coarse profile.

use qvelab::qve::{qve_measure_with, support_bound, InversionOptions, SpectralGrid};
use qvelab::trees::qve_moment;
use qvelab::StepKernel;

fn main() -> qvelab::Result<()> {
    let w = StepKernel::uniform(vec![vec![3.0, 0.2, 0.2], vec![0.2, 1.0, 0.5], vec![0.2, 0.5, 0.4]])?;
    let grid = SpectralGrid::for_kernel(&w);
    let opts = InversionOptions { richardson: true, ..Default::default() };
    let mu = qve_measure_with(&w, &grid, &opts)?;

    println!("support within ±{:.3}", support_bound(&w));
    for i in 0..=16 {
        let x = grid.x_min + (grid.x_max - grid.x_min) * i as f64 / 16.0;
        println!("x = {x:7.3}  cdf = {:.4}", mu.cdf(x));
    }
    for k in [2, 4] {
        println!("moment {k}: density {:.6}, trees {:.6}", mu.moment(k as u32), qve_moment(k, &w)?);
    }
    Ok(())
}
