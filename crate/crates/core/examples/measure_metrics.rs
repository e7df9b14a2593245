//! Distances between one-dimensional probability measures.

use qvelab::measure::{ks_distance, metric_d, metric_inequality_check, wasserstein};
use qvelab::qve::{semicircle_reference, SpectralGrid};
use qvelab::ProbMeasure1D;

fn main() -> qvelab::Result<()> {
    let mu = ProbMeasure1D::atoms(vec![-1.0, 0.0, 2.0], vec![0.25, 0.5, 0.25])?;
    let nu = ProbMeasure1D::uniform_atoms(vec![-0.5, 1.0])?;
    println!("KS {:.4}", ks_distance(&mu, &nu));
    println!("W1 {:.4}, W2 {:.4}", wasserstein(&mu, &nu, 1)?, wasserstein(&mu, &nu, 2)?);
    println!("d {:.4}", metric_d(&mu, &nu));
    let r = metric_inequality_check(&mu, &nu)?;
    println!("d ≤ bound: {:.4} ≤ {:.4}", r.lhs, r.rhs);

    let sc = semicircle_reference(&SpectralGrid::new(-2.0, 2.0, 2001, 1e-3)?);
    println!(
        "semicircle: second moment {:.6}, W1 to a Dirac at 0 {:.6}",
        sc.moment(2),
        wasserstein(&sc, &ProbMeasure1D::dirac(0.0), 1)?
    );
    Ok(())
}
