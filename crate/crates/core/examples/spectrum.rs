//! Sample a sparse Wigner matrix and compare its spectrum with the semicircle.

use qvelab::matrices::{esm, sample_sparse_wigner};
use qvelab::measure::{ks_distance, wasserstein};
use qvelab::qve::{semicircle_reference, SpectralGrid};
use qvelab::rate::EntryLaw;

fn main() -> qvelab::Result<()> {
    let n = 1000;
    let p = 0.05;
    let sample = sample_sparse_wigner(n, p, &EntryLaw::rademacher(), 42)?;
    println!("n = {n}, p = {p}, edges = {}", sample.edge_count());

    let mu = esm(&sample.entries)?;
    let sc = semicircle_reference(&SpectralGrid::new(-2.0, 2.0, 4001, 1e-3)?);
    let ev = mu.breakpoints();
    println!("extreme eigenvalues {:.4}, {:.4}", ev[0], ev[ev.len() - 1]);
    println!("KS {:.4}, W1 {:.4}", ks_distance(&mu, &sc), wasserstein(&mu, &sc, 1)?);
    Ok(())
}
