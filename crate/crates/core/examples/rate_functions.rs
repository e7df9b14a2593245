//! Legendre conjugates, kernel entropy and the tail bounds built from them.

use qvelab::rate::{
    chaos_tail_bound, dependent_bennett_bound, er_rate_h, k_alpha, kernel_entropy, psi, EntryLaw, LegendrePair,
};
use qvelab::StepKernel;

fn main() -> qvelab::Result<()> {
    let rad = LegendrePair::new(EntryLaw::rademacher());
    let sparse = LegendrePair::new(EntryLaw::sparse3());
    for u in [0.0, 0.5, 1.0, 2.0, 10.0] {
        println!(
            "u = {u:5}: rademacher {:.6} (closed form {:.6}), sparse3 {:.6}",
            rad.h(u)?,
            er_rate_h(u)?,
            sparse.h(u)?
        );
    }

    let w = StepKernel::uniform(vec![vec![2.0, 0.5], vec![0.5, 2.0]])?;
    println!("H(W) = {:.6}", kernel_entropy(&rad, &w)?);

    let u = k_alpha(&rad, 2.0, 0.25)?;
    println!("K_alpha(0.25) for alpha = 2: {u:.6}, psi = {:.9}", psi(&rad, u)?);

    let b = dependent_bennett_bound(1.0, 1.0, 10.0)?;
    println!("Bennett bound {:.3e}, weak form {:.3e}", b.bound, b.weak);
    println!("chaos tail bound {:.3e}", chaos_tail_bound(50.0, 0.01, 100.0)?);
    Ok(())
}
