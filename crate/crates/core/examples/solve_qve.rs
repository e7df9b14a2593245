//! Solve the QVE for a two-block kernel and compare the flat kernel with the
//! semicircle Stieltjes transform.

use num_complex::Complex64;
use qvelab::qve::{semicircle_stieltjes, solve_qve, variance_matrix};
use qvelab::StepKernel;

fn main() -> qvelab::Result<()> {
    let w = StepKernel::uniform(vec![vec![2.0, 0.5], vec![0.5, 2.0]])?;
    println!("S = {}", variance_matrix(&w));

    let zs = [Complex64::new(0.0, 1.0), Complex64::new(1.0, 0.1), Complex64::new(-2.5, 0.01)];
    let sol = solve_qve(&w, &zs)?;
    for ((z, m), r) in zs.iter().zip(&sol.m_values).zip(&sol.residuals) {
        println!("z = {z:.3}: m = [{:.6}, {:.6}], residual {r:.1e}", m[0], m[1]);
    }

    let one = StepKernel::constant(1.0)?;
    let z = Complex64::new(0.3, 0.5);
    let m = solve_qve(&one, &[z])?.m_values[0][0];
    println!("W = 1 at z = {z}: {m:.12} vs closed form {:.12}", semicircle_stieltjes(z));
    Ok(())
}
