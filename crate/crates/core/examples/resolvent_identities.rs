//! Schur complement and Ward identities for the resolvent of a sampled matrix,
//! and the rank bound for zeroing rows.

use num_complex::Complex64;
use qvelab::matrices::{rank_ks_check, sample_sparse_wigner, schur_residual, ward_residual};
use qvelab::rate::EntryLaw;

fn main() -> qvelab::Result<()> {
    let m = sample_sparse_wigner(200, 0.1, &EntryLaw::sparse3(), 3)?.entries;
    let z = Complex64::new(0.4, 0.05);
    let mut schur: f64 = 0.0;
    let mut ward: f64 = 0.0;
    for i in 0..m.nrows() {
        schur = schur.max(schur_residual(&m, z, i)?);
        ward = ward.max(ward_residual(&m, z, i)?);
    }
    println!("max Schur residual {schur:.2e}, max Ward residual {ward:.2e}");

    let r = rank_ks_check(&m, &[0, 5, 17])?;
    println!("KS after zeroing 3 rows: {:.4} ≤ {:.4}: {}", r.ks, r.bound, r.holds);
    Ok(())
}
