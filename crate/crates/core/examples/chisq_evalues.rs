//! Likelihood-ratio e-values for a sum of squares: noncentral over central chi-square.

use epbh::constructors::{chisq_lr_evalue, noncentral_chisq_pdf};

fn main() -> epbh::Result<()> {
    let (df, ncp) = (9, 10.0);
    for s in [1.0, 5.0, 9.0, 20.0, 40.0, 2000.0] {
        println!(
            "S = {s:>6}: f_ncp = {:.3e}, E = {:.4e}",
            noncentral_chisq_pdf(s, df, ncp)?,
            chisq_lr_evalue(s, df, ncp)?.get()
        );
    }
    Ok(())
}
