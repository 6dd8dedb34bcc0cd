//! χ² likelihood-ratio e-values.

use crate::error::{Error, Result};
use crate::special::{chisq_ln_pdf, noncentral_chisq_ratio};
use crate::values::EValue;

fn check(df: u32, ncp: f64) -> Result<()> {
    if df == 0 {
        return Err(Error::param("df", "must be at least 1"));
    }
    if !(ncp >= 0.0 && ncp.is_finite()) {
        return Err(Error::param("ncp", format!("must be finite and >= 0, got {ncp}")));
    }
    Ok(())
}

/// Density of the noncentral χ² distribution.
pub fn noncentral_chisq_pdf(x: f64, df: u32, ncp: f64) -> Result<f64> {
    check(df, ncp)?;
    if x < 0.0 {
        return Ok(0.0);
    }
    Ok(chisq_ln_pdf(x, df as f64).exp() * noncentral_chisq_ratio(x, df as f64, ncp))
}

/// `f(s; df, ncp) / f(s; df)`, an e-value when `s` is central χ²(df) under the null.
pub fn chisq_lr_evalue(s: f64, df: u32, ncp: f64) -> Result<EValue> {
    check(df, ncp)?;
    if !(s >= 0.0) {
        return Err(Error::param("s", format!("must be >= 0, got {s}")));
    }
    if s.is_infinite() {
        return Ok(if ncp == 0.0 { EValue::ONE } else { EValue::INFINITY });
    }
    EValue::new(noncentral_chisq_ratio(s, df as f64, ncp))
}
