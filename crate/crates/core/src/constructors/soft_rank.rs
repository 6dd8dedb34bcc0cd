//! Soft-rank permutation e-values.
//!
//! Given an original statistic `L_0` and `B` statistics exchangeable with it
//! under the null, each is mapped to `R_b = (exp(r L_b) - exp(r L_*)) / r`
//! with `L_*` the minimum (`R_b = L_b - L_*` at `r = 0`), and
//! `E = (B + 1) R_0 / sum_b R_b`. The classical rank p-value
//! `P = #{b : L_b >= L_0} / (B + 1)` always satisfies `P <= 1/E`.

use crate::error::{Error, Result};
use crate::values::{EValue, PValue};

#[derive(Debug, Clone, PartialEq)]
pub struct PermutationStatistics {
    pub l0: f64,
    pub l_resampled: Vec<f64>,
    /// Soft-rank temperature `r >= 0`.
    pub r: f64,
}

impl PermutationStatistics {
    pub fn new(l0: f64, l_resampled: Vec<f64>, r: f64) -> Result<Self> {
        if l_resampled.is_empty() {
            return Err(Error::param("l_resampled", "at least one resampled statistic is required"));
        }
        if !l0.is_finite() || l_resampled.iter().any(|x| !x.is_finite()) {
            return Err(Error::param("l_resampled", "statistics must be finite"));
        }
        if !(r >= 0.0 && r.is_finite()) {
            return Err(Error::param("r", format!("temperature must be finite and >= 0, got {r}")));
        }
        Ok(PermutationStatistics { l0, l_resampled, r })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoftRank {
    pub e: EValue,
    pub p: PValue,
}

/// Nonnegative order-preserving transform, up to a positive factor common to all `b`.
fn transform(all: &[f64], r: f64) -> Vec<f64> {
    let lo = all.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = all.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if r == 0.0 {
        return all.iter().map(|&l| l - lo).collect();
    }
    let span = r * (hi - lo);
    if span < 500.0 {
        // (exp(r L_b) - exp(r L_*)) / r  =  exp(r L_*) expm1(r (L_b - L_*)) / r
        all.iter().map(|&l| (r * (l - lo)).exp_m1()).collect()
    } else {
        // rescaled by exp(-span) to stay finite
        all.iter()
            .map(|&l| (r * (l - hi)).exp() - (-span).exp())
            .collect()
    }
}

pub fn soft_rank_evalue(stats: &PermutationStatistics) -> SoftRank {
    let b1 = stats.l_resampled.len() + 1;
    let mut all = Vec::with_capacity(b1);
    all.push(stats.l0);
    all.extend_from_slice(&stats.l_resampled);

    let ranks = transform(&all, stats.r);
    // summed in sorted order so that (E, P) do not depend on the order of the resamples
    let mut rest = ranks[1..].to_vec();
    rest.sort_by(|a, b| a.total_cmp(b));
    let total: f64 = ranks[0] + rest.iter().sum::<f64>();
    if total <= 0.0 {
        // all statistics equal
        return SoftRank {
            e: EValue::ONE,
            p: PValue::new(1.0).unwrap(),
        };
    }
    let e = b1 as f64 * ranks[0] / total;
    let at_least = all.iter().filter(|&&l| l >= stats.l0).count();
    let p = at_least as f64 / b1 as f64;
    debug_assert!(p <= (1.0 / e) * (1.0 + 1e-12), "rank p-value {p} exceeds 1/E = {}", 1.0 / e);
    SoftRank {
        e: EValue::new(e).expect("nonnegative"),
        p: PValue::new(p).expect("in [0, 1]"),
    }
}
