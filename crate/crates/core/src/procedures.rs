//! Step-up multiple testing procedures on p-values, e-values, or both.
//!
//! Every procedure reduces to the p-BH step-up rule applied to some vector of
//! p-like statistics (`p`, `1/e`, `p/w`, `p/e`, `1/(h(p) e)`); the reported
//! [`RejectionResult::adjusted`] is the vector the decision was made on.
//! Indices are 0-based.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::calib::{product, quotient, Calibrator};
use crate::error::{Error, Result};
use crate::values::{ascending_order, check_e, check_p, descending_order};

/// Whether small (`PLike`) or large (`ELike`) adjusted statistics are significant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StatisticKind {
    PLike,
    ELike,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RejectionResult {
    /// Rejected indices in ascending order.
    pub rejected: Vec<usize>,
    /// `k*`; zero means no rejections.
    pub threshold_index: usize,
    pub adjusted: Vec<f64>,
    pub kind: StatisticKind,
}

impl RejectionResult {
    fn empty(adjusted: Vec<f64>, kind: StatisticKind) -> Self {
        RejectionResult {
            rejected: Vec::new(),
            threshold_index: 0,
            adjusted,
            kind,
        }
    }

    pub fn len(&self) -> usize {
        self.rejected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rejected.is_empty()
    }

    pub fn is_rejected(&self, i: usize) -> bool {
        self.rejected.binary_search(&i).is_ok()
    }

    pub fn rejected_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.adjusted.len()];
        for &i in &self.rejected {
            mask[i] = true;
        }
        mask
    }

    /// The least significant adjusted statistic that was still rejected.
    pub fn cutoff(&self) -> Option<f64> {
        let vals = self.rejected.iter().map(|&i| self.adjusted[i]);
        match self.kind {
            StatisticKind::PLike => vals.reduce(f64::max),
            StatisticKind::ELike => vals.reduce(f64::min),
        }
    }

    /// True when `self` rejects every hypothesis `other` rejects.
    pub fn contains(&self, other: &RejectionResult) -> bool {
        other.rejected.iter().all(|&i| self.is_rejected(i))
    }
}

/// Core step-up rule on p-like statistics in `[0, inf]`:
/// `k* = max { k : K s_(k) / k <= level }`, rejecting the `k*` smallest.
fn step_up(stats: &[f64], level: f64) -> (Vec<usize>, usize) {
    let k_total = stats.len() as f64;
    let order = ascending_order(stats);
    let mut k_star = 0;
    for (rank0, &i) in order.iter().enumerate() {
        let k = (rank0 + 1) as f64;
        if k_total * stats[i] / k <= level {
            k_star = rank0 + 1;
        }
    }
    let mut rejected = order[..k_star].to_vec();
    rejected.sort_unstable();
    (rejected, k_star)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param("alpha", format!("must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::param("tau", format!("must lie in (0, 1), got {tau}")));
    }
    Ok(())
}

fn check_ps(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::EmptyInput);
    }
    p.iter().enumerate().try_for_each(|(i, &v)| check_p(i, v))
}

fn check_es(e: &[f64]) -> Result<()> {
    if e.is_empty() {
        return Err(Error::EmptyInput);
    }
    e.iter().enumerate().try_for_each(|(i, &v)| check_e(i, v))
}

fn check_len(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(())
}

/// Harmonic number `sum_{k=1}^K 1/k`, the BY dependence correction.
pub fn harmonic(k: usize) -> f64 {
    (1..=k).map(|i| 1.0 / i as f64).sum()
}

/// Benjamini-Hochberg on p-values, optionally at level `alpha / l_K` (BY).
pub fn p_bh(p: &[f64], alpha: f64, by_correction: bool) -> Result<RejectionResult> {
    check_alpha(alpha)?;
    check_ps(p)?;
    let level = if by_correction {
        alpha / harmonic(p.len())
    } else {
        alpha
    };
    let (rejected, k) = step_up(p, level);
    Ok(RejectionResult {
        rejected,
        threshold_index: k,
        adjusted: p.to_vec(),
        kind: StatisticKind::PLike,
    })
}

fn e_bh_at(e: &[f64], level: f64) -> RejectionResult {
    let inv: Vec<f64> = e.iter().map(|&x| 1.0 / x).collect();
    let (rejected, k) = step_up(&inv, level);
    RejectionResult {
        rejected,
        threshold_index: k,
        adjusted: e.to_vec(),
        kind: StatisticKind::ELike,
    }
}

/// e-BH: rejects the `k*` largest e-values, `k* = max { k : k e_[k] / K >= 1/alpha }`.
///
/// Computed as p-BH on `1/e`, so the two always agree.
pub fn e_bh(e: &[f64], alpha: f64) -> Result<RejectionResult> {
    check_alpha(alpha)?;
    check_es(e)?;
    Ok(e_bh_at(e, alpha))
}

/// Weighted BH: p-BH on `min(p_k / w_k, 1)`, with `p/0 = inf` for `p > 0` and `0/0 = 0`.
pub fn weighted_p_bh(p: &[f64], w: &[f64], alpha: f64) -> Result<RejectionResult> {
    check_alpha(alpha)?;
    check_ps(p)?;
    check_len(p, w)?;
    w.iter().enumerate().try_for_each(|(i, &v)| {
        if v.is_nan() || v < 0.0 {
            Err(Error::malformed(i.to_string(), format!("weight must be >= 0, got {v}")))
        } else {
            Ok(())
        }
    })?;
    Ok(weighted_unchecked(p, w, alpha))
}

fn weighted_unchecked(p: &[f64], w: &[f64], alpha: f64) -> RejectionResult {
    let adjusted: Vec<f64> = p.iter().zip(w).map(|(&p, &w)| quotient(p, w)).collect();
    let (rejected, k) = step_up(&adjusted, alpha);
    RejectionResult {
        rejected,
        threshold_index: k,
        adjusted,
        kind: StatisticKind::PLike,
    }
}

/// Rescales e-values to weights averaging one: `w_k = K e_k / sum(e)`.
///
/// Infinite e-values share the whole budget; an all-zero vector yields unit
/// weights.
pub fn normalized_weights(e: &[f64]) -> Vec<f64> {
    let k = e.len() as f64;
    let n_inf = e.iter().filter(|x| x.is_infinite()).count();
    if n_inf > 0 {
        let share = k / n_inf as f64;
        return e
            .iter()
            .map(|x| if x.is_infinite() { share } else { 0.0 })
            .collect();
    }
    let total: f64 = e.iter().sum();
    if total <= 0.0 {
        return vec![1.0; e.len()];
    }
    e.iter().map(|&x| k * x / total).collect()
}

/// Weighted BH with e-values normalized into weights averaging one.
pub fn wbh_normalized(p: &[f64], e: &[f64], alpha: f64) -> Result<RejectionResult> {
    check_es(e)?;
    check_len(p, e)?;
    weighted_p_bh(p, &normalized_weights(e), alpha)
}

/// ep-BH: p-BH on `P*_k = min(p_k / e_k, 1)`. Identical to [`weighted_p_bh`] with `w = e`.
pub fn ep_bh(p: &[f64], e: &[f64], alpha: f64) -> Result<RejectionResult> {
    check_alpha(alpha)?;
    check_ps(p)?;
    check_es(e)?;
    check_len(p, e)?;
    Ok(weighted_unchecked(p, e, alpha))
}

/// pe-BH: e-BH on `E*_k = h(p_k) e_k`.
pub fn pe_bh(p: &[f64], e: &[f64], h: Calibrator, alpha: f64) -> Result<RejectionResult> {
    check_alpha(alpha)?;
    check_ps(p)?;
    check_es(e)?;
    check_len(p, e)?;
    let combined: Vec<f64> = p.iter().zip(e).map(|(&p, &e)| product(h, p, e)).collect();
    Ok(e_bh_at(&combined, alpha))
}

/// Storey's null-proportion estimate `(1 + #{p_k > tau}) / (K (1 - tau))`.
pub fn storey_pi0(p: &[f64], tau: f64) -> Result<f64> {
    check_tau(tau)?;
    check_ps(p)?;
    let above = p.iter().filter(|&&x| x > tau).count();
    Ok((1.0 + above as f64) / (p.len() as f64 * (1.0 - tau)))
}

/// ep-Storey: weighted BH with `w_k = 1{p_k <= tau} e_k / pi0_hat`.
pub fn ep_storey(p: &[f64], e: &[f64], alpha: f64, tau: f64) -> Result<RejectionResult> {
    check_alpha(alpha)?;
    check_es(e)?;
    check_len(p, e)?;
    let pi0 = storey_pi0(p, tau)?;
    let w: Vec<f64> = p
        .iter()
        .zip(e)
        .map(|(&p, &e)| if p <= tau { e / pi0 } else { 0.0 })
        .collect();
    Ok(weighted_unchecked(p, &w, alpha))
}

/// Storey-BH with unit weights.
pub fn storey_bh(p: &[f64], alpha: f64, tau: f64) -> Result<RejectionResult> {
    ep_storey(p, &vec![1.0; p.len()], alpha, tau)
}

/// Weighted Storey for weights averaging one:
/// `pi0_hat = (max_k w_k + sum_k w_k 1{p_k > tau}) / (K (1 - tau))`, then
/// weighted BH with `w_k 1{p_k <= tau} / pi0_hat`.
pub fn weighted_storey(p: &[f64], w: &[f64], alpha: f64, tau: f64) -> Result<RejectionResult> {
    check_alpha(alpha)?;
    check_tau(tau)?;
    check_ps(p)?;
    check_len(p, w)?;
    let w_max = w.iter().cloned().fold(0.0, f64::max);
    let above: f64 = p.iter().zip(w).filter(|(&p, _)| p > tau).map(|(_, &w)| w).sum();
    let pi0 = (w_max + above) / (p.len() as f64 * (1.0 - tau));
    let adj_w: Vec<f64> = p
        .iter()
        .zip(w)
        .map(|(&p, &w)| if p <= tau { w / pi0 } else { 0.0 })
        .collect();
    Ok(weighted_unchecked(p, &adj_w, alpha))
}

/// ep-Bonferroni: rejects `{k : p_k / e_k <= alpha / K}`.
pub fn ep_bonferroni(p: &[f64], e: &[f64], alpha: f64) -> Result<RejectionResult> {
    check_alpha(alpha)?;
    check_ps(p)?;
    check_es(e)?;
    check_len(p, e)?;
    let level = alpha / p.len() as f64;
    let adjusted: Vec<f64> = p.iter().zip(e).map(|(&p, &e)| quotient(p, e)).collect();
    let rejected: Vec<usize> = (0..adjusted.len()).filter(|&i| adjusted[i] <= level).collect();
    Ok(RejectionResult {
        threshold_index: rejected.len(),
        rejected,
        adjusted,
        kind: StatisticKind::PLike,
    })
}

/// e-merging function used by the global-null gate of [`adaptive_e_bh`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum Merging {
    /// `M(e) = mean(e)`.
    #[default]
    ArithmeticMean,
    /// `S(e) = max_k k e_[k] / K`.
    SimesMax,
}

impl Merging {
    pub fn merge(&self, e: &[f64]) -> f64 {
        let k = e.len() as f64;
        match self {
            Merging::ArithmeticMean => e.iter().sum::<f64>() / k,
            Merging::SimesMax => descending_order(e)
                .iter()
                .enumerate()
                .map(|(r, &i)| (r + 1) as f64 * e[i] / k)
                .fold(0.0, f64::max),
        }
    }
}

impl FromStr for Merging {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mean" | "arithmetic-mean" => Ok(Merging::ArithmeticMean),
            "simes" | "simes-max" => Ok(Merging::SimesMax),
            _ => Err(Error::param("merging", format!("unknown merging function `{s}`"))),
        }
    }
}

/// Minimally adaptive e-BH: tests the global null with `F(e) >= 1/alpha`
/// and, if rejected, runs e-BH at `alpha' = K alpha / (K - 1)`.
///
/// With a single hypothesis `alpha'` is undefined; plain e-BH is returned.
pub fn adaptive_e_bh(e: &[f64], alpha: f64, merging: Merging) -> Result<RejectionResult> {
    check_alpha(alpha)?;
    check_es(e)?;
    let k = e.len();
    if k == 1 {
        log::warn!("adaptive e-BH needs at least two hypotheses; falling back to e-BH");
        return Ok(e_bh_at(e, alpha));
    }
    // A nonempty e-BH set implies S(e) >= 1/alpha, hence also M(e) >= 1/alpha;
    // checking it directly keeps the gate exact under rounding.
    let base = e_bh_at(e, alpha);
    if merging.merge(e) < 1.0 / alpha && base.is_empty() {
        return Ok(RejectionResult::empty(e.to_vec(), StatisticKind::ELike));
    }
    let kf = k as f64;
    Ok(e_bh_at(e, kf * alpha / (kf - 1.0)))
}

/// Level and tuning constants shared by all procedures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProcedureConfig {
    pub alpha: f64,
    pub tau: f64,
    pub calibrator: Calibrator,
    pub merging: Merging,
}

impl ProcedureConfig {
    pub fn new(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(ProcedureConfig {
            alpha,
            tau: 0.5,
            calibrator: Calibrator::SqrtMinusOne,
            merging: Merging::ArithmeticMean,
        })
    }

    pub fn with_tau(mut self, tau: f64) -> Result<Self> {
        check_tau(tau)?;
        self.tau = tau;
        Ok(self)
    }

    pub fn with_calibrator(mut self, h: Calibrator) -> Self {
        self.calibrator = h;
        self
    }

    pub fn with_merging(mut self, m: Merging) -> Self {
        self.merging = m;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        check_tau(self.tau)
    }
}

/// Procedures addressable by name from the CLI and simulation configs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Procedure {
    PBh,
    PBhBy,
    EBh,
    WbhNormalized,
    EpBh,
    PeBh,
    EpStorey,
    EpBonferroni,
    AdaptiveEBh,
    StoreyBh,
    WstoreyNormalized,
}

impl Procedure {
    pub const ALL: [Procedure; 11] = [
        Procedure::PBh,
        Procedure::PBhBy,
        Procedure::EBh,
        Procedure::WbhNormalized,
        Procedure::EpBh,
        Procedure::PeBh,
        Procedure::EpStorey,
        Procedure::EpBonferroni,
        Procedure::AdaptiveEBh,
        Procedure::StoreyBh,
        Procedure::WstoreyNormalized,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Procedure::PBh => "p-bh",
            Procedure::PBhBy => "p-bh-by",
            Procedure::EBh => "e-bh",
            Procedure::WbhNormalized => "wbh-normalized",
            Procedure::EpBh => "ep-bh",
            Procedure::PeBh => "pe-bh",
            Procedure::EpStorey => "ep-storey",
            Procedure::EpBonferroni => "ep-bonferroni",
            Procedure::AdaptiveEBh => "adaptive-e-bh",
            Procedure::StoreyBh => "storey-bh",
            Procedure::WstoreyNormalized => "wstorey-normalized",
        }
    }

    /// Whether the procedure reads p-values at all.
    pub fn needs_p(&self) -> bool {
        !matches!(self, Procedure::EBh | Procedure::AdaptiveEBh)
    }

    pub fn run(&self, p: Option<&[f64]>, e: &[f64], cfg: &ProcedureConfig) -> Result<RejectionResult> {
        let p = match (self.needs_p(), p) {
            (true, None) => {
                return Err(Error::param(
                    "procedure",
                    format!("`{}` requires p-values", self.name()),
                ))
            }
            (_, p) => p.unwrap_or(&[]),
        };
        let a = cfg.alpha;
        match self {
            Procedure::PBh => p_bh(p, a, false),
            Procedure::PBhBy => p_bh(p, a, true),
            Procedure::EBh => e_bh(e, a),
            Procedure::WbhNormalized => wbh_normalized(p, e, a),
            Procedure::EpBh => ep_bh(p, e, a),
            Procedure::PeBh => pe_bh(p, e, cfg.calibrator, a),
            Procedure::EpStorey => ep_storey(p, e, a, cfg.tau),
            Procedure::EpBonferroni => ep_bonferroni(p, e, a),
            Procedure::AdaptiveEBh => adaptive_e_bh(e, a, cfg.merging),
            Procedure::StoreyBh => storey_bh(p, a, cfg.tau),
            Procedure::WstoreyNormalized => {
                check_es(e)?;
                check_len(p, e)?;
                weighted_storey(p, &normalized_weights(e), a, cfg.tau)
            }
        }
    }
}

impl FromStr for Procedure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Procedure::ALL
            .iter()
            .copied()
            .find(|p| p.name() == s.trim())
            .ok_or_else(|| Error::param("procedure", format!("unknown procedure `{s}`")))
    }
}

impl fmt::Display for Procedure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
