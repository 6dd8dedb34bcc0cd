use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{null_count, ReplicateData};
use crate::constructors::{
    fit_gamma, fit_limma_hyperparameters, moderated_t, moderated_t_evalue, ModeratedTModel,
};
use crate::error::{Error, Result};
use crate::special::t_two_sided_p;

/// Independent p-value and e-value arms for the same genes.
///
/// The e-value arm is a two-group microarray comparison under the
/// scaled-inverse-χ² variance model with effects
/// `beta ~ (1 - pi_m) delta_0 + pi_m N(0, effect_var_ratio sigma^2)` for non-nulls.
/// The p-value arm is a normal-means arm: `z ~ N(+-xi / pvalue_se, 1)` for
/// non-nulls and `N(0, 1)` for nulls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MicroarrayScenario {
    pub k: usize,
    pub null_fraction: f64,
    pub xi: f64,
    pub pi_m: f64,
    pub nu0: f64,
    pub s0_sq: f64,
    pub effect_var_ratio: f64,
    pub n_per_group: usize,
    /// Standard error of the log-fold-change estimate in the p-value arm.
    pub pvalue_se: f64,
    /// Re-estimate `(nu0, s0_sq, gamma)` from each replicate; otherwise use the truth.
    pub refit: bool,
    pub seed: u64,
}

impl Default for MicroarrayScenario {
    fn default() -> Self {
        MicroarrayScenario {
            k: 2000,
            null_fraction: 0.8,
            xi: 0.6,
            pi_m: 1.0,
            nu0: 3.64,
            s0_sq: 0.0144,
            effect_var_ratio: 0.5,
            n_per_group: 20,
            pvalue_se: 0.2,
            refit: true,
            seed: 0,
        }
    }
}

impl MicroarrayScenario {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidScenario(msg));
        let pos = |x: f64| x > 0.0 && x.is_finite();
        if self.k < 2 {
            return bad("k must be at least 2".into());
        }
        if !(0.0..=1.0).contains(&self.null_fraction) {
            return bad(format!("null_fraction must lie in [0, 1], got {}", self.null_fraction));
        }
        if !(0.0..=1.0).contains(&self.pi_m) {
            return bad(format!("pi_m must lie in [0, 1], got {}", self.pi_m));
        }
        if !self.xi.is_finite() {
            return bad(format!("xi must be finite, got {}", self.xi));
        }
        for (name, v) in [
            ("nu0", self.nu0),
            ("s0_sq", self.s0_sq),
            ("effect_var_ratio", self.effect_var_ratio),
            ("pvalue_se", self.pvalue_se),
        ] {
            if !pos(v) {
                return bad(format!("{name} must be finite and > 0, got {v}"));
            }
        }
        if self.n_per_group < 2 {
            return bad("n_per_group must be at least 2".into());
        }
        Ok(())
    }

    /// Design factor `1/n + 1/n`.
    pub fn v(&self) -> f64 {
        2.0 / self.n_per_group as f64
    }

    /// Residual degrees of freedom `2n - 2`.
    pub fn nu(&self) -> f64 {
        2.0 * self.n_per_group as f64 - 2.0
    }
}

pub fn generate_microarray_replicate<R: Rng + ?Sized>(
    scn: &MicroarrayScenario,
    rng: &mut R,
) -> Result<ReplicateData> {
    scn.validate()?;
    let k0 = null_count(scn.k, scn.null_fraction);
    let (v, nu) = (scn.v(), scn.nu());
    let prior = ChiSquared::new(scn.nu0).map_err(|e| Error::InvalidScenario(e.to_string()))?;
    let resid = ChiSquared::new(nu).map_err(|e| Error::InvalidScenario(e.to_string()))?;

    let mut beta_hat = Vec::with_capacity(scn.k);
    let mut s_sq = Vec::with_capacity(scn.k);
    let mut p = Vec::with_capacity(scn.k);
    let mut is_null = Vec::with_capacity(scn.k);
    for i in 0..scn.k {
        let null = i < k0;
        let sigma_sq = scn.nu0 * scn.s0_sq / prior.sample(rng);
        let beta = if !null && rng.random::<f64>() < scn.pi_m {
            (scn.effect_var_ratio * sigma_sq).sqrt() * rng.sample::<f64, _>(StandardNormal)
        } else {
            0.0
        };
        beta_hat.push(beta + (v * sigma_sq).sqrt() * rng.sample::<f64, _>(StandardNormal));
        s_sq.push(sigma_sq * resid.sample(rng) / nu);

        let shift = if null {
            0.0
        } else if rng.random::<bool>() {
            scn.xi / scn.pvalue_se
        } else {
            -scn.xi / scn.pvalue_se
        };
        p.push(t_two_sided_p(shift + rng.sample::<f64, _>(StandardNormal), f64::INFINITY));
        is_null.push(null);
    }

    let base = if scn.refit {
        let prior = fit_limma_hyperparameters(&s_sq, &vec![nu; scn.k])?;
        ModeratedTModel::new(v, nu, prior.nu0, prior.s0_sq, 0.0)?
    } else {
        ModeratedTModel::new(v, nu, scn.nu0, scn.s0_sq, scn.effect_var_ratio)?
    };
    let t: Vec<f64> = beta_hat
        .iter()
        .zip(&s_sq)
        .map(|(&b, &s)| moderated_t(b, s, &base).map(|m| m.t_tilde))
        .collect::<Result<_>>()?;
    let model = if scn.refit {
        base.with_gamma(fit_gamma(&t, &vec![base; scn.k])?)
    } else {
        base
    };
    let e = t.iter().map(|&x| moderated_t_evalue(x, &model).get()).collect();
    Ok(ReplicateData { p, e, is_null })
}
