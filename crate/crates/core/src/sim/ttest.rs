use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{null_count, ReplicateData};
use crate::constructors::chisq_lr_evalue;
use crate::error::{Error, Result};
use crate::special::t_two_sided_p;

/// Two-sample t-tests with a χ² likelihood-ratio e-value on the pooled sum of squares.
///
/// Group Y is `N(0, 1)`; group X is `N(xi, 1)` for non-nulls. Only
/// `n_per_group = 5` with `df_ssq = 9` is supported.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TTestScenario {
    pub k: usize,
    pub null_fraction: f64,
    pub xi: f64,
    pub n_per_group: usize,
    pub df_ssq: u32,
    /// Noncentrality of the alternative used by the e-value.
    pub ncp: f64,
    /// Multiplies every null e-value; values above 1 misspecify the null.
    pub null_evalue_scale: f64,
    pub seed: u64,
}

impl Default for TTestScenario {
    fn default() -> Self {
        TTestScenario {
            k: 2000,
            null_fraction: 0.95,
            xi: 2.0,
            n_per_group: 5,
            df_ssq: 9,
            ncp: 10.0,
            null_evalue_scale: 1.0,
            seed: 0,
        }
    }
}

impl TTestScenario {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidScenario(msg));
        if self.k == 0 {
            return bad("k must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.null_fraction) {
            return bad(format!("null_fraction must lie in [0, 1], got {}", self.null_fraction));
        }
        if !self.xi.is_finite() {
            return bad(format!("xi must be finite, got {}", self.xi));
        }
        if self.n_per_group != 5 || self.df_ssq != 9 {
            return bad(format!(
                "only n_per_group = 5 with df_ssq = 9 is supported, got n_per_group = {} and df_ssq = {}",
                self.n_per_group, self.df_ssq
            ));
        }
        if !(self.ncp >= 0.0 && self.ncp.is_finite()) {
            return bad(format!("ncp must be finite and >= 0, got {}", self.ncp));
        }
        if !(self.null_evalue_scale > 0.0 && self.null_evalue_scale.is_finite()) {
            return bad(format!(
                "null_evalue_scale must be finite and > 0, got {}",
                self.null_evalue_scale
            ));
        }
        Ok(())
    }

    /// True noncentrality of the sum of squares for a non-null, `n xi^2 / 2`.
    pub fn alternative_ncp(&self) -> f64 {
        0.5 * self.n_per_group as f64 * self.xi * self.xi
    }
}

struct Stats {
    t: f64,
    ssq: f64,
}

fn two_sample<R: Rng + ?Sized>(mu_x: f64, n: usize, rng: &mut R) -> Stats {
    let mut x = [0.0f64; 5];
    let mut y = [0.0f64; 5];
    for v in x.iter_mut().take(n) {
        *v = mu_x + rng.sample::<f64, _>(StandardNormal);
    }
    for v in y.iter_mut().take(n) {
        *v = rng.sample::<f64, _>(StandardNormal);
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sx = x.iter().map(|v| (v - mx).powi(2)).sum::<f64>() / (nf - 1.0);
    let sy = y.iter().map(|v| (v - my).powi(2)).sum::<f64>() / (nf - 1.0);
    let grand = 0.5 * (mx + my);
    let ssq = x.iter().chain(&y).map(|v| (v - grand).powi(2)).sum::<f64>();
    Stats {
        t: nf.sqrt() * (my - mx) / (sx + sy).sqrt(),
        ssq,
    }
}

pub fn generate_ttest_replicate<R: Rng + ?Sized>(scn: &TTestScenario, rng: &mut R) -> Result<ReplicateData> {
    scn.validate()?;
    let k0 = null_count(scn.k, scn.null_fraction);
    let t_df = 2.0 * (scn.n_per_group as f64 - 1.0);
    let mut p = Vec::with_capacity(scn.k);
    let mut e = Vec::with_capacity(scn.k);
    let mut is_null = Vec::with_capacity(scn.k);
    for i in 0..scn.k {
        let null = i < k0;
        let s = two_sample(if null { 0.0 } else { scn.xi }, scn.n_per_group, rng);
        p.push(t_two_sided_p(s.t, t_df));
        let mut ev = chisq_lr_evalue(s.ssq, scn.df_ssq, scn.ncp)?.get();
        if null {
            ev *= scn.null_evalue_scale;
        }
        e.push(ev);
        is_null.push(null);
    }
    Ok(ReplicateData { p, e, is_null })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn scenario(null_fraction: f64, xi: f64) -> TTestScenario {
        TTestScenario {
            k: 1000,
            null_fraction,
            xi,
            ..TTestScenario::default()
        }
    }

    #[test]
    fn layout_and_ranges() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let d = generate_ttest_replicate(&scenario(0.95, 2.0), &mut rng).unwrap();
        assert_eq!(d.p.len(), 1000);
        assert_eq!(d.is_null.iter().filter(|&&n| n).count(), 950);
        assert!(d.is_null[..950].iter().all(|&n| n));
        assert!(d.p.iter().all(|p| (0.0..=1.0).contains(p)));
        assert!(d.e.iter().all(|&e| e >= 0.0));
    }

    #[test]
    fn null_pvalues_uniform_and_independent_of_evalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let scn = scenario(1.0, 0.0);
        let mut p = Vec::new();
        let mut e = Vec::new();
        for _ in 0..100 {
            let d = generate_ttest_replicate(&scn, &mut rng).unwrap();
            p.extend(d.p);
            e.extend(d.e);
        }
        p.sort_by(|a, b| a.total_cmp(b));
        let n = p.len() as f64;
        let ks = p
            .iter()
            .enumerate()
            .map(|(i, &x)| ((i + 1) as f64 / n - x).abs().max((x - i as f64 / n).abs()))
            .fold(0.0, f64::max);
        assert!(ks < 0.02, "ks {ks}");

        // correlation between p and e over the null draws
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let d = generate_ttest_replicate(&TTestScenario { k: 100_000, ..scn }, &mut rng).unwrap();
        let n = d.p.len() as f64;
        let mp = d.p.iter().sum::<f64>() / n;
        let me = d.e.iter().sum::<f64>() / n;
        let cov = d.p.iter().zip(&d.e).map(|(a, b)| (a - mp) * (b - me)).sum::<f64>() / n;
        let sp = (d.p.iter().map(|a| (a - mp).powi(2)).sum::<f64>() / n).sqrt();
        let se_ = (d.e.iter().map(|b| (b - me).powi(2)).sum::<f64>() / n).sqrt();
        let corr = cov / (sp * se_);
        assert!(corr.abs() < 4.0 / n.sqrt(), "corr {corr}");
        assert!((me - 1.0).abs() < 4.0 * se_ / n.sqrt(), "null e mean {me}");
    }

    #[test]
    fn strong_signal_gives_small_pvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let d = generate_ttest_replicate(&scenario(0.0, 3.0), &mut rng).unwrap();
        let mean_p = d.p.iter().sum::<f64>() / d.p.len() as f64;
        assert!(mean_p < 0.05, "{mean_p}");
        assert!((scenario(0.0, 2.0).alternative_ncp() - 10.0).abs() < 1e-15);
    }

    #[test]
    fn misspecification_scales_null_evalues_only() {
        let base = scenario(0.5, 2.0);
        let scaled = TTestScenario {
            null_evalue_scale: 1.5,
            ..base.clone()
        };
        let a = generate_ttest_replicate(&base, &mut ChaCha8Rng::seed_from_u64(8)).unwrap();
        let b = generate_ttest_replicate(&scaled, &mut ChaCha8Rng::seed_from_u64(8)).unwrap();
        for i in 0..1000 {
            let f = if i < 500 { 1.5 } else { 1.0 };
            assert_eq!(b.e[i], a.e[i] * f);
            assert_eq!(a.p[i], b.p[i]);
        }
    }

    #[test]
    fn refuses_unsupported_group_sizes() {
        let s = TTestScenario {
            n_per_group: 6,
            ..TTestScenario::default()
        };
        assert!(matches!(s.validate(), Err(Error::InvalidScenario(_))));
        let s = TTestScenario {
            df_ssq: 8,
            ..TTestScenario::default()
        };
        assert!(s.validate().is_err());
    }
}
