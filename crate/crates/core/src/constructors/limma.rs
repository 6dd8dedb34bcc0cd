//! Moderated t-statistics and their e-values under a scaled-inverse-χ² variance prior.
//!
//! Model: `beta_hat | beta, sigma^2 ~ N(beta, v sigma^2)`,
//! `s^2 | sigma^2 ~ sigma^2 chi^2_nu / nu`, `1/sigma^2 ~ chi^2_nu0 / (nu0 s0^2)`,
//! and under the alternative `beta ~ N(0, gamma sigma^2)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::special::{digamma, t_ln_pdf, t_two_sided_p, trigamma, trigamma_inverse};
use crate::values::{EValue, PValue};

/// Number of points in the log-spaced `gamma` grid over `[1e-3, 1e3]`.
pub const GAMMA_GRID_POINTS: usize = 41;

/// Per-gene model. `nu0 = inf` means no prior variance heterogeneity and
/// `gamma = 0` means an uninformative alternative (every e-value is 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeratedTModel {
    pub v: f64,
    pub nu: f64,
    pub nu0: f64,
    pub s0_sq: f64,
    pub gamma: f64,
}

impl ModeratedTModel {
    pub fn new(v: f64, nu: f64, nu0: f64, s0_sq: f64, gamma: f64) -> Result<Self> {
        let m = ModeratedTModel {
            v,
            nu,
            nu0,
            s0_sq,
            gamma,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let finite_pos = |name: &'static str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(Error::param(name, format!("must be finite and > 0, got {x}")))
            }
        };
        finite_pos("v", self.v)?;
        finite_pos("nu", self.nu)?;
        finite_pos("s0_sq", self.s0_sq)?;
        if !(self.nu0 > 0.0) {
            return Err(Error::param("nu0", format!("must be > 0, got {}", self.nu0)));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::param("gamma", format!("must be finite and >= 0, got {}", self.gamma)));
        }
        Ok(())
    }

    /// Total degrees of freedom `nu0 + nu`.
    pub fn df(&self) -> f64 {
        self.nu0 + self.nu
    }

    pub fn with_gamma(self, gamma: f64) -> Self {
        ModeratedTModel { gamma, ..self }
    }

    /// Posterior variance `(nu0 s0^2 + nu s^2) / (nu0 + nu)`.
    pub fn shrunk_variance(&self, s_sq: f64) -> f64 {
        if self.nu0.is_infinite() {
            return self.s0_sq;
        }
        (self.nu0 * self.s0_sq + self.nu * s_sq) / (self.nu0 + self.nu)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeratedT {
    pub t_tilde: f64,
    pub p: PValue,
}

pub fn moderated_t(beta_hat: f64, s_sq: f64, model: &ModeratedTModel) -> Result<ModeratedT> {
    if !(s_sq >= 0.0 && s_sq.is_finite()) {
        return Err(Error::param("s_sq", format!("must be finite and >= 0, got {s_sq}")));
    }
    if !beta_hat.is_finite() {
        return Err(Error::param("beta_hat", format!("must be finite, got {beta_hat}")));
    }
    let t_tilde = beta_hat / (model.shrunk_variance(s_sq) * model.v).sqrt();
    let p = PValue::clamped(t_two_sided_p(t_tilde, model.df()))?;
    Ok(ModeratedT { t_tilde, p })
}

/// Ratio of the alternative to the null density of `t_tilde`.
///
/// `E = (1 + g)^(-1/2) (1 - g t^2 / ((1 + g)(N + t^2)))^(-(N + 1)/2)`
/// with `g = gamma / v` and `N = nu0 + nu`; the `N = inf` limit is
/// `(1 + g)^(-1/2) exp(g t^2 / (2 (1 + g)))`.
pub fn moderated_t_evalue(t_tilde: f64, model: &ModeratedTModel) -> EValue {
    if model.gamma == 0.0 {
        return EValue::ONE;
    }
    let g = model.gamma / model.v;
    let a = g / (1.0 + g);
    let t2 = t_tilde * t_tilde;
    let n = model.df();
    let ln_e = if n.is_infinite() {
        0.5 * a * t2
    } else {
        -0.5 * (n + 1.0) * (-a * t2 / (n + t2)).ln_1p()
    } - 0.5 * g.ln_1p();
    EValue::new(ln_e.exp()).expect("exp is nonnegative")
}

/// Estimated scaled-inverse-χ² prior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimmaPrior {
    /// `inf` when the log-variances show no excess dispersion.
    pub nu0: f64,
    pub s0_sq: f64,
}

impl LimmaPrior {
    pub fn is_degenerate(&self) -> bool {
        self.nu0.is_infinite()
    }
}

fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Moment matching on `log s^2`.
///
/// With `z = log s^2 - digamma(nu/2) + log(nu/2)`, the model gives
/// `E z = log s0^2 + digamma(nu0/2) - log(nu0/2)` and
/// `Var z = trigamma(nu0/2) + mean trigamma(nu/2)`. Zero variances are
/// raised to `1e-5` times the median.
pub fn fit_limma_hyperparameters(s_sq: &[f64], nu: &[f64]) -> Result<LimmaPrior> {
    if s_sq.len() != nu.len() {
        return Err(Error::LengthMismatch {
            expected: s_sq.len(),
            found: nu.len(),
        });
    }
    if s_sq.len() < 2 {
        return Err(Error::param("s_sq", "at least two variances are required"));
    }
    for (k, (&s, &d)) in s_sq.iter().zip(nu).enumerate() {
        if !(s >= 0.0 && s.is_finite()) {
            return Err(Error::malformed(k.to_string(), format!("s_sq must be finite and >= 0, got {s}")));
        }
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::malformed(k.to_string(), format!("nu must be finite and > 0, got {d}")));
        }
    }
    let med = median(s_sq);
    if med <= 0.0 {
        return Err(Error::param("s_sq", "median sample variance is zero"));
    }
    let floor = 1e-5 * med;
    let n = s_sq.len() as f64;
    let z: Vec<f64> = s_sq
        .iter()
        .zip(nu)
        .map(|(&s, &d)| s.max(floor).ln() - digamma(0.5 * d) + (0.5 * d).ln())
        .collect();
    let zmean = z.iter().sum::<f64>() / n;
    let zvar = z.iter().map(|x| (x - zmean).powi(2)).sum::<f64>() / (n - 1.0);
    let excess = zvar - nu.iter().map(|&d| trigamma(0.5 * d)).sum::<f64>() / n;
    if excess > 0.0 {
        let nu0 = 2.0 * trigamma_inverse(excess);
        let s0_sq = (zmean + digamma(0.5 * nu0) - (0.5 * nu0).ln()).exp();
        Ok(LimmaPrior { nu0, s0_sq })
    } else {
        Ok(LimmaPrior {
            nu0: f64::INFINITY,
            s0_sq: zmean.exp(),
        })
    }
}

pub(crate) fn gamma_grid() -> impl Iterator<Item = f64> {
    (0..GAMMA_GRID_POINTS).map(|i| 10f64.powf(-3.0 + 6.0 * i as f64 / (GAMMA_GRID_POINTS - 1) as f64))
}

/// Grid maximizer of the half-half marginal likelihood
/// `prod_k (p_0(t_k) + p_gamma(t_k)) / 2`; returns 0 when no grid point beats the null.
///
/// `base` supplies `v`, `nu`, `nu0` and `s0_sq` per statistic; its `gamma` is ignored.
pub fn fit_gamma(t_tilde: &[f64], base: &[ModeratedTModel]) -> Result<f64> {
    if t_tilde.len() != base.len() {
        return Err(Error::LengthMismatch {
            expected: t_tilde.len(),
            found: base.len(),
        });
    }
    if t_tilde.len() < 2 {
        return Err(Error::param("t_tilde", "at least two statistics are required"));
    }
    if let Some(t) = t_tilde.iter().find(|t| !t.is_finite()) {
        return Err(Error::param("t_tilde", format!("statistics must be finite, got {t}")));
    }
    // log of the mixture over the null density is ln((1 + E) / 2)
    let mut best = (0.0, 0.0);
    for gamma in gamma_grid() {
        let gain: f64 = t_tilde
            .iter()
            .zip(base)
            .map(|(&t, m)| (0.5 * (1.0 + moderated_t_evalue(t, &m.with_gamma(gamma)).get())).ln())
            .sum();
        if gain > best.1 {
            best = (gamma, gain);
        }
    }
    Ok(best.0)
}

/// Marginal log-density of `t_tilde` under `N(0, gamma sigma^2)` effects.
pub fn marginal_ln_density(t_tilde: f64, model: &ModeratedTModel) -> f64 {
    let c2 = 1.0 + model.gamma / model.v;
    t_ln_pdf(t_tilde / c2.sqrt(), model.df()) - 0.5 * c2.ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate;
    use crate::special::chisq_ln_pdf;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{ChiSquared, Distribution, Normal};

    fn model(nu0: f64, gamma: f64) -> ModeratedTModel {
        ModeratedTModel::new(1.0, 4.0, nu0, 1.0, gamma).unwrap()
    }

    #[test]
    fn moderated_t_examples() {
        let m = model(4.0, 1.0);
        let r = moderated_t(0.0, 0.3, &m).unwrap();
        assert_eq!((r.t_tilde, r.p.get()), (0.0, 1.0));
        let r = moderated_t(1.0, 1.0, &m).unwrap();
        assert_eq!(r.t_tilde, 1.0);
        // 2 (1 - F_8(1)) = 0.34659350708733416
        assert!((r.p.get() - 0.346_593_507_087_334_16).abs() < 1e-10);
        let big = ModeratedTModel::new(1.0, 4.0, 1e12, 2.5, 1.0).unwrap();
        assert!((big.shrunk_variance(2.5) - 2.5).abs() < 1e-12);
        let inf = ModeratedTModel::new(0.1, 38.0, f64::INFINITY, 0.5, 1.0).unwrap();
        let r = moderated_t(0.5, 99.0, &inf).unwrap();
        assert!((r.t_tilde - 0.5 / (0.05f64).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn model_validation() {
        assert!(ModeratedTModel::new(0.0, 4.0, 4.0, 1.0, 1.0).is_err());
        assert!(ModeratedTModel::new(1.0, 4.0, 0.0, 1.0, 1.0).is_err());
        assert!(ModeratedTModel::new(1.0, 4.0, 4.0, -1.0, 1.0).is_err());
        assert!(ModeratedTModel::new(1.0, 4.0, 4.0, 1.0, -1.0).is_err());
        assert!(ModeratedTModel::new(1.0, 4.0, f64::INFINITY, 1.0, 0.0).is_ok());
    }

    #[test]
    fn evalue_examples() {
        let m = model(4.0, 1.0);
        assert!((moderated_t_evalue(0.0, &m).get() - 0.5f64.sqrt()).abs() < 1e-15);
        for t in [-5.0, 0.0, 2.0, 40.0] {
            assert_eq!(moderated_t_evalue(t, &model(4.0, 0.0)).get(), 1.0);
            assert!((moderated_t_evalue(t, &model(4.0, 1e-12)).get() - 1.0).abs() < 1e-9);
        }
        // g = 1, N = 8, t = 3: (1/2)^(1/2) (1 - 9 / (2 * 17))^(-9/2)
        let want = 0.5f64.sqrt() * (1.0 - 9.0 / 34.0f64).powf(-4.5);
        assert!((moderated_t_evalue(3.0, &m).get() / want - 1.0).abs() < 1e-13);
    }

    #[test]
    fn normal_limit_matches_large_df() {
        let inf = model(f64::INFINITY, 2.0);
        let big = model(1e9, 2.0);
        for t in [0.0, 1.0, 3.0, 6.0] {
            let a = moderated_t_evalue(t, &inf).get();
            let b = moderated_t_evalue(t, &big).get();
            assert!((a / b - 1.0).abs() < 1e-6);
        }
    }

    /// Density of `t_tilde` from the hierarchical model: given `w = x + y`
    /// with `x ~ chi^2_nu` (residual) and `y ~ chi^2_nu0` (prior), the
    /// statistic is `N(0, (1 + g) N / w)`; `w ~ chi^2_N`.
    fn hierarchical_density(t: f64, m: &ModeratedTModel) -> f64 {
        let n = m.df();
        let c2 = 1.0 + m.gamma / m.v;
        let f = |s: f64| {
            let w = s.exp();
            let var = c2 * n / w;
            let normal = (-0.5 * t * t / var).exp() / (2.0 * std::f64::consts::PI * var).sqrt();
            normal * chisq_ln_pdf(w, n).exp() * w
        };
        let mid = n.ln();
        integrate(f, mid - 30.0, mid + 6.0, 1e-17)
    }

    #[test]
    fn closed_form_equals_density_ratio() {
        for m in [model(4.0, 1.0), ModeratedTModel::new(0.1, 38.0, 3.64, 0.0144, 1.0).unwrap()] {
            let null = m.with_gamma(0.0);
            for i in 0..=24 {
                let t = -6.0 + 0.5 * i as f64;
                let ratio = hierarchical_density(t, &m) / hierarchical_density(t, &null);
                let e = moderated_t_evalue(t, &m).get();
                assert!((e / ratio - 1.0).abs() < 1e-8, "t={t} e={e} ratio={ratio}");
                let closed = (marginal_ln_density(t, &m) - marginal_ln_density(t, &null)).exp();
                assert!((e / closed - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn null_mean_is_one() {
        let m = ModeratedTModel::new(0.1, 38.0, 3.64, 0.0144, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let prior = ChiSquared::new(m.nu0).unwrap();
        let resid = ChiSquared::new(m.nu).unwrap();
        let z = Normal::new(0.0, 1.0).unwrap();
        let n = 100_000;
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for _ in 0..n {
            let sigma_sq = m.nu0 * m.s0_sq / prior.sample(&mut rng);
            let beta_hat = z.sample(&mut rng) * (sigma_sq * m.v).sqrt();
            let s_sq = sigma_sq * resid.sample(&mut rng) / m.nu;
            let t = moderated_t(beta_hat, s_sq, &m).unwrap().t_tilde;
            let e = moderated_t_evalue(t, &m).get();
            sum += e;
            sum_sq += e * e;
        }
        let mean = sum / n as f64;
        let se = ((sum_sq / n as f64 - mean * mean) / n as f64).sqrt();
        assert!((mean - 1.0).abs() < 4.0 * se, "mean {mean} se {se}");
    }

    fn draw_variances(k: usize, nu0: f64, s0_sq: f64, nu: f64, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let prior = ChiSquared::new(nu0).unwrap();
        let resid = ChiSquared::new(nu).unwrap();
        (0..k)
            .map(|_| {
                let sigma_sq = nu0 * s0_sq / prior.sample(&mut rng);
                sigma_sq * resid.sample(&mut rng) / nu
            })
            .collect()
    }

    #[test]
    fn recovers_prior() {
        let s = draw_variances(10_000, 3.64, 0.0144, 38.0, 5);
        let fit = fit_limma_hyperparameters(&s, &vec![38.0; s.len()]).unwrap();
        assert!((fit.nu0 / 3.64 - 1.0).abs() < 0.1, "{fit:?}");
        assert!((fit.s0_sq / 0.0144 - 1.0).abs() < 0.1, "{fit:?}");
    }

    #[test]
    fn estimates_tighten_with_k() {
        let err = |k: usize| {
            (0..8u64)
                .map(|seed| {
                    let s = draw_variances(k, 3.64, 0.0144, 38.0, 100 + seed);
                    let fit = fit_limma_hyperparameters(&s, &vec![38.0; k]).unwrap();
                    (fit.nu0.min(1e3) / 3.64 - 1.0).abs()
                })
                .sum::<f64>()
                / 8.0
        };
        assert!(err(20_000) < err(500));
    }

    #[test]
    fn identical_variances_are_degenerate() {
        let fit = fit_limma_hyperparameters(&[0.3; 50], &[4.0; 50]).unwrap();
        assert!(fit.is_degenerate());
        assert!((fit.s0_sq - 0.3 * (-digamma(2.0) + 2f64.ln()).exp()).abs() < 1e-12);
    }

    #[test]
    fn fitting_rejects_bad_input() {
        assert!(fit_limma_hyperparameters(&[1.0], &[4.0]).is_err());
        assert!(fit_limma_hyperparameters(&[1.0, 2.0], &[4.0]).is_err());
        assert!(fit_limma_hyperparameters(&[0.0, 0.0, 1.0], &[4.0; 3]).is_err());
        assert!(fit_limma_hyperparameters(&[1.0, -2.0], &[4.0; 2]).is_err());
        let fit = fit_limma_hyperparameters(&[0.0, 1.0, 2.0, 0.5], &[4.0; 4]).unwrap();
        assert!(fit.s0_sq > 0.0);
    }

    fn draw_t(k: usize, gamma_truth: f64, seed: u64) -> (Vec<f64>, Vec<ModeratedTModel>) {
        let m = ModeratedTModel::new(1.0, 6.0, 4.0, 1.0, 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let prior = ChiSquared::new(m.nu0).unwrap();
        let resid = ChiSquared::new(m.nu).unwrap();
        let z = Normal::new(0.0, 1.0).unwrap();
        let t = (0..k)
            .map(|i| {
                let sigma_sq = m.nu0 * m.s0_sq / prior.sample(&mut rng);
                let effect_var = if i % 2 == 0 { gamma_truth } else { 0.0 };
                let beta_hat = z.sample(&mut rng) * (sigma_sq * (m.v + effect_var)).sqrt();
                let s_sq = sigma_sq * resid.sample(&mut rng) / m.nu;
                moderated_t(beta_hat, s_sq, &m).unwrap().t_tilde
            })
            .collect();
        (t, vec![m; k])
    }

    #[test]
    fn gamma_recovered_from_half_half_data() {
        let (t, base) = draw_t(10_000, 1.0, 21);
        let g = fit_gamma(&t, &base).unwrap();
        assert!((0.5..=2.0).contains(&g), "gamma {g}");
    }

    #[test]
    fn gamma_near_zero_on_null_data() {
        let (t, base) = draw_t(10_000, 0.0, 22);
        let g = fit_gamma(&t, &base).unwrap();
        assert!(g <= 0.05, "gamma {g}");
        let e_max = t
            .iter()
            .map(|&x| moderated_t_evalue(x, &base[0].with_gamma(g)).get())
            .fold(0.0, f64::max);
        assert!(e_max < 1.5);
    }

    #[test]
    fn gamma_grid_shape() {
        let g: Vec<f64> = gamma_grid().collect();
        assert_eq!(g.len(), 41);
        assert!((g[0] - 1e-3).abs() < 1e-18 && (g[40] - 1e3).abs() < 1e-9);
        assert!((g[20] - 1.0).abs() < 1e-14);
    }
}
