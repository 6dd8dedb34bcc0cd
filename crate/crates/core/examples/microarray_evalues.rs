//! Empirical-Bayes moderated t-statistics and their e-values on synthetic expression data.

use epbh::constructors::{fit_gamma, fit_limma_hyperparameters, moderated_t, moderated_t_evalue, ModeratedTModel};
use epbh::procedures::{e_bh, p_bh};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

fn main() -> epbh::Result<()> {
    let (k, v, nu) = (2000, 0.1, 38.0);
    let (nu0, s0_sq, gamma) = (3.64, 0.0144, 0.5);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let prior = ChiSquared::new(nu0).unwrap();
    let resid = ChiSquared::new(nu).unwrap();

    let mut beta_hat = Vec::with_capacity(k);
    let mut s_sq = Vec::with_capacity(k);
    let mut is_null = Vec::with_capacity(k);
    for i in 0..k {
        let sigma_sq: f64 = nu0 * s0_sq / prior.sample(&mut rng);
        let null = i < k * 4 / 5;
        let z: f64 = rng.sample(StandardNormal);
        let beta = if null { 0.0 } else { z * (gamma * sigma_sq).sqrt() };
        let z: f64 = rng.sample(StandardNormal);
        beta_hat.push(beta + z * (v * sigma_sq).sqrt());
        s_sq.push(sigma_sq * resid.sample(&mut rng) / nu);
        is_null.push(null);
    }

    let fit = fit_limma_hyperparameters(&s_sq, &vec![nu; k])?;
    println!("fitted nu0 = {:.3}, s0^2 = {:.5}", fit.nu0, fit.s0_sq);
    let base = ModeratedTModel::new(v, nu, fit.nu0, fit.s0_sq, 0.0)?;
    let t: Vec<f64> = beta_hat
        .iter()
        .zip(&s_sq)
        .map(|(&b, &s)| moderated_t(b, s, &base).map(|m| m.t_tilde))
        .collect::<epbh::Result<_>>()?;
    let g = fit_gamma(&t, &vec![base; k])?;
    println!("fitted gamma = {g:.3} (true {gamma} on a fraction of genes)");

    let model = base.with_gamma(g);
    let p: Vec<f64> = beta_hat
        .iter()
        .zip(&s_sq)
        .map(|(&b, &s)| moderated_t(b, s, &model).map(|m| m.p.get()))
        .collect::<epbh::Result<_>>()?;
    let e: Vec<f64> = t.iter().map(|&x| moderated_t_evalue(x, &model).get()).collect();
    let null_mean = e.iter().zip(&is_null).filter(|(_, &n)| n).map(|(x, _)| x).sum::<f64>() / (k * 4 / 5) as f64;
    println!("mean null e-value = {null_mean:.3}");
    println!("BH on moderated-t p-values rejects {}", p_bh(&p, 0.1, false)?.len());
    println!("e-BH on moderated-t e-values rejects {}", e_bh(&e, 0.1)?.len());
    Ok(())
}
