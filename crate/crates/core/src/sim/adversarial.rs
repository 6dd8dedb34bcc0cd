use rand::Rng;

use crate::error::{Error, Result};

/// Comonotone null e-values `e_k = 1{U <= a_k} / a_k` driven by one `U ~ Uniform(0, 1)`.
///
/// Each coordinate has mean exactly 1; the joint law is as far from
/// positive regression dependence as a single latent variable allows.
pub fn adversarial_null_evalues<R: Rng + ?Sized>(thresholds: &[f64], rng: &mut R) -> Result<Vec<f64>> {
    if thresholds.len() < 2 {
        return Err(Error::param("thresholds", "at least two coordinates are required"));
    }
    if let Some(a) = thresholds.iter().find(|&&a| !(a > 0.0 && a <= 1.0)) {
        return Err(Error::param("thresholds", format!("each threshold must lie in (0, 1], got {a}")));
    }
    let u: f64 = rng.random();
    Ok(thresholds
        .iter()
        .map(|&a| if u <= a { 1.0 / a } else { 0.0 })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::procedures::e_bh;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn coordinates_are_comonotone_with_unit_mean() {
        let a: Vec<f64> = (1..=10).map(|i| i as f64 / 20.0).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 200_000;
        let mut sums = vec![0.0; a.len()];
        for _ in 0..n {
            let e = adversarial_null_evalues(&a, &mut rng).unwrap();
            // a nonzero coordinate forces every coordinate with a larger threshold to be nonzero
            for w in e.windows(2) {
                assert!(w[0] == 0.0 || w[1] > 0.0);
            }
            for (s, x) in sums.iter_mut().zip(&e) {
                *s += x;
            }
        }
        for (s, &ak) in sums.iter().zip(&a) {
            let mean = s / n as f64;
            let se = ((1.0 / ak - 1.0) / n as f64).sqrt();
            assert!((mean - 1.0).abs() < 4.0 * se, "a={ak} mean={mean}");
        }
    }

    #[test]
    fn constant_threshold_at_alpha_attains_alpha() {
        // all coordinates exceed K / alpha together with probability alpha
        let alpha = 0.1;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 20_000;
        let mut fdp = 0.0;
        for _ in 0..n {
            let e = adversarial_null_evalues(&[alpha; 20], &mut rng).unwrap();
            if !e_bh(&e, alpha).unwrap().is_empty() {
                fdp += 1.0;
            }
        }
        let fdr = fdp / n as f64;
        let se = (alpha * (1.0 - alpha) / n as f64).sqrt();
        assert!((fdr - alpha).abs() < 4.0 * se, "fdr={fdr}");
    }

    #[test]
    fn rejects_bad_thresholds() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(adversarial_null_evalues(&[0.5], &mut rng).is_err());
        assert!(adversarial_null_evalues(&[0.5, 0.0], &mut rng).is_err());
        assert!(adversarial_null_evalues(&[0.5, 1.5], &mut rng).is_err());
    }
}
