//! Special functions used by the e-value constructors.

use statrs::distribution::{ContinuousCDF, StudentsT};
use statrs::function::erf::erfc;
use statrs::function::gamma::ln_gamma;

pub use statrs::function::gamma::digamma;

/// Polygamma of order 1.
pub fn trigamma(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 20.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let r = 1.0 / x;
    let r2 = r * r;
    acc + r
        + 0.5 * r2
        + r * r2 * (1.0 / 6.0 - r2 * (1.0 / 30.0 - r2 * (1.0 / 42.0 - r2 * (1.0 / 30.0))))
}

/// Polygamma of order 2.
pub fn tetragamma(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 20.0 {
        acc -= 2.0 / (x * x * x);
        x += 1.0;
    }
    let r = 1.0 / x;
    let r2 = r * r;
    acc - r2
        - r2 * r
        - 0.5 * r2 * r2
        + r2 * r2 * r2 * (1.0 / 6.0 - r2 * (1.0 / 6.0 - r2 * (3.0 / 10.0 - r2 * (5.0 / 6.0))))
}

/// Solves `trigamma(x) = y` for `x > 0` by Newton iteration on `1/trigamma`.
pub fn trigamma_inverse(y: f64) -> f64 {
    if y > 1e7 {
        return 1.0 / y.sqrt();
    }
    if y < 1e-6 {
        return 1.0 / y;
    }
    let mut x = 0.5 + 1.0 / y;
    for _ in 0..100 {
        let tri = trigamma(x);
        let dif = tri * (1.0 - tri / y) / tetragamma(x);
        x += dif;
        if -dif / x < 1e-10 {
            break;
        }
    }
    x
}

/// Two-sided tail `2 (1 - F(|t|))` of Student's t; `df = inf` is the normal limit.
pub fn t_two_sided_p(t: f64, df: f64) -> f64 {
    let a = t.abs();
    if df.is_infinite() {
        return erfc(a / std::f64::consts::SQRT_2).min(1.0);
    }
    let dist = StudentsT::new(0.0, 1.0, df).expect("degrees of freedom must be positive");
    (2.0 * dist.sf(a)).min(1.0)
}

/// Log-density of Student's t with `df` degrees of freedom.
pub fn t_ln_pdf(t: f64, df: f64) -> f64 {
    t_ln_norm(df) + t_ln_kernel(t, df)
}

/// Normalizing constant part of [`t_ln_pdf`].
pub fn t_ln_norm(df: f64) -> f64 {
    if df.is_infinite() {
        return -0.5 * (2.0 * std::f64::consts::PI).ln();
    }
    ln_gamma(0.5 * (df + 1.0)) - ln_gamma(0.5 * df) - 0.5 * (df * std::f64::consts::PI).ln()
}

/// Data-dependent part of [`t_ln_pdf`].
pub fn t_ln_kernel(t: f64, df: f64) -> f64 {
    if df.is_infinite() {
        return -0.5 * t * t;
    }
    -0.5 * (df + 1.0) * (t * t / df).ln_1p()
}

/// Log-density of the central chi-square distribution.
pub fn chisq_ln_pdf(x: f64, df: f64) -> f64 {
    if x < 0.0 {
        return f64::NEG_INFINITY;
    }
    let h = 0.5 * df;
    if x == 0.0 {
        return match h.partial_cmp(&1.0) {
            Some(std::cmp::Ordering::Less) => f64::INFINITY,
            Some(std::cmp::Ordering::Equal) => -std::f64::consts::LN_2,
            _ => f64::NEG_INFINITY,
        };
    }
    (h - 1.0) * x.ln() - 0.5 * x - h * std::f64::consts::LN_2 - ln_gamma(h)
}

/// Ratio of the noncentral to the central chi-square density at `x`.
///
/// Poisson-mixture series `exp(-ncp/2) * sum_j (ncp x / 4)^j / (j! (df/2)_j)`,
/// summed until the relative contribution drops below `1e-16`. Large
/// arguments are summed in log space.
pub fn noncentral_chisq_ratio(x: f64, df: f64, ncp: f64) -> f64 {
    if ncp == 0.0 {
        return 1.0;
    }
    let z = 0.25 * ncp * x;
    let half_df = 0.5 * df;
    if z == 0.0 {
        return (-0.5 * ncp).exp();
    }
    if z < 500.0 {
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut j = 0.0;
        loop {
            term *= z / ((j + 1.0) * (half_df + j));
            sum += term;
            j += 1.0;
            if term < sum * 1e-17 && j > z.sqrt() {
                break;
            }
        }
        return (-0.5 * ncp).exp() * sum;
    }
    // log-space: terms peak near j ~ sqrt(z)
    let ln_z = z.ln();
    let ln_term = |j: f64| j * ln_z - ln_gamma(j + 1.0) - (ln_gamma(half_df + j) - ln_gamma(half_df));
    let peak = z.sqrt().floor();
    let top = ln_term(peak);
    let mut sum = 0.0;
    let mut j = peak;
    loop {
        let t = (ln_term(j) - top).exp();
        sum += t;
        if t < 1e-17 * sum || j == 0.0 {
            break;
        }
        j -= 1.0;
    }
    j = peak + 1.0;
    loop {
        let t = (ln_term(j) - top).exp();
        sum += t;
        if t < 1e-17 * sum {
            break;
        }
        j += 1.0;
    }
    (top + sum.ln() - 0.5 * ncp).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trigamma_known_values() {
        let pi2_6 = std::f64::consts::PI.powi(2) / 6.0;
        assert!((trigamma(1.0) - pi2_6).abs() < 1e-13);
        assert!((trigamma(0.5) - std::f64::consts::PI.powi(2) / 2.0).abs() < 1e-12);
        // psi''(1) = -2 zeta(3)
        assert!((tetragamma(1.0) + 2.0 * 1.202_056_903_159_594_2).abs() < 1e-12);
    }

    #[test]
    fn trigamma_inverse_round_trip() {
        for x in [0.05, 0.3, 1.0, 1.82, 7.5, 40.0, 300.0] {
            let y = trigamma(x);
            let back = trigamma_inverse(y);
            assert!((back - x).abs() / x < 1e-8, "x={x} back={back}");
        }
    }

    #[test]
    fn polygamma_by_finite_differences() {
        for x in [0.7, 2.3, 12.0] {
            let h = 1e-5;
            let fd1 = (digamma(x + h) - digamma(x - h)) / (2.0 * h);
            assert!((fd1 - trigamma(x)).abs() < 1e-7);
            let fd2 = (trigamma(x + h) - trigamma(x - h)) / (2.0 * h);
            assert!((fd2 - tetragamma(x)).abs() < 1e-6);
        }
    }

    #[test]
    fn t_tail() {
        assert!((t_two_sided_p(0.0, 8.0) - 1.0).abs() < 1e-14);
        // 2.306004 is the 0.975 quantile of t with 8 df
        assert!((t_two_sided_p(2.306_004_135, 8.0) - 0.05).abs() < 1e-8);
        assert!((t_two_sided_p(1.959_963_985, f64::INFINITY) - 0.05).abs() < 1e-8);
    }

    #[test]
    fn t_density_integrates_to_one() {
        let v = crate::quad::integrate(|t| t_ln_pdf(t, 5.0).exp(), -2000.0, 2000.0, 1e-12);
        assert!((v - 1.0).abs() < 1e-8);
    }

    #[test]
    fn chisq_density_integrates_to_one() {
        let v = crate::quad::integrate(|x| chisq_ln_pdf(x, 9.0).exp(), 0.0, 200.0, 1e-13);
        assert!((v - 1.0).abs() < 1e-10);
    }

    #[test]
    fn ratio_linear_and_log_branches_agree() {
        // z just below and just above the branch point
        let below = noncentral_chisq_ratio(199.999_999, 9.0, 10.0);
        let above = noncentral_chisq_ratio(200.000_001, 9.0, 10.0);
        assert!((below / above - 1.0).abs() < 1e-6);
    }
}
