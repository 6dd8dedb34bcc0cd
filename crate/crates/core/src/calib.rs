//! Calibrators between p-values and e-values, and the four ways of merging one
//! p-value with one e-value.
//!
//! | combiner | output | valid when |
//! |----------|--------|------------|
//! | [`combine_product`] `h(p) e` | e-value | p and e independent |
//! | [`combine_quotient`] `min(p / e, 1)` | p-value | p and e independent |
//! | [`combine_mean`] `lambda h(p) + (1 - lambda) e` | e-value | any dependence |
//! | [`combine_bonferroni`] `min(2 min(p, 1/e), 1)` | p-value | any dependence |
//!
//! Products follow the convention `0 * inf = inf`.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad;
use crate::values::{EValue, PValue};

/// An admissible p-to-e calibrator: decreasing, `h(0) = inf`, unit integral on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub enum Calibrator {
    /// `h(p) = kappa p^(kappa - 1)` for `kappa` in `(0, 1)`.
    PowerKappa(f64),
    /// `h(p) = p^(-1/2) - 1`.
    #[default]
    SqrtMinusOne,
}

impl Calibrator {
    pub fn power(kappa: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa < 1.0) {
            return Err(Error::param("kappa", format!("must lie in (0, 1), got {kappa}")));
        }
        Ok(Calibrator::PowerKappa(kappa))
    }

    /// Evaluates `h(p)`; `h(0) = inf`.
    pub fn apply(&self, p: f64) -> f64 {
        if p == 0.0 {
            return f64::INFINITY;
        }
        match *self {
            Calibrator::PowerKappa(kappa) => kappa * p.powf(kappa - 1.0),
            Calibrator::SqrtMinusOne => 1.0 / p.sqrt() - 1.0,
        }
    }

    /// `int_0^eps h(u) du`, in closed form.
    fn tail_mass(&self, eps: f64) -> f64 {
        match *self {
            Calibrator::PowerKappa(kappa) => eps.powf(kappa),
            Calibrator::SqrtMinusOne => 2.0 * eps.sqrt() - eps,
        }
    }

    /// Numerical `int_0^1 h(u) du`: Gauss-Kronrod over `[eps, 1]` in the
    /// variable `ln u`, plus the closed-form mass of `[0, eps]`.
    pub fn total_mass(&self) -> f64 {
        let eps = 1e-14_f64;
        let body = quad::integrate(
            |s| {
                let u = s.exp();
                self.apply(u) * u
            },
            eps.ln(),
            0.0,
            1e-13,
        );
        body + self.tail_mass(eps)
    }

    /// Parses `sqrt` or `kappa:<value>`.
    pub fn parse(spec: &str) -> Result<Self> {
        let s = spec.trim();
        if s.eq_ignore_ascii_case("sqrt") {
            return Ok(Calibrator::SqrtMinusOne);
        }
        if let Some(v) = s.strip_prefix("kappa:") {
            let kappa: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::param("calibrator", format!("cannot parse kappa in `{spec}`")))?;
            return Calibrator::power(kappa);
        }
        Err(Error::param(
            "calibrator",
            format!("expected `sqrt` or `kappa:<value>`, got `{spec}`"),
        ))
    }
}

impl FromStr for Calibrator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Calibrator::parse(s)
    }
}

impl fmt::Display for Calibrator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Calibrator::SqrtMinusOne => write!(f, "sqrt"),
            Calibrator::PowerKappa(k) => write!(f, "kappa:{k}"),
        }
    }
}

pub fn calibrate_p_to_e(h: Calibrator, p: PValue) -> EValue {
    EValue::new(h.apply(p.get())).expect("calibrator output is nonnegative")
}

/// The unique admissible e-to-p calibrator `min(1/e, 1)`.
pub fn calibrate_e_to_p(e: EValue) -> PValue {
    PValue::clamped(e_to_p(e.get())).expect("1/e is never NaN")
}

#[inline]
pub(crate) fn e_to_p(e: f64) -> f64 {
    (1.0 / e).min(1.0)
}

#[inline]
pub(crate) fn product(h: Calibrator, p: f64, e: f64) -> f64 {
    let hp = h.apply(p);
    if hp.is_infinite() || e.is_infinite() {
        f64::INFINITY
    } else {
        hp * e
    }
}

/// `min(p/e, 1)` with `p/0 = inf` for `p > 0` and `0/0 = 0`.
#[inline]
pub(crate) fn quotient(p: f64, e: f64) -> f64 {
    if p == 0.0 {
        0.0
    } else {
        (p / e).min(1.0)
    }
}

/// `h(p) * e`, the product combiner (independent p and e).
pub fn combine_product(h: Calibrator, p: PValue, e: EValue) -> EValue {
    EValue::new(product(h, p.get(), e.get())).expect("product of nonnegative values")
}

/// `min(p / e, 1)`, the quotient combiner (independent p and e).
pub fn combine_quotient(p: PValue, e: EValue) -> PValue {
    PValue::clamped(quotient(p.get(), e.get())).expect("quotient is never NaN")
}

/// `lambda h(p) + (1 - lambda) e`, valid under any dependence.
pub fn combine_mean(h: Calibrator, lambda: f64, p: PValue, e: EValue) -> Result<EValue> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::BadLambda {
            value: lambda,
            range: "(0, 1)",
        });
    }
    EValue::new(lambda * h.apply(p.get()) + (1.0 - lambda) * e.get())
}

/// `min(2 min(p, 1/e), 1)`, valid under any dependence.
pub fn combine_bonferroni(p: PValue, e: EValue) -> PValue {
    let inv = 1.0 / e.get();
    PValue::clamped((2.0 * p.get().min(inv)).min(1.0)).expect("never NaN")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: f64) -> PValue {
        PValue::new(v).unwrap()
    }
    fn e(v: f64) -> EValue {
        EValue::new(v).unwrap()
    }

    #[test]
    fn p_to_e_examples() {
        assert_eq!(calibrate_p_to_e(Calibrator::SqrtMinusOne, p(0.25)).get(), 1.0);
        assert_eq!(
            calibrate_p_to_e(Calibrator::SqrtMinusOne, p(0.0)).get(),
            f64::INFINITY
        );
        assert_eq!(calibrate_p_to_e(Calibrator::PowerKappa(0.5), p(0.25)).get(), 1.0);
        assert_eq!(Calibrator::SqrtMinusOne.apply(1.0), 0.0);
    }

    #[test]
    fn e_to_p_examples() {
        assert_eq!(calibrate_e_to_p(e(4.0)).get(), 0.25);
        assert_eq!(calibrate_e_to_p(e(0.5)).get(), 1.0);
        assert_eq!(calibrate_e_to_p(e(f64::INFINITY)).get(), 0.0);
        assert_eq!(calibrate_e_to_p(e(0.0)).get(), 1.0);
    }

    #[test]
    fn product_examples() {
        let h = Calibrator::SqrtMinusOne;
        assert_eq!(combine_product(h, p(0.25), e(2.0)).get(), 2.0);
        assert_eq!(combine_product(h, p(0.0), e(0.0)).get(), f64::INFINITY);
        assert_eq!(combine_product(h, p(1.0), e(f64::INFINITY)).get(), f64::INFINITY);
        let x = h.apply(0.1);
        assert_eq!(combine_product(h, p(0.1), e(1.0)).get(), x);
    }

    #[test]
    fn quotient_examples() {
        assert!((combine_quotient(p(0.04), e(2.0)).get() - 0.02).abs() < 1e-17);
        assert_eq!(combine_quotient(p(0.5), e(0.25)).get(), 1.0);
        assert_eq!(combine_quotient(p(0.3), e(1.0)).get(), 0.3);
        assert_eq!(combine_quotient(p(0.0), e(0.0)).get(), 0.0);
        assert_eq!(combine_quotient(p(0.2), e(0.0)).get(), 1.0);
        assert_eq!(combine_quotient(p(0.2), e(f64::INFINITY)).get(), 0.0);
    }

    #[test]
    fn mean_examples() {
        let h = Calibrator::SqrtMinusOne;
        assert_eq!(combine_mean(h, 0.5, p(0.25), e(3.0)).unwrap().get(), 2.0);
        assert_eq!(
            combine_mean(h, 0.5, p(0.0), e(0.3)).unwrap().get(),
            f64::INFINITY
        );
        let one = combine_mean(h, 0.9, p(0.25), e(1.0)).unwrap().get();
        assert!((one - 1.0).abs() < 1e-15);
        for bad in [0.0, 1.0, -0.1, f64::NAN] {
            assert!(matches!(
                combine_mean(h, bad, p(0.5), e(1.0)),
                Err(Error::BadLambda { .. })
            ));
        }
    }

    #[test]
    fn bonferroni_examples() {
        assert!((combine_bonferroni(p(0.03), e(100.0)).get() - 0.02).abs() < 1e-17);
        assert_eq!(combine_bonferroni(p(0.6), e(1.0)).get(), 1.0);
        assert_eq!(combine_bonferroni(p(0.0), e(3.0)).get(), 0.0);
        assert_eq!(combine_bonferroni(p(0.2), e(0.0)).get(), 0.4);
    }

    #[test]
    fn unit_mass() {
        for h in [
            Calibrator::SqrtMinusOne,
            Calibrator::PowerKappa(0.05),
            Calibrator::PowerKappa(0.5),
            Calibrator::PowerKappa(0.95),
        ] {
            assert!((h.total_mass() - 1.0).abs() < 1e-8, "{h}: {}", h.total_mass());
        }
    }

    #[test]
    fn bounded_by_reciprocal() {
        for h in [Calibrator::SqrtMinusOne, Calibrator::PowerKappa(0.3), Calibrator::PowerKappa(0.99)] {
            for i in 1..=1000 {
                let p = i as f64 / 1000.0;
                assert!(h.apply(p) <= 1.0 / p);
            }
        }
    }

    #[test]
    fn parse_round_trip() {
        assert_eq!(Calibrator::parse("sqrt").unwrap(), Calibrator::SqrtMinusOne);
        assert_eq!(Calibrator::parse("kappa:0.3").unwrap(), Calibrator::PowerKappa(0.3));
        assert!(Calibrator::parse("kappa:1.5").is_err());
        assert!(Calibrator::parse("cube").is_err());
        let h = Calibrator::PowerKappa(0.25);
        assert_eq!(Calibrator::parse(&h.to_string()).unwrap(), h);
    }
}
