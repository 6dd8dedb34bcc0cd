//! Validated p-values and e-values, hypothesis records and order statistics.

use std::cmp::Ordering;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// A realized p-value in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct PValue(f64);

impl PValue {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_nan() || !(0.0..=1.0).contains(&value) {
            return Err(Error::malformed(
                "<p-value>",
                format!("p-value must lie in [0, 1], got {value}"),
            ));
        }
        Ok(PValue(value))
    }

    /// Clamps into `[0, 1]`; NaN is rejected.
    pub fn clamped(value: f64) -> Result<Self> {
        if value.is_nan() {
            return Err(Error::malformed("<p-value>", "p-value is NaN"));
        }
        Ok(PValue(value.clamp(0.0, 1.0)))
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

impl fmt::Display for PValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A realized e-value in `[0, +inf]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct EValue(f64);

impl EValue {
    pub const ONE: EValue = EValue(1.0);
    pub const INFINITY: EValue = EValue(f64::INFINITY);

    pub fn new(value: f64) -> Result<Self> {
        if value.is_nan() || value < 0.0 {
            return Err(Error::malformed(
                "<e-value>",
                format!("e-value must lie in [0, inf], got {value}"),
            ));
        }
        Ok(EValue(value))
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

impl fmt::Display for EValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

pub(crate) fn check_p(id: impl fmt::Display, value: f64) -> Result<()> {
    if value.is_nan() || !(0.0..=1.0).contains(&value) {
        return Err(Error::malformed(
            id.to_string(),
            format!("p-value must lie in [0, 1], got {value}"),
        ));
    }
    Ok(())
}

pub(crate) fn check_e(id: impl fmt::Display, value: f64) -> Result<()> {
    if value.is_nan() || value < 0.0 {
        return Err(Error::malformed(
            id.to_string(),
            format!("e-value must lie in [0, inf], got {value}"),
        ));
    }
    Ok(())
}

/// One hypothesis: a p-value, an e-value, or both.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisRecord {
    pub id: String,
    pub p: Option<f64>,
    pub e: Option<f64>,
    /// Simulation ground truth; `None` for real data.
    pub is_null: Option<bool>,
}

impl HypothesisRecord {
    pub fn new(id: impl Into<String>, p: Option<f64>, e: Option<f64>) -> Self {
        HypothesisRecord {
            id: id.into(),
            p,
            e,
            is_null: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.p.is_none() && self.e.is_none() {
            return Err(Error::malformed(&self.id, "neither p nor e is present"));
        }
        if let Some(p) = self.p {
            check_p(&self.id, p)?;
        }
        if let Some(e) = self.e {
            check_e(&self.id, e)?;
        }
        Ok(())
    }
}

/// Inputs after validation. Missing e-values are already replaced by 1.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedInputs {
    pub ids: Vec<String>,
    pub p: Vec<Option<f64>>,
    pub e: Vec<f64>,
}

impl NormalizedInputs {
    pub fn len(&self) -> usize {
        self.e.len()
    }

    pub fn is_empty(&self) -> bool {
        self.e.is_empty()
    }

    /// The full p-vector; fails on the first record without a p-value.
    pub fn p_values(&self) -> Result<Vec<f64>> {
        self.p
            .iter()
            .zip(&self.ids)
            .map(|(p, id)| p.ok_or_else(|| Error::malformed(id, "p-value is missing")))
            .collect()
    }
}

/// Validates records and fills missing e-values with 1, keeping input order.
pub fn validate_inputs(records: &[HypothesisRecord]) -> Result<NormalizedInputs> {
    if records.is_empty() {
        return Err(Error::EmptyInput);
    }
    for r in records {
        r.validate()?;
    }
    Ok(NormalizedInputs {
        ids: records.iter().map(|r| r.id.clone()).collect(),
        p: records.iter().map(|r| r.p).collect(),
        e: records.iter().map(|r| r.e.unwrap_or(1.0)).collect(),
    })
}

/// Locale-independent text form: `{:.16e}` (17 significant digits), `inf` for infinity.
pub fn format_real(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

/// Indices that sort `values` ascending (stable; NaN is not expected).
pub fn ascending_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(Ordering::Equal));
    idx
}

/// Indices that sort `values` descending (stable).
pub fn descending_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap_or(Ordering::Equal));
    idx
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(p: Option<f64>, e: Option<f64>) -> HypothesisRecord {
        HypothesisRecord::new("h", p, e)
    }

    #[test]
    fn missing_evalue_defaults_to_one() {
        let n = validate_inputs(&[rec(Some(0.5), None)]).unwrap();
        assert_eq!(n.p_values().unwrap(), vec![0.5]);
        assert_eq!(n.e, vec![1.0]);
        assert_eq!(n.len(), 1);
    }

    #[test]
    fn nan_pvalue_is_rejected() {
        let err = validate_inputs(&[rec(Some(f64::NAN), None)]).unwrap_err();
        assert!(matches!(err, Error::MalformedValue { ref id, .. } if id == "h"));
    }

    #[test]
    fn mixed_defaults() {
        let n = validate_inputs(&[rec(Some(0.01), Some(2.0)), rec(Some(0.2), None)]).unwrap();
        assert_eq!(n.e, vec![2.0, 1.0]);
    }

    #[test]
    fn empty_and_absent() {
        assert_eq!(validate_inputs(&[]).unwrap_err(), Error::EmptyInput);
        assert!(validate_inputs(&[rec(None, None)]).is_err());
        assert!(validate_inputs(&[rec(Some(1.5), None)]).is_err());
        assert!(validate_inputs(&[rec(None, Some(-1.0))]).is_err());
        let e_only = validate_inputs(&[rec(None, Some(f64::INFINITY))]).unwrap();
        assert!(e_only.p_values().is_err());
    }

    #[test]
    fn newtypes() {
        assert!(PValue::new(0.0).is_ok());
        assert!(PValue::new(-0.1).is_err());
        assert!(EValue::new(f64::INFINITY).is_ok());
        assert!(EValue::new(f64::NAN).is_err());
        assert_eq!(PValue::clamped(3.0).unwrap().get(), 1.0);
    }

    #[test]
    fn order_statistics_are_stable() {
        let v = [0.3, 0.1, 0.3, 0.0];
        assert_eq!(ascending_order(&v), vec![3, 1, 0, 2]);
        assert_eq!(descending_order(&v), vec![0, 2, 1, 3]);
    }
}
