//! False discovery proportion, power and their Monte-Carlo aggregates.

use serde::Serialize;

use crate::error::{Error, Result};

/// Outcome of one procedure on one replicate with known ground truth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplicateOutcome {
    pub fdp: f64,
    pub power: f64,
    pub false_discoveries: usize,
    pub discoveries: usize,
}

/// FDP = F/R (0/0 = 0) and power = (R - F)/(K - K0) (0/0 = 0).
pub fn fdp_and_power(rejected: &[usize], is_null: &[bool]) -> Result<(f64, f64)> {
    let o = outcome(rejected, is_null)?;
    Ok((o.fdp, o.power))
}

pub fn outcome(rejected: &[usize], is_null: &[bool]) -> Result<ReplicateOutcome> {
    let k = is_null.len();
    let mut false_discoveries = 0usize;
    for &i in rejected {
        if i >= k {
            return Err(Error::LengthMismatch {
                expected: k,
                found: i + 1,
            });
        }
        if is_null[i] {
            false_discoveries += 1;
        }
    }
    let discoveries = rejected.len();
    let non_nulls = is_null.iter().filter(|&&n| !n).count();
    let fdp = if discoveries == 0 {
        0.0
    } else {
        false_discoveries as f64 / discoveries as f64
    };
    let power = if non_nulls == 0 {
        0.0
    } else {
        (discoveries - false_discoveries) as f64 / non_nulls as f64
    };
    Ok(ReplicateOutcome {
        fdp,
        power,
        false_discoveries,
        discoveries,
    })
}

/// Monte-Carlo estimates of the error rates of one procedure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorMetrics {
    pub fdr: f64,
    pub se_fdr: f64,
    pub power: f64,
    pub se_power: f64,
    pub fwer: f64,
    pub se_fwer: f64,
    pub pfer: f64,
    pub se_pfer: f64,
    pub mean_discoveries: f64,
    pub replicates: usize,
}

/// Running sums for one scalar; mean and SE = sd/sqrt(n).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MomentSum {
    pub n: usize,
    pub sum: f64,
    pub sum_sq: f64,
}

impl MomentSum {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn merge(&mut self, other: &MomentSum) {
        self.n += other.n;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    pub fn mean(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.sum / self.n as f64
        }
    }

    /// Sample standard deviation (n - 1 denominator).
    pub fn sd(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        let m = self.sum / n;
        ((self.sum_sq - n * m * m) / (n - 1.0)).max(0.0).sqrt()
    }

    pub fn se(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.sd() / (self.n as f64).sqrt()
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MetricsAccumulator {
    fdp: MomentSum,
    power: MomentSum,
    any_false: MomentSum,
    false_count: MomentSum,
    discoveries: MomentSum,
}

impl MetricsAccumulator {
    pub fn push(&mut self, o: &ReplicateOutcome) {
        self.fdp.push(o.fdp);
        self.power.push(o.power);
        self.any_false
            .push(if o.false_discoveries > 0 { 1.0 } else { 0.0 });
        self.false_count.push(o.false_discoveries as f64);
        self.discoveries.push(o.discoveries as f64);
    }

    pub fn finish(&self) -> ErrorMetrics {
        ErrorMetrics {
            fdr: self.fdp.mean(),
            se_fdr: self.fdp.se(),
            power: self.power.mean(),
            se_power: self.power.se(),
            fwer: self.any_false.mean(),
            se_fwer: self.any_false.se(),
            pfer: self.false_count.mean(),
            se_pfer: self.false_count.se(),
            mean_discoveries: self.discoveries.mean(),
            replicates: self.fdp.n,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_rejection_set_has_zero_fdp() {
        let (fdp, power) = fdp_and_power(&[], &[true, false, true]).unwrap();
        assert_eq!(fdp, 0.0);
        assert_eq!(power, 0.0);
    }

    #[test]
    fn counting_example() {
        // rejected {1,2} (1-based), null {2}, K = 4, K0 = 1
        let truth = [false, true, false, false];
        let (fdp, power) = fdp_and_power(&[0, 1], &truth).unwrap();
        assert_eq!(fdp, 0.5);
        assert!((power - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn no_nulls() {
        let (fdp, power) = fdp_and_power(&[0], &[false, false]).unwrap();
        assert_eq!(fdp, 0.0);
        assert_eq!(power, 0.5);
    }

    #[test]
    fn all_nulls_power_is_zero() {
        let (fdp, power) = fdp_and_power(&[0, 1], &[true, true]).unwrap();
        assert_eq!(fdp, 1.0);
        assert_eq!(power, 0.0);
    }

    #[test]
    fn out_of_range_index() {
        assert!(matches!(
            fdp_and_power(&[3], &[true]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn accumulator_se() {
        let mut acc = MetricsAccumulator::default();
        for fdp in [0.0, 1.0, 0.0, 1.0] {
            acc.push(&ReplicateOutcome {
                fdp,
                power: 0.5,
                false_discoveries: fdp as usize,
                discoveries: 1,
            });
        }
        let m = acc.finish();
        assert_eq!(m.replicates, 4);
        assert_eq!(m.fdr, 0.5);
        // sd of {0,1,0,1} is sqrt(1/3)
        assert!((m.se_fdr - (1.0f64 / 3.0).sqrt() / 2.0).abs() < 1e-12);
        assert_eq!(m.fwer, 0.5);
        assert_eq!(m.pfer, 0.5);
        assert_eq!(m.se_power, 0.0);
    }
}
