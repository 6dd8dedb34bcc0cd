//! Building e-values from data.

mod chisq;
mod limma;
mod soft_rank;

pub use chisq::{chisq_lr_evalue, noncentral_chisq_pdf};
pub use limma::{
    fit_gamma, fit_limma_hyperparameters, marginal_ln_density, moderated_t, moderated_t_evalue,
    LimmaPrior,
    ModeratedT, ModeratedTModel, GAMMA_GRID_POINTS,
};
pub use soft_rank::{soft_rank_evalue, PermutationStatistics, SoftRank};

use crate::error::{Error, Result};
use crate::values::EValue;

/// `lambda + (1 - lambda) e`: floors an e-value at `lambda` while keeping it an e-value.
pub fn shift_evalue(e: EValue, lambda: f64) -> Result<EValue> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::BadLambda {
            value: lambda,
            range: "[0, 1]",
        });
    }
    if lambda == 1.0 {
        return Ok(EValue::ONE);
    }
    EValue::new(lambda + (1.0 - lambda) * e.get())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(v: f64) -> EValue {
        EValue::new(v).unwrap()
    }

    #[test]
    fn shift_examples() {
        assert_eq!(shift_evalue(e(3.7), 0.0).unwrap().get(), 3.7);
        assert_eq!(shift_evalue(e(3.7), 1.0).unwrap().get(), 1.0);
        assert_eq!(shift_evalue(e(f64::INFINITY), 1.0).unwrap().get(), 1.0);
        assert_eq!(shift_evalue(e(0.0), 0.5).unwrap().get(), 0.5);
        assert!(matches!(shift_evalue(e(1.0), 1.5), Err(Error::BadLambda { .. })));
        assert!(shift_evalue(e(1.0), f64::NAN).is_err());
    }

    #[test]
    fn shift_is_monotone_in_lambda_on_each_side_of_one() {
        let lambdas: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
        for v in [0.0, 0.3, 0.99] {
            let s: Vec<f64> = lambdas.iter().map(|&l| shift_evalue(e(v), l).unwrap().get()).collect();
            assert!(s.windows(2).all(|w| w[0] <= w[1]));
        }
        for v in [1.01, 5.0, 1e6] {
            let s: Vec<f64> = lambdas.iter().map(|&l| shift_evalue(e(v), l).unwrap().get()).collect();
            assert!(s.windows(2).all(|w| w[0] >= w[1]));
        }
    }
}
