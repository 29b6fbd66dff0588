//! Exponential endpoints: mean lambda in (0, inf), log efficacy.
//!
//! On the log scale the per-group variance of the efficacy estimate is the
//! constant 1, so like the normal family the restricted and unrestricted
//! variance estimators coincide.

use rand::RngCore;
use rand_distr::{Distribution, Gamma};

use crate::data::SufficientStat;
use crate::error::{Error, Result};
use crate::families::Family;

#[derive(Debug, Clone, Copy, Default)]
pub struct ExponentialFamily;

impl Family for ExponentialFamily {
    fn name(&self) -> &'static str {
        "exponential"
    }

    fn domain(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }

    fn efficacy(&self, lambda: f64) -> f64 {
        lambda.ln()
    }

    fn efficacy_inv(&self, y: f64) -> Result<f64> {
        if y.is_finite() {
            Ok(y.exp())
        } else {
            Err(Error::Range(format!("log-mean {y} is not finite")))
        }
    }

    fn efficacy_deriv(&self, lambda: f64) -> f64 {
        1.0 / lambda
    }

    fn fisher_information(&self, lambda: f64) -> f64 {
        1.0 / (lambda * lambda)
    }

    fn log_density(&self, lambda: f64, x: f64) -> f64 {
        -lambda.ln() - x / lambda
    }

    fn kl(&self, l0: f64, l: f64) -> f64 {
        (l / l0).ln() + l0 / l - 1.0
    }

    fn kl_grad(&self, l0: f64, l: f64) -> f64 {
        1.0 / l - l0 / (l * l)
    }

    fn kl_hess(&self, l0: f64, l: f64) -> f64 {
        (2.0 * l0 - l) / (l * l * l)
    }

    fn validate_stat(&self, stat: &SufficientStat) -> Result<()> {
        if stat.sum < 0.0 {
            return Err(Error::InconsistentStat(format!(
                "total waiting time {} is negative",
                stat.sum
            )));
        }
        Ok(())
    }

    fn mle(&self, stat: &SufficientStat) -> f64 {
        stat.sum / stat.n as f64
    }

    fn log_likelihood(&self, lambda: f64, stat: &SufficientStat) -> f64 {
        -(stat.n as f64) * lambda.ln() - stat.sum / lambda
    }

    fn score(&self, lambda: f64, stat: &SufficientStat) -> f64 {
        -(stat.n as f64) / lambda + stat.sum / (lambda * lambda)
    }

    fn observed_information(&self, lambda: f64, stat: &SufficientStat) -> f64 {
        -(stat.n as f64) / (lambda * lambda) + 2.0 * stat.sum / (lambda * lambda * lambda)
    }

    fn sample_stat(&self, lambda: f64, n: u64, rng: &mut dyn RngCore) -> SufficientStat {
        // Sum of n iid exponentials with mean lambda is Gamma(n, lambda).
        let total = Gamma::new(n as f64, lambda)
            .expect("valid gamma parameters")
            .sample(rng);
        SufficientStat {
            n,
            sum: total,
            // Second moment is not needed by this family; carry a consistent
            // placeholder (per-observation squares are not recoverable from
            // the total alone).
            sum_sq: total * total / n as f64,
        }
    }
}
