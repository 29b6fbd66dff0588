//! Poisson endpoints: event rate lambda in (0, inf), negated-mean efficacy.
//!
//! Small rates are desirable (fewer seizures, fewer attacks), so h(lambda) =
//! -lambda makes larger efficacy values correspond to better treatments.

use rand::RngCore;
use rand_distr::{Distribution, Poisson};
use statrs::function::gamma::ln_gamma;

use crate::data::SufficientStat;
use crate::error::{Error, Result};
use crate::families::Family;

#[derive(Debug, Clone, Copy, Default)]
pub struct PoissonFamily;

impl Family for PoissonFamily {
    fn name(&self) -> &'static str {
        "poisson"
    }

    fn domain(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }

    fn efficacy(&self, lambda: f64) -> f64 {
        -lambda
    }

    fn efficacy_inv(&self, y: f64) -> Result<f64> {
        if y < 0.0 && y.is_finite() {
            Ok(-y)
        } else {
            Err(Error::Range(format!(
                "efficacy value {y} does not correspond to a positive rate"
            )))
        }
    }

    fn efficacy_deriv(&self, _lambda: f64) -> f64 {
        -1.0
    }

    fn fisher_information(&self, lambda: f64) -> f64 {
        1.0 / lambda
    }

    fn log_density(&self, lambda: f64, x: f64) -> f64 {
        x * lambda.ln() - lambda - ln_gamma(x + 1.0)
    }

    fn kl(&self, l0: f64, l: f64) -> f64 {
        l - l0 + l0 * (l0.ln() - l.ln())
    }

    fn kl_grad(&self, l0: f64, l: f64) -> f64 {
        1.0 - l0 / l
    }

    fn kl_hess(&self, l0: f64, l: f64) -> f64 {
        l0 / (l * l)
    }

    fn validate_stat(&self, stat: &SufficientStat) -> Result<()> {
        if stat.sum < 0.0 {
            return Err(Error::InconsistentStat(format!(
                "event total {} is negative",
                stat.sum
            )));
        }
        if (stat.sum - stat.sum.round()).abs() > 1e-9 {
            return Err(Error::InconsistentStat(format!(
                "event total {} is not an integer",
                stat.sum
            )));
        }
        Ok(())
    }

    fn mle(&self, stat: &SufficientStat) -> f64 {
        stat.sum / stat.n as f64
    }

    fn log_likelihood(&self, lambda: f64, stat: &SufficientStat) -> f64 {
        stat.sum * lambda.ln() - stat.n as f64 * lambda
    }

    fn score(&self, lambda: f64, stat: &SufficientStat) -> f64 {
        stat.sum / lambda - stat.n as f64
    }

    fn observed_information(&self, lambda: f64, stat: &SufficientStat) -> f64 {
        stat.sum / (lambda * lambda)
    }

    fn sample_stat(&self, lambda: f64, n: u64, rng: &mut dyn RngCore) -> SufficientStat {
        // The group total is itself Poisson with rate n * lambda.
        let total = Poisson::new(n as f64 * lambda)
            .expect("valid poisson rate")
            .sample(rng);
        SufficientStat {
            n,
            sum: total,
            sum_sq: total,
        }
    }

    fn planning_scale(&self, zeta0: [f64; 3]) -> Option<f64> {
        // Rescaling all rates by the placebo rate leaves the projection
        // equivariant and conditions the optimizer.
        Some(zeta0[2])
    }
}
