//! Normal endpoints with homogeneous variance: theta_k = mu_k, common tau^2.
//!
//! The common variance is either fixed at construction (planning) or pooled
//! from the data (testing). With a homogeneous tau^2 the per-group variances
//! do not depend on the means, so the restricted and unrestricted variance
//! estimators coincide; the restricted mean estimates are still reported.

use std::sync::Arc;

use rand::RngCore;
use rand_distr::{ChiSquared, Distribution, Normal};

use crate::data::{GroupData, SufficientStat};
use crate::error::{Error, Result};
use crate::families::Family;

const LN_2PI: f64 = 1.8378770664093453;

#[derive(Debug, Clone, Copy)]
enum Variance {
    Fixed(f64),
    Pooled,
}

#[derive(Debug, Clone, Copy)]
pub struct NormalFamily {
    variance: Variance,
}

impl NormalFamily {
    /// Family with a known common variance tau^2 (used for planning).
    pub fn with_variance(tau2: f64) -> Self {
        assert!(tau2 > 0.0, "tau^2 must be positive");
        NormalFamily {
            variance: Variance::Fixed(tau2),
        }
    }

    /// Family whose common variance is pooled from the data at test time.
    pub fn pooled() -> Self {
        NormalFamily {
            variance: Variance::Pooled,
        }
    }

    pub fn tau2(&self) -> f64 {
        match self.variance {
            Variance::Fixed(v) => v,
            // Pooled variance unresolved; unit scale keeps the efficacy map
            // well-defined until resolve_with_data runs.
            Variance::Pooled => 1.0,
        }
    }

    /// Pooled maximum-likelihood variance: (1/n) sum_k sum_i (x_ki - xbar_k)^2.
    pub fn pooled_tau2(data: &GroupData) -> Result<f64> {
        let mut ss = 0.0;
        let mut n = 0.0;
        for g in [&data.test, &data.reference, &data.placebo] {
            ss += g.sum_sq - g.sum * g.sum / g.n as f64;
            n += g.n as f64;
        }
        if ss <= 0.0 {
            return Err(Error::Invalid(
                "pooled variance is zero; observations are constant".into(),
            ));
        }
        Ok(ss / n)
    }
}

impl Family for NormalFamily {
    fn name(&self) -> &'static str {
        "normal"
    }

    fn domain(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }

    fn efficacy(&self, mu: f64) -> f64 {
        mu
    }

    fn efficacy_inv(&self, y: f64) -> Result<f64> {
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::Range(format!("mean {y} is not finite")))
        }
    }

    fn efficacy_deriv(&self, _mu: f64) -> f64 {
        1.0
    }

    fn fisher_information(&self, _mu: f64) -> f64 {
        1.0 / self.tau2()
    }

    fn log_density(&self, mu: f64, x: f64) -> f64 {
        let t2 = self.tau2();
        -0.5 * ((x - mu) * (x - mu) / t2 + t2.ln() + LN_2PI)
    }

    fn kl(&self, mu0: f64, mu: f64) -> f64 {
        (mu0 - mu) * (mu0 - mu) / (2.0 * self.tau2())
    }

    fn kl_grad(&self, mu0: f64, mu: f64) -> f64 {
        (mu - mu0) / self.tau2()
    }

    fn kl_hess(&self, _mu0: f64, _mu: f64) -> f64 {
        1.0 / self.tau2()
    }

    fn validate_stat(&self, stat: &SufficientStat) -> Result<()> {
        let mean = stat.mean();
        if stat.sum_sq + 1e-9 < stat.sum * mean {
            return Err(Error::InconsistentStat(
                "sum of squares below the Cauchy-Schwarz lower bound".into(),
            ));
        }
        Ok(())
    }

    fn mle(&self, stat: &SufficientStat) -> f64 {
        stat.mean()
    }

    fn log_likelihood(&self, mu: f64, stat: &SufficientStat) -> f64 {
        let n = stat.n as f64;
        -(stat.sum_sq - 2.0 * mu * stat.sum + n * mu * mu) / (2.0 * self.tau2())
    }

    fn score(&self, mu: f64, stat: &SufficientStat) -> f64 {
        (stat.sum - stat.n as f64 * mu) / self.tau2()
    }

    fn observed_information(&self, _mu: f64, stat: &SufficientStat) -> f64 {
        stat.n as f64 / self.tau2()
    }

    fn sample_stat(&self, mu: f64, n: u64, rng: &mut dyn RngCore) -> SufficientStat {
        // Sample the sufficient statistic directly: the mean and the within-
        // group sum of squares are independent.
        let t2 = self.tau2();
        let mean = Normal::new(mu, (t2 / n as f64).sqrt())
            .expect("valid normal parameters")
            .sample(rng);
        let ss = if n > 1 {
            t2 * ChiSquared::new((n - 1) as f64)
                .expect("valid chi-squared dof")
                .sample(rng)
        } else {
            0.0
        };
        let sum = n as f64 * mean;
        SufficientStat {
            n,
            sum,
            sum_sq: ss + sum * mean,
        }
    }

    fn resolve_with_data(&self, data: &GroupData) -> Result<Option<Arc<dyn Family>>> {
        match self.variance {
            Variance::Fixed(_) => Ok(None),
            Variance::Pooled => Ok(Some(Arc::new(NormalFamily::with_variance(
                NormalFamily::pooled_tau2(data)?,
            )))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::GroupData;

    #[test]
    fn pooled_variance_from_moments() {
        // Two observations per group with within-group spread 1.0 around
        // different means: pooled MLE variance = sum (x - xbar)^2 / n = 0.25 * 6 / 6.
        let g = |a: f64, b: f64| SufficientStat::from_observations(&[a, b]).unwrap();
        let data = GroupData::new(g(1.0, 2.0), g(3.0, 4.0), g(0.0, 1.0));
        let tau2 = NormalFamily::pooled_tau2(&data).unwrap();
        assert!((tau2 - 0.25).abs() < 1e-12);
    }

    #[test]
    fn resolve_replaces_pooled_variance() {
        let g = |a: f64, b: f64| SufficientStat::from_observations(&[a, b]).unwrap();
        let data = GroupData::new(g(1.0, 2.0), g(3.0, 4.0), g(0.0, 1.0));
        let fam = NormalFamily::pooled();
        let resolved = fam.resolve_with_data(&data).unwrap().unwrap();
        assert!((resolved.fisher_information(0.0) - 4.0).abs() < 1e-12);
    }
}
