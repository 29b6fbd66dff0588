//! Binary endpoints: success probability pi in (0,1).

use rand::RngCore;
use rand_distr::{Binomial, Distribution};

use crate::data::SufficientStat;
use crate::error::{Error, Result};
use crate::families::Family;

/// Efficacy scale for the binary family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryEfficacy {
    /// h(pi) = pi, the rate-difference scale.
    Identity,
    /// h(pi) = log(pi / (1 - pi)), the log-odds scale.
    Logit,
}

#[derive(Debug, Clone, Copy)]
pub struct BinaryFamily {
    efficacy: BinaryEfficacy,
}

impl BinaryFamily {
    pub fn identity() -> Self {
        BinaryFamily {
            efficacy: BinaryEfficacy::Identity,
        }
    }

    pub fn logit() -> Self {
        BinaryFamily {
            efficacy: BinaryEfficacy::Logit,
        }
    }

    pub fn efficacy_kind(&self) -> BinaryEfficacy {
        self.efficacy
    }
}

impl Family for BinaryFamily {
    fn name(&self) -> &'static str {
        match self.efficacy {
            BinaryEfficacy::Identity => "binary",
            BinaryEfficacy::Logit => "binary-logit",
        }
    }

    fn domain(&self) -> (f64, f64) {
        (0.0, 1.0)
    }

    fn efficacy(&self, pi: f64) -> f64 {
        match self.efficacy {
            BinaryEfficacy::Identity => pi,
            BinaryEfficacy::Logit => (pi / (1.0 - pi)).ln(),
        }
    }

    fn efficacy_inv(&self, y: f64) -> Result<f64> {
        match self.efficacy {
            BinaryEfficacy::Identity => {
                if y > 0.0 && y < 1.0 {
                    Ok(y)
                } else {
                    Err(Error::Range(format!(
                        "efficacy value {y} is not an interior success probability"
                    )))
                }
            }
            BinaryEfficacy::Logit => {
                if y.is_finite() {
                    Ok(1.0 / (1.0 + (-y).exp()))
                } else {
                    Err(Error::Range(format!("log-odds value {y} is not finite")))
                }
            }
        }
    }

    fn efficacy_deriv(&self, pi: f64) -> f64 {
        match self.efficacy {
            BinaryEfficacy::Identity => 1.0,
            BinaryEfficacy::Logit => 1.0 / (pi * (1.0 - pi)),
        }
    }

    fn fisher_information(&self, pi: f64) -> f64 {
        1.0 / (pi * (1.0 - pi))
    }

    fn log_density(&self, pi: f64, x: f64) -> f64 {
        x * pi.ln() + (1.0 - x) * (1.0 - pi).ln()
    }

    fn kl(&self, pi0: f64, pi: f64) -> f64 {
        pi0 * (pi0 / pi).ln() + (1.0 - pi0) * ((1.0 - pi0) / (1.0 - pi)).ln()
    }

    fn kl_grad(&self, pi0: f64, pi: f64) -> f64 {
        (pi - pi0) / (pi * (1.0 - pi))
    }

    fn kl_hess(&self, pi0: f64, pi: f64) -> f64 {
        pi0 / (pi * pi) + (1.0 - pi0) / ((1.0 - pi) * (1.0 - pi))
    }

    fn validate_stat(&self, stat: &SufficientStat) -> Result<()> {
        let x = stat.sum;
        if x < 0.0 || x > stat.n as f64 {
            return Err(Error::InconsistentStat(format!(
                "success count {x} outside [0, n = {}]",
                stat.n
            )));
        }
        if (x - x.round()).abs() > 1e-9 {
            return Err(Error::InconsistentStat(format!(
                "success count {x} is not an integer"
            )));
        }
        Ok(())
    }

    fn mle(&self, stat: &SufficientStat) -> f64 {
        stat.sum / stat.n as f64
    }

    fn log_likelihood(&self, pi: f64, stat: &SufficientStat) -> f64 {
        stat.sum * pi.ln() + (stat.n as f64 - stat.sum) * (1.0 - pi).ln()
    }

    fn score(&self, pi: f64, stat: &SufficientStat) -> f64 {
        stat.sum / pi - (stat.n as f64 - stat.sum) / (1.0 - pi)
    }

    fn observed_information(&self, pi: f64, stat: &SufficientStat) -> f64 {
        stat.sum / (pi * pi) + (stat.n as f64 - stat.sum) / ((1.0 - pi) * (1.0 - pi))
    }

    fn sample_stat(&self, pi: f64, n: u64, rng: &mut dyn RngCore) -> SufficientStat {
        let count = Binomial::new(n, pi)
            .expect("valid binomial parameters")
            .sample(rng);
        SufficientStat {
            n,
            sum: count as f64,
            sum_sq: count as f64,
        }
    }
}
