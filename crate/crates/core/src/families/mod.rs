//! Parametric endpoint families.
//!
//! A family bundles everything the retention-of-effect machinery needs from a
//! distribution: the scalar efficacy parameter and its open domain, the
//! strictly monotone efficacy map `h` with inverse and derivative, the
//! log-density, Fisher information, Kullback-Leibler divergence, and the MLE
//! from a group's sufficient statistic.
//!
//! Built-ins: binary endpoints with identity or logit efficacy, Poisson
//! endpoints with negated-mean efficacy, normal endpoints with homogeneous
//! variance, exponential endpoints with log efficacy. New families plug in
//! through [`Registry::register`] without changes to the rest of the library;
//! families with a shape-style nuisance (Gamma, Weibull) are admitted by
//! fixing the nuisance at construction time.
//!
//! One obligation is on the family author and is not checked mechanically:
//! along any parameter sequence escaping the domain (or diverging), the joint
//! density must vanish almost everywhere, so that restricted MLEs stay in a
//! compact set. All built-ins satisfy this.

mod binary;
mod exponential;
mod normal;
mod poisson;
mod registry;

use std::sync::Arc;

pub use binary::{BinaryEfficacy, BinaryFamily};
pub use exponential::ExponentialFamily;
pub use normal::NormalFamily;
pub use poisson::PoissonFamily;
pub use registry::Registry;

use crate::data::{Group, GroupData, SufficientStat};
use crate::error::{Error, Result};

/// A regular one-dimensional parametric family with a scalar efficacy
/// parameter. Methods may assume arguments inside the open domain unless
/// stated otherwise; the free functions in this module perform the checks.
pub trait Family: Send + Sync {
    /// Registry name, e.g. `"binary"` or `"binary-logit"`.
    fn name(&self) -> &'static str;

    /// Dimension of the underlying parameter vector. The built-ins expose a
    /// single free parameter per group (nuisances are fixed or pooled).
    fn param_dim(&self) -> usize {
        1
    }

    /// Open interval of valid parameter values.
    fn domain(&self) -> (f64, f64);

    fn contains(&self, theta: f64) -> bool {
        let (lo, hi) = self.domain();
        theta.is_finite() && theta > lo && theta < hi
    }

    /// Efficacy map h (differentiable, strictly monotone).
    fn efficacy(&self, theta: f64) -> f64;

    /// Inverse of the efficacy map. Errors with [`Error::Range`] when `y` is
    /// not attained on the domain.
    fn efficacy_inv(&self, y: f64) -> Result<f64>;

    /// Derivative dh/dtheta.
    fn efficacy_deriv(&self, theta: f64) -> f64;

    /// Fisher information I(theta) of a single observation.
    fn fisher_information(&self, theta: f64) -> f64;

    fn log_density(&self, theta: f64, x: f64) -> f64;

    /// Kullback-Leibler divergence K(theta0, theta) = E_theta0[log f(theta0,X) - log f(theta,X)].
    fn kl(&self, theta0: f64, theta: f64) -> f64;

    /// d/dtheta K(theta0, theta).
    fn kl_grad(&self, theta0: f64, theta: f64) -> f64;

    /// d^2/dtheta^2 K(theta0, theta); equals -E_theta0[d^2/dtheta^2 log f(theta,X)].
    fn kl_hess(&self, theta0: f64, theta: f64) -> f64;

    /// Validate that a sufficient statistic is well-formed for this family.
    fn validate_stat(&self, stat: &SufficientStat) -> Result<()>;

    /// Raw maximizer of the group log-likelihood; may lie on the closed
    /// domain boundary (see [`group_mle`] for the checked version).
    fn mle(&self, stat: &SufficientStat) -> f64;

    /// Group log-likelihood from the sufficient statistic, up to a constant
    /// not depending on theta.
    fn log_likelihood(&self, theta: f64, stat: &SufficientStat) -> f64;

    /// d/dtheta of the group log-likelihood.
    fn score(&self, theta: f64, stat: &SufficientStat) -> f64;

    /// -d^2/dtheta^2 of the group log-likelihood (observed information).
    fn observed_information(&self, theta: f64, stat: &SufficientStat) -> f64;

    /// Draw a group's sufficient statistic under `theta` (used by the Monte
    /// Carlo power engine).
    fn sample_stat(&self, theta: f64, n: u64, rng: &mut dyn rand::RngCore) -> SufficientStat;

    /// Hook for families with data-driven nuisances: returns a copy of the
    /// family with nuisances resolved from the data (e.g. pooled variance for
    /// the normal family). `None` when nothing needs resolving; errors when
    /// the data cannot support the nuisance (e.g. constant observations).
    fn resolve_with_data(&self, _data: &GroupData) -> Result<Option<Arc<dyn Family>>> {
        Ok(None)
    }

    /// Scale factor for internal renormalization during planning, when the
    /// family is scale-equivariant under its efficacy map (Poisson). The
    /// projection is computed on the rescaled problem and mapped back.
    fn planning_scale(&self, _zeta0: [f64; 3]) -> Option<f64> {
        None
    }
}

/// Per-group asymptotic variance of h(theta_hat).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EfficacyVariance {
    pub sigma2: f64,
}

/// Variance of the plug-in efficacy estimate: (dh/dtheta) I(theta)^{-1} (dh/dtheta)^T.
pub fn efficacy_variance(family: &dyn Family, theta: f64) -> Result<EfficacyVariance> {
    if !family.contains(theta) {
        return Err(Error::Domain(format!(
            "theta = {theta} outside the domain of {}",
            family.name()
        )));
    }
    let info = family.fisher_information(theta);
    if !(info.is_finite() && info > 0.0) {
        return Err(Error::SingularInformation { theta });
    }
    let dh = family.efficacy_deriv(theta);
    Ok(EfficacyVariance {
        sigma2: dh * dh / info,
    })
}

/// Maximum-likelihood estimate of one group's parameter.
///
/// Returns [`Error::DegenerateData`] when the maximizer lies on the domain
/// boundary (all-zero or all-one binary outcomes, zero Poisson totals, ...);
/// the caller decides the policy, e.g. via [`ClipPolicy`].
pub fn group_mle(family: &dyn Family, group: Group, stat: &SufficientStat) -> Result<f64> {
    family.validate_stat(stat)?;
    let theta = family.mle(stat);
    if !family.contains(theta) {
        return Err(Error::DegenerateData {
            group,
            value: theta,
        });
    }
    Ok(theta)
}

/// Kullback-Leibler divergence with domain checks.
pub fn kl_divergence(family: &dyn Family, theta0: f64, theta: f64) -> Result<f64> {
    for t in [theta0, theta] {
        if !family.contains(t) {
            return Err(Error::Domain(format!(
                "theta = {t} outside the domain of {}",
                family.name()
            )));
        }
    }
    Ok(family.kl(theta0, theta))
}

/// Policy for mapping boundary MLEs into the domain interior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClipPolicy {
    /// Distance from the boundary to clip to, on the parameter scale.
    pub epsilon: f64,
}

impl Default for ClipPolicy {
    fn default() -> Self {
        ClipPolicy { epsilon: 1e-9 }
    }
}

impl ClipPolicy {
    /// Clip `theta` into the open domain of `family`.
    pub fn clip(&self, family: &dyn Family, theta: f64) -> f64 {
        let (lo, hi) = family.domain();
        let lo_c = if lo.is_finite() {
            lo + self.epsilon
        } else {
            lo
        };
        let hi_c = if hi.is_finite() {
            hi - self.epsilon
        } else {
            // Unbounded above: only guard the lower edge.
            f64::INFINITY
        };
        theta.clamp(lo_c, hi_c)
    }

    /// `group_mle` that clips boundary estimates instead of erroring.
    pub fn mle(&self, family: &dyn Family, stat: &SufficientStat) -> Result<f64> {
        family.validate_stat(stat)?;
        Ok(self.clip(family, family.mle(stat)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::SufficientStat;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn builtin_families() -> Vec<Arc<dyn Family>> {
        vec![
            Arc::new(BinaryFamily::identity()),
            Arc::new(BinaryFamily::logit()),
            Arc::new(PoissonFamily),
            Arc::new(NormalFamily::with_variance(2.25)),
            Arc::new(ExponentialFamily),
        ]
    }

    fn random_interior(family: &dyn Family, rng: &mut StdRng) -> f64 {
        let (lo, hi) = family.domain();
        let lo = if lo.is_finite() { lo } else { -20.0 };
        let hi = if hi.is_finite() { hi } else { 20.0 };
        let span = hi - lo;
        lo + span * rng.random_range(0.02..0.98)
    }

    #[test]
    fn group_mle_worked_examples() {
        // Depression test group: 43 of 86 remissions.
        let b = BinaryFamily::identity();
        let s = SufficientStat::from_count(86, 43).unwrap();
        assert_eq!(group_mle(&b, Group::Test, &s).unwrap(), 0.5);

        // Epilepsy placebo group: 338 seizures over 18 patients.
        let p = PoissonFamily;
        let s = SufficientStat::from_count(18, 338).unwrap();
        let lam = group_mle(&p, Group::Placebo, &s).unwrap();
        assert!((lam - 338.0 / 18.0).abs() < 1e-12);
        assert!((lam - 18.78).abs() < 0.005);
    }

    #[test]
    fn group_mle_boundary_reports_degenerate_data() {
        let b = BinaryFamily::identity();
        let zeros = SufficientStat::from_count(10, 0).unwrap();
        match group_mle(&b, Group::Placebo, &zeros) {
            Err(Error::DegenerateData { group, value }) => {
                assert_eq!(group, Group::Placebo);
                assert_eq!(value, 0.0);
            }
            other => panic!("expected DegenerateData, got {other:?}"),
        }
        let ones = SufficientStat::from_count(10, 10).unwrap();
        assert!(matches!(
            group_mle(&b, Group::Test, &ones),
            Err(Error::DegenerateData { .. })
        ));
        // Clip policy maps the boundary estimate inside.
        let clipped = ClipPolicy::default().mle(&b, &zeros).unwrap();
        assert_eq!(clipped, 1e-9);
    }

    #[test]
    fn efficacy_variance_examples() {
        let b = BinaryFamily::identity();
        assert!((efficacy_variance(&b, 0.5).unwrap().sigma2 - 0.25).abs() < 1e-15);

        let p = PoissonFamily;
        assert!((efficacy_variance(&p, 16.0).unwrap().sigma2 - 16.0).abs() < 1e-12);

        let l = BinaryFamily::logit();
        assert!((efficacy_variance(&l, 0.5).unwrap().sigma2 - 4.0).abs() < 1e-12);

        let e = ExponentialFamily;
        assert!((efficacy_variance(&e, 3.7).unwrap().sigma2 - 1.0).abs() < 1e-12);

        let nrm = NormalFamily::with_variance(2.25);
        assert!((efficacy_variance(&nrm, 0.3).unwrap().sigma2 - 2.25).abs() < 1e-12);
    }

    #[test]
    fn kl_divergence_examples() {
        let p = PoissonFamily;
        assert_eq!(kl_divergence(&p, 3.2, 3.2).unwrap(), 0.0);
        // Direct evaluation of the Poisson divergence at (2, 1).
        let expect = 1.0 - 2.0 + 2.0 * (2.0f64.ln() - 1.0f64.ln());
        assert!((kl_divergence(&p, 2.0, 1.0).unwrap() - expect).abs() < 1e-12);
        assert!((expect - 0.386294).abs() < 1e-6);
        assert!(
            (kl_divergence(&p, 2.0, 1.0).unwrap() - (1.0 + 2.0 * 2.0f64.ln() - 2.0)).abs() < 1e-12
        );

        let b = BinaryFamily::identity();
        // Direct evaluation of the binary divergence at (0.5, 0.25).
        let expect = 0.5 * (0.5f64 / 0.25).ln() + 0.5 * (0.5f64 / 0.75).ln();
        assert!((kl_divergence(&b, 0.5, 0.25).unwrap() - expect).abs() < 1e-15);
        assert!((expect - 0.143841).abs() < 1e-6);

        assert!(matches!(kl_divergence(&b, 0.5, 1.5), Err(Error::Domain(_))));
    }

    #[test]
    fn kl_is_nonnegative_and_zero_at_identity() {
        let mut rng = StdRng::seed_from_u64(11);
        for family in builtin_families() {
            for _ in 0..200 {
                let a = random_interior(family.as_ref(), &mut rng);
                let b = random_interior(family.as_ref(), &mut rng);
                let kl = family.kl(a, b);
                assert!(kl >= -1e-12, "{}: kl({a},{b}) = {kl}", family.name());
                assert!(family.kl(a, a).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn kl_is_convex_in_second_argument() {
        // Random midpoint checks of convexity for the families with a
        // nonnegative expected Hessian everywhere (binary, Poisson, normal).
        // The exponential mean parameterization turns concave for lambda >
        // 2*lambda0, so it is only checked locally.
        let mut rng = StdRng::seed_from_u64(12);
        let convex: Vec<Arc<dyn Family>> = vec![
            Arc::new(BinaryFamily::identity()),
            Arc::new(BinaryFamily::logit()),
            Arc::new(PoissonFamily),
            Arc::new(NormalFamily::with_variance(2.25)),
        ];
        for family in convex {
            for _ in 0..200 {
                let t0 = random_interior(family.as_ref(), &mut rng);
                let a = random_interior(family.as_ref(), &mut rng);
                let b = random_interior(family.as_ref(), &mut rng);
                let mid = 0.5 * (a + b);
                let lhs = family.kl(t0, mid);
                let rhs = 0.5 * family.kl(t0, a) + 0.5 * family.kl(t0, b);
                assert!(
                    lhs <= rhs + 1e-10,
                    "{}: kl not midpoint-convex at t0={t0}, a={a}, b={b}",
                    family.name()
                );
                assert!(family.kl_hess(t0, a) >= -1e-12);
            }
        }
        let exp = ExponentialFamily;
        for _ in 0..100 {
            let t0: f64 = rng.random_range(0.1..10.0);
            assert!(exp.kl_hess(t0, t0) > 0.0);
            assert!(exp.kl_hess(t0, 2.5 * t0) < 0.0);
        }
    }

    #[test]
    fn efficacy_roundtrip_and_monotonicity() {
        let mut rng = StdRng::seed_from_u64(13);
        for family in builtin_families() {
            let mut prev: Option<(f64, f64)> = None;
            for _ in 0..100 {
                let t = random_interior(family.as_ref(), &mut rng);
                let h = family.efficacy(t);
                let back = family.efficacy_inv(h).unwrap();
                assert!(
                    (back - t).abs() <= 1e-12 * t.abs().max(1.0),
                    "{}: h^-1(h({t})) = {back}",
                    family.name()
                );
                if let Some((tp, hp)) = prev {
                    if t != tp {
                        let along = (h - hp) / (t - tp) * family.efficacy_deriv(t).signum();
                        assert!(
                            along > 0.0,
                            "{}: efficacy not strictly monotone",
                            family.name()
                        );
                    }
                }
                prev = Some((t, h));
            }
        }
    }

    #[test]
    fn efficacy_variance_matches_finite_difference_sandwich() {
        // sigma^2 = (dh/dtheta)^2 / I(theta) with dh by central differences.
        let mut rng = StdRng::seed_from_u64(14);
        for family in builtin_families() {
            for _ in 0..100 {
                let t = random_interior(family.as_ref(), &mut rng);
                let h = 1e-6 * t.abs().max(1.0);
                let dh_fd = (family.efficacy(t + h) - family.efficacy(t - h)) / (2.0 * h);
                let fd = dh_fd * dh_fd / family.fisher_information(t);
                let got = efficacy_variance(family.as_ref(), t).unwrap().sigma2;
                assert!(
                    (got - fd).abs() <= 1e-6 * fd.abs().max(1e-12),
                    "{}: sigma2({t}) = {got}, finite difference {fd}",
                    family.name()
                );
            }
        }
    }

    #[test]
    fn kl_matches_summation_oracle() {
        // E_theta0[log f(theta0,X) - log f(theta,X)] by direct summation over
        // the support, for the two counting families.
        let mut rng = StdRng::seed_from_u64(15);
        let b = BinaryFamily::identity();
        for _ in 0..50 {
            let p0: f64 = rng.random_range(0.05..0.95);
            let p1: f64 = rng.random_range(0.05..0.95);
            let oracle = p0 * (b.log_density(p0, 1.0) - b.log_density(p1, 1.0))
                + (1.0 - p0) * (b.log_density(p0, 0.0) - b.log_density(p1, 0.0));
            assert!((b.kl(p0, p1) - oracle).abs() < 1e-8);
        }
        let p = PoissonFamily;
        for _ in 0..50 {
            let l0: f64 = rng.random_range(0.2..20.0);
            let l1: f64 = rng.random_range(0.2..20.0);
            let mut oracle = 0.0;
            let mut pmf = (-l0).exp(); // P(X = 0) under l0
            let upper = (l0 + 15.0 * l0.sqrt() + 30.0) as u64;
            for x in 0..=upper {
                oracle += pmf * (p.log_density(l0, x as f64) - p.log_density(l1, x as f64));
                pmf *= l0 / (x + 1) as f64;
            }
            assert!(
                (p.kl(l0, l1) - oracle).abs() < 1e-8,
                "poisson kl({l0},{l1}) = {} vs oracle {oracle}",
                p.kl(l0, l1)
            );
        }
    }

    #[test]
    fn score_and_observed_information_match_loglik_derivatives() {
        let mut rng = StdRng::seed_from_u64(16);
        for family in builtin_families() {
            for _ in 0..50 {
                let t = random_interior(family.as_ref(), &mut rng);
                let stat = family.sample_stat(t, 40, &mut rng);
                if family.validate_stat(&stat).is_err() {
                    continue;
                }
                let x = random_interior(family.as_ref(), &mut rng);
                let h = 1e-5 * x.abs().max(1.0);
                let ll = |v: f64| family.log_likelihood(v, &stat);
                let score_fd = (ll(x + h) - ll(x - h)) / (2.0 * h);
                let info_fd = -(ll(x + h) - 2.0 * ll(x) + ll(x - h)) / (h * h);
                let score = family.score(x, &stat);
                let info = family.observed_information(x, &stat);
                assert!(
                    (score - score_fd).abs() <= 1e-3 * score.abs().max(1.0),
                    "{}: score mismatch at {x}: {score} vs {score_fd}",
                    family.name()
                );
                assert!(
                    (info - info_fd).abs() <= 1e-2 * info.abs().max(1.0),
                    "{}: information mismatch at {x}: {info} vs {info_fd}",
                    family.name()
                );
            }
        }
    }
}
