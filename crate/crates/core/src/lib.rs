//! Analysis and planning of three-armed non-inferiority trials under
//! retention-of-effect hypotheses.
//!
//! The gold standard non-inferiority design compares a test treatment, an
//! active reference, and placebo. The retention-of-effect hypothesis asks the
//! test treatment to keep at least a fraction `delta` of the reference effect
//! over placebo, measured on a strictly monotone efficacy scale `h`:
//!
//! H0: h(theta_T) - delta h(theta_R) + (delta - 1) h(theta_P) <= 0.
//!
//! This crate provides, for any sufficiently regular parametric endpoint
//! family:
//!
//! - the Wald-type test of that hypothesis with unrestricted or
//!   null-restricted variance estimation ([`ret_test`]);
//! - the exact limit of the restricted variance estimator via weighted
//!   Kullback-Leibler projection, with a closed form for Poisson endpoints
//!   ([`kl_projection`]);
//! - optimal sample allocation, the 1:delta:(1-delta) rule of thumb, power
//!   approximations, and sample-size formulas ([`planning`]);
//! - exact-enumeration and Monte-Carlo power, validating the asymptotic
//!   approximations ([`power_engine`]).
//!
//! Binary (identity and logit efficacy), Poisson (negated mean), normal
//! (homogeneous variance) and exponential (log mean) endpoints are built in;
//! further families plug in through [`families::Registry`].

pub mod data;
pub mod error;
pub mod families;
pub mod hypothesis;
pub mod kl_projection;
pub mod planning;
pub mod power_engine;
pub mod reference;
mod solver;

pub use data::{Group, GroupData, SufficientStat};
pub use error::{Error, Result};
pub use families::{
    efficacy_variance, group_mle, kl_divergence, BinaryEfficacy, BinaryFamily, ClipPolicy,
    EfficacyVariance, ExponentialFamily, Family, NormalFamily, PoissonFamily, Registry,
};
pub use hypothesis::{Contrast, RetentionHypothesis};
pub use kl_projection::{
    contrast_variance, convexity_certificate, poisson_projection_closed_form, project_to_null,
    weighted_kl, CertificateFailure, ConvexityCertificate, KlProjection, Weights,
};
pub use planning::{
    gssp, optimal_allocation, power_approx, rule_of_thumb_check, sample_size, sigma0_squared,
    Alternative, PlanReport, RuleOfThumbReport,
};
pub use power_engine::{
    exact_power_binary, exact_power_poisson, mc_power, power, PowerEstimate, PowerMethod,
    PowerQuery,
};
pub use ret_test::{restricted_mle, run_test, run_test_clipped, TestReport, VarianceMode};
