//! Trial planning: optimal allocation, sample-size formulas, the allocation
//! rule of thumb, and the stepwise planning pipeline.
//!
//! Under an alternative with contrast eta0 > 0 the required total sample size
//! at level alpha and power 1-beta is
//!
//! n ~ ((z_{1-alpha} sigma_RML + z_{1-beta} sigma_0) / eta0)^2
//!
//! for restricted variance estimation, with sigma_RML evaluated at the
//! weighted-KL projection of the alternative onto the null; replacing
//! sigma_RML by sigma_0 gives the unrestricted formula. The allocation
//! minimizing sigma_0^2 is 1 : delta sigma_R/sigma_T : |1-delta| sigma_P/sigma_T.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::efficacy_variance;
use crate::hypothesis::RetentionHypothesis;
use crate::kl_projection::{contrast_variance, project_to_null, Weights};
use crate::ret_test::{normal_quantile, normal_sf, VarianceMode};

/// Planning alternative: a parameter triple strictly inside the alternative
/// region (eta0 > 0), rejected at construction otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Alternative {
    theta: [f64; 3],
    eta0: f64,
}

impl Alternative {
    pub fn new(
        hyp: &RetentionHypothesis,
        theta_t: f64,
        theta_r: f64,
        theta_p: f64,
    ) -> Result<Self> {
        let c = hyp.contrast(theta_t, theta_r, theta_p)?;
        if !c.in_alternative() {
            return Err(Error::Invalid(format!(
                "alternative must satisfy eta > 0, got eta = {}",
                c.eta
            )));
        }
        Ok(Alternative {
            theta: [theta_t, theta_r, theta_p],
            eta0: c.eta,
        })
    }

    pub fn theta(&self) -> [f64; 3] {
        self.theta
    }

    pub fn eta0(&self) -> f64 {
        self.eta0
    }

    /// Per-group variances (sigma_{0,T}^2, sigma_{0,R}^2, sigma_{0,P}^2).
    pub fn group_variances(&self, hyp: &RetentionHypothesis) -> Result<[f64; 3]> {
        let fam = hyp.family().as_ref();
        Ok([
            efficacy_variance(fam, self.theta[0])?.sigma2,
            efficacy_variance(fam, self.theta[1])?.sigma2,
            efficacy_variance(fam, self.theta[2])?.sigma2,
        ])
    }
}

/// Full output of a sample-size computation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanReport {
    pub eta0: f64,
    /// sigma_0 (not squared) under the chosen allocation.
    pub sigma0: f64,
    /// sigma_RML (equals sigma_0 in unrestricted mode).
    pub sigma_rml: f64,
    /// Projection of the alternative onto the null (restricted mode).
    pub theta_h0: Option<[f64; 3]>,
    pub weights: Weights,
    pub alpha: f64,
    pub power_target: f64,
    pub variance_mode: VarianceMode,
    /// Unrounded real-valued sample size from the formula.
    pub n_real: f64,
    /// Minimal integer total: ceil(n_real).
    pub n_required: u64,
    /// Per-group sizes floor(w_k * n_required), each at least 1.
    pub n_per_group: [u64; 3],
    /// Sum of the rounded-down group sizes.
    pub n_total: u64,
}

/// Allocation minimizing sigma_0^2: weights proportional to
/// (sigma_T, delta sigma_R, |1-delta| sigma_P).
///
/// Degenerate at delta = 0 and delta = 1, where a group would receive weight
/// zero; the error carries the limiting two-arm suggestion.
pub fn optimal_allocation(hyp: &RetentionHypothesis, alt: &Alternative) -> Result<Weights> {
    let delta = hyp.delta();
    if delta == 0.0 || delta == 1.0 {
        let suggestion = if delta == 0.0 {
            "the margin collapses the reference arm; a two-arm test-vs-placebo \
             superiority design applies"
        } else {
            "the margin collapses the placebo arm; a two-arm test-vs-reference \
             superiority design applies"
        };
        return Err(Error::DegenerateAllocation {
            delta,
            suggestion: suggestion.into(),
        });
    }
    let v = alt.group_variances(hyp)?;
    Weights::from_ratio(
        v[0].sqrt(),
        delta * v[1].sqrt(),
        (1.0 - delta).abs() * v[2].sqrt(),
    )
}

/// sigma_0^2 under allocation `w` at the alternative.
pub fn sigma0_squared(hyp: &RetentionHypothesis, alt: &Alternative, w: &Weights) -> Result<f64> {
    contrast_variance(hyp, alt.theta, w)
}

/// Variance ratio thresholds of the allocation rule of thumb.
pub const RULE_OF_THUMB_VS_221: f64 = 2.118033988749895; // 1 + sqrt(5)/2
pub const RULE_OF_THUMB_VS_BALANCED: f64 = 2.732050807568877; // 1 + sqrt(3)

/// Outcome of the rule-of-thumb comparison for the allocation 1:delta:(1-delta).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RuleOfThumbReport {
    /// r = sigma_{0,P}^2 / sigma_{0,T}^2.
    pub ratio: f64,
    /// r below 1 + sqrt(5)/2: the rule of thumb beats 2:2:1 for every delta in 0..=1.
    pub beats_221: bool,
    /// r below 1 + sqrt(3): the rule of thumb beats 1:1:1 for every delta in 0..=1.
    pub beats_balanced: bool,
    /// (sigma^2_{2:2:1} - sigma^2_{1:delta:1-delta}) / sigma_{0,T}^2 at this delta.
    pub g_221: f64,
    /// (sigma^2_{1:1:1} - sigma^2_{1:delta:1-delta}) / sigma_{0,T}^2 at this delta.
    pub g_balanced: f64,
}

/// Normalized variance surplus of 2:2:1 over 1:delta:(1-delta), as a
/// quadratic in delta: (2.5 + 5r) d^2 + (-2 - 8r) d + (0.5 + 3r).
pub fn g_vs_221(delta: f64, r: f64) -> f64 {
    (2.5 + 5.0 * r) * delta * delta + (-2.0 - 8.0 * r) * delta + (0.5 + 3.0 * r)
}

/// Normalized variance surplus of 1:1:1 over 1:delta:(1-delta):
/// (3 + 3r) d^2 + (-2 - 4r) d + (1 + r).
pub fn g_vs_balanced(delta: f64, r: f64) -> f64 {
    (3.0 + 3.0 * r) * delta * delta + (-2.0 - 4.0 * r) * delta + (1.0 + r)
}

/// Check whether the rule-of-thumb allocation 1:delta:(1-delta) dominates the
/// 2:2:1 and balanced allocations at this alternative.
///
/// Requires the common-alternative hypothesis theta_R = theta_T and a margin
/// delta between 0 and 1; other inputs are a [`Error::HypothesisMismatch`].
pub fn rule_of_thumb_check(
    hyp: &RetentionHypothesis,
    alt: &Alternative,
) -> Result<RuleOfThumbReport> {
    let t = alt.theta();
    if (t[0] - t[1]).abs() > 1e-12 * t[0].abs().max(t[1].abs()).max(1.0) {
        return Err(Error::HypothesisMismatch(format!(
            "rule of thumb assumes theta_R = theta_T, got {} and {}",
            t[1], t[0]
        )));
    }
    let delta = hyp.delta();
    if delta > 1.0 {
        return Err(Error::HypothesisMismatch(format!(
            "rule of thumb covers margins in [0,1], got delta = {delta}"
        )));
    }
    let v = alt.group_variances(hyp)?;
    let r = v[2] / v[0];
    Ok(RuleOfThumbReport {
        ratio: r,
        beats_221: r < RULE_OF_THUMB_VS_221,
        beats_balanced: r < RULE_OF_THUMB_VS_BALANCED,
        g_221: g_vs_221(delta, r),
        g_balanced: g_vs_balanced(delta, r),
    })
}

/// Required total sample size at level `alpha` and target power, under
/// allocation `w` and the chosen variance-estimation mode. Delegates to the
/// stepwise pipeline; see [`gssp`].
pub fn sample_size(
    hyp: &RetentionHypothesis,
    alt: &Alternative,
    w: &Weights,
    alpha: f64,
    power: f64,
    mode: VarianceMode,
) -> Result<PlanReport> {
    gssp(hyp, alt, w, alpha, power, mode)
}

/// The stepwise sample-size pipeline:
///
/// 1. contrast eta0;
/// 2. sigma_0^2 under the allocation;
/// 3. weighted KL divergence for the endpoint family and
/// 4. its minimizer over the null (restricted mode only; both steps are
///    skipped entirely for unrestricted estimation);
/// 5. sigma_RML^2 at the projection;
/// 6. n = ((z_{1-alpha} sigma_RML + z_{1-beta} sigma_0) / eta0)^2, rounded up,
///    with per-group sizes rounded down from w_k * n.
pub fn gssp(
    hyp: &RetentionHypothesis,
    alt: &Alternative,
    w: &Weights,
    alpha: f64,
    power: f64,
    mode: VarianceMode,
) -> Result<PlanReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Invalid(format!("alpha = {alpha} outside (0,1)")));
    }
    if !(power > 0.0 && power < 1.0) {
        return Err(Error::Invalid(format!(
            "target power = {power} outside (0,1)"
        )));
    }
    // Step 1: the contrast is validated positive at construction.
    let eta0 = alt.eta0();
    // Step 2: variance under the alternative.
    let sigma0_2 = sigma0_squared(hyp, alt, w)
        .map_err(|e| Error::OptimizationFailure(format!("step 2 (sigma_0): {e}")))?;
    // Steps 3-5: restricted-MLE limit and its variance.
    let (sigma_rml_2, theta_h0) = match mode {
        VarianceMode::Unrestricted => (sigma0_2, None),
        VarianceMode::Restricted => {
            let proj = project_to_null(hyp, alt.theta(), w)
                .map_err(|e| Error::OptimizationFailure(format!("step 4 (KL minimizer): {e}")))?;
            (proj.sigma_rml2, Some(proj.theta_h0))
        }
    };
    // Step 6: the sample-size formula.
    let za = normal_quantile(1.0 - alpha);
    let zb = normal_quantile(power);
    let sigma0 = sigma0_2.sqrt();
    let sigma_rml = sigma_rml_2.sqrt();
    let n_real = ((za * sigma_rml + zb * sigma0) / eta0).powi(2);
    let n_required = (n_real - 1e-9).ceil().max(1.0) as u64;
    let wa = w.as_array();
    let mut n_per_group = [0u64; 3];
    for k in 0..3 {
        // Guard against representation error in w_k * n (e.g. 312/3).
        n_per_group[k] = ((wa[k] * n_required as f64 + 1e-9).floor() as u64).max(1);
    }
    Ok(PlanReport {
        eta0,
        sigma0,
        sigma_rml,
        theta_h0,
        weights: *w,
        alpha,
        power_target: power,
        variance_mode: mode,
        n_real,
        n_required,
        n_per_group,
        n_total: n_per_group.iter().sum(),
    })
}

/// Asymptotic power of the RET with total sample size `n` under allocation `w`:
/// 1 - Phi(z_{1-alpha} sigma_RML/sigma_0 - sqrt(n) eta0/sigma_0), with
/// sigma_RML replaced by sigma_0 in unrestricted mode.
pub fn power_approx(
    hyp: &RetentionHypothesis,
    alt: &Alternative,
    w: &Weights,
    n: f64,
    alpha: f64,
    mode: VarianceMode,
) -> Result<f64> {
    if !n.is_finite() || n < 3.0 {
        return Err(Error::Invalid(format!("total sample size {n} below 3")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Invalid(format!("alpha = {alpha} outside (0,1)")));
    }
    let sigma0 = sigma0_squared(hyp, alt, w)?.sqrt();
    let sigma_rml = match mode {
        VarianceMode::Unrestricted => sigma0,
        VarianceMode::Restricted => project_to_null(hyp, alt.theta(), w)?.sigma_rml2.sqrt(),
    };
    let za = normal_quantile(1.0 - alpha);
    Ok(normal_sf(
        za * sigma_rml / sigma0 - n.sqrt() * alt.eta0() / sigma0,
    ))
}
