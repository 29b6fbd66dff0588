//! The generalized retention-of-effect hypothesis and its contrast.
//!
//! The null states that the test treatment keeps less than a fraction `delta`
//! of the reference effect over placebo, on the efficacy scale h:
//!
//! H0: eta := h(theta_T) - delta * h(theta_R) + (delta - 1) * h(theta_P) <= 0,
//!
//! rejected for large values of the Wald statistic.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::families::Family;

/// Retention-of-effect hypothesis for a family and margin `delta`.
///
/// `delta` may be any nonnegative value (`delta = 1` is superiority to
/// reference, `delta = 0` superiority to placebo). Planning operations that
/// assume interior allocation weights additionally require 0 < delta < 1 and
/// reject other margins themselves.
#[derive(Clone)]
pub struct RetentionHypothesis {
    family: Arc<dyn Family>,
    delta: f64,
}

/// Value of the contrast eta; the null holds iff `eta <= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contrast {
    pub eta: f64,
}

impl Contrast {
    pub fn in_alternative(&self) -> bool {
        self.eta > 0.0
    }
}

impl RetentionHypothesis {
    pub fn new(family: Arc<dyn Family>, delta: f64) -> Result<Self> {
        if !(delta.is_finite() && delta >= 0.0) {
            return Err(Error::Invalid(format!(
                "retention margin delta = {delta} must be a nonnegative real"
            )));
        }
        Ok(RetentionHypothesis { family, delta })
    }

    pub fn family(&self) -> &Arc<dyn Family> {
        &self.family
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Same hypothesis over a different family instance (e.g. after resolving
    /// a pooled variance).
    pub fn with_family(&self, family: Arc<dyn Family>) -> Self {
        RetentionHypothesis {
            family,
            delta: self.delta,
        }
    }

    /// eta = h(theta_T) - delta h(theta_R) + (delta - 1) h(theta_P).
    pub fn contrast(&self, theta_t: f64, theta_r: f64, theta_p: f64) -> Result<Contrast> {
        for t in [theta_t, theta_r, theta_p] {
            if !self.family.contains(t) {
                return Err(Error::Domain(format!(
                    "parameter {t} outside the domain of {}",
                    self.family.name()
                )));
            }
        }
        Ok(Contrast {
            eta: self.eta_unchecked(theta_t, theta_r, theta_p),
        })
    }

    /// Contrast without domain checks, for hot paths that guarantee validity.
    pub fn eta_unchecked(&self, theta_t: f64, theta_r: f64, theta_p: f64) -> f64 {
        let f = &self.family;
        f.efficacy(theta_t) - self.delta * f.efficacy(theta_r)
            + (self.delta - 1.0) * f.efficacy(theta_p)
    }

    /// The test-group parameter that puts the triple exactly on the null
    /// boundary: theta_T = h^{-1}(delta h(theta_R) + (1 - delta) h(theta_P)).
    ///
    /// Errors with [`Error::Range`] when the combination leaves the range of
    /// h, which can happen for delta > 1.
    pub fn boundary_substitute(&self, theta_r: f64, theta_p: f64) -> Result<f64> {
        let f = &self.family;
        let y = self.delta * f.efficacy(theta_r) + (1.0 - self.delta) * f.efficacy(theta_p);
        f.efficacy_inv(y)
    }

    /// True when the boundary substitution map is affine in (theta_R,
    /// theta_P), checked by midpoint tests along both axes and the diagonal.
    pub fn boundary_is_affine(&self) -> bool {
        let (lo, hi) = self.family.domain();
        let lo = if lo.is_finite() { lo } else { -8.0 };
        let hi = if hi.is_finite() { hi } else { 8.0 };
        let q = |u: f64| lo + (hi - lo) * u;
        let g = |r: f64, p: f64| self.boundary_substitute(r, p);
        let pts = [
            ((q(0.2), q(0.3)), (q(0.8), q(0.3))),
            ((q(0.4), q(0.2)), (q(0.4), q(0.9))),
            ((q(0.25), q(0.7)), (q(0.75), q(0.2))),
        ];
        for ((r1, p1), (r2, p2)) in pts {
            let (a, b, m) = match (g(r1, p1), g(r2, p2), g(0.5 * (r1 + r2), 0.5 * (p1 + p2))) {
                (Ok(a), Ok(b), Ok(m)) => (a, b, m),
                _ => return false,
            };
            if (m - 0.5 * (a + b)).abs() > 1e-9 * (1.0 + a.abs() + b.abs()) {
                return false;
            }
        }
        true
    }
}
