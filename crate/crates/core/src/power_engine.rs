//! Exact and Monte-Carlo power of the RET.
//!
//! The exact method enumerates all outcome triples, runs the test decision on
//! each, and sums the probability mass of the rejection region; it reproduces
//! published exact-power values for binary endpoints and extends to Poisson
//! endpoints with a truncated support. The Monte-Carlo method works for every
//! family and uses a counter-based generator (ChaCha streams indexed by
//! replication block) so results are reproducible for a fixed seed regardless
//! of the worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::data::{GroupData, SufficientStat};
use crate::error::{Error, Result};
use crate::families::ClipPolicy;
use crate::hypothesis::RetentionHypothesis;
use crate::ret_test::{normal_quantile, run_test_clipped, VarianceMode};

/// How to evaluate the power.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PowerMethod {
    ExactEnumeration,
    MonteCarlo { reps: u64, seed: u64 },
}

/// A power evaluation request.
#[derive(Clone)]
pub struct PowerQuery {
    pub hyp: RetentionHypothesis,
    /// Data-generating parameter triple (theta_T, theta_R, theta_P).
    pub zeta_gen: [f64; 3],
    /// Group sizes (n_T, n_R, n_P).
    pub n: [u64; 3],
    pub alpha: f64,
    pub mode: VarianceMode,
    pub method: PowerMethod,
    /// Evaluation budget for exact enumeration (outcome triples).
    pub budget: u64,
    /// Clip policy applied to boundary MLEs, mirroring the test's policy.
    pub clip: ClipPolicy,
}

pub const DEFAULT_BUDGET: u64 = 500_000_000;

impl PowerQuery {
    pub fn new(
        hyp: RetentionHypothesis,
        zeta_gen: [f64; 3],
        n: [u64; 3],
        alpha: f64,
        mode: VarianceMode,
        method: PowerMethod,
    ) -> Result<Self> {
        for t in zeta_gen {
            if !hyp.family().contains(t) {
                return Err(Error::Domain(format!(
                    "generating parameter {t} outside the domain of {}",
                    hyp.family().name()
                )));
            }
        }
        if n.contains(&0) {
            return Err(Error::Invalid("group sizes must be at least 1".into()));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Invalid(format!("alpha = {alpha} outside (0,1)")));
        }
        if let PowerMethod::MonteCarlo { reps, .. } = method {
            if reps < 10_000 {
                return Err(Error::Invalid(format!(
                    "Monte Carlo needs at least 10^4 replications, got {reps}"
                )));
            }
        }
        Ok(PowerQuery {
            hyp,
            zeta_gen,
            n,
            alpha,
            mode,
            method,
            budget: DEFAULT_BUDGET,
            clip: ClipPolicy::default(),
        })
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }
}

/// Power estimate with its error accounting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerEstimate {
    pub power: f64,
    /// Binomial standard error (zero for exact enumeration).
    pub standard_error: f64,
    /// Rejection count (Monte Carlo) or rejected probability mass (exact).
    pub rejections: f64,
    /// Replication count (Monte Carlo) or enumerated probability mass (exact).
    pub total: f64,
    /// Probability mass of outcomes with at least one clipped group MLE.
    pub degenerate_mass: f64,
    /// Upper bound on the probability mass outside the enumerated support
    /// (zero for binary; Poisson tails are cut at the 1 - 1e-12 quantile).
    pub truncated_mass: f64,
}

// ---------------------------------------------------------------------------
// Exact enumeration: binary endpoints
// ---------------------------------------------------------------------------

/// Exact power for binary endpoints by full enumeration of success counts.
///
/// Sums prod_k Binom(x_k; n_k, pi_k) over all triples where the test rejects;
/// degenerate outcomes are clipped exactly as in the test itself.
pub fn exact_power_binary(query: &PowerQuery) -> Result<PowerEstimate> {
    let fam_name = query.hyp.family().name();
    if fam_name != "binary" && fam_name != "binary-logit" {
        return Err(Error::Invalid(format!(
            "exact binary enumeration needs a binary family, got {fam_name}"
        )));
    }
    let [nt, nr, np] = query.n;
    let required = (nt + 1)
        .checked_mul(nr + 1)
        .and_then(|v| v.checked_mul(np + 1))
        .ok_or(Error::BudgetExceeded {
            required: u64::MAX,
            budget: query.budget,
        })?;
    if required > query.budget {
        return Err(Error::BudgetExceeded {
            required,
            budget: query.budget,
        });
    }

    let log_pmf_t = binomial_log_pmf(nt, query.zeta_gen[0]);
    let log_pmf_r = binomial_log_pmf(nr, query.zeta_gen[1]);
    let log_pmf_p = binomial_log_pmf(np, query.zeta_gen[2]);
    let z = normal_quantile(1.0 - query.alpha);

    let identity = fam_name == "binary";
    let delta = query.hyp.delta();
    let eps = query.clip.epsilon;

    // Per-x_T partial sums, reduced in index order for determinism.
    let partials: Vec<[f64; 3]> = (0..=nt)
        .into_par_iter()
        .map(|xt| {
            let mut rejected = 0.0;
            let mut degenerate = 0.0;
            let mut total = 0.0;
            let pt_raw = xt as f64 / nt as f64;
            let pt = pt_raw.clamp(eps, 1.0 - eps);
            let lt = log_pmf_t[xt as usize];
            for xr in 0..=nr {
                let pr_raw = xr as f64 / nr as f64;
                let pr = pr_raw.clamp(eps, 1.0 - eps);
                let ltr = lt + log_pmf_r[xr as usize];
                let mut warm: Option<(f64, f64)> = None;
                for xp in 0..=np {
                    let pp_raw = xp as f64 / np as f64;
                    let pp = pp_raw.clamp(eps, 1.0 - eps);
                    let mass = (ltr + log_pmf_p[xp as usize]).exp();
                    total += mass;
                    let clipped = xt == 0 || xt == nt || xr == 0 || xr == nr || xp == 0 || xp == np;
                    if clipped {
                        degenerate += mass;
                    }
                    let rejects = if identity {
                        binary_identity_rejects(
                            delta,
                            (nt, xt, pt),
                            (nr, xr, pr),
                            (np, xp, pp),
                            z,
                            query.mode,
                            eps,
                            &mut warm,
                        )
                    } else {
                        generic_rejects(query, xt, xr, xp)
                    };
                    if rejects {
                        rejected += mass;
                    }
                }
            }
            [rejected, degenerate, total]
        })
        .collect();

    let mut rejected = 0.0;
    let mut degenerate = 0.0;
    let mut total = 0.0;
    for p in partials {
        rejected += p[0];
        degenerate += p[1];
        total += p[2];
    }
    Ok(PowerEstimate {
        power: rejected,
        standard_error: 0.0,
        rejections: rejected,
        total,
        degenerate_mass: degenerate,
        truncated_mass: 0.0,
    })
}

fn binomial_log_pmf(n: u64, p: f64) -> Vec<f64> {
    let ln_p = p.ln();
    let ln_q = (1.0 - p).ln();
    let ln_n_fact = ln_gamma(n as f64 + 1.0);
    (0..=n)
        .map(|x| {
            let xf = x as f64;
            ln_n_fact - ln_gamma(xf + 1.0) - ln_gamma((n - x) as f64 + 1.0)
                + xf * ln_p
                + (n - x) as f64 * ln_q
        })
        .collect()
}

/// Test decision for binary endpoints on the identity efficacy scale.
///
/// Specialized restricted-MLE Newton with warm starting; matched against
/// `run_test_clipped` in the unit tests.
#[allow(clippy::too_many_arguments)]
fn binary_identity_rejects(
    delta: f64,
    (nt, xt, pt): (u64, u64, f64),
    (nr, xr, pr): (u64, u64, f64),
    (np, xp, pp): (u64, u64, f64),
    z: f64,
    mode: VarianceMode,
    eps: f64,
    warm: &mut Option<(f64, f64)>,
) -> bool {
    let eta = pt - delta * pr - (1.0 - delta) * pp;
    let n = (nt + nr + np) as f64;
    let (qt, qr, qp) = match mode {
        VarianceMode::Unrestricted => (pt, pr, pp),
        VarianceMode::Restricted => {
            if eta <= 0.0 {
                (pt, pr, pp)
            } else {
                let start = warm.unwrap_or((pr, pp));
                let (qr, qp) = binary_boundary_mle(
                    delta,
                    (nt as f64, xt as f64),
                    (nr as f64, xr as f64),
                    (np as f64, xp as f64),
                    start,
                    eps,
                );
                *warm = Some((qr, qp));
                (delta * qr + (1.0 - delta) * qp, qr, qp)
            }
        }
    };
    let s2 = qt * (1.0 - qt) / nt as f64
        + delta * delta * qr * (1.0 - qr) / nr as f64
        + (1.0 - delta) * (1.0 - delta) * qp * (1.0 - qp) / np as f64;
    // T = sqrt(n) eta / sigma_hat with sigma_hat^2 = n * s2.
    let t = n.sqrt() * eta / (n * s2).sqrt();
    t > z
}

/// Maximize the binary log-likelihood along q_T = delta q_R + (1-delta) q_P
/// by projected damped Newton over the eps-clipped box, matching the
/// restricted region of `run_test_clipped`.
fn binary_boundary_mle(
    delta: f64,
    (nt, xt): (f64, f64),
    (nr, xr): (f64, f64),
    (np, xp): (f64, f64),
    start: (f64, f64),
    eps: f64,
) -> (f64, f64) {
    let lo = eps;
    let hi = 1.0 - eps;
    let nll = |r: f64, p: f64| {
        let t = delta * r + (1.0 - delta) * p;
        -(xt * t.ln()
            + (nt - xt) * (1.0 - t).ln()
            + xr * r.ln()
            + (nr - xr) * (1.0 - r).ln()
            + xp * p.ln()
            + (np - xp) * (1.0 - p).ln())
    };
    let mut r = start.0.clamp(lo, hi);
    let mut p = start.1.clamp(lo, hi);
    let mut f = nll(r, p);
    let scale = nt + nr + np;
    for _ in 0..100 {
        let t = delta * r + (1.0 - delta) * p;
        let gt = (nt * t - xt) / (t * (1.0 - t));
        let gr = delta * gt + (nr * r - xr) / (r * (1.0 - r));
        let gp = (1.0 - delta) * gt + (np * p - xp) / (p * (1.0 - p));
        if gr.abs().max(gp.abs()) < 1e-10 * (1.0 + scale) {
            break;
        }
        let htt = xt / (t * t) + (nt - xt) / ((1.0 - t) * (1.0 - t));
        let hrr = delta * delta * htt + xr / (r * r) + (nr - xr) / ((1.0 - r) * (1.0 - r));
        let hpp = (1.0 - delta) * (1.0 - delta) * htt
            + xp / (p * p)
            + (np - xp) / ((1.0 - p) * (1.0 - p));
        let hrp = delta * (1.0 - delta) * htt;
        // Freeze edge-pinned coordinates with outward gradients.
        let r_active = (r <= lo && gr > 0.0) || (r >= hi && gr < 0.0);
        let p_active = (p <= lo && gp > 0.0) || (p >= hi && gp < 0.0);
        let det = hrr * hpp - hrp * hrp;
        let (dr, dp) = match (r_active, p_active) {
            (true, true) => return (r, p),
            (true, false) => (0.0, gp / hpp),
            (false, true) => (gr / hrr, 0.0),
            (false, false) => {
                if det > 0.0 && hrr > 0.0 {
                    ((hpp * gr - hrp * gp) / det, (hrr * gp - hrp * gr) / det)
                } else {
                    (gr / scale, gp / scale)
                }
            }
        };
        let mut step = 1.0;
        let mut moved = false;
        while step >= 1e-12 {
            let rn = (r - step * dr).clamp(lo, hi);
            let pn = (p - step * dp).clamp(lo, hi);
            let fnew = nll(rn, pn);
            if fnew < f {
                let shift = (rn - r).abs().max((pn - p).abs());
                r = rn;
                p = pn;
                f = fnew;
                moved = true;
                if shift < 1e-14 {
                    return (r, p);
                }
                break;
            }
            step *= 0.5;
        }
        if !moved {
            break;
        }
    }
    (r, p)
}

/// Per-triple decision through the public test runner; used for the binary
/// efficacy scales without a specialized kernel.
fn generic_rejects(query: &PowerQuery, xt: u64, xr: u64, xp: u64) -> bool {
    let data = GroupData::new(
        SufficientStat {
            n: query.n[0],
            sum: xt as f64,
            sum_sq: xt as f64,
        },
        SufficientStat {
            n: query.n[1],
            sum: xr as f64,
            sum_sq: xr as f64,
        },
        SufficientStat {
            n: query.n[2],
            sum: xp as f64,
            sum_sq: xp as f64,
        },
    );
    run_test_clipped(&query.hyp, &data, query.alpha, query.mode, query.clip)
        .map(|rep| rep.reject)
        .expect("clipped test decision is total over the enumerated support")
}

// ---------------------------------------------------------------------------
// Exact enumeration: Poisson endpoints
// ---------------------------------------------------------------------------

/// Exact power for Poisson endpoints over the truncated support of each
/// group's event total (upper tail cut at the 1 - 1e-12 quantile; the cut
/// mass is reported in `truncated_mass`).
pub fn exact_power_poisson(query: &PowerQuery) -> Result<PowerEstimate> {
    if query.hyp.family().name() != "poisson" {
        return Err(Error::Invalid(format!(
            "exact Poisson enumeration needs the poisson family, got {}",
            query.hyp.family().name()
        )));
    }
    let supports: Vec<PoissonSupport> = (0..3)
        .map(|k| poisson_support(query.n[k] as f64 * query.zeta_gen[k]))
        .collect();
    let required: u64 = supports
        .iter()
        .map(|s| s.log_pmf.len() as u64)
        .try_fold(1u64, |acc, len| acc.checked_mul(len))
        .ok_or(Error::BudgetExceeded {
            required: u64::MAX,
            budget: query.budget,
        })?;
    if required > query.budget {
        return Err(Error::BudgetExceeded {
            required,
            budget: query.budget,
        });
    }
    let truncated: f64 = supports.iter().map(|s| s.cut_mass).sum();

    let [nt, nr, np] = [query.n[0] as f64, query.n[1] as f64, query.n[2] as f64];
    let n = nt + nr + np;
    let delta = query.hyp.delta();
    let z = normal_quantile(1.0 - query.alpha);
    let eps = query.clip.epsilon;
    let (st_sup, sr_sup, sp_sup) = (&supports[0], &supports[1], &supports[2]);

    let partials: Vec<[f64; 3]> = (0..st_sup.log_pmf.len())
        .into_par_iter()
        .map(|it| {
            let st = (st_sup.lo + it as u64) as f64;
            let lt_raw = st / nt;
            let lt = lt_raw.max(eps);
            let lpt = st_sup.log_pmf[it];
            let mut rejected = 0.0;
            let mut degenerate = 0.0;
            let mut total = 0.0;
            for (ir, lpr) in sr_sup.log_pmf.iter().enumerate() {
                let sr = (sr_sup.lo + ir as u64) as f64;
                let lr = (sr / nr).max(eps);
                let ltr = lpt + lpr;
                let mut warm: Option<(f64, f64)> = None;
                for (ip, lpp) in sp_sup.log_pmf.iter().enumerate() {
                    let sp = (sp_sup.lo + ip as u64) as f64;
                    let lp = (sp / np).max(eps);
                    let mass = (ltr + lpp).exp();
                    total += mass;
                    if st == 0.0 || sr == 0.0 || sp == 0.0 {
                        degenerate += mass;
                    }
                    let eta = -lt + delta * lr + (1.0 - delta) * lp;
                    let (qt, qr, qp) = match query.mode {
                        VarianceMode::Unrestricted => (lt, lr, lp),
                        VarianceMode::Restricted => {
                            if eta <= 0.0 {
                                (lt, lr, lp)
                            } else {
                                let start = warm.unwrap_or((lr, lp));
                                let (qr, qp) = poisson_boundary_mle(
                                    delta,
                                    (nt, st),
                                    (nr, sr),
                                    (np, sp),
                                    start,
                                    eps,
                                );
                                warm = Some((qr, qp));
                                (delta * qr + (1.0 - delta) * qp, qr, qp)
                            }
                        }
                    };
                    let s2 =
                        qt / nt + delta * delta * qr / nr + (1.0 - delta) * (1.0 - delta) * qp / np;
                    let t_stat = n.sqrt() * eta / (n * s2).sqrt();
                    if t_stat > z {
                        rejected += mass;
                    }
                }
            }
            [rejected, degenerate, total]
        })
        .collect();

    let mut rejected = 0.0;
    let mut degenerate = 0.0;
    let mut total = 0.0;
    for p in partials {
        rejected += p[0];
        degenerate += p[1];
        total += p[2];
    }
    Ok(PowerEstimate {
        power: rejected,
        standard_error: 0.0,
        rejections: rejected,
        total,
        degenerate_mass: degenerate,
        truncated_mass: truncated,
    })
}

struct PoissonSupport {
    lo: u64,
    log_pmf: Vec<f64>,
    cut_mass: f64,
}

/// Support of a Poisson total with mean `mu`, upper tail cut at mass 1e-12.
fn poisson_support(mu: f64) -> PoissonSupport {
    let ln_mu = mu.ln();
    let log_pmf = |x: f64| x * ln_mu - mu - ln_gamma(x + 1.0);
    // Walk outward from the mode until the cumulative tail mass is negligible.
    let hi_guess = mu + 12.0 * mu.sqrt() + 40.0;
    let mut hi = hi_guess as u64;
    let mut tail = log_pmf(hi as f64).exp();
    while tail > 1e-13 && (hi as f64) < 4.0 * hi_guess {
        hi += (mu.sqrt() as u64).max(4);
        tail = log_pmf(hi as f64).exp() * 2.0;
    }
    // Lower cut: skip leading outcomes with negligible cumulative mass.
    let mut lo = 0u64;
    let mut low_mass = 0.0;
    if mu > 400.0 {
        let candidate = (mu - 12.0 * mu.sqrt() - 40.0).max(0.0) as u64;
        let mut acc = 0.0;
        for x in 0..candidate {
            acc += log_pmf(x as f64).exp();
        }
        if acc < 1e-13 {
            lo = candidate;
            low_mass = acc;
        }
    }
    let mut pmf = Vec::with_capacity((hi - lo + 1) as usize);
    let mut cum = low_mass;
    for x in lo..=hi {
        let lp = log_pmf(x as f64);
        pmf.push(lp);
        cum += lp.exp();
    }
    PoissonSupport {
        lo,
        log_pmf: pmf,
        cut_mass: (1.0 - cum).max(0.0) + low_mass,
    }
}

/// Maximize the Poisson log-likelihood along m_T = delta m_R + (1-delta) m_P
/// by projected damped Newton over [eps, inf), matching the restricted region
/// of `run_test_clipped`.
fn poisson_boundary_mle(
    delta: f64,
    (nt, st): (f64, f64),
    (nr, sr): (f64, f64),
    (np, sp): (f64, f64),
    start: (f64, f64),
    eps: f64,
) -> (f64, f64) {
    let nll = |r: f64, p: f64| {
        let t = delta * r + (1.0 - delta) * p;
        nt * t - st * t.ln() + nr * r - sr * r.ln() + np * p - sp * p.ln()
    };
    let mut r = start.0.max(eps);
    let mut p = start.1.max(eps);
    let mut f = nll(r, p);
    let scale = nt + nr + np;
    for _ in 0..100 {
        let t = delta * r + (1.0 - delta) * p;
        let gt = nt - st / t;
        let gr = delta * gt + nr - sr / r;
        let gp = (1.0 - delta) * gt + np - sp / p;
        if gr.abs().max(gp.abs()) < 1e-10 * (1.0 + scale) {
            break;
        }
        let htt = st / (t * t);
        let hrr = delta * delta * htt + sr / (r * r);
        let hpp = (1.0 - delta) * (1.0 - delta) * htt + sp / (p * p);
        let hrp = delta * (1.0 - delta) * htt;
        // Freeze edge-pinned coordinates with outward gradients.
        let r_active = r <= eps && gr > 0.0;
        let p_active = p <= eps && gp > 0.0;
        let det = hrr * hpp - hrp * hrp;
        let (dr, dp) = match (r_active, p_active) {
            (true, true) => return (r, p),
            (true, false) => (0.0, gp / hpp),
            (false, true) => (gr / hrr, 0.0),
            (false, false) => {
                if det > 0.0 && hrr > 0.0 {
                    ((hpp * gr - hrp * gp) / det, (hrr * gp - hrp * gr) / det)
                } else {
                    (gr / scale, gp / scale)
                }
            }
        };
        let mut step = 1.0;
        let mut moved = false;
        while step >= 1e-12 {
            let rn = (r - step * dr).max(eps);
            let pn = (p - step * dp).max(eps);
            let fnew = nll(rn, pn);
            if fnew < f {
                let shift = (rn - r).abs().max((pn - p).abs());
                r = rn;
                p = pn;
                f = fnew;
                moved = true;
                if shift < 1e-14 {
                    return (r, p);
                }
                break;
            }
            step *= 0.5;
        }
        if !moved {
            break;
        }
    }
    (r, p)
}

// ---------------------------------------------------------------------------
// Monte Carlo
// ---------------------------------------------------------------------------

const MC_BLOCK: u64 = 8192;

/// Monte-Carlo power for any family: empirical rejection rate with binomial
/// standard error, reproducible for a fixed seed and any worker count.
pub fn mc_power(query: &PowerQuery) -> Result<PowerEstimate> {
    let (reps, seed) = match query.method {
        PowerMethod::MonteCarlo { reps, seed } => (reps, seed),
        PowerMethod::ExactEnumeration => {
            return Err(Error::Invalid(
                "mc_power called with the exact-enumeration method".into(),
            ))
        }
    };
    let blocks = reps.div_ceil(MC_BLOCK);
    let counts: Vec<(u64, u64)> = (0..blocks)
        .into_par_iter()
        .map(|block| {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            rng.set_stream(block + 1);
            let len = MC_BLOCK.min(reps - block * MC_BLOCK);
            let mut rej = 0u64;
            let mut degen = 0u64;
            let fam = query.hyp.family();
            for _ in 0..len {
                let t = fam.sample_stat(query.zeta_gen[0], query.n[0], &mut rng);
                let r = fam.sample_stat(query.zeta_gen[1], query.n[1], &mut rng);
                let p = fam.sample_stat(query.zeta_gen[2], query.n[2], &mut rng);
                let data = GroupData::new(t, r, p);
                let raw_interior = [
                    fam.mle(&data.test),
                    fam.mle(&data.reference),
                    fam.mle(&data.placebo),
                ]
                .iter()
                .all(|&m| fam.contains(m));
                if !raw_interior {
                    degen += 1;
                }
                if let Ok(rep) =
                    run_test_clipped(&query.hyp, &data, query.alpha, query.mode, query.clip)
                {
                    if rep.reject {
                        rej += 1;
                    }
                }
            }
            (rej, degen)
        })
        .collect();
    let rejections: u64 = counts.iter().map(|c| c.0).sum();
    let degenerate: u64 = counts.iter().map(|c| c.1).sum();
    let p = rejections as f64 / reps as f64;
    Ok(PowerEstimate {
        power: p,
        standard_error: (p * (1.0 - p) / reps as f64).sqrt(),
        rejections: rejections as f64,
        total: reps as f64,
        degenerate_mass: degenerate as f64 / reps as f64,
        truncated_mass: 0.0,
    })
}

/// Dispatch on the query's method and family.
pub fn power(query: &PowerQuery) -> Result<PowerEstimate> {
    match query.method {
        PowerMethod::MonteCarlo { .. } => mc_power(query),
        PowerMethod::ExactEnumeration => match query.hyp.family().name() {
            "binary" | "binary-logit" => exact_power_binary(query),
            "poisson" => exact_power_poisson(query),
            other => Err(Error::Invalid(format!(
                "exact enumeration is implemented for binary and poisson endpoints, not {other}"
            ))),
        },
    }
}
