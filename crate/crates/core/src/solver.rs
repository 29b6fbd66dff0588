//! Damped Newton minimization of group-separable objectives restricted to the
//! null boundary, shared by the restricted-MLE and KL-projection routines.
//!
//! Both problems have the form
//!
//! F(theta_R, theta_P) = phi_T(g(theta_R, theta_P)) + phi_R(theta_R) + phi_P(theta_P)
//!
//! with g the boundary substitution map. Gradients are assembled analytically
//! from the per-group derivatives; the Hessian is analytic when g is affine
//! (binary-identity, Poisson, normal) and a finite difference of the analytic
//! gradient otherwise. Steps are projected onto the epsilon-shrunk domain box
//! so that optima pushed against the boundary (clipped zero-count groups)
//! terminate cleanly. On non-convergence the caller falls back to
//! coordinate-wise golden-section search.

use crate::error::{Error, Result};
use crate::hypothesis::RetentionHypothesis;

/// Per-group potential phi_k with first and second derivatives. Group index:
/// 0 = test, 1 = reference, 2 = placebo.
pub(crate) trait GroupPotential {
    fn eval(&self, group: usize, theta: f64) -> f64;
    fn grad(&self, group: usize, theta: f64) -> f64;
    fn hess(&self, group: usize, theta: f64) -> f64;
}

pub(crate) struct BoundaryProblem<'a> {
    pub hyp: &'a RetentionHypothesis,
    pub pot: &'a dyn GroupPotential,
    pub affine: bool,
    /// Closed feasibility box for theta_R and theta_P (epsilon-shrunk domain).
    pub lo: f64,
    pub hi: f64,
}

const GRAD_TOL: f64 = 1e-12;
const STEP_TOL: f64 = 1e-13;
const MAX_ITER: usize = 200;

impl<'a> BoundaryProblem<'a> {
    pub fn new(hyp: &'a RetentionHypothesis, pot: &'a dyn GroupPotential, epsilon: f64) -> Self {
        let (dlo, dhi) = hyp.family().domain();
        let lo = if dlo.is_finite() { dlo + epsilon } else { dlo };
        let hi = if dhi.is_finite() { dhi - epsilon } else { dhi };
        BoundaryProblem {
            hyp,
            pot,
            affine: hyp.boundary_is_affine(),
            lo,
            hi,
        }
    }

    fn substitute(&self, r: f64, p: f64) -> Option<f64> {
        let t = self.hyp.boundary_substitute(r, p).ok()?;
        if self.hyp.family().contains(t) {
            Some(t)
        } else {
            None
        }
    }

    fn in_box(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn feasible(&self, r: f64, p: f64) -> bool {
        self.in_box(r) && self.in_box(p) && self.substitute(r, p).is_some()
    }

    pub fn objective(&self, r: f64, p: f64) -> f64 {
        match self.substitute(r, p) {
            Some(t) => self.pot.eval(0, t) + self.pot.eval(1, r) + self.pot.eval(2, p),
            None => f64::INFINITY,
        }
    }

    fn gradient(&self, r: f64, p: f64) -> Option<[f64; 2]> {
        let t = self.substitute(r, p)?;
        let fam = self.hyp.family();
        let delta = self.hyp.delta();
        let dht = fam.efficacy_deriv(t);
        let dgdr = delta * fam.efficacy_deriv(r) / dht;
        let dgdp = (1.0 - delta) * fam.efficacy_deriv(p) / dht;
        let gt = self.pot.grad(0, t);
        Some([
            gt * dgdr + self.pot.grad(1, r),
            gt * dgdp + self.pot.grad(2, p),
        ])
    }

    fn hessian(&self, r: f64, p: f64, grad: &[f64; 2]) -> Option<[[f64; 2]; 2]> {
        if self.affine {
            let t = self.substitute(r, p)?;
            let fam = self.hyp.family();
            let delta = self.hyp.delta();
            let dht = fam.efficacy_deriv(t);
            let dgdr = delta * fam.efficacy_deriv(r) / dht;
            let dgdp = (1.0 - delta) * fam.efficacy_deriv(p) / dht;
            let ht = self.pot.hess(0, t);
            Some([
                [ht * dgdr * dgdr + self.pot.hess(1, r), ht * dgdr * dgdp],
                [ht * dgdr * dgdp, ht * dgdp * dgdp + self.pot.hess(2, p)],
            ])
        } else {
            // Central finite differences of the analytic gradient.
            let hr = 1e-6 * r.abs().max(1.0);
            let hp = 1e-6 * p.abs().max(1.0);
            let gr_plus = self.gradient(r + hr, p);
            let gr_minus = self.gradient(r - hr, p);
            let gp_plus = self.gradient(r, p + hp);
            let gp_minus = self.gradient(r, p - hp);
            let col = |plus: Option<[f64; 2]>, minus: Option<[f64; 2]>, h: f64| match (plus, minus)
            {
                (Some(a), Some(b)) => Some([(a[0] - b[0]) / (2.0 * h), (a[1] - b[1]) / (2.0 * h)]),
                (Some(a), None) => Some([(a[0] - grad[0]) / h, (a[1] - grad[1]) / h]),
                (None, Some(b)) => Some([(grad[0] - b[0]) / h, (grad[1] - b[1]) / h]),
                (None, None) => None,
            };
            let c0 = col(gr_plus, gr_minus, hr)?;
            let c1 = col(gp_plus, gp_minus, hp)?;
            let off = 0.5 * (c0[1] + c1[0]);
            Some([[c0[0], off], [off, c1[1]]])
        }
    }

    fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.lo, self.hi)
    }
}

/// Minimize the boundary objective by projected damped Newton iteration,
/// falling back to coordinate-wise golden-section search on failure.
pub(crate) fn minimize_on_boundary(
    problem: &BoundaryProblem<'_>,
    start: (f64, f64),
) -> Result<(f64, f64)> {
    let start = (problem.clamp(start.0), problem.clamp(start.1));
    if !problem.feasible(start.0, start.1) {
        return Err(Error::OptimizationFailure(format!(
            "infeasible starting point ({}, {})",
            start.0, start.1
        )));
    }
    match newton(problem, start) {
        Ok(x) => Ok(polish(problem, x)),
        Err(_) => golden_fallback(problem, start).map(|x| polish(problem, x)),
    }
}

/// Root-Newton refinement of the stationarity system grad F = 0. Descent-based
/// line searches stall once the objective difference falls below machine
/// resolution (about sqrt(eps) parameter accuracy); a few unguarded Newton
/// steps on the gradient push interior solutions to full precision. Steps are
/// only kept while the gradient norm shrinks, so edge-pinned solutions are
/// left untouched.
fn polish(problem: &BoundaryProblem<'_>, mut x: (f64, f64)) -> (f64, f64) {
    for _ in 0..3 {
        let Some(g) = problem.gradient(x.0, x.1) else {
            break;
        };
        let gn = g[0].abs().max(g[1].abs());
        if gn == 0.0 {
            break;
        }
        let Some(h) = problem.hessian(x.0, x.1, &g) else {
            break;
        };
        let d = newton_direction(&h, &g);
        let cand = (problem.clamp(x.0 - d[0]), problem.clamp(x.1 - d[1]));
        if !problem.feasible(cand.0, cand.1) {
            break;
        }
        let Some(gc) = problem.gradient(cand.0, cand.1) else {
            break;
        };
        if gc[0].abs().max(gc[1].abs()) < gn {
            x = cand;
        } else {
            break;
        }
    }
    x
}

fn newton(problem: &BoundaryProblem<'_>, start: (f64, f64)) -> Result<(f64, f64)> {
    let (mut r, mut p) = start;
    let mut f = problem.objective(r, p);
    for _ in 0..MAX_ITER {
        let grad = problem
            .gradient(r, p)
            .ok_or_else(|| Error::OptimizationFailure("gradient undefined".into()))?;
        if grad[0].abs().max(grad[1].abs()) < GRAD_TOL {
            return Ok((r, p));
        }
        let hess = problem
            .hessian(r, p, &grad)
            .ok_or_else(|| Error::OptimizationFailure("Hessian undefined".into()))?;
        // Active-set reduction: a coordinate pinned at the box edge with an
        // outward gradient is frozen and the other gets its 1-D Newton step.
        let r_active = (r <= problem.lo && grad[0] > 0.0) || (r >= problem.hi && grad[0] < 0.0);
        let p_active = (p <= problem.lo && grad[1] > 0.0) || (p >= problem.hi && grad[1] < 0.0);
        let dir = match (r_active, p_active) {
            (true, true) => return Ok((r, p)),
            (true, false) => [0.0, grad[1] / hess[1][1].max(1e-300)],
            (false, true) => [grad[0] / hess[0][0].max(1e-300), 0.0],
            (false, false) => newton_direction(&hess, &grad),
        };

        // Backtracking line search; candidates are projected onto the box so
        // that edge optima terminate by vanishing movement.
        let mut step = 1.0;
        let mut accepted = false;
        while step >= 1e-14 {
            let rn = problem.clamp(r - step * dir[0]);
            let pn = problem.clamp(p - step * dir[1]);
            if problem.feasible(rn, pn) {
                let fn_ = problem.objective(rn, pn);
                if fn_ < f {
                    let moved = (rn - r).abs().max((pn - p).abs());
                    r = rn;
                    p = pn;
                    f = fn_;
                    accepted = true;
                    if moved < STEP_TOL {
                        return Ok((r, p));
                    }
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            // No descent left: either converged against the box edge or the
            // model is locally flat; accept when the projected gradient step
            // no longer moves the iterate.
            let gn = grad[0].abs().max(grad[1].abs()).max(1.0);
            let moved = (problem.clamp(r - grad[0] / gn * 1e-9) - r)
                .abs()
                .max((problem.clamp(p - grad[1] / gn * 1e-9) - p).abs());
            if moved < STEP_TOL {
                return Ok((r, p));
            }
            return Err(Error::OptimizationFailure(
                "line search stalled before reaching tolerance".into(),
            ));
        }
    }
    // Accept a near-converged iterate rather than failing outright.
    let grad = problem.gradient(r, p).unwrap_or([f64::INFINITY; 2]);
    if grad[0].abs().max(grad[1].abs()) < 1e-6 {
        Ok((r, p))
    } else {
        Err(Error::OptimizationFailure(format!(
            "Newton did not converge in {MAX_ITER} iterations (|grad| = {:.3e})",
            grad[0].abs().max(grad[1].abs())
        )))
    }
}

/// Solve H d = g with a ridge added until the 2x2 system is positive definite.
fn newton_direction(hess: &[[f64; 2]; 2], grad: &[f64; 2]) -> [f64; 2] {
    let mut ridge = 0.0;
    let scale = hess[0][0].abs().max(hess[1][1].abs()).max(1e-12);
    loop {
        let a = hess[0][0] + ridge;
        let d = hess[1][1] + ridge;
        let b = hess[0][1];
        let det = a * d - b * b;
        if a > 0.0 && det > 1e-300 * scale * scale {
            return [
                (d * grad[0] - b * grad[1]) / det,
                (a * grad[1] - b * grad[0]) / det,
            ];
        }
        ridge = if ridge == 0.0 {
            1e-8 * scale
        } else {
            ridge * 10.0
        };
        if ridge > 1e12 * scale {
            // Degenerate curvature: fall back to a gradient step.
            let norm = grad[0].abs().max(grad[1].abs()).max(1e-300);
            return [grad[0] / norm, grad[1] / norm];
        }
    }
}

/// Coordinate-wise golden-section descent over feasible segments.
fn golden_fallback(problem: &BoundaryProblem<'_>, start: (f64, f64)) -> Result<(f64, f64)> {
    let (mut r, mut p) = start;
    let mut f = problem.objective(r, p);
    let bounds = |x: f64| -> (f64, f64) {
        let lo = if problem.lo.is_finite() {
            problem.lo
        } else {
            x - 1e3 * x.abs().max(1.0)
        };
        let hi = if problem.hi.is_finite() {
            problem.hi
        } else {
            x + 1e3 * x.abs().max(1.0)
        };
        (lo, hi)
    };
    for _ in 0..500 {
        let (rl, rh) = bounds(r);
        let new_r = golden_1d(|x| problem.objective(x, p), rl, rh);
        let (pl, ph) = bounds(p);
        let new_p = golden_1d(|x| problem.objective(new_r, x), pl, ph);
        let new_f = problem.objective(new_r, new_p);
        let moved = (new_r - r).abs().max((new_p - p).abs());
        let improved = f - new_f;
        if new_f <= f {
            r = new_r;
            p = new_p;
            f = new_f;
        }
        if moved < 1e-11 || improved.abs() < 1e-13 * (1.0 + f.abs()) {
            return Ok((r, p));
        }
    }
    Err(Error::OptimizationFailure(
        "golden-section fallback did not converge".into(),
    ))
}

fn golden_1d(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        if (b - a).abs() < 1e-13 * (a.abs() + b.abs()).max(1.0) {
            break;
        }
    }
    0.5 * (a + b)
}
