//! Archive accumulation: knowledge creation, the law of motion, average
//! creation curves, steady states, and their stability.
//!
//! A steady state solves h(K) = lambda K. Crossing direction classifies
//! stability: where phi(K) - lambda switches from negative to positive the
//! state is an unstable basin boundary; where it switches from positive to
//! negative trajectories converge to it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibrium::{solve_period, SolverOptions};
use crate::error::{Error, Result};
use crate::params::{Environment, ModelParams, QueryType};
use crate::primitives::private_resolution;

/// Evaluation grid for curves and steady-state scans.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub k_min: f64,
    pub k_max: f64,
    pub n: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        // Wide enough to capture every crossing of the baseline calibration.
        GridSpec {
            k_min: 1e-3,
            k_max: 4.0,
            n: 400,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if !self.k_min.is_finite() || self.k_min <= 0.0 {
            return Err(Error::config(format!(
                "grid.k_min must be > 0, got {}",
                self.k_min
            )));
        }
        if self.k_max <= self.k_min {
            return Err(Error::config(format!(
                "grid.k_max must exceed k_min, got [{}, {}]",
                self.k_min, self.k_max
            )));
        }
        if self.n < 2 {
            return Err(Error::config(format!(
                "grid.n must be >= 2, got {}",
                self.n
            )));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|i| self.k_min + (self.k_max - self.k_min) * i as f64 / (n - 1) as f64)
            .collect()
    }
}

/// One evaluated point of an average-creation curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub k: f64,
    pub h: f64,
    pub phi: f64,
}

/// Average creation phi(K) = h(K; eta) / K on a grid, for one environment
/// and conversion rate.
#[derive(Debug, Clone)]
pub struct CreationCurve {
    pub env: Environment,
    pub eta: f64,
    pub grid: GridSpec,
    pub points: Vec<CurvePoint>,
}

impl CreationCurve {
    /// Grid point with the highest average creation.
    pub fn peak(&self) -> Option<CurvePoint> {
        self.points
            .iter()
            .copied()
            .max_by(|a, b| a.phi.total_cmp(&b.phi))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    Stable,
    Unstable,
}

impl Stability {
    pub fn as_str(self) -> &'static str {
        match self {
            Stability::Stable => "stable",
            Stability::Unstable => "unstable",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Crossing {
    /// phi - lambda switches from negative to positive as K rises.
    FromBelow,
    /// phi - lambda switches from positive to negative as K rises.
    FromAbove,
}

/// A refined root of h(K) = lambda K with its stability classification.
#[derive(Debug, Clone, Copy)]
pub struct SteadyState {
    pub k_star: f64,
    pub kind: Stability,
    pub crossing: Crossing,
    /// |h(k_star) - lambda k_star| after refinement.
    pub residual: f64,
}

/// A simulated archive path under the law of motion.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub k_path: Vec<f64>,
    pub converged: bool,
    pub limit: f64,
}

/// Adjacent grid points whose solved resolution probability jumps by more
/// than the audit threshold; a nonempty list flags a possible discontinuity
/// in the selected equilibrium branch.
#[derive(Debug, Clone, Copy)]
pub struct BranchJump {
    pub k_lo: f64,
    pub k_hi: f64,
    pub sigma_lo: f64,
    pub sigma_hi: f64,
}

fn check_eta(eta: f64, env: Environment) -> Result<()> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::domain(format!(
            "conversion rate must lie in [0,1], got {eta}"
        )));
    }
    if env == Environment::Ho && eta > 0.0 {
        return Err(Error::domain(
            "conversion applies only to the AI environment (eta must be 0 under ho)",
        ));
    }
    Ok(())
}

/// Expected new public knowledge at stock `k`: platform-resolved H-flow plus,
/// under AI, the converted share of privately resolved H-queries.
pub fn creation(
    k: f64,
    env: Environment,
    eta: f64,
    p: &ModelParams,
    opts: &SolverOptions,
) -> Result<f64> {
    check_eta(eta, env)?;
    let base = solve_period(k, env, p, opts)?.creation_base;
    let s = &p.shared;
    let conversion = if env == Environment::Ai && eta > 0.0 {
        s.delta_inc * (1.0 - s.pi) * eta * private_resolution(QueryType::H, k, env, p)?
    } else {
        0.0
    };
    Ok(base + conversion)
}

/// One step of the law of motion K' = (1 - lambda) K + h(K; eta).
pub fn step(
    k: f64,
    env: Environment,
    eta: f64,
    p: &ModelParams,
    opts: &SolverOptions,
) -> Result<f64> {
    Ok((1.0 - p.shared.lambda) * k + creation(k, env, eta, p, opts)?)
}

/// Iterate the law of motion from `k0` for at most `n_steps`, stopping early
/// once successive stocks differ by less than `conv_tol`.
pub fn simulate(
    k0: f64,
    n_steps: usize,
    env: Environment,
    eta: f64,
    p: &ModelParams,
    conv_tol: f64,
    opts: &SolverOptions,
) -> Result<Trajectory> {
    if k0 < 0.0 {
        return Err(Error::domain(format!(
            "initial stock must be >= 0, got {k0}"
        )));
    }
    if n_steps < 1 {
        return Err(Error::domain("simulation needs at least one step"));
    }
    let mut path = Vec::with_capacity(n_steps + 1);
    path.push(k0);
    let mut k = k0;
    let mut converged = false;
    for _ in 0..n_steps {
        let next = step(k, env, eta, p, opts)?;
        path.push(next);
        if (next - k).abs() < conv_tol {
            converged = true;
            k = next;
            break;
        }
        k = next;
    }
    Ok(Trajectory {
        k_path: path,
        converged,
        limit: k,
    })
}

/// Evaluate h and phi = h/K pointwise on the grid. Points are independent
/// pure solves and are evaluated in parallel; the output preserves grid
/// order and is bit-identical to a serial evaluation.
pub fn phi_curve(
    env: Environment,
    eta: f64,
    grid: &GridSpec,
    p: &ModelParams,
    opts: &SolverOptions,
) -> Result<CreationCurve> {
    grid.validate()?;
    check_eta(eta, env)?;
    let points = grid
        .points()
        .into_par_iter()
        .map(|k| {
            let h = creation(k, env, eta, p, opts)?;
            Ok(CurvePoint { k, h, phi: h / k })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CreationCurve {
        env,
        eta,
        grid: *grid,
        points,
    })
}

/// Locate and classify every crossing of phi(K) = lambda on the grid of a
/// precomputed curve. Each sign change is refined by bisection in K to
/// `refine_tol`; an exact grid zero is taken as the root directly and
/// classified by its right neighbor.
pub fn steady_states_from_curve(
    curve: &CreationCurve,
    refine_tol: f64,
    p: &ModelParams,
    opts: &SolverOptions,
) -> Result<Vec<SteadyState>> {
    let lambda = p.shared.lambda;
    let excess =
        |k: f64| -> Result<f64> { Ok(creation(k, curve.env, curve.eta, p, opts)? / k - lambda) };
    let mut out = Vec::new();
    for w in curve.points.windows(2) {
        let (a, b) = (w[0], w[1]);
        let fa = a.phi - lambda;
        let fb = b.phi - lambda;
        let (k_star, residual) = if fa == 0.0 {
            (a.k, 0.0)
        } else if fa * fb < 0.0 {
            let err_slot = std::cell::RefCell::new(None);
            let f = |k: f64| match excess(k) {
                Ok(v) => v,
                Err(e) => {
                    err_slot.replace(Some(e));
                    f64::NAN
                }
            };
            // Refine to a K-interval below refine_tol; the residual check in
            // bisect is disabled so width drives convergence.
            let mut lo = a.k;
            let mut hi = b.k;
            let mut f_lo = fa;
            for _ in 0..200 {
                if hi - lo < refine_tol {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                let fm = f(mid);
                if let Some(e) = err_slot.take() {
                    return Err(e);
                }
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if (fm > 0.0) == (f_lo > 0.0) {
                    lo = mid;
                    f_lo = fm;
                } else {
                    hi = mid;
                }
            }
            let k_star = 0.5 * (lo + hi);
            let h = creation(k_star, curve.env, curve.eta, p, opts)?;
            (k_star, (h - lambda * k_star).abs())
        } else {
            continue;
        };
        // An exact grid zero carries no sign of its own; the right neighbor
        // fixes the crossing direction.
        let from_below = if fa != 0.0 { fa < 0.0 } else { fb > 0.0 };
        let (kind, crossing) = if from_below {
            (Stability::Unstable, Crossing::FromBelow)
        } else {
            (Stability::Stable, Crossing::FromAbove)
        };
        out.push(SteadyState {
            k_star,
            kind,
            crossing,
            residual,
        });
    }
    Ok(out)
}

/// Scan the grid for steady states of h(K; eta) = lambda K.
pub fn find_steady_states(
    env: Environment,
    eta: f64,
    grid: &GridSpec,
    refine_tol: f64,
    p: &ModelParams,
    opts: &SolverOptions,
) -> Result<Vec<SteadyState>> {
    let curve = phi_curve(env, eta, grid, p, opts)?;
    steady_states_from_curve(&curve, refine_tol, p, opts)
}

/// Audit the continuity of the selected equilibrium branch: solve sigma on
/// the grid and report adjacent pairs that jump by more than `threshold`.
///
/// A flagged interval is re-solved on an 8-fold subdivision before being
/// reported: a steep but continuous sigma spreads across the sub-steps,
/// while a genuine branch discontinuity keeps a full-size jump inside one
/// of them.
pub fn branch_jump_audit(
    env: Environment,
    grid: &GridSpec,
    threshold: f64,
    p: &ModelParams,
    opts: &SolverOptions,
) -> Result<Vec<BranchJump>> {
    grid.validate()?;
    let sigmas = grid
        .points()
        .into_par_iter()
        .map(|k| Ok((k, solve_period(k, env, p, opts)?.inner.sigma)))
        .collect::<Result<Vec<_>>>()?;
    let mut jumps = Vec::new();
    for w in sigmas.windows(2) {
        if (w[1].1 - w[0].1).abs() <= threshold {
            continue;
        }
        let subdivisions = 8;
        let mut refined: Option<BranchJump> = None;
        let mut prev = w[0];
        for i in 1..=subdivisions {
            let k = w[0].0 + (w[1].0 - w[0].0) * i as f64 / subdivisions as f64;
            let sigma = if i == subdivisions {
                w[1].1
            } else {
                solve_period(k, env, p, opts)?.inner.sigma
            };
            if (sigma - prev.1).abs() > threshold {
                refined = Some(BranchJump {
                    k_lo: prev.0,
                    k_hi: k,
                    sigma_lo: prev.1,
                    sigma_hi: sigma,
                });
                break;
            }
            prev = (k, sigma);
        }
        if let Some(jump) = refined {
            jumps.push(jump);
        }
    }
    Ok(jumps)
}
