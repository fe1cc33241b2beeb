//! Period equilibrium at a given archive stock.
//!
//! The equilibrium has a nested structure. The inner loop reduces, at a fixed
//! contributor pool, to a scalar fixed point in the resolution probability
//! sigma: a candidate sigma pins down posting benefits, escalation, posted
//! flows, pool composition, the answering cutoff, and the match probability,
//! which together return an updated sigma. The outer loop moves the
//! participation cutoff until the surplus from volunteering equals the
//! marginal agent's outside option.
//!
//! Where the inner map admits several fixed points, the largest one is
//! selected (the engaged-platform branch); the degenerate sigma = 0 point is
//! returned only when no positive fixed point exists.

use crate::error::{Error, Result};
use crate::params::{Environment, ModelParams, QueryType};
use crate::primitives::{
    ability_mass, answer_cdf, answer_peak_density, answer_surplus, cost_shift, outside_option,
    posting_cdf, private_resolution, semi_elasticity,
};
use crate::solver::{bisect, brent};

/// Near-zero probe appended to the descending scan grid so fixed points that
/// sit below the lowest regular grid point (tiny contributor pools) are still
/// bracketed.
const SIGMA_PROBE: f64 = 1e-12;

/// Tolerances and scan resolution for the nested solver.
#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Residual tolerance for the inner sigma fixed point.
    pub inner_tol: f64,
    /// Residual tolerance for the outer participation root.
    pub outer_tol: f64,
    /// Number of points in the descending sigma scan.
    pub scan_grid: usize,
    /// Iteration cap for each scalar solve.
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            inner_tol: 1e-10,
            outer_tol: 1e-9,
            scan_grid: 256,
            max_iter: 200,
        }
    }
}

/// Inner-loop state at one (sigma, archive stock, pool) evaluation.
///
/// `sigma` holds the *output* of the map; at a solved fixed point it agrees
/// with the input to within the solver tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerState {
    /// Resolution probability produced by the map.
    pub sigma: f64,
    /// Posting benefits sigma * V_theta.
    pub u_l: f64,
    pub u_h: f64,
    /// Escalation probabilities.
    pub m_l: f64,
    pub m_h: f64,
    /// Posted flows per type, m_theta * (1 - a_theta).
    pub q_l: f64,
    pub q_h: f64,
    /// Total posted flow.
    pub q_total: f64,
    /// H-share of the posted pool.
    pub omega: f64,
    /// Expected knowledge increment from answering a random posted query.
    pub delta_bar: f64,
    /// Answering cutoff.
    pub c_star: f64,
    /// Match probability of a posted query.
    pub mu: f64,
}

impl InnerState {
    /// Degenerate outcome: no posting, no matching, no resolution.
    pub fn is_collapsed(&self) -> bool {
        self.sigma <= 0.0 || self.q_total <= 0.0
    }
}

/// Solved period equilibrium at one (archive stock, environment).
#[derive(Debug, Clone)]
pub struct PeriodEquilibrium {
    pub k: f64,
    pub env: Environment,
    /// Participation cutoff: agents with ability at or below it volunteer.
    pub alpha_star: f64,
    /// Mass of participating agents.
    pub pool: f64,
    /// Expected per-period payoff from participation.
    pub surplus: f64,
    pub inner: InnerState,
    /// Knowledge creation before any conversion term.
    pub creation_base: f64,
    /// Degenerate outcome: zero posting and participation (the drain
    /// convention reports an empty pool).
    pub collapsed: bool,
    /// The cutoff hit the upper ability bound: every agent participates and
    /// the surplus weakly exceeds the best outside option.
    pub full_participation: bool,
}

/// Matching outcome for posted queries that stay active for several periods.
#[derive(Debug, Clone, Copy)]
pub struct CongestionSolution {
    /// Per-period match probability against the active-query stock.
    pub mu: f64,
    /// Per-period resolution hazard mu * F(c*).
    pub hazard: f64,
    /// Lifetime resolution probability over the query's active window.
    pub sigma_lifetime: f64,
    /// Steady-state stock of active queries.
    pub stock: f64,
}

/// Inner-loop uniqueness diagnostic.
#[derive(Debug, Clone, Copy)]
pub struct UniquenessReport {
    /// beta * Delta * peak cost density * sup-gap / 4.
    pub lhs: f64,
    /// Whether the contraction bound holds (lhs < 1).
    pub satisfied: bool,
    /// Grid supremum of the positive part of the H-L semi-elasticity gap.
    pub sup_gap: f64,
}

/// One step of the inner map: candidate sigma in, updated state out.
///
/// When no queries are posted the convention is mu = sigma = delta_bar = 0;
/// the answering cutoff is still reported from the zero-increment benefit.
pub fn inner_map(
    sigma_in: f64,
    k: f64,
    pool: f64,
    env: Environment,
    p: &ModelParams,
) -> Result<InnerState> {
    if !(0.0..=1.0).contains(&sigma_in) {
        return Err(Error::domain(format!(
            "sigma must lie in [0,1], got {sigma_in}"
        )));
    }
    if !(0.0..=1.0).contains(&pool) {
        return Err(Error::domain(format!("pool must lie in [0,1], got {pool}")));
    }
    let s = &p.shared;
    let u_l = sigma_in * s.v_l;
    let u_h = sigma_in * s.v_h;
    let m_l = posting_cdf(u_l, p)?;
    let m_h = posting_cdf(u_h, p)?;
    let q_l = m_l * (1.0 - private_resolution(QueryType::L, k, env, p)?);
    let q_h = m_h * (1.0 - private_resolution(QueryType::H, k, env, p)?);
    let q_total = s.pi * q_l + (1.0 - s.pi) * q_h;
    let (omega, mu) = if q_total > 0.0 {
        ((1.0 - s.pi) * q_h / q_total, (pool / q_total).min(1.0))
    } else {
        (0.0, 0.0)
    };
    let delta_bar = s.delta_inc * omega;
    let c_star = (s.beta * delta_bar + s.u - cost_shift(k, p)?).max(0.0);
    let sigma = mu * answer_cdf(c_star, p);
    Ok(InnerState {
        sigma,
        u_l,
        u_h,
        m_l,
        m_h,
        q_l,
        q_h,
        q_total,
        omega,
        delta_bar,
        c_star,
        mu,
    })
}

/// Solve the inner fixed point, selecting the largest sigma in \[0,1\] with
/// sigma = sigma_hat(sigma).
///
/// The residual g(sigma) = sigma_hat(sigma) - sigma is scanned on a
/// descending grid from 1 (plus a near-zero probe); the first sign change
/// brackets the largest fixed point, which bisection then refines. If g stays
/// negative on the whole grid only the degenerate sigma = 0 point exists and
/// the collapsed state is returned.
pub fn solve_inner(
    k: f64,
    pool: f64,
    env: Environment,
    p: &ModelParams,
    opts: &SolverOptions,
) -> Result<InnerState> {
    if opts.scan_grid < 16 {
        return Err(Error::domain(format!(
            "scan grid must have at least 16 points, got {}",
            opts.scan_grid
        )));
    }
    let g = |sigma: f64| -> Result<f64> { Ok(inner_map(sigma, k, pool, env, p)?.sigma - sigma) };

    let n = opts.scan_grid;
    let mut prev: Option<(f64, f64)> = None;
    let mut bracket: Option<(f64, f64, f64)> = None; // lo, hi, g(lo)
    for i in (0..=n).rev() {
        let sigma = if i == 0 {
            SIGMA_PROBE
        } else {
            i as f64 / n as f64
        };
        let val = g(sigma)?;
        if val == 0.0 {
            return finish_inner(sigma, k, pool, env, p, opts);
        }
        if let Some((s_prev, v_prev)) = prev {
            if v_prev < 0.0 && val > 0.0 {
                bracket = Some((sigma, s_prev, val));
                break;
            }
        }
        prev = Some((sigma, val));
    }

    let Some((lo, hi, g_lo)) = bracket else {
        // Only the trivial fixed point: collapsed state.
        return inner_map(0.0, k, pool, env, p);
    };
    let root = bisect(
        |sigma| g(sigma).unwrap_or(f64::NAN),
        lo,
        hi,
        g_lo,
        0.0,
        opts.max_iter,
        "inner sigma fixed point",
    )?;
    finish_inner(root, k, pool, env, p, opts)
}

fn finish_inner(
    sigma: f64,
    k: f64,
    pool: f64,
    env: Environment,
    p: &ModelParams,
    opts: &SolverOptions,
) -> Result<InnerState> {
    let state = inner_map(sigma, k, pool, env, p)?;
    let residual = (state.sigma - sigma).abs();
    if residual > opts.inner_tol {
        return Err(Error::NoConvergence {
            what: "inner sigma fixed point",
            residual,
        });
    }
    Ok(state)
}

/// Surplus an individual participant expects: the participant-side match
/// probability min{1, Q/pool} times the answering surplus. Zero in collapsed
/// states and for an empty pool.
fn participant_surplus(state: &InnerState, pool: f64, p: &ModelParams) -> f64 {
    if pool <= 0.0 || state.is_collapsed() {
        0.0
    } else {
        (state.q_total / pool).min(1.0) * answer_surplus(state.c_star, p)
    }
}

/// Limit of the participation surplus as the pool (and with it sigma)
/// vanishes: posting linearizes, so the posted pool's H-share converges to a
/// ratio of value-weighted private-failure rates, while every participant is
/// matched for sure.
fn vanishing_pool_surplus(k: f64, env: Environment, p: &ModelParams) -> Result<f64> {
    let s = &p.shared;
    let weight_h = s.v_h * (1.0 - private_resolution(QueryType::H, k, env, p)?);
    let weight_l = s.v_l * (1.0 - private_resolution(QueryType::L, k, env, p)?);
    let total = s.pi * weight_l + (1.0 - s.pi) * weight_h;
    let omega0 = if total > 0.0 {
        (1.0 - s.pi) * weight_h / total
    } else {
        0.0
    };
    let c0 = (s.beta * s.delta_inc * omega0 + s.u - cost_shift(k, p)?).max(0.0);
    Ok(answer_surplus(c0, p))
}

/// Signed participation residual S(alpha) - w(alpha, K) at a candidate
/// cutoff. At the lower ability bound (empty pool) the vanishing-pool limit
/// is used, which keeps the residual continuous on the whole bracket.
pub fn participation_residual(
    alpha_cand: f64,
    k: f64,
    env: Environment,
    p: &ModelParams,
    opts: &SolverOptions,
) -> Result<f64> {
    let s = &p.shared;
    if alpha_cand < s.alpha_lo || alpha_cand > s.alpha_hi {
        return Err(Error::domain(format!(
            "cutoff {alpha_cand} outside ability support [{}, {}]",
            s.alpha_lo, s.alpha_hi
        )));
    }
    let w = outside_option(alpha_cand, k, env, p)?;
    let pool = ability_mass(alpha_cand, p);
    if pool == 0.0 {
        return Ok(vanishing_pool_surplus(k, env, p)? - w);
    }
    let state = solve_inner(k, pool, env, p, opts)?;
    Ok(participant_surplus(&state, pool, p) - w)
}

fn collapsed_equilibrium(k: f64, env: Environment, p: &ModelParams) -> Result<PeriodEquilibrium> {
    Ok(PeriodEquilibrium {
        k,
        env,
        alpha_star: p.shared.alpha_lo,
        pool: 0.0,
        surplus: 0.0,
        inner: inner_map(0.0, k, 0.0, env, p)?,
        creation_base: 0.0,
        collapsed: true,
        full_participation: false,
    })
}

fn assemble(
    k: f64,
    env: Environment,
    alpha_star: f64,
    full_participation: bool,
    p: &ModelParams,
    opts: &SolverOptions,
) -> Result<PeriodEquilibrium> {
    let pool = ability_mass(alpha_star, p);
    if pool == 0.0 {
        return collapsed_equilibrium(k, env, p);
    }
    let inner = solve_inner(k, pool, env, p, opts)?;
    if inner.is_collapsed() {
        return collapsed_equilibrium(k, env, p);
    }
    let surplus = participant_surplus(&inner, pool, p);
    let s = &p.shared;
    let creation_base = s.delta_inc * (1.0 - s.pi) * inner.q_h * inner.sigma;
    Ok(PeriodEquilibrium {
        k,
        env,
        alpha_star,
        pool,
        surplus,
        inner,
        creation_base,
        collapsed: false,
        full_participation,
    })
}

/// Solve the period equilibrium at archive stock `k`.
///
/// Corner rules: a collapsed inner solution at the full pool means the
/// platform is inactive regardless of participation; a nonnegative residual
/// at the upper ability bound clamps the cutoff there (everyone
/// participates); a negative residual at the lower bound means not even the
/// lowest-ability agent volunteers and the equilibrium drains. Otherwise the
/// cutoff is the Brent root of the residual on the ability support.
pub fn solve_period(
    k: f64,
    env: Environment,
    p: &ModelParams,
    opts: &SolverOptions,
) -> Result<PeriodEquilibrium> {
    if k < 0.0 {
        return Err(Error::domain(format!(
            "archive stock must be >= 0, got {k}"
        )));
    }
    let s = &p.shared;
    let full = solve_inner(k, 1.0, env, p, opts)?;
    if full.is_collapsed() {
        return collapsed_equilibrium(k, env, p);
    }
    let r_hi = participation_residual(s.alpha_hi, k, env, p, opts)?;
    if r_hi >= 0.0 {
        return assemble(k, env, s.alpha_hi, true, p, opts);
    }
    let r_lo = participation_residual(s.alpha_lo, k, env, p, opts)?;
    if r_lo < 0.0 {
        // Drain only if the residual really is negative throughout; interior
        // sign structure with same-sign corners is a bracketing failure.
        let mut samples = vec![(s.alpha_lo, r_lo)];
        for i in 1..8 {
            let alpha = s.alpha_lo + (s.alpha_hi - s.alpha_lo) * i as f64 / 8.0;
            let r = participation_residual(alpha, k, env, p, opts)?;
            if r > 0.0 {
                samples.push((alpha, r));
                samples.push((s.alpha_hi, r_hi));
                return Err(Error::Bracket {
                    context: format!(
                        "participation residual changes sign inside ({}, {}) but both corners are negative at k={k}",
                        s.alpha_lo, s.alpha_hi
                    ),
                    samples,
                });
            }
            samples.push((alpha, r));
        }
        return collapsed_equilibrium(k, env, p);
    }

    let err_slot = std::cell::RefCell::new(None);
    let residual = |alpha: f64| -> f64 {
        let clamped = alpha.clamp(s.alpha_lo, s.alpha_hi);
        match participation_residual(clamped, k, env, p, opts) {
            Ok(v) => v,
            Err(e) => {
                err_slot.replace(Some(e));
                f64::NAN
            }
        }
    };
    let root = brent(
        residual,
        s.alpha_lo,
        s.alpha_hi,
        opts.outer_tol,
        opts.max_iter,
        "participation cutoff",
    );
    if let Some(e) = err_slot.take() {
        return Err(e);
    }
    assemble(k, env, root?, false, p, opts)
}

/// Evaluate the inner-loop contraction bound on a sigma grid:
/// `beta * Delta * f_peak * sup[(l_H - l_L)]+ / 4 < 1`.
pub fn uniqueness_bound(p: &ModelParams, sigma_grid_n: usize) -> Result<UniquenessReport> {
    if sigma_grid_n < 16 {
        return Err(Error::domain(format!(
            "sigma grid must have at least 16 points, got {sigma_grid_n}"
        )));
    }
    let mut sup_gap = 0.0_f64;
    for i in 1..=sigma_grid_n {
        let sigma = i as f64 / sigma_grid_n as f64;
        let gap =
            semi_elasticity(QueryType::H, sigma, p)? - semi_elasticity(QueryType::L, sigma, p)?;
        sup_gap = sup_gap.max(gap.max(0.0));
    }
    let lhs = p.shared.beta * p.shared.delta_inc * answer_peak_density(p) * 0.25 * sup_gap;
    Ok(UniquenessReport {
        lhs,
        satisfied: lhs < 1.0,
        sup_gap,
    })
}

/// Matching against the active-query stock when posted queries stay alive for
/// `t_life` periods. For `t_life = 1` the stock equals the flow and the match
/// probability is the closed-form short-side ratio; otherwise the scalar
/// fixed point mu = min{1, pool / X(mu)} is solved by bisection, with
/// X(mu) the geometric sum of surviving cohorts.
pub fn solve_congestion(
    pool: f64,
    q_total: f64,
    c_star: f64,
    t_life: u32,
    p: &ModelParams,
    tol: f64,
) -> Result<CongestionSolution> {
    if t_life < 1 {
        return Err(Error::domain("query lifetime must be >= 1"));
    }
    if pool < 0.0 || q_total < 0.0 {
        return Err(Error::domain(format!(
            "pool and flow must be >= 0, got pool={pool}, q_total={q_total}"
        )));
    }
    if q_total == 0.0 {
        return Ok(CongestionSolution {
            mu: 0.0,
            hazard: 0.0,
            sigma_lifetime: 0.0,
            stock: 0.0,
        });
    }
    let f_c = answer_cdf(c_star, p);
    if t_life == 1 {
        let mu = (pool / q_total).min(1.0);
        let hazard = mu * f_c;
        return Ok(CongestionSolution {
            mu,
            hazard,
            sigma_lifetime: hazard,
            stock: q_total,
        });
    }
    // Survivor sum, summed explicitly so the cohort identity is a real check
    // rather than an algebraic rearrangement of the same expression.
    let stock_of = |mu: f64| -> f64 {
        let survive = 1.0 - mu * f_c;
        let mut acc = 0.0;
        let mut pow = 1.0;
        for _ in 0..t_life {
            acc += pow;
            pow *= survive;
        }
        q_total * acc
    };
    if f_c == 0.0 {
        let stock = t_life as f64 * q_total;
        return Ok(CongestionSolution {
            mu: (pool / stock).min(1.0),
            hazard: 0.0,
            sigma_lifetime: 0.0,
            stock,
        });
    }
    let fix = |mu: f64| (pool / stock_of(mu)).min(1.0) - mu;
    let f0 = fix(0.0);
    let mu = if f0 == 0.0 {
        0.0
    } else if fix(1.0) >= 0.0 {
        // Capacity abundant even against the full surviving stock.
        1.0
    } else {
        bisect(fix, 0.0, 1.0, f0, tol, 200, "congestion match probability")?
    };
    let hazard = mu * f_c;
    let sigma_lifetime = 1.0 - (1.0 - hazard).powi(t_life as i32);
    Ok(CongestionSolution {
        mu,
        hazard,
        sigma_lifetime,
        stock: stock_of(mu),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Environment::{Ai, Ho};
    use approx::assert_abs_diff_eq;

    fn p() -> ModelParams {
        ModelParams::baseline()
    }

    fn opts() -> SolverOptions {
        SolverOptions::default()
    }

    #[test]
    fn inner_map_reproduces_stepwise_evaluation() {
        // Recompute every step of the map at sigma = 0.3, K = 0.5, full pool,
        // AI parameters, independently of the implementation.
        let p = p();
        let st = inner_map(0.3, 0.5, 1.0, Ai, &p).unwrap();

        let m_h = 1.0 - (-0.3_f64 * 2.0 / 0.5).exp();
        let m_l = 1.0 - (-0.3_f64 * 1.0 / 0.5).exp();
        assert_abs_diff_eq!(st.m_h, m_h, epsilon = 1e-14);
        assert_abs_diff_eq!(st.m_l, m_l, epsilon = 1e-14);

        let (rate_h, rate_l) = (0.5_f64, 1.0_f64);
        let q_h = m_h * (-rate_h * 0.5).exp();
        let q_l = m_l * (-rate_l * 0.5).exp();
        assert_abs_diff_eq!(st.q_h, q_h, epsilon = 1e-14);
        assert_abs_diff_eq!(st.q_l, q_l, epsilon = 1e-14);

        let q = 0.4 * q_l + 0.6 * q_h;
        assert_abs_diff_eq!(st.q_total, q, epsilon = 1e-14);
        let omega = 0.6 * q_h / q;
        assert_abs_diff_eq!(st.omega, omega, epsilon = 1e-14);

        let c_star = 0.9 * omega + 0.3 - 1.25 / 3.5;
        assert_abs_diff_eq!(st.c_star, c_star, epsilon = 1e-14);
        assert_eq!(st.mu, 1.0);
        assert_abs_diff_eq!(st.sigma, c_star, epsilon = 1e-14);

        // Four-digit checkpoints for the same evaluation.
        assert_abs_diff_eq!(st.sigma, 0.6169, epsilon = 5e-5);
        assert_abs_diff_eq!(st.m_h, 0.6988, epsilon = 5e-5);
        assert_abs_diff_eq!(st.m_l, 0.4512, epsilon = 5e-5);
        assert_abs_diff_eq!(st.q_total, 0.4360, epsilon = 5e-5);
        assert_abs_diff_eq!(st.omega, 0.7489, epsilon = 5e-5);
    }

    #[test]
    fn inner_map_zero_sigma_collapses() {
        let p = p();
        let st = inner_map(0.0, 0.5, 1.0, Ai, &p).unwrap();
        assert_eq!(st.sigma, 0.0);
        assert_eq!(st.q_total, 0.0);
        assert_eq!(st.mu, 0.0);
        assert_eq!(st.delta_bar, 0.0);
        assert!(st.is_collapsed());
    }

    #[test]
    fn inner_map_empty_archive_forces_zero_cutoff() {
        let p = p();
        for sigma in [0.1, 0.5, 1.0] {
            let st = inner_map(sigma, 0.0, 1.0, Ai, &p).unwrap();
            assert_eq!(st.c_star, 0.0);
            assert_eq!(st.sigma, 0.0);
        }
    }

    #[test]
    fn inner_map_rejects_out_of_range_sigma() {
        let p = p();
        assert!(inner_map(-0.1, 0.5, 1.0, Ai, &p).is_err());
        assert!(inner_map(1.1, 0.5, 1.0, Ai, &p).is_err());
        assert!(inner_map(0.5, 0.5, 1.5, Ai, &p).is_err());
    }

    #[test]
    fn solve_inner_collapses_at_empty_archive() {
        let p = p();
        let st = solve_inner(0.0, 1.0, Ai, &p, &opts()).unwrap();
        assert!(st.is_collapsed());
        assert_eq!(st.sigma, 0.0);
    }

    #[test]
    fn solve_inner_collapses_with_no_pool() {
        let p = p();
        let st = solve_inner(0.5, 0.0, Ai, &p, &opts()).unwrap();
        assert_eq!(st.sigma, 0.0);
        assert_eq!(st.mu, 0.0);
    }

    #[test]
    fn solve_inner_fixed_point_residual_and_reapplication() {
        let p = p();
        let o = opts();
        for (k, pool) in [(0.5, 1.0), (0.2, 0.3), (1.0, 0.6), (2.5, 0.4), (0.08, 0.01)] {
            let st = solve_inner(k, pool, Ai, &p, &o).unwrap();
            if st.is_collapsed() {
                continue;
            }
            let re = inner_map(st.sigma, k, pool, Ai, &p).unwrap();
            assert!(
                (re.sigma - st.sigma).abs() <= o.inner_tol,
                "residual {} at k={k} pool={pool}",
                (re.sigma - st.sigma).abs()
            );
            // Re-applying the map reproduces every field.
            assert_abs_diff_eq!(re.q_h, st.q_h, epsilon = 1e-9);
            assert_abs_diff_eq!(re.q_l, st.q_l, epsilon = 1e-9);
            assert_abs_diff_eq!(re.c_star, st.c_star, epsilon = 1e-9);
            assert_abs_diff_eq!(re.mu, st.mu, epsilon = 1e-9);
        }
    }

    #[test]
    fn solve_inner_selects_largest_fixed_point() {
        let p = p();
        let o = opts();
        for (k, pool) in [(0.5, 1.0), (0.3, 0.4), (1.5, 0.55)] {
            let st = solve_inner(k, pool, Ai, &p, &o).unwrap();
            let n = o.scan_grid;
            for i in 1..=n {
                let sigma = i as f64 / n as f64;
                if sigma <= st.sigma {
                    continue;
                }
                let g = inner_map(sigma, k, pool, Ai, &p).unwrap().sigma - sigma;
                assert!(
                    g.abs() > o.inner_tol,
                    "grid point {sigma} above solution {} is also fixed",
                    st.sigma
                );
            }
        }
    }

    #[test]
    fn residual_at_lower_bound_is_negative_when_collapsed() {
        let p = p();
        // K = 0: no platform activity, so the residual is minus the outside
        // option for every ability level.
        for alpha in [0.001, 0.05, 0.2] {
            let r = participation_residual(alpha, 0.0, Ai, &p, &opts()).unwrap();
            let w = outside_option(alpha, 0.0, Ai, &p).unwrap();
            assert_abs_diff_eq!(r, -w, epsilon = 1e-12);
            assert!(r < 0.0);
        }
    }

    #[test]
    fn residual_brackets_the_cutoff_when_active() {
        let p = p();
        let o = opts();
        let r_lo = participation_residual(0.001, 0.51, Ai, &p, &o).unwrap();
        let r_hi = participation_residual(0.2, 0.51, Ai, &p, &o).unwrap();
        assert!(
            r_lo > 0.0,
            "low-ability agents should strictly prefer to join"
        );
        assert!(r_hi < 0.0, "high-ability agents should strictly prefer out");
    }

    #[test]
    fn solve_period_collapses_at_zero_archive() {
        let p = p();
        for env in [Ho, Ai] {
            let eq = solve_period(0.0, env, &p, &opts()).unwrap();
            assert!(eq.collapsed);
            assert_eq!(eq.pool, 0.0);
            assert_eq!(eq.surplus, 0.0);
            assert_eq!(eq.creation_base, 0.0);
            assert_eq!(eq.inner.sigma, 0.0);
        }
    }

    #[test]
    fn solve_period_drains_at_extreme_archive() {
        // Outside options grow without bound in K under AI, so a huge
        // archive pulls even the least able agent away.
        let p = p();
        let eq = solve_period(500.0, Ai, &p, &opts()).unwrap();
        assert!(eq.collapsed);
        assert_eq!(eq.pool, 0.0);
    }

    #[test]
    fn solve_period_interior_regression() {
        // Frozen reference solve at K = 0.51 under AI parameters.
        let p = p();
        let eq = solve_period(0.51, Ai, &p, &opts()).unwrap();
        assert!(!eq.collapsed);
        assert!(!eq.full_participation);
        assert_abs_diff_eq!(eq.alpha_star, 0.11679865421047804, epsilon = 1e-7);
        assert_abs_diff_eq!(eq.pool, 0.5819027849772765, epsilon = 1e-6);
        assert_abs_diff_eq!(eq.surplus, 0.1758987732409804, epsilon = 1e-6);
        assert_abs_diff_eq!(eq.inner.sigma, 0.5881388066279899, epsilon = 1e-6);
        assert_abs_diff_eq!(eq.inner.c_star, 0.593125236760299, epsilon = 1e-6);
        assert_abs_diff_eq!(eq.inner.mu, 0.9915929557144703, epsilon = 1e-6);
        assert_abs_diff_eq!(eq.inner.q_h, 0.7012019589608364, epsilon = 1e-6);
        assert_abs_diff_eq!(eq.inner.q_total, 0.5868363441105725, epsilon = 1e-6);
        assert_abs_diff_eq!(eq.creation_base, 0.24744245000906104, epsilon = 1e-6);
        // Outer condition S = w(alpha*) holds at the solved cutoff.
        let w = outside_option(eq.alpha_star, 0.51, Ai, &p).unwrap();
        assert!((eq.surplus - w).abs() <= opts().outer_tol);
    }

    #[test]
    fn solve_period_clamps_to_full_participation() {
        // The human-only economy at a rich archive: outside options are flat
        // in K, surplus exceeds even the top agent's outside option.
        let p = p();
        let eq = solve_period(2.0, Ho, &p, &opts()).unwrap();
        assert!(eq.full_participation);
        assert_eq!(eq.pool, 1.0);
        assert_eq!(eq.alpha_star, 0.2);
        let w = outside_option(0.2, 2.0, Ho, &p).unwrap();
        assert!(eq.surplus >= w);
    }

    #[test]
    fn uniqueness_bound_trivial_at_baseline() {
        let rep = uniqueness_bound(&p(), 256).unwrap();
        assert_eq!(rep.sup_gap, 0.0);
        assert_eq!(rep.lhs, 0.0);
        assert!(rep.satisfied);
    }

    #[test]
    fn uniqueness_bound_symmetric_values_give_zero_gap() {
        let mut p = p();
        p.shared.v_h = 1.0;
        p.shared.v_l = 1.0;
        let rep = uniqueness_bound(&p, 128).unwrap();
        assert_eq!(rep.sup_gap, 0.0);
    }

    #[test]
    fn uniqueness_bound_positive_gap_matches_direct_evaluation() {
        // Inverted posting values (constructed directly; the loader rejects
        // them) force l_H > l_L. Cross-check the grid supremum against an
        // independent finite-difference evaluation of d/dx log Gamma(x).
        let mut p = p();
        p.shared.v_h = 1.0;
        p.shared.v_l = 2.0;
        let n = 256;
        let rep = uniqueness_bound(&p, n).unwrap();
        assert!(rep.sup_gap > 0.0);
        assert!(rep.lhs > 0.0);

        let log_gamma = |x: f64| (1.0 - (-x / p.shared.d_bar).exp()).ln();
        let ell = |v: f64, sigma: f64| {
            let x = sigma * v;
            let h = 1e-6;
            v * (log_gamma(x + h) - log_gamma(x - h)) / (2.0 * h)
        };
        let mut sup = 0.0_f64;
        for i in 1..=n {
            let sigma = i as f64 / n as f64;
            sup = sup.max((ell(1.0, sigma) - ell(2.0, sigma)).max(0.0));
        }
        assert_abs_diff_eq!(rep.sup_gap, sup, epsilon = 1e-5);
        assert_abs_diff_eq!(
            rep.lhs,
            p.shared.beta * p.shared.delta_inc * 1.0 * 0.25 * sup,
            epsilon = 1e-5
        );
    }

    #[test]
    fn congestion_single_period_is_exact() {
        let p = p();
        let sol = solve_congestion(0.4, 0.8, 0.6, 1, &p, 1e-12).unwrap();
        assert_eq!(sol.stock, 0.8);
        assert_eq!(sol.mu, 0.5);
        assert_eq!(sol.hazard, 0.5 * 0.6);
        assert_eq!(sol.sigma_lifetime, sol.hazard);
    }

    #[test]
    fn congestion_three_period_example() {
        // pool = 0.875 with F = 1 puts the fixed point exactly at mu = 0.5:
        // X = 1 + 0.5 + 0.25 = 1.75 and pool / X = 0.5.
        let p = p();
        let sol = solve_congestion(0.875, 1.0, 2.0, 3, &p, 1e-12).unwrap();
        assert_abs_diff_eq!(sol.mu, 0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(sol.hazard, 0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(sol.stock, 1.75, epsilon = 1e-9);
        assert_abs_diff_eq!(sol.sigma_lifetime, 0.875, epsilon = 1e-10);
        // Cohort identity: resolved stock per period equals resolved inflow.
        assert_abs_diff_eq!(
            sol.stock * sol.hazard,
            1.0 * sol.sigma_lifetime,
            epsilon = 1e-10
        );
    }

    #[test]
    fn congestion_abundant_capacity_hits_unit_match() {
        let p = p();
        let sol = solve_congestion(5.0, 1.0, 2.0, 3, &p, 1e-12).unwrap();
        assert_eq!(sol.mu, 1.0);
        assert_eq!(sol.sigma_lifetime, 1.0);
        assert_eq!(sol.stock, 1.0);
    }

    #[test]
    fn congestion_zero_flow_and_zero_cutoff() {
        let p = p();
        let z = solve_congestion(0.5, 0.0, 0.6, 4, &p, 1e-12).unwrap();
        assert_eq!(z.stock, 0.0);
        assert_eq!(z.sigma_lifetime, 0.0);
        let nc = solve_congestion(0.5, 1.0, 0.0, 4, &p, 1e-12).unwrap();
        assert_eq!(nc.stock, 4.0);
        assert_eq!(nc.hazard, 0.0);
        assert_eq!(nc.sigma_lifetime, 0.0);
        assert_abs_diff_eq!(nc.mu, 0.125, epsilon = 1e-15);
    }

    #[test]
    fn congestion_rejects_zero_lifetime() {
        let p = p();
        assert!(solve_congestion(0.5, 1.0, 0.6, 0, &p, 1e-12).is_err());
    }

    #[test]
    fn lifetime_resolution_monotone_in_window() {
        // At a fixed hazard, more periods of exposure weakly raise lifetime
        // resolution.
        let hazard = 0.3_f64;
        let mut prev = 0.0;
        for t in 1..=20 {
            let sigma = 1.0 - (1.0 - hazard).powi(t);
            assert!(sigma >= prev);
            prev = sigma;
        }
    }
}
