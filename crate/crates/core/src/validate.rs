//! Invariant suite: every structural property the library maintains,
//! runnable as one batch (the CLI `validate` subcommand) or as individual
//! checks from the test suites.
//!
//! Sampling is done with a fixed-seed SplitMix64 stream so repeated runs are
//! bit-identical.

use crate::analysis::{
    crowdout_check, decompose_margins, find_congested_stock, resolution_race, MarginDecomposition,
};
use crate::dynamics::{
    branch_jump_audit, find_steady_states, phi_curve, simulate, GridSpec, Stability,
};
use crate::equilibrium::{
    inner_map, solve_congestion, solve_inner, solve_period, uniqueness_bound, PeriodEquilibrium,
    SolverOptions,
};
use crate::error::Result;
use crate::params::{Environment, ModelParams, QueryType};
use crate::primitives::{
    ability_mass, answer_cdf, answer_surplus, averaged_failure, cost_shift, outside_option,
    posting_cdf, private_resolution, semi_elasticity,
};

/// Outcome of one invariant check.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Informational checks report their finding without gating the run.
    pub required: bool,
    pub details: String,
}

impl Check {
    fn pass(name: &'static str, details: impl Into<String>) -> Self {
        Check {
            name,
            passed: true,
            required: true,
            details: details.into(),
        }
    }

    fn fail(name: &'static str, details: impl Into<String>) -> Self {
        Check {
            name,
            passed: false,
            required: true,
            details: details.into(),
        }
    }

    fn info(name: &'static str, details: impl Into<String>) -> Self {
        Check {
            name,
            passed: true,
            required: false,
            details: details.into(),
        }
    }
}

/// Deterministic sampler (SplitMix64).
pub struct Sampler(u64);

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler(seed)
    }

    fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    pub fn env(&mut self) -> Environment {
        if self.next_u64() & 1 == 0 {
            Environment::Ho
        } else {
            Environment::Ai
        }
    }
}

const JUMP_THRESHOLD: f64 = 0.05;

/// Empty-archive shutdown precondition C(0) > beta*Delta + u. Informational:
/// a violation is reported but does not gate the run.
pub fn check_shutdown_precondition(p: &ModelParams) -> Check {
    let c0 = p.shared.c_bar_cost;
    let best = p.shared.beta * p.shared.delta_inc + p.shared.u;
    if c0 > best {
        Check::info(
            "empty_archive_shutdown",
            format!("holds: C(0) = {c0} > {best}"),
        )
    } else {
        Check::info(
            "empty_archive_shutdown",
            format!("violated: C(0) = {c0} <= {best}; the platform may activate at K = 0"),
        )
    }
}

/// Pointwise monotonicity of the closed-form primitives on a K-by-alpha grid.
pub fn check_primitive_monotonicity(p: &ModelParams) -> Check {
    let name = "primitive_monotonicity";
    let run = || -> Result<Option<String>> {
        let mut sampler = Sampler::new(11);
        for _ in 0..200 {
            let k = sampler.range(0.0, 5.0);
            let dk = sampler.range(1e-3, 0.5);
            let alpha = sampler.range(0.0, 0.3);
            let da = sampler.range(1e-4, 0.05);
            for env in [Environment::Ho, Environment::Ai] {
                if outside_option(alpha + da, k, env, p)? <= outside_option(alpha, k, env, p)? {
                    return Ok(Some(format!(
                        "outside option not increasing in ability at alpha={alpha}, k={k}"
                    )));
                }
                if outside_option(alpha, k + dk, env, p)? < outside_option(alpha, k, env, p)? {
                    return Ok(Some(format!("outside option decreasing in K at k={k}")));
                }
                for theta in [QueryType::L, QueryType::H] {
                    if private_resolution(theta, k + dk, env, p)?
                        < private_resolution(theta, k, env, p)?
                    {
                        return Ok(Some(format!("private resolution decreasing in K at k={k}")));
                    }
                }
            }
            if cost_shift(k + dk, p)? >= cost_shift(k, p)? {
                return Ok(Some(format!("cost shifter not decreasing at k={k}")));
            }
        }
        Ok(None)
    };
    match run() {
        Ok(None) => Check::pass(name, "200 random grid comparisons"),
        Ok(Some(msg)) => Check::fail(name, msg),
        Err(e) => Check::fail(name, e.to_string()),
    }
}

/// The AI environment weakly dominates in outside options and private
/// resolution everywhere on a test grid.
pub fn check_environment_dominance(p: &ModelParams) -> Check {
    let name = "environment_dominance";
    let run = || -> Result<Option<String>> {
        for i in 0..=40 {
            let k = 0.125 * i as f64;
            for j in 0..=10 {
                let alpha =
                    p.shared.alpha_lo + (p.shared.alpha_hi - p.shared.alpha_lo) * j as f64 / 10.0;
                if outside_option(alpha, k, Environment::Ai, p)?
                    < outside_option(alpha, k, Environment::Ho, p)?
                {
                    return Ok(Some(format!(
                        "outside option dominance fails at ({alpha},{k})"
                    )));
                }
            }
            for theta in [QueryType::L, QueryType::H] {
                if private_resolution(theta, k, Environment::Ai, p)?
                    < private_resolution(theta, k, Environment::Ho, p)?
                {
                    return Ok(Some(format!("private resolution dominance fails at k={k}")));
                }
            }
        }
        Ok(None)
    };
    match run() {
        Ok(None) => Check::pass(name, "41 x 11 grid"),
        Ok(Some(msg)) => Check::fail(name, msg),
        Err(e) => Check::fail(name, e.to_string()),
    }
}

/// Posting semi-elasticity gap l_H - l_L on a 100-point sigma grid: strictly
/// negative when v_h > v_l (and identically zero when the values coincide).
pub fn check_semi_elasticity_gap(p: &ModelParams) -> Check {
    let name = "semi_elasticity_gap";
    let strict = p.shared.v_h > p.shared.v_l;
    for i in 1..=100 {
        let sigma = i as f64 / 100.0;
        let gap = match (
            semi_elasticity(QueryType::H, sigma, p),
            semi_elasticity(QueryType::L, sigma, p),
        ) {
            (Ok(h), Ok(l)) => h - l,
            (Err(e), _) | (_, Err(e)) => return Check::fail(name, e.to_string()),
        };
        if strict && gap >= 0.0 {
            return Check::fail(name, format!("gap {gap} >= 0 at sigma {sigma}"));
        }
        if !strict && gap.abs() > 1e-12 {
            return Check::fail(name, format!("gap {gap} != 0 at sigma {sigma}"));
        }
    }
    Check::pass(name, "100-point sigma grid")
}

/// Ability-averaged failure with a constant rate reproduces the closed form.
pub fn check_averaged_failure(p: &ModelParams) -> Check {
    let name = "averaged_failure_consistency";
    for env in [Environment::Ho, Environment::Ai] {
        for theta in [QueryType::L, QueryType::H] {
            let rate = match theta {
                QueryType::H => p.env(env).rho_h,
                QueryType::L => p.env(env).rho_l,
            };
            for k in [0.0, 0.4, 1.3, 2.9] {
                let avg = match averaged_failure(k, |_| rate, 4001, p) {
                    Ok(v) => v,
                    Err(e) => return Check::fail(name, e.to_string()),
                };
                let closed = match private_resolution(theta, k, env, p) {
                    Ok(a) => 1.0 - a,
                    Err(e) => return Check::fail(name, e.to_string()),
                };
                if (avg - closed).abs() > 1e-10 {
                    return Check::fail(
                        name,
                        format!(
                            "|quadrature - closed form| = {} at k={k}",
                            (avg - closed).abs()
                        ),
                    );
                }
            }
        }
    }
    Check::pass(name, "constant-rate quadrature within 1e-10 of closed form")
}

/// Inner fixed points over random (k, pool): residual within tolerance,
/// re-application reproduces the state, and no grid point above the returned
/// sigma is also fixed.
pub fn check_inner_fixed_points(p: &ModelParams, opts: &SolverOptions) -> Check {
    let name = "inner_fixed_point";
    let mut sampler = Sampler::new(23);
    let mut worst = 0.0_f64;
    for _ in 0..60 {
        let k = sampler.range(0.02, 3.5);
        let pool = sampler.range(0.0, 1.0);
        let env = sampler.env();
        let st = match solve_inner(k, pool, env, p, opts) {
            Ok(st) => st,
            Err(e) => return Check::fail(name, format!("solve failed at k={k}: {e}")),
        };
        let re = match inner_map(st.sigma, k, pool, env, p) {
            Ok(re) => re,
            Err(e) => return Check::fail(name, e.to_string()),
        };
        let residual = (re.sigma - st.sigma).abs();
        worst = worst.max(residual);
        if residual > opts.inner_tol {
            return Check::fail(name, format!("residual {residual} at k={k}, pool={pool}"));
        }
        if st.sigma > 0.0 {
            let n = opts.scan_grid;
            for i in 1..=n {
                let sigma = i as f64 / n as f64;
                if sigma <= st.sigma {
                    continue;
                }
                let g = match inner_map(sigma, k, pool, env, p) {
                    Ok(m) => m.sigma - sigma,
                    Err(e) => return Check::fail(name, e.to_string()),
                };
                if g.abs() <= opts.inner_tol {
                    return Check::fail(
                        name,
                        format!("fixed point above selected sigma at k={k}: {sigma}"),
                    );
                }
            }
        }
    }
    Check::pass(
        name,
        format!("60 random states, worst residual {worst:.2e}"),
    )
}

fn check_one_period(
    eq: &PeriodEquilibrium,
    p: &ModelParams,
    tol: f64,
) -> std::result::Result<(), String> {
    let s = &p.shared;
    let st = &eq.inner;
    let k = eq.k;
    let a_l = private_resolution(QueryType::L, k, eq.env, p).map_err(|e| e.to_string())?;
    let a_h = private_resolution(QueryType::H, k, eq.env, p).map_err(|e| e.to_string())?;
    let c_k = cost_shift(k, p).map_err(|e| e.to_string())?;
    let close = |lhs: f64, rhs: f64| (lhs - rhs).abs() <= tol;

    let mu_expect = if st.q_total > 0.0 {
        (eq.pool / st.q_total).min(1.0)
    } else {
        0.0
    };
    if !close(st.mu, mu_expect) {
        return Err(format!("match probability {} vs {}", st.mu, mu_expect));
    }
    let db_expect = if st.q_total > 0.0 {
        (1.0 - s.pi) * st.q_h * s.delta_inc / st.q_total
    } else {
        0.0
    };
    if !close(st.delta_bar, db_expect) {
        return Err(format!(
            "expected increment {} vs {}",
            st.delta_bar, db_expect
        ));
    }
    if !close(st.c_star, (s.beta * st.delta_bar + s.u - c_k).max(0.0)) {
        return Err(format!("answering cutoff {} off closed form", st.c_star));
    }
    if !close(st.sigma, st.mu * answer_cdf(st.c_star, p)) {
        return Err(format!("resolution {} != mu F(c*)", st.sigma));
    }
    if !close(st.u_l, st.sigma * s.v_l) || !close(st.u_h, st.sigma * s.v_h) {
        return Err("posting benefits off sigma V".to_string());
    }
    let m_l = posting_cdf(st.u_l, p).map_err(|e| e.to_string())?;
    let m_h = posting_cdf(st.u_h, p).map_err(|e| e.to_string())?;
    if !close(st.m_l, m_l) || !close(st.m_h, m_h) {
        return Err("escalation off posting-cost CDF".to_string());
    }
    if !close(st.q_l, st.m_l * (1.0 - a_l)) || !close(st.q_h, st.m_h * (1.0 - a_h)) {
        return Err("posted flows off m (1 - a)".to_string());
    }
    if !close(st.q_total, s.pi * st.q_l + (1.0 - s.pi) * st.q_h) {
        return Err("total flow off type mix".to_string());
    }
    let surplus_expect = if eq.pool > 0.0 && st.q_total > 0.0 {
        (st.q_total / eq.pool).min(1.0) * answer_surplus(st.c_star, p)
    } else {
        0.0
    };
    if !close(eq.surplus, surplus_expect) {
        return Err(format!("surplus {} vs {}", eq.surplus, surplus_expect));
    }
    let w = outside_option(eq.alpha_star, k, eq.env, p).map_err(|e| e.to_string())?;
    if eq.collapsed {
        if eq.surplus != 0.0 || eq.pool != 0.0 {
            return Err("collapsed state must drain".to_string());
        }
    } else if eq.full_participation {
        if eq.surplus < w - tol {
            return Err(format!(
                "clamped cutoff but surplus {} < w {}",
                eq.surplus, w
            ));
        }
    } else if (eq.surplus - w).abs() > tol {
        return Err(format!(
            "cutoff indifference gap {}",
            (eq.surplus - w).abs()
        ));
    }
    if !close(ability_mass(eq.alpha_star, p), eq.pool) && !eq.collapsed {
        return Err("pool inconsistent with cutoff".to_string());
    }
    Ok(())
}

/// Joint consistency of the eight equilibrium conditions on random (K, env)
/// pairs spanning collapsed, interior, and clamped regimes.
pub fn check_period_conditions(p: &ModelParams, opts: &SolverOptions, draws: usize) -> Check {
    let name = "period_conditions";
    let mut sampler = Sampler::new(37);
    let tol = (opts.outer_tol).max(1e-10) * 2.0;
    for i in 0..draws {
        let k = sampler.range(0.0, 4.0);
        let env = sampler.env();
        let eq = match solve_period(k, env, p, opts) {
            Ok(eq) => eq,
            Err(e) => return Check::fail(name, format!("solve failed at k={k} {env}: {e}")),
        };
        if let Err(msg) = check_one_period(&eq, p, tol) {
            return Check::fail(name, format!("draw {i} at k={k} {env}: {msg}"));
        }
    }
    Check::pass(name, format!("{draws} random (K, env) pairs"))
}

/// Congestion solutions: cohort identity, single-period collapse, lifetime
/// monotonicity, and short-side monotonicity in pool and flow.
pub fn check_congestion_identities(p: &ModelParams, draws: usize) -> Check {
    let name = "congestion_identities";
    let mut sampler = Sampler::new(59);
    let mut worst = 0.0_f64;
    for _ in 0..draws {
        let pool = sampler.range(0.0, 1.2);
        let q = sampler.range(1e-6, 1.0);
        let c_star = sampler.range(0.0, 1.4);
        let t = 1 + (sampler.next_u64() % 12) as u32;
        let sol = match solve_congestion(pool, q, c_star, t, p, 1e-12) {
            Ok(s) => s,
            Err(e) => return Check::fail(name, e.to_string()),
        };
        let gap = (sol.stock * sol.hazard - q * sol.sigma_lifetime).abs();
        worst = worst.max(gap);
        if gap > 1e-10 {
            return Check::fail(
                name,
                format!("cohort identity gap {gap} at pool={pool}, q={q}, t={t}"),
            );
        }
        // T = 1 closed form is exact.
        let one = match solve_congestion(pool, q, c_star, 1, p, 1e-12) {
            Ok(s) => s,
            Err(e) => return Check::fail(name, e.to_string()),
        };
        if one.stock != q || one.mu != (pool / q).min(1.0) || one.sigma_lifetime != one.hazard {
            return Check::fail(name, "single-period collapse not exact".to_string());
        }
        // Lifetime resolution weakly falls with more posted flow and rises
        // with a larger pool.
        let more_q = match solve_congestion(pool, q * 1.3 + 1e-4, c_star, t, p, 1e-12) {
            Ok(s) => s,
            Err(e) => return Check::fail(name, e.to_string()),
        };
        if more_q.sigma_lifetime > sol.sigma_lifetime + 1e-9 {
            return Check::fail(name, format!("sigma rose with flow at pool={pool}, q={q}"));
        }
        let more_pool = match solve_congestion(pool * 1.3 + 1e-4, q, c_star, t, p, 1e-12) {
            Ok(s) => s,
            Err(e) => return Check::fail(name, e.to_string()),
        };
        if more_pool.sigma_lifetime < sol.sigma_lifetime - 1e-9 {
            return Check::fail(name, format!("sigma fell with pool at pool={pool}, q={q}"));
        }
    }
    Check::pass(
        name,
        format!("{draws} draws, worst identity gap {worst:.2e}"),
    )
}

/// Inner-loop uniqueness diagnostic: the contraction bound holds (and is
/// exactly zero under a shared posting-cost distribution with v_h > v_l).
pub fn check_uniqueness(p: &ModelParams) -> Check {
    let name = "uniqueness_bound";
    match uniqueness_bound(p, 256) {
        Ok(rep) => {
            if !rep.satisfied {
                Check::fail(name, format!("lhs {} >= 1", rep.lhs))
            } else if p.shared.v_h >= p.shared.v_l && rep.lhs != 0.0 {
                Check::fail(
                    name,
                    format!("expected trivially-zero lhs, got {}", rep.lhs),
                )
            } else {
                Check::pass(name, format!("lhs = {}", rep.lhs))
            }
        }
        Err(e) => Check::fail(name, e.to_string()),
    }
}

/// Steady states of both environments: residuals within tolerance and
/// stability classifications confirmed by perturbation trajectories.
pub fn check_steady_states(p: &ModelParams, opts: &SolverOptions, refine_tol: f64) -> Check {
    let name = "steady_state_stability";
    let grid = GridSpec::default();
    let mut described = Vec::new();
    for env in [Environment::Ho, Environment::Ai] {
        let states = match find_steady_states(env, 0.0, &grid, refine_tol, p, opts) {
            Ok(s) => s,
            Err(e) => return Check::fail(name, e.to_string()),
        };
        for st in &states {
            if st.residual > 10.0 * refine_tol {
                return Check::fail(
                    name,
                    format!("residual {} at k*={} ({env})", st.residual, st.k_star),
                );
            }
            for sign in [-1.0, 1.0] {
                let start = st.k_star * (1.0 + 0.05 * sign);
                let traj = match simulate(start, 500, env, 0.0, p, 1e-9, opts) {
                    Ok(t) => t,
                    Err(e) => return Check::fail(name, e.to_string()),
                };
                let end_gap = (traj.limit - st.k_star).abs();
                let start_gap = (start - st.k_star).abs();
                match st.kind {
                    Stability::Stable => {
                        if end_gap > 0.01 {
                            return Check::fail(
                                name,
                                format!(
                                    "stable state k*={} ({env}) did not attract from {start}: end gap {end_gap}",
                                    st.k_star
                                ),
                            );
                        }
                    }
                    Stability::Unstable => {
                        if end_gap < 2.0 * start_gap {
                            return Check::fail(
                                name,
                                format!(
                                    "unstable state k*={} ({env}) did not repel from {start}",
                                    st.k_star
                                ),
                            );
                        }
                    }
                }
            }
            described.push(format!("{env}:{}@{:.4}", st.kind.as_str(), st.k_star));
        }
    }
    Check::pass(name, described.join(", "))
}

/// One-step crowd-out ordering: when AI creation falls short at the
/// human-only stable stock, a lower AI steady state exists.
/// True for errors reporting an absent premise (no steady state or
/// threshold in the scan window) rather than a violated invariant; such
/// checks degrade to informational on configurations without the structure.
fn premise_absent(e: &crate::error::Error) -> bool {
    matches!(e, crate::error::Error::Domain(msg)
        if msg.contains("no stable") || msg.contains("no unstable threshold"))
}

pub fn check_crowdout(p: &ModelParams, opts: &SolverOptions) -> Check {
    let name = "crowdout_ordering";
    match crowdout_check(&GridSpec::default(), 1e-9, p, opts) {
        Ok(rep) => {
            if rep.declines {
                match rep.k_ai_below {
                    Some(below) if below < rep.k_ho => Check::pass(
                        name,
                        format!(
                            "h_ai({:.4}) = {:.4} < {:.4}; AI state at {:.4}",
                            rep.k_ho, rep.h_ai_at_kho, rep.lambda_k, below
                        ),
                    ),
                    _ => Check::fail(name, "decline without a lower AI steady state".to_string()),
                }
            } else {
                Check::pass(name, "no decline at the human-only stock".to_string())
            }
        }
        Err(e) if premise_absent(&e) => Check::info(name, format!("not applicable: {e}")),
        Err(e) => Check::fail(name, e.to_string()),
    }
}

/// Conversion enters average creation as an exact additive shift.
pub fn check_eta_shift(p: &ModelParams, opts: &SolverOptions) -> Check {
    let name = "eta_shift_additivity";
    let grid = GridSpec {
        k_min: 0.02,
        k_max: 3.5,
        n: 30,
    };
    let base = match phi_curve(Environment::Ai, 0.0, &grid, p, opts) {
        Ok(c) => c,
        Err(e) => return Check::fail(name, e.to_string()),
    };
    for eta in [0.25, 0.77] {
        let shifted = match phi_curve(Environment::Ai, eta, &grid, p, opts) {
            Ok(c) => c,
            Err(e) => return Check::fail(name, e.to_string()),
        };
        for (b, s) in base.points.iter().zip(&shifted.points) {
            let a_h = match private_resolution(QueryType::H, b.k, Environment::Ai, p) {
                Ok(a) => a,
                Err(e) => return Check::fail(name, e.to_string()),
            };
            let expect = b.phi + p.shared.delta_inc * (1.0 - p.shared.pi) * eta * a_h / b.k;
            if (s.phi - expect).abs() > 1e-12 {
                return Check::fail(
                    name,
                    format!("shift off by {} at k={}", (s.phi - expect).abs(), b.k),
                );
            }
        }
    }
    Check::pass(name, "exact on a 30-point grid for eta in {0.25, 0.77}")
}

/// Midpoint decomposition identity on random non-collapsed states.
pub fn check_decomposition_identity(p: &ModelParams, opts: &SolverOptions, draws: usize) -> Check {
    let name = "decomposition_identity";
    let mut sampler = Sampler::new(97);
    let mut worst = 0.0_f64;
    let mut done = 0;
    let mut attempts = 0;
    while done < draws && attempts < draws * 20 {
        attempts += 1;
        let k_ref = sampler.range(0.08, 3.0);
        let d: MarginDecomposition = match decompose_margins(k_ref, p, opts) {
            Ok(d) => d,
            Err(e) => return Check::fail(name, e.to_string()),
        };
        if d.s_ho <= 0.0 && d.s_ai <= 0.0 {
            continue; // collapsed draw, resample
        }
        let gap = (d.flow_margin + d.resolution_margin - d.total).abs();
        worst = worst.max(gap);
        if gap > 1e-12 {
            return Check::fail(name, format!("identity gap {gap} at k_ref={k_ref}"));
        }
        done += 1;
    }
    if done < draws {
        return Check::fail(name, format!("only {done}/{draws} non-collapsed draws"));
    }
    Check::pass(
        name,
        format!("{draws} non-collapsed states, worst gap {worst:.2e}"),
    )
}

/// The three-factor race identity at a scanned jointly-congested stock, and
/// agreement between the race inequality and the direct sigma comparison.
pub fn check_race_factorization(p: &ModelParams, opts: &SolverOptions) -> Check {
    let name = "race_factorization";
    let grid = GridSpec {
        k_min: 0.06,
        k_max: 1.2,
        n: 80,
    };
    let k_ref = match find_congested_stock(&grid, p, opts) {
        Ok(Some(k)) => k,
        Ok(None) => {
            return Check::info(
                name,
                "no jointly congested stock in the scan window; identity not applicable",
            )
        }
        Err(e) => return Check::fail(name, e.to_string()),
    };
    match resolution_race(k_ref, p, opts) {
        Ok(r) => {
            if !(r.congested_ho && r.congested_ai) {
                return Check::fail(name, format!("scan returned uncongested stock {k_ref}"));
            }
            let product = r.pool_ratio * r.composition_ratio / r.congestion_ratio;
            let gap = (product - r.sigma_ratio).abs();
            if gap > 1e-12 {
                return Check::fail(name, format!("factorization gap {gap} at k={k_ref}"));
            }
            if r.race_predicts_decline() != (r.sigma_ratio < 1.0) {
                return Check::fail(
                    name,
                    "race inequality disagrees with sigma ratio".to_string(),
                );
            }
            Check::pass(name, format!("identity holds at congested k = {k_ref:.4}"))
        }
        Err(e) => Check::fail(name, e.to_string()),
    }
}

/// Continuity audit of the selected equilibrium branch on the default grid.
pub fn check_branch_continuity(p: &ModelParams, opts: &SolverOptions) -> Check {
    let name = "branch_continuity";
    for env in [Environment::Ho, Environment::Ai] {
        match branch_jump_audit(env, &GridSpec::default(), JUMP_THRESHOLD, p, opts) {
            Ok(jumps) if jumps.is_empty() => {}
            Ok(jumps) => {
                return Check::fail(
                    name,
                    format!(
                        "{env}: sigma jumps above {JUMP_THRESHOLD} at {} grid interval(s), first near k = {:.4}",
                        jumps.len(),
                        jumps[0].k_lo
                    ),
                )
            }
            Err(e) => return Check::fail(name, e.to_string()),
        }
    }
    Check::pass(
        name,
        format!("max adjacent sigma step below {JUMP_THRESHOLD}"),
    )
}

/// Varying AI-only parameters leaves the human-only steady state untouched.
pub fn check_ho_invariance(p: &ModelParams, opts: &SolverOptions) -> Check {
    let name = "ho_invariance_under_ai_params";
    let grid = GridSpec::default();
    let base = match find_steady_states(Environment::Ho, 0.0, &grid, 1e-9, p, opts) {
        Ok(s) => s,
        Err(e) => return Check::fail(name, e.to_string()),
    };
    for (path, value) in [("gamma_w", 0.3), ("rho", 0.7)] {
        let mut varied = p.clone();
        if varied.set_by_path(path, value).is_err() {
            return Check::fail(name, format!("cannot set {path}"));
        }
        let states = match find_steady_states(Environment::Ho, 0.0, &grid, 1e-9, &varied, opts) {
            Ok(s) => s,
            Err(e) => return Check::fail(name, e.to_string()),
        };
        if states.len() != base.len() || states.iter().zip(&base).any(|(a, b)| a.k_star != b.k_star)
        {
            return Check::fail(name, format!("HO states moved when {path} changed"));
        }
    }
    Check::pass(name, "HO states bit-identical under AI-only variations")
}

/// The critical conversion rate weakly falls when private resolution of
/// knowledge-enhancing queries strengthens pointwise (leverage probe with
/// the zero-conversion curve held fixed).
pub fn check_eta_monotonicity(p: &ModelParams, opts: &SolverOptions) -> Check {
    let name = "critical_eta_monotonicity";
    let base = match crate::analysis::critical_eta(p, 250, opts) {
        Ok(r) => r,
        Err(e) if premise_absent(&e) => return Check::info(name, format!("not applicable: {e}")),
        Err(e) => return Check::fail(name, e.to_string()),
    };
    let mut prev = base.eta_bar;
    for scale in [1.25, 1.75] {
        let probed =
            match crate::analysis::critical_eta_leverage_probe(p, 250, opts, p.ai.rho_h * scale) {
                Ok(r) => r,
                Err(e) => return Check::fail(name, e.to_string()),
            };
        if probed.eta_bar > prev + 1e-12 {
            return Check::fail(
                name,
                format!(
                    "threshold rose from {prev} to {} at scale {scale}",
                    probed.eta_bar
                ),
            );
        }
        prev = probed.eta_bar;
    }
    Check::pass(
        name,
        format!(
            "threshold falls from {:.4} under stronger leverage",
            base.eta_bar
        ),
    )
}

/// Basin elimination is monotone in the conversion rate.
pub fn check_basin_monotonicity(p: &ModelParams, opts: &SolverOptions) -> Check {
    let name = "basin_monotonicity";
    let mut prev = false;
    for eta in [0.2, 0.45, 0.6, 0.9] {
        let cur = match crate::analysis::basin_eliminated(eta, p, 120, opts) {
            Ok(b) => b,
            Err(e) if premise_absent(&e) => {
                return Check::info(name, format!("not applicable: {e}"))
            }
            Err(e) => return Check::fail(name, e.to_string()),
        };
        if prev && !cur {
            return Check::fail(name, format!("elimination flag fell at eta = {eta}"));
        }
        prev = cur;
    }
    Check::pass(name, "flag nondecreasing over eta in {0.2, 0.45, 0.6, 0.9}")
}

/// Average creation responds to conversion but the eta = 0 crossings pin the
/// threshold region: a sanity check that creation itself stays nonnegative
/// and finite across the grid.
pub fn check_creation_sane(p: &ModelParams, opts: &SolverOptions) -> Check {
    let name = "creation_nonnegative";
    for env in [Environment::Ho, Environment::Ai] {
        let curve = match phi_curve(env, 0.0, &GridSpec::default(), p, opts) {
            Ok(c) => c,
            Err(e) => return Check::fail(name, e.to_string()),
        };
        for pt in &curve.points {
            if !(pt.h.is_finite() && pt.h >= 0.0) {
                return Check::fail(name, format!("h = {} at k = {} ({env})", pt.h, pt.k));
            }
        }
    }
    Check::pass(name, "h finite and nonnegative on the default grid")
}

/// Run the full invariant suite.
pub fn run_all(p: &ModelParams, opts: &SolverOptions) -> Vec<Check> {
    let mut checks = vec![
        match p.validate() {
            Ok(()) => Check::pass("params_valid", "all restrictions hold"),
            Err(e) => Check::fail("params_valid", e.to_string()),
        },
        check_shutdown_precondition(p),
        check_primitive_monotonicity(p),
        check_environment_dominance(p),
        check_semi_elasticity_gap(p),
        check_averaged_failure(p),
        check_uniqueness(p),
        check_inner_fixed_points(p, opts),
        check_period_conditions(p, opts, 50),
        check_congestion_identities(p, 100),
        check_creation_sane(p, opts),
        check_steady_states(p, opts, 1e-9),
        check_crowdout(p, opts),
        check_eta_shift(p, opts),
        check_eta_monotonicity(p, opts),
        check_basin_monotonicity(p, opts),
        check_decomposition_identity(p, opts, 100),
        check_race_factorization(p, opts),
        check_branch_continuity(p, opts),
    ];
    checks.push(check_ho_invariance(p, opts));
    checks
}
