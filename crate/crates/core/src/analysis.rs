//! Comparative statics and policy analysis across the two environments:
//! the two-margin decomposition of the creation decline, the three-factor
//! resolution race, posted-pool composition checks, the crowd-out condition,
//! the critical conversion rate, and one-at-a-time sensitivity sweeps.

use rayon::prelude::*;

use crate::dynamics::{find_steady_states, phi_curve, GridSpec, Stability, SteadyState};
use crate::equilibrium::{solve_period, PeriodEquilibrium, SolverOptions};
use crate::error::{Error, Result};
use crate::params::{Environment, ModelParams, QueryType};
use crate::primitives::{answer_cdf, private_resolution};

/// Midpoint-weighted split of the creation decline at a reference stock into
/// a posted-flow component and a conditional-resolution component. The two
/// components sum to the total decline with no interaction remainder.
#[derive(Debug, Clone, Copy)]
pub struct MarginDecomposition {
    pub k_ref: f64,
    /// Posted H-flows per environment.
    pub q_ho: f64,
    pub q_ai: f64,
    /// Resolution probabilities per environment.
    pub s_ho: f64,
    pub s_ai: f64,
    /// q_ho - q_ai.
    pub d_q: f64,
    /// s_ho - s_ai.
    pub d_s: f64,
    /// Mean resolution times the flow decline.
    pub flow_margin: f64,
    /// Mean flow times the resolution decline.
    pub resolution_margin: f64,
    /// q_ho s_ho - q_ai s_ai.
    pub total: f64,
}

impl MarginDecomposition {
    /// Build the decomposition from raw flows and resolution probabilities.
    pub fn from_flows(k_ref: f64, q_ho: f64, s_ho: f64, q_ai: f64, s_ai: f64) -> Self {
        let d_q = q_ho - q_ai;
        let d_s = s_ho - s_ai;
        let s_mean = 0.5 * (s_ho + s_ai);
        let q_mean = 0.5 * (q_ho + q_ai);
        MarginDecomposition {
            k_ref,
            q_ho,
            q_ai,
            s_ho,
            s_ai,
            d_q,
            d_s,
            flow_margin: s_mean * d_q,
            resolution_margin: q_mean * d_s,
            total: q_ho * s_ho - q_ai * s_ai,
        }
    }
}

/// Three-factor factorization of the resolution ratio in the congested
/// regime: pool thinning and composition push against congestion relief.
#[derive(Debug, Clone, Copy)]
pub struct ResolutionFactors {
    pub k_ref: f64,
    /// Participating mass, AI over HO.
    pub pool_ratio: f64,
    /// Answering acceptance F(c*), AI over HO.
    pub composition_ratio: f64,
    /// Posted flow, AI over HO.
    pub congestion_ratio: f64,
    pub congested_ho: bool,
    pub congested_ai: bool,
    /// Resolution probability, AI over HO.
    pub sigma_ratio: f64,
}

impl ResolutionFactors {
    /// The race inequality: resolution falls under AI when pool thinning
    /// dominates composition enrichment and congestion relief combined.
    pub fn race_predicts_decline(&self) -> bool {
        self.pool_ratio * self.composition_ratio < self.congestion_ratio
    }
}

/// Posted-pool composition comparison at a reference stock.
#[derive(Debug, Clone, Copy)]
pub struct CompositionReport {
    pub k_ref: f64,
    pub delta_bar_ho: f64,
    pub delta_bar_ai: f64,
    /// Posted pool weakly richer in H under AI: q_H/q_L ordered across envs.
    pub h_rich: bool,
    /// Answering cutoffs ordered: c*_AI >= c*_HO.
    pub cutoff_ordered: bool,
    /// Fixed-escalation sufficient condition: H-type private failure falls
    /// proportionally less than L-type under AI.
    pub sufficient_condition: bool,
}

/// One-step crowd-out of creation at the human-only stable stock.
#[derive(Debug, Clone, Copy)]
pub struct CrowdoutReport {
    /// Largest stable human-only steady state.
    pub k_ho: f64,
    pub h_ai_at_kho: f64,
    pub lambda_k: f64,
    /// AI creation falls short of depreciation at k_ho.
    pub declines: bool,
    /// An AI steady state strictly below k_ho, when the decline holds.
    pub k_ai_below: Option<f64>,
}

/// The smallest conversion rate that eliminates the low-archive basin.
#[derive(Debug, Clone, Copy)]
pub struct ConversionReport {
    /// Unstable threshold of the AI economy at eta = 0.
    pub k_u: f64,
    pub eta_bar: f64,
    /// Grid stock attaining the supremum (0 when the K->0 limit attains it).
    pub argmax_k: f64,
    /// Analytic K->0 value of the requirement ratio.
    pub limit_ratio: f64,
    /// Whether an implementable rate (eta <= 1) suffices.
    pub feasible: bool,
}

/// One row of a one-at-a-time sensitivity sweep.
#[derive(Debug, Clone)]
pub struct SensitivityRow {
    pub run_id: usize,
    /// Parameter path varied; `None` for the baseline row.
    pub varied_name: Option<String>,
    pub varied_value: Option<f64>,
    pub k_u_ai: Option<f64>,
    pub k_h_ai: Option<f64>,
    pub peak_phi_ai: f64,
    pub k_ho: Option<f64>,
    /// Exactly one unstable and one stable AI state in the scan window.
    pub two_crossings: bool,
}

/// A sweep specification: which parameter paths to vary and over which
/// values, optionally preceded by an unvaried baseline row.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub include_baseline: bool,
    pub variations: Vec<(String, Vec<f64>)>,
}

impl SweepSpec {
    /// The bundled one-at-a-time sweep around the baseline calibration:
    /// outside-option K-sensitivity, cost decay, and the AI H-type private
    /// resolution rate.
    pub fn appendix_d() -> Self {
        SweepSpec {
            include_baseline: true,
            variations: vec![
                ("gamma_w".to_string(), vec![0.3, 0.7]),
                ("kappa".to_string(), vec![3.0, 7.0]),
                ("rho".to_string(), vec![0.3, 0.7]),
            ],
        }
    }
}

fn solve_both(
    k_ref: f64,
    p: &ModelParams,
    opts: &SolverOptions,
) -> Result<(PeriodEquilibrium, PeriodEquilibrium)> {
    if k_ref <= 0.0 {
        return Err(Error::domain(format!(
            "reference stock must be > 0, got {k_ref}"
        )));
    }
    Ok((
        solve_period(k_ref, Environment::Ho, p, opts)?,
        solve_period(k_ref, Environment::Ai, p, opts)?,
    ))
}

/// Solve both environments at `k_ref` (eta = 0) and decompose the creation
/// decline into the flow and resolution margins.
pub fn decompose_margins(
    k_ref: f64,
    p: &ModelParams,
    opts: &SolverOptions,
) -> Result<MarginDecomposition> {
    let (ho, ai) = solve_both(k_ref, p, opts)?;
    Ok(MarginDecomposition::from_flows(
        k_ref,
        ho.inner.q_h,
        ho.inner.sigma,
        ai.inner.q_h,
        ai.inner.sigma,
    ))
}

/// Report the three resolution-race factors at `k_ref`. The factorization
/// identity binds only when both environments are congested; the report is
/// descriptive otherwise.
pub fn resolution_race(
    k_ref: f64,
    p: &ModelParams,
    opts: &SolverOptions,
) -> Result<ResolutionFactors> {
    let (ho, ai) = solve_both(k_ref, p, opts)?;
    if ho.collapsed || ai.collapsed {
        return Err(Error::domain(format!(
            "equilibrium collapsed at k_ref = {k_ref}; resolution ratios are undefined"
        )));
    }
    let f_ho = answer_cdf(ho.inner.c_star, p);
    let f_ai = answer_cdf(ai.inner.c_star, p);
    if ho.pool <= 0.0 || f_ho <= 0.0 || ho.inner.q_total <= 0.0 || ho.inner.sigma <= 0.0 {
        return Err(Error::domain(format!(
            "human-only equilibrium at k_ref = {k_ref} has a zero factor; ratios undefined"
        )));
    }
    Ok(ResolutionFactors {
        k_ref,
        pool_ratio: ai.pool / ho.pool,
        composition_ratio: f_ai / f_ho,
        congestion_ratio: ai.inner.q_total / ho.inner.q_total,
        congested_ho: ho.pool < ho.inner.q_total,
        congested_ai: ai.pool < ai.inner.q_total,
        sigma_ratio: ai.inner.sigma / ho.inner.sigma,
    })
}

/// Scan the grid for a stock at which both environments are congested
/// (pool < posted flow). Used to pick a reference point where the race
/// factorization identity binds.
pub fn find_congested_stock(
    grid: &GridSpec,
    p: &ModelParams,
    opts: &SolverOptions,
) -> Result<Option<f64>> {
    grid.validate()?;
    for k in grid.points() {
        let ho = solve_period(k, Environment::Ho, p, opts)?;
        if ho.collapsed || ho.pool >= ho.inner.q_total {
            continue;
        }
        let ai = solve_period(k, Environment::Ai, p, opts)?;
        if !ai.collapsed && ai.pool < ai.inner.q_total {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

/// Compare posted-pool composition across environments at `k_ref`.
pub fn composition_check(
    k_ref: f64,
    p: &ModelParams,
    opts: &SolverOptions,
) -> Result<CompositionReport> {
    let (ho, ai) = solve_both(k_ref, p, opts)?;
    if ho.collapsed || ai.collapsed || ho.inner.q_l <= 0.0 || ai.inner.q_l <= 0.0 {
        return Err(Error::domain(format!(
            "composition comparison not applicable at k_ref = {k_ref}: collapsed or no posted L-flow"
        )));
    }
    let fail = |theta: QueryType, env: Environment| -> Result<f64> {
        Ok(1.0 - private_resolution(theta, k_ref, env, p)?)
    };
    let sufficient = fail(QueryType::H, Environment::Ai)? / fail(QueryType::H, Environment::Ho)?
        > fail(QueryType::L, Environment::Ai)? / fail(QueryType::L, Environment::Ho)?;
    Ok(CompositionReport {
        k_ref,
        delta_bar_ho: ho.inner.delta_bar,
        delta_bar_ai: ai.inner.delta_bar,
        h_rich: ai.inner.q_h / ai.inner.q_l >= ho.inner.q_h / ho.inner.q_l,
        cutoff_ordered: ai.inner.c_star >= ho.inner.c_star,
        sufficient_condition: sufficient,
    })
}

fn largest_stable(states: &[SteadyState]) -> Option<f64> {
    states
        .iter()
        .filter(|s| s.kind == Stability::Stable)
        .map(|s| s.k_star)
        .next_back()
}

fn first_unstable(states: &[SteadyState]) -> Option<f64> {
    states
        .iter()
        .find(|s| s.kind == Stability::Unstable)
        .map(|s| s.k_star)
}

/// Evaluate one-step crowd-out: does AI creation fall short of depreciation
/// at the human-only stable stock, and where does the AI economy settle
/// below it?
pub fn crowdout_check(
    grid: &GridSpec,
    refine_tol: f64,
    p: &ModelParams,
    opts: &SolverOptions,
) -> Result<CrowdoutReport> {
    let ho_states = find_steady_states(Environment::Ho, 0.0, grid, refine_tol, p, opts)?;
    let k_ho = largest_stable(&ho_states).ok_or_else(|| {
        Error::domain("human-only economy has no stable steady state in the scan window")
    })?;
    let h_ai = crate::dynamics::creation(k_ho, Environment::Ai, 0.0, p, opts)?;
    let lambda_k = p.shared.lambda * k_ho;
    let declines = h_ai < lambda_k;
    let k_ai_below = if declines {
        let ai_states = find_steady_states(Environment::Ai, 0.0, grid, refine_tol, p, opts)?;
        ai_states
            .iter()
            .filter(|s| s.k_star < k_ho)
            .map(|s| s.k_star)
            .next_back()
    } else {
        None
    };
    if declines && k_ai_below.is_none() {
        return Err(Error::domain(
            "creation declines at the human-only stock but no AI steady state below it was bracketed; widen the grid",
        ));
    }
    Ok(CrowdoutReport {
        k_ho,
        h_ai_at_kho: h_ai,
        lambda_k,
        declines,
        k_ai_below,
    })
}

/// The conversion requirement ratio at one stock: the basin shortfall
/// relative to the conversion leverage at private-resolution rate
/// `leverage_rho`.
fn eta_requirement(k: f64, phi0: f64, leverage_rho: f64, p: &ModelParams) -> f64 {
    let s = &p.shared;
    let shortfall = (s.lambda - phi0).max(0.0);
    let a_h = -(-leverage_rho * k).exp_m1();
    shortfall / (s.delta_inc * (1.0 - s.pi) * a_h / k)
}

/// Log-spaced grid on (k_lo, k_hi].
fn log_grid(k_lo: f64, k_hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (k_lo.ln(), k_hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

const ETA_GRID_LO: f64 = 1e-4;

fn critical_eta_with_rate(
    p: &ModelParams,
    grid_n: usize,
    opts: &SolverOptions,
    leverage_rho: f64,
) -> Result<ConversionReport> {
    if grid_n < 2 {
        return Err(Error::domain(format!(
            "conversion grid needs at least 2 points, got {grid_n}"
        )));
    }
    if leverage_rho <= 0.0 {
        return Err(Error::domain(format!(
            "conversion leverage needs a positive resolution rate, got {leverage_rho}"
        )));
    }
    let states = find_steady_states(Environment::Ai, 0.0, &GridSpec::default(), 1e-9, p, opts)?;
    let k_u = first_unstable(&states).ok_or_else(|| {
        Error::domain("AI economy has no unstable threshold at eta = 0; no basin to eliminate")
    })?;

    let ratios = log_grid(ETA_GRID_LO, k_u, grid_n)
        .into_par_iter()
        .map(|k| {
            let phi0 = crate::dynamics::creation(k, Environment::Ai, 0.0, p, opts)? / k;
            Ok((k, eta_requirement(k, phi0, leverage_rho, p)))
        })
        .collect::<Result<Vec<_>>>()?;

    let s = &p.shared;
    let shutdown = s.c_bar_cost > s.beta * s.delta_inc + s.u;
    let limit_ratio = if shutdown {
        s.lambda / (s.delta_inc * (1.0 - s.pi) * leverage_rho)
    } else {
        0.0
    };

    let (mut argmax_k, mut eta_bar) = (0.0, limit_ratio);
    for (k, r) in ratios {
        if r > eta_bar {
            eta_bar = r;
            argmax_k = k;
        }
    }
    Ok(ConversionReport {
        k_u,
        eta_bar,
        argmax_k,
        limit_ratio,
        feasible: eta_bar <= 1.0,
    })
}

/// Compute the critical conversion rate: the supremum over the threshold
/// region of the shortfall-to-leverage ratio, together with its analytic
/// K->0 limit. The limit term applies under empty-archive shutdown
/// (where average creation vanishes at the origin) and is zero otherwise.
pub fn critical_eta(
    p: &ModelParams,
    grid_n: usize,
    opts: &SolverOptions,
) -> Result<ConversionReport> {
    critical_eta_with_rate(p, grid_n, opts, p.ai.rho_h)
}

/// Probe for the threshold's dependence on conversion leverage: recompute
/// the critical rate holding the zero-conversion creation curve fixed while
/// the private-resolution rate behind the leverage term is replaced by
/// `rho`. Raising `rho` raises leverage pointwise, so the resulting
/// threshold is weakly lower.
pub fn critical_eta_leverage_probe(
    p: &ModelParams,
    grid_n: usize,
    opts: &SolverOptions,
    rho: f64,
) -> Result<ConversionReport> {
    critical_eta_with_rate(p, grid_n, opts, rho)
}

/// True when conversion at rate `eta` lifts average creation above
/// depreciation everywhere on the threshold region (0, K_U].
pub fn basin_eliminated(
    eta: f64,
    p: &ModelParams,
    grid_n: usize,
    opts: &SolverOptions,
) -> Result<bool> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::domain(format!(
            "conversion rate must lie in [0,1], got {eta}"
        )));
    }
    if grid_n < 2 {
        return Err(Error::domain(format!(
            "basin grid needs at least 2 points, got {grid_n}"
        )));
    }
    let states = find_steady_states(Environment::Ai, 0.0, &GridSpec::default(), 1e-9, p, opts)?;
    let k_u = first_unstable(&states).ok_or_else(|| {
        Error::domain("AI economy has no unstable threshold at eta = 0; no basin to eliminate")
    })?;
    let ok = log_grid(ETA_GRID_LO, k_u, grid_n)
        .into_par_iter()
        .map(|k| {
            let phi = crate::dynamics::creation(k, Environment::Ai, eta, p, opts)? / k;
            Ok(phi > p.shared.lambda)
        })
        .collect::<Result<Vec<bool>>>()?;
    Ok(ok.into_iter().all(|b| b))
}

fn sweep_row(
    run_id: usize,
    varied: Option<(&str, f64)>,
    p: &ModelParams,
    grid: &GridSpec,
    refine_tol: f64,
    opts: &SolverOptions,
) -> Result<SensitivityRow> {
    let mut params = p.clone();
    if let Some((name, value)) = varied {
        params.set_by_path(name, value)?;
        params.validate()?;
    }
    let ai_curve = phi_curve(Environment::Ai, 0.0, grid, &params, opts)?;
    let ai_states =
        crate::dynamics::steady_states_from_curve(&ai_curve, refine_tol, &params, opts)?;
    let unstable: Vec<f64> = ai_states
        .iter()
        .filter(|s| s.kind == Stability::Unstable)
        .map(|s| s.k_star)
        .collect();
    let stable: Vec<f64> = ai_states
        .iter()
        .filter(|s| s.kind == Stability::Stable)
        .map(|s| s.k_star)
        .collect();
    let ho_states = find_steady_states(Environment::Ho, 0.0, grid, refine_tol, &params, opts)?;
    Ok(SensitivityRow {
        run_id,
        varied_name: varied.map(|(n, _)| n.to_string()),
        varied_value: varied.map(|(_, v)| v),
        k_u_ai: unstable.first().copied(),
        k_h_ai: stable.last().copied(),
        peak_phi_ai: ai_curve.peak().map(|pt| pt.phi).unwrap_or(0.0),
        k_ho: largest_stable(&ho_states),
        two_crossings: unstable.len() == 1 && stable.len() == 1,
    })
}

/// Run a one-at-a-time sensitivity sweep. Every parameter path is validated
/// before any solve starts; rows come back in specification order.
pub fn sensitivity_sweep(
    sweep: &SweepSpec,
    p: &ModelParams,
    grid: &GridSpec,
    refine_tol: f64,
    opts: &SolverOptions,
) -> Result<Vec<SensitivityRow>> {
    // Reject unknown names up front.
    for (name, _) in &sweep.variations {
        let mut probe = p.clone();
        probe.set_by_path(name, 0.0)?;
    }
    let mut rows = Vec::new();
    let mut run_id = 0;
    if sweep.include_baseline {
        rows.push(sweep_row(run_id, None, p, grid, refine_tol, opts)?);
        run_id += 1;
    }
    for (name, values) in &sweep.variations {
        for &value in values {
            rows.push(sweep_row(
                run_id,
                Some((name.as_str(), value)),
                p,
                grid,
                refine_tol,
                opts,
            )?);
            run_id += 1;
        }
    }
    Ok(rows)
}
