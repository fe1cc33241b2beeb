//! Closed-form primitives of the parametric family.
//!
//! Everything here is a pointwise function of its arguments with no
//! equilibrium logic: outside options, the answering-cost shifter, private
//! resolution probabilities, the posting-cost and answering-cost
//! distributions, the ability distribution, the answering surplus, posting
//! semi-elasticities, and the ability-averaged failure integral.
//!
//! All functions are deterministic and pure; identical inputs produce
//! bit-identical outputs.

use crate::error::{Error, Result};
use crate::params::{Environment, ModelParams, QueryType};

/// Per-period outside option `alpha * (1 + gamma_w K) * (1 + pi delta_w)`:
/// strictly increasing in ability, nondecreasing in the archive stock.
pub fn outside_option(alpha: f64, k: f64, env: Environment, p: &ModelParams) -> Result<f64> {
    if alpha < 0.0 {
        return Err(Error::domain(format!("ability must be >= 0, got {alpha}")));
    }
    if k < 0.0 {
        return Err(Error::domain(format!(
            "archive stock must be >= 0, got {k}"
        )));
    }
    let e = p.env(env);
    Ok(alpha * (1.0 + e.gamma_w * k) * (1.0 + p.shared.pi * e.delta_w))
}

/// Answering cost shifter `C(K) = c_bar_cost / (1 + kappa K)`, strictly
/// decreasing in the archive stock.
pub fn cost_shift(k: f64, p: &ModelParams) -> Result<f64> {
    if k < 0.0 {
        return Err(Error::domain(format!(
            "archive stock must be >= 0, got {k}"
        )));
    }
    Ok(p.shared.c_bar_cost / (1.0 + p.shared.kappa * k))
}

/// Probability a type-theta query is resolved privately before posting:
/// `1 - exp(-rho_theta K)`, in [0,1), nondecreasing in K, with routine (L)
/// queries resolved weakly faster than knowledge-enhancing (H) ones.
pub fn private_resolution(
    theta: QueryType,
    k: f64,
    env: Environment,
    p: &ModelParams,
) -> Result<f64> {
    if k < 0.0 {
        return Err(Error::domain(format!(
            "archive stock must be >= 0, got {k}"
        )));
    }
    let e = p.env(env);
    let rate = match theta {
        QueryType::H => e.rho_h,
        QueryType::L => e.rho_l,
    };
    Ok(-(-rate * k).exp_m1())
}

/// Posting-cost CDF (exponential with mean `d_bar`) evaluated at a posting
/// benefit: the probability a privately unresolved query is escalated.
pub fn posting_cdf(x: f64, p: &ModelParams) -> Result<f64> {
    if x < 0.0 {
        return Err(Error::domain(format!(
            "posting benefit must be >= 0, got {x}"
        )));
    }
    Ok(-(-x / p.shared.d_bar).exp_m1())
}

/// Mass of agents at or below an ability cutoff under the uniform ability
/// distribution, clamped to \[0,1\]. Cutoffs outside the support are allowed.
pub fn ability_mass(alpha_star: f64, p: &ModelParams) -> f64 {
    let s = &p.shared;
    ((alpha_star - s.alpha_lo) / (s.alpha_hi - s.alpha_lo)).clamp(0.0, 1.0)
}

/// Answering-cost CDF: uniform on [0, c_bar_support], clamped outside.
pub fn answer_cdf(c: f64, p: &ModelParams) -> f64 {
    (c / p.shared.c_bar_support).clamp(0.0, 1.0)
}

/// Peak density of the answering-cost distribution (`1 / c_bar_support` for
/// the uniform family).
pub fn answer_peak_density(p: &ModelParams) -> f64 {
    1.0 / p.shared.c_bar_support
}

/// Expected surplus from a matched answering opportunity at cutoff `c_star`:
/// the truncated integral of (c_star - c) over the uniform cost draw, so
/// cutoffs above the support stay well-defined. Nonpositive cutoffs yield 0.
pub fn answer_surplus(c_star: f64, p: &ModelParams) -> f64 {
    let c_bar = p.shared.c_bar_support;
    if c_star <= 0.0 {
        0.0
    } else if c_star <= c_bar {
        c_star * c_star / (2.0 * c_bar)
    } else {
        c_star - c_bar / 2.0
    }
}

/// Posting semi-elasticity of type theta at resolution probability `sigma`:
/// `V_theta * gamma(sigma V_theta) / Gamma(sigma V_theta)` with the shared
/// exponential posting-cost distribution. Undefined at sigma <= 0.
pub fn semi_elasticity(theta: QueryType, sigma: f64, p: &ModelParams) -> Result<f64> {
    if sigma <= 0.0 {
        return Err(Error::domain(format!(
            "semi-elasticity needs sigma > 0, got {sigma}"
        )));
    }
    let v = match theta {
        QueryType::H => p.shared.v_h,
        QueryType::L => p.shared.v_l,
    };
    let x = sigma * v / p.shared.d_bar;
    Ok(v * (-x).exp() / (p.shared.d_bar * (-(-x).exp_m1())))
}

/// Ability-averaged private-failure probability
/// `int exp(-rate(alpha) K) dPsi(alpha)` over the uniform ability density,
/// by composite trapezoid with `nodes` quadrature nodes.
pub fn averaged_failure<F>(k: f64, rate_fn: F, nodes: usize, p: &ModelParams) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if nodes < 2 {
        return Err(Error::domain(format!(
            "quadrature needs at least 2 nodes, got {nodes}"
        )));
    }
    if k < 0.0 {
        return Err(Error::domain(format!(
            "archive stock must be >= 0, got {k}"
        )));
    }
    let (lo, hi) = (p.shared.alpha_lo, p.shared.alpha_hi);
    let n = nodes - 1;
    let mut acc = 0.0;
    for i in 0..=n {
        let alpha = lo + (hi - lo) * (i as f64) / (n as f64);
        let weight = if i == 0 || i == n { 0.5 } else { 1.0 };
        acc += weight * (-rate_fn(alpha) * k).exp();
    }
    // Trapezoid sum times dx, divided by the support width (uniform density).
    Ok(acc / n as f64)
}

/// Default ability-dependent resolution rate for `(theta, env)`: the
/// environment's base rate plus `rho_slope * alpha`. With the baseline
/// `rho_slope = 0` this reduces to the ability-independent rates.
pub fn default_ability_rate(
    theta: QueryType,
    env: Environment,
    p: &ModelParams,
) -> impl Fn(f64) -> f64 + '_ {
    let e = p.env(env);
    let base = match theta {
        QueryType::H => e.rho_h,
        QueryType::L => e.rho_l,
    };
    let slope = p.shared.rho_slope;
    move |alpha: f64| base + slope * alpha
}
