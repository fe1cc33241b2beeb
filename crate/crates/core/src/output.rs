//! Deterministic CSV emission. Every numeric is written with fixed
//! 12-significant-digit scientific formatting so repeated runs (and parallel
//! grid evaluation) produce byte-identical files.

use std::fmt::Write as _;

use crate::analysis::{
    ConversionReport, CrowdoutReport, MarginDecomposition, ResolutionFactors, SensitivityRow,
};
use crate::dynamics::{CreationCurve, SteadyState, Trajectory};
use crate::equilibrium::{CongestionSolution, PeriodEquilibrium};

/// Fixed 12-significant-digit rendering of a numeric cell.
pub fn fmt_sig(x: f64) -> String {
    format!("{x:.11e}")
}

pub fn curve_csv(curve: &CreationCurve) -> String {
    let mut out = String::from("k,h,phi\n");
    for pt in &curve.points {
        let _ = writeln!(
            out,
            "{},{},{}",
            fmt_sig(pt.k),
            fmt_sig(pt.h),
            fmt_sig(pt.phi)
        );
    }
    out
}

pub fn steady_csv(states: &[SteadyState]) -> String {
    let mut out = String::from("k_star,kind,residual\n");
    for st in states {
        let _ = writeln!(
            out,
            "{},{},{}",
            fmt_sig(st.k_star),
            st.kind.as_str(),
            fmt_sig(st.residual)
        );
    }
    out
}

pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::from("t,k\n");
    for (t, k) in traj.k_path.iter().enumerate() {
        let _ = writeln!(out, "{t},{}", fmt_sig(*k));
    }
    out
}

pub fn solve_csv(eq: &PeriodEquilibrium, eta: f64, h: f64) -> String {
    let mut out = String::from(
        "k,env,eta,alpha_star,pool,surplus,sigma,mu,c_star,q_l,q_h,q_total,omega,delta_bar,h,phi,collapsed,full_participation\n",
    );
    let phi = if eq.k > 0.0 { h / eq.k } else { 0.0 };
    let _ = writeln!(
        out,
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        fmt_sig(eq.k),
        eq.env,
        fmt_sig(eta),
        fmt_sig(eq.alpha_star),
        fmt_sig(eq.pool),
        fmt_sig(eq.surplus),
        fmt_sig(eq.inner.sigma),
        fmt_sig(eq.inner.mu),
        fmt_sig(eq.inner.c_star),
        fmt_sig(eq.inner.q_l),
        fmt_sig(eq.inner.q_h),
        fmt_sig(eq.inner.q_total),
        fmt_sig(eq.inner.omega),
        fmt_sig(eq.inner.delta_bar),
        fmt_sig(h),
        fmt_sig(phi),
        eq.collapsed,
        eq.full_participation
    );
    out
}

pub fn congestion_csv(sol: &CongestionSolution, t_life: u32) -> String {
    let mut out = String::from("t_life,mu,hazard,sigma_lifetime,stock\n");
    let _ = writeln!(
        out,
        "{},{},{},{},{}",
        t_life,
        fmt_sig(sol.mu),
        fmt_sig(sol.hazard),
        fmt_sig(sol.sigma_lifetime),
        fmt_sig(sol.stock)
    );
    out
}

pub fn decomposition_csv(d: &MarginDecomposition) -> String {
    let mut out =
        String::from("k_ref,q_ho,q_ai,s_ho,s_ai,d_q,d_s,flow_margin,resolution_margin,total\n");
    let _ = writeln!(
        out,
        "{},{},{},{},{},{},{},{},{},{}",
        fmt_sig(d.k_ref),
        fmt_sig(d.q_ho),
        fmt_sig(d.q_ai),
        fmt_sig(d.s_ho),
        fmt_sig(d.s_ai),
        fmt_sig(d.d_q),
        fmt_sig(d.d_s),
        fmt_sig(d.flow_margin),
        fmt_sig(d.resolution_margin),
        fmt_sig(d.total)
    );
    out
}

pub fn race_csv(r: &ResolutionFactors) -> String {
    let mut out = String::from(
        "k_ref,pool_ratio,composition_ratio,congestion_ratio,congested_ho,congested_ai,sigma_ratio,race_predicts_decline\n",
    );
    let _ = writeln!(
        out,
        "{},{},{},{},{},{},{},{}",
        fmt_sig(r.k_ref),
        fmt_sig(r.pool_ratio),
        fmt_sig(r.composition_ratio),
        fmt_sig(r.congestion_ratio),
        r.congested_ho,
        r.congested_ai,
        fmt_sig(r.sigma_ratio),
        r.race_predicts_decline()
    );
    out
}

pub fn eta_csv(r: &ConversionReport) -> String {
    let mut out = String::from("k_u,eta_bar,argmax_k,limit_ratio,feasible\n");
    let _ = writeln!(
        out,
        "{},{},{},{},{}",
        fmt_sig(r.k_u),
        fmt_sig(r.eta_bar),
        fmt_sig(r.argmax_k),
        fmt_sig(r.limit_ratio),
        r.feasible
    );
    out
}

pub fn crowdout_csv(r: &CrowdoutReport) -> String {
    let mut out = String::from("k_ho,h_ai_at_kho,lambda_k,declines,k_ai_below\n");
    let _ = writeln!(
        out,
        "{},{},{},{},{}",
        fmt_sig(r.k_ho),
        fmt_sig(r.h_ai_at_kho),
        fmt_sig(r.lambda_k),
        r.declines,
        r.k_ai_below.map(fmt_sig).unwrap_or_default()
    );
    out
}

pub fn sensitivity_csv(rows: &[SensitivityRow]) -> String {
    let mut out =
        String::from("run,parameter,value,k_u_ai,k_h_ai,peak_phi_ai,k_ho,two_crossings\n");
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            row.run_id,
            row.varied_name.as_deref().unwrap_or(""),
            row.varied_value.map(fmt_sig).unwrap_or_default(),
            row.k_u_ai.map(fmt_sig).unwrap_or_default(),
            row.k_h_ai.map(fmt_sig).unwrap_or_default(),
            fmt_sig(row.peak_phi_ai),
            row.k_ho.map(fmt_sig).unwrap_or_default(),
            row.two_crossings
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_sig(0.15), "1.50000000000e-1");
        assert_eq!(fmt_sig(2.6417), "2.64170000000e0");
        assert_eq!(fmt_sig(0.0), "0.00000000000e0");
        assert_eq!(fmt_sig(-1.0 / 3.0), "-3.33333333333e-1");
    }

    #[test]
    fn sensitivity_rows_render_empty_cells_for_baseline() {
        let rows = vec![crate::analysis::SensitivityRow {
            run_id: 0,
            varied_name: None,
            varied_value: None,
            k_u_ai: Some(0.15),
            k_h_ai: None,
            peak_phi_ai: 0.49,
            k_ho: Some(2.64),
            two_crossings: false,
        }];
        let csv = sensitivity_csv(&rows);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(
            lines[0],
            "run,parameter,value,k_u_ai,k_h_ai,peak_phi_ai,k_ho,two_crossings"
        );
        assert!(lines[1].starts_with("0,,,1.50000000000e-1,,"));
    }
}
