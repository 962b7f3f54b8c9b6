//! Dinkelbach outer loop around three KKT stages.
//!
//! Each outer iteration fixes the Dinkelbach parameter `γ_EE`, expands every
//! rate around the current allocation and maximizes the subtractive objective
//! `R̃_sum − γ_EE·P_T` in three stages: the base-station power `P`, the split
//! `(ξn, ξf)` and the relay power `P_r`. Every stage runs its dual loop and
//! turns the KKT stationary points into candidates. A primal recovery step
//! then scores the candidates, together with a bracketing search over the
//! stage variable, against the true QoS constraints and keeps the best one.
//! While scoring, the later stages are solved for each candidate of an
//! earlier one, so stages whose active constraints are shared cannot stall
//! each other.
//!
//! Internally every rate is in bits/s/Hz and `γ_EE` in bits/J/Hz.

mod search;
pub mod stages;

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sca::{approx_sum_rate, ScaPoint};
use crate::sysmodel::{
    check_constraints, energy_efficiency, total_power, ChannelState, FeasibilityReport, PowerAllocation, SystemParams,
};
pub use stages::{
    stage1_coefficients, stage1_lagrangian, stage1_subgradients, stage1_transmit_power, stage2_coefficients,
    stage2_lagrangian, stage2_pac, stage2_subgradients, stage3_lagrangian, stage3_relay_power, stage3_subgradients,
    stage3_zeta2, step_size, update_stage1_duals, update_stage2_duals, update_stage3_duals, CompositeGains,
    DualVariables, Stage1Coefficients, Stage2Coefficients,
};

/// Normalized rate margin kept on every QoS constraint so that returned
/// allocations pass the exact check despite rounding.
const RATE_MARGIN: f64 = 1e-12;

/// Smallest base-station power considered, in W.
const P_FLOOR_EXP: i32 = -32;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptError {
    #[error("invalid system parameter `{0}`")]
    InvalidParams(&'static str),
    #[error("channel gains must be finite and nonnegative")]
    InvalidChannel,
    #[error("{0}")]
    StageInfeasible(&'static str),
}

/// Tolerances and iteration caps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// Relative dual change that ends a stage's dual loop.
    pub tol_inner: f64,
    /// Dinkelbach residual, bits/s.
    pub epsilon_d: f64,
    pub max_outer: usize,
    /// Dual iterations per stage.
    pub max_inner: usize,
    /// Initial subgradient step.
    pub mu0: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self { tol_inner: 1e-4, epsilon_d: 1e-3, max_outer: 20, max_inner: 50, mu0: 0.1 }
    }
}

/// One outer iteration: the parameter used, and the approximated sum rate and
/// total power of the allocation it produced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    /// bits/J
    pub gamma_ee: f64,
    /// bits/s
    pub approx_sum_rate: f64,
    /// W
    pub total_power: f64,
}

impl TrajectoryPoint {
    /// `R̃_sum − γ_EE·P_T` in bits/s.
    pub fn residual(&self) -> f64 {
        self.approx_sum_rate - self.gamma_ee * self.total_power
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EeResult {
    pub allocation: PowerAllocation,
    /// Exact energy efficiency of `allocation`, bits/J.
    pub gamma_ee: f64,
    pub trajectory: Vec<TrajectoryPoint>,
    pub feasibility: FeasibilityReport,
    pub outer_iterations: usize,
    pub converged: bool,
}

/// The default starting point: `ξn = 0.3`, `ξf = 0.7`, 90% of the
/// power budget and half the relay budget.
pub fn initial_allocation(s: &SystemParams) -> PowerAllocation {
    let (xi_n, xi_f) = (0.3, 0.7);
    PowerAllocation { p: 0.9 * s.p_t / (xi_n + xi_f), xi_n, xi_f, p_r: 0.5 * s.p_r_max }
}

fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / LN_2
}

/// The problem at one channel realization, normalized by the bandwidth.
struct Problem<'a> {
    h: &'a ChannelState,
    s: &'a SystemParams,
    gn: f64,
    gf: f64,
    vphi: f64,
    n: f64,
    rmin: f64,
}

/// Normalized rates of one allocation without the relay link.
struct LinkRates {
    r1: f64,
    r2: f64,
    r_nf: f64,
}

impl<'a> Problem<'a> {
    fn new(h: &'a ChannelState, s: &'a SystemParams) -> Self {
        Self {
            h,
            s,
            gn: h.near_gain(s),
            gf: h.far_gain(s),
            vphi: h.relay_gain(s),
            n: s.noise_power_w,
            rmin: s.r_min / s.bandwidth_hz,
        }
    }

    fn link_rates(&self, p: f64, xi_n: f64, xi_f: f64) -> LinkRates {
        let g1 = p * xi_n * self.gn / (p * xi_f * self.gn * self.s.eta + self.n);
        let g2 = p * xi_f * self.gf / (p * xi_n * self.gf + self.n);
        let gnf = p * xi_f * self.gn / (p * xi_n * self.gn + self.n);
        LinkRates { r1: 0.5 * log2_1p(g1), r2: 0.5 * log2_1p(g2), r_nf: 0.5 * log2_1p(gnf) }
    }

    fn relay_power_for_rate(&self, r3: f64) -> f64 {
        (2.0 * r3 * LN_2).exp_m1() * self.n / self.vphi
    }

    /// Relay powers that meet C2, C3 and C5 with margin, or `None`.
    fn relay_interval(&self, l: &LinkRates) -> Option<(f64, f64)> {
        let lo_rate = (self.rmin + RATE_MARGIN - l.r2).max(0.0);
        let hi_rate = l.r_nf - l.r2 - RATE_MARGIN;
        if hi_rate < lo_rate {
            return None;
        }
        if self.vphi <= 0.0 {
            return (lo_rate == 0.0).then_some((0.0, 0.0));
        }
        let lo = self.relay_power_for_rate(lo_rate);
        let hi = self.relay_power_for_rate(hi_rate).min(self.s.p_r_max);
        (lo <= hi).then_some((lo, hi))
    }

    fn base_feasible(&self, p: f64, xi_n: f64, xi_f: f64, l: &LinkRates) -> bool {
        p > 0.0
            && xi_n >= 0.0
            && xi_f >= 0.0
            && xi_n + xi_f <= 1.0
            && p * (xi_n + xi_f) <= self.s.p_t
            && l.r1 >= self.rmin + RATE_MARGIN
    }

    /// Exact subtractive objective `R/W − γ·P_T` with the relay power supplied.
    fn objective_with(&self, p: f64, xi_n: f64, xi_f: f64, p_r: f64, l: &LinkRates, gamma: f64) -> Option<f64> {
        let r3 = 0.5 * log2_1p(p_r * self.vphi / self.n);
        let v = l.r1 + l.r2 + r3 - gamma * (p * (xi_n + xi_f) + p_r + self.s.p_c);
        v.is_finite().then_some(v)
    }

    /// Best relay power for the rest of the allocation: the concave objective's
    /// stationary point, projected onto the feasible interval.
    fn relay_response(&self, l: &LinkRates, gamma: f64) -> Option<f64> {
        let (lo, hi) = self.relay_interval(l)?;
        if self.vphi <= 0.0 {
            return Some(lo);
        }
        let stat = if gamma > 0.0 { 1.0 / (2.0 * LN_2 * gamma) - self.n / self.vphi } else { hi };
        Some(stat.clamp(lo, hi))
    }

    /// Objective of `(P, ξn, 1−ξn)` with the relay power at its response.
    fn score_split(&self, p: f64, xi_n: f64, gamma: f64) -> Option<(f64, f64)> {
        let xi_f = 1.0 - xi_n;
        let l = self.link_rates(p, xi_n, xi_f);
        if !self.base_feasible(p, xi_n, xi_f, &l) {
            return None;
        }
        let p_r = self.relay_response(&l, gamma)?;
        self.objective_with(p, xi_n, xi_f, p_r, &l, gamma).map(|v| (v, p_r))
    }

    /// Best split for a fixed `P`, searched over `ξn ∈ (0,1)` with the probes in `extra`.
    fn best_split(&self, p: f64, gamma: f64, extra: &[f64]) -> Option<(f64, f64, f64)> {
        let mut f = |x: f64| self.score_split(p, x, gamma).map(|(v, _)| v);
        let b = search::maximize(&mut f, &XI_GRID, extra)?;
        let (v, p_r) = self.score_split(p, b.x, gamma)?;
        Some((v, b.x, p_r))
    }

    /// Best `P` with the split and relay power solved for each probe.
    fn best_power(&self, gamma: f64, p_extra: &[f64], xi_extra: &[f64]) -> Option<(f64, PowerAllocation)> {
        let top = self.s.p_t.ln();
        let mut grid: Vec<f64> =
            (P_FLOOR_EXP..=0).map(|k| k as f64 * 0.5 * std::f64::consts::LN_10).filter(|&u| u < top).collect();
        grid.push(top);
        let extra: Vec<f64> = p_extra.iter().filter(|&&p| p > 0.0).map(|p| p.ln()).collect();
        let mut f = |u: f64| self.best_split(u.exp(), gamma, xi_extra).map(|(v, _, _)| v);
        let b = search::maximize(&mut f, &grid, &extra)?;
        let p = b.x.exp();
        let (v, xi_n, p_r) = self.best_split(p, gamma, xi_extra)?;
        Some((v, PowerAllocation { p, xi_n, xi_f: 1.0 - xi_n, p_r }))
    }

    fn objective(&self, a: &PowerAllocation, gamma: f64) -> Option<f64> {
        let l = self.link_rates(a.p, a.xi_n, a.xi_f);
        if !self.base_feasible(a.p, a.xi_n, a.xi_f, &l) {
            return None;
        }
        let (lo, hi) = self.relay_interval(&l)?;
        if !(lo..=hi).contains(&a.p_r) {
            return None;
        }
        self.objective_with(a.p, a.xi_n, a.xi_f, a.p_r, &l, gamma)
    }

    /// Coarse grid search for a feasible start, maximizing the exact efficiency.
    fn restore(&self) -> Option<PowerAllocation> {
        let mut best: Option<(f64, PowerAllocation)> = None;
        let mut ps: Vec<f64> = (-16..=0).map(|k| 10f64.powi(k)).filter(|&p| p < self.s.p_t).collect();
        ps.push(self.s.p_t);
        for &p in &ps {
            for i in 1..20 {
                let xi_n = i as f64 * 0.05;
                let xi_f = 1.0 - xi_n;
                let l = self.link_rates(p, xi_n, xi_f);
                if !self.base_feasible(p, xi_n, xi_f, &l) {
                    continue;
                }
                let Some((lo, hi)) = self.relay_interval(&l) else { continue };
                let a = PowerAllocation { p, xi_n, xi_f, p_r: 0.5 * (lo + hi) };
                let ee = energy_efficiency(&a, self.h, self.s);
                if best.is_none_or(|(b, _)| ee > b) {
                    best = Some((ee, a));
                }
            }
        }
        best.map(|(_, a)| a)
    }

    fn feasible(&self, a: &PowerAllocation) -> bool {
        let l = self.link_rates(a.p, a.xi_n, a.xi_f);
        self.base_feasible(a.p, a.xi_n, a.xi_f, &l)
            && self.relay_interval(&l).is_some_and(|(lo, hi)| (lo..=hi).contains(&a.p_r))
    }
}

/// Probe grid for `ξn`.
const XI_GRID: [f64; 15] = [0.01, 0.03, 0.06, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.94, 0.97, 0.99];

fn dual_change(a: &[f64], b: &[f64]) -> (f64, f64) {
    let d = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let n = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    (d, n)
}

fn push_unique(v: &mut Vec<f64>, x: f64) {
    if x.is_finite() && !v.contains(&x) {
        v.push(x);
    }
}

/// Stage 1 dual loop; returns the stationary powers it visited.
fn stage1_candidates(
    h: &ChannelState,
    s: &SystemParams,
    cur: &PowerAllocation,
    sca: &ScaPoint,
    gamma_ee: f64,
    cfg: &OptimizerConfig,
) -> Vec<f64> {
    let mut duals = DualVariables::default();
    let mut out = Vec::new();
    for l in 1..=cfg.max_inner {
        let Ok(p) = stage1_transmit_power(h, s, cur.xi_n, cur.xi_f, cur.p_r, &duals, gamma_ee, sca) else { break };
        push_unique(&mut out, p);
        let trial = PowerAllocation { p, ..*cur };
        let next = update_stage1_duals(&duals, h, s, &trial, sca, step_size(cfg.mu0, l));
        let (d, n) = dual_change(&next.lambda, &duals.lambda);
        duals = next;
        if d <= cfg.tol_inner * (1.0 + n) || !d.is_finite() {
            break;
        }
    }
    out
}

fn stage2_candidates(
    h: &ChannelState,
    s: &SystemParams,
    cur: &PowerAllocation,
    sca: &ScaPoint,
    gamma_ee: f64,
    cfg: &OptimizerConfig,
) -> Vec<f64> {
    let mut duals = DualVariables::default();
    let mut out = Vec::new();
    for l in 1..=cfg.max_inner {
        let Ok((xi_n, xi_f)) = stage2_pac(h, s, cur.p, cur.xi_f, cur.p_r, &duals, gamma_ee, sca) else { break };
        push_unique(&mut out, xi_n);
        let trial = PowerAllocation { xi_n, xi_f, ..*cur };
        let next = update_stage2_duals(&duals, h, s, &trial, sca, step_size(cfg.mu0, l));
        let (d, n) = dual_change(&next.gamma_t, &duals.gamma_t);
        duals = next;
        if d <= cfg.tol_inner * (1.0 + n) || !d.is_finite() {
            break;
        }
    }
    out
}

fn stage3_candidates(
    h: &ChannelState,
    s: &SystemParams,
    cur: &PowerAllocation,
    sca: &ScaPoint,
    gamma_ee: f64,
    cfg: &OptimizerConfig,
) -> Vec<f64> {
    let mut duals = DualVariables::default();
    let mut out = Vec::new();
    for l in 1..=cfg.max_inner {
        let p_r = stage3_relay_power(h, s, &duals, gamma_ee, sca);
        push_unique(&mut out, p_r);
        let trial = PowerAllocation { p_r, ..*cur };
        let next = update_stage3_duals(&duals, h, s, &trial, sca, step_size(cfg.mu0, l));
        let (d, n) = dual_change(&next.upsilon, &duals.upsilon);
        duals = next;
        if d <= cfg.tol_inner * (1.0 + n) || !d.is_finite() {
            break;
        }
    }
    out
}

/// Maximizes the energy efficiency of one channel realization.
pub fn alternating_optimize(h: &ChannelState, s: &SystemParams, cfg: &OptimizerConfig) -> Result<EeResult, OptError> {
    s.validate().map_err(OptError::InvalidParams)?;
    if !h.is_valid() {
        return Err(OptError::InvalidChannel);
    }
    let w = s.bandwidth_hz;
    let prob = Problem::new(h, s);
    let init = initial_allocation(s);
    let start = if prob.feasible(&init) { Some(init) } else { prob.restore() };
    let Some(mut x) = start else {
        return Ok(EeResult {
            allocation: init,
            gamma_ee: energy_efficiency(&init, h, s),
            trajectory: Vec::new(),
            feasibility: check_constraints(&init, h, s),
            outer_iterations: 0,
            converged: false,
        });
    };

    let mut gamma = energy_efficiency(&x, h, s) / w;
    let mut trajectory = Vec::new();
    let mut converged = false;
    for _ in 0..cfg.max_outer {
        let sca = ScaPoint::at(&x, h, s);
        let gamma_ee = gamma * w;
        let mut cur = x;
        let mut cur_v = prob.objective(&cur, gamma).unwrap_or(f64::NEG_INFINITY);

        // Stage 1: P, with the split and relay power solved per probe.
        let p_cands = stage1_candidates(h, s, &cur, &sca, gamma_ee, cfg);
        let xi_cands = stage2_candidates(h, s, &cur, &sca, gamma_ee, cfg);
        let mut p_extra = p_cands;
        push_unique(&mut p_extra, cur.p);
        let mut xi_extra = xi_cands;
        push_unique(&mut xi_extra, cur.xi_n);
        if let Some((v, a)) = prob.best_power(gamma, &p_extra, &xi_extra) {
            if v > cur_v {
                (cur, cur_v) = (a, v);
            }
        }

        // Stage 2: the split at the new P.
        let mut xi_extra = stage2_candidates(h, s, &cur, &sca, gamma_ee, cfg);
        push_unique(&mut xi_extra, cur.xi_n);
        if let Some((v, xi_n, p_r)) = prob.best_split(cur.p, gamma, &xi_extra) {
            if v > cur_v {
                cur = PowerAllocation { xi_n, xi_f: 1.0 - xi_n, p_r, ..cur };
                cur_v = v;
            }
        }

        // Stage 3: the relay power, KKT points projected onto the feasible interval.
        let l = prob.link_rates(cur.p, cur.xi_n, cur.xi_f);
        if let Some((lo, hi)) = prob.relay_interval(&l) {
            let mut cands = stage3_candidates(h, s, &cur, &sca, gamma_ee, cfg);
            if let Some(r) = prob.relay_response(&l, gamma) {
                cands.push(r);
            }
            for p_r in cands {
                let p_r = p_r.clamp(lo, hi);
                if let Some(v) = prob.objective_with(cur.p, cur.xi_n, cur.xi_f, p_r, &l, gamma) {
                    if v > cur_v {
                        cur.p_r = p_r;
                        cur_v = v;
                    }
                }
            }
        }

        x = cur;
        let p_t = total_power(&x, s);
        let approx = approx_sum_rate(&x, h, s, &sca).unwrap_or(f64::NEG_INFINITY);
        let point = TrajectoryPoint { gamma_ee, approx_sum_rate: approx, total_power: p_t };
        trajectory.push(point);
        // Both the exact and the approximated root condition must close.
        if cur_v * w < cfg.epsilon_d && point.residual().abs() < cfg.epsilon_d {
            converged = true;
            break;
        }
        gamma = gamma.max(energy_efficiency(&x, h, s) / w);
    }

    Ok(EeResult {
        allocation: x,
        gamma_ee: energy_efficiency(&x, h, s),
        outer_iterations: trajectory.len(),
        trajectory,
        feasibility: check_constraints(&x, h, s),
        converged,
    })
}

#[cfg(test)]
mod tests;
