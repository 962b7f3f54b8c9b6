//! The three KKT stages and their projected subgradient dual updates.
//!
//! Everything here works in bandwidth-normalized units: rates are in
//! bits/s/Hz and the Dinkelbach parameter is `γ_EE / W` in bits/J/Hz. Public
//! entry points take `γ_EE` in bits/J and divide by `W` themselves.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use super::OptError;
use crate::polyroots::{real_roots, Polynomial};
use crate::sca::{Bound, ScaPoint};
use crate::sysmodel::{ChannelState, PowerAllocation, SystemParams};

const TWO_LN2: f64 = 2.0 * LN_2;

/// Relative residual below which a polynomial root is accepted.
pub const ROOT_TOL: f64 = 1e-6;

/// Multiplier times bracket, with a zero multiplier silencing an infinite bracket.
fn term(mult: f64, bracket: f64) -> f64 {
    if mult == 0.0 {
        0.0
    } else {
        mult * bracket
    }
}

/// `½(Φ log₂γ + Ψ)`; an absent link contributes zero.
fn half_rate(b: &Bound, gamma: f64) -> f64 {
    0.5 * b.eval_or_neg_inf(gamma)
}

fn log2_or_zero(b: &Bound, gamma: f64) -> f64 {
    if b.is_absent() {
        0.0
    } else {
        gamma.log2()
    }
}

/// Lagrange multipliers of all three stages, kept nonnegative.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DualVariables {
    /// Stage 1: C1, C2, C3, C4.
    pub lambda: [f64; 4],
    /// Stage 2: C1, C2, C3, C4, C6.
    pub gamma_t: [f64; 5],
    /// Stage 3: C2, C3, C5.
    pub upsilon: [f64; 3],
}

/// Diminishing step `μ(l) = μ₀/√l`.
pub fn step_size(mu0: f64, l: usize) -> f64 {
    mu0 / (l.max(1) as f64).sqrt()
}

fn project(old: &[f64], grad: &[f64], step: f64) -> Vec<f64> {
    old.iter().zip(grad).map(|(l, g)| (l - step * g).max(0.0)).collect()
}

/// Products of power fractions and gains that recur in every stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompositeGains {
    /// `ξn·G_n`, near user's own signal.
    pub theta: f64,
    /// `ξf·η·G_n`, SIC residual at the near user.
    pub big_theta: f64,
    /// `ξf·G_f`, far user's signal through the tag.
    pub gamma_c: f64,
    /// `ξn·G_f`, interference at the far user.
    pub delta_c: f64,
    /// `ξf·G_n`, far signal at the near user.
    pub epsilon_c: f64,
    /// `ξn·G_n`, interference when the near user decodes the far signal.
    pub delta_s: f64,
    /// `φᵥ = h_nf + h_nb·h_bf·ψⱼ`.
    pub varphi: f64,
    /// `Π = ξn + ξf`.
    pub pi_sum: f64,
    /// Noise power `σ²`.
    pub n: f64,
}

impl CompositeGains {
    pub fn of(xi_n: f64, xi_f: f64, h: &ChannelState, s: &SystemParams) -> Self {
        let gn = h.near_gain(s);
        let gf = h.far_gain(s);
        Self {
            theta: xi_n * gn,
            big_theta: xi_f * s.eta * gn,
            gamma_c: xi_f * gf,
            delta_c: xi_n * gf,
            epsilon_c: xi_f * gn,
            delta_s: xi_n * gn,
            varphi: h.relay_gain(s),
            pi_sum: xi_n + xi_f,
            n: s.noise_power_w,
        }
    }
}

/// `ω = ½(Φ₃ log₂(P_r φᵥ/σ²) + Ψ₃)`, the approximated slot-2 rate.
fn omega(p_r: f64, h: &ChannelState, s: &SystemParams, sca: &ScaPoint) -> f64 {
    half_rate(&sca.b3, p_r * h.relay_gain(s) / s.noise_power_w)
}

/// `2^((2R_min − Ψ₁)/Φ₁)`, the SINR target of C1.
fn c1_target(s: &SystemParams, sca: &ScaPoint) -> f64 {
    ((2.0 * s.r_min / s.bandwidth_hz - sca.b1.psi) / sca.b1.phi).exp2()
}

/// `2^((2R_min − 2ω − Ψ₂)/Φ₂)`, the slot-1 SINR target of C2.
fn c2_target(s: &SystemParams, sca: &ScaPoint, omega: f64) -> f64 {
    ((2.0 * s.r_min / s.bandwidth_hz - 2.0 * omega - sca.b2.psi) / sca.b2.phi).exp2()
}

// ---------------------------------------------------------------- stage 1

/// Coefficients of the stage-1 stationarity condition and its quintic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stage1Coefficients {
    pub phi: f64,
    pub tau: f64,
    pub phi1: f64,
    pub alpha: f64,
    pub beta: f64,
    pub n1: f64,
    pub n2: f64,
    pub n3: f64,
    pub zeta: f64,
    /// `Λ₀ … Λ₅`, ascending.
    pub lambda_coeffs: [f64; 6],
    pub n: f64,
    pub cap_phi1: f64,
    pub cap_phi2: f64,
    pub lambda3: f64,
}

impl Stage1Coefficients {
    pub fn quintic(&self) -> Polynomial {
        Polynomial::new(self.lambda_coeffs.to_vec())
    }

    /// The same polynomial assembled by multiplying out the cleared denominators,
    /// kept as an independent cross-check of the closed forms.
    pub fn quintic_by_product(&self) -> Polynomial {
        let d1 = Polynomial::linear(self.tau, self.phi);
        let d2 = Polynomial::linear(self.tau, self.phi1);
        let d3 = Polynomial::new(vec![self.n3, self.n2, self.n1]);
        let p = Polynomial::linear(0.0, 1.0);
        let t1 = (&d2 * &d3).scale(self.n * self.cap_phi1);
        let t2 = (&d1 * &d3).scale(self.n * self.cap_phi2);
        let t3 = &(&Polynomial::linear(self.beta, self.alpha) * &d1) * &d2;
        let t4 = &(&(&p * &d1) * &d2) * &d3;
        &(&(&t1 + &t2) + &t3.scale(self.lambda3)) + &t4.scale(self.zeta)
    }

    /// Left-hand side of the stationarity condition before clearing denominators.
    pub fn stationarity(&self, p: f64) -> f64 {
        let a = if self.cap_phi1 == 0.0 { 0.0 } else { self.n * self.cap_phi1 / (p * p * self.phi + p * self.tau) };
        let b = if self.cap_phi2 == 0.0 { 0.0 } else { self.n * self.cap_phi2 / (p * p * self.phi1 + p * self.tau) };
        let c =
            term(self.lambda3, (p * self.alpha + self.beta) / (p.powi(3) * self.n1 + p * p * self.n2 + p * self.n3));
        a + b + c + self.zeta
    }
}

/// Builds the stage-1 coefficients for fixed `(ξn, ξf, P_r)`.
#[allow(clippy::too_many_arguments)]
pub fn stage1_coefficients(
    h: &ChannelState,
    s: &SystemParams,
    xi_n: f64,
    xi_f: f64,
    p_r: f64,
    duals: &DualVariables,
    gamma_ee: f64,
    sca: &ScaPoint,
) -> Stage1Coefficients {
    let g = CompositeGains::of(xi_n, xi_f, h, s);
    let gamma = gamma_ee / s.bandwidth_hz;
    let n = g.n;
    let [l1, l2, l3, l4] = duals.lambda;
    let (cp1, cp2, cpnf) = (sca.b1.phi, sca.b2.phi, sca.bnf.phi);
    let phi = g.big_theta * TWO_LN2;
    let tau = n * TWO_LN2;
    let phi1 = g.delta_c * TWO_LN2;
    let alpha = n * g.delta_c * cpnf - n * g.delta_s * cp2;
    let beta = n * n * (cpnf - cp2);
    let n1 = TWO_LN2 * g.delta_s * g.delta_c;
    let n2 = n * TWO_LN2 * (g.delta_s + g.delta_c);
    let n3 = n * n * TWO_LN2;
    let w = omega(p_r, h, s, sca);
    let z1 = if l1 == 0.0 { 0.0 } else { l1 * (g.theta - c1_target(s, sca) * g.big_theta) };
    let z2 = if l2 == 0.0 || sca.b2.is_absent() { 0.0 } else { l2 * (g.gamma_c - c2_target(s, sca, w) * g.delta_c) };
    let zeta = z1 + z2 - l4 * g.pi_sum - gamma * g.pi_sum;
    let sp = phi + phi1;
    let lambda_coeffs = [
        n * cp1 * tau * n3 + n * cp2 * tau * n3 + l3 * beta * tau * tau,
        n * cp1 * (phi1 * n3 + tau * n2)
            + n * cp2 * (phi * n3 + tau * n2)
            + l3 * (alpha * tau * tau + beta * tau * sp)
            + zeta * tau * tau * n3,
        n * cp1 * (phi1 * n2 + tau * n1)
            + n * cp2 * (phi * n2 + tau * n1)
            + l3 * (alpha * tau * sp + beta * phi * phi1)
            + zeta * (tau * sp * n3 + tau * tau * n2),
        n * cp1 * phi1 * n1
            + n * cp2 * phi * n1
            + l3 * alpha * phi * phi1
            + zeta * (phi * phi1 * n3 + tau * sp * n2 + tau * tau * n1),
        zeta * (phi * phi1 * n2 + tau * sp * n1),
        zeta * phi * phi1 * n1,
    ];
    Stage1Coefficients {
        phi,
        tau,
        phi1,
        alpha,
        beta,
        n1,
        n2,
        n3,
        zeta,
        lambda_coeffs,
        n,
        cap_phi1: cp1,
        cap_phi2: cp2,
        lambda3: l3,
    }
}

/// Stage-1 Lagrangian in normalized units, as a function of `P`.
#[allow(clippy::too_many_arguments)]
pub fn stage1_lagrangian(
    p: f64,
    h: &ChannelState,
    s: &SystemParams,
    xi_n: f64,
    xi_f: f64,
    p_r: f64,
    duals: &DualVariables,
    gamma_ee: f64,
    sca: &ScaPoint,
) -> f64 {
    let g = CompositeGains::of(xi_n, xi_f, h, s);
    let gamma = gamma_ee / s.bandwidth_hz;
    let n = g.n;
    let [l1, l2, l3, l4] = duals.lambda;
    let g1 = p * g.theta / (p * g.big_theta + n);
    let g2 = p * g.gamma_c / (p * g.delta_c + n);
    let gnf = p * g.epsilon_c / (p * g.delta_s + n);
    let w = omega(p_r, h, s, sca);
    let rates = half_rate(&sca.b1, g1) + half_rate(&sca.b2, g2) + w;
    let cost = gamma * (p * g.pi_sum + p_r + s.p_c);
    let c1 = term(l1, p * g.theta - c1_target(s, sca) * (p * g.big_theta + n));
    let c2 =
        if sca.b2.is_absent() { 0.0 } else { term(l2, p * g.gamma_c - c2_target(s, sca, w) * (p * g.delta_c + n)) };
    let c3 = term(
        l3,
        0.5 * (sca.bnf.phi * log2_or_zero(&sca.bnf, gnf)
            - sca.b2.phi * log2_or_zero(&sca.b2, g2)
            - (2.0 * w + sca.b2.psi - sca.bnf.psi)),
    );
    let c4 = l4 * (s.p_t - p * g.pi_sum);
    rates - cost + c1 + c2 + c3 + c4
}

/// Solves the stage-1 quintic and returns the Lagrangian-maximizing candidate
/// among its real roots in `(0, P_t/Π]` and the budget `P_t/Π` itself.
#[allow(clippy::too_many_arguments)]
pub fn stage1_transmit_power(
    h: &ChannelState,
    s: &SystemParams,
    xi_n: f64,
    xi_f: f64,
    p_r: f64,
    duals: &DualVariables,
    gamma_ee: f64,
    sca: &ScaPoint,
) -> Result<f64, OptError> {
    let pi = xi_n + xi_f;
    if !(pi > 0.0) {
        return Err(OptError::StageInfeasible("stage 1 needs ξn + ξf > 0"));
    }
    let hi = s.p_t / pi;
    let c = stage1_coefficients(h, s, xi_n, xi_f, p_r, duals, gamma_ee, sca);
    let roots = real_roots(&c.quintic(), ROOT_TOL).unwrap_or_default();
    let lag = |p: f64| stage1_lagrangian(p, h, s, xi_n, xi_f, p_r, duals, gamma_ee, sca);
    let best = roots
        .into_iter()
        .filter(|&r| r > 0.0 && r <= hi)
        .chain(std::iter::once(hi))
        .map(|p| (lag(p), p))
        .filter(|(v, _)| !v.is_nan())
        .max_by(|a, b| a.0.total_cmp(&b.0));
    match best {
        Some((v, p)) if v > f64::NEG_INFINITY && p.is_finite() => Ok(p),
        _ => Err(OptError::StageInfeasible("stage 1 has no finite candidate")),
    }
}

/// The four stage-1 subgradients, transcribed term by term.
pub fn stage1_subgradients(h: &ChannelState, s: &SystemParams, a: &PowerAllocation, sca: &ScaPoint) -> [f64; 4] {
    let gn = h.near_gain(s);
    let gf = h.far_gain(s);
    let n = s.noise_power_w;
    let rmin = s.r_min / s.bandwidth_hz;
    let (p2, p3) = (sca.b2.phi, sca.b3.phi);
    let pow_or_zero = |x: f64, e: f64, absent: bool| if absent { 0.0 } else { x.powf(e) };
    let signal = pow_or_zero(a.p * a.xi_f * gf, p2, sca.b2.is_absent());
    let interf = (a.p * a.xi_n * gf + n).powf(p2);
    let relay = pow_or_zero(a.p_r * h.relay_gain(s), p3, sca.b3.is_absent());
    let n_p3 = n.powf(p3);
    let achieved = signal * n_p3 + relay * interf;
    let g1 = a.xi_n * a.p * gn - c1_target(s, sca) * (a.xi_f * a.p * s.eta * gn + n);
    let g2 = achieved - (2.0 * rmin - sca.b2.psi - sca.b3.psi).exp2() * n_p3 * interf;
    let gnf = crate::sysmodel::sinr_near_decodes_far(a, h, s);
    let two_r_nf = gnf.ln_1p() / LN_2;
    let g3 = (two_r_nf - sca.b2.psi - sca.b3.psi).exp2() * n_p3 * interf - achieved;
    let g4 = s.p_t - a.p * a.pi_sum();
    [g1, g2, g3, g4]
}

/// One projected subgradient step on `λ₁ … λ₄`.
pub fn update_stage1_duals(
    duals: &DualVariables,
    h: &ChannelState,
    s: &SystemParams,
    a: &PowerAllocation,
    sca: &ScaPoint,
    step: f64,
) -> DualVariables {
    let g = stage1_subgradients(h, s, a, sca);
    let mut out = *duals;
    out.lambda.copy_from_slice(&project(&duals.lambda, &g, step));
    out
}

// ---------------------------------------------------------------- stage 2

/// Coefficients of the stage-2 quartic in `ξn`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stage2Coefficients {
    pub phi2: f64,
    pub phi3: f64,
    pub phi4: f64,
    pub n4: f64,
    pub alpha1: f64,
    pub beta1: f64,
    pub zeta1: f64,
    /// `π₀ … π₄`, ascending.
    pub pi_coeffs: [f64; 5],
    pub tau: f64,
    pub n1: f64,
    pub gamma_1: f64,
    pub cap_phi1: f64,
    pub cap_phi2: f64,
    pub gamma_t3: f64,
}

impl Stage2Coefficients {
    pub fn quartic(&self) -> Polynomial {
        Polynomial::new(self.pi_coeffs.to_vec())
    }

    /// Independent expansion of the cleared stationarity condition.
    pub fn quartic_by_product(&self) -> Polynomial {
        let x = Polynomial::linear(0.0, 1.0);
        let lin = Polynomial::linear(self.tau, self.phi2);
        let q = Polynomial::new(vec![self.n4, self.phi4, self.phi3]);
        let t1 = (&lin * &q).scale(self.cap_phi1);
        let t2 = (&x * &q).scale(-self.n1 * self.cap_phi2 * self.gamma_1);
        let t3 = (&(&x * &lin) * &Polynomial::linear(self.beta1, self.alpha1)).scale(self.gamma_t3 * self.n1);
        let t4 = (&(&x * &lin) * &q).scale(self.zeta1 * self.n1);
        &(&(&t1 + &t2) + &t3) + &t4
    }

    /// Stationarity of the stage-2 Lagrangian in `ξn` before clearing denominators.
    pub fn stationarity(&self, xi: f64) -> f64 {
        let q = xi * xi * self.phi3 + xi * self.phi4 + self.n4;
        self.cap_phi1 / (self.n1 * xi) - self.cap_phi2 * self.gamma_1 / (xi * self.phi2 + self.tau)
            + term(self.gamma_t3, (xi * self.alpha1 + self.beta1) / q)
            + self.zeta1
    }
}

/// Builds the stage-2 coefficients for fixed `P`, `P_r` and the far fraction held at `xi_f`.
#[allow(clippy::too_many_arguments)]
pub fn stage2_coefficients(
    h: &ChannelState,
    s: &SystemParams,
    p: f64,
    xi_f: f64,
    p_r: f64,
    duals: &DualVariables,
    gamma_ee: f64,
    sca: &ScaPoint,
) -> Stage2Coefficients {
    let _ = xi_f;
    let gamma = gamma_ee / s.bandwidth_hz;
    let n = s.noise_power_w;
    let theta1 = p * h.near_gain(s);
    let gamma_1 = p * h.far_gain(s);
    let [t1, t2, t3, t4, t5] = duals.gamma_t;
    let (cp1, cp2, cpnf) = (sca.b1.phi, sca.b2.phi, sca.bnf.phi);
    let n1 = TWO_LN2;
    let tau = n * TWO_LN2;
    let phi2 = gamma_1 * TWO_LN2;
    let phi3 = gamma_1 * theta1 * TWO_LN2 * TWO_LN2;
    let phi4 = (gamma_1 + theta1) * n * TWO_LN2 * TWO_LN2;
    let n4 = tau * tau;
    let alpha1 = gamma_1 * theta1 * TWO_LN2 * (cp2 - cpnf);
    let beta1 = n * TWO_LN2 * (cp2 * gamma_1 - cpnf * theta1);
    let w = omega(p_r, h, s, sca);
    let c2 = if t2 == 0.0 || sca.b2.is_absent() { 0.0 } else { t2 * gamma_1 * c2_target(s, sca, w) };
    let zeta1 = t1 * theta1 - c2 - t4 * p - t5 - gamma * p;
    let pi_coeffs = [
        n4 * cp1 * tau,
        n1 * n4 * tau * zeta1 + n4 * cp1 * phi2 + cp1 * phi4 * tau + n1 * tau * beta1 * t3 - n1 * n4 * cp2 * gamma_1,
        n1 * n4 * phi2 * zeta1
            + n1 * phi4 * tau * zeta1
            + cp1 * phi2 * phi4
            + cp1 * phi3 * tau
            + n1 * tau * alpha1 * t3
            + n1 * phi2 * beta1 * t3
            - n1 * cp2 * gamma_1 * phi4,
        phi2 * phi4 * n1 * zeta1 + phi3 * tau * n1 * zeta1 + cp1 * phi2 * phi3 + n1 * phi2 * alpha1 * t3
            - n1 * cp2 * gamma_1 * phi3,
        phi2 * phi3 * n1 * zeta1,
    ];
    Stage2Coefficients {
        phi2,
        phi3,
        phi4,
        n4,
        alpha1,
        beta1,
        zeta1,
        pi_coeffs,
        tau,
        n1,
        gamma_1,
        cap_phi1: cp1,
        cap_phi2: cp2,
        gamma_t3: t3,
    }
}

/// Stage-2 Lagrangian as a function of `ξn`, with the far fraction held at `xi_f`.
#[allow(clippy::too_many_arguments)]
pub fn stage2_lagrangian(
    xi_n: f64,
    h: &ChannelState,
    s: &SystemParams,
    p: f64,
    xi_f: f64,
    p_r: f64,
    duals: &DualVariables,
    gamma_ee: f64,
    sca: &ScaPoint,
) -> f64 {
    let gamma = gamma_ee / s.bandwidth_hz;
    let n = s.noise_power_w;
    let theta1 = p * h.near_gain(s);
    let big_theta1 = theta1 * s.eta;
    let gamma_1 = p * h.far_gain(s);
    let [t1, t2, t3, t4, t5] = duals.gamma_t;
    let g1 = xi_n * theta1 / (xi_f * big_theta1 + n);
    let g2 = xi_f * gamma_1 / (xi_n * gamma_1 + n);
    let gnf = xi_f * theta1 / (xi_n * theta1 + n);
    let w = omega(p_r, h, s, sca);
    let rates = half_rate(&sca.b1, g1) + half_rate(&sca.b2, g2) + w;
    let cost = gamma * (p * (xi_n + xi_f) + p_r + s.p_c);
    let c1 = term(t1, xi_n * theta1 - c1_target(s, sca) * (xi_f * big_theta1 + n));
    let c2 =
        if sca.b2.is_absent() { 0.0 } else { term(t2, xi_f * gamma_1 - c2_target(s, sca, w) * (xi_n * gamma_1 + n)) };
    let c3 = term(
        t3,
        0.5 * (sca.bnf.phi * log2_or_zero(&sca.bnf, gnf)
            - sca.b2.phi * log2_or_zero(&sca.b2, g2)
            - (2.0 * w + sca.b2.psi - sca.bnf.psi)),
    );
    let c4 = t4 * (s.p_t - p * (xi_n + xi_f));
    let c6 = t5 * (1.0 - xi_n - xi_f);
    rates - cost + c1 + c2 + c3 + c4 + c6
}

/// Solves the stage-2 quartic and returns `(ξn*, 1 − ξn*)`.
///
/// Candidates are the real roots in `(0, 1)` and the end `ξn = 1`; the one
/// with the largest Lagrangian wins.
#[allow(clippy::too_many_arguments)]
pub fn stage2_pac(
    h: &ChannelState,
    s: &SystemParams,
    p_star: f64,
    xi_f: f64,
    p_r: f64,
    duals: &DualVariables,
    gamma_ee: f64,
    sca: &ScaPoint,
) -> Result<(f64, f64), OptError> {
    if !(p_star > 0.0) {
        return Err(OptError::StageInfeasible("stage 2 needs P > 0"));
    }
    let c = stage2_coefficients(h, s, p_star, xi_f, p_r, duals, gamma_ee, sca);
    let roots = real_roots(&c.quartic(), ROOT_TOL).unwrap_or_default();
    let lag = |x: f64| stage2_lagrangian(x, h, s, p_star, xi_f, p_r, duals, gamma_ee, sca);
    let best = roots
        .into_iter()
        .filter(|&r| r > 0.0 && r < 1.0)
        .chain(std::iter::once(1.0))
        .map(|x| (lag(x), x))
        .filter(|(v, _)| !v.is_nan())
        .max_by(|a, b| a.0.total_cmp(&b.0));
    match best {
        Some((v, x)) if v > f64::NEG_INFINITY => Ok((x, 1.0 - x)),
        _ => Err(OptError::StageInfeasible("stage 2 has no finite candidate")),
    }
}

/// Brackets of the stage-2 Lagrangian for C1, C2, C3, C4, C6.
pub fn stage2_subgradients(h: &ChannelState, s: &SystemParams, a: &PowerAllocation, sca: &ScaPoint) -> [f64; 5] {
    let n = s.noise_power_w;
    let theta1 = a.p * h.near_gain(s);
    let gamma_1 = a.p * h.far_gain(s);
    let g2 = a.xi_f * gamma_1 / (a.xi_n * gamma_1 + n);
    let gnf = a.xi_f * theta1 / (a.xi_n * theta1 + n);
    let w = omega(a.p_r, h, s, sca);
    let c2 = if sca.b2.is_absent() { 0.0 } else { a.xi_f * gamma_1 - c2_target(s, sca, w) * (a.xi_n * gamma_1 + n) };
    [
        a.xi_n * theta1 - c1_target(s, sca) * (a.xi_f * theta1 * s.eta + n),
        c2,
        0.5 * (sca.bnf.phi * log2_or_zero(&sca.bnf, gnf)
            - sca.b2.phi * log2_or_zero(&sca.b2, g2)
            - (2.0 * w + sca.b2.psi - sca.bnf.psi)),
        s.p_t - a.p * a.pi_sum(),
        1.0 - a.pi_sum(),
    ]
}

/// One projected subgradient step on `γ̃₁ … γ̃₅`.
pub fn update_stage2_duals(
    duals: &DualVariables,
    h: &ChannelState,
    s: &SystemParams,
    a: &PowerAllocation,
    sca: &ScaPoint,
    step: f64,
) -> DualVariables {
    let g = stage2_subgradients(h, s, a, sca);
    let mut out = *duals;
    out.gamma_t.copy_from_slice(&project(&duals.gamma_t, &g, step));
    out
}

// ---------------------------------------------------------------- stage 3

/// `ζ₂ = Υ₃ + Υ₂φᵥ + γ_EE − Υ₁φᵥ`, normalized.
pub fn stage3_zeta2(h: &ChannelState, s: &SystemParams, duals: &DualVariables, gamma_ee: f64) -> f64 {
    let [u1, u2, u3] = duals.upsilon;
    let vphi = h.relay_gain(s);
    u3 + u2 * vphi + gamma_ee / s.bandwidth_hz - u1 * vphi
}

/// Closed-form relay power `Φ₃/(ζ₂·2ln2)`, clipped to `[0, P_r(max)]`; a
/// nonpositive `ζ₂` means the Lagrangian increases in `P_r` and the budget is returned.
pub fn stage3_relay_power(
    h: &ChannelState,
    s: &SystemParams,
    duals: &DualVariables,
    gamma_ee: f64,
    sca: &ScaPoint,
) -> f64 {
    let z = stage3_zeta2(h, s, duals, gamma_ee);
    if z <= 0.0 {
        return s.p_r_max;
    }
    (sca.b3.phi / (z * TWO_LN2)).clamp(0.0, s.p_r_max)
}

/// Stage-3 Lagrangian as a function of `P_r`.
pub fn stage3_lagrangian(
    p_r: f64,
    h: &ChannelState,
    s: &SystemParams,
    a: &PowerAllocation,
    duals: &DualVariables,
    gamma_ee: f64,
    sca: &ScaPoint,
) -> f64 {
    let gamma = gamma_ee / s.bandwidth_hz;
    let trial = PowerAllocation { p_r, ..*a };
    let g = crate::sysmodel::Sinrs::of(&trial, h, s);
    let rates = half_rate(&sca.b1, g.gamma_1) + half_rate(&sca.b2, g.gamma_2) + half_rate(&sca.b3, g.gamma_3);
    let cost = gamma * (a.p * a.pi_sum() + p_r + s.p_c);
    let br = stage3_subgradients(h, s, &trial, sca);
    let [u1, u2, u3] = duals.upsilon;
    rates - cost + term(u1, br[0]) + term(u2, br[1]) + term(u3, br[2])
}

/// Brackets of the stage-3 Lagrangian for C2, C3, C5.
pub fn stage3_subgradients(h: &ChannelState, s: &SystemParams, a: &PowerAllocation, sca: &ScaPoint) -> [f64; 3] {
    let n = s.noise_power_w;
    let g = crate::sysmodel::Sinrs::of(a, h, s);
    let omega_f = if sca.b2.is_absent() { 0.0 } else { half_rate(&sca.b2, g.gamma_2) };
    let omega_nf = half_rate(&sca.bnf, g.gamma_nf);
    let (p3, s3) = (sca.b3.phi, sca.b3.psi);
    let rx = a.p_r * h.relay_gain(s);
    let rmin = s.r_min / s.bandwidth_hz;
    [
        rx - n * ((2.0 * rmin - 2.0 * omega_f - s3) / p3).exp2(),
        n * ((2.0 * omega_nf - 2.0 * omega_f - s3) / p3).exp2() - rx,
        s.p_r_max - a.p_r,
    ]
}

/// One projected subgradient step on `Υ₁ … Υ₃`.
pub fn update_stage3_duals(
    duals: &DualVariables,
    h: &ChannelState,
    s: &SystemParams,
    a: &PowerAllocation,
    sca: &ScaPoint,
    step: f64,
) -> DualVariables {
    let g = stage3_subgradients(h, s, a, sca);
    let mut out = *duals;
    out.upsilon.copy_from_slice(&project(&duals.upsilon, &g, step));
    out
}
