//! Physical-layer model of the two-slot backscatter-assisted cooperative NOMA link.
//!
//! Slot 1: the base station superimposes the near-user and far-user symbols
//! with power split `ξn`, `ξf`. The near user hears the direct path plus the
//! tag-reflected path; the far user only hears the reflected path. Slot 2: the
//! near user relays the far user's data with power `P_r`, directly and again
//! via the tag.
//!
//! Every gain is a power gain (squared amplitude). Rates are in bits/s and use
//! the half-bandwidth factor of the two-slot frame.

use serde::{Deserialize, Serialize};

/// Converts a power level in dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    1e-3 * 10f64.powf(dbm / 10.0)
}

/// Converts a power level in watts to dBm.
pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * (w / 1e-3).log10()
}

/// Fixed link, budget and QoS constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Bandwidth `W` in Hz.
    pub bandwidth_hz: f64,
    /// Noise power `σ²` in W.
    pub noise_power_w: f64,
    /// Residual fraction of the far-user signal left after imperfect SIC.
    pub eta: f64,
    /// Tag reflection coefficient in slot 1.
    pub psi_i: f64,
    /// Tag reflection coefficient in slot 2.
    pub psi_j: f64,
    /// Base-station power budget in W.
    pub p_t: f64,
    /// Relay power budget in W.
    pub p_r_max: f64,
    /// Circuit power in W.
    pub p_c: f64,
    /// QoS rate floor for both users, bits/s.
    pub r_min: f64,
}

impl Default for SystemParams {
    /// Reference link: 1 MHz, 30 dBm source, 10 dBm relay, 1 mW circuit,
    /// -114 dBm noise, 0.5 Mbit/s QoS, η = 0.1, tag coefficients 0.5.
    fn default() -> Self {
        Self {
            bandwidth_hz: 1e6,
            noise_power_w: dbm_to_watts(-114.0),
            eta: 0.1,
            psi_i: 0.5,
            psi_j: 0.5,
            p_t: dbm_to_watts(30.0),
            p_r_max: dbm_to_watts(10.0),
            p_c: 1e-3,
            r_min: 0.5e6,
        }
    }
}

impl SystemParams {
    /// The no-backscatter baseline: both reflection coefficients forced to zero.
    pub fn without_tag(mut self) -> Self {
        self.psi_i = 0.0;
        self.psi_j = 0.0;
        self
    }

    /// Checks the type invariants, returning the first offending field.
    pub fn validate(&self) -> Result<(), &'static str> {
        let finite_pos = |x: f64| x.is_finite() && x > 0.0;
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if !finite_pos(self.bandwidth_hz) {
            return Err("bandwidth_hz");
        }
        if !finite_pos(self.noise_power_w) {
            return Err("noise_power_w");
        }
        if !unit(self.eta) {
            return Err("eta");
        }
        if !unit(self.psi_i) {
            return Err("psi_i");
        }
        if !unit(self.psi_j) {
            return Err("psi_j");
        }
        if !finite_pos(self.p_t) {
            return Err("p_t");
        }
        if !finite_pos(self.p_r_max) {
            return Err("p_r_max");
        }
        if !(self.p_c.is_finite() && self.p_c >= 0.0) {
            return Err("p_c");
        }
        if !(self.r_min.is_finite() && self.r_min >= 0.0) {
            return Err("r_min");
        }
        Ok(())
    }
}

/// The six power gains of the two-slot topology.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ChannelState {
    /// BS → near user.
    pub g_sn: f64,
    /// BS → tag.
    pub g_sb: f64,
    /// Tag → near user.
    pub g_bn: f64,
    /// Tag → far user.
    pub h_bf: f64,
    /// Near user → tag.
    pub h_nb: f64,
    /// Near user → far user.
    pub h_nf: f64,
}

impl ChannelState {
    /// Composite slot-1 gain seen by the near user, `g_sn + g_sb·g_bn·ψᵢ`.
    pub fn near_gain(&self, s: &SystemParams) -> f64 {
        self.g_sn + self.g_sb * self.g_bn * s.psi_i
    }

    /// Slot-1 gain seen by the far user through the tag, `g_sb·h_bf·ψᵢ`.
    pub fn far_gain(&self, s: &SystemParams) -> f64 {
        self.g_sb * self.h_bf * s.psi_i
    }

    /// Composite slot-2 relay gain `φ = h_nf + h_nb·h_bf·ψⱼ`.
    pub fn relay_gain(&self, s: &SystemParams) -> f64 {
        self.h_nf + self.h_nb * self.h_bf * s.psi_j
    }

    /// True when every gain is finite and nonnegative.
    pub fn is_valid(&self) -> bool {
        [self.g_sn, self.g_sb, self.g_bn, self.h_bf, self.h_nb, self.h_nf].iter().all(|g| g.is_finite() && *g >= 0.0)
    }
}

/// Decision variables of the optimization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerAllocation {
    /// Base-station transmit power `P` in W.
    pub p: f64,
    /// Near-user power fraction.
    pub xi_n: f64,
    /// Far-user power fraction.
    pub xi_f: f64,
    /// Relay power in W.
    pub p_r: f64,
}

impl PowerAllocation {
    /// The all-zero allocation.
    pub const ZERO: Self = Self { p: 0.0, xi_n: 0.0, xi_f: 0.0, p_r: 0.0 };

    /// `ξn + ξf`.
    pub fn pi_sum(&self) -> f64 {
        self.xi_n + self.xi_f
    }
}

/// Per-constraint verdicts and signed slacks (LHS − RHS) of the six constraints.
///
/// Slacks of C1–C3 are in bits/s, C4 and C5 in W, C6 is dimensionless.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub c1: bool,
    pub c2: bool,
    pub c3: bool,
    pub c4: bool,
    pub c5: bool,
    pub c6: bool,
    pub slack: [f64; 6],
}

impl FeasibilityReport {
    /// All six constraints hold.
    pub fn feasible(&self) -> bool {
        self.c1 && self.c2 && self.c3 && self.c4 && self.c5 && self.c6
    }
}

/// The four SINRs of the model, in the order used throughout the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sinrs {
    /// Near user decoding its own signal after SIC.
    pub gamma_1: f64,
    /// Far user, slot 1, through the tag.
    pub gamma_2: f64,
    /// Far user, slot 2, from the relay.
    pub gamma_3: f64,
    /// Near user decoding the far user's signal.
    pub gamma_nf: f64,
}

impl Sinrs {
    pub fn of(a: &PowerAllocation, h: &ChannelState, s: &SystemParams) -> Self {
        Self {
            gamma_1: sinr_near_own(a, h, s),
            gamma_2: sinr_far_slot1(a, h, s),
            gamma_3: sinr_far_slot2(a, h, s),
            gamma_nf: sinr_near_decodes_far(a, h, s),
        }
    }
}

/// SINR at the near user when decoding the far user's signal (first SIC step).
pub fn sinr_near_decodes_far(a: &PowerAllocation, h: &ChannelState, s: &SystemParams) -> f64 {
    let g = h.near_gain(s);
    a.p * a.xi_f * g / (a.p * a.xi_n * g + s.noise_power_w)
}

/// SINR at the near user for its own signal, with the imperfect-SIC residual.
pub fn sinr_near_own(a: &PowerAllocation, h: &ChannelState, s: &SystemParams) -> f64 {
    let g = h.near_gain(s);
    a.p * a.xi_n * g / (a.p * a.xi_f * g * s.eta + s.noise_power_w)
}

/// SINR at the far user in slot 1 (tag-reflected path only).
pub fn sinr_far_slot1(a: &PowerAllocation, h: &ChannelState, s: &SystemParams) -> f64 {
    let g = h.far_gain(s);
    a.p * a.xi_f * g / (a.p * a.xi_n * g + s.noise_power_w)
}

/// SNR at the far user in slot 2 (relayed by the near user).
pub fn sinr_far_slot2(a: &PowerAllocation, h: &ChannelState, s: &SystemParams) -> f64 {
    a.p_r * h.relay_gain(s) / s.noise_power_w
}

/// Two-slot achievable rate `(W/2)·log₂(1+γ)` in bits/s.
pub fn rate(gamma: f64, s: &SystemParams) -> f64 {
    0.5 * s.bandwidth_hz * gamma.ln_1p() / std::f64::consts::LN_2
}

/// Total consumed power `P(ξn+ξf) + P_r + P_c`.
pub fn total_power(a: &PowerAllocation, s: &SystemParams) -> f64 {
    a.p * a.pi_sum() + a.p_r + s.p_c
}

/// Individual rates of one allocation, bits/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rates {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub r_nf: f64,
}

impl Rates {
    pub fn of(a: &PowerAllocation, h: &ChannelState, s: &SystemParams) -> Self {
        let g = Sinrs::of(a, h, s);
        Self { r1: rate(g.gamma_1, s), r2: rate(g.gamma_2, s), r3: rate(g.gamma_3, s), r_nf: rate(g.gamma_nf, s) }
    }

    /// `R₁ + min(R₂+R₃, R_nf)`: the far user cannot receive faster than the
    /// relay can decode.
    pub fn sum(&self) -> f64 {
        self.r1 + (self.r2 + self.r3).min(self.r_nf)
    }
}

/// Sum rate `R₁ + min(R₂+R₃, R_nf)` in bits/s.
pub fn sum_rate(a: &PowerAllocation, h: &ChannelState, s: &SystemParams) -> f64 {
    Rates::of(a, h, s).sum()
}

/// Energy efficiency in bits/J. The all-zero allocation with zero circuit
/// power is defined to have zero efficiency.
pub fn energy_efficiency(a: &PowerAllocation, h: &ChannelState, s: &SystemParams) -> f64 {
    let pt = total_power(a, s);
    if pt <= 0.0 {
        return 0.0;
    }
    sum_rate(a, h, s) / pt
}

/// Evaluates constraints C1–C6 on the exact rates.
pub fn check_constraints(a: &PowerAllocation, h: &ChannelState, s: &SystemParams) -> FeasibilityReport {
    let r = Rates::of(a, h, s);
    let bs = a.p * a.pi_sum();
    let slack = [
        r.r1 - s.r_min,
        r.r2 + r.r3 - s.r_min,
        r.r_nf - (r.r2 + r.r3),
        (s.p_t - bs).min(bs),
        (s.p_r_max - a.p_r).min(a.p_r),
        1.0 - a.pi_sum(),
    ];
    let coeffs_ok = a.xi_n >= 0.0 && a.xi_f >= 0.0 && a.p >= 0.0;
    FeasibilityReport {
        c1: slack[0] >= 0.0,
        c2: slack[1] >= 0.0,
        c3: slack[2] >= 0.0,
        c4: slack[3] >= 0.0 && coeffs_ok,
        c5: slack[4] >= 0.0,
        c6: slack[5] >= 0.0 && coeffs_ok,
        slack,
    }
}
