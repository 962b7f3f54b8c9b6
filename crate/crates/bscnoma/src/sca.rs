//! Successive convex approximation of the rate terms.
//!
//! `log₂(1+γ)` is replaced by the lower bound `Φ·log₂γ + Ψ`, tight at an
//! expansion SINR `γ₀`, with `Φ = γ₀/(1+γ₀)` and
//! `Ψ = log₂(1+γ₀) − Φ·log₂γ₀`. The bound is concave in `log γ`, which is what
//! makes every optimizer stage tractable.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sysmodel::{ChannelState, PowerAllocation, Sinrs, SystemParams};

/// Expansion points are never placed closer to zero than this.
pub const GAMMA_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum ScaError {
    #[error("expansion SINR must be positive, got {0}")]
    NonPositiveExpansion(f64),
    #[error("SINR of link {0} is zero, the logarithmic bound is undefined")]
    ZeroSinr(&'static str),
}

/// Returns `(Φ, Ψ)` for the expansion point `γ₀`.
pub fn sca_coefficients(gamma_o: f64) -> Result<(f64, f64), ScaError> {
    if !(gamma_o > 0.0) || !gamma_o.is_finite() {
        return Err(ScaError::NonPositiveExpansion(gamma_o));
    }
    let phi = gamma_o / (1.0 + gamma_o);
    let psi = gamma_o.ln_1p() / std::f64::consts::LN_2 - phi * gamma_o.log2();
    Ok((phi, psi))
}

/// One `(Φ, Ψ)` pair. A structurally absent link (zero gain) carries `Φ = Ψ = 0`
/// and contributes nothing, whatever its SINR.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Bound {
    pub phi: f64,
    pub psi: f64,
    pub gamma_o: f64,
}

impl Bound {
    pub const ABSENT: Self = Self { phi: 0.0, psi: 0.0, gamma_o: 0.0 };

    /// Expands around `γ₀`, floored at [`GAMMA_FLOOR`].
    pub fn at(gamma_o: f64) -> Self {
        let g = gamma_o.max(GAMMA_FLOOR);
        let (phi, psi) = sca_coefficients(g).expect("floored expansion point is positive");
        Self { phi, psi, gamma_o: g }
    }

    pub fn is_absent(&self) -> bool {
        self.phi == 0.0 && self.psi == 0.0
    }

    /// `Φ·log₂γ + Ψ`, the approximated spectral efficiency in bits/s/Hz (before
    /// the two-slot halving).
    pub fn eval(&self, gamma: f64) -> Result<f64, ScaError> {
        if self.is_absent() {
            return Ok(0.0);
        }
        if gamma <= 0.0 {
            return Err(ScaError::ZeroSinr("link"));
        }
        Ok(self.phi * gamma.log2() + self.psi)
    }

    /// Like [`Bound::eval`] but maps a zero SINR to `-∞` instead of an error.
    pub fn eval_or_neg_inf(&self, gamma: f64) -> f64 {
        self.eval(gamma).unwrap_or(f64::NEG_INFINITY)
    }
}

/// The four expansion pairs used by the optimizer stages.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ScaPoint {
    pub b1: Bound,
    pub b2: Bound,
    pub b3: Bound,
    pub bnf: Bound,
}

impl ScaPoint {
    /// Expands every rate around the SINRs of `a`. Links whose gain is exactly
    /// zero (for example the tag path with `ψᵢ = 0`) are marked absent.
    pub fn at(a: &PowerAllocation, h: &ChannelState, s: &SystemParams) -> Self {
        let g = Sinrs::of(a, h, s);
        let near = h.near_gain(s) > 0.0;
        Self {
            b1: if near { Bound::at(g.gamma_1) } else { Bound::ABSENT },
            b2: if h.far_gain(s) > 0.0 { Bound::at(g.gamma_2) } else { Bound::ABSENT },
            b3: if h.relay_gain(s) > 0.0 { Bound::at(g.gamma_3) } else { Bound::ABSENT },
            bnf: if near { Bound::at(g.gamma_nf) } else { Bound::ABSENT },
        }
    }
}

/// Approximated sum rate `Σₙ (W/2)(Φₙ log₂γₙ + Ψₙ)` over the three data links.
pub fn approx_sum_rate(
    a: &PowerAllocation,
    h: &ChannelState,
    s: &SystemParams,
    pt: &ScaPoint,
) -> Result<f64, ScaError> {
    let g = Sinrs::of(a, h, s);
    let t1 = pt.b1.eval(g.gamma_1).map_err(|_| ScaError::ZeroSinr("near user"))?;
    let t2 = pt.b2.eval(g.gamma_2).map_err(|_| ScaError::ZeroSinr("far user, slot 1"))?;
    let t3 = pt.b3.eval(g.gamma_3).map_err(|_| ScaError::ZeroSinr("far user, slot 2"))?;
    Ok(0.5 * s.bandwidth_hz * (t1 + t2 + t3))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sysmodel::Rates;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn unit_and_three() {
        let (phi, psi) = sca_coefficients(1.0).unwrap();
        assert_eq!((phi, psi), (0.5, 1.0));
        let (phi, psi) = sca_coefficients(3.0).unwrap();
        assert_relative_eq!(phi, 0.75, max_relative = 1e-15);
        assert_relative_eq!(psi, 2.0 - 0.75 * 3f64.log2(), max_relative = 1e-14);
        assert_relative_eq!(psi, 0.811_278_124_459_132_9, max_relative = 1e-12);
    }

    #[test]
    fn rejects_non_positive() {
        assert!(sca_coefficients(0.0).is_err());
        assert!(sca_coefficients(-1.0).is_err());
        assert!(sca_coefficients(f64::NAN).is_err());
    }

    #[test]
    fn absent_link_contributes_nothing() {
        assert_eq!(Bound::ABSENT.eval(0.0), Ok(0.0));
        assert!(Bound::at(2.0).eval(0.0).is_err());
    }

    #[test]
    fn approx_rate_is_tight_at_expansion_point() {
        let h = ChannelState { g_sn: 1e-4, g_sb: 2e-5, g_bn: 2.4e-4, h_bf: 1e-4, h_nb: 2.4e-4, h_nf: 6.25e-6 };
        let s = SystemParams::default();
        let a = PowerAllocation { p: 1e-3, xi_n: 0.3, xi_f: 0.7, p_r: 1e-9 };
        let pt = ScaPoint::at(&a, &h, &s);
        let r = Rates::of(&a, &h, &s);
        let approx = approx_sum_rate(&a, &h, &s, &pt).unwrap();
        assert_relative_eq!(approx, r.r1 + r.r2 + r.r3, max_relative = 1e-12);
        let b = PowerAllocation { p: 3e-3, xi_n: 0.4, xi_f: 0.6, p_r: 4e-9 };
        let rb = Rates::of(&b, &h, &s);
        assert!(approx_sum_rate(&b, &h, &s, &pt).unwrap() <= rb.r1 + rb.r2 + rb.r3);
    }

    #[test]
    fn approx_rate_hand_value() {
        // Unit gains and W = 2 so that the prefactor W/2 is one.
        let h = ChannelState { g_sn: 1.0, g_sb: 1.0, g_bn: 0.0, h_bf: 1.0, h_nb: 0.0, h_nf: 1.0 };
        let s = SystemParams {
            bandwidth_hz: 2.0,
            noise_power_w: 1.0,
            eta: 0.0,
            psi_i: 1.0,
            psi_j: 0.0,
            ..Default::default()
        };
        let a = PowerAllocation { p: 2.0, xi_n: 0.5, xi_f: 0.5, p_r: 3.0 };
        // γ₁ = 1, γ₂ = 1/2, γ₃ = 3
        let pt = ScaPoint { b1: Bound::at(1.0), b2: Bound::at(1.0), b3: Bound::at(1.0), bnf: Bound::at(1.0) };
        let expect = 1.0 + (0.5 * 0.5f64.log2() + 1.0) + (0.5 * 3f64.log2() + 1.0);
        assert_relative_eq!(approx_sum_rate(&a, &h, &s, &pt).unwrap(), expect, max_relative = 1e-14);
    }

    #[test]
    fn nbst_point_marks_tag_path_absent() {
        let h = ChannelState { g_sn: 1e-4, g_sb: 2e-5, g_bn: 2.4e-4, h_bf: 1e-4, h_nb: 2.4e-4, h_nf: 6.25e-6 };
        let s = SystemParams::default().without_tag();
        let a = PowerAllocation { p: 1e-3, xi_n: 0.3, xi_f: 0.7, p_r: 1e-9 };
        let pt = ScaPoint::at(&a, &h, &s);
        assert!(pt.b2.is_absent());
        assert!(!pt.b3.is_absent());
        assert!(approx_sum_rate(&a, &h, &s, &pt).is_ok());
    }

    proptest! {
        #[test]
        fn bound_below_and_tight(lg in -6.0f64..8.0, lg0 in -6.0f64..8.0) {
            let (g, g0) = (10f64.powf(lg), 10f64.powf(lg0));
            let b = Bound::at(g0);
            let exact = g.ln_1p() / std::f64::consts::LN_2;
            prop_assert!(b.eval(g).unwrap() <= exact + 1e-12);
            prop_assert!((b.eval(g0).unwrap() - g0.ln_1p() / std::f64::consts::LN_2).abs() <= 1e-12);
            prop_assert!(b.phi > 0.0 && b.phi < 1.0);
        }
    }
}
