use super::*;
use approx::assert_relative_eq;
use proptest::prelude::*;

/// Unit-mean gains at the default distances, path-loss exponent 4.
fn mean_channel() -> ChannelState {
    let pl = |d: f64| d.powi(-4);
    ChannelState { g_sn: pl(10.0), g_sb: pl(15.0), g_bn: pl(8.0), h_bf: pl(10.0), h_nf: pl(20.0), h_nb: pl(8.0) }
}

fn faded_channel(e: [f64; 6]) -> ChannelState {
    let m = mean_channel();
    ChannelState {
        g_sn: m.g_sn * e[0],
        g_sb: m.g_sb * e[1],
        g_bn: m.g_bn * e[2],
        h_bf: m.h_bf * e[3],
        h_nf: m.h_nf * e[4],
        h_nb: m.h_nb * e[5],
    }
}

fn sample_point() -> (ChannelState, SystemParams, PowerAllocation) {
    let h = mean_channel();
    let s = SystemParams::default();
    let a = PowerAllocation { p: 2e-6, xi_n: 0.2, xi_f: 0.8, p_r: 3e-9 };
    (h, s, a)
}

fn some_duals() -> DualVariables {
    DualVariables { lambda: [0.3, 0.2, 0.7, 0.1], gamma_t: [0.2, 0.1, 0.4, 0.05, 0.3], upsilon: [0.1, 0.2, 0.3] }
}

fn assert_same_poly(a: &crate::polyroots::Polynomial, b: &crate::polyroots::Polynomial) {
    let (ca, cb) = (a.coeffs(), b.coeffs());
    let scale = ca.iter().chain(cb).fold(0.0f64, |m, c| m.max(c.abs()));
    for i in 0..ca.len().max(cb.len()) {
        let x = ca.get(i).copied().unwrap_or(0.0);
        let y = cb.get(i).copied().unwrap_or(0.0);
        assert!((x - y).abs() <= 1e-10 * scale.max(f64::MIN_POSITIVE), "coefficient {i}: {x} vs {y}");
    }
}

#[test]
fn quintic_closed_form_matches_product() {
    let (h, s, a) = sample_point();
    let sca = ScaPoint::at(&a, &h, &s);
    let c = stage1_coefficients(&h, &s, a.xi_n, a.xi_f, a.p_r, &some_duals(), 1.5e9, &sca);
    assert_same_poly(&c.quintic(), &c.quintic_by_product());
    assert_relative_eq!(c.lambda_coeffs[5], c.n1 * c.phi * c.phi1 * c.zeta, max_relative = 1e-14);
}

#[test]
fn quartic_closed_form_matches_product() {
    let (h, s, a) = sample_point();
    let sca = ScaPoint::at(&a, &h, &s);
    let c = stage2_coefficients(&h, &s, a.p, a.xi_f, a.p_r, &some_duals(), 1.5e9, &sca);
    assert_same_poly(&c.quartic(), &c.quartic_by_product());
}

/// Central difference of a Lagrangian, for checking the stationarity forms.
fn derivative(f: impl Fn(f64) -> f64, x: f64) -> f64 {
    let h = x * 1e-5;
    (f(x + h) - f(x - h)) / (2.0 * h)
}

#[test]
fn stationarity_is_the_lagrangian_derivative() {
    let (h, s, a) = sample_point();
    let sca = ScaPoint::at(&a, &h, &s);
    let d = some_duals();
    let c1 = stage1_coefficients(&h, &s, a.xi_n, a.xi_f, a.p_r, &d, 1.5e9, &sca);
    let f1 = |p: f64| stage1_lagrangian(p, &h, &s, a.xi_n, a.xi_f, a.p_r, &d, 1.5e9, &sca);
    for p in [1e-7, 2e-6, 5e-5] {
        assert_relative_eq!(c1.stationarity(p), derivative(f1, p), max_relative = 1e-5, epsilon = 1e-3);
    }
    let c2 = stage2_coefficients(&h, &s, a.p, a.xi_f, a.p_r, &d, 1.5e9, &sca);
    let f2 = |x: f64| stage2_lagrangian(x, &h, &s, a.p, a.xi_f, a.p_r, &d, 1.5e9, &sca);
    for x in [0.05, 0.3, 0.8] {
        assert_relative_eq!(c2.stationarity(x), derivative(f2, x), max_relative = 1e-5, epsilon = 1e-6);
    }
}

#[test]
fn relay_power_closed_form() {
    let h = ChannelState { h_nf: 1.0, ..ChannelState::default() };
    let s = SystemParams { bandwidth_hz: 1.0, p_r_max: 10.0, ..SystemParams::default() };
    let sca = ScaPoint { b3: crate::sca::Bound { phi: 0.5, psi: 0.0, gamma_o: 1.0 }, ..ScaPoint::default() };
    // ζ₂ = γ_EE = 1 with all Υ zero.
    let p_r = stage3_relay_power(&h, &s, &DualVariables::default(), 1.0, &sca);
    assert_relative_eq!(p_r, 0.5 / (2.0 * LN_2), max_relative = 1e-15);
    assert!((p_r - 0.36067).abs() < 1e-5);

    let negative = DualVariables { upsilon: [5.0, 0.0, 0.0], ..DualVariables::default() };
    assert_eq!(stage3_relay_power(&h, &s, &negative, 1.0, &sca), 10.0);
    let tight = SystemParams { p_r_max: 0.1, ..s };
    assert_eq!(stage3_relay_power(&h, &tight, &DualVariables::default(), 1.0, &sca), 0.1);
}

#[test]
fn stage1_dual_step_matches_scalar_transcription() {
    let (h, s, a) = sample_point();
    let sca = ScaPoint::at(&a, &h, &s);
    let d = some_duals();
    let mu = 0.05;
    let out = update_stage1_duals(&d, &h, &s, &a, &sca, mu);
    // First subgradient written out from the constraint.
    let gn = h.g_sn + h.g_sb * h.g_bn * s.psi_i;
    let c1 = 2f64.powf((2.0 * 0.5 - sca.b1.psi) / sca.b1.phi);
    let g1 = a.xi_n * a.p * gn - c1 * (a.xi_f * a.p * s.eta * gn + s.noise_power_w);
    assert_relative_eq!(out.lambda[0], (d.lambda[0] - mu * g1).max(0.0), max_relative = 1e-12);
    // C4 slack is P_t − PΠ.
    assert_relative_eq!(out.lambda[3], (d.lambda[3] - mu * (s.p_t - a.p)).max(0.0), max_relative = 1e-12);
}

#[test]
fn tight_budget_leaves_lambda4_alone() {
    let (h, s, _) = sample_point();
    let a = PowerAllocation { p: s.p_t, xi_n: 0.4, xi_f: 0.6, p_r: 1e-6 };
    let sca = ScaPoint::at(&a, &h, &s);
    let d = some_duals();
    let out = update_stage1_duals(&d, &h, &s, &a, &sca, 0.3);
    assert_eq!(out.lambda[3], d.lambda[3]);
}

#[test]
fn upsilon1_step_matches_bracket() {
    let (h, s, a) = sample_point();
    let sca = ScaPoint::at(&a, &h, &s);
    let d = some_duals();
    let out = update_stage3_duals(&d, &h, &s, &a, &sca, 0.2);
    let gf = h.g_sb * h.h_bf * s.psi_i;
    let g2 = a.p * a.xi_f * gf / (a.p * a.xi_n * gf + s.noise_power_w);
    let omega_f = 0.5 * (sca.b2.phi * g2.log2() + sca.b2.psi);
    let vphi = h.h_nf + h.h_nb * h.h_bf * s.psi_j;
    let bracket = a.p_r * vphi - s.noise_power_w * 2f64.powf((2.0 * 0.5 - 2.0 * omega_f - sca.b3.psi) / sca.b3.phi);
    assert_relative_eq!(out.upsilon[0], (d.upsilon[0] - 0.2 * bracket).max(0.0), max_relative = 1e-12);
}

#[test]
fn zero_step_is_identity() {
    let (h, s, a) = sample_point();
    let sca = ScaPoint::at(&a, &h, &s);
    let d = some_duals();
    assert_eq!(update_stage1_duals(&d, &h, &s, &a, &sca, 0.0), d);
    assert_eq!(update_stage2_duals(&d, &h, &s, &a, &sca, 0.0), d);
    assert_eq!(update_stage3_duals(&d, &h, &s, &a, &sca, 0.0), d);
}

#[test]
fn stage2_split_sums_to_one() {
    let (h, s, a) = sample_point();
    let sca = ScaPoint::at(&a, &h, &s);
    let (xn, xf) = stage2_pac(&h, &s, a.p, a.xi_f, a.p_r, &some_duals(), 1.5e9, &sca).unwrap();
    assert_eq!(xn + xf, 1.0);
    assert!(xn > 0.0 && xn <= 1.0);
}

#[test]
fn table_one_defaults_converge() {
    let h = mean_channel();
    let s = SystemParams::default();
    let cfg = OptimizerConfig::default();
    let r = alternating_optimize(&h, &s, &cfg).unwrap();
    assert!(r.converged);
    assert!(r.feasibility.feasible());
    assert!(r.outer_iterations <= 8);
    assert!(r.trajectory.last().unwrap().residual().abs() <= 1e-3);
    for w in r.trajectory.windows(2) {
        assert!(w[1].gamma_ee >= w[0].gamma_ee);
    }
}

#[test]
fn deterministic() {
    let h = mean_channel();
    let s = SystemParams::default();
    let cfg = OptimizerConfig::default();
    let a = alternating_optimize(&h, &s, &cfg).unwrap();
    let b = alternating_optimize(&h, &s, &cfg).unwrap();
    assert_eq!(format!("{a:?}"), format!("{b:?}"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn faded_runs_are_feasible_and_monotone(e in prop::array::uniform6(0.05f64..4.0)) {
        let h = faded_channel(e);
        let s = SystemParams::default();
        let r = alternating_optimize(&h, &s, &OptimizerConfig::default()).unwrap();
        if r.outer_iterations > 0 {
            prop_assert!(r.feasibility.feasible(), "{:?}", r.feasibility);
            for w in r.trajectory.windows(2) {
                prop_assert!(w[1].gamma_ee >= w[0].gamma_ee);
            }
        }
    }
}
