use bscnoma::mcsim::{mean_channel, substream, trial_channel, Geometry};
use bscnoma::optimizer::{alternating_optimize, OptimizerConfig};
use bscnoma::sysmodel::*;
use rand::Rng;

/// Best efficiency found by sampling allocations at random, log-uniform in power.
fn random_search(h: &ChannelState, s: &SystemParams, samples: usize, seed: u64) -> f64 {
    let mut rng = substream(seed, 99, 0);
    let mut best = 0.0f64;
    for _ in 0..samples {
        let xi_n = rng.random_range(0.0..1.0);
        let a = PowerAllocation {
            p: s.p_t * 10f64.powf(rng.random_range(-12.0..0.0)),
            xi_n,
            xi_f: 1.0 - xi_n,
            p_r: s.p_r_max * 10f64.powf(rng.random_range(-12.0..0.0)),
        };
        if check_constraints(&a, h, s).feasible() {
            best = best.max(energy_efficiency(&a, h, s));
        }
    }
    best
}

#[test]
fn beats_random_search() {
    let g = Geometry::default();
    let channels = std::iter::once(mean_channel(&g)).chain((0..6).map(|i| trial_channel(&g, 3, i)));
    for (i, h) in channels.enumerate() {
        for s in [SystemParams::default(), SystemParams::default().without_tag()] {
            let r = alternating_optimize(&h, &s, &OptimizerConfig::default()).unwrap();
            let oracle = random_search(&h, &s, 20_000, i as u64);
            if r.outer_iterations == 0 {
                assert_eq!(oracle, 0.0, "channel {i}: a feasible point exists");
                continue;
            }
            assert!(r.feasibility.feasible());
            assert!(r.gamma_ee >= oracle * (1.0 - 1e-6), "channel {i}: {} < {oracle}", r.gamma_ee);
            let ee = energy_efficiency(&r.allocation, &h, &s);
            assert!((ee - r.gamma_ee).abs() <= 1e-9 * ee);
        }
    }
}

#[test]
fn reported_allocation_respects_budgets() {
    let s = SystemParams { p_t: dbm_to_watts(10.0), p_r_max: dbm_to_watts(0.0), ..SystemParams::default() };
    let h = mean_channel(&Geometry::default());
    let r = alternating_optimize(&h, &s, &OptimizerConfig::default()).unwrap();
    let a = r.allocation;
    assert!(a.p * a.pi_sum() <= s.p_t && a.p_r <= s.p_r_max && a.pi_sum() <= 1.0 + 1e-12);
}
