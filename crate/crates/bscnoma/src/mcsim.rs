//! Seeded Monte Carlo experiments: channel draws, efficiency sweeps,
//! convergence traces and far-user BER.
//!
//! Every random quantity comes from a ChaCha8 stream keyed by
//! `(seed, stream, index)`, so results do not depend on thread scheduling and
//! the WBST and NBST runs of one trial see the same channel.
//!
//! # Link-level model
//!
//! BPSK symbols `±1` (bit 0 ↦ +1) are sent over real AWGN of variance `σ²`.
//! In slot 1 the base station transmits `√(Pξn)·x_n + √(Pξf)·x_f`; the far
//! user sees it through the tag with power gain `G_f`, the near user with
//! `G_n`, and the tag's own symbol is known (unit modulus). A receiver that
//! treats the other NOMA stream as Gaussian noise forms
//!
//! ```text
//! LLR = 2·√(G·P·ξf)·y / (σ² + G·P·ξn)
//! ```
//!
//! The near user decodes the far codeword this way. If the decode satisfies
//! every check it re-encodes it and, in slot 2, forwards codeword and relay
//! parity with power `P_r` over `φᵥ`, where `LLR = 2·√(P_r·φᵥ)·y/σ²`;
//! otherwise it stays silent and slot 2 carries no information.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::{encode, relay_reencode, CodeSpec, CodecError, SpaDecoder};
use crate::optimizer::{alternating_optimize, OptError, OptimizerConfig, TrajectoryPoint};
use crate::sysmodel::{dbm_to_watts, ChannelState, PowerAllocation, SystemParams};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("sweep grid must be nonempty and ascending")]
    BadGrid,
    #[error(transparent)]
    Optimizer(#[from] OptError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error("no feasible channel draw among the first {0}")]
    NoFeasibleDraw(u64),
}

/// Independent RNG for `(seed, stream, index)`.
pub fn substream(seed: u64, stream: u64, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&stream.to_le_bytes());
    key[16..24].copy_from_slice(&index.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Stream ids, one per experiment family.
const CHANNEL_STREAM: u64 = 1;
const BER_STREAM: u64 = 2;
const UNCODED_STREAM: u64 = 3;

/// Node distances in metres and the path-loss exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub d_sn: f64,
    pub d_sb: f64,
    pub d_bn: f64,
    pub d_bf: f64,
    pub d_nf: f64,
    pub d_nb: f64,
    pub path_loss_exponent: f64,
}

impl Default for Geometry {
    /// Tag between the base station and the far user.
    fn default() -> Self {
        Self { d_sn: 10.0, d_sb: 15.0, d_bn: 8.0, d_bf: 10.0, d_nf: 20.0, d_nb: 8.0, path_loss_exponent: 4.0 }
    }
}

impl Geometry {
    pub fn validate(&self) -> Result<(), &'static str> {
        let d = [self.d_sn, self.d_sb, self.d_bn, self.d_bf, self.d_nf, self.d_nb];
        if d.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err("distances must be positive");
        }
        if !self.path_loss_exponent.is_finite() {
            return Err("path_loss_exponent");
        }
        Ok(())
    }
}

/// Rayleigh power gains `e·d^(−α)` with `e ~ Exp(1)`.
pub fn sample_channels(g: &Geometry, rng: &mut impl Rng) -> ChannelState {
    let mut gain = |d: f64| {
        let e: f64 = Exp1.sample(rng);
        e * d.powf(-g.path_loss_exponent)
    };
    ChannelState {
        g_sn: gain(g.d_sn),
        g_sb: gain(g.d_sb),
        g_bn: gain(g.d_bn),
        h_bf: gain(g.d_bf),
        h_nf: gain(g.d_nf),
        h_nb: gain(g.d_nb),
    }
}

/// Every gain at its mean `d^(−α)`.
pub fn mean_channel(g: &Geometry) -> ChannelState {
    let gain = |d: f64| d.powf(-g.path_loss_exponent);
    ChannelState {
        g_sn: gain(g.d_sn),
        g_sb: gain(g.d_sb),
        g_bn: gain(g.d_bn),
        h_bf: gain(g.d_bf),
        h_nf: gain(g.d_nf),
        h_nb: gain(g.d_nb),
    }
}

/// The channel of trial `index`, shared by every grid point and mode.
pub fn trial_channel(g: &Geometry, seed: u64, index: u64) -> ChannelState {
    sample_channels(g, &mut substream(seed, CHANNEL_STREAM, index))
}

/// With the tag reflecting (`WBST`) or the no-backscatter baseline (`NBST`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    Wbst,
    Nbst,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Wbst => "wbst",
            Mode::Nbst => "nbst",
        }
    }

    pub fn apply(self, s: &SystemParams) -> SystemParams {
        match self {
            Mode::Wbst => *s,
            Mode::Nbst => s.without_tag(),
        }
    }
}

/// Swept parameter. Powers are given in dBm, `p_c` in W.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepVariable {
    PT,
    PRMax,
    PC,
    Eta,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::PT => "p_t",
            SweepVariable::PRMax => "p_r_max",
            SweepVariable::PC => "p_c",
            SweepVariable::Eta => "eta",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "p_t" => SweepVariable::PT,
            "p_r_max" => SweepVariable::PRMax,
            "p_c" => SweepVariable::PC,
            "eta" => SweepVariable::Eta,
            _ => return None,
        })
    }

    pub fn apply(self, s: &SystemParams, value: f64) -> SystemParams {
        let mut out = *s;
        match self {
            SweepVariable::PT => out.p_t = dbm_to_watts(value),
            SweepVariable::PRMax => out.p_r_max = dbm_to_watts(value),
            SweepVariable::PC => out.p_c = value,
            SweepVariable::Eta => out.eta = value,
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub grid: Vec<f64>,
    pub trials_per_point: usize,
    pub modes: Vec<Mode>,
    pub seed: u64,
}

/// Mean efficiency of one grid point and mode. Draws without a feasible
/// allocation count as zero efficiency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub variable: String,
    pub value: f64,
    pub mode: String,
    pub mean_ee_bits_per_joule: f64,
    pub std_ee: f64,
    pub trials: usize,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (mean, var.sqrt())
}

/// Efficiency of every trial at one parameter set, in trial order.
pub fn trial_efficiencies(
    s: &SystemParams,
    g: &Geometry,
    trials: usize,
    seed: u64,
    cfg: &OptimizerConfig,
) -> Result<Vec<f64>, SimError> {
    (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let h = trial_channel(g, seed, t);
            let r = alternating_optimize(&h, s, cfg)?;
            Ok(if r.feasibility.feasible() { r.gamma_ee } else { 0.0 })
        })
        .collect()
}

pub fn run_ee_sweep(
    spec: &SweepSpec,
    base: &SystemParams,
    g: &Geometry,
    cfg: &OptimizerConfig,
) -> Result<Vec<SweepRow>, SimError> {
    if spec.grid.is_empty() || spec.grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(SimError::BadGrid);
    }
    let mut rows = Vec::new();
    for &value in &spec.grid {
        for &mode in &spec.modes {
            let s = mode.apply(&spec.variable.apply(base, value));
            let ee = trial_efficiencies(&s, g, spec.trials_per_point, spec.seed, cfg)?;
            let (mean, std) = mean_std(&ee);
            rows.push(SweepRow {
                variable: spec.variable.name().into(),
                value,
                mode: mode.name().into(),
                mean_ee_bits_per_joule: mean,
                std_ee: std,
                trials: ee.len(),
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTrace {
    pub eta: f64,
    /// Index of the channel draw used.
    pub draw: u64,
    pub trajectory: Vec<TrajectoryPoint>,
    pub converged: bool,
}

/// Outer-loop trajectories for each `η` on one channel: the first draw of
/// the seed for which every `η` admits a feasible allocation.
pub fn convergence_trace(
    base: &SystemParams,
    g: &Geometry,
    eta_list: &[f64],
    seed: u64,
    cfg: &OptimizerConfig,
) -> Result<Vec<ConvergenceTrace>, SimError> {
    const MAX_DRAWS: u64 = 1000;
    'draws: for draw in 0..MAX_DRAWS {
        let h = trial_channel(g, seed, draw);
        let mut out = Vec::with_capacity(eta_list.len());
        for &eta in eta_list {
            let s = SystemParams { eta, ..*base };
            let r = alternating_optimize(&h, &s, cfg)?;
            if r.outer_iterations == 0 {
                continue 'draws;
            }
            out.push(ConvergenceTrace { eta, draw, trajectory: r.trajectory, converged: r.converged });
        }
        return Ok(out);
    }
    Err(SimError::NoFeasibleDraw(MAX_DRAWS))
}

// ---------------------------------------------------------------- link level

/// Per-bit LLRs of one two-slot frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameLlrs {
    pub message: Vec<u8>,
    pub codeword: Vec<u8>,
    pub slot1: Vec<f64>,
    pub slot2_info: Vec<f64>,
    pub slot2_parity: Vec<f64>,
    /// The near user's decode of the far codeword satisfied all checks.
    pub relay_converged: bool,
}

fn bpsk(b: u8) -> f64 {
    if b & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn noise(rng: &mut impl Rng, sigma: f64) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    sigma * z
}

/// Gaussian-approximation LLR of a BPSK symbol with amplitude `a` under
/// effective noise variance `var`.
pub fn bpsk_llr(y: f64, a: f64, var: f64) -> f64 {
    2.0 * a * y / var
}

/// Simulates one frame end to end. The relay decodes with `relay_iters`
/// sum-product iterations over the source code.
#[allow(clippy::too_many_arguments)]
pub fn simulate_two_slot_frame(
    code: &CodeSpec,
    relay_decoder: &SpaDecoder,
    a: &PowerAllocation,
    h: &ChannelState,
    s: &SystemParams,
    relay_iters: usize,
    rng: &mut impl Rng,
) -> Result<FrameLlrs, SimError> {
    let k = code.k();
    let message: Vec<u8> = (0..k).map(|_| rng.random::<bool>() as u8).collect();
    let near_msg: Vec<u8> = (0..k).map(|_| rng.random::<bool>() as u8).collect();
    let codeword = encode(code, &message)?;
    let near_cw = encode(code, &near_msg)?;
    let var = s.noise_power_w;
    let sigma = var.sqrt();
    let (gn, gf, vphi) = (h.near_gain(s), h.far_gain(s), h.relay_gain(s));
    let (pf, pn) = (a.p * a.xi_f, a.p * a.xi_n);

    let mut slot1 = Vec::with_capacity(codeword.len());
    let mut at_relay = Vec::with_capacity(codeword.len());
    for (&c, &d) in codeword.iter().zip(&near_cw) {
        let x = pf.sqrt() * bpsk(c) + pn.sqrt() * bpsk(d);
        let y_far = gf.sqrt() * x + noise(rng, sigma);
        let y_near = gn.sqrt() * x + noise(rng, sigma);
        slot1.push(bpsk_llr(y_far, (gf * pf).sqrt(), var + gf * pn));
        at_relay.push(bpsk_llr(y_near, (gn * pf).sqrt(), var + gn * pn));
    }
    let relay = relay_decoder.decode(&at_relay, relay_iters)?;
    // Selective forwarding: a relay whose decode fails a check stays silent.
    let amp = if relay.converged { (a.p_r * vphi).sqrt() } else { 0.0 };
    let parity = relay_reencode(code, &relay.bits)?;
    let mut slot2 = |b: &u8| bpsk_llr(amp * bpsk(*b) + noise(rng, sigma), amp, var);
    let slot2_info: Vec<f64> = relay.bits.iter().map(&mut slot2).collect();
    let slot2_parity: Vec<f64> = parity.iter().map(&mut slot2).collect();
    Ok(FrameLlrs { message, codeword, slot1, slot2_info, slot2_parity, relay_converged: relay.converged })
}

/// Link configuration for the BER experiment. Gains are set so the far user's
/// received symbol SNR `G·P·ξf/σ²` in slot 1 and `P_r·φᵥ/σ²` in slot 2 both
/// equal the grid value; the near user sees `relay_advantage_db` more.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerSetup {
    pub snr_db: Vec<f64>,
    pub iteration_budgets: Vec<usize>,
    pub xi_n: f64,
    pub relay_advantage_db: f64,
    pub relay_iters: usize,
    /// Information bits per SNR point.
    pub min_bits: u64,
    /// Optional early stop once this many frames are in error.
    pub max_frame_errors: Option<u64>,
    pub seed: u64,
}

impl Default for BerSetup {
    fn default() -> Self {
        Self {
            snr_db: vec![0.0, 1.0, 2.0, 3.0],
            iteration_budgets: vec![1, 2, 5, 10],
            xi_n: 0.1,
            relay_advantage_db: 6.0,
            relay_iters: 10,
            min_bits: 1_000_000,
            max_frame_errors: None,
            seed: 1,
        }
    }
}

/// Which receiver a BER curve belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Receiver {
    /// Both slots over the joint matrix.
    Joint,
    /// Slot 1 only, over the source code.
    Slot1Only,
}

impl Receiver {
    pub fn name(self) -> &'static str {
        match self {
            Receiver::Joint => "joint",
            Receiver::Slot1Only => "slot1",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerPoint {
    pub receiver: Receiver,
    pub max_iters: usize,
    pub snr_db: f64,
    pub bit_errors: u64,
    pub bits_simulated: u64,
    pub ber: f64,
    /// Mean iterations actually run per frame.
    pub decoder_iterations: f64,
}

/// Unit noise, unit power, and gains realizing the requested SNRs.
fn ber_link(snr: f64, setup: &BerSetup) -> (PowerAllocation, ChannelState, SystemParams) {
    let a = PowerAllocation { p: 1.0, xi_n: setup.xi_n, xi_f: 1.0 - setup.xi_n, p_r: 1.0 };
    let s = SystemParams { noise_power_w: 1.0, psi_i: 1.0, psi_j: 1.0, ..SystemParams::default() };
    let relay_snr = snr * 10f64.powf(setup.relay_advantage_db / 10.0);
    let h = ChannelState { g_sn: relay_snr / a.xi_f, g_sb: 1.0, g_bn: 0.0, h_bf: snr / a.xi_f, h_nf: snr, h_nb: 0.0 };
    (a, h, s)
}

fn db(x: f64) -> f64 {
    10f64.powf(x / 10.0)
}

/// Counts information-bit errors of `decoded` against `message`.
fn bit_errors(code: &CodeSpec, decoded: &[u8], message: &[u8]) -> u64 {
    code.info_columns.iter().zip(message).filter(|(&c, &m)| decoded[c] != m).count() as u64
}

/// Far-user BER for every iteration budget with the joint decoder, and for
/// the largest budget with slot 1 alone. All curves share the same frames.
pub fn simulate_far_user_ber(code: &CodeSpec, setup: &BerSetup) -> Result<Vec<BerPoint>, SimError> {
    let relay_decoder = SpaDecoder::new(&code.h_source);
    let joint_decoder = SpaDecoder::new(&code.joint);
    let k = code.k() as u64;
    let frames = setup.min_bits.div_ceil(k.max(1));
    let budgets = &setup.iteration_budgets;
    let top = budgets.iter().copied().max().unwrap_or(1);
    let mut out = Vec::new();
    for (si, &snr_db) in setup.snr_db.iter().enumerate() {
        let (a, h, s) = ber_link(db(snr_db), setup);
        // Per frame: (errors, iterations) for each joint budget, then slot 1 only.
        let per_frame: Vec<Vec<(u64, usize)>> = (0..frames)
            .into_par_iter()
            .map(|f| {
                let mut rng = substream(setup.seed, BER_STREAM + ((si as u64) << 8), f);
                let fr = simulate_two_slot_frame(code, &relay_decoder, &a, &h, &s, setup.relay_iters, &mut rng)?;
                let llr = crate::codec::joint_llrs(code, &fr.slot1, &fr.slot2_info, &fr.slot2_parity)?;
                let mut row = Vec::with_capacity(budgets.len() + 1);
                for &b in budgets {
                    let d = joint_decoder.decode(&llr, b)?;
                    row.push((bit_errors(code, &d.bits, &fr.message), d.iterations_used));
                }
                let d = relay_decoder.decode(&fr.slot1, top)?;
                row.push((bit_errors(code, &d.bits, &fr.message), d.iterations_used));
                Ok(row)
            })
            .collect::<Result<_, SimError>>()?;
        let used = match setup.max_frame_errors {
            // Frames in order until the top-budget joint curve has enough frame errors.
            Some(limit) => {
                let col = budgets.iter().position(|&b| b == top).unwrap_or(0);
                let mut errs = 0;
                per_frame
                    .iter()
                    .position(|r| {
                        errs += (r[col].0 > 0) as u64;
                        errs >= limit
                    })
                    .map_or(per_frame.len(), |i| i + 1)
            }
            None => per_frame.len(),
        };
        let curves = budgets.iter().map(|&b| (Receiver::Joint, b)).chain(std::iter::once((Receiver::Slot1Only, top)));
        for (ci, (receiver, max_iters)) in curves.enumerate() {
            let errors: u64 = per_frame[..used].iter().map(|r| r[ci].0).sum();
            let iters: usize = per_frame[..used].iter().map(|r| r[ci].1).sum();
            let bits = used as u64 * k;
            out.push(BerPoint {
                receiver,
                max_iters,
                snr_db,
                bit_errors: errors,
                bits_simulated: bits,
                ber: errors as f64 / bits as f64,
                decoder_iterations: iters as f64 / used as f64,
            });
        }
    }
    Ok(out)
}

/// `Q(x)`, the standard normal tail probability.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Uncoded BPSK over AWGN at symbol SNR `snr` (linear), hard decisions.
/// Returns `(errors, bits)`.
pub fn simulate_uncoded_bpsk(snr: f64, bits: u64, seed: u64) -> (u64, u64) {
    const CHUNK: u64 = 1 << 16;
    let sigma = (1.0 / snr).sqrt();
    let errors: u64 = (0..bits.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut rng = substream(seed, UNCODED_STREAM, c);
            let n = CHUNK.min(bits - c * CHUNK);
            (0..n)
                .filter(|_| {
                    let b = rng.random::<bool>() as u8;
                    let y = bpsk(b) + noise(&mut rng, sigma);
                    (y < 0.0) != (b == 1)
                })
                .count() as u64
        })
        .sum();
    (errors, bits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{build_code_from, joint_decode};
    use crate::designs::design_for;
    use crate::qcldpc::{base_matrix, expand, field_size_for, joint_components, JointLayout};

    #[test]
    fn draws_are_reproducible() {
        let g = Geometry::default();
        assert_eq!(trial_channel(&g, 7, 3), trial_channel(&g, 7, 3));
        assert_ne!(trial_channel(&g, 7, 3), trial_channel(&g, 7, 4));
        assert_ne!(trial_channel(&g, 7, 3), trial_channel(&g, 8, 3));
    }

    #[test]
    fn mean_gain_follows_path_loss() {
        let g = Geometry::default();
        let mut rng = substream(11, 0, 0);
        let n = 100_000;
        let mean = (0..n).map(|_| sample_channels(&g, &mut rng).g_sn).sum::<f64>() / n as f64;
        let expect = 10f64.powi(-4);
        assert!((mean / expect - 1.0).abs() < 0.02, "{mean}");
    }

    #[test]
    fn zero_exponent_gives_unit_mean() {
        let g = Geometry { path_loss_exponent: 0.0, ..Geometry::default() };
        let mut rng = substream(2, 0, 0);
        let n = 50_000;
        let mean = (0..n).map(|_| sample_channels(&g, &mut rng).h_nf).sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() < 0.03, "{mean}");
    }

    #[test]
    fn q_function_values() {
        assert!((q_function(0.0) - 0.5).abs() < 1e-7);
        assert!((q_function(2f64.sqrt()) - 0.078_649_6).abs() < 1e-6);
        assert!((q_function(-1.0) - 0.841_344_7).abs() < 1e-6);
    }

    #[test]
    fn uncoded_bpsk_matches_q() {
        let (e, n) = simulate_uncoded_bpsk(2.0, 200_000, 5);
        let ber = e as f64 / n as f64;
        assert!((ber / q_function(2f64.sqrt()) - 1.0).abs() < 0.05, "{ber}");
    }

    #[test]
    fn llr_closed_form() {
        // Amplitude 0.5, noise 0.25: a received 0.3 gives 2·0.5·0.3/0.25.
        assert!((bpsk_llr(0.3, 0.5, 0.25) - 1.2).abs() < 1e-15);
    }

    fn small_code() -> CodeSpec {
        let (_, d) = design_for(1, 1).unwrap();
        let hb = expand(&base_matrix(&d, field_size_for(d.omega)).unwrap()).unwrap();
        let layout = JointLayout { lambda_c1: 1, lambda_c2: 1, lambda_c3: 1, mu_r: 2 };
        build_code_from(&joint_components(&hb, &layout).unwrap()).unwrap()
    }

    #[test]
    fn noiseless_frame_decodes() {
        let code = small_code();
        let relay = SpaDecoder::new(&code.h_source);
        let a = PowerAllocation { p: 1.0, xi_n: 0.2, xi_f: 0.8, p_r: 1.0 };
        let h = ChannelState { g_sn: 1.0, g_sb: 1.0, g_bn: 0.0, h_bf: 1.0, h_nf: 1.0, h_nb: 0.0 };
        let s = SystemParams { noise_power_w: 1e-12, eta: 0.0, psi_i: 1.0, psi_j: 1.0, ..SystemParams::default() };
        for f in 0..20 {
            let fr = simulate_two_slot_frame(&code, &relay, &a, &h, &s, 10, &mut substream(3, 0, f)).unwrap();
            assert!(fr.relay_converged);
            let d = joint_decode(&code, &fr.slot1, &fr.slot2_info, &fr.slot2_parity, 10).unwrap();
            assert_eq!(code.extract_message(&d.bits), fr.message);
        }
    }

    #[test]
    fn ber_is_deterministic() {
        let code = small_code();
        let setup =
            BerSetup { snr_db: vec![0.0], iteration_budgets: vec![1, 5], min_bits: 2000, ..BerSetup::default() };
        let a = simulate_far_user_ber(&code, &setup).unwrap();
        let b = simulate_far_user_ber(&code, &setup).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 3);
        assert!(a.iter().all(|p| p.bits_simulated >= 2000));
    }
}
