//! Encoding, relay re-encoding and sum-product decoding.
//!
//! The far user's codeword `c` (length `N`) lies in the intersection of the
//! null spaces of `H¹` and `H²`. In the second slot the relay forwards `c`
//! together with `J₃` parity bits `p = (H³_sq)⁻¹·H³·c`, so that `[c p]`
//! satisfies
//!
//! ```text
//! [ H¹   0     ]
//! [ H²   0     ] · [c p]ᵀ = 0.
//! [ H³   H³_sq ]
//! ```
//!
//! LLRs are positive when bit 0 is more likely. A posterior LLR of exactly
//! zero decodes to 0.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf2::BitMatrix;
use crate::qcldpc::{joint_parity_matrix, CodeError, JointComponents, ParityCheckMatrix};

/// Message magnitudes are clamped here to keep `exp` finite.
pub const LLR_CLAMP: f64 = 50.0;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("[H¹; H²] has full column rank, the code carries no information")]
    UnusableCode,
    #[error("relay parity block is singular over GF(2)")]
    SingularRelayBlock,
    #[error("expected {expected} values, got {got}")]
    Length { expected: usize, got: usize },
    #[error(transparent)]
    Construction(#[from] CodeError),
}

/// Everything needed to encode and jointly decode one far-user frame.
#[derive(Debug, Clone)]
pub struct CodeSpec {
    pub h_source: ParityCheckMatrix,
    pub h_relay_left: ParityCheckMatrix,
    pub h_relay_right: ParityCheckMatrix,
    /// `k × N` systematic generator.
    pub generator: BitMatrix,
    /// Column of the codeword carrying message bit `j`.
    pub info_columns: Vec<usize>,
    pub joint: ParityCheckMatrix,
    generator_t: BitMatrix,
    relay_inverse: BitMatrix,
}

impl CodeSpec {
    pub fn k(&self) -> usize {
        self.info_columns.len()
    }

    pub fn n(&self) -> usize {
        self.h_source.cols()
    }

    pub fn j3(&self) -> usize {
        self.h_relay_right.rows()
    }

    /// Pulls the message back out of a (decoded) codeword.
    pub fn extract_message(&self, codeword: &[u8]) -> Vec<u8> {
        self.info_columns.iter().map(|&c| codeword[c]).collect()
    }
}

pub fn build_code(
    h1: &ParityCheckMatrix,
    h2: &ParityCheckMatrix,
    h3_left: &ParityCheckMatrix,
    h3_right: &ParityCheckMatrix,
) -> Result<CodeSpec, CodecError> {
    let joint = match joint_parity_matrix(h1, h2, h3_left, h3_right) {
        Ok(j) => j.matrix,
        Err(CodeError::SingularRelayBlock) => return Err(CodecError::SingularRelayBlock),
        Err(e) => return Err(e.into()),
    };
    let h_source = h1.vstack(h2)?;
    let (generator, info_columns) = h_source.to_dense().null_space();
    if info_columns.is_empty() {
        return Err(CodecError::UnusableCode);
    }
    let relay_inverse = h3_right.to_dense().inverse().ok_or(CodecError::SingularRelayBlock)?;
    Ok(CodeSpec {
        generator_t: generator.transpose(),
        h_source,
        h_relay_left: h3_left.clone(),
        h_relay_right: h3_right.clone(),
        generator,
        info_columns,
        joint,
        relay_inverse,
    })
}

/// Convenience wrapper over [`build_code`] for carved-out components.
pub fn build_code_from(parts: &JointComponents) -> Result<CodeSpec, CodecError> {
    build_code(&parts.h1, &parts.h2, &parts.h3_left, &parts.h3_right)
}

fn check_len(expected: usize, got: usize) -> Result<(), CodecError> {
    if expected == got {
        Ok(())
    } else {
        Err(CodecError::Length { expected, got })
    }
}

/// `c = m·G`.
pub fn encode(spec: &CodeSpec, message: &[u8]) -> Result<Vec<u8>, CodecError> {
    check_len(spec.k(), message.len())?;
    Ok(spec.generator_t.mul_vec(message))
}

/// Parity bits the relay appends to a codeword.
pub fn relay_reencode(spec: &CodeSpec, codeword: &[u8]) -> Result<Vec<u8>, CodecError> {
    check_len(spec.n(), codeword.len())?;
    Ok(spec.relay_inverse.mul_vec(&spec.h_relay_left.syndrome(codeword)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeOutcome {
    pub bits: Vec<u8>,
    /// All parity checks hold for `bits`.
    pub converged: bool,
    pub iterations_used: usize,
}

/// `2·atanh(tanh(a/2)·tanh(b/2))` in its overflow-free form.
#[inline]
pub fn box_plus(a: f64, b: f64) -> f64 {
    let s = a.signum() * b.signum();
    let m = a.abs().min(b.abs());
    s * m + (-(a + b).abs()).exp().ln_1p() - (-(a - b).abs()).exp().ln_1p()
}

/// Tanner graph laid out for flooding: edges are numbered row by row.
#[derive(Debug, Clone)]
pub struct SpaDecoder {
    h: ParityCheckMatrix,
    row_start: Vec<usize>,
    edge_var: Vec<usize>,
    /// For each variable, the edges touching it.
    var_edges: Vec<Vec<usize>>,
}

impl SpaDecoder {
    pub fn new(h: &ParityCheckMatrix) -> Self {
        let mut row_start = vec![0];
        let mut edge_var = Vec::with_capacity(h.ones());
        let mut var_edges = vec![Vec::new(); h.cols()];
        for r in 0..h.rows() {
            for &c in h.row(r) {
                var_edges[c].push(edge_var.len());
                edge_var.push(c);
            }
            row_start.push(edge_var.len());
        }
        Self { h: h.clone(), row_start, edge_var, var_edges }
    }

    pub fn matrix(&self) -> &ParityCheckMatrix {
        &self.h
    }

    /// Runs up to `max_iters` flooding iterations, stopping early once every
    /// check is satisfied.
    pub fn decode(&self, llr: &[f64], max_iters: usize) -> Result<DecodeOutcome, CodecError> {
        check_len(self.h.cols(), llr.len())?;
        let max_iters = max_iters.max(1);
        let clamp = |x: f64| x.clamp(-LLR_CLAMP, LLR_CLAMP);
        let channel: Vec<f64> = llr.iter().map(|&x| clamp(x)).collect();
        let mut v2c: Vec<f64> = self.edge_var.iter().map(|&v| channel[v]).collect();
        let mut c2v = vec![0.0; v2c.len()];
        let mut fwd = Vec::new();
        let mut bits = vec![0u8; llr.len()];
        let mut posterior = vec![0.0; llr.len()];
        for it in 1..=max_iters {
            for r in 0..self.h.rows() {
                let (lo, hi) = (self.row_start[r], self.row_start[r + 1]);
                let d = hi - lo;
                if d == 1 {
                    c2v[lo] = 0.0;
                    continue;
                }
                // Forward prefixes in `fwd`, then sweep back with a suffix.
                fwd.clear();
                let mut acc = v2c[lo];
                fwd.push(acc);
                for &m in &v2c[lo + 1..hi - 1] {
                    acc = box_plus(acc, m);
                    fwd.push(acc);
                }
                let mut suffix = v2c[hi - 1];
                c2v[hi - 1] = clamp(fwd[d - 2]);
                for i in (1..d - 1).rev() {
                    c2v[lo + i] = clamp(box_plus(fwd[i - 1], suffix));
                    suffix = box_plus(suffix, v2c[lo + i]);
                }
                c2v[lo] = clamp(suffix);
            }
            for (v, edges) in self.var_edges.iter().enumerate() {
                let total = channel[v] + edges.iter().map(|&e| c2v[e]).sum::<f64>();
                posterior[v] = total;
                bits[v] = u8::from(total < 0.0);
                for &e in edges {
                    v2c[e] = clamp(total - c2v[e]);
                }
            }
            if self.h.is_codeword(&bits) {
                return Ok(DecodeOutcome { bits, converged: true, iterations_used: it });
            }
        }
        Ok(DecodeOutcome { bits, converged: false, iterations_used: max_iters })
    }
}

/// One-shot sum-product decode; build a [`SpaDecoder`] to decode many frames.
pub fn spa_decode(h: &ParityCheckMatrix, llr: &[f64], max_iters: usize) -> Result<DecodeOutcome, CodecError> {
    SpaDecoder::new(h).decode(llr, max_iters)
}

/// Combines both slots' observations of `c` and decodes over the joint matrix.
pub fn joint_llrs(
    spec: &CodeSpec,
    slot1: &[f64],
    slot2_info: &[f64],
    slot2_parity: &[f64],
) -> Result<Vec<f64>, CodecError> {
    check_len(spec.n(), slot1.len())?;
    check_len(spec.n(), slot2_info.len())?;
    check_len(spec.j3(), slot2_parity.len())?;
    Ok(slot1.iter().zip(slot2_info).map(|(a, b)| a + b).chain(slot2_parity.iter().copied()).collect())
}

pub fn joint_decode(
    spec: &CodeSpec,
    llr_slot1: &[f64],
    llr_slot2_info: &[f64],
    llr_slot2_parity: &[f64],
    max_iters: usize,
) -> Result<DecodeOutcome, CodecError> {
    let llr = joint_llrs(spec, llr_slot1, llr_slot2_info, llr_slot2_parity)?;
    spa_decode(&spec.joint, &llr, max_iters)
}

/// Maps bits to noiseless LLRs of magnitude `mag`.
pub fn bits_to_llr(bits: &[u8], mag: f64) -> Vec<f64> {
    bits.iter().map(|&b| if b & 1 == 0 { mag } else { -mag }).collect()
}
