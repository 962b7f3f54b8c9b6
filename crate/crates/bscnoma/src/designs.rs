//! Langford sequences and the cyclic designs built from them.
//!
//! A Langford sequence of order `w` and defect `v` places two copies of each
//! value `s ∈ [v, v+w−1]` exactly `s` positions apart; the hooked variant has
//! length `2w+1` with a single 0 in position `2w`. Reading each value's pair of
//! positions `(i, j)` as the triple `x = j−i`, `y = i+v+w−1`, `z = j+v+w−1`
//! gives `x + y = z`, and the triples partition the integers from `v` up to
//! `v+3w−1` (or `v+3w` minus `v+3w−1` when hooked). The blocks `{0, x, z}`
//! then have difference sets that cover every residue of `Z_Ω` with
//! `Ω = 6w+2v−1` exactly once, except the contiguous residues `±1..±(v−1)`:
//! they are the base blocks of a cyclic balanced sampling plan excluding
//! contiguous units, block size 3, multiplicity 1.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DesignError {
    #[error("no {kind} Langford sequence of order {w} and defect {v} is guaranteed to exist")]
    NotAdmissible { w: usize, v: usize, kind: &'static str },
    #[error("order and defect must both be at least 1")]
    Degenerate,
    #[error("Langford search gave up after {0} nodes")]
    SearchExhausted(u64),
    #[error("base blocks do not form a cyclic design over Z_{omega}: {reason}")]
    Verification { omega: usize, reason: String },
    #[error("malformed block list: {0}")]
    Parse(String),
}

/// Upper bound on backtracking nodes before giving up.
pub const SEARCH_BUDGET: u64 = 200_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LangfordSequence {
    pub order: usize,
    pub defect: usize,
    pub hooked: bool,
    pub entries: Vec<usize>,
}

impl fmt::Display for LangfordSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.entries.iter().map(|e| e.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Whether the residue conditions on `(w mod 4, v mod 2)` and the size bound
/// guarantee a sequence of the requested kind.
pub fn admissible(w: usize, v: usize, hooked: bool) -> bool {
    if w == 0 || v == 0 {
        return false;
    }
    let (wi, vi) = (w as i64, v as i64);
    let class = (w % 4, v % 2);
    if hooked {
        wi * (wi - 2 * vi + 1) + 2 >= 0 && matches!(class, (2, 0) | (1, 0) | (2, 1) | (3, 1))
    } else {
        wi >= 2 * vi - 1 && matches!(class, (0, 1) | (1, 1) | (0, 0) | (3, 0))
    }
}

/// Finds a Langford sequence by backtracking, placing the largest values first.
pub fn langford_sequence(w: usize, v: usize, hooked: bool) -> Result<LangfordSequence, DesignError> {
    if w == 0 || v == 0 {
        return Err(DesignError::Degenerate);
    }
    if !admissible(w, v, hooked) {
        return Err(DesignError::NotAdmissible { w, v, kind: if hooked { "hooked" } else { "perfect" } });
    }
    let len = if hooked { 2 * w + 1 } else { 2 * w };
    let mut slots = vec![None; len];
    if hooked {
        slots[2 * w - 1] = Some(0);
    }
    let mut nodes = 0u64;
    let values: Vec<usize> = (v..v + w).rev().collect();
    if place(&values, &mut slots, &mut nodes)? {
        let entries = slots.into_iter().map(|s| s.expect("every slot filled")).collect();
        Ok(LangfordSequence { order: w, defect: v, hooked, entries })
    } else {
        Err(DesignError::SearchExhausted(nodes))
    }
}

fn place(values: &[usize], slots: &mut [Option<usize>], nodes: &mut u64) -> Result<bool, DesignError> {
    let Some((&s, rest)) = values.split_first() else {
        return Ok(true);
    };
    for i in 0..slots.len().saturating_sub(s) {
        *nodes += 1;
        if *nodes > SEARCH_BUDGET {
            return Err(DesignError::SearchExhausted(*nodes));
        }
        if slots[i].is_none() && slots[i + s].is_none() {
            slots[i] = Some(s);
            slots[i + s] = Some(s);
            if place(rest, slots, nodes)? {
                return Ok(true);
            }
            slots[i] = None;
            slots[i + s] = None;
        }
    }
    Ok(false)
}

/// Checks every defining property of a (possibly hooked) Langford sequence.
pub fn verify_langford(seq: &LangfordSequence) -> bool {
    let (w, v) = (seq.order, seq.defect);
    if w == 0 || v == 0 {
        return false;
    }
    let len = if seq.hooked { 2 * w + 1 } else { 2 * w };
    if seq.entries.len() != len {
        return false;
    }
    let zeros: Vec<usize> = (0..len).filter(|&i| seq.entries[i] == 0).collect();
    if seq.hooked != (zeros == [2 * w - 1]) || (!seq.hooked && !zeros.is_empty()) {
        return false;
    }
    for s in v..v + w {
        let pos: Vec<usize> = (0..len).filter(|&i| seq.entries[i] == s).collect();
        if pos.len() != 2 || pos[1] - pos[0] != s {
            return false;
        }
    }
    seq.entries.iter().all(|&e| e == 0 || (v..v + w).contains(&e))
}

/// A triple `{x, y, z}` with `x + y = z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Triple {
    pub x: usize,
    pub y: usize,
    pub z: usize,
}

/// Converts each value's position pair into a triple, ordered by `x`.
pub fn triples_from_sequence(seq: &LangfordSequence) -> Vec<Triple> {
    let (w, v) = (seq.order, seq.defect);
    let mut out = Vec::with_capacity(w);
    for s in v..v + w {
        let mut pos = seq.entries.iter().enumerate().filter(|(_, &e)| e == s).map(|(i, _)| i + 1);
        let (i, j) = (pos.next().expect("value present"), pos.next().expect("value present twice"));
        out.push(Triple { x: j - i, y: i + v + w - 1, z: j + v + w - 1 });
    }
    out
}

/// The value set the triples of an order-`w`, defect-`v` sequence must partition.
pub fn expected_triple_values(w: usize, v: usize, hooked: bool) -> Vec<usize> {
    if hooked {
        (v..=v + 3 * w).filter(|&t| t != v + 3 * w - 1).collect()
    } else {
        (v..v + 3 * w).collect()
    }
}

/// Base blocks of a cyclic `(Ω, f, χ; Ξ)` design.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CbsecDesign {
    pub omega: usize,
    pub f: usize,
    pub chi: usize,
    pub xi: usize,
    pub base_blocks: Vec<Vec<usize>>,
}

impl CbsecDesign {
    /// Number of base blocks (the Langford order for designs built here).
    pub fn w(&self) -> usize {
        self.base_blocks.len()
    }

    /// Every block of the design: each base block and its `Ω−1` cyclic translates.
    pub fn develop(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::with_capacity(self.omega * self.base_blocks.len());
        for b in &self.base_blocks {
            for t in 0..self.omega {
                out.push(b.iter().map(|&e| (e + t) % self.omega).collect());
            }
        }
        out
    }

    /// One base block per line, residues separated by commas.
    pub fn to_block_list(&self) -> String {
        let mut s = String::new();
        for b in &self.base_blocks {
            let parts: Vec<String> = b.iter().map(|e| e.to_string()).collect();
            s.push_str(&parts.join(","));
            s.push('\n');
        }
        s
    }

    /// Parses [`CbsecDesign::to_block_list`] output; the caller supplies the
    /// parameters the list does not carry.
    pub fn from_block_list(text: &str, omega: usize, chi: usize, xi: usize) -> Result<Self, DesignError> {
        let mut blocks = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let block: Result<Vec<usize>, _> = line.split(',').map(|t| t.trim().parse::<usize>()).collect();
            blocks.push(block.map_err(|e| DesignError::Parse(format!("{line:?}: {e}")))?);
        }
        let f = blocks.first().map_or(0, Vec::len);
        if blocks.iter().any(|b| b.len() != f) {
            return Err(DesignError::Parse("blocks of unequal size".into()));
        }
        Ok(Self { omega, f, chi, xi, base_blocks: blocks })
    }
}

/// The modulus for which the ± differences of the `3w` triple values tile the
/// admissible residues exactly once.
pub fn modulus_for(w: usize, v: usize) -> usize {
    6 * w + 2 * v - 1
}

/// Builds the base blocks `{0, x, z}` and verifies the result.
pub fn cbsec_from_triples(triples: &[Triple], omega: usize, xi: usize) -> Result<CbsecDesign, DesignError> {
    let d = CbsecDesign {
        omega,
        f: 3,
        chi: 1,
        xi,
        base_blocks: triples.iter().map(|t| vec![0, t.x % omega, t.z % omega]).collect(),
    };
    check_cbsec(&d).map_err(|reason| DesignError::Verification { omega, reason })?;
    Ok(d)
}

/// Langford sequence → triples → design, picking the perfect or hooked variant
/// that the residue conditions admit.
pub fn design_for(w: usize, v: usize) -> Result<(LangfordSequence, CbsecDesign), DesignError> {
    let hooked = if admissible(w, v, false) {
        false
    } else if admissible(w, v, true) {
        true
    } else {
        return Err(DesignError::NotAdmissible { w, v, kind: "perfect or hooked" });
    };
    let seq = langford_sequence(w, v, hooked)?;
    let design = cbsec_from_triples(&triples_from_sequence(&seq), modulus_for(w, v), v - 1)?;
    Ok((seq, design))
}

/// Brute-force coverage check: the multiset of all within-block differences is
/// exactly `χ` copies of each residue `d` with `Ξ < min(d, Ω−d)`, and nothing else.
pub fn verify_cbsec(d: &CbsecDesign) -> bool {
    check_cbsec(d).is_ok()
}

fn check_cbsec(d: &CbsecDesign) -> Result<(), String> {
    let om = d.omega;
    if om == 0 {
        return Err("zero modulus".into());
    }
    let mut count = vec![0usize; om];
    for b in &d.base_blocks {
        if b.len() != d.f {
            return Err(format!("block {b:?} does not have size {}", d.f));
        }
        if b.iter().any(|&e| e >= om) {
            return Err(format!("block {b:?} has an element outside Z_{om}"));
        }
        for (i, &a) in b.iter().enumerate() {
            for (j, &c) in b.iter().enumerate() {
                if i != j {
                    count[(a + om - c) % om] += 1;
                }
            }
        }
    }
    for (r, &c) in count.iter().enumerate() {
        let admissible = r.min(om - r) > d.xi;
        let want = if admissible { d.chi } else { 0 };
        if c != want {
            return Err(format!("residue {r} covered {c} times, expected {want}"));
        }
    }
    Ok(())
}
