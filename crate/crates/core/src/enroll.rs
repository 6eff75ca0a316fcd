// SPDX-License-Identifier: Apache-2.0

//! Stable-bit selection.
//!
//! Enrollment looks at `N` power-up samples of the same SRAM window:
//!
//! 1. a position is *stable* (S) when every sample agrees on it, otherwise
//!    *unstable* (U);
//! 2. each S position is weighted by how deep it sits in its run of
//!    consecutive S positions: the ends of a run weigh 1 and weights grow by
//!    one per step towards the middle, so a run of 5 weighs `1 2 3 2 1` and
//!    a run of 4 weighs `1 2 2 1`. The window edges bound runs like U cells;
//! 3. positions with weight `>= T` are kept, in ascending order.
//!
//! A [`Mask`] takes the first `target_len` kept positions, spilling into
//! the next block of the window when one block does not yield enough.

use std::ops::Range;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bits::BitVector;
use crate::error::{Error, Result};
use crate::fsutil;

/// Bits per enrollment block (38 words of 32 bits).
pub const DEFAULT_BLOCK_BITS: usize = 1216;
/// Power-ups collected per enrollment.
pub const DEFAULT_SAMPLES: usize = 300;
pub const DEFAULT_THRESHOLD: u32 = 4;
/// Response length; matches the codeword length of the fuzzy extractor.
pub const DEFAULT_TARGET_LEN: usize = 128;

const MASK_FORMAT: &str = "srampuf-mask/1";

/// Per-position S/U marks over one window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilityMap {
    /// Set where the position is stable.
    stable: BitVector,
    sample_count: usize,
}

impl StabilityMap {
    pub fn from_stable_bits(stable: BitVector, sample_count: usize) -> Self {
        StabilityMap {
            stable,
            sample_count,
        }
    }

    pub fn window_length(&self) -> usize {
        self.stable.len()
    }

    pub fn sample_count(&self) -> usize {
        self.sample_count
    }

    pub fn is_stable(&self, i: usize) -> bool {
        self.stable.get(i)
    }

    pub fn stable_bits(&self) -> &BitVector {
        &self.stable
    }

    pub fn stable_count(&self) -> usize {
        self.stable.count_ones()
    }
}

/// Cluster-depth weight of every position; U positions weigh 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightMap {
    pub weights: Vec<u32>,
}

/// Mark positions of `window` that hold the same value in every sample.
pub fn mark_stability(samples: &[BitVector], window: Range<usize>) -> Result<StabilityMap> {
    let Some(first) = samples.first() else {
        return Err(Error::usage("stability needs at least 2 samples, got 0"));
    };
    if samples.len() < 2 {
        return Err(Error::usage("stability needs at least 2 samples, got 1"));
    }
    if let Some(bad) = samples.iter().find(|s| s.len() != first.len()) {
        return Err(Error::LengthMismatch {
            left: first.len(),
            right: bad.len(),
        });
    }
    let reference = first.slice(window.clone())?;
    let mut changed = BitVector::zeros(reference.len());
    for s in &samples[1..] {
        changed.or_assign(&s.slice(window.clone())?.xor(&reference)?)?;
    }
    let stable = changed.xor(&BitVector::ones(changed.len()))?;
    Ok(StabilityMap {
        stable,
        sample_count: samples.len(),
    })
}

/// Weight each stable position by its distance to the nearest run boundary.
pub fn weight_positions(stability: &StabilityMap) -> WeightMap {
    let n = stability.window_length();
    let mut weights = vec![0u32; n];
    let mut i = 0;
    while i < n {
        if !stability.is_stable(i) {
            i += 1;
            continue;
        }
        let start = i;
        while i < n && stability.is_stable(i) {
            i += 1;
        }
        let run = i - start;
        for (offset, w) in weights[start..i].iter_mut().enumerate() {
            *w = (offset + 1).min(run - offset) as u32;
        }
    }
    WeightMap { weights }
}

/// Positions whose weight is at least `threshold`, ascending.
pub fn select_positions(weights: &WeightMap, threshold: u32) -> Result<Vec<usize>> {
    if threshold == 0 {
        return Err(Error::usage("threshold must be at least 1"));
    }
    Ok(weights
        .weights
        .iter()
        .enumerate()
        .filter(|(_, &w)| w >= threshold)
        .map(|(i, _)| i)
        .collect())
}

/// Where enrollment reads and what it keeps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnrollParams {
    /// First bit of window 0 within the dump.
    pub base_offset: usize,
    pub window_length: usize,
    /// Upper bound on the number of consecutive windows to draw from;
    /// `None` uses every full window the dumps provide.
    pub max_windows: Option<usize>,
    pub threshold: u32,
    pub target_len: usize,
}

impl Default for EnrollParams {
    fn default() -> Self {
        EnrollParams {
            base_offset: 0,
            window_length: DEFAULT_BLOCK_BITS,
            max_windows: None,
            threshold: DEFAULT_THRESHOLD,
            target_len: DEFAULT_TARGET_LEN,
        }
    }
}

/// Selected positions plus where they came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mask {
    pub device_id: String,
    /// Bit offset of window 0 in a raw dump.
    pub base_offset: usize,
    pub window_length: usize,
    /// Consecutive windows the positions span.
    pub windows: usize,
    pub threshold: u32,
    /// Number of power-ups the selection was based on.
    pub samples: usize,
    pub target_len: usize,
    /// Ascending, relative to `base_offset`.
    pub positions: Vec<usize>,
}

impl Mask {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::format("mask", m));
        if self.window_length == 0 || self.windows == 0 {
            return bad("window_length and windows must be positive".into());
        }
        if self.threshold == 0 {
            return bad("threshold must be at least 1".into());
        }
        if self.target_len == 0 || self.positions.len() != self.target_len {
            return bad(format!(
                "expected {} positions, found {}",
                self.target_len,
                self.positions.len()
            ));
        }
        if self.positions.windows(2).any(|p| p[0] >= p[1]) {
            return bad("positions must be strictly ascending".into());
        }
        let span = self.windows * self.window_length;
        if self.positions.last().is_some_and(|&p| p >= span) {
            return bad(format!("position beyond the {span}-bit enrolled span"));
        }
        Ok(())
    }

    /// Smallest raw dump length the mask can be applied to.
    pub fn required_len(&self) -> usize {
        self.base_offset + self.positions.last().map_or(0, |p| p + 1)
    }

    pub fn to_text(&self) -> String {
        fsutil::with_format_header(MASK_FORMAT, self)
    }

    pub fn from_text(text: &str) -> Result<Mask> {
        let mask: Mask = fsutil::parse_with_format_header("mask", MASK_FORMAT, text)?;
        mask.validate()?;
        Ok(mask)
    }

    /// SHA-256 of the canonical text, lowercase hex.
    pub fn fingerprint(&self) -> String {
        fsutil::fingerprint(self.to_text().as_bytes())
    }

    /// Load a mask file, returning it with the fingerprint of the bytes on
    /// disk.
    pub fn load(path: &Path) -> Result<(Mask, String)> {
        let bytes = std::fs::read(path)?;
        let text = std::str::from_utf8(&bytes).map_err(|e| Error::format("mask", e))?;
        Ok((Mask::from_text(text)?, fsutil::fingerprint(&bytes)))
    }

    /// Write atomically; returns the fingerprint of what was written.
    pub fn save(&self, path: &Path) -> Result<String> {
        let text = self.to_text();
        fsutil::write_atomic(path, text.as_bytes())?;
        Ok(fsutil::fingerprint(text.as_bytes()))
    }
}

/// Concatenate per-window selections, re-basing window `k` by
/// `k * window_length`, and keep the lowest `target_len` positions.
///
/// Returns the positions and the number of windows consumed, or `None` if
/// the windows run out first.
pub fn assemble_positions(
    per_window: &[Vec<usize>],
    window_length: usize,
    target_len: usize,
) -> Option<(Vec<usize>, usize)> {
    let mut out = Vec::with_capacity(target_len);
    for (k, sel) in per_window.iter().enumerate() {
        let room = target_len - out.len();
        out.extend(sel.iter().take(room).map(|&p| k * window_length + p));
        if out.len() == target_len {
            return Some((out, k + 1));
        }
    }
    None
}

/// Run stability marking, weighting and selection window by window until
/// the mask is full.
pub fn build_mask(samples: &[BitVector], params: &EnrollParams, device_id: &str) -> Result<Mask> {
    if params.window_length == 0 || params.target_len == 0 {
        return Err(Error::usage(
            "window length and target length must be positive",
        ));
    }
    if params.threshold == 0 {
        return Err(Error::usage("threshold must be at least 1"));
    }
    let dump_len = samples.first().map_or(0, BitVector::len);
    let available = dump_len.saturating_sub(params.base_offset) / params.window_length;
    let windows = params.max_windows.map_or(available, |m| m.min(available));
    if windows == 0 {
        return Err(Error::usage(format!(
            "dumps of {dump_len} bits hold no full {}-bit window at offset {}",
            params.window_length, params.base_offset
        )));
    }

    let mut per_window = Vec::new();
    for k in 0..windows {
        let start = params.base_offset + k * params.window_length;
        let stability = mark_stability(samples, start..start + params.window_length)?;
        per_window.push(select_positions(
            &weight_positions(&stability),
            params.threshold,
        )?);
        if let Some((positions, used)) =
            assemble_positions(&per_window, params.window_length, params.target_len)
        {
            return Ok(Mask {
                device_id: device_id.to_string(),
                base_offset: params.base_offset,
                window_length: params.window_length,
                windows: used,
                threshold: params.threshold,
                samples: samples.len(),
                target_len: params.target_len,
                positions,
            });
        }
    }
    let counts: Vec<usize> = per_window.iter().map(Vec::len).collect();
    Err(Error::InsufficientStableBits {
        needed: params.target_len,
        found: counts.iter().sum(),
        per_window: counts,
    })
}
