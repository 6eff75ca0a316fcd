// SPDX-License-Identifier: Apache-2.0

//! Evaluation reports: per-block stability, threshold sweeps and flip
//! rates of masked responses.

use std::ops::RangeInclusive;

use crate::bits::BitVector;
use crate::enroll::{mark_stability, select_positions, weight_positions, Mask};
use crate::error::{Error, Result};
use crate::keygen::apply_mask;

/// Stable/unstable split of one block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockReport {
    pub block_index: usize,
    pub stable_count: usize,
    pub unstable_count: usize,
    pub stable_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockStats {
    pub block_size: usize,
    pub blocks: Vec<BlockReport>,
    /// Trailing bits that do not fill a block.
    pub skipped_bits: usize,
}

/// Stability of every full block of the samples.
pub fn block_stability(samples: &[BitVector], block_size: usize) -> Result<BlockStats> {
    if block_size == 0 {
        return Err(Error::usage("block size must be positive"));
    }
    let len = samples.first().map_or(0, BitVector::len);
    let stability = mark_stability(samples, 0..len)?;
    let n_blocks = len / block_size;
    let blocks = (0..n_blocks)
        .map(|b| {
            let start = b * block_size;
            let stable_count = (start..start + block_size)
                .filter(|&i| stability.is_stable(i))
                .count();
            BlockReport {
                block_index: b,
                stable_count,
                unstable_count: block_size - stable_count,
                stable_fraction: stable_count as f64 / block_size as f64,
            }
        })
        .collect();
    Ok(BlockStats {
        block_size,
        blocks,
        skipped_bits: len - n_blocks * block_size,
    })
}

impl BlockStats {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["block", "stable", "unstable", "stable_fraction"])
            .unwrap();
        for b in &self.blocks {
            w.write_record([
                b.block_index.to_string(),
                b.stable_count.to_string(),
                b.unstable_count.to_string(),
                format!("{:.6}", b.stable_fraction),
            ])
            .unwrap();
        }
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }
}

/// Fraction of positions where at least one sample differs from
/// `reference`.
pub fn window_flip_rate(reference: &BitVector, samples: &[BitVector]) -> Result<f64> {
    if reference.is_empty() {
        return Err(Error::usage("empty reference"));
    }
    let mut changed = BitVector::zeros(reference.len());
    for s in samples {
        changed.or_assign(&s.xor(reference)?)?;
    }
    Ok(changed.count_ones() as f64 / reference.len() as f64)
}

/// One block at one threshold under one test condition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepRow {
    pub condition: String,
    pub threshold: u32,
    pub block_index: usize,
    /// Positions with weight >= threshold.
    pub selected: usize,
    pub samples: usize,
    /// Largest number of selected positions that flipped in one sample.
    pub max_flips: usize,
    pub zero_flips: usize,
    pub one_flip: usize,
    pub two_plus_flips: usize,
}

fn pct(count: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        100.0 * count as f64 / total as f64
    }
}

impl SweepRow {
    pub fn pct_zero(&self) -> f64 {
        pct(self.zero_flips, self.samples)
    }
    pub fn pct_one(&self) -> f64 {
        pct(self.one_flip, self.samples)
    }
    pub fn pct_two_plus(&self) -> f64 {
        pct(self.two_plus_flips, self.samples)
    }
}

/// Per (condition, threshold) aggregate over all blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub condition: String,
    pub threshold: u32,
    pub mean_selected: f64,
    pub max_flips: usize,
    /// Percentages over all (block, sample) pairs.
    pub pct_zero: f64,
    pub pct_one: f64,
    pub pct_two_plus: f64,
}

/// Rows ordered by condition (as given), threshold, block.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn summary(&self) -> Vec<SweepSummary> {
        let mut out: Vec<SweepSummary> = Vec::new();
        let mut i = 0;
        while i < self.rows.len() {
            let head = &self.rows[i];
            let group: Vec<&SweepRow> = self.rows[i..]
                .iter()
                .take_while(|r| r.condition == head.condition && r.threshold == head.threshold)
                .collect();
            let total: usize = group.iter().map(|r| r.samples).sum();
            let sum = |f: fn(&SweepRow) -> usize| group.iter().map(|r| f(r)).sum::<usize>();
            out.push(SweepSummary {
                condition: head.condition.clone(),
                threshold: head.threshold,
                mean_selected: sum(|r| r.selected) as f64 / group.len() as f64,
                max_flips: group.iter().map(|r| r.max_flips).max().unwrap_or(0),
                pct_zero: pct(sum(|r| r.zero_flips), total),
                pct_one: pct(sum(|r| r.one_flip), total),
                pct_two_plus: pct(sum(|r| r.two_plus_flips), total),
            });
            i += group.len();
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "condition",
            "threshold",
            "block",
            "selected",
            "samples",
            "max_flips",
            "pct_0",
            "pct_1",
            "pct_2plus",
        ])
        .unwrap();
        for r in &self.rows {
            w.write_record([
                r.condition.clone(),
                r.threshold.to_string(),
                r.block_index.to_string(),
                r.selected.to_string(),
                r.samples.to_string(),
                r.max_flips.to_string(),
                format!("{:.4}", r.pct_zero()),
                format!("{:.4}", r.pct_one()),
                format!("{:.4}", r.pct_two_plus()),
            ])
            .unwrap();
        }
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }
}

/// Select positions per block from `enroll` at every threshold in
/// `thresholds`, then count how many selected bits flip in each test sample
/// relative to the first enrollment sample.
pub fn threshold_sweep(
    enroll: &[BitVector],
    tests: &[(String, Vec<BitVector>)],
    thresholds: RangeInclusive<u32>,
    block_size: usize,
) -> Result<SweepReport> {
    if block_size == 0 {
        return Err(Error::usage("block size must be positive"));
    }
    if *thresholds.start() == 0 {
        return Err(Error::usage("thresholds start at 1"));
    }
    let len = enroll.first().map_or(0, BitVector::len);
    let n_blocks = len / block_size;
    let reference = &enroll
        .first()
        .ok_or_else(|| Error::usage("no enrollment samples"))?;

    // selected[t][b]: positions (absolute) kept in block b at threshold t
    let mut weights = Vec::with_capacity(n_blocks);
    for b in 0..n_blocks {
        let stability = mark_stability(enroll, b * block_size..(b + 1) * block_size)?;
        weights.push(weight_positions(&stability));
    }
    let mut selections: Vec<(u32, Vec<usize>, BitVector)> = Vec::new();
    for t in thresholds {
        let mut selected_bits = BitVector::zeros(len);
        let mut counts = Vec::with_capacity(n_blocks);
        for (b, w) in weights.iter().enumerate() {
            let sel = select_positions(w, t)?;
            counts.push(sel.len());
            for p in sel {
                selected_bits.set(b * block_size + p, true);
            }
        }
        selections.push((t, counts, selected_bits));
    }

    let mut rows = Vec::new();
    for (condition, samples) in tests {
        let diffs: Vec<BitVector> = samples
            .iter()
            .map(|s| s.xor(reference))
            .collect::<Result<_>>()?;
        for (t, counts, selected_bits) in &selections {
            // flips[b][k]: flipped selected bits of block b in sample k
            let mut flips = vec![vec![0usize; samples.len()]; n_blocks];
            for (k, d) in diffs.iter().enumerate() {
                for i in d.and(selected_bits)?.iter_ones() {
                    let b = i / block_size;
                    if b < n_blocks {
                        flips[b][k] += 1;
                    }
                }
            }
            for (b, per_sample) in flips.iter().enumerate() {
                rows.push(SweepRow {
                    condition: condition.clone(),
                    threshold: *t,
                    block_index: b,
                    selected: counts[b],
                    samples: samples.len(),
                    max_flips: per_sample.iter().copied().max().unwrap_or(0),
                    zero_flips: per_sample.iter().filter(|&&f| f == 0).count(),
                    one_flip: per_sample.iter().filter(|&&f| f == 1).count(),
                    two_plus_flips: per_sample.iter().filter(|&&f| f >= 2).count(),
                });
            }
        }
    }
    Ok(SweepReport { rows })
}

/// How often a masked response deviates from the enrolled one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlipSummary {
    pub samples: usize,
    /// Samples whose masked response differs in at least one bit.
    pub flipped_samples: usize,
    pub max_flips: usize,
    /// `histogram[f]`: samples with exactly `f` flipped bits.
    pub histogram: Vec<usize>,
}

impl FlipSummary {
    /// Percentage of samples with at least one flipped bit.
    pub fn flip_rate_pct(&self) -> f64 {
        pct(self.flipped_samples, self.samples)
    }

    /// Samples with at most `f` flipped bits.
    pub fn at_most(&self, f: usize) -> usize {
        self.histogram.iter().take(f + 1).sum()
    }
}

/// Compare the masked response of every raw test sample with `reference`.
pub fn flip_rate_summary(
    mask: &Mask,
    reference: &BitVector,
    test_samples: &[BitVector],
) -> Result<FlipSummary> {
    let mut histogram = vec![0usize; reference.len() + 1];
    for raw in test_samples {
        let y = apply_mask(raw, mask)?;
        histogram[y.hamming_distance(reference)?] += 1;
    }
    let max_flips = histogram.iter().rposition(|&c| c > 0).unwrap_or(0);
    histogram.truncate(max_flips + 1);
    Ok(FlipSummary {
        samples: test_samples.len(),
        flipped_samples: test_samples.len() - histogram[0],
        max_flips,
        histogram,
    })
}
