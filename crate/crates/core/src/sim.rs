// SPDX-License-Identifier: Apache-2.0

//! Seedable model of SRAM power-up behaviour.
//!
//! A [`DeviceModel`] stands in for one chip. Each cell has a favoured
//! power-up value and a probability of coming up the other way. Cells fall
//! in two classes:
//!
//! * **unstable** cells flip with `flip_prob_unstable` on every power-up;
//! * **stable** cells flip with a small probability that decays
//!   geometrically with the distance to the nearest unstable cell, so a
//!   stable cell deep inside a stable cluster is steadier than one at the
//!   edge of it.
//!
//! Which cells are unstable is decided by a latent uniform field blended
//! with a moving average of itself (`cluster_correlation`, radius
//! `cluster_radius`). The lowest `unstable_fraction` of the blended field is
//! unstable. The favoured values are independent fair coins.
//!
//! Operating conditions scale every cell's flip probability by a noise
//! multiplier (clamped to 1). Sampling is a pure function of the device
//! seed, the calibration, the condition and the sample seed.

use std::fmt;
use std::ops::Range;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitVector;
use crate::error::{Error, Result};

/// Cells in the simulated SRAM window (3,750 words of 32 bits).
pub const DEFAULT_NUM_BITS: usize = 120_000;

/// Knobs of the power-up model. Defaults reproduce a roughly 25%
/// unstable share with per-block stable fractions inside 72–78%.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Calibration {
    /// Share of cells that are intrinsically unstable.
    pub unstable_fraction: f64,
    /// Radius of the moving average applied to the latent field.
    pub cluster_radius: usize,
    /// Blend weight of the smoothed field, 0 = no spatial correlation.
    pub cluster_correlation: f64,
    /// Per-power-up flip probability of an unstable cell.
    pub flip_prob_unstable: f64,
    /// Flip probability of a stable cell adjacent to an unstable one.
    pub marginal_flip_prob: f64,
    /// Factor applied to the marginal flip probability per extra cell of
    /// distance from the nearest unstable cell.
    pub marginal_decay: f64,
    pub htna_multiplier: f64,
    pub ntwa_multiplier: f64,
}

impl Default for Calibration {
    fn default() -> Self {
        Calibration {
            unstable_fraction: 0.23,
            cluster_radius: 1,
            cluster_correlation: 0.3,
            flip_prob_unstable: 0.2,
            marginal_flip_prob: 1.5e-4,
            marginal_decay: 0.3,
            htna_multiplier: 1.33,
            ntwa_multiplier: 1.67,
        }
    }
}

impl Calibration {
    /// A calibration whose cells never flip.
    pub fn noiseless() -> Self {
        Calibration {
            unstable_fraction: 0.0,
            ..Calibration::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::usage(format!("{name} must be in [0, 1], got {v}")))
            }
        };
        unit("unstable_fraction", self.unstable_fraction)?;
        unit("cluster_correlation", self.cluster_correlation)?;
        unit("flip_prob_unstable", self.flip_prob_unstable)?;
        unit("marginal_flip_prob", self.marginal_flip_prob)?;
        unit("marginal_decay", self.marginal_decay)?;
        for (name, m) in [
            ("htna_multiplier", self.htna_multiplier),
            ("ntwa_multiplier", self.ntwa_multiplier),
        ] {
            if !(m.is_finite() && m >= 1.0) {
                return Err(Error::usage(format!("{name} must be >= 1, got {m}")));
            }
        }
        if self.cluster_radius > 1024 {
            return Err(Error::usage("cluster_radius must be at most 1024"));
        }
        Ok(())
    }

    pub fn condition(&self, kind: ConditionKind) -> Condition {
        let noise_multiplier = match kind {
            ConditionKind::Ntna => 1.0,
            ConditionKind::Htna => self.htna_multiplier,
            ConditionKind::Ntwa => self.ntwa_multiplier,
        };
        Condition {
            kind,
            noise_multiplier,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cal: Calibration = toml::from_str(text).map_err(|e| Error::format("calibration", e))?;
        cal.validate()?;
        Ok(cal)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("calibration serialises")
    }

    pub fn load(path: &Path) -> Result<Self> {
        Calibration::from_toml(&std::fs::read_to_string(path)?)
    }
}

/// Test condition from the evaluation protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConditionKind {
    /// Normal temperature, no aging.
    Ntna,
    /// High temperature, no aging.
    Htna,
    /// Normal temperature after aging.
    Ntwa,
}

impl ConditionKind {
    pub const ALL: [ConditionKind; 3] = [
        ConditionKind::Ntna,
        ConditionKind::Htna,
        ConditionKind::Ntwa,
    ];

    fn code(self) -> u8 {
        match self {
            ConditionKind::Ntna => 0,
            ConditionKind::Htna => 1,
            ConditionKind::Ntwa => 2,
        }
    }
}

impl fmt::Display for ConditionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConditionKind::Ntna => "NTNA",
            ConditionKind::Htna => "HTNA",
            ConditionKind::Ntwa => "NTWA",
        })
    }
}

impl FromStr for ConditionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "NTNA" => Ok(ConditionKind::Ntna),
            "HTNA" => Ok(ConditionKind::Htna),
            "NTWA" => Ok(ConditionKind::Ntwa),
            _ => Err(Error::usage(format!(
                "unknown condition {s:?} (expected NTNA, HTNA or NTWA)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Condition {
    pub kind: ConditionKind,
    pub noise_multiplier: f64,
}

impl Condition {
    pub fn ntna() -> Self {
        Condition {
            kind: ConditionKind::Ntna,
            noise_multiplier: 1.0,
        }
    }

    /// Condition with an explicit multiplier. NTNA is pinned at 1.
    pub fn with_multiplier(kind: ConditionKind, noise_multiplier: f64) -> Result<Self> {
        let ok = match kind {
            ConditionKind::Ntna => noise_multiplier == 1.0,
            _ => noise_multiplier.is_finite() && noise_multiplier >= 1.0,
        };
        if !ok {
            return Err(Error::usage(format!(
                "invalid noise multiplier {noise_multiplier} for {kind}"
            )));
        }
        Ok(Condition {
            kind,
            noise_multiplier,
        })
    }
}

/// One simulated chip.
#[derive(Debug, Clone)]
pub struct DeviceModel {
    device_id: String,
    seed: u64,
    calibration: Calibration,
    favored: BitVector,
    flip_prob: Vec<f64>,
    unstable: BitVector,
}

impl DeviceModel {
    /// Build a device deterministically from its seed.
    pub fn new(seed: u64, num_bits: usize, calibration: &Calibration) -> Result<Self> {
        if num_bits == 0 {
            return Err(Error::usage("device must have at least one cell"));
        }
        calibration.validate()?;

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let latent: Vec<f64> = (0..num_bits).map(|_| rng.random::<f64>()).collect();
        let field = blend_moving_average(
            &latent,
            calibration.cluster_radius,
            calibration.cluster_correlation,
        );

        let n_unstable = (calibration.unstable_fraction * num_bits as f64).round() as usize;
        let mut order: Vec<usize> = (0..num_bits).collect();
        order.sort_unstable_by(|&a, &b| field[a].total_cmp(&field[b]).then(a.cmp(&b)));
        let mut unstable = BitVector::zeros(num_bits);
        for &i in &order[..n_unstable.min(num_bits)] {
            unstable.set(i, true);
        }

        let distance = distance_to_marked(&unstable);
        let flip_prob = (0..num_bits)
            .map(|i| {
                if unstable.get(i) {
                    calibration.flip_prob_unstable
                } else {
                    match distance[i] {
                        Some(d) => {
                            let exp = i32::try_from(d - 1).unwrap_or(i32::MAX);
                            calibration.marginal_flip_prob * calibration.marginal_decay.powi(exp)
                        }
                        None => 0.0,
                    }
                }
            })
            .collect();

        rng.set_stream(1);
        let favored = BitVector::from_bools((0..num_bits).map(|_| rng.random::<bool>()));

        Ok(DeviceModel {
            device_id: format!("sim-{seed}"),
            seed,
            calibration: calibration.clone(),
            favored,
            flip_prob,
            unstable,
        })
    }

    pub fn device_id(&self) -> &str {
        &self.device_id
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn num_bits(&self) -> usize {
        self.flip_prob.len()
    }

    pub fn calibration(&self) -> &Calibration {
        &self.calibration
    }

    /// Probability that cell `i` powers up as 1 under NTNA.
    pub fn cell_bias(&self, i: usize) -> f64 {
        if self.favored.get(i) {
            1.0 - self.flip_prob[i]
        } else {
            self.flip_prob[i]
        }
    }

    /// Probability that cell `i` powers up opposite to its favoured value.
    pub fn flip_probability(&self, i: usize, condition: &Condition) -> f64 {
        (self.flip_prob[i] * condition.noise_multiplier).min(1.0)
    }

    /// Favoured power-up values, i.e. the noiseless fingerprint.
    pub fn favored(&self) -> &BitVector {
        &self.favored
    }

    /// Cells that are intrinsically unstable.
    pub fn unstable_cells(&self) -> &BitVector {
        &self.unstable
    }

    /// A full power-up read.
    pub fn power_up_sample(&self, condition: &Condition, sample_seed: u64) -> BitVector {
        self.sample_cells(condition, sample_seed, 0..self.num_bits())
    }

    /// Power-up read restricted to `range`. Bit-identical to slicing the
    /// corresponding full sample.
    pub fn power_up_range(
        &self,
        condition: &Condition,
        sample_seed: u64,
        range: Range<usize>,
    ) -> Result<BitVector> {
        if range.start > range.end || range.end > self.num_bits() {
            return Err(Error::usage(format!(
                "range {}..{} outside device of {} cells",
                range.start,
                range.end,
                self.num_bits()
            )));
        }
        Ok(self.sample_cells(condition, sample_seed, range))
    }

    /// `n` consecutive power-ups with sample seeds `seed0, seed0 + 1, ...`.
    pub fn collect_samples(
        &self,
        condition: &Condition,
        n: usize,
        seed0: u64,
    ) -> Result<Vec<BitVector>> {
        self.collect_range(condition, n, seed0, 0..self.num_bits())
    }

    pub fn collect_range(
        &self,
        condition: &Condition,
        n: usize,
        seed0: u64,
        range: Range<usize>,
    ) -> Result<Vec<BitVector>> {
        if n == 0 {
            return Err(Error::usage("sample count must be at least 1"));
        }
        (0..n as u64)
            .map(|k| self.power_up_range(condition, seed0.wrapping_add(k), range.clone()))
            .collect()
    }

    fn sample_cells(
        &self,
        condition: &Condition,
        sample_seed: u64,
        range: Range<usize>,
    ) -> BitVector {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&sample_seed.to_le_bytes());
        key[16] = condition.kind.code();
        key[17..25].copy_from_slice(&condition.noise_multiplier.to_bits().to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        // One u64 (two 32-bit words) per cell, so any window can be
        // generated without replaying the stream from cell 0.
        rng.set_word_pos(2 * range.start as u128);

        let mut out = self.favored.slice(range.clone()).expect("range checked");
        for (j, i) in range.enumerate() {
            let u = unit_f64(rng.next_u64());
            if u < self.flip_probability(i, condition) {
                out.flip(j);
            }
        }
        out
    }
}

fn unit_f64(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// `(1 - weight) * x + weight * moving_average(x, radius)`, where the
/// average is taken over the part of the window inside the array.
fn blend_moving_average(x: &[f64], radius: usize, weight: f64) -> Vec<f64> {
    if radius == 0 || weight == 0.0 {
        return x.to_vec();
    }
    let n = x.len();
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    for v in x {
        prefix.push(prefix.last().unwrap() + v);
    }
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(radius);
            let hi = (i + radius + 1).min(n);
            let avg = (prefix[hi] - prefix[lo]) / (hi - lo) as f64;
            (1.0 - weight) * x[i] + weight * avg
        })
        .collect()
}

/// Distance from each cell to the nearest marked cell (0 on marked cells),
/// or `None` when nothing is marked.
fn distance_to_marked(marked: &BitVector) -> Vec<Option<usize>> {
    let n = marked.len();
    let mut out = vec![None::<usize>; n];
    let mut last = None;
    for (i, slot) in out.iter_mut().enumerate() {
        if marked.get(i) {
            last = Some(i);
        }
        *slot = last.map(|l| i - l);
    }
    let mut next = None;
    for i in (0..n).rev() {
        if marked.get(i) {
            next = Some(i);
        }
        if let Some(nx) = next {
            let d = nx - i;
            out[i] = Some(out[i].map_or(d, |cur| cur.min(d)));
        }
    }
    out
}
