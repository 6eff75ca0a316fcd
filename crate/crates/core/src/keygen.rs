// SPDX-License-Identifier: Apache-2.0

//! Raw power-up dump to 256-bit key.
//!
//! `raw --mask--> y --fuzzy extractor--> y'' --SHA-256--> key1 || key2`
//!
//! The hash input is the 128-bit response packed into 16 bytes with bit 0
//! as the most-significant bit of byte 0. `key1` is the first 16 bytes of
//! the digest, `key2` the last 16.

use std::fmt;

use rand::RngCore;
use sha2::{Digest, Sha256};

use crate::bits::BitVector;
use crate::enroll::Mask;
use crate::error::{Error, Result};
use crate::fuzzy::{FuzzyExtractor, HelperData};
use crate::hamming::CODE_N;

pub const HASH_ALGORITHM: &str = "sha256";

/// A derived key pair. `Debug` does not print key bytes.
#[derive(Clone, PartialEq, Eq)]
pub struct KeyMaterial {
    device_id: String,
    digest: [u8; 32],
}

impl KeyMaterial {
    pub fn device_id(&self) -> &str {
        &self.device_id
    }

    pub fn algorithm(&self) -> &'static str {
        HASH_ALGORITHM
    }

    pub fn bytes(&self) -> &[u8; 32] {
        &self.digest
    }

    pub fn key_bits(&self) -> BitVector {
        BitVector::from_bytes(&self.digest, 256).expect("32 bytes hold 256 bits")
    }

    pub fn key1(&self) -> [u8; 16] {
        self.digest[..16].try_into().unwrap()
    }

    pub fn key2(&self) -> [u8; 16] {
        self.digest[16..].try_into().unwrap()
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.digest)
    }
}

impl fmt::Debug for KeyMaterial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KeyMaterial")
            .field("device_id", &self.device_id)
            .field("algorithm", &HASH_ALGORITHM)
            .finish_non_exhaustive()
    }
}

/// Hash a 128-bit response into key material.
pub fn derive_key(y: &BitVector, device_id: &str) -> Result<KeyMaterial> {
    if y.len() != CODE_N {
        return Err(Error::InvalidLength {
            what: "response",
            expected: CODE_N,
            actual: y.len(),
        });
    }
    Ok(KeyMaterial {
        device_id: device_id.to_string(),
        digest: Sha256::digest(y.to_bytes()).into(),
    })
}

/// `response[j] = raw[base_offset + positions[j]]`.
pub fn apply_mask(raw: &BitVector, mask: &Mask) -> Result<BitVector> {
    let need = mask.required_len();
    if raw.len() < need {
        return Err(Error::usage(format!(
            "dump has {} bits but the mask reads up to bit {} (missing {}..{})",
            raw.len(),
            need - 1,
            raw.len(),
            need
        )));
    }
    let absolute: Vec<usize> = mask
        .positions
        .iter()
        .map(|p| mask.base_offset + p)
        .collect();
    raw.select(&absolute)
}

/// Enrollment-side key generation with the codeword drawn from `seed`.
pub fn generate_key(raw: &BitVector, mask: &Mask, seed: u64) -> Result<(HelperData, KeyMaterial)> {
    let fe = FuzzyExtractor::default();
    let y = apply_mask(raw, mask)?;
    let w = fe.generate(&y, seed)?;
    finish_generate(&fe, mask, y, w)
}

/// As [`generate_key`], drawing the codeword from `rng`.
pub fn generate_key_with_rng<R: RngCore + ?Sized>(
    raw: &BitVector,
    mask: &Mask,
    rng: &mut R,
) -> Result<(HelperData, KeyMaterial)> {
    let fe = FuzzyExtractor::default();
    let y = apply_mask(raw, mask)?;
    let w = fe.generate_with_rng(&y, rng)?;
    finish_generate(&fe, mask, y, w)
}

fn finish_generate(
    fe: &FuzzyExtractor,
    mask: &Mask,
    y: BitVector,
    w: BitVector,
) -> Result<(HelperData, KeyMaterial)> {
    let helper = HelperData::new(fe, &mask.device_id, &mask.fingerprint(), w);
    let key = derive_key(&y, &mask.device_id)?;
    Ok((helper, key))
}

/// Device-side key reproduction.
pub fn reproduce_key(raw: &BitVector, mask: &Mask, helper: &HelperData) -> Result<KeyMaterial> {
    reproduce_key_with_fingerprint(raw, mask, &mask.fingerprint(), helper)
}

/// As [`reproduce_key`], checking the helper against a fingerprint taken
/// from the mask file bytes rather than the parsed mask.
pub fn reproduce_key_with_fingerprint(
    raw: &BitVector,
    mask: &Mask,
    mask_fingerprint: &str,
    helper: &HelperData,
) -> Result<KeyMaterial> {
    if helper.mask_fingerprint != mask_fingerprint {
        return Err(Error::FingerprintMismatch {
            expected: helper.mask_fingerprint.clone(),
            actual: mask_fingerprint.to_string(),
        });
    }
    let fe = helper.extractor()?;
    let y_noisy = apply_mask(raw, mask)?;
    let y = fe.reproduce(&y_noisy, &helper.w)?;
    derive_key(&y, &mask.device_id)
}
