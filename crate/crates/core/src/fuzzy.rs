// SPDX-License-Identifier: Apache-2.0

//! Code-offset fuzzy extractor over a shortened Hamming code.
//!
//! Generate: pick a random codeword `c`, publish `w = y ^ c`.
//! Reproduce: `c' = y' ^ w`, correct `c'` to `c''`, return `y'' = w ^ c''`.
//!
//! When `y'` differs from `y` in at most one bit, `c'` is within distance
//! one of `c`, so `c'' = c` and `y'' = y`. `w` is public; it leaks at most
//! `r` bits about `y`.

use std::path::Path;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitVector;
use crate::error::{Error, Result};
use crate::fsutil;
use crate::hamming::HammingCode;

const HELPER_FORMAT: &str = "srampuf-helper/1";
const CODE_NAME: &str = "hamming-shortened";

#[derive(Debug, Clone, Default)]
pub struct FuzzyExtractor {
    code: HammingCode,
}

impl FuzzyExtractor {
    pub fn new(code: HammingCode) -> Self {
        FuzzyExtractor { code }
    }

    pub fn code(&self) -> &HammingCode {
        &self.code
    }

    /// Helper string `w` for response `y`, with the codeword drawn from a
    /// ChaCha20 stream seeded by `seed`.
    pub fn generate(&self, y: &BitVector, seed: u64) -> Result<BitVector> {
        self.generate_with_rng(y, &mut ChaCha20Rng::seed_from_u64(seed))
    }

    /// As [`generate`](Self::generate), drawing the codeword from `rng`.
    pub fn generate_with_rng<R: RngCore + ?Sized>(
        &self,
        y: &BitVector,
        rng: &mut R,
    ) -> Result<BitVector> {
        self.check(y)?;
        let mut bytes = vec![0u8; self.code.k().div_ceil(8)];
        rng.fill_bytes(&mut bytes);
        let mut message = BitVector::from_bytes(&bytes, bytes.len() * 8)?;
        message = message.slice(0..self.code.k())?;
        let c = self.code.encode(&message)?;
        y.xor(&c)
    }

    /// Recover the enrolled response from a noisy one.
    ///
    /// Fails closed with [`Error::ReproduceFailure`] when the syndrome names
    /// no bit; the caller should take a fresh power-up reading.
    pub fn reproduce(&self, y_noisy: &BitVector, w: &BitVector) -> Result<BitVector> {
        self.check(y_noisy)?;
        self.check(w)?;
        let c_noisy = y_noisy.xor(w)?;
        let c = match self.code.correct(&c_noisy) {
            Ok(c) => c,
            Err(Error::Uncorrectable { .. }) => return Err(Error::ReproduceFailure),
            Err(e) => return Err(e),
        };
        w.xor(&c)
    }

    fn check(&self, v: &BitVector) -> Result<()> {
        if v.len() != self.code.n() {
            return Err(Error::InvalidLength {
                what: "response",
                expected: self.code.n(),
                actual: v.len(),
            });
        }
        Ok(())
    }
}

/// Public data needed to reproduce a key: `w`, the code it was built with,
/// and which device and mask it belongs to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HelperData {
    pub device_id: String,
    pub n: usize,
    pub k: usize,
    pub r: usize,
    /// SHA-256 of the mask file the response was filtered with.
    pub mask_fingerprint: String,
    pub w: BitVector,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HelperFile {
    device_id: String,
    code: String,
    n: usize,
    k: usize,
    r: usize,
    mask_fingerprint: String,
    w: String,
}

impl HelperData {
    pub fn new(
        extractor: &FuzzyExtractor,
        device_id: &str,
        mask_fingerprint: &str,
        w: BitVector,
    ) -> Self {
        let code = extractor.code();
        HelperData {
            device_id: device_id.to_string(),
            n: code.n(),
            k: code.k(),
            r: code.r(),
            mask_fingerprint: mask_fingerprint.to_string(),
            w,
        }
    }

    /// Extractor for the code named in the helper data.
    pub fn extractor(&self) -> Result<FuzzyExtractor> {
        if self.k + self.r != self.n {
            return Err(Error::format(
                "helper",
                "code parameters must satisfy n = k + r",
            ));
        }
        let code =
            HammingCode::shortened(self.n, self.r).map_err(|e| Error::format("helper", e))?;
        Ok(FuzzyExtractor::new(code))
    }

    pub fn to_text(&self) -> String {
        fsutil::with_format_header(
            HELPER_FORMAT,
            &HelperFile {
                device_id: self.device_id.clone(),
                code: CODE_NAME.to_string(),
                n: self.n,
                k: self.k,
                r: self.r,
                mask_fingerprint: self.mask_fingerprint.clone(),
                w: hex::encode(self.w.to_bytes()),
            },
        )
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let f: HelperFile = fsutil::parse_with_format_header("helper", HELPER_FORMAT, text)?;
        if f.code != CODE_NAME {
            return Err(Error::format(
                "helper",
                format!("unsupported code {:?}", f.code),
            ));
        }
        let valid_fp = f.mask_fingerprint.len() == 64
            && f.mask_fingerprint
                .bytes()
                .all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f'));
        if !valid_fp {
            return Err(Error::format(
                "helper",
                "mask_fingerprint must be 64 lowercase hex digits",
            ));
        }
        let bytes = hex::decode(&f.w).map_err(|e| Error::format("helper", e))?;
        let w = BitVector::from_bytes(&bytes, f.n).map_err(|_| {
            Error::format(
                "helper",
                format!("w must be {} hex digits", 2 * f.n.div_ceil(8)),
            )
        })?;
        let helper = HelperData {
            device_id: f.device_id,
            n: f.n,
            k: f.k,
            r: f.r,
            mask_fingerprint: f.mask_fingerprint,
            w,
        };
        helper.extractor()?;
        Ok(helper)
    }

    pub fn load(path: &Path) -> Result<Self> {
        HelperData::from_text(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fsutil::write_atomic(path, self.to_text().as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_chacha::ChaCha8Rng;

    fn random_response(seed: u64) -> BitVector {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        BitVector::from_bools((0..128).map(|_| rng.random::<bool>()))
    }

    #[test]
    fn generate_is_deterministic_and_offsets_a_codeword() {
        let fe = FuzzyExtractor::default();
        let y = random_response(1);
        let w = fe.generate(&y, 5).unwrap();
        assert_eq!(w, fe.generate(&y, 5).unwrap());
        assert_eq!(fe.code().syndrome(&w.xor(&y).unwrap()).unwrap(), 0);
    }

    #[test]
    fn different_seeds_give_different_helpers() {
        let fe = FuzzyExtractor::default();
        let y = random_response(2);
        let mut seen = std::collections::HashSet::new();
        for seed in 0..1000 {
            assert!(
                seen.insert(fe.generate(&y, seed).unwrap()),
                "collision at seed {seed}"
            );
        }
    }

    #[test]
    fn reproduce_exact_and_single_flip() {
        let fe = FuzzyExtractor::default();
        let y = random_response(3);
        let w = fe.generate(&y, 9).unwrap();
        assert_eq!(fe.reproduce(&y, &w).unwrap(), y);
        for j in 0..128 {
            let mut noisy = y.clone();
            noisy.flip(j);
            assert_eq!(fe.reproduce(&noisy, &w).unwrap(), y, "flip {j}");
        }
    }

    #[test]
    fn two_flips_never_reproduce_y() {
        let fe = FuzzyExtractor::default();
        let y = random_response(4);
        let w = fe.generate(&y, 1).unwrap();
        let (mut failures, mut wrong) = (0, 0);
        for a in 0..128 {
            for b in a + 1..128 {
                let mut noisy = y.clone();
                noisy.flip(a);
                noisy.flip(b);
                match fe.reproduce(&noisy, &w) {
                    Err(Error::ReproduceFailure) => failures += 1,
                    Ok(out) => {
                        assert_ne!(out, y);
                        wrong += 1;
                    }
                    Err(e) => panic!("{e}"),
                }
            }
        }
        assert_eq!(failures + wrong, 8128);
        assert!(failures > 0 && wrong > 0);
    }

    #[test]
    fn length_checks() {
        let fe = FuzzyExtractor::default();
        assert!(fe.generate(&BitVector::zeros(127), 0).is_err());
        assert!(fe
            .reproduce(&BitVector::zeros(128), &BitVector::zeros(64))
            .is_err());
    }

    #[test]
    fn helper_text_round_trip() {
        let fe = FuzzyExtractor::default();
        let y = random_response(6);
        let helper = HelperData::new(&fe, "dev-7", &"ab".repeat(32), fe.generate(&y, 3).unwrap());
        let text = helper.to_text();
        assert!(text.contains(&format!("w = \"{}\"", hex::encode(helper.w.to_bytes()))));
        let back = HelperData::from_text(&text).unwrap();
        assert_eq!(back, helper);
        assert_eq!(back.to_text(), text);
        assert_eq!(hex::encode(back.w.to_bytes()).len(), 32);
    }

    #[test]
    fn helper_rejects_bad_fields() {
        let fe = FuzzyExtractor::default();
        let fp = "ab".repeat(32);
        let helper = HelperData::new(&fe, "d", &fp, BitVector::zeros(128));
        let text = helper.to_text();
        let w_line = format!("w = \"{}\"", "0".repeat(32));
        assert!(text.contains(&w_line));
        for bad in [
            text.replace(&w_line, &format!("w = \"{}\"", "0".repeat(30))),
            text.replace(&w_line, &format!("w = \"zz{}\"", "0".repeat(30))),
            text.replace("k = 120", "k = 119"),
            text.replace("r = 8", "r = 9"),
            text.replace("hamming-shortened", "bch"),
            text.replace(&fp, &fp[1..]),
            text.replace(&fp, &fp.to_uppercase()),
        ] {
            assert!(HelperData::from_text(&bad).is_err(), "accepted:\n{bad}");
        }
    }
}
