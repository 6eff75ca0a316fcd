// SPDX-License-Identifier: Apache-2.0

//! SRAM power-up PUF toolkit.
//!
//! * [`bits`]: bit vectors and the hex dump format
//! * [`sim`]: seedable power-up simulator
//! * [`enroll`]: stability marking, position weighting and bit selection
//! * [`hamming`], [`fuzzy`]: shortened Hamming code and code-offset extractor
//! * [`keygen`]: mask, extractor and SHA-256 wired into key generation
//! * [`analytics`]: block statistics, threshold sweeps, flip rates
//! * [`registry`], [`cli`]: on-disk enrollment registry and command front end

pub mod analytics;
pub mod bits;
pub mod cli;
pub mod enroll;
pub mod error;
pub mod fsutil;
pub mod fuzzy;
pub mod hamming;
pub mod keygen;
pub mod registry;
pub mod sim;

pub use bits::{parse_hex_dump, to_hex_dump, BitVector};
pub use enroll::{build_mask, EnrollParams, Mask};
pub use error::{Error, Result};
pub use fuzzy::{FuzzyExtractor, HelperData};
pub use hamming::HammingCode;
pub use keygen::{derive_key, generate_key, reproduce_key, KeyMaterial};
pub use registry::{Registry, RegistryEntry};
pub use sim::{Calibration, Condition, ConditionKind, DeviceModel};
