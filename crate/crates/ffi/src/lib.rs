// SPDX-License-Identifier: Apache-2.0

//! C ABI for `srampuf`.
//!
//! Conventions:
//!
//! * Every function returns a [`SrampufStatus`]; results come back through
//!   out-pointers. On failure a message is available from
//!   [`srampuf_last_error_message`] on the same thread.
//! * Handles (`SrampufDevice`, `SrampufMask`, `SrampufHelper`) are opaque
//!   and owned by the caller once returned; release them with the matching
//!   `*_free` function. Strings returned by the library are released with
//!   [`srampuf_string_free`].
//! * Bit strings cross the boundary as packed bytes, bit 0 in the most
//!   significant bit of byte 0, plus an explicit bit count.
//! * Panics are caught and reported as `SRAMPUF_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use srampuf::enroll::{build_mask, EnrollParams, Mask};
use srampuf::fuzzy::{FuzzyExtractor, HelperData};
use srampuf::hamming::{HammingCode, CODE_K, CODE_N};
use srampuf::keygen::{generate_key, reproduce_key};
use srampuf::sim::{Calibration, ConditionKind, DeviceModel};
use srampuf::{BitVector, Error};

/// Result of every exported call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SrampufStatus {
    Ok = 0,
    NullPointer = -1,
    InvalidArgument = -2,
    Parse = -3,
    InsufficientStableBits = -4,
    ReproduceFailure = -5,
    FingerprintMismatch = -6,
    Io = -7,
    Panic = -8,
    Uncorrectable = -9,
}

/// Operating condition for simulated power-ups.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SrampufCondition {
    Ntna = 0,
    Htna = 1,
    Ntwa = 2,
}

/// Simulated SRAM device.
pub struct SrampufDevice(DeviceModel);

/// Enrollment mask.
pub struct SrampufMask(Mask);

/// Public helper data of one key.
pub struct SrampufHelper(HelperData);

/// Digest size written by the key functions.
pub const SRAMPUF_KEY_BYTES: usize = 32;

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(SrampufStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::DumpParse { .. } | Error::Format { .. } => SrampufStatus::Parse,
            Error::InsufficientStableBits { .. } => SrampufStatus::InsufficientStableBits,
            Error::ReproduceFailure => SrampufStatus::ReproduceFailure,
            Error::Uncorrectable { .. } => SrampufStatus::Uncorrectable,
            Error::FingerprintMismatch { .. } => SrampufStatus::FingerprintMismatch,
            Error::Io(_) => SrampufStatus::Io,
            _ => SrampufStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(SrampufStatus::NullPointer, format!("{what} is NULL"))
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(SrampufStatus::InvalidArgument, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SrampufStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SrampufStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_last_error(format!("internal panic: {msg}"));
            SrampufStatus::Panic
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not UTF-8")))
}

unsafe fn bits_arg(p: *const u8, num_bits: usize, what: &str) -> Result<BitVector, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    let bytes = std::slice::from_raw_parts(p, num_bits.div_ceil(8));
    Ok(BitVector::from_bytes(bytes, num_bits)?)
}

unsafe fn write_bytes(out: *mut u8, bytes: &[u8], what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    ptr::copy_nonoverlapping(bytes.as_ptr(), out, bytes.len());
    Ok(())
}

unsafe fn put<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s).expect("file text has no NUL").into_raw()
}

/// Message describing the last failed call on this thread, or NULL. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn srampuf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Release a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn srampuf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Simulated device with the default calibration.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn srampuf_device_new(
    seed: u64,
    num_bits: usize,
    out: *mut *mut SrampufDevice,
) -> SrampufStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let device = DeviceModel::new(seed, num_bits, &Calibration::default())?;
        put(out, SrampufDevice(device));
        Ok(())
    })
}

/// # Safety
/// `device` must come from [`srampuf_device_new`] or be NULL.
#[no_mangle]
pub unsafe extern "C" fn srampuf_device_free(device: *mut SrampufDevice) {
    if !device.is_null() {
        drop(Box::from_raw(device));
    }
}

/// Number of cells of `device`, 0 for NULL.
///
/// # Safety
/// `device` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn srampuf_device_num_bits(device: *const SrampufDevice) -> usize {
    device.as_ref().map_or(0, |d| d.0.num_bits())
}

/// One power-up read into `out`, which must hold `ceil(num_bits / 8)`
/// bytes; `out_len` is its capacity.
///
/// # Safety
/// `device` must be a live handle and `out` writable for `out_len` bytes.
#[no_mangle]
pub unsafe extern "C" fn srampuf_device_sample(
    device: *const SrampufDevice,
    condition: SrampufCondition,
    sample_seed: u64,
    out: *mut u8,
    out_len: usize,
) -> SrampufStatus {
    guard(|| {
        let device = &as_ref(device, "device")?.0;
        let kind = match condition {
            SrampufCondition::Ntna => ConditionKind::Ntna,
            SrampufCondition::Htna => ConditionKind::Htna,
            SrampufCondition::Ntwa => ConditionKind::Ntwa,
        };
        let cond = device.calibration().condition(kind);
        let bytes = device.power_up_sample(&cond, sample_seed).to_bytes();
        if out_len < bytes.len() {
            return Err(invalid(format!(
                "output buffer needs {} bytes, got {out_len}",
                bytes.len()
            )));
        }
        write_bytes(out, &bytes, "out")
    })
}

/// Build a mask from `n_samples` dumps of `num_bits` bits each.
///
/// # Safety
/// `samples` must point at `n_samples` readable buffers of
/// `ceil(num_bits / 8)` bytes; `device_id` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn srampuf_enroll(
    samples: *const *const u8,
    n_samples: usize,
    num_bits: usize,
    device_id: *const c_char,
    threshold: u32,
    target_len: usize,
    window_length: usize,
    out: *mut *mut SrampufMask,
) -> SrampufStatus {
    guard(|| {
        if samples.is_null() {
            return Err(null("samples"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        if n_samples < 2 {
            return Err(invalid("enrollment needs at least 2 samples"));
        }
        let device_id = str_arg(device_id, "device_id")?;
        let dumps = std::slice::from_raw_parts(samples, n_samples)
            .iter()
            .map(|&p| bits_arg(p, num_bits, "sample"))
            .collect::<Result<Vec<_>, _>>()?;
        let params = EnrollParams {
            threshold,
            target_len,
            window_length,
            ..EnrollParams::default()
        };
        let mask = build_mask(&dumps, &params, device_id)?;
        put(out, SrampufMask(mask));
        Ok(())
    })
}

/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn srampuf_mask_from_text(
    text: *const c_char,
    out: *mut *mut SrampufMask,
) -> SrampufStatus {
    guard(|| {
        let text = str_arg(text, "text")?;
        if out.is_null() {
            return Err(null("out"));
        }
        put(out, SrampufMask(Mask::from_text(text)?));
        Ok(())
    })
}

/// Canonical mask file text; free with [`srampuf_string_free`].
///
/// # Safety
/// `mask` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn srampuf_mask_to_text(
    mask: *const SrampufMask,
    out: *mut *mut c_char,
) -> SrampufStatus {
    guard(|| {
        let mask = &as_ref(mask, "mask")?.0;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = to_c_string(mask.to_text());
        Ok(())
    })
}

/// Number of selected positions.
///
/// # Safety
/// `mask` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn srampuf_mask_len(mask: *const SrampufMask) -> usize {
    mask.as_ref().map_or(0, |m| m.0.positions.len())
}

/// # Safety
/// `mask` must come from this library or be NULL.
#[no_mangle]
pub unsafe extern "C" fn srampuf_mask_free(mask: *mut SrampufMask) {
    if !mask.is_null() {
        drop(Box::from_raw(mask));
    }
}

/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn srampuf_helper_from_text(
    text: *const c_char,
    out: *mut *mut SrampufHelper,
) -> SrampufStatus {
    guard(|| {
        let text = str_arg(text, "text")?;
        if out.is_null() {
            return Err(null("out"));
        }
        put(out, SrampufHelper(HelperData::from_text(text)?));
        Ok(())
    })
}

/// Canonical helper file text; free with [`srampuf_string_free`].
///
/// # Safety
/// `helper` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn srampuf_helper_to_text(
    helper: *const SrampufHelper,
    out: *mut *mut c_char,
) -> SrampufStatus {
    guard(|| {
        let helper = &as_ref(helper, "helper")?.0;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = to_c_string(helper.to_text());
        Ok(())
    })
}

/// # Safety
/// `helper` must come from this library or be NULL.
#[no_mangle]
pub unsafe extern "C" fn srampuf_helper_free(helper: *mut SrampufHelper) {
    if !helper.is_null() {
        drop(Box::from_raw(helper));
    }
}

/// Enrollment-side key generation. Writes 32 key bytes (key1 then key2)
/// to `key_out` and a new helper handle to `helper_out`.
///
/// # Safety
/// `raw` must hold `ceil(num_bits / 8)` bytes, `key_out` must be writable
/// for 32 bytes, handles must be live.
#[no_mangle]
pub unsafe extern "C" fn srampuf_generate_key(
    raw: *const u8,
    num_bits: usize,
    mask: *const SrampufMask,
    seed: u64,
    helper_out: *mut *mut SrampufHelper,
    key_out: *mut u8,
) -> SrampufStatus {
    guard(|| {
        let raw = bits_arg(raw, num_bits, "raw")?;
        let mask = &as_ref(mask, "mask")?.0;
        if helper_out.is_null() {
            return Err(null("helper_out"));
        }
        if key_out.is_null() {
            return Err(null("key_out"));
        }
        let (helper, key) = generate_key(&raw, mask, seed)?;
        write_bytes(key_out, key.bytes(), "key_out")?;
        put(helper_out, SrampufHelper(helper));
        Ok(())
    })
}

/// Device-side key reproduction into 32 bytes at `key_out`.
///
/// # Safety
/// As for [`srampuf_generate_key`].
#[no_mangle]
pub unsafe extern "C" fn srampuf_reproduce_key(
    raw: *const u8,
    num_bits: usize,
    mask: *const SrampufMask,
    helper: *const SrampufHelper,
    key_out: *mut u8,
) -> SrampufStatus {
    guard(|| {
        let raw = bits_arg(raw, num_bits, "raw")?;
        let mask = &as_ref(mask, "mask")?.0;
        let helper = &as_ref(helper, "helper")?.0;
        if key_out.is_null() {
            return Err(null("key_out"));
        }
        let key = reproduce_key(&raw, mask, helper)?;
        write_bytes(key_out, key.bytes(), "key_out")
    })
}

/// Encode a 120-bit message (15 bytes) into a 128-bit codeword (16 bytes).
///
/// # Safety
/// `message` readable for 15 bytes, `codeword_out` writable for 16.
#[no_mangle]
pub unsafe extern "C" fn srampuf_hamming_encode(
    message: *const u8,
    codeword_out: *mut u8,
) -> SrampufStatus {
    guard(|| {
        let m = bits_arg(message, CODE_K, "message")?;
        let c = HammingCode::default().encode(&m)?;
        write_bytes(codeword_out, &c.to_bytes(), "codeword_out")
    })
}

/// Correct up to one flipped bit of a 128-bit word (16 bytes).
/// Returns `SRAMPUF_STATUS_UNCORRECTABLE` when the syndrome names no bit.
///
/// # Safety
/// `word` readable and `corrected_out` writable for 16 bytes.
#[no_mangle]
pub unsafe extern "C" fn srampuf_hamming_correct(
    word: *const u8,
    corrected_out: *mut u8,
) -> SrampufStatus {
    guard(|| {
        let w = bits_arg(word, CODE_N, "word")?;
        let c = HammingCode::default().correct(&w)?;
        write_bytes(corrected_out, &c.to_bytes(), "corrected_out")
    })
}

/// Code-offset reproduction on a bare 128-bit response and helper string
/// (16 bytes each).
///
/// # Safety
/// `y_noisy` and `w` readable and `y_out` writable for 16 bytes.
#[no_mangle]
pub unsafe extern "C" fn srampuf_fuzzy_reproduce(
    y_noisy: *const u8,
    w: *const u8,
    y_out: *mut u8,
) -> SrampufStatus {
    guard(|| {
        let y = bits_arg(y_noisy, CODE_N, "y_noisy")?;
        let w = bits_arg(w, CODE_N, "w")?;
        let out = FuzzyExtractor::default().reproduce(&y, &w)?;
        write_bytes(y_out, &out.to_bytes(), "y_out")
    })
}
