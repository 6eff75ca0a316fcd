/* SPDX-License-Identifier: Apache-2.0 */

#ifndef SRAMPUF_H
#define SRAMPUF_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

// Digest size written by the key functions.
#define SRAMPUF_KEY_BYTES 32

// Operating condition for simulated power-ups.
typedef enum SrampufCondition {
  SRAMPUF_CONDITION_NTNA = 0,
  SRAMPUF_CONDITION_HTNA = 1,
  SRAMPUF_CONDITION_NTWA = 2,
} SrampufCondition;

// Result of every exported call.
typedef enum SrampufStatus {
  SRAMPUF_STATUS_OK = 0,
  SRAMPUF_STATUS_NULL_POINTER = -1,
  SRAMPUF_STATUS_INVALID_ARGUMENT = -2,
  SRAMPUF_STATUS_PARSE = -3,
  SRAMPUF_STATUS_INSUFFICIENT_STABLE_BITS = -4,
  SRAMPUF_STATUS_REPRODUCE_FAILURE = -5,
  SRAMPUF_STATUS_FINGERPRINT_MISMATCH = -6,
  SRAMPUF_STATUS_IO = -7,
  SRAMPUF_STATUS_PANIC = -8,
  SRAMPUF_STATUS_UNCORRECTABLE = -9,
} SrampufStatus;

// Simulated SRAM device.
typedef struct SrampufDevice SrampufDevice;

// Public helper data of one key.
typedef struct SrampufHelper SrampufHelper;

// Enrollment mask.
typedef struct SrampufMask SrampufMask;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the last failed call on this thread, or NULL. The
// pointer stays valid until the next failing call on the same thread.
const char *srampuf_last_error_message(void);

// Release a string returned by this library. NULL is ignored.
//
// # Safety
// `s` must come from this library and not have been freed.
void srampuf_string_free(char *s);

// Simulated device with the default calibration.
//
// # Safety
// `out` must be a valid pointer.
enum SrampufStatus srampuf_device_new(uint64_t seed, size_t num_bits, struct SrampufDevice **out);

// # Safety
// `device` must come from [`srampuf_device_new`] or be NULL.
void srampuf_device_free(struct SrampufDevice *device);

// Number of cells of `device`, 0 for NULL.
//
// # Safety
// `device` must be a live handle or NULL.
size_t srampuf_device_num_bits(const struct SrampufDevice *device);

// One power-up read into `out`, which must hold `ceil(num_bits / 8)`
// bytes; `out_len` is its capacity.
//
// # Safety
// `device` must be a live handle and `out` writable for `out_len` bytes.
enum SrampufStatus srampuf_device_sample(const struct SrampufDevice *device,
                                         enum SrampufCondition condition,
                                         uint64_t sample_seed,
                                         uint8_t *out,
                                         size_t out_len);

// Build a mask from `n_samples` dumps of `num_bits` bits each.
//
// # Safety
// `samples` must point at `n_samples` readable buffers of
// `ceil(num_bits / 8)` bytes; `device_id` must be a NUL-terminated string.
enum SrampufStatus srampuf_enroll(const uint8_t *const *samples,
                                  size_t n_samples,
                                  size_t num_bits,
                                  const char *device_id,
                                  uint32_t threshold,
                                  size_t target_len,
                                  size_t window_length,
                                  struct SrampufMask **out);

// # Safety
// `text` must be a NUL-terminated string and `out` a valid pointer.
enum SrampufStatus srampuf_mask_from_text(const char *text, struct SrampufMask **out);

// Canonical mask file text; free with [`srampuf_string_free`].
//
// # Safety
// `mask` must be a live handle and `out` a valid pointer.
enum SrampufStatus srampuf_mask_to_text(const struct SrampufMask *mask, char **out);

// Number of selected positions.
//
// # Safety
// `mask` must be a live handle or NULL.
size_t srampuf_mask_len(const struct SrampufMask *mask);

// # Safety
// `mask` must come from this library or be NULL.
void srampuf_mask_free(struct SrampufMask *mask);

// # Safety
// `text` must be a NUL-terminated string and `out` a valid pointer.
enum SrampufStatus srampuf_helper_from_text(const char *text, struct SrampufHelper **out);

// Canonical helper file text; free with [`srampuf_string_free`].
//
// # Safety
// `helper` must be a live handle and `out` a valid pointer.
enum SrampufStatus srampuf_helper_to_text(const struct SrampufHelper *helper, char **out);

// # Safety
// `helper` must come from this library or be NULL.
void srampuf_helper_free(struct SrampufHelper *helper);

// Enrollment-side key generation. Writes 32 key bytes (key1 then key2)
// to `key_out` and a new helper handle to `helper_out`.
//
// # Safety
// `raw` must hold `ceil(num_bits / 8)` bytes, `key_out` must be writable
// for 32 bytes, handles must be live.
enum SrampufStatus srampuf_generate_key(const uint8_t *raw,
                                        size_t num_bits,
                                        const struct SrampufMask *mask,
                                        uint64_t seed,
                                        struct SrampufHelper **helper_out,
                                        uint8_t *key_out);

// Device-side key reproduction into 32 bytes at `key_out`.
//
// # Safety
// As for [`srampuf_generate_key`].
enum SrampufStatus srampuf_reproduce_key(const uint8_t *raw,
                                         size_t num_bits,
                                         const struct SrampufMask *mask,
                                         const struct SrampufHelper *helper,
                                         uint8_t *key_out);

// Encode a 120-bit message (15 bytes) into a 128-bit codeword (16 bytes).
//
// # Safety
// `message` readable for 15 bytes, `codeword_out` writable for 16.
enum SrampufStatus srampuf_hamming_encode(const uint8_t *message, uint8_t *codeword_out);

// Correct up to one flipped bit of a 128-bit word (16 bytes).
// Returns `SRAMPUF_STATUS_UNCORRECTABLE` when the syndrome names no bit.
//
// # Safety
// `word` readable and `corrected_out` writable for 16 bytes.
enum SrampufStatus srampuf_hamming_correct(const uint8_t *word, uint8_t *corrected_out);

// Code-offset reproduction on a bare 128-bit response and helper string
// (16 bytes each).
//
// # Safety
// `y_noisy` and `w` readable and `y_out` writable for 16 bytes.
enum SrampufStatus srampuf_fuzzy_reproduce(const uint8_t *y_noisy,
                                           const uint8_t *w,
                                           uint8_t *y_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SRAMPUF_H */
