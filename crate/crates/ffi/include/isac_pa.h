#ifndef ISAC_PA_H
#define ISAC_PA_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes. Values 2 and 3 match the CLI exit codes.
 */
typedef enum IsacStatus {
  ISAC_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  ISAC_STATUS_NULL_POINTER = 1,
  /**
   * Invalid parameters or configuration.
   */
  ISAC_STATUS_CONFIG = 2,
  /**
   * Numeric, metric or calibration failure.
   */
  ISAC_STATUS_NUMERIC = 3,
  /**
   * File system or serialization failure.
   */
  ISAC_STATUS_IO = 4,
  /**
   * A string argument was not valid UTF-8.
   */
  ISAC_STATUS_INVALID_UTF8 = 5,
  /**
   * Caller buffer too small.
   */
  ISAC_STATUS_BUFFER_TOO_SMALL = 6,
  /**
   * Internal panic caught at the boundary.
   */
  ISAC_STATUS_PANIC = 7,
} IsacStatus;

/**
 * Opaque averaged ambiguity surface.
 */
typedef struct IsacAfSurface IsacAfSurface;

/**
 * Opaque SEL amplifier.
 */
typedef struct IsacAmplifier IsacAmplifier;

/**
 * Opaque detection curve.
 */
typedef struct IsacPdCurve IsacPdCurve;

typedef struct IsacComplex {
  double re;
  double im;
} IsacComplex;

/**
 * Zero-Doppler sidelobe statistics of an averaged surface.
 */
typedef struct IsacSidelobeMetrics {
  double isl;
  double eislr;
  double pslr;
  double mainlobe;
  double mean_sidelobe;
} IsacSidelobeMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *isac_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *isac_version(void);

/**
 * `snr0 / (1 + snr0 / sdr)` for linear inputs.
 */
double isac_snr_eff(double snr0, double sdr);

/**
 * Creates a SEL amplifier at `ibo_db`. `v_sat <= 0` selects the unit-drive
 * operating point (back-off through the saturation level).
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum IsacStatus isac_amplifier_new(double ibo_db, double v_sat, struct IsacAmplifier **out);

/**
 * # Safety
 * `h` must come from [`isac_amplifier_new`] and not be used afterwards.
 */
void isac_amplifier_free(struct IsacAmplifier *h);

/**
 * Normalized clipping threshold `Y`, or NaN for a null handle.
 *
 * # Safety
 * `h` must be null or a live amplifier handle.
 */
double isac_amplifier_clip_threshold(const struct IsacAmplifier *h);

/**
 * Applies the amplifier to `len` samples; `input` and `output` may alias.
 *
 * # Safety
 * `h` must be live; `input` and `output` must each point to `len` elements.
 */
enum IsacStatus isac_amplifier_apply(const struct IsacAmplifier *h,
                                     const struct IsacComplex *input,
                                     struct IsacComplex *output,
                                     size_t len);

/**
 * Averages the squared AF of `trials` random blocks.
 *
 * `constellation` is e.g. `"psk16"` or `"qam64"`; `basis` is `"ofdm"`,
 * `"sc"` or `"cdma"`; `periodic` selects the cyclic (CP) AF; `k_grid` is
 * the Doppler grid size.
 *
 * # Safety
 * String arguments must be NUL-terminated; `out` must be writable.
 */
enum IsacStatus isac_average_af(const char *constellation,
                                const char *basis,
                                size_t n,
                                double ibo_db,
                                bool periodic,
                                size_t k_grid,
                                size_t trials,
                                uint64_t seed,
                                struct IsacAfSurface **out);

/**
 * # Safety
 * `h` must come from [`isac_average_af`] and not be used afterwards.
 */
void isac_af_free(struct IsacAfSurface *h);

/**
 * Number of delay rows and Doppler columns.
 *
 * # Safety
 * `h` must be live; `delays` and `dopplers` must be writable.
 */
enum IsacStatus isac_af_dims(const struct IsacAfSurface *h, size_t *delays, size_t *dopplers);

/**
 * Copies the normalized zero-Doppler cut (linear scale) and its delay axis.
 * `lags` may be null.
 *
 * # Safety
 * `h` must be live; `values` (and `lags` if non-null) must hold `cap`
 * elements.
 */
enum IsacStatus isac_af_zero_doppler_cut(const struct IsacAfSurface *h,
                                         double *values,
                                         int64_t *lags,
                                         size_t cap);

/**
 * # Safety
 * `h` must be live and `out` writable.
 */
enum IsacStatus isac_af_metrics(const struct IsacAfSurface *h, struct IsacSidelobeMetrics *out);

/**
 * Weak-target detection probability of the two-target scene at each SNR
 * in `snr_db` (an infinite entry gives the noise-free point). The SO-CFAR
 * uses the default geometry calibrated on exponential noise.
 *
 * # Safety
 * `constellation` must be NUL-terminated; `snr_db` must hold `len`
 * values; `out` must be writable.
 */
enum IsacStatus isac_pd_curve(const char *constellation,
                              double ibo_db,
                              const double *snr_db,
                              size_t len,
                              size_t m,
                              size_t trials,
                              uint64_t seed,
                              struct IsacPdCurve **out);

/**
 * # Safety
 * `h` must come from [`isac_pd_curve`] and not be used afterwards.
 */
void isac_pd_curve_free(struct IsacPdCurve *h);

/**
 * Number of SNR points, 0 for a null handle.
 *
 * # Safety
 * `h` must be null or live.
 */
size_t isac_pd_curve_len(const struct IsacPdCurve *h);

/**
 * Copies Pd and the 95% interval half-widths. `ci` may be null.
 *
 * # Safety
 * `h` must be live; `pd` (and `ci` if non-null) must hold `cap` elements.
 */
enum IsacStatus isac_pd_curve_values(const struct IsacPdCurve *h,
                                     double *pd,
                                     double *ci,
                                     size_t cap);

/**
 * Runs a registered scenario. `config_json` may be null for defaults;
 * `seed` 0 keeps the config or default seed; `workers` 0 uses all cores.
 * On success `*manifest_json` receives the run manifest, to be released
 * with [`isac_string_free`].
 *
 * # Safety
 * String arguments must be NUL-terminated or null where allowed;
 * `manifest_json` must be writable.
 */
enum IsacStatus isac_run_scenario(const char *name,
                                  const char *config_json,
                                  const char *out_dir,
                                  uint64_t seed,
                                  size_t workers,
                                  char **manifest_json);

/**
 * # Safety
 * `s` must be null or a string returned by this library, freed once.
 */
void isac_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ISAC_PA_H */
