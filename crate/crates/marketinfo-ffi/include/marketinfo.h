#ifndef MARKETINFO_H
#define MARKETINFO_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum MiStatus {
  MiOk = 0,
  /**
   * A null pointer or malformed argument.
   */
  MiInvalidArgument = 1,
  /**
   * Input data too short or otherwise unusable.
   */
  MiDataError = 2,
  /**
   * A prefix pattern was never observed; reduce L or lengthen the window.
   */
  MiUnobservedPrefix = 3,
  /**
   * Computation budget or numerical range exceeded.
   */
  MiLimitError = 4,
} MiStatus;

/**
 * Opaque handle to an enumerated exact pmf.
 */
typedef struct MiPmf MiPmf;

/**
 * Result of the efficiency test.
 */
typedef struct MiTestResult {
  /**
   * Estimated market information, in bits.
   */
  double info;
  /**
   * Tail probability under the asymptotic gamma null law.
   */
  double p_value;
  /**
   * Number of (L+1)-grams in the input.
   */
  uint64_t n;
  /**
   * Gamma shape 2^{L-1}.
   */
  uint64_t shape;
  /**
   * Gamma scale 1/(ln 2 * N).
   */
  double scale;
  bool reject_95;
  bool reject_99;
  bool reject_999;
  /**
   * Set when N < 100 and the gamma approximation is rough.
   */
  bool small_sample_warning;
} MiTestResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Estimate the market information of a 0/1 byte array at pattern length L.
 *
 * # Safety
 * `bits` must point to `len` readable bytes; `out` must be a valid pointer.
 */
enum MiStatus mi_estimate(const uint8_t *bits, uintptr_t len, uint32_t l, double *out);

/**
 * Run the market-efficiency test on a 0/1 byte array.
 *
 * # Safety
 * `bits` must point to `len` readable bytes; `out` must be a valid pointer.
 */
enum MiStatus mi_test(const uint8_t *bits, uintptr_t len, uint32_t l, struct MiTestResult *out);

/**
 * Tail probability P(X > x) of the asymptotic null law for (L, N).
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum MiStatus mi_survival(double x, uint32_t l, uint64_t n, double *out);

/**
 * Critical value of the test: the information level with tail probability
 * `alpha` under the null law for (L, N).
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum MiStatus mi_critical_value(double alpha, uint32_t l, uint64_t n, double *out);

/**
 * Exact conditional mean of the estimator given per-prefix counts.
 * `counts_len` must be a power of two, at least 2.
 *
 * # Safety
 * `counts` must point to `counts_len` readable entries; `out` must be valid.
 */
enum MiStatus mi_mean_exact(const uint64_t *counts, uintptr_t counts_len, double *out);

/**
 * Enumerate the exact law of the estimator for per-prefix counts, writing
 * an owned handle to `out`. Free it with [`mi_pmf_free`].
 *
 * # Safety
 * `counts` must point to `counts_len` readable entries; `out` must be valid.
 */
enum MiStatus mi_pmf_new(const uint64_t *counts, uintptr_t counts_len, struct MiPmf **out);

/**
 * Number of atoms in the pmf.
 *
 * # Safety
 * `pmf` must be a live handle from [`mi_pmf_new`].
 */
uintptr_t mi_pmf_len(const struct MiPmf *pmf);

/**
 * Value and probability of the atom at `index`.
 *
 * # Safety
 * `pmf` must be a live handle; `value` and `probability` must be valid.
 */
enum MiStatus mi_pmf_atom(const struct MiPmf *pmf,
                          uintptr_t index,
                          double *value,
                          double *probability);

/**
 * Release a pmf handle. A null pointer is a no-op.
 *
 * # Safety
 * `pmf` must be null or a handle not freed before.
 */
void mi_pmf_free(struct MiPmf *pmf);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* MARKETINFO_H */
