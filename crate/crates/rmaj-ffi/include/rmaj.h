/* C interface for the rmaj range tau-majority index.
 *
 * The index is an opaque handle created by rmaj_build or rmaj_from_bytes
 * and released with rmaj_free. Every fallible call returns an rmaj_status;
 * results are written through out-pointers. All positions are 1-based and
 * ranges are inclusive. Handles are immutable after construction and safe
 * to share across threads.
 */

#ifndef RMAJ_H
#define RMAJ_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct RmajIndex RmajIndex;

typedef enum rmaj_status {
  RMAJ_OK = 0,
  /* Invalid build parameters (empty array, threshold outside (0, 1), ...). */
  RMAJ_ERR_INVALID = 1,
  /* Query endpoints outside 1 <= i <= j <= n. */
  RMAJ_ERR_RANGE = 2,
  /* Malformed container bytes. */
  RMAJ_ERR_FORMAT = 3,
  /* A required pointer argument was null. */
  RMAJ_ERR_NULL = 4,
  /* Positions buffer too small; *count holds the required size. */
  RMAJ_ERR_BUFFER = 5,
} rmaj_status;

/* Build an index over values[0..n] with threshold p/q in (0, 1); the input
 * array is not retained. Writes the handle to *out (null on failure). */
int32_t rmaj_build(const uint64_t *values, uint64_t n, uint64_t p, uint64_t q,
                   RmajIndex **out);

/* Deserialize an index container. */
int32_t rmaj_from_bytes(const uint8_t *bytes, size_t len, RmajIndex **out);

/* Serialize the index into a heap buffer owned by the library; release it
 * with rmaj_bytes_free. */
int32_t rmaj_to_bytes(const RmajIndex *idx, uint8_t **out, size_t *len);

void rmaj_bytes_free(uint8_t *bytes, size_t len);

/* Number of elements the index was built over; 0 for a null handle. */
uint64_t rmaj_len(const RmajIndex *idx);

/* First in-range position of every tau-majority of [i, j], ascending, into
 * out[0..cap]; *count receives the number of majorities. */
int32_t rmaj_query_positions(const RmajIndex *idx, uint64_t i, uint64_t j,
                             uint64_t *out, uint64_t cap, uint64_t *count);

/* Writes 1 to *out if [i, j] has any tau-majority, else 0. */
int32_t rmaj_query_decision(const RmajIndex *idx, uint64_t i, uint64_t j,
                            int32_t *out);

/* Number of distinct tau-majorities of [i, j]. */
int32_t rmaj_query_count(const RmajIndex *idx, uint64_t i, uint64_t j,
                         uint64_t *out);

void rmaj_free(RmajIndex *idx);

#ifdef __cplusplus
}
#endif

#endif /* RMAJ_H */
