#ifndef HYPERLAT_H
#define HYPERLAT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call. Values match the command-line exit codes.
typedef enum HyperlatStatus {
  HYPERLAT_STATUS_OK = 0,
  // Null pointer, bad length or invalid UTF-8.
  HYPERLAT_STATUS_INVALID_ARGUMENT = 1,
  // Rejected input: malformed quotient, config or pattern.
  HYPERLAT_STATUS_INVALID_INPUT = 2,
  // A structural or algebraic invariant did not hold.
  HYPERLAT_STATUS_INVARIANT_FAILURE = 3,
  // Decoding, simulation or I/O failure.
  HYPERLAT_STATUS_RUNTIME_FAILURE = 4,
  // A panic was caught at the boundary.
  HYPERLAT_STATUS_PANIC = 5,
} HyperlatStatus;

// The surface code of a lattice, with its cycle bases and distances.
typedef struct HyperlatCode HyperlatCode;

// A closed `{p,q}` lattice.
typedef struct HyperlatLattice HyperlatLattice;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the last failure on this thread, or null. Valid until
// the next call into the library from the same thread.
const char *hyperlat_last_error(void);

// Library version as a static nul-terminated string.
const char *hyperlat_version(void);

// Builds the `{p,q}` lattice of a quotient given as JSON text.
//
// # Safety
// `quotient_json` must be a valid nul-terminated string and `out` a
// writable pointer.
enum HyperlatStatus hyperlat_lattice_build(uintptr_t p,
                                           uintptr_t q,
                                           const char *quotient_json,
                                           struct HyperlatLattice **out);

// Vertex, edge and face counts, cell count and surface genus. Any output
// pointer may be null.
//
// # Safety
// `lattice` must be a live handle.
enum HyperlatStatus hyperlat_lattice_counts(const struct HyperlatLattice *lattice,
                                            uintptr_t *vertices,
                                            uintptr_t *edges,
                                            uintptr_t *faces,
                                            uintptr_t *cells,
                                            uintptr_t *genus);

// Edge endpoints as `2E` vertex ids, written into `buf` of length `len`.
//
// # Safety
// `lattice` must be a live handle and `buf` writable for `len` elements.
enum HyperlatStatus hyperlat_lattice_edges(const struct HyperlatLattice *lattice,
                                           uintptr_t *buf,
                                           uintptr_t len);

// # Safety
// `lattice` must be null or a handle not yet freed.
void hyperlat_lattice_free(struct HyperlatLattice *lattice);

// Cycle bases, stabilizers, logicals and distances of a lattice.
//
// # Safety
// `lattice` must be a live handle and `out` a writable pointer.
enum HyperlatStatus hyperlat_code_analyze(const struct HyperlatLattice *lattice,
                                          struct HyperlatCode **out);

// `[[n, k, d_Z, d_X]]`. Any output pointer may be null.
//
// # Safety
// `code` must be a live handle.
enum HyperlatStatus hyperlat_code_parameters(const struct HyperlatCode *code,
                                             uintptr_t *n,
                                             uintptr_t *k,
                                             uintptr_t *d_z,
                                             uintptr_t *d_x);

// Decodes a Z-error syndrome given as defect vertex ids. Writes one byte
// per edge into `correction` (1 = flip) and the correction weight into
// `weight`, which may be null.
//
// # Safety
// `code` must be a live handle, `defects` readable for `num_defects`
// elements and `correction` writable for `num_edges` bytes.
enum HyperlatStatus hyperlat_code_decode(const struct HyperlatCode *code,
                                         const uintptr_t *defects,
                                         uintptr_t num_defects,
                                         uint8_t *correction,
                                         uintptr_t num_edges,
                                         uintptr_t *weight);

// # Safety
// `code` must be null or a handle not yet freed.
void hyperlat_code_free(struct HyperlatCode *code);

// Runs a simulation from a JSON config and returns the results CSV in
// `csv_out`, to be released with [`hyperlat_string_free`]. Relative
// quotient paths resolve against the working directory.
//
// # Safety
// `config_json` must be a valid nul-terminated string and `csv_out` a
// writable pointer.
enum HyperlatStatus hyperlat_simulate(const char *config_json, char **csv_out);

// # Safety
// `s` must be null or a string returned by this library and not yet freed.
void hyperlat_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HYPERLAT_H */
