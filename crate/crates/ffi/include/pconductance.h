#ifndef PCONDUCTANCE_H
#define PCONDUCTANCE_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PcStatus {
  PC_STATUS_OK = 0,
  PC_STATUS_NULL_POINTER = 1,
  PC_STATUS_INVALID_ARGUMENT = 2,
  PC_STATUS_DIMENSION_MISMATCH = 3,
  PC_STATUS_DISCONNECTED = 4,
  PC_STATUS_NOT_CONVERGED = 5,
  PC_STATUS_INFEASIBLE = 6,
  PC_STATUS_IO = 7,
  PC_STATUS_PARSE = 8,
  PC_STATUS_BUFFER_TOO_SMALL = 9,
  PC_STATUS_PANIC = 10,
  PC_STATUS_OTHER = 11,
} PcStatus;

/**
 * A weighted undirected graph.
 */
typedef struct PcGraph PcGraph;

/**
 * An `n × k` matrix of class potentials.
 */
typedef struct PcPotential PcPotential;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message into `buf` (NUL
 * terminated, truncated to `len`). Returns the full message length without
 * the terminator; pass `buf = NULL` to query it.
 *
 * # Safety
 * `buf` must be null or valid for `len` writes.
 */
size_t pc_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *pc_version(void);

/**
 * Builds a graph on `n` nodes from `m` edges `(src[e], dst[e], weight[e])`.
 *
 * # Safety
 * The three edge arrays must be valid for `m` reads; `out` must be valid
 * for one write.
 */
enum PcStatus pc_graph_new(size_t n,
                           const size_t *src,
                           const size_t *dst,
                           const double *weight,
                           size_t m,
                           struct PcGraph **out);

/**
 * Reads an edge-list file (`i j w` per line, `#` comments).
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` valid for one write.
 */
enum PcStatus pc_graph_read(const char *path, struct PcGraph **out);

/**
 * # Safety
 * `graph` must be null or a handle from this library, freed once.
 */
void pc_graph_free(struct PcGraph *graph);

/**
 * # Safety
 * `graph` must be null or a live handle.
 */
size_t pc_graph_node_count(const struct PcGraph *graph);

/**
 * # Safety
 * `graph` must be null or a live handle.
 */
size_t pc_graph_edge_count(const struct PcGraph *graph);

/**
 * `‖Bᵀφ‖_{p,w} / φᵀr` for potentials `phi` and a mean-zero `r`, both of
 * length `n`. `p = INFINITY` selects the weighted max.
 *
 * # Safety
 * `phi` and `r` valid for `n` reads, `out` for one write.
 */
enum PcStatus pc_conductance(const struct PcGraph *graph,
                             double p,
                             const double *phi,
                             const double *r,
                             size_t n,
                             double *out);

/**
 * Solves the one-vs-all programs for `count` labeled nodes
 * (`nodes[i]` has class `classes[i] < k`). `t > 0` diffuses the label
 * measures first. The graph must be connected.
 *
 * # Safety
 * `nodes` and `classes` valid for `count` reads; `out` for one write.
 */
enum PcStatus pc_solve(const struct PcGraph *graph,
                       const size_t *nodes,
                       const size_t *classes,
                       size_t count,
                       size_t k,
                       double p,
                       double t,
                       double tol,
                       struct PcPotential **out);

/**
 * # Safety
 * `potential` must be null or a handle from this library, freed once.
 */
void pc_potential_free(struct PcPotential *potential);

/**
 * Writes the row and column counts.
 *
 * # Safety
 * `potential` a live handle; `rows` and `cols` valid for one write.
 */
enum PcStatus pc_potential_shape(const struct PcPotential *potential, size_t *rows, size_t *cols);

/**
 * Whether every class's solve met its tolerance.
 *
 * # Safety
 * `potential` must be null or a live handle.
 */
bool pc_potential_converged(const struct PcPotential *potential);

/**
 * Copies the potentials row-major (`buf[i * k + c]`) into `buf`.
 *
 * # Safety
 * `buf` valid for `len` writes.
 */
enum PcStatus pc_potential_copy(const struct PcPotential *potential, double *buf, size_t len);

/**
 * Assigns each node a class. With `epsilon < 0` the route is argmax;
 * otherwise cardinality-constrained transport with slack `epsilon`
 * towards `class_sizes` (length `k`, summing to `n`; NULL splits evenly).
 *
 * # Safety
 * `class_sizes` null or valid for `k` reads; `labels` valid for `len`
 * writes.
 */
enum PcStatus pc_assign(const struct PcPotential *potential,
                        const size_t *class_sizes,
                        double epsilon,
                        size_t *labels,
                        size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PCONDUCTANCE_H */
