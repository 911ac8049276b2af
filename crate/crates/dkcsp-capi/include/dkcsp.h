/* C interface for the dkcsp (d,k)-CSP solver and analysis library.
 *
 * Conventions:
 *   - fallible functions return a dkcsp_status code; DKCSP_OK is 0;
 *   - on failure, dkcsp_last_error_message() returns a detail string valid
 *     until the next failing call on the same thread;
 *   - formula handles are owned by the caller and released with
 *     dkcsp_formula_free(); strings with dkcsp_string_free();
 *   - assignment buffers are caller-allocated with room for n uint32_t
 *     values (values are 1..=d; buffers are zero-filled when nothing is
 *     found).
 */

#ifndef DKCSP_H
#define DKCSP_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef int32_t dkcsp_status;

enum {
    DKCSP_OK = 0,
    DKCSP_ERR_NULL_ARGUMENT = 1,
    DKCSP_ERR_UTF8 = 2,
    DKCSP_ERR_IO = 3,
    DKCSP_ERR_PARSE = 4,
    DKCSP_ERR_INVALID_ARGUMENT = 5,
    DKCSP_ERR_TOO_LARGE = 6,
    DKCSP_ERR_PRECONDITION = 7,
};

enum {
    DKCSP_FAMILY_PLANTED = 0,
    DKCSP_FAMILY_PLANTED_UNIQUE = 1,
    DKCSP_FAMILY_DISTINCT_CRITICAL = 2,
    DKCSP_FAMILY_CHAIN = 3,
    DKCSP_FAMILY_UNIFORM = 4,
};

/* Opaque formula handle. */
typedef struct dkcsp_formula dkcsp_formula;

const char *dkcsp_version(void);
const char *dkcsp_status_name(dkcsp_status status);
const char *dkcsp_last_error_message(void);

/* Formula lifecycle. */
dkcsp_status dkcsp_formula_parse(const char *text, dkcsp_formula **out);
dkcsp_status dkcsp_formula_read_file(const char *path, dkcsp_formula **out);
dkcsp_status dkcsp_generate(int32_t family, uint32_t d, size_t k, size_t n,
                            size_t m, uint64_t seed, dkcsp_formula **out);
void dkcsp_formula_free(dkcsp_formula *handle);

/* Accessors. */
uint32_t dkcsp_formula_domain_size(const dkcsp_formula *handle);
size_t dkcsp_formula_num_vars(const dkcsp_formula *handle);
size_t dkcsp_formula_num_constraints(const dkcsp_formula *handle);
size_t dkcsp_formula_width(const dkcsp_formula *handle);
dkcsp_status dkcsp_formula_to_string(const dkcsp_formula *handle, char **out);
void dkcsp_string_free(char *text);

/* Solvers. Out-pointers may be NULL when unused. */
dkcsp_status dkcsp_ppz_solve(const dkcsp_formula *handle, uint64_t trials,
                             uint64_t seed, bool stop_early,
                             uint32_t *values_out, bool *found,
                             uint64_t *successes, uint64_t *trials_run);
dkcsp_status dkcsp_schoening_solve(const dkcsp_formula *handle,
                                   uint64_t restarts, uint64_t steps,
                                   uint64_t seed, bool stop_early,
                                   uint32_t *values_out, bool *found,
                                   uint64_t *successes);
dkcsp_status dkcsp_brute_solve(const dkcsp_formula *handle,
                               uint32_t *values_out, bool *found);

/* Analysis. */
dkcsp_status dkcsp_exact_success_prob(const dkcsp_formula *handle,
                                      double *out);
dkcsp_status dkcsp_monte_carlo_success(const dkcsp_formula *handle,
                                       uint64_t trials, uint64_t seed,
                                       double *estimate, double *std_error,
                                       uint64_t *successes);

/* Per-variable success exponents. */
dkcsp_status dkcsp_g_quadrature(uint32_t d, uint32_t k, double tolerance,
                                double *out);
dkcsp_status dkcsp_g_closed_form(uint32_t d, uint32_t k, double *out);
dkcsp_status dkcsp_schoening_exponent(uint32_t d, uint32_t k, double *out);
dkcsp_status dkcsp_suboptimal_exponent(uint32_t d, uint32_t k, double *out);

#ifdef __cplusplus
}
#endif

#endif /* DKCSP_H */
