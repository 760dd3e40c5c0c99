#ifndef LIOUVILLE_LAB_H
#define LIOUVILLE_LAB_H

/* Generated by cbindgen from liouville-lab-ffi; regenerate with `cargo build -p liouville-lab-ffi --features regen-header`. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible entry point. The first four match
// the CLI exit statuses.
typedef enum NllStatus {
  NLL_STATUS_OK = 0,
  NLL_STATUS_TOLERANCE_FAILURE = 1,
  NLL_STATUS_CONFIG_ERROR = 2,
  NLL_STATUS_NUMERIC_FAILURE = 3,
  NLL_STATUS_INVALID_ARGUMENT = 4,
  NLL_STATUS_NULL_POINTER = 5,
  NLL_STATUS_PANIC = 6,
} NllStatus;

// Opaque sampled-field handle.
typedef struct NllField NllField;

// Opaque closed-form profile handle.
typedef struct NllForm NllForm;

// Opaque grid handle.
typedef struct NllGrid NllGrid;

// Opaque region-mask handle.
typedef struct NllMask NllMask;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *nll_version(void);

// Copy the last error message on this thread into `buf` (truncating) and
// return its full length in bytes, excluding the terminator.
//
// # Safety
// `buf` must point to `len` writable bytes (or be NULL with `len` 0).
size_t nll_last_error(char *buf, size_t len);

// Create a cell-centered grid covering the square of the given half-width.
//
// # Safety
// `out` must be a valid pointer to a handle slot.
enum NllStatus nll_grid_new(double center_x,
                            double center_y,
                            double half_width,
                            size_t n,
                            struct NllGrid **out);

// # Safety
// `grid` must be a live handle from this library (or NULL, a no-op).
void nll_grid_free(struct NllGrid *grid);

// Cell spacing h = 2 half_width / n.
//
// # Safety
// `grid` and `out` must be valid pointers.
enum NllStatus nll_grid_spacing(const struct NllGrid *grid, double *out);

// Disk mask with exact-area boundary weights.
//
// # Safety
// `grid` must be live; `out` valid.
enum NllStatus nll_mask_disk(const struct NllGrid *grid,
                             double center_x,
                             double center_y,
                             double radius,
                             struct NllMask **out);

// Annulus mask with exact-area boundary weights.
//
// # Safety
// `grid` must be live; `out` valid.
enum NllStatus nll_mask_annulus(const struct NllGrid *grid,
                                double center_x,
                                double center_y,
                                double r_in,
                                double r_out,
                                struct NllMask **out);

// Covered area of the mask (honoring fractional boundary weights).
//
// # Safety
// `mask` and `out` must be valid pointers.
enum NllStatus nll_mask_area(const struct NllMask *mask, double *out);

// # Safety
// `mask` must be a live handle (or NULL, a no-op).
void nll_mask_free(struct NllMask *mask);

// The rescaled local entire profile U_0(delta (x - x0)) + 2 log delta.
//
// # Safety
// `out` must be valid.
enum NllStatus nll_form_bubble_local(double x0_x, double x0_y, double delta, struct NllForm **out);

// The rescaled entire profile of the nonlocal problem.
//
// # Safety
// `out` must be valid.
enum NllStatus nll_form_bubble_nonlocal(double mu,
                                        double x0_x,
                                        double x0_y,
                                        double delta,
                                        struct NllForm **out);

// The rigged-family profile u_k; `which` selects the profile (0) or its
// exact driving field F_k (1).
//
// # Safety
// `out` must be valid.
enum NllStatus nll_form_rigged(uint32_t k, double mu, int32_t which, struct NllForm **out);

// Constant profile.
//
// # Safety
// `out` must be valid.
enum NllStatus nll_form_constant(double value, struct NllForm **out);

// Apply the rescaling u -> u(delta (. - x0)) + 2 log delta.
//
// # Safety
// `form` must be live; `out` valid.
enum NllStatus nll_form_rescale(const struct NllForm *form,
                                double x0_x,
                                double x0_y,
                                double delta,
                                struct NllForm **out);

// Apply the logarithmic Kelvin transform about (x0, sigma).
//
// # Safety
// `form` must be live; `out` valid.
enum NllStatus nll_form_kelvin(const struct NllForm *form,
                               double x0_x,
                               double x0_y,
                               double sigma,
                               struct NllForm **out);

// Evaluate the profile at a point.
//
// # Safety
// `form` and `out` must be valid pointers.
enum NllStatus nll_form_eval(const struct NllForm *form, double x, double y, double *out);

// # Safety
// `form` must be a live handle (or NULL, a no-op).
void nll_form_free(struct NllForm *form);

// Sample e^{scale * form} (use scale = 0 to get the field itself via
// `nll_field_sample`) at every grid node.
//
// # Safety
// `form` and `grid` must be live; `out` valid.
enum NllStatus nll_field_sample_exp(const struct NllForm *form,
                                    double scale,
                                    const struct NllGrid *grid,
                                    struct NllField **out);

// Sample the profile at every grid node.
//
// # Safety
// `form` and `grid` must be live; `out` valid.
enum NllStatus nll_field_sample(const struct NllForm *form,
                                const struct NllGrid *grid,
                                struct NllField **out);

// Number of values in the field buffer (n * n).
//
// # Safety
// `field` and `out` must be valid pointers.
enum NllStatus nll_field_len(const struct NllField *field, size_t *out);

// Copy the row-major field values into `buf` (which holds `len` doubles);
// fails unless `len` matches n * n exactly.
//
// # Safety
// `field` must be live; `buf` must point to `len` writable doubles.
enum NllStatus nll_field_values(const struct NllField *field, double *buf, size_t len);

// # Safety
// `field` must be a live handle (or NULL, a no-op).
void nll_field_free(struct NllField *field);

// 5-point Laplacian of the field (outermost ring zeroed).
//
// # Safety
// `field` must be live; `out` valid.
enum NllStatus nll_fd_laplacian(const struct NllField *field, struct NllField **out);

// Midpoint quadrature over the masked cells; with `tail_exponent > 2` the
// analytic radial tail c |x - center|^-a beyond `tail_start` is added.
// Pass `tail_coefficient = 0` and `tail_exponent = 0` for no tail.
//
// # Safety
// `field` and `mask` must be live; `out` valid.
enum NllStatus nll_integrate(const struct NllField *field,
                             const struct NllMask *mask,
                             double tail_center_x,
                             double tail_center_y,
                             double tail_coefficient,
                             double tail_exponent,
                             double tail_start,
                             double *out);

// Brute-force Riesz potential of the masked density at explicit targets.
// `xs`, `ys`, and `values` all hold `count` doubles.
//
// # Safety
// Handles must be live; the three arrays must hold `count` doubles.
enum NllStatus nll_riesz_direct(const struct NllField *density,
                                const struct NllMask *support,
                                double mu,
                                const double *xs,
                                const double *ys,
                                size_t count,
                                double *values);

// FFT evaluation of the Riesz potential at every grid node (the density is
// used as given; apply masks before calling).
//
// # Safety
// `density` must be live; `out` valid.
enum NllStatus nll_riesz_fft(const struct NllField *density, double mu, struct NllField **out);

// Logarithmic Newtonian potential of the masked density at every node,
// with an optional analytic radial tail (see `nll_integrate`).
//
// # Safety
// Handles must be live; `out` valid.
enum NllStatus nll_log_potential(const struct NllField *density,
                                 const struct NllMask *support,
                                 double tail_center_x,
                                 double tail_center_y,
                                 double tail_coefficient,
                                 double tail_exponent,
                                 double tail_start,
                                 struct NllField **out);

// Zero-boundary solve of -lap u = f on the disk carried by the mask.
//
// # Safety
// Handles must be live; `out` valid.
enum NllStatus nll_dirichlet_disk_solve(const struct NllField *f,
                                        const struct NllMask *disk,
                                        struct NllField **out);

// Mass of the equation's right side over the target region with constant
// coefficient, optionally extending the source by the profile's analytic
// tail.
//
// # Safety
// Handles must be live; `out` valid.
enum NllStatus nll_region_mass(const struct NllForm *form,
                               double v_const,
                               const struct NllMask *src,
                               const struct NllMask *target,
                               double mu,
                               int32_t with_tail,
                               double *out);

// Whole-plane mass of the right side for a constant coefficient.
//
// # Safety
// Handles must be live; `out` valid.
enum NllStatus nll_entire_mass(const struct NllForm *form,
                               double v_const,
                               double mu,
                               const struct NllGrid *grid,
                               double *out);

// Run an experiment from flat key=value config text (the config-file
// vocabulary: experiment, mu, n, half-width, deltas, ks, centers,
// separations, r-ball, seed, format). The report is written to `out_path`
// when non-NULL, in the configured format. The return value carries the
// CLI exit semantics: Ok, ToleranceFailure, ConfigError, NumericFailure.
//
// # Safety
// `config_text` must be a NUL-terminated string; `out_path` NULL or the same.
enum NllStatus nll_run_config(const char *config_text, const char *out_path);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LIOUVILLE_LAB_H */
