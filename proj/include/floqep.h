#ifndef FLOQEP_H
#define FLOQEP_H

/* C API of the floqep library: subwavelength spectra, Floquet
 * quasi-frequencies and first-order asymptotic exceptional points of
 * time-modulated elastic lattices.
 *
 * All functions return FLOQEP_OK (0) on success or a nonzero status code;
 * floqep_last_error() describes the most recent failure on the calling
 * thread. Objects are opaque handles released with the matching _destroy.
 * Complex matrices are passed as separate real/imaginary buffers in
 * row-major order.
 */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef int32_t floqep_status;

enum {
  FLOQEP_OK = 0,
  FLOQEP_ERR_INVALID_ARGUMENT = 1,
  FLOQEP_ERR_CONFIG = 2,
  FLOQEP_ERR_NUMERICAL = 3,
  FLOQEP_ERR_CERTIFICATION = 4,
  FLOQEP_ERR_IO = 5,
};

const char* floqep_version(void);
const char* floqep_last_error(void);

/* ---------- lattices ---------- */

typedef struct floqep_lattice_s floqep_lattice;

/* basis: dim*dim, column k holds basis vector k (row-major rows = coords) */
floqep_status floqep_lattice_create(int dim, const double* basis, floqep_lattice** out);
void floqep_lattice_destroy(floqep_lattice* lat);
floqep_status floqep_lattice_dual_basis(const floqep_lattice* lat, double* dual);
floqep_status floqep_lattice_cell_volume(const floqep_lattice* lat, double* volume);
floqep_status floqep_lattice_canonicalize(const floqep_lattice* lat, const double* alpha,
                                          double* alpha_reduced);
floqep_status floqep_lattice_dual_shell_count(const floqep_lattice* lat, const double* alpha,
                                              double q_max, int64_t* count);

/* ---------- quasiperiodic Green tensor ---------- */

floqep_status floqep_green_static(const floqep_lattice* lat, double lambda, double mu,
                                  const double* alpha, const double* x, const double* y,
                                  double q_max, double* re, double* im);
floqep_status floqep_green_full(const floqep_lattice* lat, double lambda, double mu,
                                const double* theta, double omega, const double* alpha,
                                const double* x, const double* y, double q_max, double* re,
                                double* im);
floqep_status floqep_green_correction1(const floqep_lattice* lat, double lambda, double mu,
                                       const double* theta, const double* alpha, const double* x,
                                       const double* y, double q_max, double* re, double* im);

/* ---------- capacitance data and the static spectrum ---------- */

typedef struct floqep_capacitance_s floqep_capacitance;

/* centers: 2*n_disks (x0,y0,x1,y1,...) */
floqep_status floqep_capacitance_compute_disks(const floqep_lattice* lat, double lambda,
                                               double mu, const double* alpha,
                                               const double* centers, const double* radii,
                                               int n_disks, int nodes_per_boundary, double q_max,
                                               floqep_capacitance** out);
floqep_status floqep_capacitance_load(const char* path, floqep_capacitance** out);
floqep_status floqep_capacitance_save(const floqep_capacitance* cap, const char* path);
void floqep_capacitance_destroy(floqep_capacitance* cap);
floqep_status floqep_capacitance_dims(const floqep_capacitance* cap, int* dim, int* n_res);
/* buffers of (dim*n_res)^2 */
floqep_status floqep_capacitance_entries(const floqep_capacitance* cap, double* re, double* im);
floqep_status floqep_capacitance_symmetry_residual(const floqep_capacitance* cap,
                                                   double* residual);

/* xi/omega buffers of dim*n_res; rho of dim; volumes of n_res (NULL = ones) */
floqep_status floqep_static_spectrum(const floqep_capacitance* cap, const double* rho,
                                     const double* volumes, double epsilon, double* xi_re,
                                     double* xi_im, double* omega_re, double* omega_im);

/* Floquet exponents of the unmodulated lifted system, folded into
 * (-Omega/2, Omega/2]; buffers of 2*dim*n_res. */
floqep_status floqep_floquet_unmodulated(const floqep_capacitance* cap, const double* rho,
                                         const double* volumes, double epsilon, double omega_mod,
                                         double tol, double* exp_re, double* exp_im);

/* ---------- exceptional points ---------- */

typedef struct floqep_certificate_s floqep_certificate;

/* params layout (12 doubles): c11 c22 c33 re(c12) im(c12) re(c13) im(c13)
 * re(c23) im(c23) epsilon volume eta.
 * xi1 coefficients: n_coeffs triples (m, re, im) flattened. */
floqep_status floqep_ep_certify(const double* params12, const double* xi1_triples, int n_coeffs,
                                double omega_mod, int n, floqep_certificate** out);

/* options_json mirrors the "ep" section of an ep-construct config. */
floqep_status floqep_ep_search(const char* options_json, uint64_t seed, floqep_certificate** out);

floqep_status floqep_certificate_valid(const floqep_certificate* cert, int* valid);
floqep_status floqep_certificate_defective(const floqep_certificate* cert, int* defective);
floqep_status floqep_certificate_omega(const floqep_certificate* cert, double* omega_mod);
/* Serialized certificate document; always NUL-terminated when cap > 0.
 * *needed receives the full length (excluding the terminator). */
floqep_status floqep_certificate_text(const floqep_certificate* cert, char* buf, size_t cap,
                                      size_t* needed);
void floqep_certificate_destroy(floqep_certificate* cert);

floqep_status floqep_appendix2d_check(double c11, double c22, double c12_re, double c12_im,
                                      double* phi_plus, double* phi_minus,
                                      double* identity_residual, int* ep_possible);

/* ---------- experiment driver ---------- */

/* Runs a config file and writes result tables under out_dir.
 * workers <= 0 means one worker; seed_override < 0 keeps the config seed;
 * tol_overrides is a comma-separated "key=value" list or NULL. */
floqep_status floqep_run_experiment(const char* config_path, const char* out_dir, int workers,
                                    int64_t seed_override, const char* tol_overrides);
floqep_status floqep_run_experiment_json(const char* config_json, const char* out_dir,
                                         int workers, int64_t seed_override,
                                         const char* tol_overrides);

#ifdef __cplusplus
}
#endif

#endif /* FLOQEP_H */
