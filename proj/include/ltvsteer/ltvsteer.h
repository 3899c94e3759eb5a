#ifndef LTVSTEER_LTVSTEER_H
#define LTVSTEER_LTVSTEER_H

/*
 * C interface to the ltvsteer library.
 *
 * Matrices cross the boundary as dense row-major double arrays. Every
 * function returning ltv_status leaves a description of the last failure in
 * ltv_last_error() (thread local). Handles are opaque and owned by the
 * caller once returned; release them with the matching destroy function.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(LTVSTEER_BUILDING)
#define LTV_API __declspec(dllexport)
#else
#define LTV_API __declspec(dllimport)
#endif
#else
#define LTV_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ltv_status {
  LTV_OK = 0,
  LTV_ERR_INVALID_ARGUMENT = 1,
  LTV_ERR_NOT_SYMMETRIC = 2,
  LTV_ERR_INDEFINITE_BEYOND_TOLERANCE = 3,
  LTV_ERR_NOT_POSITIVE_DEFINITE = 4,
  LTV_ERR_NOT_POSITIVE_DETERMINANT = 5,
  LTV_ERR_INTEGRATION_FAILURE = 6,
  LTV_ERR_RELATION_VIOLATION = 7,
  LTV_ERR_PARTITION_NOT_FOUND = 8,
  LTV_ERR_EXISTENCE_NOT_CERTIFIED = 9,
  LTV_ERR_FACTORIZATION_FAILED = 10,
  LTV_ERR_SINGULAR_INTERLEAVER = 11,
  LTV_ERR_NO_CERTIFICATE_APPLIES = 12,
  LTV_ERR_INFEASIBLE_TARGET = 13,
  LTV_ERR_ASSUMPTION_VIOLATED = 14,
  LTV_ERR_RDE_ESCAPE = 15,
  LTV_ERR_NOT_CONTROLLABLE = 16,
  LTV_ERR_SCHEDULE_GAP = 17,
  LTV_ERR_INTERNAL = 99
} ltv_status;

typedef struct ltv_system ltv_system;
typedef struct ltv_schedule ltv_schedule;
typedef struct ltv_trajectory ltv_trajectory;

typedef struct ltv_options {
  double quad_rtol;
  double quad_atol;
  double rank_tol;
  double strict_margin;
  double fac_tol;
  double membership_tol;
  double blowup_norm;
  int schedule_samples;
  uint64_t seed;
} ltv_options;

LTV_API void ltv_options_default(ltv_options* options);
LTV_API const char* ltv_last_error(void);
LTV_API const char* ltv_status_name(ltv_status status);

/* Systems. A(t) is n x n and B(t) is n x m. */
LTV_API ltv_status ltv_system_create_constant(size_t n, size_t m, const double* a, const double* b,
                                              double horizon, ltv_system** out);
/* Coefficients in ascending degree: a_coeffs holds a_count blocks of n*n. */
LTV_API ltv_status ltv_system_create_polynomial(size_t n, size_t m, size_t a_count,
                                                const double* a_coeffs, size_t b_count,
                                                const double* b_coeffs, double horizon,
                                                ltv_system** out);
/* Piecewise-linear interpolation of count samples at strictly increasing times. */
LTV_API ltv_status ltv_system_create_sampled(size_t n, size_t m, size_t count, const double* times,
                                             const double* a_samples, const double* b_samples,
                                             double horizon, ltv_system** out);
LTV_API void ltv_system_destroy(ltv_system* sys);
LTV_API ltv_status ltv_system_dims(const ltv_system* sys, size_t* n, size_t* m, double* horizon);

/* Analysis. NULL options select the defaults. */
LTV_API ltv_status ltv_stm(const ltv_system* sys, double t_from, double t_to,
                           const ltv_options* options, double* phi_out);

typedef struct ltv_gramian_info {
  size_t rank;
  double relation_residual;
} ltv_gramian_info;

/* G(t_end, t), H(t_end, t) and the range-first orthogonal basis U of H. Any
 * output pointer may be NULL. */
LTV_API ltv_status ltv_gramians(const ltv_system* sys, double t, double t_end,
                                const ltv_options* options, double* g_out, double* h_out,
                                double* u_out, ltv_gramian_info* info);

typedef struct ltv_partition {
  double times[6];
  size_t segment_ranks[5];
  size_t global_rank;
  double range_residual;
  int certified;
} ltv_partition;

/* On LTV_ERR_PARTITION_NOT_FOUND the best candidate is still written. */
LTV_API ltv_status ltv_partition_find(const ltv_system* sys, double t_end,
                                      const ltv_options* options, ltv_partition* out);
LTV_API ltv_status ltv_partition_evaluate(const ltv_system* sys, const double times[6],
                                          const ltv_options* options, ltv_partition* out);

typedef struct ltv_phi_check {
  int member;
  int geometric_member;
  size_t rank;
  double det_bar_phi;
  double lower_left;
  double lower_right;
  double tolerance;
} ltv_phi_check;

/* bar_phi_out (rank x rank) and tilde_phi_out (rank x (n - rank)) may be NULL;
 * when given they need room for n*n entries. */
LTV_API ltv_status ltv_check_phi(const ltv_system* sys, double t_end, const double* phi_f,
                                 const ltv_options* options, ltv_phi_check* out,
                                 double* bar_phi_out, double* tilde_phi_out);

typedef struct ltv_sigma_check {
  int member;
  int pulled_back_member;
  size_t rank;
  double projected_residual;
  double tolerance;
  double pulled_back_residual;
  double pulled_back_tolerance;
} ltv_sigma_check;

LTV_API ltv_status ltv_check_sigma(const ltv_system* sys, double t_end, const double* sigma0,
                                   const double* sigma_f, const ltv_options* options,
                                   ltv_sigma_check* out);

/* Synthesis. */
typedef enum ltv_phi_method {
  LTV_PHI_AUTO = 0,
  LTV_PHI_SINGLE_RDE = 1,
  LTV_PHI_FIVE_SEGMENT = 2
} ltv_phi_method;

typedef enum ltv_sigma_method {
  LTV_SIGMA_GENERAL = 0,
  LTV_SIGMA_CONTROLLABLE = 1
} ltv_sigma_method;

/* partition may be NULL (searched for when needed). */
LTV_API ltv_status ltv_synth_phi(const ltv_system* sys, double t_end, const double* phi_f,
                                 ltv_phi_method method, const ltv_partition* partition,
                                 const ltv_options* options, ltv_schedule** out);
LTV_API ltv_status ltv_synth_sigma(const ltv_system* sys, double t_end, const double* sigma0,
                                   const double* sigma_f, ltv_sigma_method method,
                                   const ltv_options* options, ltv_schedule** out);
/* Schedule from explicit segment intervals and Riccati initial values
 * (count blocks of n*n in pis). */
LTV_API ltv_status ltv_schedule_from_segments(const ltv_system* sys, size_t count,
                                              const double* starts, const double* ends,
                                              const double* pis, const ltv_options* options,
                                              ltv_schedule** out);
LTV_API void ltv_schedule_destroy(ltv_schedule* schedule);

typedef struct ltv_schedule_info {
  const char* construction; /* static string, valid for the program lifetime */
  size_t n;
  size_t m;
  size_t segment_count;
  size_t rank;
  double det_bar_phi;       /* transition targets only, else 0 */
  double factor_residual;   /* five-segment constructions only, else 0 */
  double lift_residual;     /* general covariance construction only, else 0 */
  int has_partition;
  double partition[6];
  double max_collocation_residual;
} ltv_schedule_info;

LTV_API ltv_status ltv_schedule_get_info(const ltv_schedule* schedule, ltv_schedule_info* info);
/* pi_start needs n*n entries and may be NULL. */
LTV_API ltv_status ltv_schedule_segment(const ltv_schedule* schedule, size_t index, double* start,
                                        double* end, double* pi_start, size_t* sample_count);
/* pi needs n*n and k needs m*n entries; either may be NULL. */
LTV_API ltv_status ltv_schedule_sample(const ltv_schedule* schedule, size_t segment, size_t index,
                                       double* t, double* pi, double* k);

/* Simulation and verification. */
typedef struct ltv_sim_options {
  int grid;                   /* uniform samples on [0, T]; <= 0 selects 600 */
  const double* extra_times;  /* extra output times */
  size_t extra_count;
  const double* sigma0;       /* n*n, may be NULL */
  const double* tracers;      /* tracer_count initial states of length n */
  size_t tracer_count;
  int allow_open_loop_tail;
  double t_end;               /* <= 0 selects the system horizon */
} ltv_sim_options;

LTV_API void ltv_sim_options_default(ltv_sim_options* options);

LTV_API ltv_status ltv_simulate(const ltv_system* sys, const ltv_schedule* schedule,
                                const ltv_sim_options* sim, const ltv_options* options,
                                ltv_trajectory** out);
LTV_API void ltv_trajectory_destroy(ltv_trajectory* trajectory);

typedef struct ltv_trajectory_info {
  size_t length;
  size_t n;
  size_t tracer_count;
  int has_sigma;
  int det_positive;
  int schedule_complete;
  double min_det;
  double max_sigma_asymmetry;
} ltv_trajectory_info;

LTV_API ltv_status ltv_trajectory_get_info(const ltv_trajectory* trajectory,
                                           ltv_trajectory_info* info);
/* phi and sigma need n*n entries, tracers tracer_count*n; any may be NULL. */
LTV_API ltv_status ltv_trajectory_sample(const ltv_trajectory* trajectory, size_t index, double* t,
                                         int* segment, double* phi, double* sigma,
                                         double* tracers);

typedef struct ltv_verify_report {
  double residual;
  double relative_residual;
  double min_det;
  int det_positive;
  int schedule_complete;
} ltv_verify_report;

/* achieved (n*n) may be NULL. sim may be NULL. */
LTV_API ltv_status ltv_verify_phi(const ltv_system* sys, const ltv_schedule* schedule,
                                  const double* phi_f, const ltv_sim_options* sim,
                                  const ltv_options* options, ltv_verify_report* report,
                                  double* achieved);
LTV_API ltv_status ltv_verify_sigma(const ltv_system* sys, const ltv_schedule* schedule,
                                    const double* sigma0, const double* sigma_f,
                                    const ltv_sim_options* sim, const ltv_options* options,
                                    ltv_verify_report* report, double* achieved);

/* Principal semi-axes (columns, decreasing length) of the scale-sigma
 * ellipsoid of an n x n covariance. axes_out needs n*n entries. */
LTV_API ltv_status ltv_covariance_axes(size_t n, const double* sigma, double scale,
                                       double* axes_out);

#ifdef __cplusplus
}
#endif

#endif /* LTVSTEER_LTVSTEER_H */
