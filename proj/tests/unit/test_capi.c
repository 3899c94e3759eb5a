/* Exercises the shared library through its C header only. */
#include <math.h>
#include <stdio.h>
#include <string.h>

#include "ltvsteer/ltvsteer.h"

static int failures = 0;

#define EXPECT(cond)                                                   \
  do {                                                                 \
    if (!(cond)) {                                                     \
      fprintf(stderr, "%s:%d: EXPECT(%s) failed\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                      \
    }                                                                  \
  } while (0)

static double frob_diff(const double* x, const double* y, size_t len) {
  double s = 0.0;
  for (size_t i = 0; i < len; ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
  return sqrt(s);
}

static void test_errors(void) {
  ltv_system* sys = NULL;
  const double a[4] = {0, 1, 0, 0};
  const double b[2] = {0, 1};
  EXPECT(ltv_system_create_constant(2, 1, a, b, -1.0, &sys) == LTV_ERR_INVALID_ARGUMENT);
  EXPECT(sys == NULL);
  EXPECT(strlen(ltv_last_error()) > 0);
  EXPECT(ltv_system_create_constant(2, 1, NULL, b, 1.0, &sys) == LTV_ERR_INVALID_ARGUMENT);
  EXPECT(strcmp(ltv_status_name(LTV_OK), "Ok") == 0);
  EXPECT(strcmp(ltv_status_name(LTV_ERR_NOT_CONTROLLABLE), "NotControllable") == 0);
  ltv_system_destroy(NULL);
  ltv_schedule_destroy(NULL);
  ltv_trajectory_destroy(NULL);
}

static void test_double_integrator(void) {
  const double a[4] = {0, 1, 0, 0};
  const double b[2] = {0, 1};
  ltv_system* sys = NULL;
  EXPECT(ltv_system_create_constant(2, 1, a, b, 1.0, &sys) == LTV_OK);
  size_t n = 0, m = 0;
  double horizon = 0.0;
  EXPECT(ltv_system_dims(sys, &n, &m, &horizon) == LTV_OK);
  EXPECT(n == 2 && m == 1 && horizon == 1.0);

  double phi[4];
  EXPECT(ltv_stm(sys, 0.0, 1.0, NULL, phi) == LTV_OK);
  const double expect_phi[4] = {1, 1, 0, 1};
  EXPECT(frob_diff(phi, expect_phi, 4) < 1e-10);

  /* G(1,0) = [[1/3, 1/2], [1/2, 1]]. */
  double g[4], h[4];
  ltv_gramian_info gi;
  EXPECT(ltv_gramians(sys, 0.0, 1.0, NULL, g, h, NULL, &gi) == LTV_OK);
  const double expect_g[4] = {1.0 / 3, 0.5, 0.5, 1.0};
  EXPECT(frob_diff(g, expect_g, 4) < 1e-10);
  EXPECT(gi.rank == 2);
  EXPECT(gi.relation_residual < 1e-8);

  ltv_partition part;
  EXPECT(ltv_partition_find(sys, 1.0, NULL, &part) == LTV_OK);
  EXPECT(part.certified);
  EXPECT(part.times[0] == 0.0 && part.times[5] == 1.0);

  const double target[4] = {0.5, -1.0, 1.0, 0.5};
  ltv_phi_check pc;
  EXPECT(ltv_check_phi(sys, 1.0, target, NULL, &pc, NULL, NULL) == LTV_OK);
  EXPECT(pc.member);
  EXPECT(pc.rank == 2);

  ltv_schedule* sched = NULL;
  EXPECT(ltv_synth_phi(sys, 1.0, target, LTV_PHI_FIVE_SEGMENT, &part, NULL, &sched) == LTV_OK);
  ltv_schedule_info si;
  EXPECT(ltv_schedule_get_info(sched, &si) == LTV_OK);
  EXPECT(si.segment_count == 5);
  EXPECT(si.has_partition);
  EXPECT(strlen(si.construction) > 0);

  ltv_verify_report rep;
  double achieved[4];
  EXPECT(ltv_verify_phi(sys, sched, target, NULL, NULL, &rep, achieved) == LTV_OK);
  EXPECT(rep.relative_residual < 1e-5);
  EXPECT(rep.det_positive);

  /* Rebuild the same schedule from its segment data and compare. */
  double starts[5], ends[5], pis[20];
  for (size_t i = 0; i < 5; ++i) {
    size_t count = 0;
    EXPECT(ltv_schedule_segment(sched, i, &starts[i], &ends[i], pis + 4 * i, &count) == LTV_OK);
    EXPECT(count >= 2);
  }
  ltv_schedule* copy = NULL;
  EXPECT(ltv_schedule_from_segments(sys, 5, starts, ends, pis, NULL, &copy) == LTV_OK);
  ltv_verify_report rep2;
  double achieved2[4];
  EXPECT(ltv_verify_phi(sys, copy, target, NULL, NULL, &rep2, achieved2) == LTV_OK);
  EXPECT(frob_diff(achieved, achieved2, 4) < 1e-12);

  double t = -1.0, k[2];
  EXPECT(ltv_schedule_sample(sched, 0, 0, &t, NULL, k) == LTV_OK);
  EXPECT(t == 0.0);
  EXPECT(ltv_schedule_sample(sched, 7, 0, &t, NULL, k) == LTV_ERR_INVALID_ARGUMENT);

  ltv_sim_options sim;
  ltv_sim_options_default(&sim);
  EXPECT(sim.grid == 600);
  const double sigma0[4] = {1, 0, 0, 1};
  const double tracers[4] = {1, 0, 0, 1};
  sim.sigma0 = sigma0;
  sim.tracers = tracers;
  sim.tracer_count = 2;
  ltv_trajectory* traj = NULL;
  EXPECT(ltv_simulate(sys, sched, &sim, NULL, &traj) == LTV_OK);
  ltv_trajectory_info ti;
  EXPECT(ltv_trajectory_get_info(traj, &ti) == LTV_OK);
  EXPECT(ti.length >= 600);
  EXPECT(ti.has_sigma && ti.det_positive && ti.schedule_complete);
  double tt, sphi[4], ssig[4], str[4];
  int seg = -2;
  EXPECT(ltv_trajectory_sample(traj, ti.length - 1, &tt, &seg, sphi, ssig, str) == LTV_OK);
  EXPECT(tt == 1.0);
  EXPECT(seg == 4);
  EXPECT(frob_diff(sphi, achieved, 4) < 1e-12);
  EXPECT(frob_diff(str, sphi, 4) > 0.0);
  EXPECT(ltv_trajectory_sample(traj, ti.length, &tt, NULL, NULL, NULL, NULL) ==
         LTV_ERR_INVALID_ARGUMENT);

  ltv_trajectory_destroy(traj);
  ltv_schedule_destroy(copy);
  ltv_schedule_destroy(sched);
  ltv_system_destroy(sys);
}

static void test_covariance(void) {
  /* Scalar a = 0, b = 1 on [0, 1], sigma0 = 1, sigma_f = 4. */
  const double a = 0.0, b = 1.0, s0 = 1.0, sf = 4.0;
  ltv_system* sys = NULL;
  EXPECT(ltv_system_create_constant(1, 1, &a, &b, 1.0, &sys) == LTV_OK);
  ltv_sigma_check sc;
  EXPECT(ltv_check_sigma(sys, 1.0, &s0, &sf, NULL, &sc) == LTV_OK);
  EXPECT(sc.member && sc.pulled_back_member);
  ltv_schedule* sched = NULL;
  EXPECT(ltv_synth_sigma(sys, 1.0, &s0, &sf, LTV_SIGMA_CONTROLLABLE, NULL, &sched) == LTV_OK);
  double start, end, pi0;
  size_t count;
  EXPECT(ltv_schedule_segment(sched, 0, &start, &end, &pi0, &count) == LTV_OK);
  EXPECT(fabs(pi0 + 1.0) < 1e-10);
  ltv_verify_report rep;
  double achieved;
  EXPECT(ltv_verify_sigma(sys, sched, &s0, &sf, NULL, NULL, &rep, &achieved) == LTV_OK);
  EXPECT(fabs(achieved - 4.0) < 1e-8);
  ltv_schedule_destroy(sched);

  /* Uncontrollable pair: the closed form refuses. */
  const double a2[4] = {0.2, 0.8, 0, 0.3};
  const double b2[2] = {1, 0};
  const double eye[4] = {1, 0, 0, 1};
  ltv_system* sys2 = NULL;
  EXPECT(ltv_system_create_constant(2, 1, a2, b2, 1.0, &sys2) == LTV_OK);
  EXPECT(ltv_synth_sigma(sys2, 1.0, eye, eye, LTV_SIGMA_CONTROLLABLE, NULL, &sched) ==
         LTV_ERR_NOT_CONTROLLABLE);
  const double bad_sf[4] = {0.2, 0, 0, 3.0};
  EXPECT(ltv_synth_sigma(sys2, 1.0, eye, bad_sf, LTV_SIGMA_GENERAL, NULL, &sched) ==
         LTV_ERR_INFEASIBLE_TARGET);

  double axes[4];
  const double diag[4] = {1, 0, 0, 4};
  EXPECT(ltv_covariance_axes(2, diag, 1.0, axes) == LTV_OK);
  EXPECT(fabs(fabs(axes[2]) - 2.0) < 1e-12);

  ltv_system_destroy(sys2);
  ltv_system_destroy(sys);
}

static void test_sampled_and_polynomial(void) {
  const double times[3] = {0.0, 0.5, 1.0};
  const double as[3] = {0.0, 1.0, 0.0};
  const double bs[3] = {1.0, 1.0, 1.0};
  ltv_system* sys = NULL;
  EXPECT(ltv_system_create_sampled(1, 1, 3, times, as, bs, 1.0, &sys) == LTV_OK);
  double phi;
  EXPECT(ltv_stm(sys, 0.0, 1.0, NULL, &phi) == LTV_OK);
  EXPECT(fabs(phi - exp(0.5)) < 1e-9); /* integral of the hat is 1/2 */
  ltv_system_destroy(sys);

  const double ac[2] = {0.0, 2.0}; /* a(t) = 2t */
  const double bc[1] = {1.0};
  EXPECT(ltv_system_create_polynomial(1, 1, 2, ac, 1, bc, 1.0, &sys) == LTV_OK);
  EXPECT(ltv_stm(sys, 0.0, 1.0, NULL, &phi) == LTV_OK);
  EXPECT(fabs(phi - exp(1.0)) < 1e-9);
  ltv_options opt;
  ltv_options_default(&opt);
  opt.quad_rtol = -1.0;
  EXPECT(ltv_stm(sys, 0.0, 1.0, &opt, &phi) == LTV_ERR_INVALID_ARGUMENT);
  ltv_system_destroy(sys);
}

int main(void) {
  test_errors();
  test_double_integrator();
  test_covariance();
  test_sampled_and_polynomial();
  if (failures) {
    fprintf(stderr, "%d failure(s)\n", failures);
    return 1;
  }
  printf("C API checks passed\n");
  return 0;
}
