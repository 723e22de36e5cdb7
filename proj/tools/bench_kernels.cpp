// Times the serial reference kernels against the OpenMP kernels on
// training-shaped workloads and checks they agree bit-for-bit.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "gait/nn/kernels.hpp"
#include "gait/rng.hpp"

using namespace gait;
using namespace gait::nn;

namespace {

using Clock = std::chrono::steady_clock;

double time_ms(const std::function<void()>& fn, int reps) {
  fn();  // warm up
  const auto t0 = Clock::now();
  for (int r = 0; r < reps; ++r) fn();
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count() /
         reps;
}

void fill(Rng& rng, std::vector<double>& v) {
  for (auto& x : v) x = rng.normal();
}

void report(const char* name, double ref_ms, double omp_ms, bool identical) {
  std::printf("%-24s ref %8.3f ms   omp %8.3f ms   speedup %5.2fx   %s\n",
              name, ref_ms, omp_ms, ref_ms / omp_ms,
              identical ? "bit-identical" : "MISMATCH");
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
  std::printf("built without OpenMP; both flavors run serial\n");
#endif

  Rng rng(1234);
  const int B = 64, C1 = 7, F1 = 32, F2 = 64, K = 5, L = 100;
  const int reps = 20;

  Tensor3 x1(B, C1, L);
  fill(rng, x1.data);
  std::vector<double> w1(static_cast<size_t>(F1) * C1 * K), b1(F1);
  fill(rng, w1);
  fill(rng, b1);

  Tensor3 y_ref, y_omp;
  report("conv1d fwd 7->32",
         time_ms([&] { conv1d_forward_ref(x1, w1, b1, F1, K, y_ref); }, reps),
         time_ms([&] { conv1d_forward(x1, w1, b1, F1, K, y_omp); }, reps),
         y_ref.data == y_omp.data);

  Tensor3 x2(B, F1, L / 2);
  fill(rng, x2.data);
  std::vector<double> w2(static_cast<size_t>(F2) * F1 * K), b2(F2);
  fill(rng, w2);
  fill(rng, b2);
  report("conv1d fwd 32->64",
         time_ms([&] { conv1d_forward_ref(x2, w2, b2, F2, K, y_ref); }, reps),
         time_ms([&] { conv1d_forward(x2, w2, b2, F2, K, y_omp); }, reps),
         y_ref.data == y_omp.data);

  Tensor3 dy(B, F2, L / 2);
  fill(rng, dy.data);
  Tensor3 dx_ref, dx_omp;
  report("conv1d bwd data",
         time_ms([&] { conv1d_backward_data_ref(dy, w2, F1, K, dx_ref); }, reps),
         time_ms([&] { conv1d_backward_data(dy, w2, F1, K, dx_omp); }, reps),
         dx_ref.data == dx_omp.data);

  std::vector<double> dw_ref(w2.size()), db_ref(F2), dw_omp(w2.size()),
      db_omp(F2);
  report("conv1d bwd filters",
         time_ms([&] { conv1d_backward_filters_ref(x2, dy, K, dw_ref, db_ref); },
                 reps),
         time_ms([&] { conv1d_backward_filters(x2, dy, K, dw_omp, db_omp); },
                 reps),
         dw_ref == dw_omp && db_ref == db_omp);

  std::vector<double> mean_ref(F1), var_ref(F1), mean_omp(F1), var_omp(F1);
  report("bn batch stats",
         time_ms([&] { bn_batch_stats_ref(x2, mean_ref, var_ref); }, reps),
         time_ms([&] { bn_batch_stats(x2, mean_omp, var_omp); }, reps),
         mean_ref == mean_omp && var_ref == var_omp);

  Tensor3 xhat(B, F1, L / 2);
  fill(rng, xhat.data);
  Tensor3 dy_bn(B, F1, L / 2);
  fill(rng, dy_bn.data);
  std::vector<double> gamma(F1, 1.0), inv_std(F1, 1.0), dg_ref(F1), db2_ref(F1),
      dg_omp(F1), db2_omp(F1);
  report("bn backward",
         time_ms([&] { bn_backward_ref(dy_bn, xhat, gamma, inv_std, dx_ref,
                                       dg_ref, db2_ref); },
                 reps),
         time_ms([&] { bn_backward(dy_bn, xhat, gamma, inv_std, dx_omp, dg_omp,
                                   db2_omp); },
                 reps),
         dx_ref.data == dx_omp.data && dg_ref == dg_omp);

  Matrix mx(B, F2);
  fill(rng, mx.data);
  std::vector<double> wd(static_cast<size_t>(64) * F2), bd(64);
  fill(rng, wd);
  fill(rng, bd);
  Matrix my_ref, my_omp;
  report("dense fwd 64x64",
         time_ms([&] { dense_forward_ref(mx, wd, bd, 64, my_ref); }, reps),
         time_ms([&] { dense_forward(mx, wd, bd, 64, my_omp); }, reps),
         my_ref.data == my_omp.data);

  return 0;
}
