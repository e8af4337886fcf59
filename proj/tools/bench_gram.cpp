// Times the interior-point Gram kernels: serial reference vs OpenMP.
#include <chrono>
#include <cstdio>
#include <omp.h>

#include "platoon/gram_kernel.hpp"
#include "platoon/rng.hpp"

using namespace platoon;
using Eigen::MatrixXd;

namespace {

MatrixXd random_sym(int s, Rng& rng) {
  MatrixXd m(s, s);
  for (int i = 0; i < s; ++i)
    for (int j = 0; j <= i; ++j) m(i, j) = m(j, i) = rng.uniform(-1.0, 1.0);
  return m;
}

double time_ms(const std::function<void()>& f, int reps) {
  using clock = std::chrono::steady_clock;
  f();  // warm up
  const auto t0 = clock::now();
  for (int r = 0; r < reps; ++r) f();
  return std::chrono::duration<double, std::milli>(clock::now() - t0).count() / reps;
}

}  // namespace

int main() {
  std::printf("threads available: %d\n", omp_get_max_threads());
  std::printf("%6s %6s | %12s %12s %8s | %12s %12s %8s | %s\n", "q", "side", "scaled_ser",
              "scaled_par", "speedup", "gram_ser", "gram_par", "speedup", "match");

  for (const auto& [q, side] : {std::pair{80, 46}, {160, 66}, {304, 92}, {512, 128}}) {
    Rng rng(42 + q);
    BlockOperator op;
    op.side = side;
    op.G.reserve(q);
    for (int j = 0; j < q; ++j) op.G.push_back(random_sym(side, rng));
    op.finalize();
    MatrixXd x_sym = random_sym(side, rng);
    const MatrixXd X = x_sym * x_sym.transpose() + 0.1 * MatrixXd::Identity(side, side);
    MatrixXd s_sym = random_sym(side, rng);
    const MatrixXd Sinv = s_sym * s_sym.transpose() + 0.1 * MatrixXd::Identity(side, side);

    MatrixXd w_ser, w_par;
    const double t_scaled_ser =
        time_ms([&] { gram_scaled_mats_serial(op, X, Sinv, w_ser); }, 3);
    const double t_scaled_par =
        time_ms([&] { gram_scaled_mats_parallel(op, X, Sinv, w_par); }, 3);

    MatrixXd h_ser = MatrixXd::Zero(q, q), h_par = MatrixXd::Zero(q, q);
    const double t_gram_ser = time_ms(
        [&] {
          h_ser.setZero();
          gram_accumulate_serial(op, w_ser, h_ser);
        },
        3);
    const double t_gram_par = time_ms(
        [&] {
          h_par.setZero();
          gram_accumulate_parallel(op, w_par, h_par);
        },
        3);

    const bool same = (w_ser - w_par).lpNorm<Eigen::Infinity>() == 0.0 &&
                      (h_ser - h_par).lpNorm<Eigen::Infinity>() == 0.0;
    std::printf("%6d %6d | %10.3fms %10.3fms %7.2fx | %10.3fms %10.3fms %7.2fx | %s\n", q,
                side, t_scaled_ser, t_scaled_par, t_scaled_ser / t_scaled_par, t_gram_ser,
                t_gram_par, t_gram_ser / t_gram_par, same ? "bitwise" : "DIFFER");
  }
  return 0;
}
