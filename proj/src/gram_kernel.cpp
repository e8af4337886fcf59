#include "platoon/gram_kernel.hpp"
#include <algorithm>

namespace platoon {

namespace {

// vec of the transpose, so that tr(G * W) = dot(vec(G), vecT(W)) for symmetric G
inline void write_vec_t(const Eigen::MatrixXd& m, Eigen::MatrixXd& flat, int row) {
  const int s = static_cast<int>(m.rows());
  for (int r = 0; r < s; ++r)
    for (int c = 0; c < s; ++c) flat(row, r * s + c) = m(c, r);
}

}  // namespace

void BlockOperator::finalize() {
  const int q = static_cast<int>(G.size());
  Gflat.resize(q, side * side);
  for (int j = 0; j < q; ++j)
    for (int r = 0; r < side; ++r)
      for (int c = 0; c < side; ++c) Gflat(j, r * side + c) = G[j](r, c);
}

void gram_scaled_mats_serial(const BlockOperator& op, const Eigen::MatrixXd& X,
                             const Eigen::MatrixXd& Sinv, Eigen::MatrixXd& Wflat) {
  const int q = static_cast<int>(op.G.size());
  Wflat.resize(q, op.side * op.side);
  Eigen::MatrixXd tmp(op.side, op.side), w(op.side, op.side);
  for (int l = 0; l < q; ++l) {
    tmp.noalias() = X * op.G[l];
    w.noalias() = tmp * Sinv;
    write_vec_t(w, Wflat, l);
  }
}

void gram_scaled_mats_parallel(const BlockOperator& op, const Eigen::MatrixXd& X,
                               const Eigen::MatrixXd& Sinv, Eigen::MatrixXd& Wflat) {
  const int q = static_cast<int>(op.G.size());
  Wflat.resize(q, op.side * op.side);
#pragma omp parallel
  {
    Eigen::MatrixXd tmp(op.side, op.side), w(op.side, op.side);
#pragma omp for schedule(static)
    for (int l = 0; l < q; ++l) {
      tmp.noalias() = X * op.G[l];
      w.noalias() = tmp * Sinv;
      write_vec_t(w, Wflat, l);
    }
  }
}

void gram_accumulate_serial(const BlockOperator& op, const Eigen::MatrixXd& Wflat,
                            Eigen::MatrixXd& H) {
  // same strip decomposition as the parallel variant so results match bitwise
  const int q = static_cast<int>(H.rows());
  for (int r0 = 0; r0 < q; r0 += 32) {
    const int rows = std::min(32, q - r0);
    H.middleRows(r0, rows).noalias() +=
        op.Gflat.middleRows(r0, rows) * Wflat.transpose();
  }
}

void gram_accumulate_parallel(const BlockOperator& op, const Eigen::MatrixXd& Wflat,
                              Eigen::MatrixXd& H) {
  const int q = static_cast<int>(H.rows());
#pragma omp parallel for schedule(static)
  for (int r0 = 0; r0 < q; r0 += 32) {
    const int rows = std::min(32, q - r0);
    H.middleRows(r0, rows).noalias() +=
        op.Gflat.middleRows(r0, rows) * Wflat.transpose();
  }
}

Eigen::VectorXd gram_contract(const BlockOperator& op, const Eigen::MatrixXd& V) {
  const int s = op.side;
  Eigen::VectorXd vec_t(s * s);
  for (int r = 0; r < s; ++r)
    for (int c = 0; c < s; ++c) vec_t(r * s + c) = V(c, r);
  return op.Gflat * vec_t;
}

}  // namespace platoon
