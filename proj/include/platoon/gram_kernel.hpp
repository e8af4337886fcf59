#pragma once

#include <Eigen/Dense>
#include <vector>

namespace platoon {

/// Dense reduced coefficient matrices of one PSD block: G[j] is the s x s
/// symmetric derivative of the block value with respect to reduced variable j.
/// Gflat caches row j = vec(G[j]) for inner-product contractions.
struct BlockOperator {
  int side = 0;
  std::vector<Eigen::MatrixXd> G;
  Eigen::MatrixXd Gflat;  // q x side^2

  void finalize();
};

/// Scaled products W[l] = X * G[l] * Sinv and the Gram matrix
/// H(j,l) += tr(G[j] * W[l]) shared by every interior-point iteration.
/// The `parallel` variants distribute independent rows across OpenMP threads
/// and produce bitwise identical results to the serial reference.
void gram_scaled_mats_serial(const BlockOperator& op, const Eigen::MatrixXd& X,
                             const Eigen::MatrixXd& Sinv, Eigen::MatrixXd& Wflat);
void gram_scaled_mats_parallel(const BlockOperator& op, const Eigen::MatrixXd& X,
                               const Eigen::MatrixXd& Sinv, Eigen::MatrixXd& Wflat);

void gram_accumulate_serial(const BlockOperator& op, const Eigen::MatrixXd& Wflat,
                            Eigen::MatrixXd& H);
void gram_accumulate_parallel(const BlockOperator& op, const Eigen::MatrixXd& Wflat,
                              Eigen::MatrixXd& H);

/// Per-variable contraction c(j) = tr(G[j] * V).
Eigen::VectorXd gram_contract(const BlockOperator& op, const Eigen::MatrixXd& V);

}  // namespace platoon
