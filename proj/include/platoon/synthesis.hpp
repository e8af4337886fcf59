#pragma once

#include <optional>
#include <string>

#include "platoon/conic.hpp"
#include "platoon/ipm.hpp"
#include "platoon/simulate.hpp"

namespace platoon {

enum class G2Norm { Spectral, Frobenius };

/// Data, disturbance model and scalar knobs of one gain-synthesis instance.
struct SynthesisProblem {
  Eigen::MatrixXd U0;     ///< n_u x T
  Eigen::MatrixXd Z0;     ///< n_z x T
  Eigen::MatrixXd X1;     ///< n_x x T
  Eigen::MatrixXd D;      ///< n_x x n_w discrete disturbance matrix
  Eigen::MatrixXd Delta;  ///< n_w x n_w disturbance-energy bound (delta*sqrt(T)*I)
  double delta = 0.0;
  double eps1 = 1.0;
  double eps2 = 1.0;
  double lambda1 = 1.0;
  double lambda2 = 0.1;
  G2Norm norm = G2Norm::Spectral;
  double margin = 1e-6;  ///< strict-inequality relaxation
  int n_x = 0, n_u = 0, n_w = 0, n_z = 0, T = 0;

  static SynthesisProblem from_batch(const DataBatch& batch, const LiftedSystem& sys,
                                     double delta);
  void validate() const;
};

/// Flat variable indexing shared by the program assembler and the
/// certificate evaluator: [P upper triangle, Y, G2, gamma, eta?].
struct VariableMap {
  int n_x = 0, n_z = 0, cols = 0;  // cols = data-column count of Y/G2
  bool with_eta = false;

  int p_count() const { return n_x * (n_x + 1) / 2; }
  int p_index(int i, int j) const;
  int y_index(int t, int c) const { return p_count() + c * cols + t; }
  int g2_index(int t, int c) const { return p_count() + n_x * cols + c * cols + t; }
  int gamma_index() const { return p_count() + n_z * cols; }
  int eta_index() const { return gamma_index() + 1; }
  int count() const { return gamma_index() + 1 + (with_eta ? 1 : 0); }

  Eigen::VectorXd pack(const Eigen::MatrixXd& P, const Eigen::MatrixXd& Y,
                       const Eigen::MatrixXd& G2, double gamma, double eta) const;
};

VariableMap variable_map(const SynthesisProblem& problem);

/// Emits the synthesis program: decision variables (P, Y, G2, gamma and the
/// norm epigraph when the objective weighs G2), the three data interpolation
/// equality systems, the margin-relaxed positivity constraints, and the
/// robust-performance matrix inequality with the printed block layout.
ConicProgram assemble_lmi(const SynthesisProblem& problem);

/// Dense robust-performance matrix at a candidate point (same block layout
/// the program emits, without the margin shift). Independent of the
/// ConicProgram plumbing so the two can cross-check each other.
Eigen::MatrixXd robust_lmi_matrix(const SynthesisProblem& problem, const Eigen::MatrixXd& P,
                                  const Eigen::MatrixXd& Y, const Eigen::MatrixXd& G2,
                                  double gamma);

struct CompressedProblem {
  SynthesisProblem problem;  ///< column count reduced to rho
  Eigen::MatrixXd Q;         ///< T x rho, orthonormal columns
};

/// Exact column-space reduction. The program touches the data only through
/// Z0*Y, X1*Y, U0*Y, Y'Y (and likewise for G2), so restricting Y and G2 to
/// the row space of [Z0; X1; U0] loses nothing: any feasible point projects
/// onto it without breaking a constraint or worsening the objective.
/// Solutions lift back as Y = Q * Yc, G2 = Q * G2c.
CompressedProblem compress(const SynthesisProblem& problem);

struct SynthesisResult {
  SolveStatus status = SolveStatus::NumericalFailure;
  std::string message;
  Eigen::MatrixXd K;   ///< n_u x n_z
  Eigen::MatrixXd P;   ///< n_x x n_x
  Eigen::MatrixXd Y;   ///< T x n_x
  Eigen::MatrixXd G2;  ///< T x (n_z - n_x)
  double gamma = 0.0;
  double eta = 0.0;
  double eps1 = 0.0, eps2 = 0.0, lambda1 = 0.0, lambda2 = 0.0, delta = 0.0;
  // certificate residuals, evaluated on the uncompressed program
  double r_interp = 0.0;      ///< |Z0 [G1 G2] - I|_max
  double r_gain = 0.0;        ///< |[K; I] - [U0; Z0][G1 G2]|_max
  double r_y = 0.0;           ///< |Z0 Y - [P; 0]|_max
  double r_g2 = 0.0;          ///< |Z0 G2 - [0; I]|_max
  double r_null = 0.0;        ///< |X1 G2|_max
  double lmi_min_eig = 0.0;   ///< smallest eigenvalue of the robust LMI
  double p_min_eig = 0.0;
  double cond_P = 0.0;
  bool cond_warning = false;
  int iterations = 0;
  double solve_seconds = 0.0;
  std::string data_hash;

  bool feasible() const {
    return status == SolveStatus::Optimal || status == SolveStatus::AlmostOptimal;
  }
};

struct SynthesisOptions {
  bool compress = true;
  bool grid_search = false;  ///< search eps1, eps2 over {0.1, 1, 10}^2
  IpmOptions ipm;
};

/// Richness pre-check, optional exact compression, conic solve, lift,
/// equality polish, gain extraction and certificate evaluation.
SynthesisResult solve_sdp(const SynthesisProblem& problem,
                          const SynthesisOptions& opts = {});

/// K = U0 [Y P^{-1}, G2]. Sets cond_out (if given) to the condition number
/// of P; values above 1e12 flag the result as ill-conditioned.
Eigen::MatrixXd extract_gain(const Eigen::MatrixXd& U0, const Eigen::MatrixXd& Y,
                             const Eigen::MatrixXd& G2, const Eigen::MatrixXd& P,
                             double* cond_out = nullptr);

struct ClosedLoopDiagnostics {
  Eigen::MatrixXd Abar;  ///< n_x x n_x data-based closed-loop state matrix
  Eigen::MatrixXd Ebar;  ///< n_x x (n_z - n_x) closed-loop monomial matrix
  double spectral_radius = 0.0;
  double interp_residual = 0.0;   ///< |Z0 [G1 G2] - I|_max
  double nullspace_residual = 0.0;  ///< |X1 G2|_max
};

/// White-box closed-loop reconstruction from the recorded disturbance
/// sequence; requires a design-consistent batch.
ClosedLoopDiagnostics verify_closed_loop(const SynthesisResult& result,
                                         const DataBatch& batch,
                                         const Eigen::MatrixXd& D);

struct SubPlatoon {
  PlatoonSpec spec;
  int begin = 0;  ///< first global vehicle index
  int end = 0;    ///< one past the last global vehicle index
};

/// Consecutive partition into groups of at most max_size vehicles whose heads
/// are all automated; a boundary landing on a human-driven vehicle is shifted
/// forward past it. Throws if no legal boundary exists.
std::vector<SubPlatoon> split_subplatoons(const PlatoonSpec& spec, int max_size);

/// Restriction of a recorded batch to one sub-platoon's rows (states,
/// monomials, inputs and disturbance channels).
DataBatch slice_batch(const DataBatch& batch, const PlatoonSpec& global_spec,
                      const SubPlatoon& sub);

struct Lemma2Report {
  bool precondition_ok = false;  ///< W W' <= Delta Delta' within tolerance
  bool holds = false;
  double margin = 0.0;  ///< smallest eigenvalue of (rhs - lhs)
};

/// Test oracle for the disturbance-energy bound: checks
/// M W' N + N' W M <= eps^{-1} M M' + eps N' Delta Delta' N eigenvalue-wise.
Lemma2Report lemma2_bound_check(const Eigen::MatrixXd& M, const Eigen::MatrixXd& N,
                                const Eigen::MatrixXd& W, const Eigen::MatrixXd& Delta,
                                double eps);

}  // namespace platoon
