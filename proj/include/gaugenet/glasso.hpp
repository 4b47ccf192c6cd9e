#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "gaugenet/graph.hpp"

namespace gaugenet {

// L1 penalty for a precision fit. When zero_pattern is set, pairs absent
// from it are constrained to exactly zero in the estimate.
struct PenaltySpec {
  double lambda = 0.0;
  std::optional<GaugeGraph> zero_pattern;
};

struct GlassoOptions {
  // Penalize the diagonal too (w_ii = s_ii + lambda). The off-diagonal
  // only convention common in other implementations sits behind this flag.
  bool penalize_diagonal = true;
  // Converged when the mean absolute change of W over a full sweep drops
  // to tol_multiplier times the mean |off-diagonal of S|.
  double tol_multiplier = 1e-4;
  int sweep_cap = 1000;
  double lasso_kkt_tol = 1e-7;
  int lasso_sweep_cap = 10000;
};

// Penalized precision estimate: theta maximizes
//   log det(Theta) - tr(S Theta) - lambda * ||Theta||_1
// subject to the zero pattern; w is the fitted covariance inverse(theta).
struct PrecisionEstimate {
  Eigen::MatrixXd theta;
  Eigen::MatrixXd w;
  Eigen::MatrixXd beta;  // per-column lasso coefficients, warm-start state
  double lambda = 0.0;
  int sweeps = 0;
  bool converged = false;
  double max_kkt_violation = 0.0;
};

struct LassoResult {
  Eigen::VectorXd beta;
  int sweeps = 0;
  bool converged = true;
  double kkt = 0.0;
};

// Coordinate-descent solve of
//   min_beta 0.5 beta' G beta - beta' t + lambda ||beta||_1
// with coordinates where active[i] is false pinned to zero. At lambda = 0
// the active subsystem is solved directly. Converged means the lasso KKT
// residual fell below kkt_tol.
LassoResult lasso_cd(const Eigen::MatrixXd& gram, const Eigen::VectorXd& target,
                     double lambda, const std::vector<bool>& active,
                     int sweep_cap = 10000, double kkt_tol = 1e-7,
                     const Eigen::VectorXd* warm = nullptr);

// Block coordinate-descent graphical lasso. `warm` seeds W and the
// per-column coefficients (used when chaining fits over a grid).
PrecisionEstimate glasso_fit(const Eigen::MatrixXd& S, const PenaltySpec& spec,
                             const GlassoOptions& opts = {},
                             const PrecisionEstimate* warm = nullptr);

// a_ij = -theta_ij / theta_jj for i != j, zero diagonal. Column j holds
// the regression of gauge j on the others.
Eigen::MatrixXd precision_to_coefficients(const Eigen::MatrixXd& theta);
Eigen::MatrixXd precision_to_coefficients(const PrecisionEstimate& est);

// Covariance-route coefficients for target j: S11^-1 s12 (independent of
// the precision route; the two agree at lambda = 0).
Eigen::VectorXd covariance_to_coefficients(const Eigen::MatrixXd& S, int j);

}  // namespace gaugenet
