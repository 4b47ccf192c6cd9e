#include "gaugenet/glasso.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>

#include "gaugenet/errors.hpp"

namespace gaugenet {

namespace {

double soft_threshold(double x, double t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

}  // namespace

LassoResult lasso_cd(const Eigen::MatrixXd& gram, const Eigen::VectorXd& target,
                     double lambda, const std::vector<bool>& active,
                     int sweep_cap, double kkt_tol,
                     const Eigen::VectorXd* warm) {
  const int m = static_cast<int>(gram.rows());
  if (gram.cols() != m || target.size() != m ||
      static_cast<int>(active.size()) != m)
    throw input_error("lasso_cd dimension mismatch");
  if (lambda < 0) throw input_error("negative lasso penalty");

  LassoResult out;
  out.beta = Eigen::VectorXd::Zero(m);

  std::vector<int> act;
  act.reserve(m);
  for (int i = 0; i < m; ++i)
    if (active[i]) act.push_back(i);

  if (act.empty()) return out;

  if (lambda == 0.0) {
    // Unpenalized: direct solve on the active subsystem.
    const int a = static_cast<int>(act.size());
    Eigen::MatrixXd g(a, a);
    Eigen::VectorXd t(a);
    for (int r = 0; r < a; ++r) {
      t[r] = target[act[r]];
      for (int c = 0; c < a; ++c) g(r, c) = gram(act[r], act[c]);
    }
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    if (llt.info() != Eigen::Success)
      throw compute_error("lasso gram not positive definite on active set");
    const Eigen::VectorXd sol = llt.solve(t);
    for (int r = 0; r < a; ++r) out.beta[act[r]] = sol[r];
    out.kkt = (gram * out.beta - target).cwiseAbs().maxCoeff();
    return out;
  }

  if (warm && warm->size() == m) {
    out.beta = *warm;
    for (int i = 0; i < m; ++i)
      if (!active[i]) out.beta[i] = 0.0;
  }

  Eigen::VectorXd u = gram * out.beta;  // running gradient term
  out.converged = false;
  for (int sweep = 1; sweep <= sweep_cap; ++sweep) {
    for (int i : act) {
      const double gii = gram(i, i);
      if (gii <= 0) throw compute_error("non-positive gram diagonal");
      const double r = target[i] - (u[i] - gii * out.beta[i]);
      const double next = soft_threshold(r, lambda) / gii;
      const double delta = next - out.beta[i];
      if (delta != 0.0) {
        u += gram.col(i) * delta;
        out.beta[i] = next;
      }
    }
    // KKT residual: |grad_i| <= lambda at zero, grad_i = -lambda sign(b_i)
    // at nonzero coefficients.
    double viol = 0.0;
    for (int i : act) {
      const double grad = u[i] - target[i];
      if (out.beta[i] == 0.0)
        viol = std::max(viol, std::abs(grad) - lambda);
      else
        viol = std::max(viol,
                        std::abs(grad + lambda * (out.beta[i] > 0 ? 1.0 : -1.0)));
    }
    out.sweeps = sweep;
    if (viol <= kkt_tol) {
      out.converged = true;
      out.kkt = std::max(0.0, viol);
      break;
    }
    out.kkt = viol;
  }
  return out;
}

namespace {

// Reduced views with index j deleted.
void fill_reduced(const Eigen::MatrixXd& W, const Eigen::MatrixXd& S, int j,
                  Eigen::MatrixXd& gram, Eigen::VectorXd& target) {
  const int p = static_cast<int>(W.rows());
  int r = 0;
  for (int i = 0; i < p; ++i) {
    if (i == j) continue;
    target[r] = S(i, j);
    int c = 0;
    for (int k = 0; k < p; ++k) {
      if (k == j) continue;
      gram(r, c) = W(i, k);
      ++c;
    }
    ++r;
  }
}

}  // namespace

PrecisionEstimate glasso_fit(const Eigen::MatrixXd& S, const PenaltySpec& spec,
                             const GlassoOptions& opts,
                             const PrecisionEstimate* warm) {
  const int p = static_cast<int>(S.rows());
  if (S.cols() != p) throw input_error("covariance matrix not square");
  if (p < 1) throw input_error("empty covariance matrix");
  if ((S - S.transpose()).cwiseAbs().maxCoeff() > 1e-8)
    throw input_error("covariance matrix not symmetric");
  const double lambda = spec.lambda;
  if (lambda < 0) throw input_error("negative penalty");
  if (spec.zero_pattern) {
    spec.zero_pattern->validate();
    if (spec.zero_pattern->p != p)
      throw input_error("zero pattern size does not match covariance");
  }
  auto allowed = [&](int i, int j) {
    return !spec.zero_pattern || spec.zero_pattern->has_edge(i, j);
  };

  PrecisionEstimate est;
  est.lambda = lambda;

  const double diag_shift = opts.penalize_diagonal ? lambda : 0.0;
  Eigen::MatrixXd W;
  Eigen::MatrixXd B;  // column j = full-index lasso coefficients for gauge j
  if (warm && warm->w.rows() == p && warm->beta.rows() == p) {
    W = warm->w;
    B = warm->beta;
    for (int j = 0; j < p; ++j)
      for (int i = 0; i < p; ++i)
        if (i == j || !allowed(i, j)) B(i, j) = 0.0;
  } else {
    W = S;
    B = Eigen::MatrixXd::Zero(p, p);
  }
  W.diagonal() = S.diagonal().array() + diag_shift;
  if (Eigen::LLT<Eigen::MatrixXd>(W).info() != Eigen::Success) {
    // A warm start from a different penalty can land outside the cone;
    // restart cold before giving up.
    W = S;
    W.diagonal() = S.diagonal().array() + diag_shift;
    B.setZero();
    if (Eigen::LLT<Eigen::MatrixXd>(W).info() != Eigen::Success)
      throw input_error(lambda == 0.0
                            ? "covariance not positive definite at lambda=0"
                            : "penalized covariance not positive definite");
  }

  double mean_offdiag = 0.0;
  if (p > 1) {
    mean_offdiag = (S.cwiseAbs().sum() - S.diagonal().cwiseAbs().sum()) /
                   (static_cast<double>(p) * (p - 1));
  }
  const double w_tol = opts.tol_multiplier * mean_offdiag;

  Eigen::MatrixXd gram(std::max(p - 1, 1), std::max(p - 1, 1));
  Eigen::VectorXd target(std::max(p - 1, 1));
  Eigen::VectorXd beta_warm(std::max(p - 1, 1));
  std::vector<bool> act(std::max(p - 1, 1));

  bool inner_ok = true;
  est.converged = false;
  for (int sweep = 1; sweep <= opts.sweep_cap; ++sweep) {
    const Eigen::MatrixXd w_prev = W;
    for (int j = 0; j < p && p > 1; ++j) {
      fill_reduced(W, S, j, gram, target);
      int r = 0;
      for (int i = 0; i < p; ++i) {
        if (i == j) continue;
        act[r] = allowed(i, j);
        beta_warm[r] = B(i, j);
        ++r;
      }
      const LassoResult res =
          lasso_cd(gram, target, lambda, act, opts.lasso_sweep_cap,
                   opts.lasso_kkt_tol, &beta_warm);
      inner_ok = inner_ok && res.converged;
      const Eigen::VectorXd w12 = gram * res.beta;
      r = 0;
      for (int i = 0; i < p; ++i) {
        if (i == j) continue;
        B(i, j) = res.beta[r];
        W(i, j) = w12[r];
        W(j, i) = w12[r];
        ++r;
      }
    }
    est.sweeps = sweep;
    const double change = (W - w_prev).cwiseAbs().mean();
    if (change <= w_tol) {
      est.converged = true;
      break;
    }
  }
  est.converged = est.converged && inner_ok;

  // Recover Theta column-wise: theta_jj = 1 / (w_jj - w12' beta),
  // theta_12 = -beta * theta_jj.
  est.theta = Eigen::MatrixXd::Zero(p, p);
  for (int j = 0; j < p; ++j) {
    double dot = 0.0;
    for (int i = 0; i < p; ++i)
      if (i != j) dot += W(i, j) * B(i, j);
    const double denom = W(j, j) - dot;
    if (denom <= 0)
      throw compute_error("non-positive partial variance during recovery");
    const double tjj = 1.0 / denom;
    est.theta(j, j) = tjj;
    for (int i = 0; i < p; ++i)
      if (i != j) est.theta(i, j) = -B(i, j) * tjj;
  }
  est.theta = ((est.theta + est.theta.transpose()) / 2.0).eval();

  double kkt = 0.0;
  for (int i = 0; i < p; ++i)
    for (int j = i + 1; j < p; ++j) {
      if (!allowed(i, j)) continue;
      const double gap = std::abs(W(i, j) - S(i, j));
      if (est.theta(i, j) != 0.0)
        kkt = std::max(kkt, std::abs(gap - lambda));
      else
        kkt = std::max(kkt, gap - lambda);
    }
  est.max_kkt_violation = std::max(0.0, kkt);
  est.w = std::move(W);
  est.beta = std::move(B);

  if (Eigen::LLT<Eigen::MatrixXd>(est.theta).info() != Eigen::Success)
    throw compute_error("recovered precision matrix not positive definite");
  return est;
}

Eigen::MatrixXd precision_to_coefficients(const Eigen::MatrixXd& theta) {
  const int p = static_cast<int>(theta.rows());
  if (theta.cols() != p) throw input_error("precision matrix not square");
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p, p);
  for (int j = 0; j < p; ++j) {
    const double tjj = theta(j, j);
    if (tjj <= 0)
      throw compute_error("non-positive precision diagonal at " +
                          std::to_string(j));
    for (int i = 0; i < p; ++i)
      if (i != j) a(i, j) = -theta(i, j) / tjj;
  }
  return a;
}

Eigen::MatrixXd precision_to_coefficients(const PrecisionEstimate& est) {
  return precision_to_coefficients(est.theta);
}

Eigen::VectorXd covariance_to_coefficients(const Eigen::MatrixXd& S, int j) {
  const int p = static_cast<int>(S.rows());
  if (S.cols() != p) throw input_error("covariance matrix not square");
  if (j < 0 || j >= p) throw input_error("target index out of range");
  Eigen::MatrixXd s11(p - 1, p - 1);
  Eigen::VectorXd s12(p - 1);
  int r = 0;
  for (int i = 0; i < p; ++i) {
    if (i == j) continue;
    s12[r] = S(i, j);
    int c = 0;
    for (int k = 0; k < p; ++k) {
      if (k == j) continue;
      s11(r, c) = S(i, k);
      ++c;
    }
    ++r;
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(s11);
  if (!lu.isInvertible()) throw compute_error("singular S11 block");
  return lu.solve(s12);
}

}  // namespace gaugenet
