#pragma once

// Regularized least squares with Sigma = lambda I + sum phi phi^T and a
// maintained inverse.

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "bcp/errors.hpp"
#include "bcp/json_io.hpp"

namespace bcp {

inline constexpr int kRefactorPeriod = 256;
inline constexpr double kInverseProbeTolerance = 1e-8;
inline constexpr double kSolveResidualTolerance = 1e-7;
inline constexpr double kQuadFormClamp = 1e-12;

// Right-hand side sum_i phi_i y_i of the normal equations.
struct TargetSum {
  Eigen::VectorXd b;

  explicit TargetSum(int dim) : b(Eigen::VectorXd::Zero(dim)) {}

  void add(const Eigen::Ref<const Eigen::VectorXd>& phi, double target) { b.noalias() += target * phi; }
};

class RidgeState {
 public:
  RidgeState(int dim, double lambda) : dim_(dim), lambda_(lambda) {
    if (dim < 1) throw std::invalid_argument("RidgeState: dimension must be >= 1");
    if (!(lambda > 0.0)) throw std::invalid_argument("RidgeState: lambda must be positive");
    sigma_ = lambda * Eigen::MatrixXd::Identity(dim, dim);
    sigma_inv_ = Eigen::MatrixXd::Identity(dim, dim) / lambda;
  }

  int dim() const { return dim_; }
  double lambda() const { return lambda_; }
  long num_updates() const { return updates_; }
  const Eigen::MatrixXd& sigma() const { return sigma_; }
  const Eigen::MatrixXd& sigma_inv() const { return sigma_inv_; }

  // Sigma += phi phi^T. The inverse follows by Sherman-Morrison; it is rebuilt
  // from a Cholesky factor every kRefactorPeriod updates, or as soon as the
  // probe ||Sigma (Sigma^-1 phi) - phi|| drifts past kInverseProbeTolerance.
  void update(const Eigen::Ref<const Eigen::VectorXd>& phi) { add_weighted(phi, 1.0); }

  // Sigma += weight * phi phi^T with weight >= 0 (a repeated observation).
  void add_weighted(const Eigen::Ref<const Eigen::VectorXd>& phi, double weight) {
    if (phi.size() != dim_) throw std::invalid_argument("RidgeState::update: dimension mismatch");
    if (!phi.allFinite() || !(weight >= 0.0) || !std::isfinite(weight))
      throw NumericError("RidgeState::update: non-finite feature or invalid weight");
    ++updates_;
    if (weight == 0.0) return;
    sigma_.noalias() += weight * phi * phi.transpose();
    const Eigen::VectorXd v = sigma_inv_ * phi;
    const double denom = 1.0 + weight * phi.dot(v);
    sigma_inv_.noalias() -= (weight / denom) * v * v.transpose();
    if (++since_refactor_ >= kRefactorPeriod) {
      refactorize();
      return;
    }
    const Eigen::VectorXd probe = sigma_ * (sigma_inv_ * phi) - phi;
    if (probe.lpNorm<Eigen::Infinity>() > kInverseProbeTolerance * std::max(1.0, phi.lpNorm<Eigen::Infinity>()))
      refactorize();
  }

  // Replaces the running inverse with a fresh symmetric one from Cholesky.
  void refactorize() {
    Eigen::LLT<Eigen::MatrixXd> llt(sigma_);
    if (llt.info() != Eigen::Success) throw NumericError("RidgeState: Sigma is not positive definite");
    sigma_inv_ = llt.solve(Eigen::MatrixXd::Identity(dim_, dim_));
    sigma_inv_ = 0.5 * (sigma_inv_ + sigma_inv_.transpose()).eval();
    since_refactor_ = 0;
  }

  // max |Sigma Sigma^-1 - I|.
  double inverse_residual() const {
    return (sigma_ * sigma_inv_ - Eigen::MatrixXd::Identity(dim_, dim_)).lpNorm<Eigen::Infinity>();
  }

  // w = Sigma^-1 b. If the residual exceeds 1e-7 (1 + ||b||) the system is
  // re-solved from a fresh factorization; a second failure is a NumericError.
  Eigen::VectorXd solve(const TargetSum& target) const { return solve(target.b); }

  Eigen::VectorXd solve(const Eigen::Ref<const Eigen::VectorXd>& b) const {
    if (b.size() != dim_) throw std::invalid_argument("RidgeState::solve: dimension mismatch");
    const double bound = kSolveResidualTolerance * (1.0 + b.norm());
    Eigen::VectorXd w = sigma_inv_ * b;
    if ((sigma_ * w - b).norm() <= bound) return w;
    Eigen::LLT<Eigen::MatrixXd> llt(sigma_);
    w = llt.solve(b);
    const double residual = (sigma_ * w - b).norm();
    if (llt.info() != Eigen::Success || !(residual <= bound))
      throw NumericError("RidgeState::solve: residual " + format_g17(residual) + " after refactorization");
    return w;
  }

  // sqrt(phi^T Sigma^-1 phi); negative round-off down to -1e-12 reads as 0.
  double elliptical_norm(const Eigen::Ref<const Eigen::VectorXd>& phi) const {
    return std::sqrt(quadratic_form(phi));
  }

  double quadratic_form(const Eigen::Ref<const Eigen::VectorXd>& phi) const {
    const double q = phi.dot(sigma_inv_ * phi);
    if (q < 0.0) {
      if (q < -kQuadFormClamp) throw NumericError("RidgeState: negative quadratic form " + format_g17(q));
      return 0.0;
    }
    return q;
  }

 private:
  int dim_;
  double lambda_;
  Eigen::MatrixXd sigma_;
  Eigen::MatrixXd sigma_inv_;
  long updates_ = 0;
  int since_refactor_ = 0;
};

}  // namespace bcp
