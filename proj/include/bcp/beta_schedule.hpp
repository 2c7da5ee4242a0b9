#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace bcp {

// Uncertainty multiplier beta_k for the pessimism bonus.
class BetaSchedule {
 public:
  enum class Mode { kFixed, kTheoryVi, kTheoryVtr };

  static BetaSchedule fixed(double beta) {
    if (!(beta >= 0.0)) throw std::invalid_argument("BetaSchedule::fixed: beta must be >= 0");
    BetaSchedule s;
    s.mode_ = Mode::kFixed;
    s.beta_ = beta;
    return s;
  }

  // c1 * d * H * log(d * H * k / delta), floored at 0.
  static BetaSchedule theory_vi(double c1, double delta, int dim, int horizon) {
    check_delta(delta);
    if (!(c1 >= 0.0)) throw std::invalid_argument("BetaSchedule::theory_vi: c1 must be >= 0");
    BetaSchedule s;
    s.mode_ = Mode::kTheoryVi;
    s.c1_ = c1;
    s.delta_ = delta;
    s.dim_ = dim;
    s.horizon_ = horizon;
    return s;
  }

  // H * sqrt(d * log((H + k H^3 / lambda) / delta)) + sqrt(lambda) * C_w.
  static BetaSchedule theory_vtr(double delta, int dim, int horizon, double lambda, double c_w) {
    check_delta(delta);
    if (!(lambda > 0.0)) throw std::invalid_argument("BetaSchedule::theory_vtr: lambda must be positive");
    BetaSchedule s;
    s.mode_ = Mode::kTheoryVtr;
    s.delta_ = delta;
    s.dim_ = dim;
    s.horizon_ = horizon;
    s.lambda_ = lambda;
    s.c_w_ = c_w;
    return s;
  }

  Mode mode() const { return mode_; }

  double at(int k) const {
    if (k < 1) throw std::invalid_argument("BetaSchedule::at: k must be >= 1");
    switch (mode_) {
      case Mode::kFixed:
        return beta_;
      case Mode::kTheoryVi: {
        const double dh = static_cast<double>(dim_) * horizon_;
        return std::max(0.0, c1_ * dh * std::log(dh * k / delta_));
      }
      case Mode::kTheoryVtr: {
        const double h = horizon_;
        const double inner = (h + k * h * h * h / lambda_) / delta_;
        return h * std::sqrt(dim_ * std::max(0.0, std::log(inner))) + std::sqrt(lambda_) * c_w_;
      }
    }
    return beta_;
  }

  std::string describe() const {
    switch (mode_) {
      case Mode::kFixed:
        return "fixed";
      case Mode::kTheoryVi:
        return "theory_vi";
      case Mode::kTheoryVtr:
        return "theory_vtr";
    }
    return "fixed";
  }

 private:
  static void check_delta(double delta) {
    if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("BetaSchedule: delta must be in (0,1]");
  }

  Mode mode_ = Mode::kFixed;
  double beta_ = 1.0;
  double c1_ = 1.0;
  double delta_ = 1.0;
  int dim_ = 1;
  int horizon_ = 1;
  double lambda_ = 1.0;
  double c_w_ = 0.0;
};

}  // namespace bcp
