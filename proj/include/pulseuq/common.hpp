#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace pulseuq {

inline constexpr const char* kProjectVersion = "0.1.0";

/// Malformed input file (syntax or missing keys).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Structurally valid input that violates a model invariant.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Runtime failure of the numerical solver (blow-up, Newton divergence, ...).
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid run configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Piecewise-linear profile v(x) given by sample pairs with ascending x.
/// Evaluation clamps to the end values outside the sampled range, so a
/// single sample behaves as a constant.
class LinearProfile {
 public:
  LinearProfile() = default;

  LinearProfile(std::vector<double> x, std::vector<double> v)
      : x_(std::move(x)), v_(std::move(v)) {
    if (x_.empty() || x_.size() != v_.size())
      throw ValidationError("profile needs matching, non-empty sample arrays");
    for (std::size_t i = 1; i < x_.size(); ++i)
      if (!(x_[i] > x_[i - 1]))
        throw ValidationError("profile sample positions must be strictly increasing");
  }

  static LinearProfile constant(double value) { return LinearProfile({0.0}, {value}); }

  bool is_constant() const { return x_.size() == 1; }

  double operator()(double xq) const {
    if (x_.size() == 1 || xq <= x_.front()) return v_.front();
    if (xq >= x_.back()) return v_.back();
    const auto it = std::upper_bound(x_.begin(), x_.end(), xq);
    const std::size_t i = static_cast<std::size_t>(it - x_.begin());
    const double s = (xq - x_[i - 1]) / (x_[i] - x_[i - 1]);
    return v_[i - 1] + s * (v_[i] - v_[i - 1]);
  }

  /// Derivative of the interpolant (piecewise constant, one-sided at samples).
  double derivative(double xq) const {
    if (x_.size() == 1 || xq < x_.front() || xq > x_.back()) return 0.0;
    auto it = std::upper_bound(x_.begin(), x_.end(), xq);
    std::size_t i = static_cast<std::size_t>(it - x_.begin());
    if (i == x_.size()) i = x_.size() - 1;
    if (i == 0) i = 1;
    return (v_[i] - v_[i - 1]) / (x_[i] - x_[i - 1]);
  }

  double min_value() const { return *std::min_element(v_.begin(), v_.end()); }
  double max_value() const { return *std::max_element(v_.begin(), v_.end()); }

  const std::vector<double>& sample_x() const { return x_; }
  const std::vector<double>& sample_v() const { return v_; }

  /// Apply f to every sample value (profile shape preserved).
  template <class F>
  LinearProfile map(F&& f) const {
    std::vector<double> v(v_.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(x_[i], v_[i]);
    return LinearProfile(x_, std::move(v));
  }

 private:
  std::vector<double> x_{0.0};
  std::vector<double> v_{0.0};
};

}  // namespace pulseuq
