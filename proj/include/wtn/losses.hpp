#pragma once

#include "wtn/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace wtn {

enum class LossKind { Squared, Absolute, ClippedAbsolute };

std::string to_string(LossKind kind);
LossKind loss_kind_from_string(const std::string& name);

/// Entrywise loss l(x, y) with its Lipschitz constant and (for the clipped
/// absolute loss) its bound.
struct LossSpec {
  LossKind kind = LossKind::Squared;
  double lipschitz = 1.0;
  double bound = std::numeric_limits<double>::infinity();

  static LossSpec squared(double lipschitz = 1.0) { return {LossKind::Squared, lipschitz, std::numeric_limits<double>::infinity()}; }
  static LossSpec absolute() { return {LossKind::Absolute, 1.0, std::numeric_limits<double>::infinity()}; }
  /// min{1, |x - y|}
  static LossSpec clipped_absolute() { return {LossKind::ClippedAbsolute, 1.0, 1.0}; }

  bool bounded() const { return std::isfinite(bound); }
  void validate() const;

  double value(double x, double y) const {
    const double d = x - y;
    switch (kind) {
      case LossKind::Squared: return d * d;
      case LossKind::Absolute: return std::abs(d);
      case LossKind::ClippedAbsolute: return std::min(1.0, std::abs(d));
    }
    return 0.0;
  }

  /// An element of the subdifferential in x; kinks take the 0 element.
  double subgradient(double x, double y) const {
    const double d = x - y;
    switch (kind) {
      case LossKind::Squared: return 2.0 * d;
      case LossKind::Absolute: return d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
      case LossKind::ClippedAbsolute:
        if (std::abs(d) >= 1.0 || d == 0.0) return 0.0;
        return d > 0.0 ? 1.0 : -1.0;
    }
    return 0.0;
  }
};

/// (1/s) sum_t l(X[i_t, j_t], y_t), duplicates counted.
double empirical_loss(const Matrix& x, const SampleSet& sample, const LossSpec& loss);

/// sum_ij p(i,j) l(X_ij, Y_ij) by full enumeration.
double expected_loss(const Matrix& x, const Matrix& truth, const JointDistribution& dist, const LossSpec& loss);

}  // namespace wtn
