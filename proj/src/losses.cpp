#include "wtn/losses.hpp"

namespace wtn {

std::string to_string(LossKind kind) {
  switch (kind) {
    case LossKind::Squared: return "squared";
    case LossKind::Absolute: return "absolute";
    case LossKind::ClippedAbsolute: return "clipped_absolute";
  }
  return "unknown";
}

LossKind loss_kind_from_string(const std::string& name) {
  if (name == "squared") return LossKind::Squared;
  if (name == "absolute") return LossKind::Absolute;
  if (name == "clipped_absolute") return LossKind::ClippedAbsolute;
  throw InvalidArgument("unknown loss: " + name);
}

void LossSpec::validate() const {
  require(lipschitz > 0.0, "loss Lipschitz constant must be positive");
  if (kind == LossKind::ClippedAbsolute) require(bound == 1.0, "clipped absolute loss has bound 1");
}

double empirical_loss(const Matrix& x, const SampleSet& sample, const LossSpec& loss) {
  require(!sample.empty(), "empirical loss needs a nonempty sample");
  require(x.rows() == sample.n && x.cols() == sample.m, "matrix shape does not match the sample grid");
  double total = 0.0;
  for (std::size_t t = 0; t < sample.size(); ++t) {
    const Cell c = sample.indexes[t];
    total += loss.value(x(c.i, c.j), sample.values[t]);
  }
  return total / static_cast<double>(sample.size());
}

double expected_loss(const Matrix& x, const Matrix& truth, const JointDistribution& dist, const LossSpec& loss) {
  require(x.rows() == truth.rows() && x.cols() == truth.cols(), "prediction and truth shapes differ");
  require(x.rows() == dist.rows() && x.cols() == dist.cols(), "matrix shape does not match the distribution");
  double total = 0.0;
  for (Index i = 0; i < x.rows(); ++i)
    for (Index j = 0; j < x.cols(); ++j) {
      const double p = dist(i, j);
      if (p > 0.0) total += p * loss.value(x(i, j), truth(i, j));
    }
  return total;
}

}  // namespace wtn
