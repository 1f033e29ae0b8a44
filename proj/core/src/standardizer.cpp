#include "tmap/standardizer.hpp"

#include <cmath>
#include <string>

#include "tmap/error.hpp"

namespace tmap {

Standardizer::Standardizer(std::vector<double> mean, std::vector<double> stddev)
    : mean_(std::move(mean)), stddev_(std::move(stddev)) {
  if (mean_.size() != stddev_.size()) {
    throw ParameterError("standardizer mean and stddev lengths differ");
  }
  for (std::size_t k = 0; k < mean_.size(); ++k) {
    if (!std::isfinite(mean_[k]) || !(stddev_[k] > 0.0) || !std::isfinite(stddev_[k])) {
      throw ParameterError("standardizer needs finite means and positive deviations");
    }
  }
}

Standardizer Standardizer::identity(int dim) {
  return Standardizer(std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0));
}

Standardizer Standardizer::fit(const SampleMatrix& samples) {
  const auto n = samples.rows();
  if (n < 2) throw DegenerateDataError("at least two samples are needed to standardize");
  std::vector<double> mean(samples.cols()), sd(samples.cols());
  for (Eigen::Index k = 0; k < samples.cols(); ++k) {
    const auto col = samples.col(k);
    if (!col.allFinite()) {
      throw DegenerateDataError("column " + std::to_string(k + 1) + " has non-finite values");
    }
    const double m = col.mean();
    const double ss = (col.array() - m).square().sum();
    const double s = std::sqrt(ss / static_cast<double>(n - 1));
    if (!(s > 0.0) || s <= 1e-14 * std::max(1.0, std::abs(m))) {
      throw DegenerateDataError("column " + std::to_string(k + 1) +
                                " is constant and cannot be standardized");
    }
    mean[k] = m;
    sd[k] = s;
  }
  return Standardizer(std::move(mean), std::move(sd));
}

std::vector<double> Standardizer::standardize(std::span<const double> x) const {
  std::vector<double> u(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) u[k] = (x[k] - mean_[k]) / stddev_[k];
  return u;
}

std::vector<double> Standardizer::destandardize(std::span<const double> u) const {
  std::vector<double> x(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) x[k] = u[k] * stddev_[k] + mean_[k];
  return x;
}

SampleMatrix Standardizer::standardize(const SampleMatrix& samples) const {
  if (samples.cols() != dim()) throw ContractViolation("sample width does not match standardizer");
  SampleMatrix out(samples.rows(), samples.cols());
  for (Eigen::Index k = 0; k < samples.cols(); ++k) {
    out.col(k) = (samples.col(k).array() - mean_[k]) / stddev_[k];
  }
  return out;
}

double Standardizer::log_scale_sum() const {
  double s = 0.0;
  for (double v : stddev_) s += std::log(v);
  return s;
}

}  // namespace tmap
