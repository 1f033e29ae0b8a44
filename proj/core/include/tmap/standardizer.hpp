#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

namespace tmap {

/// Row-major sample matrix: one sample per row.
using SampleMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline std::span<const double> row_span(const SampleMatrix& m, Eigen::Index i) {
  return {m.data() + i * m.cols(), static_cast<std::size_t>(m.cols())};
}

/// Per-dimension affine rescaling to zero mean and unit (unbiased) variance.
class Standardizer {
 public:
  Standardizer() = default;
  Standardizer(std::vector<double> mean, std::vector<double> stddev);

  static Standardizer identity(int dim);
  /// Fits means and unbiased standard deviations. Throws DegenerateDataError
  /// for fewer than two rows or a constant column.
  static Standardizer fit(const SampleMatrix& samples);

  int dim() const { return static_cast<int>(mean_.size()); }
  const std::vector<double>& mean() const { return mean_; }
  const std::vector<double>& stddev() const { return stddev_; }

  std::vector<double> standardize(std::span<const double> x) const;
  std::vector<double> destandardize(std::span<const double> u) const;
  double standardize(double x, int dim) const { return (x - mean_[dim]) / stddev_[dim]; }
  double destandardize(double u, int dim) const { return u * stddev_[dim] + mean_[dim]; }
  SampleMatrix standardize(const SampleMatrix& samples) const;

  /// Sum of log standard deviations (log-Jacobian of destandardization).
  double log_scale_sum() const;

 private:
  std::vector<double> mean_;
  std::vector<double> stddev_;
};

}  // namespace tmap
