#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "tmap/optimize.hpp"
#include "tmap/standardizer.hpp"

namespace tmap {

enum class TargetKind { Gaussian, Banana, Mixture, Wavy, WavyRotated };

/// Built-in test distribution. Construct through the named factories.
struct TargetSpec {
  TargetKind kind = TargetKind::Gaussian;
  std::string name = "std_gauss";

  // Gaussian
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  // Banana: x2 | x1 ~ N(b (x1^2 - 1), a^2)
  double a = 0.5;
  double b = 1.0;
  // Isotropic Gaussian mixture
  std::vector<double> weights;
  std::vector<Eigen::VectorXd> centers;
  double sigma = 0.5;
  // Wavy: x2 | x1 ~ N(amplitude sin(frequency x1), noise^2)
  double amplitude = 1.0;
  double frequency = 2.0;
  double noise = 0.3;

  static TargetSpec gaussian(Eigen::VectorXd mean, Eigen::MatrixXd covariance);
  static TargetSpec std_gauss(int dim);
  /// Bivariate standard normal with correlation rho.
  static TargetSpec corr_gauss(double rho);
  /// Stationary AR(1) chain x_k = phi x_{k-1} + sqrt(1 - phi^2) e_k.
  static TargetSpec ar1(int dim, double phi);
  static TargetSpec banana(double a = 0.5, double b = 1.0);
  static TargetSpec mixture(std::vector<double> weights, std::vector<Eigen::VectorXd> centers,
                            double sigma);
  /// Equal weights at (-2,-2), (2,-2), (-2,2) with sigma 0.5.
  static TargetSpec mixture_corners();
  static TargetSpec wavy(double amplitude = 1.0, double frequency = 2.0, double noise = 0.3);
  static TargetSpec wavy_rotated(double amplitude = 1.0, double frequency = 2.0, double noise = 0.3);

  int dim() const;
  /// Throws ParameterError for an invalid parameter record.
  void validate() const;
};

/// Named target with numeric parameters, e.g. ("corr_gauss", {{"rho", 0.8}}).
/// Recognized names: std_gauss(dim), corr_gauss(rho), ar1(dim, phi),
/// banana(a, b), mixture_corners(sigma), wavy(amplitude, frequency, noise),
/// wavy_rotated(amplitude, frequency, noise).
TargetSpec target_from_name(const std::string& name, const std::map<std::string, double>& params = {});

/// n i.i.d. seeded draws, one per row.
SampleMatrix sample(const TargetSpec& spec, Eigen::Index n, std::uint64_t seed);

/// Normalized log-density.
double log_density(const TargetSpec& spec, std::span<const double> x);

/// Gradient of log_density with respect to x.
void log_density_gradient(const TargetSpec& spec, std::span<const double> x, std::span<double> grad);

/// Log-density with analytic gradient, ready for fit_map_from_density.
LogDensity make_log_density(const TargetSpec& spec);

/// One-dimensional Gaussian mixture describing a conditional law.
struct ConditionalLaw {
  std::vector<double> weights;
  std::vector<double> means;
  std::vector<double> variances;

  double mean() const;
  double variance() const;
  double cdf(double x) const;
  double logpdf(double x) const;
};

/// Law of x_{k+1} given x_{1:k} = x_head (k = x_head.size(), 1 <= k < dim).
/// Available for Gaussian, banana, mixture and wavy targets; wavy_rotated
/// throws CapabilityError.
ConditionalLaw analytic_conditional(const TargetSpec& spec, std::span<const double> x_head);

}  // namespace tmap
