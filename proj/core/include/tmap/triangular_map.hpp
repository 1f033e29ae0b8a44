#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tmap/map_component.hpp"
#include "tmap/standardizer.hpp"

namespace tmap {

/// Which way a map points. Maps learned from samples send the target to the
/// standard Gaussian reference; maps learned from a density send the
/// reference to the target.
enum class MapDirection { TargetToReference, ReferenceToTarget };

/// Lower-triangular (Knothe-Rosenblatt) map with a standard Gaussian
/// reference. The standardizer wraps the input side of the component stack:
/// forward(u) = S(standardize(u)), inverse(v) = destandardize(S^{-1}(v)).
///
/// Immutable once built; all methods are const and safe to call concurrently.
class TriangularMap {
 public:
  TriangularMap(std::vector<MapComponent> components, Standardizer standardizer,
                MapDirection direction = MapDirection::TargetToReference);

  /// Component-wise identity map S_k(x) = x_k.
  static TriangularMap identity(int dim, ComponentKind kind = ComponentKind::Separable);

  int dim() const { return static_cast<int>(components_.size()); }
  const std::vector<MapComponent>& components() const { return components_; }
  const MapComponent& component(int k) const { return components_.at(k); }
  const Standardizer& standardizer() const { return standardizer_; }
  MapDirection direction() const { return direction_; }
  std::size_t num_coefficients() const;

  std::vector<double> forward(std::span<const double> x) const;
  SampleMatrix forward(const SampleMatrix& x) const;

  /// Sum of log diagonal derivatives of the component stack at the
  /// standardized point; the standardizer's own Jacobian is not included.
  double log_det_jacobian(std::span<const double> x) const;

  /// log eta(forward(x)) + log_det_jacobian(x) - sum log sigma: the density
  /// of the input space induced by the reference on the output space.
  double pullback_logpdf(std::span<const double> x) const;

  /// Density of the output space when the input is reference distributed.
  double pushforward_logpdf(std::span<const double> v) const;

  /// Log-density of the approximated target at x, whichever way the map points.
  double target_logpdf(std::span<const double> x) const;

  /// Sequential row-by-row inversion. Errors carry the failing component.
  std::vector<double> inverse(std::span<const double> z) const;
  SampleMatrix inverse(const SampleMatrix& z) const;

  /// Runs rows k+1..K of the inverse with x_{1:k} pinned to x_head (k =
  /// x_head.size(), given in original units). k = 0 is the full inverse and
  /// k = K returns an empty vector. For a reference-to-target map the head is
  /// pulled back to the reference first and the tail is pushed forward.
  std::vector<double> conditional_inverse(std::span<const double> z_tail,
                                          std::span<const double> x_head) const;

  /// Pushes the tail of a joint sample forward with its own head, then
  /// inverts it with the head replaced by x_head.
  std::vector<double> composite_conditional(std::span<const double> joint_sample,
                                            std::span<const double> x_head) const;

  /// n reference draws mapped through the inverse (target-to-reference maps).
  SampleMatrix sample_pullback(Eigen::Index n, std::uint64_t seed, int threads = 1) const;

  /// n draws from the approximated target, for either direction.
  SampleMatrix sample_target(Eigen::Index n, std::uint64_t seed, int threads = 1) const;

  /// n conditional draws of the tail given x_head using fresh reference draws.
  SampleMatrix sample_conditional(std::span<const double> x_head, Eigen::Index n,
                                  std::uint64_t seed, int threads = 1) const;

 private:
  void invert_rows(std::vector<double>& u, std::span<const double> z, int first) const;

  std::vector<MapComponent> components_;
  Standardizer standardizer_;
  MapDirection direction_;
};

/// n x K matrix of i.i.d. standard normal draws from a seeded CounterRng.
SampleMatrix standard_normal_samples(Eigen::Index n, int dim, std::uint64_t seed);

}  // namespace tmap
