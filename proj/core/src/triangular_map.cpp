#include "tmap/triangular_map.hpp"

#include <cmath>
#include <string>

#include "tmap/error.hpp"
#include "tmap/parallel.hpp"
#include "tmap/random.hpp"
#include "tmap/special.hpp"

namespace tmap {

TriangularMap::TriangularMap(std::vector<MapComponent> components, Standardizer standardizer,
                             MapDirection direction)
    : components_(std::move(components)),
      standardizer_(std::move(standardizer)),
      direction_(direction) {
  if (components_.empty()) throw ParameterError("a map needs at least one component");
  if (standardizer_.dim() != dim()) {
    throw ParameterError("standardizer dimension does not match the number of components");
  }
  for (int k = 0; k < dim(); ++k) {
    if (components_[k].index() != k) {
      throw ParameterError("component " + std::to_string(k) + " carries index " +
                           std::to_string(components_[k].index()));
    }
  }
}

TriangularMap TriangularMap::identity(int dim, ComponentKind kind) {
  std::vector<MapComponent> comps;
  for (int k = 0; k < dim; ++k) comps.push_back(identity_component(k, kind));
  return TriangularMap(std::move(comps), Standardizer::identity(dim));
}

std::size_t TriangularMap::num_coefficients() const {
  std::size_t n = 0;
  for (const auto& c : components_) n += c.num_coefficients();
  return n;
}

namespace {

void check_width(std::size_t got, int want, const char* what) {
  if (static_cast<int>(got) != want) {
    throw ContractViolation(std::string(what) + " has " + std::to_string(got) +
                            " entries, expected " + std::to_string(want));
  }
}

}  // namespace

std::vector<double> TriangularMap::forward(std::span<const double> x) const {
  check_width(x.size(), dim(), "input point");
  const auto u = standardizer_.standardize(x);
  std::vector<double> z(dim());
  for (int k = 0; k < dim(); ++k) z[k] = components_[k].evaluate(u);
  return z;
}

SampleMatrix TriangularMap::forward(const SampleMatrix& x) const {
  check_width(static_cast<std::size_t>(x.cols()), dim(), "sample matrix row");
  SampleMatrix z(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const auto zi = forward(row_span(x, i));
    for (int k = 0; k < dim(); ++k) z(i, k) = zi[k];
  }
  return z;
}

double TriangularMap::log_det_jacobian(std::span<const double> x) const {
  check_width(x.size(), dim(), "input point");
  const auto u = standardizer_.standardize(x);
  double s = 0.0;
  for (const auto& c : components_) s += std::log(c.diag_derivative(u));
  return s;
}

double TriangularMap::pullback_logpdf(std::span<const double> x) const {
  check_width(x.size(), dim(), "input point");
  const auto u = standardizer_.standardize(x);
  double logp = -standardizer_.log_scale_sum();
  for (const auto& c : components_) {
    logp += special::std_normal_logpdf(c.evaluate(u)) + std::log(c.diag_derivative(u));
  }
  return logp;
}

double TriangularMap::pushforward_logpdf(std::span<const double> v) const {
  const auto u = inverse(v);
  double logp = 0.0;
  for (double ui : u) logp += special::std_normal_logpdf(ui);
  return logp - log_det_jacobian(u) + standardizer_.log_scale_sum();
}

double TriangularMap::target_logpdf(std::span<const double> x) const {
  return direction_ == MapDirection::TargetToReference ? pullback_logpdf(x)
                                                       : pushforward_logpdf(x);
}

void TriangularMap::invert_rows(std::vector<double>& u, std::span<const double> z,
                                int first) const {
  for (int k = first; k < dim(); ++k) {
    u[k] = components_[k].invert(z[k - first], std::span<const double>(u.data(), k));
  }
}

std::vector<double> TriangularMap::inverse(std::span<const double> z) const {
  check_width(z.size(), dim(), "reference point");
  std::vector<double> u(dim(), 0.0);
  invert_rows(u, z, 0);
  return standardizer_.destandardize(u);
}

SampleMatrix TriangularMap::inverse(const SampleMatrix& z) const {
  check_width(static_cast<std::size_t>(z.cols()), dim(), "sample matrix row");
  SampleMatrix x(z.rows(), z.cols());
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const auto xi = inverse(row_span(z, i));
    for (int k = 0; k < dim(); ++k) x(i, k) = xi[k];
  }
  return x;
}

std::vector<double> TriangularMap::conditional_inverse(std::span<const double> z_tail,
                                                       std::span<const double> x_head) const {
  const int k = static_cast<int>(x_head.size());
  if (k > dim()) throw ContractViolation("conditioning block is wider than the map");
  check_width(z_tail.size(), dim() - k, "reference tail");
  std::vector<double> u(dim(), 0.0);
  for (int j = 0; j < k; ++j) {
    if (!std::isfinite(x_head[j])) throw ContractViolation("non-finite conditioning value");
  }
  if (direction_ == MapDirection::ReferenceToTarget) {
    // The head lives on the output side: recover its reference coordinates,
    // then push the fresh tail through the lower rows.
    for (int j = 0; j < k; ++j) {
      u[j] = components_[j].invert(x_head[j], std::span<const double>(u.data(), j));
    }
    for (int j = k; j < dim(); ++j) u[j] = standardizer_.standardize(z_tail[j - k], j);
    std::vector<double> tail(dim() - k);
    for (int j = k; j < dim(); ++j) {
      tail[j - k] = components_[j].evaluate(std::span<const double>(u.data(), j + 1));
    }
    return tail;
  }
  for (int j = 0; j < k; ++j) u[j] = standardizer_.standardize(x_head[j], j);
  invert_rows(u, z_tail, k);
  std::vector<double> tail(dim() - k);
  for (int j = k; j < dim(); ++j) tail[j - k] = standardizer_.destandardize(u[j], j);
  return tail;
}

std::vector<double> TriangularMap::composite_conditional(std::span<const double> joint_sample,
                                                         std::span<const double> x_head) const {
  check_width(joint_sample.size(), dim(), "joint sample");
  const int k = static_cast<int>(x_head.size());
  if (k > dim()) throw ContractViolation("conditioning block is wider than the map");
  std::vector<double> z_tail(dim() - k);
  if (direction_ == MapDirection::ReferenceToTarget) {
    const auto z = inverse(joint_sample);
    for (int j = k; j < dim(); ++j) z_tail[j - k] = z[j];
  } else {
    const auto u = standardizer_.standardize(joint_sample);
    for (int j = k; j < dim(); ++j) z_tail[j - k] = components_[j].evaluate(u);
  }
  return conditional_inverse(z_tail, x_head);
}

SampleMatrix TriangularMap::sample_pullback(Eigen::Index n, std::uint64_t seed,
                                            int threads) const {
  if (n < 1) throw ContractViolation("sample count must be at least 1");
  const SampleMatrix z = standard_normal_samples(n, dim(), seed);
  SampleMatrix x(n, dim());
  parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t i) {
    const auto xi = inverse(row_span(z, static_cast<Eigen::Index>(i)));
    for (int k = 0; k < dim(); ++k) x(static_cast<Eigen::Index>(i), k) = xi[k];
  });
  return x;
}

SampleMatrix TriangularMap::sample_target(Eigen::Index n, std::uint64_t seed, int threads) const {
  if (direction_ == MapDirection::TargetToReference) return sample_pullback(n, seed, threads);
  if (n < 1) throw ContractViolation("sample count must be at least 1");
  return forward(standard_normal_samples(n, dim(), seed));
}

SampleMatrix TriangularMap::sample_conditional(std::span<const double> x_head, Eigen::Index n,
                                               std::uint64_t seed, int threads) const {
  if (n < 1) throw ContractViolation("sample count must be at least 1");
  const int k = static_cast<int>(x_head.size());
  if (k > dim()) throw ContractViolation("conditioning block is wider than the map");
  const SampleMatrix z = standard_normal_samples(n, dim() - k, seed);
  SampleMatrix out(n, dim() - k);
  parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t i) {
    const auto row = static_cast<Eigen::Index>(i);
    const auto tail = conditional_inverse(row_span(z, row), x_head);
    for (int j = 0; j < dim() - k; ++j) out(row, j) = tail[j];
  });
  return out;
}

SampleMatrix standard_normal_samples(Eigen::Index n, int dim, std::uint64_t seed) {
  CounterRng rng(seed);
  SampleMatrix z(n, dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int k = 0; k < dim; ++k) z(i, k) = rng.normal();
  }
  return z;
}

}  // namespace tmap
