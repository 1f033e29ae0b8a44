#include "tmap/targets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>

#include <Eigen/Cholesky>

#include "tmap/error.hpp"
#include "tmap/random.hpp"
#include "tmap/special.hpp"
#include "tmap/triangular_map.hpp"

namespace tmap {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kLog2Pi = 1.8378770664093454836;

double normal_logpdf(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * (kLog2Pi + std::log(var) + d * d / var);
}

double param(const std::map<std::string, double>& p, const std::string& key, double fallback) {
  const auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

int int_param(const std::map<std::string, double>& p, const std::string& key, int fallback) {
  const double v = param(p, key, fallback);
  if (v != std::floor(v) || v < 1 || v > 1e6) throw ParameterError("'" + key + "' must be a positive integer");
  return static_cast<int>(v);
}

// log sum_j w_j N(x; c_j, sigma^2 I) and the responsibilities.
double mixture_log(const TargetSpec& s, std::span<const double> x, std::vector<double>* resp) {
  const auto K = static_cast<std::size_t>(s.dim());
  std::vector<double> terms(s.weights.size());
  const double var = s.sigma * s.sigma;
  for (std::size_t j = 0; j < terms.size(); ++j) {
    double lp = std::log(s.weights[j]);
    for (std::size_t i = 0; i < K; ++i) lp += normal_logpdf(x[i], s.centers[j][static_cast<Eigen::Index>(i)], var);
    terms[j] = lp;
  }
  const double mx = *std::max_element(terms.begin(), terms.end());
  double sum = 0.0;
  for (double t : terms) sum += std::exp(t - mx);
  const double out = mx + std::log(sum);
  if (resp) {
    resp->resize(terms.size());
    for (std::size_t j = 0; j < terms.size(); ++j) (*resp)[j] = std::exp(terms[j] - out);
  }
  return out;
}

struct GaussianCache {
  Eigen::LLT<MatrixXd> llt;
  double log_norm = 0.0;
};

GaussianCache gaussian_cache(const TargetSpec& s) {
  GaussianCache c;
  c.llt.compute(s.covariance);
  const MatrixXd L = c.llt.matrixL();
  c.log_norm = -0.5 * s.dim() * kLog2Pi - L.diagonal().array().log().sum();
  return c;
}

double gaussian_log(const TargetSpec& s, const GaussianCache& c, std::span<const double> x,
                    std::span<double>* grad) {
  const VectorXd d = Eigen::Map<const VectorXd>(x.data(), s.dim()) - s.mean;
  const VectorXd p = c.llt.solve(d);
  if (grad) {
    for (int i = 0; i < s.dim(); ++i) (*grad)[i] = -p[i];
  }
  return c.log_norm - 0.5 * d.dot(p);
}

// Wavy log-density in its natural coordinates (u = driving, v = noisy).
double wavy_log(const TargetSpec& s, double u, double v, double* du, double* dv) {
  const double m = s.amplitude * std::sin(s.frequency * u);
  const double var = s.noise * s.noise;
  const double r = (v - m) / var;
  if (du) *du = -u + r * s.amplitude * s.frequency * std::cos(s.frequency * u);
  if (dv) *dv = -r;
  return normal_logpdf(u, 0.0, 1.0) + normal_logpdf(v, m, var);
}

void check_point(const TargetSpec& s, std::span<const double> x) {
  if (static_cast<int>(x.size()) != s.dim()) {
    throw ContractViolation("point has " + std::to_string(x.size()) + " entries; target has " +
                            std::to_string(s.dim()));
  }
}

}  // namespace

TargetSpec TargetSpec::gaussian(VectorXd mean, MatrixXd covariance) {
  TargetSpec s;
  s.kind = TargetKind::Gaussian;
  s.name = "gaussian";
  s.mean = std::move(mean);
  s.covariance = std::move(covariance);
  s.validate();
  return s;
}

TargetSpec TargetSpec::std_gauss(int dim) {
  if (dim < 1) throw ParameterError("dimension must be positive");
  auto s = gaussian(VectorXd::Zero(dim), MatrixXd::Identity(dim, dim));
  s.name = "std_gauss";
  return s;
}

TargetSpec TargetSpec::corr_gauss(double rho) {
  if (!(std::abs(rho) < 1.0)) throw ParameterError("correlation must lie in (-1, 1)");
  MatrixXd c(2, 2);
  c << 1.0, rho, rho, 1.0;
  auto s = gaussian(VectorXd::Zero(2), c);
  s.name = "corr_gauss";
  return s;
}

TargetSpec TargetSpec::ar1(int dim, double phi) {
  if (dim < 1) throw ParameterError("dimension must be positive");
  if (!(std::abs(phi) < 1.0)) throw ParameterError("AR(1) coefficient must lie in (-1, 1)");
  MatrixXd c(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) c(i, j) = std::pow(phi, std::abs(i - j));
  }
  auto s = gaussian(VectorXd::Zero(dim), c);
  s.name = "ar1";
  return s;
}

TargetSpec TargetSpec::banana(double a, double b) {
  TargetSpec s;
  s.kind = TargetKind::Banana;
  s.name = "banana";
  s.a = a;
  s.b = b;
  s.validate();
  return s;
}

TargetSpec TargetSpec::mixture(std::vector<double> weights, std::vector<VectorXd> centers,
                               double sigma) {
  TargetSpec s;
  s.kind = TargetKind::Mixture;
  s.name = "mixture";
  s.weights = std::move(weights);
  s.centers = std::move(centers);
  s.sigma = sigma;
  s.validate();
  return s;
}

TargetSpec TargetSpec::mixture_corners() {
  auto s = mixture({1.0 / 3, 1.0 / 3, 1.0 / 3},
                   {VectorXd{{-2.0, -2.0}}, VectorXd{{2.0, -2.0}}, VectorXd{{-2.0, 2.0}}}, 0.5);
  s.name = "mixture_corners";
  return s;
}

TargetSpec TargetSpec::wavy(double amplitude, double frequency, double noise) {
  TargetSpec s;
  s.kind = TargetKind::Wavy;
  s.name = "wavy";
  s.amplitude = amplitude;
  s.frequency = frequency;
  s.noise = noise;
  s.validate();
  return s;
}

TargetSpec TargetSpec::wavy_rotated(double amplitude, double frequency, double noise) {
  auto s = wavy(amplitude, frequency, noise);
  s.kind = TargetKind::WavyRotated;
  s.name = "wavy_rotated";
  return s;
}

int TargetSpec::dim() const {
  switch (kind) {
    case TargetKind::Gaussian: return static_cast<int>(mean.size());
    case TargetKind::Mixture: return centers.empty() ? 0 : static_cast<int>(centers.front().size());
    default: return 2;
  }
}

void TargetSpec::validate() const {
  switch (kind) {
    case TargetKind::Gaussian: {
      if (mean.size() < 1) throw ParameterError("Gaussian mean is empty");
      if (covariance.rows() != mean.size() || covariance.cols() != mean.size()) {
        throw ParameterError("covariance shape does not match the mean");
      }
      if (!covariance.allFinite() || !mean.allFinite()) throw ParameterError("non-finite Gaussian parameters");
      if (!covariance.isApprox(covariance.transpose(), 1e-12)) {
        throw ParameterError("covariance must be symmetric");
      }
      Eigen::LLT<MatrixXd> llt(covariance);
      if (llt.info() != Eigen::Success) throw ParameterError("covariance must be positive definite");
      break;
    }
    case TargetKind::Banana:
      if (!(a > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
        throw ParameterError("banana needs a > 0 and finite b");
      }
      break;
    case TargetKind::Mixture: {
      if (weights.empty() || weights.size() != centers.size()) {
        throw ParameterError("mixture needs one weight per center");
      }
      if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ParameterError("mixture sigma must be positive");
      double sum = 0.0;
      for (double w : weights) {
        if (!(w > 0.0)) throw ParameterError("mixture weights must be positive");
        sum += w;
      }
      if (std::abs(sum - 1.0) > 1e-9) throw ParameterError("mixture weights must sum to 1");
      for (const auto& c : centers) {
        if (c.size() != centers.front().size() || c.size() < 1 || !c.allFinite()) {
          throw ParameterError("mixture centers must share a positive dimension");
        }
      }
      break;
    }
    case TargetKind::Wavy:
    case TargetKind::WavyRotated:
      if (!(noise > 0.0) || !std::isfinite(amplitude) || !std::isfinite(frequency)) {
        throw ParameterError("wavy needs noise > 0 and finite amplitude and frequency");
      }
      break;
  }
}

namespace {

void allow_only(const std::string& name, const std::map<std::string, double>& p,
                std::initializer_list<const char*> keys) {
  for (const auto& [key, value] : p) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; })) {
      throw ParameterError("target '" + name + "' has no parameter '" + key + "'");
    }
  }
}

}  // namespace

TargetSpec target_from_name(const std::string& name, const std::map<std::string, double>& p) {
  if (name == "std_gauss") allow_only(name, p, {"dim"});
  if (name == "corr_gauss") allow_only(name, p, {"rho"});
  if (name == "ar1") allow_only(name, p, {"dim", "phi"});
  if (name == "banana") allow_only(name, p, {"a", "b"});
  if (name == "mixture_corners") allow_only(name, p, {"sigma"});
  if (name == "wavy" || name == "wavy_rotated") allow_only(name, p, {"amplitude", "frequency", "noise"});
  if (name == "std_gauss") return TargetSpec::std_gauss(int_param(p, "dim", 2));
  if (name == "corr_gauss") return TargetSpec::corr_gauss(param(p, "rho", 0.8));
  if (name == "ar1") return TargetSpec::ar1(int_param(p, "dim", 4), param(p, "phi", 0.8));
  if (name == "banana") return TargetSpec::banana(param(p, "a", 0.5), param(p, "b", 1.0));
  if (name == "mixture_corners") {
    auto s = TargetSpec::mixture_corners();
    s.sigma = param(p, "sigma", 0.5);
    s.validate();
    return s;
  }
  if (name == "wavy") {
    return TargetSpec::wavy(param(p, "amplitude", 1.0), param(p, "frequency", 2.0), param(p, "noise", 0.3));
  }
  if (name == "wavy_rotated") {
    return TargetSpec::wavy_rotated(param(p, "amplitude", 1.0), param(p, "frequency", 2.0),
                                    param(p, "noise", 0.3));
  }
  throw ParameterError("unknown target '" + name + "'");
}

SampleMatrix sample(const TargetSpec& spec, Eigen::Index n, std::uint64_t seed) {
  spec.validate();
  if (n < 1) throw ParameterError("sample count must be positive");
  const int K = spec.dim();
  switch (spec.kind) {
    case TargetKind::Gaussian: {
      const SampleMatrix z = standard_normal_samples(n, K, seed);
      const MatrixXd L = Eigen::LLT<MatrixXd>(spec.covariance).matrixL();
      SampleMatrix x = z * L.transpose();
      x.rowwise() += spec.mean.transpose();
      return x;
    }
    case TargetKind::Banana: {
      SampleMatrix x = standard_normal_samples(n, 2, seed);
      for (Eigen::Index i = 0; i < n; ++i) {
        x(i, 1) = spec.b * (x(i, 0) * x(i, 0) - 1.0) + spec.a * x(i, 1);
      }
      return x;
    }
    case TargetKind::Mixture: {
      CounterRng rng(seed);
      std::vector<double> cum(spec.weights.size());
      std::partial_sum(spec.weights.begin(), spec.weights.end(), cum.begin());
      SampleMatrix x(n, K);
      for (Eigen::Index i = 0; i < n; ++i) {
        const double u = rng.uniform() * cum.back();
        const auto j = static_cast<std::size_t>(
            std::min<std::ptrdiff_t>(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin(),
                                     static_cast<std::ptrdiff_t>(cum.size()) - 1));
        for (int d = 0; d < K; ++d) x(i, d) = spec.centers[j][d] + spec.sigma * rng.normal();
      }
      return x;
    }
    case TargetKind::Wavy:
    case TargetKind::WavyRotated: {
      SampleMatrix x = standard_normal_samples(n, 2, seed);
      for (Eigen::Index i = 0; i < n; ++i) {
        x(i, 1) = spec.amplitude * std::sin(spec.frequency * x(i, 0)) + spec.noise * x(i, 1);
      }
      if (spec.kind == TargetKind::WavyRotated) x.col(0).swap(x.col(1));
      return x;
    }
  }
  return {};
}

double log_density(const TargetSpec& spec, std::span<const double> x) {
  check_point(spec, x);
  switch (spec.kind) {
    case TargetKind::Gaussian: return gaussian_log(spec, gaussian_cache(spec), x, nullptr);
    case TargetKind::Banana: {
      const double m = spec.b * (x[0] * x[0] - 1.0);
      return normal_logpdf(x[0], 0.0, 1.0) + normal_logpdf(x[1], m, spec.a * spec.a);
    }
    case TargetKind::Mixture: return mixture_log(spec, x, nullptr);
    case TargetKind::Wavy: return wavy_log(spec, x[0], x[1], nullptr, nullptr);
    case TargetKind::WavyRotated: return wavy_log(spec, x[1], x[0], nullptr, nullptr);
  }
  return 0.0;
}

void log_density_gradient(const TargetSpec& spec, std::span<const double> x, std::span<double> g) {
  check_point(spec, x);
  switch (spec.kind) {
    case TargetKind::Gaussian:
      gaussian_log(spec, gaussian_cache(spec), x, &g);
      return;
    case TargetKind::Banana: {
      const double var = spec.a * spec.a;
      const double r = (x[1] - spec.b * (x[0] * x[0] - 1.0)) / var;
      g[0] = -x[0] + r * 2.0 * spec.b * x[0];
      g[1] = -r;
      return;
    }
    case TargetKind::Mixture: {
      std::vector<double> resp;
      mixture_log(spec, x, &resp);
      const double var = spec.sigma * spec.sigma;
      for (int d = 0; d < spec.dim(); ++d) {
        double s = 0.0;
        for (std::size_t j = 0; j < resp.size(); ++j) s += resp[j] * (spec.centers[j][d] - x[d]);
        g[d] = s / var;
      }
      return;
    }
    case TargetKind::Wavy:
      wavy_log(spec, x[0], x[1], &g[0], &g[1]);
      return;
    case TargetKind::WavyRotated:
      wavy_log(spec, x[1], x[0], &g[1], &g[0]);
      return;
  }
}

LogDensity make_log_density(const TargetSpec& spec) {
  spec.validate();
  LogDensity d;
  if (spec.kind == TargetKind::Gaussian) {
    auto cache = std::make_shared<GaussianCache>(gaussian_cache(spec));
    d.value = [spec, cache](std::span<const double> x) {
      check_point(spec, x);
      return gaussian_log(spec, *cache, x, nullptr);
    };
    d.gradient = [spec, cache](std::span<const double> x, std::span<double> g) {
      check_point(spec, x);
      gaussian_log(spec, *cache, x, &g);
    };
  } else {
    d.value = [spec](std::span<const double> x) { return log_density(spec, x); };
    d.gradient = [spec](std::span<const double> x, std::span<double> g) {
      log_density_gradient(spec, x, g);
    };
  }
  d.thread_safe = true;
  return d;
}

double ConditionalLaw::mean() const {
  double m = 0.0;
  for (std::size_t j = 0; j < weights.size(); ++j) m += weights[j] * means[j];
  return m;
}

double ConditionalLaw::variance() const {
  const double m = mean();
  double v = 0.0;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    v += weights[j] * (variances[j] + (means[j] - m) * (means[j] - m));
  }
  return v;
}

double ConditionalLaw::cdf(double x) const {
  double c = 0.0;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    c += weights[j] * special::std_normal_cdf((x - means[j]) / std::sqrt(variances[j]));
  }
  return c;
}

double ConditionalLaw::logpdf(double x) const {
  double mx = -std::numeric_limits<double>::infinity();
  std::vector<double> t(weights.size());
  for (std::size_t j = 0; j < weights.size(); ++j) {
    t[j] = std::log(weights[j]) + normal_logpdf(x, means[j], variances[j]);
    mx = std::max(mx, t[j]);
  }
  double s = 0.0;
  for (double v : t) s += std::exp(v - mx);
  return mx + std::log(s);
}

ConditionalLaw analytic_conditional(const TargetSpec& spec, std::span<const double> head) {
  spec.validate();
  const int K = spec.dim();
  const int k = static_cast<int>(head.size());
  if (k < 1 || k >= K) {
    throw ParameterError("conditioning width must lie in [1, " + std::to_string(K - 1) + "]");
  }
  for (double h : head) {
    if (!std::isfinite(h)) throw ContractViolation("non-finite conditioning value");
  }
  switch (spec.kind) {
    case TargetKind::Gaussian: {
      const MatrixXd Shh = spec.covariance.topLeftCorner(k, k);
      const VectorXd Sth = spec.covariance.block(k, 0, 1, k).transpose();
      const VectorXd d = Eigen::Map<const VectorXd>(head.data(), k) - spec.mean.head(k);
      Eigen::LLT<MatrixXd> llt(Shh);
      const VectorXd w = llt.solve(Sth);
      return {{1.0}, {spec.mean[k] + w.dot(d)}, {spec.covariance(k, k) - Sth.dot(w)}};
    }
    case TargetKind::Banana:
      return {{1.0}, {spec.b * (head[0] * head[0] - 1.0)}, {spec.a * spec.a}};
    case TargetKind::Wavy:
      return {{1.0}, {spec.amplitude * std::sin(spec.frequency * head[0])}, {spec.noise * spec.noise}};
    case TargetKind::Mixture: {
      const double var = spec.sigma * spec.sigma;
      ConditionalLaw law;
      std::vector<double> logw;
      for (std::size_t j = 0; j < spec.weights.size(); ++j) {
        double lw = std::log(spec.weights[j]);
        for (int d = 0; d < k; ++d) lw += normal_logpdf(head[d], spec.centers[j][d], var);
        logw.push_back(lw);
        law.means.push_back(spec.centers[j][k]);
        law.variances.push_back(var);
      }
      const double mx = *std::max_element(logw.begin(), logw.end());
      double s = 0.0;
      for (double v : logw) s += std::exp(v - mx);
      for (double v : logw) law.weights.push_back(std::exp(v - mx) / s);
      return law;
    }
    case TargetKind::WavyRotated:
      throw CapabilityError("wavy_rotated has no closed-form conditional");
  }
  throw CapabilityError("target has no closed-form conditional");
}

}  // namespace tmap
