#include "design.hpp"

#include <algorithm>
#include <cmath>

#include "tmap/error.hpp"
#include "tmap/parallel.hpp"
#include "tmap/special.hpp"

namespace tmap::detail {

namespace {

double product_except(const TermSpec& term, std::span<const double> x, int skip,
                      const BasisFamily** skipped) {
  double v = 1.0;
  *skipped = nullptr;
  for (const auto& f : term.factors) {
    if (f.variable == skip) {
      *skipped = &f.family;
    } else {
      v *= f.family.value(x[f.variable]);
    }
  }
  return v;
}

}  // namespace

ComponentDesign build_design(const MapComponent& component, const SampleMatrix& samples,
                             int threads) {
  const int k = component.index();
  if (samples.cols() <= k) {
    throw ContractViolation("samples have " + std::to_string(samples.cols()) +
                            " columns; component " + std::to_string(k) + " needs more");
  }
  if (!samples.allFinite()) throw ContractViolation("non-finite sample values");
  ComponentDesign d;
  d.kind = component.kind();
  d.rectifier = component.rectifier();
  d.samples = samples.rows();
  const auto& g = component.nonmonotone();
  const auto& f = component.monotone();
  d.num_nonmonotone = static_cast<Eigen::Index>(g.size());
  d.num_monotone = static_cast<Eigen::Index>(f.size());
  const Eigen::Index N = d.samples;

  d.nonmonotone.resize(N, d.num_nonmonotone);
  if (d.kind == ComponentKind::CrossTerm) {
    const auto& rule = special::gauss_legendre(component.quadrature_order());
    d.nodes = static_cast<int>(rule.nodes.size());
    const int Q = d.nodes;
    d.integrand.resize(N * Q, d.num_monotone);
    d.integrand_end.resize(N, d.num_monotone);
    d.node_weight.resize(N * Q);
    parallel_for(static_cast<std::size_t>(N), threads, [&](std::size_t ii) {
      const auto i = static_cast<Eigen::Index>(ii);
      const auto x = row_span(samples, i);
      for (Eigen::Index j = 0; j < d.num_nonmonotone; ++j) {
        d.nonmonotone(i, j) = eval_term(g[j], x);
      }
      const double xk = x[k];
      for (int q = 0; q < Q; ++q) d.node_weight[i * Q + q] = 0.5 * xk * rule.weights[q];
      for (Eigen::Index j = 0; j < d.num_monotone; ++j) {
        const BasisFamily* tf = nullptr;
        const double pre = product_except(f[j], x, k, &tf);
        d.integrand_end(i, j) = tf ? pre * tf->value(xk) : pre;
        for (int q = 0; q < Q; ++q) {
          const double t = 0.5 * xk * (1.0 + rule.nodes[q]);
          d.integrand(i * Q + q, j) = tf ? pre * tf->value(t) : pre;
        }
      }
    });
  } else {
    d.monotone.resize(N, d.num_monotone);
    d.monotone_d.resize(N, d.num_monotone);
    parallel_for(static_cast<std::size_t>(N), threads, [&](std::size_t ii) {
      const auto i = static_cast<Eigen::Index>(ii);
      const auto x = row_span(samples, i);
      for (Eigen::Index j = 0; j < d.num_nonmonotone; ++j) {
        d.nonmonotone(i, j) = eval_term(g[j], x);
      }
      for (Eigen::Index j = 0; j < d.num_monotone; ++j) {
        const auto& fam = f[j].factors[0].family;
        d.monotone(i, j) = fam.value(x[k]);
        d.monotone_d(i, j) = fam.derivative(x[k]);
      }
    });
  }
  return d;
}

DesignValues evaluate_design(const ComponentDesign& d, const Eigen::VectorXd& c) {
  DesignValues v;
  const auto m = d.num_nonmonotone;
  const auto n = d.num_monotone;
  const Eigen::VectorXd cg = c.head(m);
  const Eigen::VectorXd cf = c.tail(n);
  v.value = d.nonmonotone * cg;
  if (d.kind == ComponentKind::CrossTerm) {
    const int Q = d.nodes;
    v.node_h = d.integrand * cf;
    v.end_h = d.integrand_end * cf;
    v.diag.resize(d.samples);
    for (Eigen::Index i = 0; i < d.samples; ++i) {
      double s = 0.0;
      for (int q = 0; q < Q; ++q) {
        s += d.node_weight[i * Q + q] * rectify(d.rectifier, v.node_h[i * Q + q]);
      }
      v.value[i] += s;
      v.diag[i] = rectify(d.rectifier, v.end_h[i]);
    }
  } else {
    v.value += d.monotone * cf;
    v.diag = d.monotone_d * cf;
  }
  v.feasible = v.value.allFinite() && (v.diag.array() > 0.0).all() && v.diag.allFinite();
  return v;
}

Eigen::VectorXd design_gradient(const ComponentDesign& d, const DesignValues& v,
                                const Eigen::VectorXd& w) {
  const auto m = d.num_nonmonotone;
  const auto n = d.num_monotone;
  Eigen::VectorXd grad(m + n);
  grad.head(m) = d.nonmonotone.transpose() * w;
  if (d.kind == ComponentKind::CrossTerm) {
    const int Q = d.nodes;
    Eigen::VectorXd node_w(d.samples * Q);
    for (Eigen::Index i = 0; i < d.samples; ++i) {
      for (int q = 0; q < Q; ++q) {
        const auto r = i * Q + q;
        node_w[r] = w[i] * d.node_weight[r] * rectify_derivative(d.rectifier, v.node_h[r]);
      }
    }
    Eigen::VectorXd end_w(d.samples);
    for (Eigen::Index i = 0; i < d.samples; ++i) {
      end_w[i] = rectify_derivative(d.rectifier, v.end_h[i]) / v.diag[i];
    }
    grad.tail(n) = d.integrand.transpose() * node_w - d.integrand_end.transpose() * end_w;
  } else {
    grad.tail(n) = d.monotone.transpose() * w - d.monotone_d.transpose() * v.diag.cwiseInverse();
  }
  return grad;
}

Eigen::VectorXd design_scales(const ComponentDesign& d, const DesignValues& v) {
  const auto m = d.num_nonmonotone;
  const auto n = d.num_monotone;
  Eigen::VectorXd s(m + n);
  s.head(m) = d.nonmonotone.colwise().squaredNorm().transpose();
  Eigen::MatrixXd js(d.samples, n), jl(d.samples, n);
  if (d.kind == ComponentKind::CrossTerm) {
    const int Q = d.nodes;
    for (Eigen::Index i = 0; i < d.samples; ++i) {
      Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n);
      for (int q = 0; q < Q; ++q) {
        const auto r = i * Q + q;
        row += (d.node_weight[r] * rectify_derivative(d.rectifier, v.node_h[r])) * d.integrand.row(r);
      }
      js.row(i) = row;
      jl.row(i) = (rectify_derivative(d.rectifier, v.end_h[i]) / v.diag[i]) * d.integrand_end.row(i);
    }
  } else {
    js = d.monotone;
    jl = v.diag.cwiseInverse().asDiagonal() * d.monotone_d;
  }
  s.tail(n) = (js.colwise().squaredNorm() + jl.colwise().squaredNorm()).transpose();
  s = s.cwiseSqrt();
  const double floor = 1e-8 * std::max(1.0, s.maxCoeff());
  return s.cwiseMax(floor);
}

}  // namespace tmap::detail
