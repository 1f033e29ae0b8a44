#include "tmap/box_qn.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "tmap/error.hpp"

namespace tmap {

namespace {

using Eigen::VectorXd;

VectorXd project(const VectorXd& x, const VectorXd& lo, const VectorXd& hi) {
  return x.cwiseMax(lo).cwiseMin(hi);
}

double projected_gradient_norm(const VectorXd& x, const VectorXd& g, const VectorXd& lo,
                               const VectorXd& hi) {
  return (project(x - g, lo, hi) - x).lpNorm<Eigen::Infinity>();
}

struct Pair {
  VectorXd s;
  VectorXd y;
};

// Two-loop recursion restricted to the entries where `free` is 1.
VectorXd two_loop(const std::deque<Pair>& memory, const VectorXd& g, const VectorXd& free) {
  VectorXd q = g.cwiseProduct(free);
  std::vector<double> alpha(memory.size(), 0.0), rho(memory.size(), 0.0);
  double gamma = 1.0;
  bool have_gamma = false;
  for (int i = static_cast<int>(memory.size()) - 1; i >= 0; --i) {
    const VectorXd s = memory[i].s.cwiseProduct(free);
    const VectorXd y = memory[i].y.cwiseProduct(free);
    const double sy = s.dot(y);
    if (sy <= 1e-300) continue;
    rho[i] = 1.0 / sy;
    alpha[i] = rho[i] * s.dot(q);
    q -= alpha[i] * y;
    if (!have_gamma) {
      gamma = sy / y.squaredNorm();
      have_gamma = true;
    }
  }
  VectorXd r = gamma * q;
  for (std::size_t i = 0; i < memory.size(); ++i) {
    if (rho[i] == 0.0) continue;
    const VectorXd s = memory[i].s.cwiseProduct(free);
    const VectorXd y = memory[i].y.cwiseProduct(free);
    const double beta = rho[i] * y.dot(r);
    r += (alpha[i] - beta) * s;
  }
  return -r.cwiseProduct(free);
}

void check_inputs(const VectorXd& x0, const VectorXd& lo, const VectorXd& hi) {
  if (lo.size() != x0.size() || hi.size() != x0.size()) {
    throw ContractViolation("bound vectors must match the parameter length");
  }
  if ((lo.array() > hi.array()).any()) throw ContractViolation("lower bound exceeds upper bound");
}

}  // namespace

BoxQnResult minimize_box(const SmoothObjective& objective, VectorXd x0, const VectorXd& lower,
                         const VectorXd& upper, const BoxQnOptions& options) {
  check_inputs(x0, lower, upper);
  const Eigen::Index n = x0.size();
  BoxQnResult res;
  VectorXd x = project(x0, lower, upper);
  VectorXd g(n);
  double f = objective(x, g);
  if (!std::isfinite(f)) {
    res.x = x;
    res.value = f;
    res.message = "objective is not finite at the starting point";
    return res;
  }
  res.trace.push_back(f);
  std::deque<Pair> memory;
  double pg = projected_gradient_norm(x, g, lower, upper);

  int iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    if (pg <= options.gradient_tolerance * std::max(1.0, std::abs(f))) {
      res.converged = true;
      res.message = "projected gradient below tolerance";
      break;
    }
    VectorXd free = VectorXd::Ones(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      if ((x[i] <= lower[i] && g[i] > 0.0) || (x[i] >= upper[i] && g[i] < 0.0)) free[i] = 0.0;
    }

    bool accepted = false;
    bool steepest = false;
    VectorXd x_new, g_new(n);
    double f_new = f;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      steepest = attempt == 1 || memory.empty();
      VectorXd d = steepest ? VectorXd(-g.cwiseProduct(free)) : two_loop(memory, g, free);
      if (!steepest && g.dot(d) >= 0.0) {
        memory.clear();
        d = -g.cwiseProduct(free);
      }
      double step = 1.0;
      if (memory.empty()) {
        const double dn = d.lpNorm<Eigen::Infinity>();
        if (dn > 0.0) step = std::min(1.0, 1.0 / dn);
      }
      for (int ls = 0; ls < 60; ++ls) {
        x_new = project(x + step * d, lower, upper);
        const double dec = g.dot(x_new - x);
        if (dec >= 0.0 && ls > 0 && (x_new - x).lpNorm<Eigen::Infinity>() == 0.0) break;
        f_new = objective(x_new, g_new);
        if (std::isfinite(f_new) && f_new <= f + 1e-4 * dec) {
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) memory.clear();
    }
    if (!accepted) {
      res.message = "line search could not decrease the objective";
      // At the limit of floating point resolution this is the optimum.
      res.converged = pg <= std::sqrt(options.gradient_tolerance) * std::max(1.0, std::abs(f));
      break;
    }

    Pair p{x_new - x, g_new - g};
    const double sy = p.s.dot(p.y);
    if (sy > std::numeric_limits<double>::epsilon() * p.y.squaredNorm()) {
      memory.push_back(std::move(p));
      if (static_cast<int>(memory.size()) > options.memory) memory.pop_front();
    }
    const double rel_decrease = (f - f_new) / std::max({std::abs(f), std::abs(f_new), 1.0});
    x = x_new;
    g = g_new;
    f = f_new;
    res.trace.push_back(f);
    pg = projected_gradient_norm(x, g, lower, upper);
    if (rel_decrease <= options.function_tolerance) {
      if (!steepest) {
        // A stalled quasi-Newton step can come from stale curvature pairs;
        // retry from a steepest-descent step before giving up.
        memory.clear();
        continue;
      }
      if (pg > std::sqrt(options.gradient_tolerance) * std::max(1.0, std::abs(f))) continue;
      res.converged = true;
      res.message = "relative objective decrease below tolerance";
      ++iter;
      break;
    }
  }
  if (iter >= options.max_iterations && !res.converged) {
    res.message = "maximum iterations reached";
  }
  res.x = x;
  res.value = f;
  res.gradient_norm = pg;
  res.iterations = iter;
  return res;
}

BoxQnResult minimize_l1_proximal(const SmoothObjective& objective, VectorXd x0,
                                 const VectorXd& lower, const VectorXd& upper,
                                 const VectorXd& l1_weights, const BoxQnOptions& options) {
  check_inputs(x0, lower, upper);
  if (l1_weights.size() != x0.size()) throw ContractViolation("L1 weight vector has wrong length");
  const Eigen::Index n = x0.size();
  auto prox = [&](const VectorXd& v, double t) {
    VectorXd out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double thr = t * l1_weights[i];
      double s = v[i];
      if (s > thr) s -= thr;
      else if (s < -thr) s += thr;
      else s = 0.0;
      out[i] = std::clamp(s, lower[i], upper[i]);
    }
    return out;
  };
  auto penalty = [&](const VectorXd& v) { return l1_weights.cwiseProduct(v.cwiseAbs()).sum(); };

  BoxQnResult res;
  VectorXd x = project(x0, lower, upper);
  VectorXd g(n);
  double fx = objective(x, g);
  if (!std::isfinite(fx)) {
    res.x = x;
    res.value = fx;
    res.message = "objective is not finite at the starting point";
    return res;
  }
  double Fx = fx + penalty(x);
  res.trace.push_back(Fx);
  VectorXd y = x;
  VectorXd gy = g;
  double fy = fx;
  double momentum = 1.0;
  double t = 1.0 / std::max(1.0, g.lpNorm<Eigen::Infinity>());
  double mapping_norm = std::numeric_limits<double>::infinity();
  // Proximal gradient needs many more, much cheaper, iterations than L-BFGS.
  const int max_iter = options.max_iterations * 20;
  int iter = 0;
  for (; iter < max_iter; ++iter) {
    VectorXd x_new, g_new(n);
    double f_new = 0.0;
    bool ok = false;
    for (int ls = 0; ls < 80; ++ls) {
      x_new = prox(y - t * gy, t);
      f_new = objective(x_new, g_new);
      const VectorXd diff = x_new - y;
      if (std::isfinite(f_new) &&
          f_new <= fy + gy.dot(diff) + diff.squaredNorm() / (2.0 * t) + 1e-14 * std::abs(fy)) {
        ok = true;
        break;
      }
      t *= 0.5;
    }
    if (!ok) {
      res.message = "proximal line search failed";
      break;
    }
    mapping_norm = ((x_new - y) / t).lpNorm<Eigen::Infinity>();
    const double F_new = f_new + penalty(x_new);
    if (F_new > Fx) {
      // Restart momentum from the last accepted point.
      momentum = 1.0;
      y = x;
      gy = g;
      fy = fx;
      continue;
    }
    const double next_momentum = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
    const VectorXd y_new = project(x_new + ((momentum - 1.0) / next_momentum) * (x_new - x),
                                   lower, upper);
    const double rel = (Fx - F_new) / std::max({std::abs(Fx), std::abs(F_new), 1.0});
    x = x_new;
    g = g_new;
    fx = f_new;
    Fx = F_new;
    res.trace.push_back(Fx);
    momentum = next_momentum;
    y = y_new;
    fy = objective(y, gy);
    if (!std::isfinite(fy)) {
      y = x;
      gy = g;
      fy = fx;
      momentum = 1.0;
    }
    t *= 2.0;
    if (mapping_norm <= options.gradient_tolerance * std::max(1.0, std::abs(Fx)) ||
        (rel > 0.0 && rel <= options.function_tolerance)) {
      res.converged = true;
      res.message = "proximal gradient mapping below tolerance";
      ++iter;
      break;
    }
  }
  if (!res.converged && res.message.empty()) res.message = "maximum iterations reached";
  res.x = x;
  res.value = Fx;
  res.gradient_norm = mapping_norm;
  res.iterations = iter;
  return res;
}

}  // namespace tmap
