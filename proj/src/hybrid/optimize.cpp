#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "qk/hybrid/hybrid.hpp"

namespace qk::hybrid {

namespace {

std::vector<double> starting_point(std::size_t n, const OptimizerSettings& s) {
  if (s.initial_params.empty()) return std::vector<double>(n, 0.0);
  return s.initial_params;
}

// Best evaluated sample since `start`, which is what both strategies return:
// every probe (simplex vertex, gradient stencil point) is a candidate.
ResultsBuffer best_since(const ObjectiveFunction& obj, std::size_t start) {
  const auto& h = obj.history();
  std::size_t best = start;
  for (std::size_t i = start + 1; i < h.size(); ++i)
    if (h[i].value < h[best].value) best = i;
  return {h[best].value, h[best].params};
}

// Spatial extent below which the simplex counts as collapsed.
constexpr double kSimplexCollapse = 1e-8;

ResultsBuffer nelder_mead(ObjectiveFunction& obj, const OptimizerSettings& s) {
  const std::size_t n = obj.n_params();
  const int max_iters = s.max_iters > 0 ? s.max_iters : 500;
  const std::size_t start = obj.history().size();

  if (n == 0) {
    obj({});
    return best_since(obj, start);
  }

  std::vector<std::vector<double>> xs;
  std::vector<double> fs;
  xs.push_back(starting_point(n, s));
  for (std::size_t i = 0; i < n; ++i) {
    auto xp = xs[0];
    xp[i] += s.simplex_step;
    xs.push_back(std::move(xp));
  }
  for (const auto& x : xs) fs.push_back(obj(x));

  auto combine = [n](const std::vector<double>& base, double w,
                     const std::vector<double>& dir,
                     const std::vector<double>& sub) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = base[i] + w * (dir[i] - sub[i]);
    return out;
  };

  for (int iter = 0; iter < max_iters; ++iter) {
    std::vector<std::size_t> order(xs.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });
    std::vector<std::vector<double>> xs2;
    std::vector<double> fs2;
    for (std::size_t k : order) {
      xs2.push_back(std::move(xs[k]));
      fs2.push_back(fs[k]);
    }
    xs = std::move(xs2);
    fs = std::move(fs2);

    // The value spread alone is not enough: a simplex straddling the minimum
    // symmetrically has near-equal values while still a step away from it, so
    // the simplex must also have collapsed spatially.
    double diameter = 0.0;
    for (std::size_t k = 1; k <= n; ++k)
      for (std::size_t i = 0; i < n; ++i)
        diameter = std::max(diameter, std::abs(xs[k][i] - xs[0][i]));
    if (fs.back() - fs.front() < s.f_tol && diameter < kSimplexCollapse) break;

    std::vector<double> centroid(n, 0.0);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i) centroid[i] += xs[k][i] / n;

    const auto reflected = combine(centroid, 1.0, centroid, xs[n]);
    const double fr = obj(reflected);
    if (fr < fs[0]) {
      const auto expanded = combine(centroid, 2.0, centroid, xs[n]);
      const double fe = obj(expanded);
      if (fe < fr) {
        xs[n] = expanded;
        fs[n] = fe;
      } else {
        xs[n] = reflected;
        fs[n] = fr;
      }
    } else if (fr < fs[n - 1]) {
      xs[n] = reflected;
      fs[n] = fr;
    } else {
      const bool outside = fr < fs[n];
      const auto contracted = outside ? combine(centroid, 0.5, reflected, centroid)
                                      : combine(centroid, 0.5, xs[n], centroid);
      const double fc = obj(contracted);
      if (fc < (outside ? fr : fs[n])) {
        xs[n] = contracted;
        fs[n] = fc;
      } else {
        for (std::size_t k = 1; k <= n; ++k) {
          xs[k] = combine(xs[0], 0.5, xs[k], xs[0]);
          fs[k] = obj(xs[k]);
        }
      }
    }
  }
  return best_since(obj, start);
}

ResultsBuffer adam(ObjectiveFunction& obj, const OptimizerSettings& s) {
  const std::size_t n = obj.n_params();
  const int max_iters = s.max_iters > 0 ? s.max_iters : 200;
  const std::size_t start = obj.history().size();

  std::vector<double> x = starting_point(n, s);
  double fx = obj(x);
  if (n == 0) return best_since(obj, start);

  constexpr double b1 = 0.9;
  constexpr double b2 = 0.999;
  constexpr double eps = 1e-8;
  std::vector<double> m(n, 0.0);
  std::vector<double> v(n, 0.0);

  for (int t = 1; t <= max_iters; ++t) {
    const auto g = central_gradient(obj, x, s.fd_step);
    for (std::size_t i = 0; i < n; ++i) {
      m[i] = b1 * m[i] + (1 - b1) * g[i];
      v[i] = b2 * v[i] + (1 - b2) * g[i] * g[i];
      const double mh = m[i] / (1 - std::pow(b1, t));
      const double vh = v[i] / (1 - std::pow(b2, t));
      x[i] -= s.learning_rate * mh / (std::sqrt(vh) + eps);
    }
    const double fnew = obj(x);
    const bool converged = std::abs(fnew - fx) < s.f_tol;
    fx = fnew;
    if (converged) break;
  }
  return best_since(obj, start);
}

}  // namespace

std::vector<double> central_gradient(ObjectiveFunction& objective,
                                     const std::vector<double>& x, double h) {
  std::vector<double> g(x.size());
  std::vector<double> xp = x;
  std::vector<double> xm = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + h;
    xm[i] = x[i] - h;
    g[i] = (objective(xp) - objective(xm)) / (2.0 * h);
    xp[i] = x[i];
    xm[i] = x[i];
  }
  return g;
}

Optimizer::Optimizer(std::string strategy, OptimizerSettings settings)
    : strategy_(std::move(strategy)), settings_(std::move(settings)) {
  if (strategy_ != "nelder-mead" && strategy_ != "adam")
    throw UnknownOptimizer("unknown optimizer strategy '" + strategy_ + "'");
  if (settings_.gradient_strategy != "central")
    throw UnknownOptimizer("unknown gradient strategy '" +
                           settings_.gradient_strategy + "'");
}

ResultsBuffer Optimizer::optimize(ObjectiveFunction& objective) const {
  if (strategy_ == "adam") return adam(objective, settings_);
  return nelder_mead(objective, settings_);
}

Optimizer create_optimizer(const std::string& strategy,
                           OptimizerSettings settings) {
  return Optimizer(strategy, std::move(settings));
}

std::vector<std::string> available_optimizers() {
  return {"nelder-mead", "adam"};
}

Handle taskInitiate(ObjectiveFunction objective, Optimizer optimizer) {
  Handle handle;
  handle.future_ = std::async(
      std::launch::async,
      [obj = std::move(objective), opt = std::move(optimizer)]() mutable {
        return opt.optimize(obj);
      });
  return handle;
}

ResultsBuffer sync(Handle& handle) {
  if (!handle.future_.valid())
    throw DoubleSync("sync already called on this handle");
  return handle.future_.get();
}

}  // namespace qk::hybrid
