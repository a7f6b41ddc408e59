#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

#include "fraudlab/error.hpp"
#include "fraudlab/kernels.hpp"
#include "fraudlab/models.hpp"

namespace fraudlab {

void LogisticParams::validate() const {
  if (max_iter < 1) throw Error(Errc::kConfig, "logistic: max_iter must be >= 1");
  if (!(tol > 0.0)) throw Error(Errc::kConfig, "logistic: tol must be positive");
  if (!(l2_c > 0.0)) throw Error(Errc::kConfig, "logistic: l2_c must be positive");
}

double logistic_objective(const FeatureMatrix& x, const LabelVector& y,
                          const SampleWeights& weights,
                          const LogisticParams& params,
                          std::span<const double> beta, std::span<double> grad) {
  const auto p = x.cols();
  double f = kernels::logistic_data_term_parallel(x, y, weights, beta, grad);
  double penalty = 0.0;
  for (std::size_t j = 0; j < p; ++j) {
    penalty += beta[j] * beta[j];
    grad[j] += beta[j] / params.l2_c;
  }
  f += 0.5 * penalty / params.l2_c;
  if (!params.fit_intercept) grad[p] = 0.0;
  return f;
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Objective restricted to the ray beta + alpha * dir.
class LineFunction {
 public:
  LineFunction(const FeatureMatrix& x, const LabelVector& y,
               const SampleWeights& w, const LogisticParams& params,
               std::span<const double> beta, std::span<const double> dir)
      : x_(x), y_(y), w_(w), params_(params), beta_(beta), dir_(dir),
        point_(beta.size()), grad_(beta.size()) {}

  // Returns (phi(alpha), phi'(alpha)); the point and gradient stay cached.
  std::pair<double, double> operator()(double alpha) {
    if (alpha == last_alpha_) return last_;
    last_alpha_ = alpha;
    for (std::size_t j = 0; j < point_.size(); ++j) {
      point_[j] = beta_[j] + alpha * dir_[j];
    }
    const double f = logistic_objective(x_, y_, w_, params_, point_, grad_);
    last_ = {f, dot(grad_, dir_)};
    return last_;
  }

  const std::vector<double>& point() const { return point_; }
  const std::vector<double>& grad() const { return grad_; }

 private:
  const FeatureMatrix& x_;
  const LabelVector& y_;
  const SampleWeights& w_;
  const LogisticParams& params_;
  std::span<const double> beta_;
  std::span<const double> dir_;
  std::vector<double> point_;
  std::vector<double> grad_;
  double last_alpha_ = std::numeric_limits<double>::quiet_NaN();
  std::pair<double, double> last_;
};

// Minimizer of the cubic interpolating (a, fa, da) and (b, fb, db), kept
// at least a tenth of the bracket away from either end.
double cubic_step(double a, double fa, double da, double b, double fb, double db) {
  const double d1 = da + db - 3.0 * (fa - fb) / (a - b);
  const double disc = d1 * d1 - da * db;
  double t = 0.5 * (a + b);
  if (disc >= 0.0) {
    const double d2 = std::copysign(std::sqrt(disc), b - a);
    const double denom = db - da + 2.0 * d2;
    if (denom != 0.0) t = b - (b - a) * (db + d2 - d1) / denom;
  }
  const double lo = std::min(a, b);
  const double hi = std::max(a, b);
  const double margin = 0.1 * (hi - lo);
  if (!std::isfinite(t)) return 0.5 * (a + b);
  return std::clamp(t, lo + margin, hi - margin);
}

struct LineResult {
  bool ok = false;
  double alpha = 0.0;
  double f = 0.0;
};

// Strong-Wolfe line search (bracketing phase + zoom).
LineResult strong_wolfe(LineFunction& phi, double f0, double d0, double alpha1) {
  constexpr double kC1 = 1e-4;
  constexpr double kC2 = 0.9;
  constexpr int kMaxEvals = 20;

  // Best Armijo point seen, used when the curvature condition never holds.
  LineResult best;
  auto remember = [&](double alpha, double f) {
    if (!best.ok || f < best.f) best = {true, alpha, f};
  };

  double a_prev = 0.0;
  double f_prev = f0;
  double d_prev = d0;
  double alpha = alpha1;
  int evals = 0;

  auto zoom = [&](double lo, double f_lo, double d_lo, double hi, double f_hi,
                  double d_hi) -> LineResult {
    while (evals < kMaxEvals) {
      const double a = cubic_step(lo, f_lo, d_lo, hi, f_hi, d_hi);
      auto [fa, da] = phi(a);
      ++evals;
      if (!std::isfinite(fa) || fa > f0 + kC1 * a * d0 || fa >= f_lo) {
        hi = a;
        f_hi = fa;
        d_hi = da;
      } else {
        if (std::abs(da) <= -kC2 * d0) return {true, a, fa};
        if (da * (hi - lo) >= 0.0) {
          hi = lo;
          f_hi = f_lo;
          d_hi = d_lo;
        }
        lo = a;
        f_lo = fa;
        d_lo = da;
        remember(a, fa);
      }
      if (std::abs(hi - lo) <= 1e-16 * std::max(1.0, std::abs(lo))) break;
    }
    return {false, lo, f_lo};
  };

  while (evals < kMaxEvals) {
    auto [f, d] = phi(alpha);
    ++evals;
    if (!std::isfinite(f) || f > f0 + kC1 * alpha * d0 ||
        (evals > 1 && f >= f_prev)) {
      if (!std::isfinite(f)) {
        // Shrink until the objective is finite again before zooming.
        alpha = a_prev + 0.5 * (alpha - a_prev);
        continue;
      }
      auto r = zoom(a_prev, f_prev, d_prev, alpha, f, d);
      if (r.ok || r.f < f0) return {true, r.alpha, r.f};
      return r;
    }
    remember(alpha, f);
    if (std::abs(d) <= -kC2 * d0) return {true, alpha, f};
    if (d >= 0.0) {
      auto r = zoom(alpha, f, d, a_prev, f_prev, d_prev);
      if (r.ok || r.f < f0) return {true, r.alpha, r.f};
      return r;
    }
    a_prev = alpha;
    f_prev = f;
    d_prev = d;
    alpha *= 2.0;
  }
  if (best.ok && best.f < f0) return best;
  return {};
}

}  // namespace

TrainedModel fit_logistic(const FeatureMatrix& x, const LabelVector& y,
                          const SampleWeights& weights,
                          const LogisticParams& params) {
  params.validate();
  check_training_inputs(x, y, weights);
  const bool has0 = std::find(y.begin(), y.end(), 0) != y.end();
  const bool has1 = std::find(y.begin(), y.end(), 1) != y.end();
  if (!has0 || !has1) throw Error(Errc::kFit, "logistic regression needs both classes");

  constexpr std::size_t kMemory = 10;
  const auto dim = x.cols() + 1;
  std::vector<double> beta(dim, 0.0);
  std::vector<double> grad(dim);
  double f = logistic_objective(x, y, weights, params, beta, grad);

  std::deque<std::vector<double>> s_hist;
  std::deque<std::vector<double>> y_hist;
  std::deque<double> rho_hist;
  std::vector<double> dir(dim);
  std::vector<double> alpha_buf(kMemory);

  int iter = 0;
  while (iter < params.max_iter && inf_norm(grad) > params.tol) {
    ++iter;
    // Two-loop recursion: dir = -H * grad.
    std::vector<double> q = grad;
    const auto m = s_hist.size();
    for (std::size_t i = m; i-- > 0;) {
      alpha_buf[i] = rho_hist[i] * dot(s_hist[i], q);
      for (std::size_t j = 0; j < dim; ++j) q[j] -= alpha_buf[i] * y_hist[i][j];
    }
    double gamma = 1.0;
    if (m > 0) {
      gamma = dot(s_hist.back(), y_hist.back()) / dot(y_hist.back(), y_hist.back());
    }
    for (auto& v : q) v *= gamma;
    for (std::size_t i = 0; i < m; ++i) {
      const double b = rho_hist[i] * dot(y_hist[i], q);
      for (std::size_t j = 0; j < dim; ++j) q[j] += s_hist[i][j] * (alpha_buf[i] - b);
    }
    for (std::size_t j = 0; j < dim; ++j) dir[j] = -q[j];

    double d0 = dot(grad, dir);
    if (!(d0 < 0.0)) {
      // Not a descent direction: restart from steepest descent.
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      for (std::size_t j = 0; j < dim; ++j) dir[j] = -grad[j];
      d0 = dot(grad, dir);
    }
    const double alpha0 =
        s_hist.empty() ? std::min(1.0, 1.0 / std::sqrt(dot(grad, grad))) : 1.0;

    LineFunction phi(x, y, weights, params, beta, dir);
    const auto step = strong_wolfe(phi, f, d0, alpha0);
    if (!step.ok || !(step.f <= f)) {
      // Stale curvature pairs can make the direction useless on badly scaled
      // data; retry once from steepest descent before giving up.
      if (s_hist.empty()) break;
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      continue;
    }
    // Re-evaluate at the accepted step so point and gradient match it.
    phi(step.alpha);
    std::vector<double> s(dim);
    std::vector<double> yv(dim);
    for (std::size_t j = 0; j < dim; ++j) {
      s[j] = phi.point()[j] - beta[j];
      yv[j] = phi.grad()[j] - grad[j];
    }
    const double f_new = step.f;
    beta = phi.point();
    grad = phi.grad();
    const double sy = dot(s, yv);
    if (sy > 1e-12 * dot(yv, yv)) {
      if (s_hist.size() == kMemory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(yv));
      rho_hist.push_back(1.0 / sy);
    }
    const bool stalled = f - f_new <= 1e-15 * std::max({std::abs(f), std::abs(f_new), 1.0});
    f = f_new;
    if (stalled) break;
  }

  LogisticModel model;
  model.coefficients.assign(beta.begin(), beta.end() - 1);
  model.intercept = params.fit_intercept ? beta.back() : 0.0;
  model.params = params;
  model.iterations = iter;
  model.grad_norm = inf_norm(grad);
  return TrainedModel{model, column_names(x.cols())};
}

}  // namespace fraudlab
