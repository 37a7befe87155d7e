#include "lcmine/logit.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "lcmine/mathutil.hpp"

namespace lcmine {

std::vector<double> halton(int base, std::size_t n, std::size_t burn_in) {
  if (base < 2) fail(ErrorKind::parameter, "halton base must be a prime >= 2");
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t k = burn_in + 1; k <= burn_in + n; ++k) {
    double value = 0.0;
    double f = 1.0 / base;
    std::size_t index = k;
    while (index > 0) {
      value += f * (index % base);
      index /= base;
      f /= base;
    }
    out.push_back(value);
  }
  return out;
}

double logit_prob(double linear_index) {
  if (linear_index >= 0) {
    return 1.0 / (1.0 + std::exp(-linear_index));
  }
  const double e = std::exp(linear_index);
  return e / (1.0 + e);
}

void ChoiceDataset::validate() const {
  if (x.size() != y.size()) {
    fail(ErrorKind::integrity, "choice dataset: feature rows and outcomes differ in length");
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i].size() != feature_names.size()) {
      fail(ErrorKind::integrity,
           "choice dataset: row " + std::to_string(i) + " has wrong feature count");
    }
    if (y[i] != 0 && y[i] != 1) {
      fail(ErrorKind::integrity, "choice dataset: outcome must be 0/1 at row " +
                                     std::to_string(i));
    }
    for (double v : x[i]) {
      if (!std::isfinite(v)) {
        fail(ErrorKind::numeric, "choice dataset: non-finite feature value at row " +
                                     std::to_string(i));
      }
    }
  }
}

std::size_t ChoiceDataset::feature_index(const std::string& name) const {
  for (std::size_t k = 0; k < feature_names.size(); ++k) {
    if (feature_names[k] == name) return k;
  }
  fail(ErrorKind::parameter, "unknown feature '" + name + "'");
}

namespace {

constexpr int kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29,
                           31, 37, 41, 43, 47, 53, 59, 61, 67, 71};

}  // namespace

LogitProblem::LogitProblem(const ChoiceDataset& data, const LogitSpec& spec)
    : data_(data), spec_(spec) {
  data.validate();
  if (spec.draws < 1) fail(ErrorKind::parameter, "spec.draws must be >= 1");
  for (const auto& f : spec.fixed_features) {
    for (const auto& r : spec.random_features) {
      if (f == r) {
        fail(ErrorKind::parameter, "feature '" + f + "' listed as both fixed and random");
      }
    }
  }
  if (spec.random_features.size() > std::size(kPrimes)) {
    fail(ErrorKind::parameter, "too many random features for the built-in prime table");
  }
  for (const auto& name : spec.fixed_features) fixed_cols_.push_back(data.feature_index(name));
  for (const auto& name : spec.random_features) random_cols_.push_back(data.feature_index(name));

  draws_ = spec.random_features.empty() ? 1 : spec.draws;
  n_params_ = fixed_cols_.size() + 2 * random_cols_.size() + (spec.include_constant ? 1 : 0);

  // One Halton stream per random feature; observation i owns the slice
  // [i*draws, (i+1)*draws), so the draws are fixed per observation index
  // across every likelihood evaluation.
  normal_draws_.resize(random_cols_.size());
  for (std::size_t r = 0; r < random_cols_.size(); ++r) {
    auto uniform = halton(kPrimes[r], data.size() * draws_, spec.halton_burn_in);
    auto& z = normal_draws_[r];
    z.resize(uniform.size());
    for (std::size_t k = 0; k < uniform.size(); ++k) z[k] = normal_quantile(uniform[k]);
  }
}

std::vector<std::string> LogitProblem::parameter_names() const {
  std::vector<std::string> names;
  for (const auto& f : spec_.fixed_features) names.push_back(f);
  for (const auto& r : spec_.random_features) names.push_back(r);
  if (spec_.include_constant) names.push_back("constant");
  for (const auto& r : spec_.random_features) names.push_back("sd(" + r + ")");
  return names;
}

std::vector<ParameterKind> LogitProblem::parameter_kinds() const {
  std::vector<ParameterKind> kinds;
  kinds.insert(kinds.end(), fixed_cols_.size(), ParameterKind::fixed);
  kinds.insert(kinds.end(), random_cols_.size(), ParameterKind::random_mean);
  if (spec_.include_constant) kinds.push_back(ParameterKind::constant);
  kinds.insert(kinds.end(), random_cols_.size(), ParameterKind::random_sd);
  return kinds;
}

double LogitProblem::draw(std::size_t r, std::size_t i, std::size_t d) const {
  return normal_draws_[r][i * draws_ + d];
}

double LogitProblem::linear_index(std::span<const double> params, std::size_t row,
                                  std::size_t d) const {
  const std::vector<double>& xi = data_.x[row];
  const std::size_t F = fixed_cols_.size();
  const std::size_t R = random_cols_.size();
  const std::size_t const_pos = F + R;
  const std::size_t sd_pos = const_pos + (spec_.include_constant ? 1 : 0);

  double z = spec_.include_constant ? params[const_pos] : 0.0;
  for (std::size_t k = 0; k < F; ++k) z += params[k] * xi[fixed_cols_[k]];
  for (std::size_t r = 0; r < R; ++r) {
    const double coef = params[F + r] + params[sd_pos + r] * draw(r, row, d);
    z += coef * xi[random_cols_[r]];
  }
  return z;
}

double LogitProblem::loglik(std::span<const double> params) const {
  if (params.size() != n_params_) {
    fail(ErrorKind::parameter, "parameter vector has wrong length");
  }
  double ll = 0.0;
  for (std::size_t i = 0; i < data_.size(); ++i) {
    double p_sum = 0.0;
    for (std::size_t d = 0; d < draws_; ++d) {
      const double sig = logit_prob(linear_index(params, i, d));
      p_sum += data_.y[i] == 1 ? sig : 1.0 - sig;
    }
    const double p = p_sum / static_cast<double>(draws_);
    if (!(p > 0.0) || !std::isfinite(p)) {
      fail(ErrorKind::numeric,
           "simulated likelihood vanished at observation " + std::to_string(i));
    }
    ll += std::log(p);
  }
  return ll;
}

double LogitProblem::loglik_grad(std::span<const double> params,
                                 std::span<double> grad_out) const {
  if (params.size() != n_params_ || grad_out.size() != n_params_) {
    fail(ErrorKind::parameter, "parameter/gradient vector has wrong length");
  }
  std::fill(grad_out.begin(), grad_out.end(), 0.0);
  const std::size_t F = fixed_cols_.size();
  const std::size_t R = random_cols_.size();
  const std::size_t const_pos = F + R;
  const std::size_t sd_pos = const_pos + (spec_.include_constant ? 1 : 0);

  std::vector<double> dp(n_params_);
  double ll = 0.0;
  for (std::size_t i = 0; i < data_.size(); ++i) {
    const std::vector<double>& xi = data_.x[i];
    const double sign = data_.y[i] == 1 ? 1.0 : -1.0;
    double p_sum = 0.0;
    std::fill(dp.begin(), dp.end(), 0.0);
    for (std::size_t d = 0; d < draws_; ++d) {
      const double sig = logit_prob(linear_index(params, i, d));
      p_sum += data_.y[i] == 1 ? sig : 1.0 - sig;
      const double w = sign * sig * (1.0 - sig);  // d p_d / d z
      for (std::size_t k = 0; k < F; ++k) dp[k] += w * xi[fixed_cols_[k]];
      for (std::size_t r = 0; r < R; ++r) {
        const double xr = xi[random_cols_[r]];
        dp[F + r] += w * xr;
        dp[sd_pos + r] += w * xr * draw(r, i, d);
      }
      if (spec_.include_constant) dp[const_pos] += w;
    }
    const double p = p_sum / static_cast<double>(draws_);
    if (!(p > 0.0) || !std::isfinite(p)) {
      fail(ErrorKind::numeric,
           "simulated likelihood vanished at observation " + std::to_string(i));
    }
    ll += std::log(p);
    const double scale = 1.0 / p_sum;  // (1/p)*(1/draws) * draws
    for (std::size_t k = 0; k < n_params_; ++k) grad_out[k] += scale * dp[k];
  }
  return ll;
}

double LogitProblem::predicted_prob(std::span<const double> params, std::size_t row) const {
  double p_sum = 0.0;
  for (std::size_t d = 0; d < draws_; ++d) {
    p_sum += logit_prob(linear_index(params, row, d));
  }
  return p_sum / static_cast<double>(draws_);
}

double LogitProblem::per_draw_prob(std::span<const double> params, std::size_t row,
                                   std::size_t d) const {
  return logit_prob(linear_index(params, row, d));
}

double simulated_loglik(std::span<const double> params, const ChoiceDataset& data,
                        const LogitSpec& spec) {
  return LogitProblem(data, spec).loglik(params);
}

namespace {

struct BfgsResult {
  std::vector<double> x;
  double value = 0.0;  // maximized objective
  bool converged = false;
  int iterations = 0;
  double grad_norm = 0.0;
};

/// BFGS ascent with backtracking line search. Stops when the gradient
/// max-norm drops below grad_tol or the relative objective change below
/// rel_tol.
BfgsResult bfgs_maximize(
    const std::function<double(std::span<const double>, std::span<double>)>& value_and_grad,
    std::vector<double> x0, int max_iterations = 500, double grad_tol = 1e-5,
    double rel_tol = 1e-9) {
  const std::size_t n = x0.size();
  std::vector<double> h(n * n, 0.0);  // approximate inverse Hessian of -f
  for (std::size_t i = 0; i < n; ++i) h[i * n + i] = 1.0;

  std::vector<double> x = std::move(x0);
  std::vector<double> g(n), g_new(n), direction(n), x_new(n), s(n), yv(n), hy(n);
  double f = value_and_grad(x, g);
  int small_changes = 0;  // consecutive sub-tolerance objective changes

  BfgsResult result;
  auto max_norm = [&](const std::vector<double>& v) {
    double m = 0.0;
    for (double value : v) m = std::max(m, std::abs(value));
    return m;
  };

  for (int iter = 0; iter < max_iterations; ++iter) {
    result.iterations = iter;
    result.grad_norm = max_norm(g);
    if (result.grad_norm < grad_tol) {
      result.converged = true;
      break;
    }

    // Ascent direction H*g; reset to steepest ascent when not uphill.
    for (std::size_t i = 0; i < n; ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < n; ++j) sum += h[i * n + j] * g[j];
      direction[i] = sum;
    }
    double dg = 0.0;
    for (std::size_t i = 0; i < n; ++i) dg += direction[i] * g[i];
    if (dg <= 0.0) {
      std::fill(h.begin(), h.end(), 0.0);
      for (std::size_t i = 0; i < n; ++i) h[i * n + i] = 1.0;
      direction = g;
      dg = 0.0;
      for (std::size_t i = 0; i < n; ++i) dg += g[i] * g[i];
    }

    double alpha = 1.0;
    double f_new = f;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t i = 0; i < n; ++i) x_new[i] = x[i] + alpha * direction[i];
      bool ok = true;
      try {
        f_new = value_and_grad(x_new, g_new);
      } catch (const Error&) {
        ok = false;  // stepped into a numerically dead region; shrink
      }
      if (ok && f_new >= f + 1e-4 * alpha * dg) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
      if (alpha < 1e-18) break;
    }
    if (!accepted) {
      // No uphill step available at line-search resolution.
      result.converged = result.grad_norm < 1e-3;
      break;
    }

    const double rel_change = std::abs(f_new - f) / std::max(1.0, std::abs(f_new));
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = x_new[i] - x[i];
      yv[i] = -(g_new[i] - g[i]);  // gradient change of -f
    }
    double ys = 0.0;
    for (std::size_t i = 0; i < n; ++i) ys += yv[i] * s[i];
    if (ys > 1e-12) {
      const double rho = 1.0 / ys;
      // H <- (I - rho s y') H (I - rho y s') + rho s s'
      for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) sum += h[i * n + j] * yv[j];
        hy[i] = sum;
      }
      double yhy = 0.0;
      for (std::size_t i = 0; i < n; ++i) yhy += yv[i] * hy[i];
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          h[i * n + j] += -rho * (s[i] * hy[j] + hy[i] * s[j]) +
                          rho * rho * yhy * s[i] * s[j] + rho * s[i] * s[j];
        }
      }
    }
    x = x_new;
    g = g_new;
    f = f_new;
    // One near-zero change can be a cautious line-search step; two in a
    // row means the quadratic model has converged.
    small_changes = rel_change < rel_tol ? small_changes + 1 : 0;
    if (small_changes >= 2) {
      result.converged = true;
      result.iterations = iter + 1;
      result.grad_norm = max_norm(g);
      break;
    }
  }
  result.x = std::move(x);
  result.value = f;
  result.grad_norm = max_norm(g);
  return result;
}

double constant_only_loglik(const ChoiceDataset& data) {
  std::size_t ones = 0;
  for (int v : data.y) ones += v;
  const double n = static_cast<double>(data.size());
  const double p = static_cast<double>(ones) / n;
  if (p <= 0.0 || p >= 1.0) {
    fail(ErrorKind::precondition, "both outcome classes must be present");
  }
  return ones * std::log(p) + (n - ones) * std::log(1.0 - p);
}

void check_separation(const ChoiceDataset& data, const std::vector<std::string>& features,
                      std::vector<std::string>& warnings) {
  for (const auto& name : features) {
    const std::size_t col = data.feature_index(name);
    double min1 = std::numeric_limits<double>::infinity();
    double max1 = -min1;
    double min0 = min1, max0 = -min1;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double v = data.x[i][col];
      if (data.y[i] == 1) {
        min1 = std::min(min1, v);
        max1 = std::max(max1, v);
      } else {
        min0 = std::min(min0, v);
        max0 = std::max(max0, v);
      }
    }
    if (max0 < min1 || max1 < min0) {
      warnings.push_back("feature '" + name + "' perfectly separates the outcome");
    }
  }
}

}  // namespace

LogitFit estimate(const ChoiceDataset& data, const LogitSpec& spec) {
  LogitProblem problem(data, spec);
  const std::size_t n = problem.parameter_count();
  const auto kinds = problem.parameter_kinds();
  const auto names = problem.parameter_names();

  LogitFit fit;
  fit.ll_constant = constant_only_loglik(data);
  std::vector<std::string> used = spec.fixed_features;
  used.insert(used.end(), spec.random_features.begin(), spec.random_features.end());
  check_separation(data, used, fit.warnings);

  std::vector<double> x0(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    if (kinds[k] == ParameterKind::random_sd) x0[k] = 0.1;
  }

  auto objective = [&](std::span<const double> params, std::span<double> grad) {
    return problem.loglik_grad(params, grad);
  };

  BfgsResult opt = bfgs_maximize(objective, x0);
  // The mixing density is symmetric in the sd sign; report the positive
  // representative and re-polish there so the stored likelihood matches.
  bool flipped = false;
  for (std::size_t k = 0; k < n; ++k) {
    if (kinds[k] == ParameterKind::random_sd && opt.x[k] < 0) {
      opt.x[k] = -opt.x[k];
      flipped = true;
    }
  }
  if (flipped) {
    const int first_stage_iterations = opt.iterations;
    opt = bfgs_maximize(objective, opt.x);
    opt.iterations += first_stage_iterations;
  }

  fit.converged = opt.converged;
  fit.iterations = opt.iterations;
  fit.gradient_norm = opt.grad_norm;
  fit.ll_converged = opt.value;
  fit.rho2 = rho_squared(fit.ll_converged, fit.ll_constant);
  if (!opt.converged) {
    fit.warnings.push_back("optimizer stopped before reaching tolerance (gradient norm " +
                           std::to_string(opt.grad_norm) + ")");
  }

  // Covariance from the inverse negative numerical Hessian (central
  // differences of the analytic gradient).
  std::vector<double> hessian(n * n, 0.0);
  std::vector<double> gp(n), gm(n), theta = opt.x;
  for (std::size_t k = 0; k < n; ++k) {
    const double h = 1e-4 * std::max(1.0, std::abs(theta[k]));
    theta[k] = opt.x[k] + h;
    problem.loglik_grad(theta, gp);
    theta[k] = opt.x[k] - h;
    problem.loglik_grad(theta, gm);
    theta[k] = opt.x[k];
    for (std::size_t l = 0; l < n; ++l) {
      hessian[k * n + l] += (gp[l] - gm[l]) / (2.0 * h);
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t l = k + 1; l < n; ++l) {
      const double sym = 0.5 * (hessian[k * n + l] + hessian[l * n + k]);
      hessian[k * n + l] = sym;
      hessian[l * n + k] = sym;
    }
    for (std::size_t l = 0; l < n; ++l) hessian[k * n + l] = -hessian[k * n + l];
  }
  std::vector<double> cov;
  const bool invertible = invert_matrix(hessian, n, cov);
  if (!invertible) {
    fit.warnings.push_back("information matrix singular; standard errors unavailable");
  }

  fit.covariance.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t k = 0; k < n && invertible; ++k) {
    for (std::size_t l = 0; l < n; ++l) fit.covariance[k][l] = cov[k * n + l];
  }
  bool nonpd = false;
  for (std::size_t k = 0; k < n; ++k) {
    ParameterEstimate est;
    est.name = names[k];
    est.kind = kinds[k];
    est.value = opt.x[k];
    const double var = invertible ? cov[k * n + k] : 0.0;
    if (invertible && var <= 0) nonpd = true;
    est.std_error = var > 0 ? std::sqrt(var) : 0.0;
    fit.estimates.push_back(est);
  }
  if (nonpd) {
    fit.warnings.push_back(
        "information matrix not positive definite; some standard errors unavailable");
  }
  return fit;
}

double positive_share(double mean, double sd) {
  if (!(sd > 0)) fail(ErrorKind::parameter, "positive_share requires sd > 0");
  return normal_cdf(mean / sd);
}

double rho_squared(double ll_converged, double ll_constant) {
  if (ll_constant == 0.0) {
    fail(ErrorKind::parameter, "rho_squared undefined for zero baseline log-likelihood");
  }
  return 1.0 - ll_converged / ll_constant;
}

std::vector<MarginalEffect> marginal_effects(const LogitFit& fit, const ChoiceDataset& data,
                                             const LogitSpec& spec) {
  LogitProblem problem(data, spec);
  const std::size_t n = problem.parameter_count();
  if (fit.estimates.size() != n) {
    fail(ErrorKind::parameter, "fit does not match the supplied data/spec");
  }
  std::vector<double> params(n);
  for (std::size_t k = 0; k < n; ++k) params[k] = fit.estimates[k].value;

  const std::size_t F = spec.fixed_features.size();
  const std::size_t R = spec.random_features.size();
  const std::size_t sd_pos = F + R + (spec.include_constant ? 1 : 0);
  const std::size_t rows = data.size();
  const std::size_t draws = problem.draw_count();

  std::vector<MarginalEffect> effects;
  for (std::size_t k = 0; k < F; ++k) {
    double sum = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
      const double p = problem.predicted_prob(params, i);
      sum += params[k] * p * (1.0 - p);
    }
    effects.push_back(MarginalEffect{spec.fixed_features[k], sum / rows, false});
  }
  for (std::size_t r = 0; r < R; ++r) {
    double sum = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
      // Per-draw coefficient and per-draw probability, then averaged.
      double inner = 0.0;
      for (std::size_t d = 0; d < draws; ++d) {
        const double coef = params[F + r] + params[sd_pos + r] * problem.draw(r, i, d);
        const double p = problem.per_draw_prob(params, i, d);
        inner += coef * p * (1.0 - p);
      }
      sum += inner / static_cast<double>(draws);
    }
    effects.push_back(MarginalEffect{spec.random_features[r], sum / rows, true});
  }
  return effects;
}

}  // namespace lcmine
