#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "lcmine/error.hpp"

namespace lcmine {

/// Radical-inverse sequence for a prime base, with the first burn_in
/// elements dropped. All values lie strictly in (0,1).
std::vector<double> halton(int base, std::size_t n, std::size_t burn_in = 0);

/// Overflow-safe logistic function.
double logit_prob(double linear_index);

struct ChoiceDataset {
  std::vector<std::string> feature_names;
  std::vector<std::vector<double>> x;  // one row per observation
  std::vector<int> y;                  // 0/1

  std::size_t size() const { return y.size(); }
  /// Throws unless rows are rectangular, finite, and y is binary.
  void validate() const;
  std::size_t feature_index(const std::string& name) const;
};

struct LogitSpec {
  std::vector<std::string> fixed_features;
  std::vector<std::string> random_features;  // normally mixed coefficients
  bool include_constant = true;
  std::size_t draws = 200;
  std::size_t halton_burn_in = 10;
};

enum class ParameterKind { fixed, random_mean, constant, random_sd };

struct ParameterEstimate {
  std::string name;
  ParameterKind kind = ParameterKind::fixed;
  double value = 0.0;
  double std_error = 0.0;
};

struct LogitFit {
  std::vector<ParameterEstimate> estimates;
  double ll_converged = 0.0;
  double ll_constant = 0.0;
  double rho2 = 0.0;
  std::vector<std::vector<double>> covariance;
  bool converged = false;
  int iterations = 0;
  double gradient_norm = 0.0;
  std::vector<std::string> warnings;
};

/// Precomputed likelihood machinery for one (data, spec) pair: resolved
/// feature columns, quasi-random normal draws (fixed per observation index
/// across all evaluations), and the parameter layout
/// [fixed..., random means..., constant?, random sds...].
class LogitProblem {
 public:
  LogitProblem(const ChoiceDataset& data, const LogitSpec& spec);

  std::size_t parameter_count() const { return n_params_; }
  std::size_t draw_count() const { return draws_; }
  std::vector<std::string> parameter_names() const;
  std::vector<ParameterKind> parameter_kinds() const;

  double loglik(std::span<const double> params) const;
  double loglik_grad(std::span<const double> params, std::span<double> grad_out) const;

  /// Simulated choice probability P(y=1 | x_i) at the given parameters.
  double predicted_prob(std::span<const double> params, std::size_t row) const;
  /// Probability of y=1 under one specific draw.
  double per_draw_prob(std::span<const double> params, std::size_t row, std::size_t d) const;

  const ChoiceDataset& data() const { return data_; }
  const LogitSpec& spec() const { return spec_; }
  /// Normal draw for (random feature r, observation i, draw d).
  double draw(std::size_t r, std::size_t i, std::size_t d) const;

 private:
  const ChoiceDataset& data_;
  LogitSpec spec_;
  std::vector<std::size_t> fixed_cols_;
  std::vector<std::size_t> random_cols_;
  std::size_t draws_ = 1;
  std::size_t n_params_ = 0;
  std::vector<std::vector<double>> normal_draws_;  // per random feature, n*draws

  double linear_index(std::span<const double> params, std::size_t row, std::size_t d) const;
};

/// Sum over rows of the log simulated likelihood (Halton-draw average of
/// the logistic likelihood).
double simulated_loglik(std::span<const double> params, const ChoiceDataset& data,
                        const LogitSpec& spec);

/// Maximizes the simulated log-likelihood by BFGS with backtracking line
/// search from a zero start (sds start at 0.1). Standard errors come from
/// the inverse numerical Hessian at convergence.
LogitFit estimate(const ChoiceDataset& data, const LogitSpec& spec);

/// P(coefficient > 0) for a normally mixed coefficient.
double positive_share(double mean, double sd);

/// McFadden fit measure 1 - ll_converged/ll_constant.
double rho_squared(double ll_converged, double ll_constant);

struct MarginalEffect {
  std::string name;
  double value = 0.0;
  bool random = false;
};

/// Average-of-effects marginal effects; random coefficients additionally
/// average over the draws.
std::vector<MarginalEffect> marginal_effects(const LogitFit& fit, const ChoiceDataset& data,
                                             const LogitSpec& spec);

}  // namespace lcmine
