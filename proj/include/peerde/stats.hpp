#pragma once

//
// Binary and ordered logit likelihoods on the latent-variable formulation,
// rank-based AUC, the likelihood-ratio test, and model fitting by
// differential evolution.
//

#include <optional>
#include <span>
#include <vector>

#include "peerde/de.hpp"
#include "peerde/model_spec.hpp"
#include "peerde/survey.hpp"

namespace peerde::stats {

// Logistic CDF 1/(1 + e^-z), overflow-safe for large |z|.
double logistic_cdf(double z);

// log of the logistic CDF, stable for large negative z.
double log_logistic_cdf(double z);

// Bernoulli-logit log-likelihood. X is n x (k+1) with a leading ones
// column, beta has k+1 entries (intercept first), y in {0,1}.
double binary_loglik(std::span<const double> beta, const Matrix& x,
                     std::span<const int> y);

// Strictly increasing thresholds discretizing the latent variable.
class Cutpoints {
 public:
  explicit Cutpoints(std::vector<double> tau);  // validates ordering
  const std::vector<double>& values() const { return tau_; }
  int categories() const { return static_cast<int>(tau_.size()) + 1; }

 private:
  std::vector<double> tau_;
};

// Ordered-logit log-likelihood: P(y = c) = F(tau_c - x'b) - F(tau_{c-1} - x'b)
// with tau_{-1} = -inf and tau_{C-1} = +inf. x_slopes has no intercept
// column; slopes has one entry per column; y holds categories 0..C-1.
double ordered_loglik(std::span<const double> slopes, const Cutpoints& tau,
                      const Matrix& x_slopes, std::span<const int> y);

// Per-category probabilities for one observation (linear predictor eta).
std::vector<double> ordered_probabilities(double eta, const Cutpoints& tau);

// Mann-Whitney AUC; a score tie between a positive and a negative counts
// one half. Throws DegenerateModelError when labels are single-class.
double auc(std::span<const double> scores, std::span<const int> labels);

// Regularized upper incomplete gamma Q(a, x), relative tolerance ~1e-10.
double regularized_gamma_q(double a, double x);

// Upper tail of the chi-square distribution with df degrees of freedom.
double chi_square_sf(double x, int df);

struct LrTest {
  double statistic = 0.0;
  double p_value = 1.0;
};

// Likelihood-ratio test of the full model against the null. Throws
// InconsistentFitError when full_ll < null_ll beyond 1e-9.
LrTest lr_test(double full_ll, double null_ll, int df);

// Share of exact prediction matches, in percent. Binary rule: p >= 0.5;
// ordered rule: argmax category probability.
double percent_correct_binary(std::span<const double> beta, const Matrix& x,
                              std::span<const int> y);
double percent_correct_ordered(std::span<const double> slopes,
                               const Cutpoints& tau, const Matrix& x_slopes,
                               std::span<const int> y);

struct FitResult {
  ModelSpec spec;
  // Binary: intercept first, then one slope per regressor.
  // Ordered: slopes only; the intercept role moves into the cutpoints.
  std::vector<double> coefficients;
  std::optional<Cutpoints> cutpoints;
  double log_likelihood = 0.0;
  double null_log_likelihood = 0.0;
  double lr_statistic = 0.0;
  double lr_p_value = 1.0;
  double percent_correct = 0.0;
  std::optional<double> auc;  // binary models only
  std::size_t n = 0;
  de::DEConfig de_config;  // echoed for reproducibility
};

// Maps a DE search vector for an ordered model onto slopes + cutpoints.
// theta = [slopes..., tau_0, delta_1..delta_{C-2}] with
// tau_m = tau_{m-1} + exp(delta_m), which keeps the ordering strict inside
// an unconstrained box.
Cutpoints cutpoints_from_offsets(std::span<const double> raw, int categories);

// Fits the model by differential evolution over the coefficient box
// [-coef_bound, coef_bound] per component. The null model (intercept-only
// or cutpoints-only) is fitted with the same DE budget; its criterion is
// always the log-likelihood.
FitResult fit(const ModelSpec& spec, const survey::Dataset& ds,
              const de::DEConfig& de_config,
              Criterion criterion = Criterion::NegLogLikelihood,
              double coef_bound = 10.0);

// Same, but starting from prepared design data.
FitResult fit_design(const ModelSpec& spec, const DesignData& data,
                     const de::DEConfig& de_config,
                     Criterion criterion = Criterion::NegLogLikelihood,
                     double coef_bound = 10.0);

}  // namespace peerde::stats
