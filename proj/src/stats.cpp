#include "peerde/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "peerde/errors.hpp"
#include "peerde/objectives.hpp"

namespace peerde::stats {

double logistic_cdf(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double log_logistic_cdf(double z) {
  if (z >= 0.0) return -std::log1p(std::exp(-z));
  return z - std::log1p(std::exp(z));
}

namespace {

// log(1 + e^z), stable on both tails.
double softplus(double z) {
  if (z > 0.0) return z + std::log1p(std::exp(-z));
  return std::log1p(std::exp(z));
}

double dot_row(std::span<const double> row, std::span<const double> coef) {
  double z = 0.0;
  for (std::size_t j = 0; j < row.size(); ++j) z += row[j] * coef[j];
  return z;
}

// log(F(b) - F(a)) for b > a without cancellation:
// F(b) - F(a) = F(b) F(-a) (1 - e^{-(b-a)}).
double log_cdf_difference(double b, double a) {
  return log_logistic_cdf(b) + log_logistic_cdf(-a) +
         std::log(-std::expm1(a - b));
}

}  // namespace

double binary_loglik(std::span<const double> beta, const Matrix& x,
                     std::span<const int> y) {
  if (beta.size() != x.cols)
    throw std::invalid_argument("beta length does not match design columns");
  if (y.size() != x.rows)
    throw std::invalid_argument("response length does not match design rows");
  double ll = 0.0;
  for (std::size_t i = 0; i < x.rows; ++i) {
    const double z = dot_row(x.row(i), beta);
    ll += static_cast<double>(y[i]) * z - softplus(z);
  }
  return ll;
}

Cutpoints::Cutpoints(std::vector<double> tau) : tau_(std::move(tau)) {
  if (tau_.empty()) throw std::invalid_argument("cutpoints must be non-empty");
  for (std::size_t m = 0; m + 1 < tau_.size(); ++m) {
    if (!(tau_[m] < tau_[m + 1]))
      throw std::invalid_argument("cutpoints must be strictly increasing");
  }
}

double ordered_loglik(std::span<const double> slopes, const Cutpoints& tau,
                      const Matrix& x_slopes, std::span<const int> y) {
  if (slopes.size() != x_slopes.cols)
    throw std::invalid_argument("slope count does not match design columns");
  if (y.size() != x_slopes.rows)
    throw std::invalid_argument("response length does not match design rows");
  const auto& t = tau.values();
  const int categories = tau.categories();
  double ll = 0.0;
  for (std::size_t i = 0; i < x_slopes.rows; ++i) {
    const int c = y[i];
    if (c < 0 || c >= categories)
      throw std::invalid_argument("category out of range");
    const double eta = dot_row(x_slopes.row(i), slopes);
    if (c == 0) {
      ll += log_logistic_cdf(t.front() - eta);
    } else if (c == categories - 1) {
      ll += log_logistic_cdf(eta - t.back());
    } else {
      ll += log_cdf_difference(t[static_cast<std::size_t>(c)] - eta,
                               t[static_cast<std::size_t>(c) - 1] - eta);
    }
  }
  return ll;
}

std::vector<double> ordered_probabilities(double eta, const Cutpoints& tau) {
  const auto& t = tau.values();
  const int categories = tau.categories();
  std::vector<double> p(static_cast<std::size_t>(categories));
  double prev = 0.0;
  for (int c = 0; c < categories - 1; ++c) {
    const double cdf = logistic_cdf(t[static_cast<std::size_t>(c)] - eta);
    p[static_cast<std::size_t>(c)] = cdf - prev;
    prev = cdf;
  }
  p[static_cast<std::size_t>(categories) - 1] = 1.0 - prev;
  return p;
}

double auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size())
    throw std::invalid_argument("scores and labels differ in length");
  const std::size_t n = scores.size();
  std::size_t positives = 0;
  for (int label : labels) {
    if (label != 0 && label != 1)
      throw std::invalid_argument("labels must be 0 or 1");
    positives += static_cast<std::size_t>(label);
  }
  if (positives == 0 || positives == n)
    throw DegenerateModelError("AUC undefined: single-class labels");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Average ranks within tied score groups, then the Mann-Whitney U from
  // the positive rank sum; ties get the half credit automatically.
  double positive_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * (static_cast<double>(i + 1) +
                                   static_cast<double>(j + 1));
    for (std::size_t k = i; k <= j; ++k)
      if (labels[order[k]] == 1) positive_rank_sum += avg_rank;
    i = j + 1;
  }
  const double np = static_cast<double>(positives);
  const double nn = static_cast<double>(n - positives);
  const double u = positive_rank_sum - np * (np + 1.0) / 2.0;
  return u / (np * nn);
}

namespace {

constexpr double kGammaTol = 1e-14;
constexpr int kGammaMaxIter = 500;

// Series expansion of P(a, x), accurate for x < a + 1.
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double term = sum;
  for (int it = 0; it < kGammaMaxIter; ++it) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * kGammaTol) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction for Q(a, x), accurate for x >= a + 1 (Lentz).
double gamma_q_fraction(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int it = 1; it <= kGammaMaxIter; ++it) {
    const double an = -static_cast<double>(it) * (static_cast<double>(it) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kGammaTol) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double regularized_gamma_q(double a, double x) {
  if (!(a > 0.0) || x < 0.0)
    throw std::invalid_argument("gamma_q requires a > 0 and x >= 0");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_fraction(a, x);
}

double chi_square_sf(double x, int df) {
  if (df < 1) throw std::invalid_argument("df must be positive");
  if (x <= 0.0) return 1.0;
  return regularized_gamma_q(0.5 * static_cast<double>(df), 0.5 * x);
}

LrTest lr_test(double full_ll, double null_ll, int df) {
  if (df < 1) throw std::invalid_argument("df must be positive");
  if (full_ll < null_ll - 1e-9)
    throw InconsistentFitError(
        "full-model likelihood below the null: non-converged fit");
  LrTest result;
  result.statistic = std::max(0.0, 2.0 * (full_ll - null_ll));
  result.p_value = chi_square_sf(result.statistic, df);
  return result;
}

double percent_correct_binary(std::span<const double> beta, const Matrix& x,
                              std::span<const int> y) {
  if (x.rows == 0) throw EmptyDataError("no observations");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < x.rows; ++i) {
    const int predicted = logistic_cdf(dot_row(x.row(i), beta)) >= 0.5 ? 1 : 0;
    if (predicted == y[i]) ++correct;
  }
  return 100.0 * static_cast<double>(correct) / static_cast<double>(x.rows);
}

double percent_correct_ordered(std::span<const double> slopes,
                               const Cutpoints& tau, const Matrix& x_slopes,
                               std::span<const int> y) {
  if (x_slopes.rows == 0) throw EmptyDataError("no observations");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < x_slopes.rows; ++i) {
    const auto p = ordered_probabilities(dot_row(x_slopes.row(i), slopes), tau);
    const auto arg =
        std::max_element(p.begin(), p.end()) - p.begin();
    if (static_cast<int>(arg) == y[i]) ++correct;
  }
  return 100.0 * static_cast<double>(correct) /
         static_cast<double>(x_slopes.rows);
}

Cutpoints cutpoints_from_offsets(std::span<const double> raw, int categories) {
  if (static_cast<int>(raw.size()) != categories - 1)
    throw std::invalid_argument("expected categories-1 cutpoint parameters");
  std::vector<double> tau(raw.size());
  tau[0] = raw[0];
  for (std::size_t m = 1; m < raw.size(); ++m)
    tau[m] = tau[m - 1] + std::exp(raw[m]);
  return Cutpoints(std::move(tau));
}

namespace {

DesignData null_design(const DesignData& data) {
  DesignData null_data;
  null_data.y = data.y;
  null_data.categories = data.categories;
  null_data.dropped = data.dropped;
  null_data.x = Matrix(data.x.rows, 1);
  for (std::size_t i = 0; i < data.x.rows; ++i) null_data.x.at(i, 0) = 1.0;
  return null_data;
}

de::RunResult run_de(const de::Objective& objective, std::size_t dim,
                     double coef_bound, const de::DEConfig& cfg) {
  const de::SearchBounds box(std::vector<double>(dim, -coef_bound),
                             std::vector<double>(dim, coef_bound));
  return de::evolve(objective, box, cfg);
}

}  // namespace

FitResult fit_design(const ModelSpec& spec, const DesignData& data,
                     const de::DEConfig& de_config, Criterion criterion,
                     double coef_bound) {
  if (!(coef_bound > 0.0))
    throw std::invalid_argument("coef_bound must be positive");
  {
    const auto [mn, mx] = std::minmax_element(data.y.begin(), data.y.end());
    if (data.y.empty() || *mn == *mx)
      throw DegenerateModelError("response takes a single value");
  }

  const std::size_t k = data.x.cols - 1;  // regressors
  const auto full_objective =
      objectives::make_model_objective(criterion, spec.family, data);
  const auto full_dim = objectives::model_parameter_count(spec.family, data);
  const auto full_run = run_de(full_objective, full_dim, coef_bound, de_config);

  const auto null_data = null_design(data);
  const auto null_objective = objectives::make_model_objective(
      Criterion::NegLogLikelihood, spec.family, null_data);
  const auto null_dim =
      objectives::model_parameter_count(spec.family, null_data);
  const auto null_run =
      run_de(null_objective, null_dim, coef_bound, de_config);

  FitResult result;
  result.spec = spec;
  result.de_config = de_config;
  result.n = data.x.rows;

  std::vector<double> full_params = full_run.best.params;
  if (criterion == Criterion::NegAUC) {
    // AUC fixes only the direction of the coefficient vector, so the raw
    // parameters carry an arbitrary scale and meaningless probabilities.
    // Refit intercept and scale along the found direction by maximum
    // likelihood; this nests the intercept-only model, which keeps the
    // likelihood-ratio diagnostics well defined, and leaves the ranking
    // (hence the AUC) unchanged.
    DesignData score_data;
    score_data.y = data.y;
    score_data.categories = data.categories;
    score_data.x = Matrix(data.x.rows, 2);
    for (std::size_t i = 0; i < data.x.rows; ++i) {
      score_data.x.at(i, 0) = 1.0;
      score_data.x.at(i, 1) = dot_row(data.x.row(i), full_params);
    }
    const auto calib_objective = objectives::make_model_objective(
        Criterion::NegLogLikelihood, ModelFamily::BinaryLogit, score_data);
    const auto calib = run_de(calib_objective, 2, coef_bound, de_config);
    const double a = calib.best.params[0];
    const double b = calib.best.params[1];
    std::vector<double> rescaled(full_params.size());
    rescaled[0] = a + b * full_params[0];
    for (std::size_t j = 1; j < full_params.size(); ++j)
      rescaled[j] = b * full_params[j];
    full_params = std::move(rescaled);
  }

  const std::span<const double> theta(full_params);
  const std::span<const double> theta_null(null_run.best.params);
  if (spec.family == ModelFamily::BinaryLogit) {
    result.coefficients.assign(theta.begin(), theta.end());
    result.log_likelihood = binary_loglik(theta, data.x, data.y);
    result.null_log_likelihood =
        binary_loglik(theta_null, null_data.x, null_data.y);
    result.percent_correct = percent_correct_binary(theta, data.x, data.y);

    std::vector<double> scores(data.x.rows);
    for (std::size_t i = 0; i < data.x.rows; ++i)
      scores[i] = dot_row(data.x.row(i), theta);
    result.auc = auc(scores, data.y);
  } else {
    const Matrix x_slopes = strip_intercept(data.x);
    result.coefficients.assign(theta.begin(), theta.begin() + static_cast<std::ptrdiff_t>(k));
    result.cutpoints =
        cutpoints_from_offsets(theta.subspan(k), data.categories);
    result.log_likelihood =
        ordered_loglik(theta.first(k), *result.cutpoints, x_slopes, data.y);

    const Matrix null_slopes = strip_intercept(null_data.x);
    const auto null_tau =
        cutpoints_from_offsets(theta_null, null_data.categories);
    result.null_log_likelihood = ordered_loglik(
        std::span<const double>{}, null_tau, null_slopes, null_data.y);
    result.percent_correct = percent_correct_ordered(
        theta.first(k), *result.cutpoints, x_slopes, data.y);
  }

  if (k == 0) {
    // Intercept-only (or cutpoints-only) model: the full model is the
    // null model, so there is nothing to test.
    result.lr_statistic = 0.0;
    result.lr_p_value = 1.0;
  } else {
    const auto lr = lr_test(result.log_likelihood,
                            result.null_log_likelihood, static_cast<int>(k));
    result.lr_statistic = lr.statistic;
    result.lr_p_value = lr.p_value;
  }
  return result;
}

FitResult fit(const ModelSpec& spec, const survey::Dataset& ds,
              const de::DEConfig& de_config, Criterion criterion,
              double coef_bound) {
  const auto data = survey::design_matrix(ds, spec);
  return fit_design(spec, data, de_config, criterion, coef_bound);
}

}  // namespace peerde::stats
