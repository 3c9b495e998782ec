#include "peerde/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "peerde/errors.hpp"
#include "peerde/stats.hpp"

namespace peerde::objectives {

std::string_view to_string(TestFunctionKind kind) {
  switch (kind) {
    case TestFunctionKind::Sphere: return "sphere";
    case TestFunctionKind::Rosenbrock: return "rosenbrock";
    case TestFunctionKind::Rastrigin: return "rastrigin";
  }
  return "?";
}

std::optional<TestFunctionKind> parse_test_function(std::string_view name) {
  if (name == "sphere") return TestFunctionKind::Sphere;
  if (name == "rosenbrock") return TestFunctionKind::Rosenbrock;
  if (name == "rastrigin") return TestFunctionKind::Rastrigin;
  return std::nullopt;
}

double TestFunction::evaluate(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dimension)
    throw std::invalid_argument("dimension mismatch");
  switch (kind) {
    case TestFunctionKind::Sphere: {
      double s = 0.0;
      for (double v : x) s += v * v;
      return s;
    }
    case TestFunctionKind::Rosenbrock: {
      double s = 0.0;
      for (std::size_t j = 0; j + 1 < x.size(); ++j) {
        const double a = x[j + 1] - x[j] * x[j];
        const double b = 1.0 - x[j];
        s += 100.0 * a * a + b * b;
      }
      return s;
    }
    case TestFunctionKind::Rastrigin: {
      double s = 10.0 * static_cast<double>(x.size());
      for (double v : x)
        s += v * v - 10.0 * std::cos(2.0 * std::numbers::pi * v);
      return s;
    }
  }
  throw std::logic_error("unknown test function");
}

de::Objective TestFunction::objective() const {
  TestFunction self = *this;
  return [self](std::span<const double> x) { return self.evaluate(x); };
}

TestFunction make_test_function(TestFunctionKind kind, int dimension) {
  if (dimension < 1) throw std::invalid_argument("dimension must be >= 1");
  if (kind == TestFunctionKind::Rosenbrock && dimension < 2)
    throw std::invalid_argument("rosenbrock needs dimension >= 2");
  TestFunction fn;
  fn.kind = kind;
  fn.dimension = dimension;
  fn.known_optimum_value = 0.0;
  const double box = kind == TestFunctionKind::Rosenbrock ? 2.048 : 5.12;
  const double opt = kind == TestFunctionKind::Rosenbrock ? 1.0 : 0.0;
  fn.known_optimum_point.assign(static_cast<std::size_t>(dimension), opt);
  fn.default_bounds =
      de::SearchBounds(std::vector<double>(static_cast<std::size_t>(dimension), -box),
                       std::vector<double>(static_cast<std::size_t>(dimension), box));
  return fn;
}

std::size_t model_parameter_count(ModelFamily family, const DesignData& data) {
  if (family == ModelFamily::BinaryLogit) return data.x.cols;
  // slopes for each regressor plus C-1 cutpoint parameters
  return (data.x.cols - 1) + static_cast<std::size_t>(data.categories - 1);
}

de::Objective make_model_objective(Criterion criterion, ModelFamily family,
                                   const DesignData& data) {
  if (family == ModelFamily::OrderedLogit &&
      criterion == Criterion::NegAUC)
    throw std::invalid_argument("the AUC criterion requires a binary model");

  if (criterion == Criterion::NegAUC) {
    const auto [mn, mx] = std::minmax_element(data.y.begin(), data.y.end());
    if (*mn == *mx)
      throw DegenerateModelError("AUC undefined: single-class labels");
    const Matrix x = data.x;
    const std::vector<int> y = data.y;
    return [x, y](std::span<const double> beta) {
      std::vector<double> scores(x.rows);
      for (std::size_t i = 0; i < x.rows; ++i) {
        double z = 0.0;
        const auto row = x.row(i);
        for (std::size_t j = 0; j < row.size(); ++j) z += row[j] * beta[j];
        scores[i] = z;
      }
      return -stats::auc(scores, y);
    };
  }

  if (family == ModelFamily::BinaryLogit) {
    const Matrix x = data.x;
    const std::vector<int> y = data.y;
    return [x, y](std::span<const double> beta) {
      return -stats::binary_loglik(beta, x, y);
    };
  }

  const Matrix x_slopes = strip_intercept(data.x);
  const std::vector<int> y = data.y;
  const int categories = data.categories;
  const std::size_t k = x_slopes.cols;
  return [x_slopes, y, categories, k](std::span<const double> theta) {
    const auto tau =
        stats::cutpoints_from_offsets(theta.subspan(k), categories);
    return -stats::ordered_loglik(theta.first(k), tau, x_slopes, y);
  };
}

}  // namespace peerde::objectives
