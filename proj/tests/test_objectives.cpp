#include <doctest.h>

#include <cmath>
#include <vector>

#include "peerde/errors.hpp"
#include "peerde/objectives.hpp"
#include "peerde/rng.hpp"
#include "peerde/stats.hpp"

using namespace peerde;
using namespace peerde::objectives;

namespace {

DesignData binary_data(std::vector<double> x_values, std::vector<int> y) {
  DesignData data;
  data.x = Matrix(x_values.size(), 2);
  for (std::size_t i = 0; i < x_values.size(); ++i) {
    data.x.at(i, 0) = 1.0;
    data.x.at(i, 1) = x_values[i];
  }
  data.y = std::move(y);
  data.categories = 2;
  return data;
}

}  // namespace

TEST_CASE("test functions: documented optima and hand values") {
  const auto sphere = make_test_function(TestFunctionKind::Sphere, 10);
  CHECK(sphere.evaluate(sphere.known_optimum_point) <= 1e-12);
  CHECK(sphere.evaluate(std::vector<double>(10, 0.0)) == 0.0);

  const auto sphere3 = make_test_function(TestFunctionKind::Sphere, 3);
  CHECK(sphere3.evaluate(std::vector<double>{1.0, 2.0, 2.0}) ==
        doctest::Approx(9.0));  // 1 + 4 + 4

  const auto rosen = make_test_function(TestFunctionKind::Rosenbrock, 5);
  CHECK(rosen.evaluate(rosen.known_optimum_point) <= 1e-12);
  CHECK(rosen.evaluate(std::vector<double>(5, 1.0)) == 0.0);

  const auto rastrigin = make_test_function(TestFunctionKind::Rastrigin, 5);
  CHECK(rastrigin.evaluate(rastrigin.known_optimum_point) <= 1e-12);
  // at all-ones each term is 1 - 10 cos(2 pi) + 10 = 1
  CHECK(rastrigin.evaluate(std::vector<double>(5, 1.0)) ==
        doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("test functions: default boxes") {
  const auto sphere = make_test_function(TestFunctionKind::Sphere, 4);
  CHECK(sphere.default_bounds.lower == std::vector<double>(4, -5.12));
  const auto rosen = make_test_function(TestFunctionKind::Rosenbrock, 4);
  CHECK(rosen.default_bounds.upper == std::vector<double>(4, 2.048));
}

TEST_CASE("test functions: argument validation") {
  const auto sphere = make_test_function(TestFunctionKind::Sphere, 3);
  CHECK_THROWS_AS(sphere.evaluate(std::vector<double>{1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_test_function(TestFunctionKind::Sphere, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_test_function(TestFunctionKind::Rosenbrock, 1),
                  std::invalid_argument);
  CHECK(parse_test_function("sphere").has_value());
  CHECK_FALSE(parse_test_function("nosuch").has_value());
}

TEST_CASE("model objective: negative log-likelihood at beta = 0 is n ln 2") {
  const auto data = binary_data({0.5, 1.0, 1.5, 2.0, 0.0, 3.0, 2.5},
                                {1, 0, 1, 1, 0, 1, 0});
  const auto obj = make_model_objective(Criterion::NegLogLikelihood,
                                        ModelFamily::BinaryLogit, data);
  const std::vector<double> zero{0.0, 0.0};
  CHECK(obj(zero) == doctest::Approx(7.0 * std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("model objective: single-observation evaluation") {
  const auto data = binary_data({1.0}, {1});
  const auto obj = make_model_objective(Criterion::NegLogLikelihood,
                                        ModelFamily::BinaryLogit, data);
  // -ln sigma(0.5) with beta = (0, 0.5): hand value 0.474077
  const std::vector<double> beta{0.0, 0.5};
  CHECK(obj(beta) == doctest::Approx(0.474077).epsilon(1e-5));
}

TEST_CASE("model objective: perfect separation gives NegAUC of -1") {
  const auto data = binary_data({0.0, 0.5, 2.5, 3.0}, {0, 0, 1, 1});
  const auto obj =
      make_model_objective(Criterion::NegAUC, ModelFamily::BinaryLogit, data);
  const std::vector<double> beta{0.0, 1.0};
  CHECK(obj(beta) == -1.0);
}

TEST_CASE("model objective: NegAUC is invariant under positive rescaling") {
  const auto data =
      binary_data({0.0, 1.0, 1.5, 2.0, 2.5, 0.5}, {0, 1, 0, 1, 1, 0});
  const auto obj =
      make_model_objective(Criterion::NegAUC, ModelFamily::BinaryLogit, data);
  const std::vector<double> beta{-0.3, 0.8};
  const std::vector<double> scaled{-0.9, 2.4};
  CHECK(obj(beta) == obj(scaled));
}

TEST_CASE("model objective: degenerate labels rejected under NegAUC") {
  const auto data = binary_data({0.0, 1.0, 2.0}, {1, 1, 1});
  CHECK_THROWS_AS(make_model_objective(Criterion::NegAUC,
                                       ModelFamily::BinaryLogit, data),
                  DegenerateModelError);
}

TEST_CASE("model objective: NegAUC rejected for ordered models") {
  auto data = binary_data({0.0, 1.0, 2.0}, {0, 1, 2});
  data.categories = 4;
  CHECK_THROWS_AS(make_model_objective(Criterion::NegAUC,
                                       ModelFamily::OrderedLogit, data),
                  std::invalid_argument);
}

TEST_CASE("model objective: NegAUC stays within [-1, 0]") {
  const auto data =
      binary_data({0.0, 1.0, 1.5, 2.0, 2.5, 0.5}, {0, 1, 0, 1, 1, 0});
  const auto obj =
      make_model_objective(Criterion::NegAUC, ModelFamily::BinaryLogit, data);
  Rng rng(9);
  for (int it = 0; it < 50; ++it) {
    const std::vector<double> beta{rng.uniform01() * 20.0 - 10.0,
                                   rng.uniform01() * 20.0 - 10.0};
    const double v = obj(beta);
    CHECK(v >= -1.0);
    CHECK(v <= 0.0);
  }
}

TEST_CASE("model objective: ordered parameter count and evaluation") {
  auto data = binary_data({0.0, 1.0, 2.0, 3.0}, {0, 1, 2, 3});
  data.categories = 4;
  CHECK(model_parameter_count(ModelFamily::OrderedLogit, data) == 4);
  const auto obj = make_model_objective(Criterion::NegLogLikelihood,
                                        ModelFamily::OrderedLogit, data);
  // slope 0, cutpoints (-1, 0, 1): matches a direct evaluation
  const std::vector<double> theta{0.0, -1.0, 0.0, 0.0};
  const auto tau = stats::cutpoints_from_offsets(
      std::span<const double>(theta).subspan(1), 4);
  const Matrix x_slopes = strip_intercept(data.x);
  const double expected =
      -stats::ordered_loglik(std::span<const double>(theta).first(1), tau,
                             x_slopes, data.y);
  CHECK(obj(theta) == doctest::Approx(expected).epsilon(1e-14));
}
