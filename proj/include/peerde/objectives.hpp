#pragma once

//
// Benchmark test functions for validating the optimizer, and adapters that
// expose model-fitting criteria (negative log-likelihood, negative AUC) as
// minimization objectives.
//

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "peerde/de.hpp"
#include "peerde/model_spec.hpp"

namespace peerde::objectives {

enum class TestFunctionKind { Sphere, Rosenbrock, Rastrigin };
std::string_view to_string(TestFunctionKind kind);
std::optional<TestFunctionKind> parse_test_function(std::string_view name);

struct TestFunction {
  TestFunctionKind kind = TestFunctionKind::Sphere;
  int dimension = 0;
  double known_optimum_value = 0.0;
  std::vector<double> known_optimum_point;
  de::SearchBounds default_bounds{{0.0}, {0.0}};

  double evaluate(std::span<const double> x) const;
  de::Objective objective() const;
};

// Sphere and Rastrigin over [-5.12, 5.12]^D, Rosenbrock over
// [-2.048, 2.048]^D; all have minimum 0 at the documented point.
TestFunction make_test_function(TestFunctionKind kind, int dimension);

// Minimization objective over the model's parameter vector:
// NegLogLikelihood evaluates -l(theta); NegAUC evaluates -AUC of the
// linear scores (binary models only, bounded in [-1, 0]). Construction
// throws DegenerateModelError when the labels are single-class under
// NegAUC and std::invalid_argument when NegAUC is requested for an
// ordered model.
de::Objective make_model_objective(Criterion criterion, ModelFamily family,
                                   const DesignData& data);

// Search-vector length expected by the objective for this family.
std::size_t model_parameter_count(ModelFamily family, const DesignData& data);

}  // namespace peerde::objectives
