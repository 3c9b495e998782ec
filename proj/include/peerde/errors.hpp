#pragma once

#include <stdexcept>
#include <string>

namespace peerde {

// An objective returned NaN or infinity; the message names the vector.
class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A filter, deletion or ingestion step left nothing to work with.
class EmptyDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Response unusable for the requested model: constant response,
// single-class labels for AUC, and similar.
class DegenerateModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Full-model likelihood fell below the null beyond tolerance, which
// signals a non-converged fit.
class InconsistentFitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A synthetic study is missing a report kind needed for a comparison.
class IncompleteStudyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace peerde
