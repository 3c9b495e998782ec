#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace peerde {

// Questionnaire items. Q1..Q8 are ratings on the half-step 0..3 grid,
// Q9 is the assessed subject's sex.
enum class Question { Q1, Q2, Q3, Q4, Q5, Q6, Q7, Q8, Q9 };

inline constexpr int kRatingQuestions = 8;

std::string_view to_string(Question q);
std::optional<Question> parse_question(std::string_view name);

enum class RespondentGroup { ElementaryChild, UniversityStudent, Parent };
std::string_view to_string(RespondentGroup g);
std::optional<RespondentGroup> parse_group(std::string_view name);

enum class Sex { Female, Male, Undeclared };
std::string_view to_string(Sex s);
std::optional<Sex> parse_sex(std::string_view code);

enum class ModelFamily { BinaryLogit, OrderedLogit };
std::string_view to_string(ModelFamily f);
std::optional<ModelFamily> parse_family(std::string_view name);

// Objective the optimizer minimizes when fitting a model.
enum class Criterion { NegLogLikelihood, NegAUC };
std::string_view to_string(Criterion c);
std::optional<Criterion> parse_criterion(std::string_view name);

// How the response question becomes a numeric target.
enum class ResponseEncoding {
  BinaryThreshold,  // rating >= threshold -> 1
  OrderedLevels,    // integer level floor(rating), categories 0..3
  FemaleIndicator,  // Q9 == F -> 1
};

struct ResponseSpec {
  Question question = Question::Q8;
  ResponseEncoding encoding = ResponseEncoding::BinaryThreshold;
  double threshold = 2.0;  // used by BinaryThreshold only
};

enum class ModelId { M1, M2, M3, M4, M5, M6, Custom };
std::string_view to_string(ModelId id);
std::optional<ModelId> parse_model_id(std::string_view name);

struct ModelSpec {
  ModelId id = ModelId::Custom;
  ResponseSpec response;
  std::vector<Question> regressors;
  std::optional<RespondentGroup> group_filter;
  ModelFamily family = ModelFamily::BinaryLogit;
};

// Throws std::invalid_argument when the response appears among the
// regressors or the family does not match the encoding's category count.
void validate(const ModelSpec& spec);

// The six catalog models. M1/M4: ordered response Q6 on {Q3,Q4,Q5,Q7};
// M2/M5: ordered response Q7 on {Q1..Q6,Q8,Q9}; M3/M6: binary female
// indicator from Q9 on {Q8}. M1-M3 use the children's answers, M4-M6 the
// parents'.
ModelSpec catalog_model(ModelId id);

// Row-major dense matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}

  double& at(std::size_t i, std::size_t j) { return values[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
  std::span<const double> row(std::size_t i) const {
    return {values.data() + i * cols, cols};
  }
};

// Drops the leading intercept column.
Matrix strip_intercept(const Matrix& x);

// Regression-ready data: X is n x (k+1) with a leading column of ones,
// y holds {0,1} labels or ordered categories 0..categories-1.
struct DesignData {
  Matrix x;
  std::vector<int> y;
  int categories = 2;
  std::size_t dropped = 0;  // rows removed by listwise deletion
};

}  // namespace peerde
