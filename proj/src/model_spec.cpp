#include "peerde/model_spec.hpp"

#include <algorithm>
#include <array>

namespace peerde {

std::string_view to_string(Question q) {
  static constexpr std::array<std::string_view, 9> names{
      "Q1", "Q2", "Q3", "Q4", "Q5", "Q6", "Q7", "Q8", "Q9"};
  return names[static_cast<std::size_t>(q)];
}

std::optional<Question> parse_question(std::string_view name) {
  for (int i = 0; i < 9; ++i) {
    const auto q = static_cast<Question>(i);
    if (name == to_string(q)) return q;
  }
  // lowercase form accepted for CLI convenience
  if (name.size() == 2 && name[0] == 'q' && name[1] >= '1' && name[1] <= '9')
    return static_cast<Question>(name[1] - '1');
  return std::nullopt;
}

std::string_view to_string(RespondentGroup g) {
  switch (g) {
    case RespondentGroup::ElementaryChild: return "child";
    case RespondentGroup::UniversityStudent: return "student";
    case RespondentGroup::Parent: return "parent";
  }
  return "?";
}

std::optional<RespondentGroup> parse_group(std::string_view name) {
  if (name == "child") return RespondentGroup::ElementaryChild;
  if (name == "student") return RespondentGroup::UniversityStudent;
  if (name == "parent") return RespondentGroup::Parent;
  return std::nullopt;
}

std::string_view to_string(Sex s) {
  switch (s) {
    case Sex::Female: return "F";
    case Sex::Male: return "M";
    case Sex::Undeclared: return "U";
  }
  return "?";
}

std::optional<Sex> parse_sex(std::string_view code) {
  if (code == "F") return Sex::Female;
  if (code == "M") return Sex::Male;
  if (code == "U") return Sex::Undeclared;
  return std::nullopt;
}

std::string_view to_string(ModelFamily f) {
  return f == ModelFamily::BinaryLogit ? "binary" : "ordered";
}

std::optional<ModelFamily> parse_family(std::string_view name) {
  if (name == "binary") return ModelFamily::BinaryLogit;
  if (name == "ordered") return ModelFamily::OrderedLogit;
  return std::nullopt;
}

std::string_view to_string(Criterion c) {
  return c == Criterion::NegLogLikelihood ? "loglik" : "auc";
}

std::optional<Criterion> parse_criterion(std::string_view name) {
  if (name == "loglik") return Criterion::NegLogLikelihood;
  if (name == "auc") return Criterion::NegAUC;
  return std::nullopt;
}

std::string_view to_string(ModelId id) {
  switch (id) {
    case ModelId::M1: return "M1";
    case ModelId::M2: return "M2";
    case ModelId::M3: return "M3";
    case ModelId::M4: return "M4";
    case ModelId::M5: return "M5";
    case ModelId::M6: return "M6";
    case ModelId::Custom: return "custom";
  }
  return "?";
}

std::optional<ModelId> parse_model_id(std::string_view name) {
  for (int i = 0; i < 6; ++i) {
    const auto id = static_cast<ModelId>(i);
    if (name == to_string(id)) return id;
  }
  return std::nullopt;
}

void validate(const ModelSpec& spec) {
  if (std::find(spec.regressors.begin(), spec.regressors.end(),
                spec.response.question) != spec.regressors.end())
    throw std::invalid_argument("response question reappears as a regressor");
  if (spec.regressors.empty())
    throw std::invalid_argument("model needs at least one regressor");
  const int categories =
      spec.response.encoding == ResponseEncoding::OrderedLevels ? 4 : 2;
  if (spec.family == ModelFamily::OrderedLogit && categories < 3)
    throw std::invalid_argument(
        "ordered logit requires >= 3 response categories");
  if (spec.family == ModelFamily::BinaryLogit && categories != 2)
    throw std::invalid_argument("binary logit requires a binary encoding");
  if (spec.response.encoding == ResponseEncoding::FemaleIndicator &&
      spec.response.question != Question::Q9)
    throw std::invalid_argument("female indicator encoding applies to Q9");
  if (spec.response.question == Question::Q9 &&
      spec.response.encoding != ResponseEncoding::FemaleIndicator)
    throw std::invalid_argument("Q9 response must use the female indicator");
}

ModelSpec catalog_model(ModelId id) {
  ModelSpec spec;
  spec.id = id;
  const bool parent_side =
      id == ModelId::M4 || id == ModelId::M5 || id == ModelId::M6;
  spec.group_filter = parent_side ? RespondentGroup::Parent
                                  : RespondentGroup::ElementaryChild;
  switch (id) {
    case ModelId::M1:
    case ModelId::M4:
      spec.response = {Question::Q6, ResponseEncoding::OrderedLevels, 2.0};
      spec.regressors = {Question::Q3, Question::Q4, Question::Q5,
                         Question::Q7};
      spec.family = ModelFamily::OrderedLogit;
      break;
    case ModelId::M2:
    case ModelId::M5:
      spec.response = {Question::Q7, ResponseEncoding::OrderedLevels, 2.0};
      spec.regressors = {Question::Q1, Question::Q2, Question::Q3,
                         Question::Q4, Question::Q5, Question::Q6,
                         Question::Q8, Question::Q9};
      spec.family = ModelFamily::OrderedLogit;
      break;
    case ModelId::M3:
    case ModelId::M6:
      spec.response = {Question::Q9, ResponseEncoding::FemaleIndicator, 2.0};
      spec.regressors = {Question::Q8};
      spec.family = ModelFamily::BinaryLogit;
      break;
    case ModelId::Custom:
      throw std::invalid_argument("no catalog entry for custom models");
  }
  validate(spec);
  return spec;
}

Matrix strip_intercept(const Matrix& x) {
  if (x.cols < 1) throw std::invalid_argument("matrix has no columns");
  Matrix out(x.rows, x.cols - 1);
  for (std::size_t i = 0; i < x.rows; ++i)
    for (std::size_t j = 1; j < x.cols; ++j) out.at(i, j - 1) = x.at(i, j);
  return out;
}

}  // namespace peerde
