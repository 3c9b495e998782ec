#pragma once

//
// Data model and aggregation for the peer-assessment questionnaire:
// ratings on the half-step 0..3 grid, CSV ingestion with per-row
// validation, threshold breakdowns, median profiles, respondent
// statistics and regression design matrices.
//

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "peerde/model_spec.hpp"

namespace peerde::survey {

// One answer on the rating grid {0, 0.5, ..., 3.0}, or N/A (Q1 only).
class Rating {
 public:
  static bool on_grid(double v);
  static Rating of(double value);  // throws std::invalid_argument off-grid
  static Rating na() { return Rating(); }

  bool is_na() const { return na_; }
  double value() const;  // throws std::logic_error when N/A

  bool operator==(const Rating&) const = default;

 private:
  Rating() : na_(true) {}
  explicit Rating(double v) : value_(v), na_(false) {}
  double value_ = 0.0;
  bool na_ = true;
};

struct AssessmentRecord {
  std::string respondent_id;
  RespondentGroup respondent_group = RespondentGroup::ElementaryChild;
  std::string subject_id;
  int subject_age = 10;                  // within [10, 22]
  std::array<Rating, kRatingQuestions> answers{
      Rating::na(), Rating::na(), Rating::na(), Rating::na(),
      Rating::na(), Rating::na(), Rating::na(), Rating::na()};
  Sex subject_sex = Sex::Undeclared;     // Q9
  bool own_child = false;                // parents only

  const Rating& rating(Question q) const;

  bool operator==(const AssessmentRecord&) const = default;
};

// Field-level validation; the message doubles as the ingest reject reason.
void validate(const AssessmentRecord& record);

class Dataset {
 public:
  Dataset() = default;
  // Validates every record and the no-duplicate-(respondent, subject) rule.
  explicit Dataset(std::vector<AssessmentRecord> records,
                   std::string provenance = "");

  const std::vector<AssessmentRecord>& records() const { return records_; }
  const std::string& provenance() const { return provenance_; }
  std::size_t size() const { return records_.size(); }

  // Data equality; provenance is a label, not data.
  bool operator==(const Dataset& other) const {
    return records_ == other.records_;
  }

 private:
  std::vector<AssessmentRecord> records_;
  std::string provenance_;
};

struct RowRejection {
  std::size_t line = 0;  // 1-based, header is line 1
  std::string reason;
};

struct IngestResult {
  Dataset dataset;
  std::vector<RowRejection> rejected;
};

// Comma-separated ingestion. The header must name exactly:
// respondent_id,group,subject_id,age,q1,q1_na,q2,q3,q4,q5,q6,q7,q8,q9,own_child
// Invalid rows are rejected with a reason; valid rows survive.
// Throws std::runtime_error on a malformed header.
IngestResult ingest(std::istream& in, std::string provenance = "");
IngestResult ingest_file(const std::filesystem::path& path);

void export_csv(const Dataset& ds, std::ostream& out);
std::string to_csv(const Dataset& ds);

inline constexpr std::array<double, 4> kThresholds{1.5, 2.0, 2.5, 3.0};

struct ThresholdEntry {
  Question question = Question::Q1;
  double threshold = 2.0;
  double fraction_at_or_above = 0.0;
  std::size_t n = 0;  // applicable records (N/A excluded)
};

// Fraction of applicable answers at or above the threshold. The threshold
// must be one of kThresholds. Throws EmptyDataError when nothing applies.
ThresholdEntry threshold_breakdown(const Dataset& ds, Question question,
                                   std::optional<RespondentGroup> group,
                                   double threshold);

struct ThresholdReport {
  Question question = Question::Q1;
  std::optional<RespondentGroup> group;
  std::size_t n = 0;
  std::array<double, 4> fraction_at_or_above{};  // aligned with kThresholds
};

ThresholdReport threshold_report(const Dataset& ds, Question question,
                                 std::optional<RespondentGroup> group);

struct MedianProfile {
  std::optional<RespondentGroup> group;
  std::optional<Sex> sex;
  // Entry absent when a question has no applicable answers.
  std::array<std::optional<double>, kRatingQuestions> medians{};
};

// Per-question medians Q1..Q8 over applicable answers; even counts average
// the two central values.
MedianProfile median_profile(const Dataset& ds,
                             std::optional<RespondentGroup> group,
                             std::optional<Sex> sex = std::nullopt);

struct RespondentStats {
  std::size_t respondents = 0;
  double mean_subjects = 0.0;
  std::size_t min_subjects = 0;
  std::size_t max_subjects = 0;
};

RespondentStats respondent_stats(const Dataset& ds,
                                 std::optional<RespondentGroup> group);

// Builds the regression data for a model: group filter, listwise deletion
// of rows with N/A in any used question, response encoding, Q9 regressors
// as a female indicator. Throws EmptyDataError when no rows survive and
// DegenerateModelError when the response has a single distinct value.
DesignData design_matrix(const Dataset& ds, const ModelSpec& spec);

}  // namespace peerde::survey
