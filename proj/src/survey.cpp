#include "peerde/survey.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "peerde/errors.hpp"

namespace peerde::survey {

namespace {

const std::array<std::string, 15> kColumns{
    "respondent_id", "group", "subject_id", "age", "q1",  "q1_na",
    "q2",            "q3",    "q4",         "q5",  "q6",  "q7",
    "q8",            "q9",    "own_child"};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

std::optional<double> parse_double(const std::string& s) {
  double v = 0.0;
  const char* begin = s.data();
  const char* end = begin + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc{} || ptr != end) return std::nullopt;
  return v;
}

std::optional<long> parse_int(const std::string& s) {
  long v = 0;
  const char* begin = s.data();
  const char* end = begin + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc{} || ptr != end) return std::nullopt;
  return v;
}

std::string format_rating(double v) {
  if (v == std::floor(v)) return std::to_string(static_cast<int>(v));
  std::ostringstream os;
  os << v;  // grid values print as 0.5, 1.5, 2.5
  return os.str();
}

bool is_female(const AssessmentRecord& r) {
  return r.subject_sex == Sex::Female;
}

}  // namespace

bool Rating::on_grid(double v) {
  if (!(v >= 0.0 && v <= 3.0)) return false;
  const double doubled = v * 2.0;
  return doubled == std::floor(doubled);
}

Rating Rating::of(double value) {
  if (!on_grid(value))
    throw std::invalid_argument("rating off the half-step 0..3 grid");
  return Rating(value);
}

double Rating::value() const {
  if (na_) throw std::logic_error("value() on an N/A rating");
  return value_;
}

const Rating& AssessmentRecord::rating(Question q) const {
  const auto idx = static_cast<std::size_t>(q);
  if (idx >= answers.size())
    throw std::invalid_argument("Q9 is not a rating question");
  return answers[idx];
}

void validate(const AssessmentRecord& record) {
  if (record.respondent_id.empty() || record.subject_id.empty())
    throw std::invalid_argument("invalid id");
  if (record.subject_age < 10 || record.subject_age > 22)
    throw std::invalid_argument("invalid age");
  for (std::size_t i = 1; i < record.answers.size(); ++i) {
    if (record.answers[i].is_na())
      throw std::invalid_argument("invalid rating");  // N/A allowed on Q1 only
  }
  if (record.own_child && record.respondent_group != RespondentGroup::Parent)
    throw std::invalid_argument("invalid own_child");
}

Dataset::Dataset(std::vector<AssessmentRecord> records, std::string provenance)
    : records_(std::move(records)), provenance_(std::move(provenance)) {
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& r : records_) {
    validate(r);
    if (!seen.emplace(r.respondent_id, r.subject_id).second)
      throw std::invalid_argument("duplicate assessment");
  }
}

IngestResult ingest(std::istream& in, std::string provenance) {
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("missing header row");
  {
    const auto header = split_csv_line(line);
    if (header.size() != kColumns.size() ||
        !std::equal(header.begin(), header.end(), kColumns.begin()))
      throw std::runtime_error("unexpected header row");
  }

  std::vector<AssessmentRecord> records;
  std::vector<RowRejection> rejected;
  std::set<std::pair<std::string, std::string>> seen;
  std::size_t line_no = 1;

  auto reject = [&](std::size_t at, std::string reason) {
    rejected.push_back({at, std::move(reason)});
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != kColumns.size()) {
      reject(line_no, "wrong field count");
      continue;
    }

    AssessmentRecord rec;
    rec.respondent_id = fields[0];
    rec.subject_id = fields[2];
    if (rec.respondent_id.empty() || rec.subject_id.empty()) {
      reject(line_no, "invalid id");
      continue;
    }

    const auto group = parse_group(fields[1]);
    if (!group) {
      reject(line_no, "invalid group");
      continue;
    }
    rec.respondent_group = *group;

    const auto age = parse_int(fields[3]);
    if (!age || *age < 10 || *age > 22) {
      reject(line_no, "invalid age");
      continue;
    }
    rec.subject_age = static_cast<int>(*age);

    const std::string& q1_na = fields[5];
    bool bad = false;
    if (q1_na == "1") {
      if (!fields[4].empty()) {
        reject(line_no, "invalid rating");  // N/A rows leave q1 empty
        continue;
      }
      rec.answers[0] = Rating::na();
    } else if (q1_na == "0") {
      const auto v = parse_double(fields[4]);
      if (!v || !Rating::on_grid(*v)) {
        reject(line_no, "invalid rating");
        continue;
      }
      rec.answers[0] = Rating::of(*v);
    } else {
      reject(line_no, "invalid q1_na");
      continue;
    }

    for (std::size_t q = 1; q < kRatingQuestions && !bad; ++q) {
      const auto v = parse_double(fields[5 + q]);
      if (!v || !Rating::on_grid(*v)) {
        reject(line_no, "invalid rating");
        bad = true;
        break;
      }
      rec.answers[q] = Rating::of(*v);
    }
    if (bad) continue;

    const auto sex = parse_sex(fields[13]);
    if (!sex) {
      reject(line_no, "invalid sex");
      continue;
    }
    rec.subject_sex = *sex;

    if (fields[14] == "1") {
      rec.own_child = true;
    } else if (fields[14] == "0") {
      rec.own_child = false;
    } else {
      reject(line_no, "invalid own_child");
      continue;
    }
    if (rec.own_child && rec.respondent_group != RespondentGroup::Parent) {
      reject(line_no, "invalid own_child");
      continue;
    }

    if (!seen.emplace(rec.respondent_id, rec.subject_id).second) {
      reject(line_no, "duplicate assessment");
      continue;
    }
    records.push_back(std::move(rec));
  }

  return {Dataset(std::move(records), std::move(provenance)),
          std::move(rejected)};
}

IngestResult ingest_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return ingest(in, path.string());
}

void export_csv(const Dataset& ds, std::ostream& out) {
  for (std::size_t i = 0; i < kColumns.size(); ++i) {
    if (i) out << ',';
    out << kColumns[i];
  }
  out << '\n';
  for (const auto& r : ds.records()) {
    out << r.respondent_id << ',' << to_string(r.respondent_group) << ','
        << r.subject_id << ',' << r.subject_age << ',';
    if (r.answers[0].is_na()) {
      out << ",1";
    } else {
      out << format_rating(r.answers[0].value()) << ",0";
    }
    for (std::size_t q = 1; q < kRatingQuestions; ++q)
      out << ',' << format_rating(r.answers[q].value());
    out << ',' << to_string(r.subject_sex) << ',' << (r.own_child ? 1 : 0)
        << '\n';
  }
}

std::string to_csv(const Dataset& ds) {
  std::ostringstream os;
  export_csv(ds, os);
  return os.str();
}

namespace {

// Applicable (non-N/A) answers to one question under the group filter.
std::vector<double> applicable_values(const Dataset& ds, Question question,
                                      std::optional<RespondentGroup> group,
                                      std::optional<Sex> sex = std::nullopt) {
  std::vector<double> values;
  for (const auto& r : ds.records()) {
    if (group && r.respondent_group != *group) continue;
    if (sex && r.subject_sex != *sex) continue;
    const Rating& rating = r.rating(question);
    if (rating.is_na()) continue;
    values.push_back(rating.value());
  }
  return values;
}

}  // namespace

ThresholdEntry threshold_breakdown(const Dataset& ds, Question question,
                                   std::optional<RespondentGroup> group,
                                   double threshold) {
  if (question == Question::Q9)
    throw std::invalid_argument("threshold breakdown applies to Q1..Q8");
  if (std::find(kThresholds.begin(), kThresholds.end(), threshold) ==
      kThresholds.end())
    throw std::invalid_argument("threshold must be one of 1.5, 2.0, 2.5, 3.0");
  const auto values = applicable_values(ds, question, group);
  if (values.empty())
    throw EmptyDataError("no applicable answers for " +
                         std::string(to_string(question)));
  const auto hits = std::count_if(values.begin(), values.end(),
                                  [&](double v) { return v >= threshold; });
  ThresholdEntry entry;
  entry.question = question;
  entry.threshold = threshold;
  entry.n = values.size();
  entry.fraction_at_or_above =
      static_cast<double>(hits) / static_cast<double>(values.size());
  return entry;
}

ThresholdReport threshold_report(const Dataset& ds, Question question,
                                 std::optional<RespondentGroup> group) {
  ThresholdReport report;
  report.question = question;
  report.group = group;
  for (std::size_t t = 0; t < kThresholds.size(); ++t) {
    const auto entry = threshold_breakdown(ds, question, group, kThresholds[t]);
    report.fraction_at_or_above[t] = entry.fraction_at_or_above;
    report.n = entry.n;
  }
  return report;
}

MedianProfile median_profile(const Dataset& ds,
                             std::optional<RespondentGroup> group,
                             std::optional<Sex> sex) {
  MedianProfile profile;
  profile.group = group;
  profile.sex = sex;
  for (int q = 0; q < kRatingQuestions; ++q) {
    auto values = applicable_values(ds, static_cast<Question>(q), group, sex);
    if (values.empty()) continue;
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    const double median = (n % 2 == 1)
                              ? values[n / 2]
                              : 0.5 * (values[n / 2 - 1] + values[n / 2]);
    profile.medians[static_cast<std::size_t>(q)] = median;
  }
  return profile;
}

RespondentStats respondent_stats(const Dataset& ds,
                                 std::optional<RespondentGroup> group) {
  std::map<std::string, std::size_t> counts;
  for (const auto& r : ds.records()) {
    if (group && r.respondent_group != *group) continue;
    ++counts[r.respondent_id];
  }
  if (counts.empty()) throw EmptyDataError("no respondents after filtering");
  RespondentStats stats;
  stats.respondents = counts.size();
  stats.min_subjects = counts.begin()->second;
  stats.max_subjects = counts.begin()->second;
  double total = 0.0;
  for (const auto& [id, c] : counts) {
    stats.min_subjects = std::min(stats.min_subjects, c);
    stats.max_subjects = std::max(stats.max_subjects, c);
    total += static_cast<double>(c);
  }
  stats.mean_subjects = total / static_cast<double>(counts.size());
  return stats;
}

namespace {

double regressor_value(const AssessmentRecord& r, Question q) {
  if (q == Question::Q9) return is_female(r) ? 1.0 : 0.0;
  return r.rating(q).value();
}

int encode_response(const AssessmentRecord& r, const ResponseSpec& response) {
  switch (response.encoding) {
    case ResponseEncoding::BinaryThreshold:
      return r.rating(response.question).value() >= response.threshold ? 1 : 0;
    case ResponseEncoding::OrderedLevels:
      return static_cast<int>(
          std::floor(r.rating(response.question).value()));
    case ResponseEncoding::FemaleIndicator:
      return is_female(r) ? 1 : 0;
  }
  throw std::logic_error("unknown encoding");
}

}  // namespace

DesignData design_matrix(const Dataset& ds, const ModelSpec& spec) {
  validate(spec);

  std::vector<Question> used = spec.regressors;
  used.push_back(spec.response.question);

  std::vector<const AssessmentRecord*> rows;
  std::size_t dropped = 0;
  for (const auto& r : ds.records()) {
    if (spec.group_filter && r.respondent_group != *spec.group_filter)
      continue;
    const bool missing = std::any_of(used.begin(), used.end(), [&](Question q) {
      return q != Question::Q9 && r.rating(q).is_na();
    });
    if (missing) {
      ++dropped;
      continue;
    }
    rows.push_back(&r);
  }
  if (rows.empty())
    throw EmptyDataError("empty design: no rows survive listwise deletion");

  DesignData data;
  data.dropped = dropped;
  data.categories =
      spec.response.encoding == ResponseEncoding::OrderedLevels ? 4 : 2;
  const std::size_t k = spec.regressors.size();
  data.x = Matrix(rows.size(), k + 1);
  data.y.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    data.x.at(i, 0) = 1.0;
    for (std::size_t j = 0; j < k; ++j)
      data.x.at(i, j + 1) = regressor_value(*rows[i], spec.regressors[j]);
    data.y[i] = encode_response(*rows[i], spec.response);
  }

  const auto [mn, mx] = std::minmax_element(data.y.begin(), data.y.end());
  if (*mn == *mx)
    throw DegenerateModelError("response takes a single value");
  return data;
}

}  // namespace peerde::survey
