#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "peerde/errors.hpp"
#include "peerde/survey.hpp"
#include "peerde/synth.hpp"

using namespace peerde;
using namespace peerde::survey;

namespace {

const char* kHeader =
    "respondent_id,group,subject_id,age,q1,q1_na,q2,q3,q4,q5,q6,q7,q8,q9,"
    "own_child\n";

AssessmentRecord make_record(std::string respondent, RespondentGroup group,
                             std::string subject,
                             std::array<double, 8> ratings,
                             Sex sex = Sex::Female, int age = 12,
                             bool own_child = false) {
  AssessmentRecord rec;
  rec.respondent_id = std::move(respondent);
  rec.respondent_group = group;
  rec.subject_id = std::move(subject);
  rec.subject_age = age;
  for (std::size_t q = 0; q < 8; ++q)
    rec.answers[q] = Rating::of(ratings[q]);
  rec.subject_sex = sex;
  rec.own_child = own_child;
  return rec;
}

// One record per value; the probed question carries the value, the rest 0.
Dataset dataset_with_q_values(Question q, const std::vector<double>& values) {
  std::vector<AssessmentRecord> records;
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::array<double, 8> ratings{};
    ratings[static_cast<std::size_t>(q)] = values[i];
    records.push_back(make_record("r" + std::to_string(i),
                                  RespondentGroup::ElementaryChild,
                                  "s" + std::to_string(i), ratings));
  }
  return Dataset(std::move(records));
}

IngestResult ingest_string(const std::string& text) {
  std::istringstream in(text);
  return ingest(in);
}

}  // namespace

TEST_CASE("rating grid") {
  for (double v : {0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0}) CHECK(Rating::on_grid(v));
  for (double v : {-0.5, 0.25, 1.7, 3.5}) CHECK_FALSE(Rating::on_grid(v));
  CHECK_THROWS_AS(Rating::of(1.7), std::invalid_argument);
  CHECK(Rating::na().is_na());
  CHECK_THROWS_AS(Rating::na().value(), std::logic_error);
  CHECK(Rating::of(2.5).value() == 2.5);
}

TEST_CASE("record validation") {
  auto rec = make_record("r", RespondentGroup::ElementaryChild, "s",
                         {1, 1, 1, 1, 1, 1, 1, 1});
  CHECK_NOTHROW(validate(rec));
  rec.subject_age = 9;
  CHECK_THROWS_WITH_AS(validate(rec), "invalid age", std::invalid_argument);
  rec.subject_age = 12;
  rec.own_child = true;
  CHECK_THROWS_WITH_AS(validate(rec), "invalid own_child",
                       std::invalid_argument);
  rec.respondent_group = RespondentGroup::Parent;
  CHECK_NOTHROW(validate(rec));
  rec.answers[3] = Rating::na();  // N/A is a Q1-only concept
  CHECK_THROWS_WITH_AS(validate(rec), "invalid rating", std::invalid_argument);
}

TEST_CASE("dataset rejects duplicate (respondent, subject) pairs") {
  auto a = make_record("r1", RespondentGroup::ElementaryChild, "s1",
                       {1, 1, 1, 1, 1, 1, 1, 1});
  auto b = a;
  b.answers[7] = Rating::of(2.0);
  CHECK_THROWS_WITH_AS(Dataset({a, b}), "duplicate assessment",
                       std::invalid_argument);
}

TEST_CASE("ingest: empty file with a valid header") {
  const auto result = ingest_string(kHeader);
  CHECK(result.dataset.size() == 0);
  CHECK(result.rejected.empty());
}

TEST_CASE("ingest: malformed header") {
  CHECK_THROWS_AS(ingest_string("a,b,c\n"), std::runtime_error);
  std::istringstream empty("");
  CHECK_THROWS_AS(ingest(empty), std::runtime_error);
}

TEST_CASE("ingest: off-grid rating is rejected with its line number") {
  const std::string text = std::string(kHeader) +
      "r1,child,s1,12,1,0,1,1,1,1,1,1,1.7,F,0\n";
  const auto result = ingest_string(text);
  CHECK(result.dataset.size() == 0);
  REQUIRE(result.rejected.size() == 1);
  CHECK(result.rejected[0].line == 2);
  CHECK(result.rejected[0].reason == "invalid rating");
}

TEST_CASE("ingest: three valid rows plus one bad sex code") {
  const std::string text = std::string(kHeader) +
      "r1,child,s1,12,1,0,1,1,1,1,1,1,1,F,0\n" +
      "r1,child,s2,13,2,0,2,2,2,2,2,2,2,M,0\n" +
      "r2,child,s1,12,0.5,0,1,1,1,1,1,1,1,X,0\n" +
      "r2,child,s3,14,3,0,3,3,3,3,3,3,3,U,0\n";
  const auto result = ingest_string(text);
  CHECK(result.dataset.size() == 3);
  REQUIRE(result.rejected.size() == 1);
  CHECK(result.rejected[0].line == 4);
  CHECK(result.rejected[0].reason == "invalid sex");
}

TEST_CASE("ingest: remaining row-level validations") {
  const std::string rows =
      std::string(kHeader) +
      "r1,child,s1,9,1,0,1,1,1,1,1,1,1,F,0\n" +           // bad age
      "r2,elder,s1,12,1,0,1,1,1,1,1,1,1,F,0\n" +          // bad group
      "r3,child,s1,12,,1,1,1,1,1,1,1,1,F,0\n" +           // ok: q1 N/A
      "r3,child,s1,12,1,0,1,1,1,1,1,1,1,F,0\n" +          // duplicate pair
      "r4,child,s2,12,2,1,1,1,1,1,1,1,1,F,0\n" +          // q1 set despite N/A
      "r5,child,s2,12,1,0,1,1,1,1,1,1,1,F,1\n" +          // own_child on child
      "r6,child,s2,12,1,0,1,1,1,1,1,1,1,F\n";             // missing field
  const auto result = ingest_string(rows);
  CHECK(result.dataset.size() == 1);
  REQUIRE(result.rejected.size() == 6);
  CHECK(result.rejected[0].reason == "invalid age");
  CHECK(result.rejected[1].reason == "invalid group");
  CHECK(result.rejected[2].reason == "duplicate assessment");
  CHECK(result.rejected[2].line == 5);
  CHECK(result.rejected[3].reason == "invalid rating");
  CHECK(result.rejected[4].reason == "invalid own_child");
  CHECK(result.rejected[5].reason == "wrong field count");
}

TEST_CASE("ingest/export round-trip") {
  // a dataset touching every branch: N/A, all groups, all sexes, own_child
  std::vector<AssessmentRecord> records;
  records.push_back(make_record("r1", RespondentGroup::ElementaryChild, "s1",
                                {0, 0.5, 1, 1.5, 2, 2.5, 3, 1.5}, Sex::Male,
                                10));
  auto with_na = make_record("r1", RespondentGroup::ElementaryChild, "s2",
                             {0, 3, 3, 0.5, 1, 2, 0, 2.5}, Sex::Undeclared,
                             22);
  with_na.answers[0] = Rating::na();
  records.push_back(with_na);
  records.push_back(make_record("u1", RespondentGroup::UniversityStudent,
                                "s1", {2, 2, 2, 2, 2, 2, 2, 2}, Sex::Female,
                                19));
  records.push_back(make_record("p1", RespondentGroup::Parent, "s1",
                                {1, 1, 1, 1, 1, 1, 1, 1}, Sex::Female, 12,
                                true));
  const Dataset original(std::move(records));

  std::istringstream in(to_csv(original));
  const auto round = ingest(in);
  CHECK(round.rejected.empty());
  CHECK(round.dataset == original);
}

TEST_CASE("ingest/export round-trip on generated data") {
  synth::PopulationProfile profile;
  profile.n_subjects = 25;
  profile.peers_min = 1;
  profile.peers_max = 4;
  const auto study = synth::generate(profile, synth::ReporterBias{}, 77);
  std::istringstream in(to_csv(study.dataset));
  const auto round = ingest(in);
  CHECK(round.rejected.empty());
  CHECK(round.dataset == study.dataset);
}

TEST_CASE("threshold_breakdown: pinned examples") {
  SUBCASE("all answers 3.0") {
    const auto ds = dataset_with_q_values(Question::Q8, {3, 3, 3});
    for (double t : kThresholds)
      CHECK(threshold_breakdown(ds, Question::Q8, std::nullopt, t)
                .fraction_at_or_above == 1.0);
  }
  SUBCASE("0,1,2,3 at threshold 2 gives one half") {
    const auto ds = dataset_with_q_values(Question::Q8, {0, 1, 2, 3});
    const auto entry = threshold_breakdown(ds, Question::Q8, std::nullopt, 2.0);
    CHECK(entry.fraction_at_or_above == 0.5);
    CHECK(entry.n == 4);
  }
  SUBCASE("2.5 misses the 3.0 threshold") {
    const auto ds = dataset_with_q_values(Question::Q8, {2.5});
    CHECK(threshold_breakdown(ds, Question::Q8, std::nullopt, 3.0)
              .fraction_at_or_above == 0.0);
  }
}

TEST_CASE("threshold_breakdown: validation and empty slices") {
  const auto ds = dataset_with_q_values(Question::Q8, {1.0});
  CHECK_THROWS_AS(threshold_breakdown(ds, Question::Q8, std::nullopt, 1.7),
                  std::invalid_argument);
  CHECK_THROWS_AS(threshold_breakdown(ds, Question::Q9, std::nullopt, 2.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      threshold_breakdown(ds, Question::Q8, RespondentGroup::Parent, 2.0),
      EmptyDataError);

  // N/A answers leave nothing applicable
  auto rec = make_record("r", RespondentGroup::ElementaryChild, "s",
                         {0, 1, 1, 1, 1, 1, 1, 1});
  rec.answers[0] = Rating::na();
  const Dataset nas({rec});
  CHECK_THROWS_AS(threshold_breakdown(nas, Question::Q1, std::nullopt, 2.0),
                  EmptyDataError);
}

TEST_CASE("threshold series is monotone non-increasing on random data") {
  synth::PopulationProfile profile;
  profile.n_subjects = 40;
  profile.peers_min = 2;
  profile.peers_max = 4;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto study = synth::generate(profile, synth::ReporterBias{}, seed);
    for (int q = 0; q < kRatingQuestions; ++q) {
      const auto report = threshold_report(
          study.dataset, static_cast<Question>(q), std::nullopt);
      for (std::size_t t = 1; t < kThresholds.size(); ++t)
        CHECK(report.fraction_at_or_above[t] <=
              report.fraction_at_or_above[t - 1]);
    }
  }
}

TEST_CASE("median_profile: pinned examples") {
  SUBCASE("singleton") {
    const auto ds = dataset_with_q_values(Question::Q5, {1.5});
    const auto profile = median_profile(ds, std::nullopt);
    CHECK(profile.medians[4] == 1.5);
  }
  SUBCASE("even count averages the central pair") {
    const auto ds = dataset_with_q_values(Question::Q5, {1.0, 2.0});
    CHECK(median_profile(ds, std::nullopt).medians[4] == 1.5);
  }
  SUBCASE("five sorted values") {
    const auto ds = dataset_with_q_values(Question::Q5, {0, 0.5, 3, 3, 3});
    CHECK(median_profile(ds, std::nullopt).medians[4] == 3.0);
  }
  SUBCASE("no applicable answers leaves the entry absent") {
    auto rec = make_record("r", RespondentGroup::ElementaryChild, "s",
                           {0, 1, 1, 1, 1, 1, 1, 1});
    rec.answers[0] = Rating::na();
    const auto profile = median_profile(Dataset({rec}), std::nullopt);
    CHECK_FALSE(profile.medians[0].has_value());
    CHECK(profile.medians[1].has_value());
  }
}

TEST_CASE("median_profile lands on the quarter-step grid inside [0, 3]") {
  synth::PopulationProfile profile;
  profile.n_subjects = 30;
  profile.peers_min = 1;
  profile.peers_max = 3;
  const auto study = synth::generate(profile, synth::ReporterBias{}, 5);
  for (auto group : {std::optional<RespondentGroup>{},
                     std::optional<RespondentGroup>{
                         RespondentGroup::ElementaryChild}}) {
    const auto medians = median_profile(study.dataset, group);
    for (const auto& m : medians.medians) {
      if (!m) continue;
      CHECK(*m >= 0.0);
      CHECK(*m <= 3.0);
      CHECK(std::round(*m * 4.0) == *m * 4.0);
    }
  }
}

TEST_CASE("respondent_stats") {
  SUBCASE("one respondent, four subjects") {
    std::vector<AssessmentRecord> records;
    for (int s = 0; s < 4; ++s)
      records.push_back(make_record("r1", RespondentGroup::ElementaryChild,
                                    "s" + std::to_string(s),
                                    {1, 1, 1, 1, 1, 1, 1, 1}));
    const auto stats = respondent_stats(Dataset(std::move(records)),
                                        std::nullopt);
    CHECK(stats.respondents == 1);
    CHECK(stats.mean_subjects == 4.0);
    CHECK(stats.min_subjects == 4);
    CHECK(stats.max_subjects == 4);
  }
  SUBCASE("counts 1 and 24 match the reported child range") {
    std::vector<AssessmentRecord> records;
    records.push_back(make_record("r1", RespondentGroup::ElementaryChild,
                                  "x", {1, 1, 1, 1, 1, 1, 1, 1}));
    for (int s = 0; s < 24; ++s)
      records.push_back(make_record("r2", RespondentGroup::ElementaryChild,
                                    "s" + std::to_string(s),
                                    {1, 1, 1, 1, 1, 1, 1, 1}));
    const auto stats = respondent_stats(Dataset(std::move(records)),
                                        std::nullopt);
    CHECK(stats.min_subjects == 1);
    CHECK(stats.max_subjects == 24);
    CHECK(stats.mean_subjects == 12.5);
  }
  SUBCASE("empty filter") {
    const auto ds = dataset_with_q_values(Question::Q8, {1.0});
    CHECK_THROWS_AS(respondent_stats(ds, RespondentGroup::Parent),
                    EmptyDataError);
  }
}

TEST_CASE("design_matrix: construction and encodings") {
  SUBCASE("single record with two regressors") {
    auto rec = make_record("r", RespondentGroup::ElementaryChild, "s",
                           {0, 2.0, 0.5, 0, 0, 0, 0, 3.0});
    auto other = make_record("r", RespondentGroup::ElementaryChild, "s2",
                             {0, 1.0, 1.0, 0, 0, 0, 0, 1.0});
    ModelSpec spec;
    spec.response = {Question::Q8, ResponseEncoding::BinaryThreshold, 2.0};
    spec.regressors = {Question::Q2, Question::Q3};
    spec.family = ModelFamily::BinaryLogit;
    const auto data = design_matrix(Dataset({rec, other}), spec);
    REQUIRE(data.x.rows == 2);
    REQUIRE(data.x.cols == 3);
    CHECK(data.x.at(0, 0) == 1.0);
    CHECK(data.x.at(0, 1) == 2.0);
    CHECK(data.x.at(0, 2) == 0.5);
    CHECK(data.y[0] == 1);  // 3.0 >= 2.0
    CHECK(data.y[1] == 0);  // 1.0 < 2.0
  }
  SUBCASE("binary threshold on ratings 1.5 and 3.0") {
    auto a = make_record("r", RespondentGroup::ElementaryChild, "s1",
                         {0, 1, 0, 0, 0, 0, 0, 1.5});
    auto b = make_record("r", RespondentGroup::ElementaryChild, "s2",
                         {0, 2, 0, 0, 0, 0, 0, 3.0});
    ModelSpec spec;
    spec.response = {Question::Q8, ResponseEncoding::BinaryThreshold, 2.0};
    spec.regressors = {Question::Q2};
    const auto data = design_matrix(Dataset({a, b}), spec);
    CHECK(data.y == std::vector<int>{0, 1});
  }
  SUBCASE("ordered levels floor the half steps") {
    auto a = make_record("r", RespondentGroup::ElementaryChild, "s1",
                         {0, 1, 0, 0, 0, 0.5, 0, 1});
    auto b = make_record("r", RespondentGroup::ElementaryChild, "s2",
                         {0, 2, 0, 0, 0, 2.5, 0, 1});
    auto c = make_record("r", RespondentGroup::ElementaryChild, "s3",
                         {0, 3, 0, 0, 0, 3.0, 0, 1});
    ModelSpec spec;
    spec.response = {Question::Q6, ResponseEncoding::OrderedLevels, 2.0};
    spec.regressors = {Question::Q2};
    spec.family = ModelFamily::OrderedLogit;
    const auto data = design_matrix(Dataset({a, b, c}), spec);
    CHECK(data.y == std::vector<int>{0, 2, 3});
    CHECK(data.categories == 4);
  }
  SUBCASE("Q9 regressor is a female indicator") {
    auto a = make_record("r", RespondentGroup::ElementaryChild, "s1",
                         {0, 1, 0, 0, 0, 0, 0, 3}, Sex::Female);
    auto b = make_record("r", RespondentGroup::ElementaryChild, "s2",
                         {0, 1, 0, 0, 0, 0, 0, 0}, Sex::Male);
    auto c = make_record("r", RespondentGroup::ElementaryChild, "s3",
                         {0, 1, 0, 0, 0, 0, 0, 3}, Sex::Undeclared);
    ModelSpec spec;
    spec.response = {Question::Q8, ResponseEncoding::BinaryThreshold, 2.0};
    spec.regressors = {Question::Q9};
    const auto data = design_matrix(Dataset({a, b, c}), spec);
    CHECK(data.x.at(0, 1) == 1.0);
    CHECK(data.x.at(1, 1) == 0.0);
    CHECK(data.x.at(2, 1) == 0.0);
  }
}

TEST_CASE("design_matrix: listwise deletion and error paths") {
  auto na_rec = make_record("r1", RespondentGroup::ElementaryChild, "s1",
                            {0, 1, 0, 0, 0, 0, 0, 3});
  na_rec.answers[0] = Rating::na();
  auto full_rec = make_record("r2", RespondentGroup::ElementaryChild, "s1",
                              {2, 1, 0, 0, 0, 0, 0, 0});

  ModelSpec uses_q1;
  uses_q1.response = {Question::Q8, ResponseEncoding::BinaryThreshold, 2.0};
  uses_q1.regressors = {Question::Q1};

  SUBCASE("all rows N/A in a used question") {
    CHECK_THROWS_AS(design_matrix(Dataset({na_rec}), uses_q1), EmptyDataError);
  }
  SUBCASE("row conservation") {
    auto third = make_record("r3", RespondentGroup::ElementaryChild, "s1",
                             {1, 1, 0, 0, 0, 0, 0, 3});
    const Dataset ds({na_rec, full_rec, third});
    const auto data = design_matrix(ds, uses_q1);
    CHECK(data.x.rows + data.dropped == ds.size());
    CHECK(data.dropped == 1);
  }
  SUBCASE("constant response") {
    auto same = full_rec;
    same.respondent_id = "r9";
    ModelSpec spec;
    spec.response = {Question::Q8, ResponseEncoding::BinaryThreshold, 2.0};
    spec.regressors = {Question::Q2};
    CHECK_THROWS_AS(design_matrix(Dataset({full_rec, same}), spec),
                    DegenerateModelError);
  }
  SUBCASE("response among regressors") {
    ModelSpec spec;
    spec.response = {Question::Q8, ResponseEncoding::BinaryThreshold, 2.0};
    spec.regressors = {Question::Q8};
    CHECK_THROWS_AS(design_matrix(Dataset({full_rec}), spec),
                    std::invalid_argument);
  }
}

TEST_CASE("hand-tabulated fixture reproduces exact counts") {
  const auto result = ingest_file(std::string(PEERDE_FIXTURE_DIR) +
                                  "/survey_fixture.csv");
  REQUIRE(result.rejected.empty());
  REQUIRE(result.dataset.size() == 8);

  const auto child = RespondentGroup::ElementaryChild;
  const auto parent = RespondentGroup::Parent;

  // child Q8 answers {2.5, 3, 2, 1}
  const auto q8_child = threshold_report(result.dataset, Question::Q8, child);
  CHECK(q8_child.n == 4);
  CHECK(q8_child.fraction_at_or_above[0] == 0.75);   // >= 1.5
  CHECK(q8_child.fraction_at_or_above[1] == 0.75);   // >= 2.0
  CHECK(q8_child.fraction_at_or_above[2] == 0.5);    // >= 2.5
  CHECK(q8_child.fraction_at_or_above[3] == 0.25);   // >= 3.0

  // child Q1 answers {2, 3, N/A, 1.5}: N/A excluded
  const auto q1_child = threshold_report(result.dataset, Question::Q1, child);
  CHECK(q1_child.n == 3);
  CHECK(q1_child.fraction_at_or_above[0] == 1.0);
  CHECK(q1_child.fraction_at_or_above[1] == doctest::Approx(2.0 / 3.0));
  CHECK(q1_child.fraction_at_or_above[2] == doctest::Approx(1.0 / 3.0));

  // parent Q8 answers {3, 1.5, 3, 2}
  const auto q8_parent = threshold_report(result.dataset, Question::Q8, parent);
  CHECK(q8_parent.fraction_at_or_above[0] == 1.0);
  CHECK(q8_parent.fraction_at_or_above[1] == 0.75);
  CHECK(q8_parent.fraction_at_or_above[3] == 0.5);

  // medians: child Q8 {1,2,2.5,3} -> 2.25; parent Q8 {1.5,2,3,3} -> 2.5
  CHECK(median_profile(result.dataset, child).medians[7] == 2.25);
  CHECK(median_profile(result.dataset, parent).medians[7] == 2.5);
  // child females only: Q8 {2.5, 2} -> 2.25
  CHECK(median_profile(result.dataset, child, Sex::Female).medians[7] == 2.25);

  const auto stats_child = respondent_stats(result.dataset, child);
  CHECK(stats_child.respondents == 2);
  CHECK(stats_child.mean_subjects == 2.0);
  CHECK(stats_child.min_subjects == 2);
  CHECK(stats_child.max_subjects == 2);
}
