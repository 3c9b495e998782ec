#include "peerde/synth.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <vector>

#include "peerde/errors.hpp"
#include "peerde/rng.hpp"

namespace peerde::synth {

namespace {

constexpr double kStep = 0.5;

double snap_to_grid(double v) {
  const double snapped = std::round(v / kStep) * kStep;
  return std::min(3.0, std::max(0.0, snapped));
}

double grid_level(int index) { return static_cast<double>(index) * kStep; }

int draw_weighted(Rng& rng, std::span<const double> weights) {
  const double u = rng.uniform01();
  double cum = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    cum += weights[i];
    if (u < cum) return static_cast<int>(i);
  }
  return static_cast<int>(weights.size()) - 1;
}

std::string subject_name(int i) {
  std::ostringstream os;
  os << "s" << i;
  return os.str();
}

// q1..q7 are grid-snapped noisy copies of the reporter's own Q8 value, so
// a noiseless unbiased study reproduces the truth in every field.
void fill_answers(survey::AssessmentRecord& rec, double q8, double noise_sd,
                  Rng& rng) {
  for (int q = 0; q < kRatingQuestions - 1; ++q) {
    const double v =
        noise_sd > 0.0 ? snap_to_grid(q8 + noise_sd * rng.normal()) : q8;
    rec.answers[static_cast<std::size_t>(q)] = survey::Rating::of(v);
  }
  rec.answers[kRatingQuestions - 1] = survey::Rating::of(q8);
}

}  // namespace

void validate(const PopulationProfile& profile) {
  if (profile.n_subjects < 1)
    throw std::invalid_argument("n_subjects must be positive");
  double sum = 0.0;
  for (double w : profile.true_hiu_weights) {
    if (w < 0.0) throw std::invalid_argument("negative truth weight");
    sum += w;
  }
  if (std::fabs(sum - 1.0) > 1e-12)
    throw std::invalid_argument("truth weights must sum to 1");
  double sex_sum = 0.0;
  for (double w : profile.sex_mix) {
    if (w < 0.0) throw std::invalid_argument("negative sex weight");
    sex_sum += w;
  }
  if (std::fabs(sex_sum - 1.0) > 1e-12)
    throw std::invalid_argument("sex mix must sum to 1");
  if (profile.peers_min < 1)
    throw std::invalid_argument("peers_min must be >= 1");
  if (profile.peers_max < profile.peers_min)
    throw std::invalid_argument("peers_max below peers_min");
  if (profile.peers_max > profile.n_subjects - 1)
    throw std::invalid_argument(
        "peers_max must leave enough other subjects to review");
}

void validate(const ReporterBias& bias) {
  for (double p : {bias.self_under_prob, bias.parent_under_prob,
                   bias.parent_over_prob}) {
    if (!(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument("bias probabilities must lie in [0, 1]");
  }
  if (bias.parent_under_prob + bias.parent_over_prob > 1.0)
    throw std::invalid_argument("parent under + over probability exceeds 1");
  if (!(bias.peer_noise_sd >= 0.0))
    throw std::invalid_argument("peer_noise_sd must be non-negative");
}

SyntheticStudy generate(const PopulationProfile& profile,
                        const ReporterBias& bias, std::uint64_t seed) {
  validate(profile);
  validate(bias);
  Rng rng(seed);

  const int n = profile.n_subjects;
  std::vector<double> truth(static_cast<std::size_t>(n));
  std::vector<Sex> sex(static_cast<std::size_t>(n));
  std::vector<int> age(static_cast<std::size_t>(n));

  std::vector<survey::AssessmentRecord> records;
  SyntheticStudy study;
  study.seed = seed;

  for (int s = 0; s < n; ++s) {
    truth[static_cast<std::size_t>(s)] =
        grid_level(draw_weighted(rng, profile.true_hiu_weights));
    sex[static_cast<std::size_t>(s)] =
        static_cast<Sex>(draw_weighted(rng, profile.sex_mix));
    age[static_cast<std::size_t>(s)] =
        10 + static_cast<int>(rng.uniform_below(13));
    study.ground_truth[subject_name(s)] = truth[static_cast<std::size_t>(s)];
  }

  for (int s = 0; s < n; ++s) {
    const auto idx = static_cast<std::size_t>(s);
    const std::string subject = subject_name(s);
    const double t = truth[idx];

    // Self-report: down one step with self_under_prob, floored at 0.
    {
      survey::AssessmentRecord rec;
      rec.respondent_id = subject;
      rec.respondent_group = RespondentGroup::ElementaryChild;
      rec.subject_id = subject;
      rec.subject_age = age[idx];
      rec.subject_sex = sex[idx];
      const double reported =
          rng.uniform01() < bias.self_under_prob ? std::max(0.0, t - kStep) : t;
      fill_answers(rec, reported, bias.peer_noise_sd, rng);
      records.push_back(std::move(rec));
    }

    // Parent report: down / up one step with the respective probabilities.
    {
      survey::AssessmentRecord rec;
      rec.respondent_id = "par_" + subject;
      rec.respondent_group = RespondentGroup::Parent;
      rec.subject_id = subject;
      rec.subject_age = age[idx];
      rec.subject_sex = sex[idx];
      rec.own_child = true;
      const double u = rng.uniform01();
      double reported = t;
      if (u < bias.parent_under_prob) {
        reported = std::max(0.0, t - kStep);
      } else if (u < bias.parent_under_prob + bias.parent_over_prob) {
        reported = std::min(3.0, t + kStep);
      }
      fill_answers(rec, reported, bias.peer_noise_sd, rng);
      records.push_back(std::move(rec));
    }

    // Peer reports from the following subjects (wrapping around), which
    // keeps reviewer/subject pairs unique and gives every reviewer
    // several subjects.
    const int span = profile.peers_max - profile.peers_min + 1;
    const int k = profile.peers_min +
                  static_cast<int>(rng.uniform_below(
                      static_cast<std::uint64_t>(span)));
    for (int j = 0; j < k; ++j) {
      survey::AssessmentRecord rec;
      rec.respondent_id = subject_name((s + 1 + j) % n);
      rec.respondent_group = RespondentGroup::ElementaryChild;
      rec.subject_id = subject;
      rec.subject_age = age[idx];
      rec.subject_sex = sex[idx];
      const double reported =
          bias.peer_noise_sd > 0.0
              ? snap_to_grid(t + bias.peer_noise_sd * rng.normal())
              : t;
      fill_answers(rec, reported, bias.peer_noise_sd, rng);
      records.push_back(std::move(rec));
    }
  }

  study.dataset = survey::Dataset(std::move(records), "synthetic");
  return study;
}

EstimatorErrors estimator_errors(const SyntheticStudy& study) {
  struct Reports {
    std::vector<double> self, parent, peers;
  };
  std::map<std::string, Reports> by_subject;
  for (const auto& r : study.dataset.records()) {
    const double q8 = r.answers[kRatingQuestions - 1].value();
    auto& reports = by_subject[r.subject_id];
    if (r.respondent_group == RespondentGroup::Parent) {
      reports.parent.push_back(q8);
    } else if (r.respondent_id == r.subject_id) {
      reports.self.push_back(q8);
    } else {
      reports.peers.push_back(q8);
    }
  }

  EstimatorErrors errors;
  std::size_t n = 0;
  for (const auto& [subject, t] : study.ground_truth) {
    const auto it = by_subject.find(subject);
    if (it == by_subject.end() || it->second.self.empty() ||
        it->second.parent.empty() || it->second.peers.empty())
      throw IncompleteStudyError("subject " + subject +
                                 " misses a report kind");
    const auto& reports = it->second;
    errors.self_mae += std::fabs(reports.self.front() - t);
    errors.parent_mae += std::fabs(reports.parent.front() - t);

    std::vector<double> peers = reports.peers;
    std::sort(peers.begin(), peers.end());
    const std::size_t m = peers.size();
    const double median = (m % 2 == 1)
                              ? peers[m / 2]
                              : 0.5 * (peers[m / 2 - 1] + peers[m / 2]);
    errors.peer_median_mae += std::fabs(median - t);
    ++n;
  }
  errors.self_mae /= static_cast<double>(n);
  errors.parent_mae /= static_cast<double>(n);
  errors.peer_median_mae /= static_cast<double>(n);
  return errors;
}

void export_ground_truth_csv(const SyntheticStudy& study, std::ostream& out) {
  out << "subject_id,true_rating\n";
  for (const auto& [subject, t] : study.ground_truth) {
    out << subject << ',';
    if (t == std::floor(t)) {
      out << static_cast<int>(t);
    } else {
      out << t;
    }
    out << '\n';
  }
}

}  // namespace peerde::synth
