#pragma once

//
// Synthetic peer-assessment studies with known ground truth. Reporters
// perturb the true rating: self-reports shift down one grid step with a
// fixed probability, parent reports shift down or up, peer reports add
// zero-mean Gaussian noise snapped back onto the grid. Peer reviewers are
// drawn from the other subjects, so each reviewer rates several peers.
//

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>

#include "peerde/survey.hpp"

namespace peerde::synth {

inline constexpr int kGridLevels = 7;  // 0, 0.5, ..., 3.0

struct PopulationProfile {
  int n_subjects = 300;
  // Probability weights over the rating grid for the true
  // harmful-Internet-use (HIU) rating. The default is a high-prevalence
  // population: measurement error is most consequential where the
  // construct is common.
  std::array<double, kGridLevels> true_hiu_weights{0.01, 0.02, 0.03, 0.06,
                                                   0.12, 0.26, 0.50};
  std::array<double, 3> sex_mix{0.48, 0.48, 0.04};  // F, M, U
  int peers_min = 5;
  int peers_max = 5;
};

// Throws std::invalid_argument on bad weights or peer counts. Peer
// reviewers come from the other subjects, so peers_max <= n_subjects - 1.
void validate(const PopulationProfile& profile);

struct ReporterBias {
  double self_under_prob = 0.365;
  double parent_under_prob = 0.357;
  double parent_over_prob = 0.348;
  double peer_noise_sd = 0.5;  // rating units
};

void validate(const ReporterBias& bias);

struct SyntheticStudy {
  survey::Dataset dataset;  // self + parent + peer records
  std::map<std::string, double> ground_truth;  // subject_id -> true rating
  std::uint64_t seed = 0;
};

SyntheticStudy generate(const PopulationProfile& profile,
                        const ReporterBias& bias, std::uint64_t seed);

struct EstimatorErrors {
  double self_mae = 0.0;
  double parent_mae = 0.0;
  double peer_median_mae = 0.0;
};

// Mean absolute error of each estimator of the true rating, over subjects.
// The peer estimator is the median of the subject's peer Q8 reports.
// Throws IncompleteStudyError when a subject misses a report kind.
EstimatorErrors estimator_errors(const SyntheticStudy& study);

void export_ground_truth_csv(const SyntheticStudy& study, std::ostream& out);

}  // namespace peerde::synth
