#include "peerde/json_io.hpp"

#include <cstdio>

namespace peerde {

using nlohmann::json;

json to_json(const de::DEConfig& config) {
  json j{{"np", config.np},
         {"f", config.f},
         {"cr", config.cr},
         {"strategy", de::to_string(config.strategy)},
         {"max_generations", config.stop.max_generations},
         {"seed", config.seed},
         {"threads", config.threads}};
  if (config.stop.target_fitness) j["target_fitness"] = *config.stop.target_fitness;
  if (config.stop.stagnation_window)
    j["stagnation_window"] = *config.stop.stagnation_window;
  return j;
}

json to_json(const de::RunResult& result) {
  return json{{"best", result.best.params},
              {"best_fitness", result.best.fitness ? json(*result.best.fitness)
                                                   : json()},
              {"history", result.best_history},
              {"generations", result.generations},
              {"stop_reason", de::to_string(result.reason)},
              {"evaluations", result.evaluations}};
}

json to_json(const survey::ThresholdReport& report) {
  json fractions = json::object();
  for (std::size_t t = 0; t < survey::kThresholds.size(); ++t) {
    char key[8];
    std::snprintf(key, sizeof key, "%.1f", survey::kThresholds[t]);
    fractions[key] = report.fraction_at_or_above[t];
  }
  json j{{"question", to_string(report.question)},
         {"n", report.n},
         {"fraction_at_or_above", fractions}};
  j["group"] = report.group ? json(to_string(*report.group)) : json();
  return j;
}

json to_json(const survey::MedianProfile& profile) {
  json medians = json::object();
  for (int q = 0; q < kRatingQuestions; ++q) {
    const auto& m = profile.medians[static_cast<std::size_t>(q)];
    medians[std::string(to_string(static_cast<Question>(q)))] =
        m ? json(*m) : json();
  }
  json j{{"medians", medians}};
  j["group"] = profile.group ? json(to_string(*profile.group)) : json();
  j["sex"] = profile.sex ? json(to_string(*profile.sex)) : json();
  return j;
}

json to_json(const survey::RespondentStats& stats) {
  return json{{"respondents", stats.respondents},
              {"mean_subjects", stats.mean_subjects},
              {"min_subjects", stats.min_subjects},
              {"max_subjects", stats.max_subjects}};
}

json to_json(const std::vector<survey::RowRejection>& rejected) {
  json rows = json::array();
  for (const auto& r : rejected)
    rows.push_back(json{{"line", r.line}, {"reason", r.reason}});
  return rows;
}

json to_json(const stats::FitResult& fit) {
  json regressors = json::array();
  for (const auto q : fit.spec.regressors)
    regressors.push_back(to_string(q));
  json j{{"model", to_string(fit.spec.id)},
         {"family", to_string(fit.spec.family)},
         {"response", to_string(fit.spec.response.question)},
         {"regressors", regressors},
         {"coefficients", fit.coefficients},
         {"log_likelihood", fit.log_likelihood},
         {"null_log_likelihood", fit.null_log_likelihood},
         {"lr_statistic", fit.lr_statistic},
         {"lr_p_value", fit.lr_p_value},
         {"percent_correct", fit.percent_correct},
         {"n", fit.n},
         {"de_config", to_json(fit.de_config)}};
  j["group"] =
      fit.spec.group_filter ? json(to_string(*fit.spec.group_filter)) : json();
  j["cutpoints"] = fit.cutpoints ? json(fit.cutpoints->values()) : json();
  j["auc"] = fit.auc ? json(*fit.auc) : json();
  return j;
}

json to_json(const synth::EstimatorErrors& errors) {
  return json{{"self_mae", errors.self_mae},
              {"parent_mae", errors.parent_mae},
              {"peer_median_mae", errors.peer_median_mae}};
}

}  // namespace peerde
