#pragma once

#include <json.hpp>

#include "peerde/de.hpp"
#include "peerde/stats.hpp"
#include "peerde/survey.hpp"
#include "peerde/synth.hpp"

namespace peerde {

nlohmann::json to_json(const de::DEConfig& config);
nlohmann::json to_json(const de::RunResult& result);
nlohmann::json to_json(const survey::ThresholdReport& report);
nlohmann::json to_json(const survey::MedianProfile& profile);
nlohmann::json to_json(const survey::RespondentStats& stats);
nlohmann::json to_json(const std::vector<survey::RowRejection>& rejected);
nlohmann::json to_json(const stats::FitResult& fit);
nlohmann::json to_json(const synth::EstimatorErrors& errors);

}  // namespace peerde
