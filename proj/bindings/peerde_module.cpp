#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "peerde/de.hpp"
#include "peerde/errors.hpp"
#include "peerde/json_io.hpp"
#include "peerde/objectives.hpp"
#include "peerde/stats.hpp"
#include "peerde/survey.hpp"
#include "peerde/synth.hpp"
#include "peerde/version.hpp"

namespace py = pybind11;
using namespace peerde;
using nlohmann::json;

namespace {

py::object json_to_py(const json& j) {
  switch (j.type()) {
    case json::value_t::null: return py::none();
    case json::value_t::boolean: return py::bool_(j.get<bool>());
    case json::value_t::number_integer: return py::int_(j.get<long long>());
    case json::value_t::number_unsigned:
      return py::int_(j.get<unsigned long long>());
    case json::value_t::number_float: return py::float_(j.get<double>());
    case json::value_t::string: return py::str(j.get<std::string>());
    case json::value_t::array: {
      py::list out;
      for (const auto& item : j) out.append(json_to_py(item));
      return out;
    }
    case json::value_t::object: {
      py::dict out;
      for (auto it = j.begin(); it != j.end(); ++it)
        out[py::str(it.key())] = json_to_py(it.value());
      return out;
    }
    default: return py::none();
  }
}

de::DEConfig build_config(int np, double f, double cr,
                          const std::string& strategy, int generations,
                          std::uint64_t seed, std::optional<double> target,
                          std::optional<int> stagnation, int threads) {
  const auto parsed = de::parse_strategy(strategy);
  if (!parsed) throw std::invalid_argument("unknown strategy " + strategy);
  de::DEConfig cfg;
  cfg.np = np;
  cfg.f = f;
  cfg.cr = cr;
  cfg.strategy = *parsed;
  cfg.stop.max_generations = generations;
  cfg.stop.target_fitness = target;
  cfg.stop.stagnation_window = stagnation;
  cfg.seed = seed;
  cfg.threads = threads;
  return cfg;
}

ModelSpec spec_from_name(const std::string& model) {
  const auto id = parse_model_id(model);
  if (!id) throw std::invalid_argument("unknown model " + model);
  return catalog_model(*id);
}

synth::PopulationProfile build_profile(
    int subjects, int peers_min, int peers_max,
    const std::optional<std::vector<double>>& truth_weights) {
  synth::PopulationProfile profile;
  profile.n_subjects = subjects;
  profile.peers_min = peers_min;
  profile.peers_max = peers_max;
  if (truth_weights) {
    if (truth_weights->size() != profile.true_hiu_weights.size())
      throw std::invalid_argument("truth_weights needs 7 entries");
    std::copy(truth_weights->begin(), truth_weights->end(),
              profile.true_hiu_weights.begin());
  }
  return profile;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Differential evolution optimizer and peer-assessment "
            "measurement pipeline";
  m.attr("__version__") = PEERDE_VERSION;

  py::register_exception<EvaluationError>(m, "EvaluationError");
  py::register_exception<EmptyDataError>(m, "EmptyDataError");
  py::register_exception<DegenerateModelError>(m, "DegenerateModelError");
  py::register_exception<InconsistentFitError>(m, "InconsistentFitError");

  m.def("logistic_cdf", &stats::logistic_cdf, py::arg("z"));

  m.def(
      "auc",
      [](const std::vector<double>& scores, const std::vector<int>& labels) {
        return stats::auc(scores, labels);
      },
      py::arg("scores"), py::arg("labels"),
      "Mann-Whitney AUC with half credit for ties");

  m.def(
      "lr_test",
      [](double full_ll, double null_ll, int df) {
        const auto r = stats::lr_test(full_ll, null_ll, df);
        return py::make_tuple(r.statistic, r.p_value);
      },
      py::arg("full_ll"), py::arg("null_ll"), py::arg("df"));

  m.def("chi_square_sf", &stats::chi_square_sf, py::arg("x"), py::arg("df"));

  m.def(
      "binary_loglik",
      [](const std::vector<double>& beta,
         const std::vector<std::vector<double>>& x_rows,
         const std::vector<int>& y) {
        if (x_rows.empty()) throw std::invalid_argument("empty design");
        Matrix x(x_rows.size(), x_rows.front().size());
        for (std::size_t i = 0; i < x_rows.size(); ++i) {
          if (x_rows[i].size() != x.cols)
            throw std::invalid_argument("ragged design matrix");
          for (std::size_t j = 0; j < x.cols; ++j) x.at(i, j) = x_rows[i][j];
        }
        return stats::binary_loglik(beta, x, y);
      },
      py::arg("beta"), py::arg("x_rows"), py::arg("y"),
      "Bernoulli-logit log-likelihood; rows include the leading 1");

  m.def(
      "ordered_loglik",
      [](const std::vector<double>& slopes, const std::vector<double>& tau,
         const std::vector<std::vector<double>>& x_rows,
         const std::vector<int>& y) {
        const std::size_t cols = x_rows.empty() ? 0 : x_rows.front().size();
        Matrix x(x_rows.size(), cols);
        for (std::size_t i = 0; i < x_rows.size(); ++i)
          for (std::size_t j = 0; j < cols; ++j) x.at(i, j) = x_rows[i][j];
        return stats::ordered_loglik(slopes, stats::Cutpoints(tau), x, y);
      },
      py::arg("slopes"), py::arg("tau"), py::arg("x_rows"), py::arg("y"),
      "Ordered-logit log-likelihood; rows exclude the intercept");

  m.def(
      "optimize_test_function",
      [](const std::string& fn, int dim, int np, double f, double cr,
         const std::string& strategy, int generations, std::uint64_t seed,
         std::optional<double> target, std::optional<int> stagnation,
         int threads) {
        const auto kind = objectives::parse_test_function(fn);
        if (!kind) throw std::invalid_argument("unknown test function " + fn);
        const auto test_fn = objectives::make_test_function(*kind, dim);
        const auto cfg = build_config(np, f, cr, strategy, generations, seed,
                                      target, stagnation, threads);
        const auto result =
            de::evolve(test_fn.objective(), test_fn.default_bounds, cfg);
        return json_to_py(to_json(result));
      },
      py::arg("fn"), py::arg("dim") = 10, py::arg("np") = 40,
      py::arg("f") = 0.8, py::arg("cr") = 0.9, py::arg("strategy") = "rand1",
      py::arg("generations") = 1000, py::arg("seed") = 0,
      py::arg("target") = std::nullopt, py::arg("stagnation") = std::nullopt,
      py::arg("threads") = 1);

  m.def(
      "optimize",
      [](const std::function<double(std::vector<double>)>& objective,
         const std::vector<double>& lower, const std::vector<double>& upper,
         int np, double f, double cr, const std::string& strategy,
         int generations, std::uint64_t seed, std::optional<double> target,
         std::optional<int> stagnation) {
        const auto cfg = build_config(np, f, cr, strategy, generations, seed,
                                      target, stagnation, /*threads=*/1);
        const de::SearchBounds bounds(lower, upper);
        const de::Objective wrapped =
            [&objective](std::span<const double> x) {
              return objective(std::vector<double>(x.begin(), x.end()));
            };
        // python objectives hold the GIL, so evaluation stays serial
        const auto result = de::evolve(wrapped, bounds, cfg);
        return json_to_py(to_json(result));
      },
      py::arg("objective"), py::arg("lower"), py::arg("upper"),
      py::arg("np") = 40, py::arg("f") = 0.8, py::arg("cr") = 0.9,
      py::arg("strategy") = "rand1", py::arg("generations") = 200,
      py::arg("seed") = 0, py::arg("target") = std::nullopt,
      py::arg("stagnation") = std::nullopt);

  m.def(
      "report_csv",
      [](const std::string& path, const std::optional<std::string>& group,
         const std::optional<std::string>& sex) {
        const auto ingested = survey::ingest_file(path);
        if (ingested.dataset.size() == 0)
          throw EmptyDataError("no valid rows in " + path);
        std::optional<RespondentGroup> g;
        if (group) {
          const auto parsed = parse_group(*group);
          if (!parsed) throw std::invalid_argument("unknown group " + *group);
          g = parsed;
        }
        std::optional<Sex> s;
        if (sex) {
          const auto parsed = parse_sex(*sex);
          if (!parsed) throw std::invalid_argument("unknown sex " + *sex);
          s = parsed;
        }
        json thresholds = json::array();
        for (int q = 0; q < kRatingQuestions; ++q) {
          try {
            thresholds.push_back(to_json(survey::threshold_report(
                ingested.dataset, static_cast<Question>(q), g)));
          } catch (const EmptyDataError&) {
          }
        }
        json doc{{"n_records", ingested.dataset.size()},
                 {"rejected", to_json(ingested.rejected)},
                 {"thresholds", thresholds},
                 {"medians",
                  to_json(survey::median_profile(ingested.dataset, g, s))},
                 {"respondent_stats",
                  to_json(survey::respondent_stats(ingested.dataset, g))}};
        return json_to_py(doc);
      },
      py::arg("path"), py::arg("group") = std::nullopt,
      py::arg("sex") = std::nullopt);

  m.def(
      "fit_csv",
      [](const std::string& path, const std::string& model,
         const std::string& criterion, int np, double f, double cr,
         const std::string& strategy, int generations, std::uint64_t seed,
         double coef_bound, int threads) {
        const auto spec = spec_from_name(model);
        const auto crit = parse_criterion(criterion);
        if (!crit)
          throw std::invalid_argument("unknown criterion " + criterion);
        const auto ingested = survey::ingest_file(path);
        if (ingested.dataset.size() == 0)
          throw EmptyDataError("no valid rows in " + path);
        const auto cfg = build_config(np, f, cr, strategy, generations, seed,
                                      std::nullopt, std::nullopt, threads);
        const auto result =
            stats::fit(spec, ingested.dataset, cfg, *crit, coef_bound);
        return json_to_py(to_json(result));
      },
      py::arg("path"), py::arg("model") = "M1",
      py::arg("criterion") = "loglik", py::arg("np") = 40,
      py::arg("f") = 0.8, py::arg("cr") = 0.9, py::arg("strategy") = "rand1",
      py::arg("generations") = 500, py::arg("seed") = 0,
      py::arg("coef_bound") = 10.0, py::arg("threads") = 1);

  m.def(
      "simulate",
      [](int subjects, int peers, int reps, std::uint64_t seed,
         double self_under, double parent_under, double parent_over,
         double noise, const std::optional<std::vector<double>>& weights) {
        if (reps < 1) throw std::invalid_argument("reps must be >= 1");
        const auto profile = build_profile(subjects, peers, peers, weights);
        synth::ReporterBias bias;
        bias.self_under_prob = self_under;
        bias.parent_under_prob = parent_under;
        bias.parent_over_prob = parent_over;
        bias.peer_noise_sd = noise;
        json rows = json::array();
        int wins_self = 0, wins_parent = 0;
        for (int r = 0; r < reps; ++r) {
          const auto study = synth::generate(
              profile, bias, seed + static_cast<std::uint64_t>(r));
          const auto errors = synth::estimator_errors(study);
          wins_self += errors.peer_median_mae < errors.self_mae;
          wins_parent += errors.peer_median_mae < errors.parent_mae;
          rows.push_back(to_json(errors));
        }
        json doc{{"replications", rows},
                 {"peer_beats_self_rate",
                  static_cast<double>(wins_self) / reps},
                 {"peer_beats_parent_rate",
                  static_cast<double>(wins_parent) / reps}};
        return json_to_py(doc);
      },
      py::arg("subjects") = 300, py::arg("peers") = 5, py::arg("reps") = 100,
      py::arg("seed") = 0, py::arg("self_under") = 0.365,
      py::arg("parent_under") = 0.357, py::arg("parent_over") = 0.348,
      py::arg("noise") = 0.5, py::arg("truth_weights") = std::nullopt);

  m.def(
      "export_fixture",
      [](const std::string& data_path, const std::string& truth_path,
         int subjects, int peers, std::uint64_t seed,
         const std::optional<std::vector<double>>& weights) {
        const auto profile = build_profile(subjects, peers, peers, weights);
        const auto study = synth::generate(profile, synth::ReporterBias{},
                                           seed);
        std::ofstream data(data_path);
        if (!data)
          throw std::runtime_error("cannot open " + data_path);
        survey::export_csv(study.dataset, data);
        std::ofstream truth(truth_path);
        if (!truth)
          throw std::runtime_error("cannot open " + truth_path);
        synth::export_ground_truth_csv(study, truth);
      },
      py::arg("data_path"), py::arg("truth_path"), py::arg("subjects") = 300,
      py::arg("peers") = 5, py::arg("seed") = 0,
      py::arg("truth_weights") = std::nullopt);
}
