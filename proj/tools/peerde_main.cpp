//
// peerde: batch front end for the optimizer and the peer-assessment
// measurement pipeline. Subcommands: optimize, report, fit, simulate,
// export-fixture. Every JSON document embeds a manifest (command, resolved
// configuration, seed, timestamp, version) so runs can be reproduced.
//
// Exit codes: 0 success, 1 I/O failure, 2 usage or validation error,
// 3 empty data, 4 degenerate model.
//

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <ctime>
#include <fstream>
#include <iostream>
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

namespace {

using nlohmann::json;
using namespace peerde;

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitUsage = 2;
constexpr int kExitEmpty = 3;
constexpr int kExitDegenerate = 4;

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json make_manifest(const std::string& command, std::uint64_t seed,
                   json config) {
  return json{{"command", command},
              {"config", std::move(config)},
              {"seed", seed},
              {"timestamp", utc_timestamp()},
              {"version", PEERDE_VERSION}};
}

void write_text(const std::string& path, const std::string& content) {
  if (path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file " + path);
  out << content;
  if (!out) throw std::runtime_error("failed writing " + path);
}

void write_json(const std::string& path, const json& doc) {
  write_text(path, doc.dump(2) + "\n");
}

// Shared DE flag block.
struct DeFlags {
  int np = 40;
  double f = 0.8;
  double cr = 0.9;
  std::string strategy = "rand1";
  int gens = 1000;
  std::optional<double> target;
  std::optional<int> stagnation;
  int threads = 1;

  void attach(CLI::App* cmd) {
    cmd->add_option("--np", np, "Population size")->capture_default_str();
    cmd->add_option("--f", f, "Difference scaling factor in [0,2]")
        ->capture_default_str();
    cmd->add_option("--cr", cr, "Crossover rate in [0,1]")
        ->capture_default_str();
    cmd->add_option("--strategy", strategy, "Mutation strategy")
        ->check(CLI::IsMember({"rand1", "best1", "randtobest1", "best2",
                               "rand2"}))
        ->capture_default_str();
    cmd->add_option("--gens", gens, "Generation cap")->capture_default_str();
    cmd->add_option("--target", target, "Stop once best fitness <= target");
    cmd->add_option("--stagnation", stagnation,
                    "Stop after this many generations without improvement");
    cmd->add_option("--threads", threads, "Evaluation threads")
        ->capture_default_str();
  }

  de::DEConfig config(std::uint64_t seed) const {
    de::DEConfig cfg;
    cfg.np = np;
    cfg.f = f;
    cfg.cr = cr;
    cfg.strategy = *de::parse_strategy(strategy);
    cfg.stop.max_generations = gens;
    cfg.stop.target_fitness = target;
    cfg.stop.stagnation_window = stagnation;
    cfg.seed = seed;
    cfg.threads = threads;
    return cfg;
  }
};

// Shared synthetic-population flag block.
struct SynthFlags {
  int subjects = 300;
  int peers_min = 5;
  int peers_max = 5;
  std::vector<double> truth_weights;
  std::vector<double> sex_mix;
  double self_under = 0.365;
  double parent_under = 0.357;
  double parent_over = 0.348;
  double noise = 0.5;
  bool bias_zero = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--subjects", subjects, "Number of subjects")
        ->capture_default_str();
    auto* peers = cmd->add_option_function<int>(
        "--peers",
        [this](int v) {
          peers_min = v;
          peers_max = v;
        },
        "Peer reports per subject");
    cmd->add_option("--peers-min", peers_min, "Minimum peers per subject")
        ->excludes(peers);
    cmd->add_option("--peers-max", peers_max, "Maximum peers per subject")
        ->excludes(peers);
    cmd->add_option("--truth-weights", truth_weights,
                    "7 weights over the rating grid 0,0.5,...,3")
        ->delimiter(',')
        ->expected(7);
    cmd->add_option("--sex-mix", sex_mix, "Weights for F,M,U")
        ->delimiter(',')
        ->expected(3);
    cmd->add_option("--self-under", self_under,
                    "Self under-report probability")
        ->capture_default_str();
    cmd->add_option("--parent-under", parent_under,
                    "Parent under-report probability")
        ->capture_default_str();
    cmd->add_option("--parent-over", parent_over,
                    "Parent over-report probability")
        ->capture_default_str();
    cmd->add_option("--noise", noise, "Peer noise standard deviation")
        ->capture_default_str();
    cmd->add_flag("--bias-zero", bias_zero,
                  "Zero all reporter bias probabilities");
  }

  synth::PopulationProfile profile() const {
    synth::PopulationProfile p;
    p.n_subjects = subjects;
    p.peers_min = peers_min;
    p.peers_max = peers_max;
    if (!truth_weights.empty())
      std::copy(truth_weights.begin(), truth_weights.end(),
                p.true_hiu_weights.begin());
    if (!sex_mix.empty())
      std::copy(sex_mix.begin(), sex_mix.end(), p.sex_mix.begin());
    return p;
  }

  synth::ReporterBias bias() const {
    synth::ReporterBias b;
    b.self_under_prob = bias_zero ? 0.0 : self_under;
    b.parent_under_prob = bias_zero ? 0.0 : parent_under;
    b.parent_over_prob = bias_zero ? 0.0 : parent_over;
    b.peer_noise_sd = noise;
    return b;
  }

  json config_echo() const {
    const auto p = profile();
    const auto b = bias();
    return json{{"subjects", p.n_subjects},
                {"peers_min", p.peers_min},
                {"peers_max", p.peers_max},
                {"truth_weights", p.true_hiu_weights},
                {"sex_mix", p.sex_mix},
                {"self_under", b.self_under_prob},
                {"parent_under", b.parent_under_prob},
                {"parent_over", b.parent_over_prob},
                {"noise", b.peer_noise_sd}};
  }
};

int run_optimize(const std::string& fn_name, int dim, const DeFlags& flags,
                 std::uint64_t seed, const std::string& out,
                 const std::string& csv_out) {
  const auto kind = objectives::parse_test_function(fn_name);
  const auto fn = objectives::make_test_function(*kind, dim);
  const auto cfg = flags.config(seed);
  const auto result = de::evolve(fn.objective(), fn.default_bounds, cfg);

  json doc{{"manifest",
            make_manifest("optimize", seed,
                          json{{"fn", fn_name},
                               {"dim", dim},
                               {"de", to_json(cfg)}})},
           {"result", to_json(result)}};
  write_json(out, doc);

  if (!csv_out.empty()) {
    std::ostringstream csv;
    csv << "generation,best_fitness\n";
    for (std::size_t g = 0; g < result.best_history.size(); ++g)
      csv << g << ',' << result.best_history[g] << '\n';
    write_text(csv_out, csv.str());
  }
  return kExitOk;
}

int run_report(const std::string& in_path, const std::string& group_name,
               const std::string& sex_name, const std::string& out) {
  const auto ingested = survey::ingest_file(in_path);
  if (ingested.dataset.size() == 0)
    throw EmptyDataError("no valid rows in " + in_path);

  std::optional<RespondentGroup> group;
  if (!group_name.empty()) group = *parse_group(group_name);
  std::optional<Sex> sex;
  if (!sex_name.empty()) sex = *parse_sex(sex_name);

  json thresholds = json::array();
  for (int q = 0; q < kRatingQuestions; ++q) {
    try {
      thresholds.push_back(to_json(
          survey::threshold_report(ingested.dataset,
                                   static_cast<Question>(q), group)));
    } catch (const EmptyDataError&) {
      // question has no applicable answers under this filter
    }
  }

  json doc{
      {"manifest", make_manifest("report", 0,
                                 json{{"in", in_path},
                                      {"group", group_name},
                                      {"sex", sex_name}})},
      {"n_records", ingested.dataset.size()},
      {"rejected", to_json(ingested.rejected)},
      {"thresholds", thresholds},
      {"medians", to_json(survey::median_profile(ingested.dataset, group, sex))},
      {"respondent_stats",
       to_json(survey::respondent_stats(ingested.dataset, group))}};
  write_json(out, doc);
  return kExitOk;
}

int run_fit(const std::string& in_path, const std::string& model_name,
            const std::string& response_name,
            const std::vector<std::string>& regressor_names,
            const std::string& family_name, double threshold,
            const std::string& group_name, const std::string& criterion_name,
            double coef_bound, const DeFlags& flags, std::uint64_t seed,
            const std::string& out) {
  ModelSpec spec;
  if (!model_name.empty()) {
    spec = catalog_model(*parse_model_id(model_name));
  } else {
    if (response_name.empty() || regressor_names.empty() ||
        family_name.empty())
      throw std::invalid_argument(
          "custom fits need --response, --regressors and --family");
    const auto response = parse_question(response_name);
    if (!response) throw std::invalid_argument("unknown response question");
    spec.id = ModelId::Custom;
    spec.response.question = *response;
    if (*response == Question::Q9) {
      spec.response.encoding = ResponseEncoding::FemaleIndicator;
    } else if (family_name == "ordered") {
      spec.response.encoding = ResponseEncoding::OrderedLevels;
    } else {
      spec.response.encoding = ResponseEncoding::BinaryThreshold;
      spec.response.threshold = threshold;
    }
    for (const auto& name : regressor_names) {
      const auto q = parse_question(name);
      if (!q) throw std::invalid_argument("unknown regressor " + name);
      spec.regressors.push_back(*q);
    }
    const auto family = parse_family(family_name);
    if (!family) throw std::invalid_argument("unknown family " + family_name);
    spec.family = *family;
    if (!group_name.empty()) {
      const auto group = parse_group(group_name);
      if (!group) throw std::invalid_argument("unknown group " + group_name);
      spec.group_filter = group;
    }
    validate(spec);
  }

  const auto ingested = survey::ingest_file(in_path);
  if (ingested.dataset.size() == 0)
    throw EmptyDataError("no valid rows in " + in_path);

  const auto criterion = parse_criterion(criterion_name);
  if (!criterion) throw std::invalid_argument("unknown criterion");
  const auto cfg = flags.config(seed);
  const auto result =
      stats::fit(spec, ingested.dataset, cfg, *criterion, coef_bound);

  json doc{{"manifest",
            make_manifest("fit", seed,
                          json{{"in", in_path},
                               {"model", model_name.empty() ? "custom"
                                                            : model_name},
                               {"criterion", criterion_name},
                               {"coef_bound", coef_bound},
                               {"de", to_json(cfg)}})},
           {"fit", to_json(result)},
           {"rejected", to_json(ingested.rejected)}};
  write_json(out, doc);
  return kExitOk;
}

int run_simulate(const SynthFlags& flags, int reps, std::uint64_t seed,
                 const std::string& out) {
  const auto profile = flags.profile();
  const auto bias = flags.bias();
  synth::validate(profile);
  synth::validate(bias);

  json rows = json::array();
  int peer_beats_self = 0;
  int peer_beats_parent = 0;
  double sum_self = 0.0, sum_parent = 0.0, sum_peer = 0.0;
  for (int r = 0; r < reps; ++r) {
    const std::uint64_t rep_seed = seed + static_cast<std::uint64_t>(r);
    const auto study = synth::generate(profile, bias, rep_seed);
    const auto errors = synth::estimator_errors(study);
    peer_beats_self += errors.peer_median_mae < errors.self_mae ? 1 : 0;
    peer_beats_parent += errors.peer_median_mae < errors.parent_mae ? 1 : 0;
    sum_self += errors.self_mae;
    sum_parent += errors.parent_mae;
    sum_peer += errors.peer_median_mae;
    json row = to_json(errors);
    row["replication"] = r;
    row["seed"] = rep_seed;
    rows.push_back(std::move(row));
  }

  const double n = static_cast<double>(reps);
  json doc{{"manifest", make_manifest("simulate", seed,
                                      [&] {
                                        json c = flags.config_echo();
                                        c["reps"] = reps;
                                        return c;
                                      }())},
           {"replications", rows},
           {"aggregate",
            json{{"mean_self_mae", sum_self / n},
                 {"mean_parent_mae", sum_parent / n},
                 {"mean_peer_median_mae", sum_peer / n},
                 {"peer_beats_self_rate", peer_beats_self / n},
                 {"peer_beats_parent_rate", peer_beats_parent / n}}}};
  write_json(out, doc);
  return kExitOk;
}

int run_export_fixture(const SynthFlags& flags, std::uint64_t seed,
                       const std::string& data_path,
                       const std::string& truth_path) {
  const auto study = synth::generate(flags.profile(), flags.bias(), seed);
  write_text(data_path, survey::to_csv(study.dataset));
  std::ostringstream truth;
  synth::export_ground_truth_csv(study, truth);
  write_text(truth_path, truth.str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differential evolution optimizer and peer-assessment "
               "measurement pipeline"};
  app.set_version_flag("--version", PEERDE_VERSION);
  app.set_config("--config", "", "Key=value configuration file")
      ->envname("PEERDE_CONFIG");
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  std::string out = "-";

  // optimize
  auto* opt = app.add_subcommand("optimize", "Run DE on a test function");
  std::string fn_name;
  int dim = 10;
  DeFlags opt_de;
  std::string csv_out;
  opt->add_option("--fn", fn_name, "Test function")
      ->required()
      ->check(CLI::IsMember({"sphere", "rosenbrock", "rastrigin"}));
  opt->add_option("--dim", dim, "Dimension")->capture_default_str();
  opt_de.attach(opt);
  opt->add_option("--seed", seed, "Random seed");
  opt->add_option("--out", out, "Output JSON path, - for stdout");
  opt->add_option("--csv", csv_out, "Convergence CSV path");

  // report
  auto* rep = app.add_subcommand("report", "Aggregate a survey CSV");
  std::string in_path, group_name, sex_name;
  rep->add_option("--in", in_path, "Input CSV")->required();
  rep->add_option("--group", group_name, "Respondent group filter")
      ->check(CLI::IsMember({"child", "student", "parent"}));
  rep->add_option("--sex", sex_name, "Subject sex filter for medians")
      ->check(CLI::IsMember({"F", "M", "U"}));
  rep->add_option("--out", out, "Output JSON path, - for stdout");

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "Fit a model by DE");
  std::string model_name, response_name, family_name, fit_group;
  std::vector<std::string> regressor_names;
  std::string criterion_name = "loglik";
  double threshold = 2.0;
  double coef_bound = 10.0;
  DeFlags fit_de;
  fit_de.gens = 500;
  std::string fit_in;
  fit_cmd->add_option("--in", fit_in, "Input CSV")->required();
  fit_cmd->add_option("--model", model_name, "Catalog model")
      ->check(CLI::IsMember({"M1", "M2", "M3", "M4", "M5", "M6"}));
  fit_cmd->add_option("--response", response_name, "Custom response question");
  fit_cmd->add_option("--regressors", regressor_names,
                      "Custom regressor questions")
      ->delimiter(',');
  fit_cmd->add_option("--family", family_name, "binary or ordered")
      ->check(CLI::IsMember({"binary", "ordered"}));
  fit_cmd->add_option("--threshold", threshold,
                      "Binary response threshold")
      ->capture_default_str();
  fit_cmd->add_option("--group", fit_group, "Respondent group filter")
      ->check(CLI::IsMember({"child", "student", "parent"}));
  fit_cmd->add_option("--criterion", criterion_name, "loglik or auc")
      ->check(CLI::IsMember({"loglik", "auc"}))
      ->capture_default_str();
  fit_cmd->add_option("--coef-bound", coef_bound, "Coefficient box half-width")
      ->capture_default_str();
  fit_de.attach(fit_cmd);
  fit_cmd->add_option("--seed", seed, "Random seed");
  fit_cmd->add_option("--out", out, "Output JSON path, - for stdout");

  // simulate
  auto* sim = app.add_subcommand("simulate",
                                 "Replicate synthetic bias studies");
  SynthFlags sim_flags;
  int reps = 100;
  sim_flags.attach(sim);
  sim->add_option("--reps", reps, "Replications")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sim->add_option("--seed", seed, "Base random seed");
  sim->add_option("--out", out, "Output JSON path, - for stdout");

  // export-fixture
  auto* exp = app.add_subcommand("export-fixture",
                                 "Write a synthetic dataset + ground truth");
  SynthFlags exp_flags;
  std::string data_path = "fixture.csv";
  std::string truth_path = "fixture_truth.csv";
  exp_flags.attach(exp);
  exp->add_option("--seed", seed, "Random seed");
  exp->add_option("--out", data_path, "Dataset CSV path")
      ->capture_default_str();
  exp->add_option("--truth", truth_path, "Ground-truth CSV path")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (app.got_subcommand(opt))
      return run_optimize(fn_name, dim, opt_de, seed, out, csv_out);
    if (app.got_subcommand(rep))
      return run_report(in_path, group_name, sex_name, out);
    if (app.got_subcommand(fit_cmd))
      return run_fit(fit_in, model_name, response_name, regressor_names,
                     family_name, threshold, fit_group, criterion_name,
                     coef_bound, fit_de, seed, out);
    if (app.got_subcommand(sim)) return run_simulate(sim_flags, reps, seed, out);
    if (app.got_subcommand(exp))
      return run_export_fixture(exp_flags, seed, data_path, truth_path);
  } catch (const EmptyDataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitEmpty;
  } catch (const DegenerateModelError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDegenerate;
  } catch (const InconsistentFitError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDegenerate;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitUsage;
}
