#include "tokmerge/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "tokmerge/analysis.hpp"
#include "tokmerge/benchmark.hpp"
#include "tokmerge/embedding_file.hpp"
#include "tokmerge/error.hpp"
#include "tokmerge/report.hpp"

namespace tokmerge {
namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json envelope(std::string_view command) {
  ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  j["tool_version"] = kToolVersion;
  j["command"] = command;
  return j;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ReductionTooLarge:
    case ErrorCode::MissingImportance:
    case ErrorCode::MissingReference:
    case ErrorCode::InstanceTooLarge:
    case ErrorCode::InvalidSchedule:
      return kExitUsageError;
    default:
      return kExitDataError;
  }
}

struct MatchArgs {
  std::string input;
  std::string method = "cgsm";
  std::size_t r = 0;
  std::string importance;
  std::vector<std::size_t> protect;
  std::uint64_t seed = 0;
  std::string ensemble = "average";
  std::size_t iterations = 10;
  bool timing = false;
};

void run_match(const MatchArgs& a, std::ostream& out) {
  const Matcher method = parse_matcher(a.method);
  const auto payload = load_matrix_file(a.input);

  ReductionOptions opts;
  opts.protected_indices = a.protect;
  if (!a.importance.empty()) opts.importance = load_vector_file(a.importance);
  if (a.ensemble == "softmax") opts.ensemble_mode = EnsembleMode::ImportanceSoftmax;

  const auto start = std::chrono::steady_clock::now();
  const TokenMatrix* keys = std::get_if<TokenMatrix>(&payload);
  const SimilarityMatrix d =
      keys != nullptr ? cosine_similarity_matrix(*keys) : std::get<SimilarityMatrix>(payload);
  if (opts.importance && opts.importance->size() != d.n()) {
    throw Error(ErrorCode::DimensionMismatch, "importance length differs from token count");
  }
  const auto result = run_matcher(method, d, keys, a.r, opts, a.seed, a.iterations);
  const auto stop = std::chrono::steady_clock::now();

  RunReport report;
  report.method = std::string(to_string(method));
  report.n = d.n();
  report.r = a.r;
  report.seed = a.seed;
  report.pairs = result.plan.pairs;
  report.stacks = result.stacks.groups;
  report.objective = objective(d, result.plan);
  report.degenerate_fallbacks = result.plan.degenerate_fallbacks;
  if (a.timing) report.timing_us = std::chrono::duration_cast<std::chrono::microseconds>(stop - start).count();
  out << serialize_report(report);
}

SimulationMethod parse_simulation_method(const std::string& name) {
  if (name == "cgsm" || name == "complete-graph") return SimulationMethod::CompleteGraph;
  if (name == "bipartite") return SimulationMethod::Bipartite;
  throw Error(ErrorCode::MalformedInput, "simulation method must be cgsm or bipartite");
}

ordered_json schedule_json(const ScheduleConfig& s) {
  ordered_json j;
  j["n0"] = s.n0;
  j["layers"] = s.layers;
  j["r_per_layer"] = s.r_per_layer;
  j["remaining_after_layer"] = s.remaining_after_each_layer();
  j["final_tokens"] = s.final_tokens();
  return j;
}

// {"flops_per_mac": 1, "branches": [{"name", "layers", "width", "tokens",
//  "mlp_ratio", "reduced", "schedule": "halving" | "none" | [r, ...]}]}
// A reduced branch without "schedule" uses the halving schedule.
std::pair<ModelConfig, std::map<std::string, ScheduleConfig>> load_flops_config(const std::string& path) {
  ModelConfig model;
  std::map<std::string, ScheduleConfig> schedules;
  if (path.empty()) {
    model = clip_like_config();
    for (const auto& b : model.branches) {
      if (b.reduced) schedules[b.name] = halving_schedule(b.tokens, b.layers);
    }
    return {model, schedules};
  }
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MalformedInput, "cannot open '" + path + "'");
  try {
    const auto j = nlohmann::json::parse(in);
    model.flops_per_mac = j.value("flops_per_mac", 1.0);
    for (const auto& b : j.at("branches")) {
      BranchConfig branch;
      branch.name = b.at("name").get<std::string>();
      branch.layers = b.at("layers").get<std::size_t>();
      branch.width = b.at("width").get<std::size_t>();
      branch.tokens = b.at("tokens").get<std::size_t>();
      branch.mlp_ratio = b.value("mlp_ratio", 4.0);
      branch.reduced = b.value("reduced", false);
      if (branch.reduced) {
        const auto sched = b.value("schedule", nlohmann::json("halving"));
        if (sched.is_array()) {
          schedules[branch.name] = ScheduleConfig{branch.tokens, branch.layers, sched.get<std::vector<std::size_t>>()};
        } else if (sched == "halving") {
          schedules[branch.name] = halving_schedule(branch.tokens, branch.layers);
        } else if (sched != "none") {
          throw Error(ErrorCode::MalformedInput, "schedule must be \"halving\", \"none\" or a list");
        }
      }
      model.branches.push_back(std::move(branch));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedInput, std::string("flops config: ") + e.what());
  }
  return {model, schedules};
}

ordered_json flops_json(const FlopsReport& report, double flops_per_mac) {
  auto j = envelope("flops");
  j["flops_per_mac"] = flops_per_mac;
  auto layers = ordered_json::array();
  for (const auto& l : report.per_layer) {
    ordered_json e;
    e["branch"] = l.branch;
    e["layer"] = l.layer;
    e["tokens_at_attention"] = l.tokens_at_attention;
    e["tokens_at_mlp"] = l.tokens_at_mlp;
    e["attention_flops"] = l.attention_flops;
    e["mlp_flops"] = l.mlp_flops;
    layers.push_back(std::move(e));
  }
  j["per_layer"] = std::move(layers);
  j["total"] = report.total;
  j["baseline_total"] = report.baseline_total;
  j["total_gflops"] = report.total / 1e9;
  j["baseline_gflops"] = report.baseline_total / 1e9;
  j["reduction_fraction"] = report.reduction_fraction;
  return j;
}

std::vector<std::size_t> parse_index_list(const std::string& text) {
  std::vector<std::size_t> out;
  for (double v : parse_number_list(text)) {
    if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v))) {
      throw Error(ErrorCode::MalformedInput, "expected non-negative integers in '" + text + "'");
    }
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Token matching, expectation analysis and FLOPs modeling for token merging", "tokmerge"};
  app.require_subcommand(1);

  MatchArgs match;
  std::string protect_text;
  auto* match_cmd = app.add_subcommand("match", "Match tokens and report the plan");
  match_cmd->add_option("--input", match.input, "CGET binary or CSV token file")->required();
  match_cmd->add_option("--method", match.method, "cgsm|cgsm-guided|bipartite|greedy|kmeans|random|oracle");
  match_cmd->add_option("--r", match.r, "tokens to eliminate")->required();
  match_cmd->add_option("--importance", match.importance, "importance scores (binary or number list)");
  match_cmd->add_option("--protect", protect_text, "comma-separated protected token indices");
  match_cmd->add_option("--seed", match.seed, "seed for random/kmeans");
  match_cmd->add_option("--ensemble", match.ensemble, "average|softmax")
      ->check(CLI::IsMember({"average", "softmax"}));
  match_cmd->add_option("--iterations", match.iterations, "k-means iterations");
  match_cmd->add_flag("--timing", match.timing, "include wall time in the report");

  std::int64_t n = 0, layers = 0, r = 0;
  auto* expect_cmd = app.add_subcommand("expect", "Closed-form expectations of optimal matching");
  expect_cmd->add_option("--n", n)->required();
  expect_cmd->add_option("--layers", layers)->required();
  expect_cmd->add_option("--r", r)->required();

  std::uint64_t trials = 1000000, seed = 0;
  std::string sim_method = "cgsm";
  auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo estimate of the optimal matching rate");
  simulate_cmd->add_option("--n", n)->required();
  simulate_cmd->add_option("--layers", layers)->required();
  simulate_cmd->add_option("--r", r)->required();
  simulate_cmd->add_option("--trials", trials);
  simulate_cmd->add_option("--seed", seed);
  simulate_cmd->add_option("--method", sim_method, "cgsm|bipartite");

  std::size_t n0 = 0, schedule_layers = 0;
  auto* schedule_cmd = app.add_subcommand("schedule", "Per-layer reduction counts");
  schedule_cmd->add_option("--n0", n0)->required();
  schedule_cmd->add_option("--layers", schedule_layers)->required();

  std::string flops_config;
  auto* flops_cmd = app.add_subcommand("flops", "Analytic FLOPs of a model config");
  flops_cmd->add_option("--config", flops_config, "JSON model config (default: CLIP-like, vision halving)");

  std::string sizes_text = "64,128,256,512,1024";
  std::size_t dim = 64, repeats = 5;
  auto* bench_cmd = app.add_subcommand("bench", "Time serial vs parallel kernels and matchers");
  bench_cmd->add_option("--sizes", sizes_text);
  bench_cmd->add_option("--dim", dim);
  bench_cmd->add_option("--repeats", repeats);
  bench_cmd->add_option("--seed", seed);

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsageError;
  }

  try {
    if (*match_cmd) {
      if (!protect_text.empty()) match.protect = parse_index_list(protect_text);
      run_match(match, out);
    } else if (*expect_cmd) {
      auto j = envelope("expect");
      j["n"] = n;
      j["layers"] = layers;
      j["r"] = r;
      const double ec = expectation_cgsm(n, layers, r);
      const double eb = expectation_bipartite(n, layers, r);
      j["expectation_cgsm"] = ec;
      j["expectation_bipartite"] = eb;
      j["difference"] = ec - eb;
      out << j.dump(2) << "\n";
    } else if (*simulate_cmd) {
      const auto method = parse_simulation_method(sim_method);
      auto j = envelope("simulate");
      j["n"] = n;
      j["layers"] = layers;
      j["r"] = r;
      j["method"] = method == SimulationMethod::CompleteGraph ? "cgsm" : "bipartite";
      j["trials"] = trials;
      j["seed"] = seed;
      const double estimate = simulate_optimal_match_rate(n, layers, r, trials, seed, method);
      const double closed = method == SimulationMethod::CompleteGraph ? expectation_cgsm(n, layers, r)
                                                                       : expectation_bipartite(n, layers, r);
      j["frequency"] = estimate;
      j["closed_form"] = closed;
      j["abs_error"] = std::abs(estimate - closed);
      out << j.dump(2) << "\n";
    } else if (*schedule_cmd) {
      auto j = envelope("schedule");
      j.update(schedule_json(halving_schedule(n0, schedule_layers)));
      out << j.dump(2) << "\n";
    } else if (*flops_cmd) {
      const auto [model, schedules] = load_flops_config(flops_config);
      out << flops_json(flops_estimate(model, schedules), model.flops_per_mac).dump(2) << "\n";
    } else if (*bench_cmd) {
      const auto sizes = parse_index_list(sizes_text);
      const auto result = benchmark_matching(sizes, dim, repeats, seed);
      auto j = envelope("bench");
      j["dim"] = result.dim;
      j["repeats"] = result.repeats;
      j["threads"] = result.threads;
      auto rows = ordered_json::array();
      for (const auto& row : result.rows) {
        ordered_json e;
        e["n"] = row.n;
        e["r"] = row.r;
        e["similarity_serial_us"] = row.similarity_serial_us;
        e["similarity_parallel_us"] = row.similarity_parallel_us;
        e["cgsm_us"] = row.cgsm_us;
        e["bipartite_us"] = row.bipartite_us;
        rows.push_back(std::move(e));
      }
      j["rows"] = std::move(rows);
      j["cgsm_loglog_slope"] = result.cgsm_loglog_slope;
      out << j.dump(2) << "\n";
    }
  } catch (const Error& e) {
    err << "tokmerge: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "tokmerge: " << e.what() << "\n";
    return kExitDataError;
  }
  return kExitOk;
}

}  // namespace tokmerge
