#include "tokmerge/report.hpp"

#include <json.hpp>

#include "tokmerge/error.hpp"

namespace tokmerge {

std::string serialize_report(const RunReport& report) {
  nlohmann::ordered_json j;
  j["schema_version"] = report.schema_version;
  j["tool_version"] = report.tool_version;
  j["command"] = "match";
  j["method"] = report.method;
  j["n"] = report.n;
  j["r"] = report.r;
  j["seed"] = report.seed;
  auto pairs = nlohmann::ordered_json::array();
  for (const auto& p : report.pairs) pairs.push_back({p.source, p.destination});
  j["pairs"] = std::move(pairs);
  j["stacks"] = report.stacks;
  j["objective"] = report.objective;
  j["degenerate_fallbacks"] = report.degenerate_fallbacks;
  j["timing_us"] = report.timing_us ? nlohmann::ordered_json(*report.timing_us) : nlohmann::ordered_json(nullptr);
  return j.dump(2) + "\n";
}

RunReport parse_report(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    RunReport r;
    r.schema_version = j.at("schema_version").get<int>();
    if (r.schema_version != kReportSchemaVersion) {
      throw Error(ErrorCode::UnsupportedVersion, "report schema " + std::to_string(r.schema_version));
    }
    r.tool_version = j.at("tool_version").get<std::string>();
    r.method = j.at("method").get<std::string>();
    r.n = j.at("n").get<std::size_t>();
    r.r = j.at("r").get<std::size_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& p : j.at("pairs")) {
      if (p.size() != 2) throw Error(ErrorCode::MalformedInput, "pair must have two entries");
      r.pairs.push_back({p.at(0).get<std::size_t>(), p.at(1).get<std::size_t>()});
    }
    r.stacks = j.at("stacks").get<std::vector<std::vector<std::size_t>>>();
    r.objective = j.at("objective").get<double>();
    r.degenerate_fallbacks = j.at("degenerate_fallbacks").get<std::size_t>();
    if (const auto& t = j.at("timing_us"); !t.is_null()) r.timing_us = t.get<std::int64_t>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedInput, std::string("report: ") + e.what());
  }
}

}  // namespace tokmerge
