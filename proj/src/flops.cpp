#include <string>

#include "tokmerge/analysis.hpp"
#include "tokmerge/error.hpp"

namespace tokmerge {
namespace {

// Matrix-multiply MACs only: QKV/O projections 4 n d^2, scores and values
// 2 n^2 d, MLP 2 ratio n d^2. Layernorm, softmax and biases are ignored.
double attention_macs(double n, double d) { return 4.0 * n * d * d + 2.0 * n * n * d; }
double mlp_macs(double n, double d, double ratio) { return 2.0 * ratio * n * d * d; }

void check_branch(const BranchConfig& b) {
  if (b.layers > 0 && (b.width == 0 || b.tokens == 0 || !(b.mlp_ratio > 0.0))) {
    throw Error(ErrorCode::InvalidSchedule, "branch '" + b.name + "' needs positive width, tokens and mlp_ratio");
  }
}

}  // namespace

ModelConfig clip_like_config() {
  ModelConfig m;
  m.branches.push_back({"vision", 12, 768, 197, 4.0, true});
  m.branches.push_back({"text", 12, 512, 77, 4.0, false});
  m.flops_per_mac = 1.0;
  return m;
}

FlopsReport flops_estimate(const ModelConfig& model, const std::map<std::string, ScheduleConfig>& schedules) {
  if (!(model.flops_per_mac > 0.0)) throw Error(ErrorCode::InvalidSchedule, "flops_per_mac must be positive");
  for (const auto& [name, schedule] : schedules) {
    bool known = false;
    for (const auto& b : model.branches) known |= (b.name == name && b.reduced);
    if (!known) throw Error(ErrorCode::InvalidSchedule, "schedule for unknown or unreduced branch '" + name + "'");
  }

  FlopsReport report;
  const double f = model.flops_per_mac;
  for (const auto& b : model.branches) {
    check_branch(b);
    const ScheduleConfig* schedule = nullptr;
    if (auto it = schedules.find(b.name); it != schedules.end()) {
      schedule = &it->second;
      schedule->validate();
      if (schedule->n0 != b.tokens || schedule->layers != b.layers) {
        throw Error(ErrorCode::InvalidSchedule, "schedule shape does not match branch '" + b.name + "'");
      }
    }
    const auto d = static_cast<double>(b.width);
    const auto n0 = static_cast<double>(b.tokens);
    std::size_t n = b.tokens;
    for (std::size_t l = 0; l < b.layers; ++l) {
      const std::size_t r = schedule != nullptr ? schedule->r_per_layer[l] : 0;
      LayerFlops lf;
      lf.branch = b.name;
      lf.layer = l + 1;
      lf.tokens_at_attention = n;
      lf.tokens_at_mlp = n - r;
      lf.attention_flops = f * attention_macs(static_cast<double>(n), d);
      lf.mlp_flops = f * mlp_macs(static_cast<double>(n - r), d, b.mlp_ratio);
      report.total += lf.attention_flops + lf.mlp_flops;
      report.baseline_total += f * (attention_macs(n0, d) + mlp_macs(n0, d, b.mlp_ratio));
      report.per_layer.push_back(std::move(lf));
      n -= r;
    }
  }
  report.reduction_fraction = report.baseline_total > 0.0 ? 1.0 - report.total / report.baseline_total : 0.0;
  return report;
}

}  // namespace tokmerge
