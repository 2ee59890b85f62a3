#include "tokmerge/guidance.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "tokmerge/error.hpp"
#include "tokmerge/rng.hpp"

namespace tokmerge {
namespace {

constexpr double kLogFloor = 1e-12;
constexpr double kInitScale = 0.02;

void require_square(const DenseMatrix& m, std::size_t d, const char* name) {
  if (m.rows() != d || m.cols() != d) {
    throw Error(ErrorCode::DimensionMismatch, std::string(name) + " must be " + std::to_string(d) + "x" +
                                                  std::to_string(d));
  }
}

void require_finite(std::span<const double> v, const char* name) {
  for (double x : v) {
    if (!std::isfinite(x)) throw Error(ErrorCode::NonFinite, std::string(name) + " contains NaN/Inf");
  }
}

double kl_floored(std::span<const double> p, std::span<const double> m) {
  double s = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    s += p[k] * std::log(std::max(p[k], kLogFloor) / std::max(m[k], kLogFloor));
  }
  return s;
}

struct ProjectedDistributions {
  std::vector<double> p;
  std::vector<double> q;
};

ProjectedDistributions project(const CrossToken& cv, const CrossToken& cl, const ProjectionPair& pp) {
  if (pp.w_vision.cols() != pp.w_language.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "projections disagree on the shared output dimension");
  }
  require_finite(cv.vector, "vision cross token");
  require_finite(cl.vector, "language cross token");
  return {softmax(vec_mat(cv.vector, pp.w_vision)), softmax(vec_mat(cl.vector, pp.w_language))};
}

}  // namespace

std::vector<double> cross_importance(const CrossToken& cross, const AttentionProjection& proj,
                                     const TokenMatrix& tokens, ImportanceSource source) {
  const std::size_t d = tokens.dim();
  require_square(proj.w_query, d, "w_query");
  require_square(proj.w_key, d, "w_key");
  const std::size_t n = tokens.n_tokens();

  std::vector<std::vector<double>> keys(n);
  for (std::size_t i = 0; i < n; ++i) keys[i] = vec_mat(tokens.row(i), proj.w_key);

  std::vector<double> importance(n, 0.0);
  if (source == ImportanceSource::CrossToken) {
    if (cross.vector.size() != d) {
      throw Error(ErrorCode::DimensionMismatch, "cross token dimension differs from token dimension");
    }
    require_finite(cross.vector, "cross token");
    const auto query = vec_mat(cross.vector, proj.w_query);
    for (std::size_t i = 0; i < n; ++i) importance[i] = std::clamp(cosine(query, keys[i]), -1.0, 1.0);
    return importance;
  }

  std::vector<std::vector<double>> queries(n);
  for (std::size_t j = 0; j < n; ++j) queries[j] = vec_mat(tokens.row(j), proj.w_query);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += cosine(queries[j], keys[i]);
    importance[i] = std::clamp(s / static_cast<double>(n), -1.0, 1.0);
  }
  return importance;
}

double js_divergence_loss(const CrossToken& cv, const CrossToken& cl, const ProjectionPair& pp) {
  const auto [p, q] = project(cv, cl, pp);
  std::vector<double> m(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) m[k] = 0.5 * (p[k] + q[k]);
  return 0.5 * kl_floored(p, m) + 0.5 * kl_floored(q, m);
}

CrossTokenGradients js_divergence_gradient(const CrossToken& cv, const CrossToken& cl, const ProjectionPair& pp) {
  const auto [p, q] = project(cv, cl, pp);
  const std::size_t k_dim = p.size();

  // dJS/dp_k = 0.5 * ln(p_k / m_k); pull back through the softmax Jacobian
  // and then through the linear projection.
  auto logits_grad = [&](const std::vector<double>& dist) {
    std::vector<double> g(k_dim);
    double mean = 0.0;
    for (std::size_t k = 0; k < k_dim; ++k) {
      const double m = 0.5 * (p[k] + q[k]);
      g[k] = 0.5 * std::log(std::max(dist[k], kLogFloor) / std::max(m, kLogFloor));
      mean += dist[k] * g[k];
    }
    for (std::size_t k = 0; k < k_dim; ++k) g[k] = dist[k] * (g[k] - mean);
    return g;
  };
  auto pull_back = [&](const DenseMatrix& w, const std::vector<double>& g) {
    std::vector<double> out(w.rows(), 0.0);
    for (std::size_t j = 0; j < w.rows(); ++j) out[j] = dot(w.row(j), g);
    return out;
  };
  return {pull_back(pp.w_vision, logits_grad(p)), pull_back(pp.w_language, logits_grad(q))};
}

double total_loss(double original_loss, const LossConfig& cfg, std::span<const double> per_layer_js) {
  if (per_layer_js.size() != cfg.layer_count) {
    throw Error(ErrorCode::LengthMismatch, "expected " + std::to_string(cfg.layer_count) +
                                               " per-layer JS terms, got " + std::to_string(per_layer_js.size()));
  }
  double sum = 0.0;
  for (double v : per_layer_js) sum += v;
  return original_loss + cfg.alpha * sum;
}

CrossToken init_cross_token(CrossTokenInit strategy, std::size_t dim,
                            std::optional<std::span<const double>> reference, std::uint64_t seed,
                            int layer_index, Modality modality) {
  CrossToken token{std::vector<double>(dim, 0.0), layer_index, modality};
  SplitMix64 rng(seed);
  switch (strategy) {
    case CrossTokenInit::Zero:
      break;
    case CrossTokenInit::NormalRandom: {
      std::normal_distribution<double> normal(0.0, 1.0);
      for (double& v : token.vector) v = kInitScale * normal(rng);
      break;
    }
    case CrossTokenInit::UniformRandom:
      for (double& v : token.vector) v = kInitScale * (2.0 * rng.uniform() - 1.0);
      break;
    case CrossTokenInit::Informative:
      if (!reference) throw Error(ErrorCode::MissingReference, "informative init needs a reference token");
      if (reference->size() != dim) throw Error(ErrorCode::DimensionMismatch, "reference token dimension");
      token.vector.assign(reference->begin(), reference->end());
      break;
  }
  return token;
}

}  // namespace tokmerge
