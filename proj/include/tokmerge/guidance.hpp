#pragma once

// Cross-modal guidance: importance scores from a cross token, the
// Jensen-Shannon alignment loss between projected cross tokens, and the
// total-loss combiner. Everything here is forward-only.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tokmerge/numerics.hpp"

namespace tokmerge {

enum class Modality { Vision, Language };

struct CrossToken {
  std::vector<double> vector;
  int layer_index = 0;
  Modality modality = Modality::Vision;
};

struct AttentionProjection {
  DenseMatrix w_query;  // d x d
  DenseMatrix w_key;    // d x d
};

/// Detached projection weights into the shared space; read-only here.
struct ProjectionPair {
  DenseMatrix w_vision;    // d_v x d_p
  DenseMatrix w_language;  // d_l x d_p
};

struct LossConfig {
  double alpha = 1.0;
  std::size_t layer_count = 1;
};

enum class ImportanceSource {
  CrossToken,
  /// Experimental: I_i = mean_j cosine(Q_j, K_i) over all tokens j.
  AttentionReuse,
};

enum class CrossTokenInit { Zero, NormalRandom, UniformRandom, Informative };

/// I_i = cosine(cross * W_q, T_i * W_k). Values lie in [-1, 1].
std::vector<double> cross_importance(const CrossToken& cross, const AttentionProjection& proj,
                                     const TokenMatrix& tokens,
                                     ImportanceSource source = ImportanceSource::CrossToken);

/// JS(softmax(cv * W_v) || softmax(cl * W_l)), natural log, mixture taken
/// in distribution space. Bounded by ln 2.
double js_divergence_loss(const CrossToken& cv, const CrossToken& cl, const ProjectionPair& pp);

struct CrossTokenGradients {
  std::vector<double> vision;
  std::vector<double> language;
};

/// Analytic gradient of js_divergence_loss with respect to both cross-token
/// vectors (projections held fixed).
CrossTokenGradients js_divergence_gradient(const CrossToken& cv, const CrossToken& cl, const ProjectionPair& pp);

/// original_loss + alpha * sum(per_layer_js). Throws LengthMismatch.
double total_loss(double original_loss, const LossConfig& cfg, std::span<const double> per_layer_js);

/// Normal draws are scaled by 0.02; uniform draws lie in [-0.02, 0.02].
CrossToken init_cross_token(CrossTokenInit strategy, std::size_t dim,
                            std::optional<std::span<const double>> reference, std::uint64_t seed,
                            int layer_index = 0, Modality modality = Modality::Vision);

}  // namespace tokmerge
