#pragma once

#include <cstdint>
#include <vector>

#include "ocs/core/tensor.hpp"
#include "ocs/io/bundle.hpp"

namespace ocs::sem {

inline constexpr std::int32_t kBackground = -1;

/// H x W x C negative log-probabilities with the softmax temperature used.
struct UnaryField {
  Tensor<float> unary;  // H x W x C
  double tau = 0.07;
  int background_index = 0;
};

/// H x W category indices; kBackground marks background pixels.
using LabelMap = Tensor<std::int32_t>;

/// unary(u, v, c) = -log softmax_c(cos(e_uv, l_c) / tau). Embeddings and vocab
/// rows are normalized on the fly; a zero-norm pixel embedding is an error
/// naming the pixel.
UnaryField unaries_from_embeddings(const Tensor<float>& embeddings, const io::Vocab& vocab,
                                   double tau = 0.07);

struct CrfConfig {
  int iterations = 5;
  double pairwise_weight = 12.0;
  /// Window radius used when H*W exceeds dense_threshold; the pairwise term is
  /// then restricted to a (2r+1)^2 neighborhood instead of all pixels.
  int window_radius = 8;
  /// Messages are averaged over the neighborhood, so with a fully connected
  /// graph the background mass swamps small objects. The exact dense path is
  /// kept (and capable up to 16384 pixels) but engages by default only for
  /// small fields; sized scenes use the windowed neighborhood.
  std::size_t dense_threshold = 4096;
};

struct CrfResult {
  LabelMap labels;
  Tensor<float> marginals;  // H x W x C, final Q
};

/// Synchronous mean-field on a fully connected Potts CRF with affinity
/// k_ij = max(0, cos(e_i, e_j)). Pairwise messages are averaged over the
/// neighborhood (weight is resolution-independent). iterations = 0 returns the
/// unary argmax. Deterministic for any thread count.
CrfResult crf_mean_field(const UnaryField& unary, const Tensor<float>& embeddings,
                         const CrfConfig& cfg);

/// Per-pixel argmin of the unary (argmax of the marginal), background mapped
/// to kBackground.
LabelMap unary_argmax(const UnaryField& unary);

struct InstanceCandidate {
  std::int32_t label = 0;
  std::vector<std::uint32_t> pixels;  // linear indices, sorted
};

/// 4-connected components per non-background label; components smaller than
/// min_pixels are dropped.
std::vector<InstanceCandidate> extract_instances(const LabelMap& labels,
                                                 std::size_t min_pixels = 32);

struct SegEvalReport {
  double miou = 0, fb_iou = 0, hit_at_5 = 0;  // percentages
};

/// pred_topk: H x W x 5 ranked candidate labels (kBackground allowed at rank 0).
/// mIoU and hit@5 are computed over GT-foreground pixels only; FB-IoU over all
/// pixels. Throws DomainError when gt has no foreground.
SegEvalReport eval_segmentation(const Tensor<std::int32_t>& pred_topk, const LabelMap& gt);

}  // namespace ocs::sem
