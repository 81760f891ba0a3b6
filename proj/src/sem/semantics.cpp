#include "ocs/sem/semantics.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

#include "ocs/core/error.hpp"
#include "ocs/core/parallel.hpp"
#include "ocs/kernels/kernels.hpp"

namespace ocs::sem {

namespace {

Tensor<float> normalized_rows(const Tensor<float>& t, std::size_t rows, std::size_t dim,
                              const char* what) {
  Tensor<float> out(t.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const float* src = t.data() + r * dim;
    double sq = 0.0;
    for (std::size_t j = 0; j < dim; ++j) sq += static_cast<double>(src[j]) * src[j];
    if (sq <= 0.0)
      throw DomainError(std::string(what) + ": zero-norm embedding at index " +
                        std::to_string(r));
    const double inv = 1.0 / std::sqrt(sq);
    float* dst = out.data() + r * dim;
    for (std::size_t j = 0; j < dim; ++j) dst[j] = static_cast<float>(src[j] * inv);
  }
  return out;
}

}  // namespace

UnaryField unaries_from_embeddings(const Tensor<float>& embeddings, const io::Vocab& vocab,
                                   double tau) {
  if (embeddings.rank() != 3) throw DomainError("unaries: embeddings must be H x W x D");
  if (!(tau > 0)) throw DomainError("unaries: tau must be positive");
  const std::size_t h = embeddings.dim(0), w = embeddings.dim(1), d = embeddings.dim(2);
  const std::size_t c = vocab.size();
  if (vocab.embeddings.dim(1) != d) throw DomainError("unaries: vocab dimension mismatch");

  const Tensor<float> emb = normalized_rows(embeddings, h * w, d, "unaries: pixel");
  const Tensor<float> voc = normalized_rows(vocab.embeddings, c, d, "unaries: vocab row");

  UnaryField out;
  out.tau = tau;
  out.background_index = vocab.background_index;
  out.unary = Tensor<float>({h, w, c});

  const auto& k = kern::kernels();
  parallel_chunks(h * w, 256, [&](std::size_t b, std::size_t e) {
    std::vector<double> logits(c);
    for (std::size_t p = b; p < e; ++p) {
      const float* ep = emb.data() + p * d;
      double mx = -1e300;
      for (std::size_t l = 0; l < c; ++l) {
        logits[l] = k.dot_f32(ep, voc.data() + l * d, d) / tau;
        mx = std::max(mx, logits[l]);
      }
      double lse = 0.0;
      for (std::size_t l = 0; l < c; ++l) lse += std::exp(logits[l] - mx);
      const double log_z = mx + std::log(lse);
      float* up = out.unary.data() + p * c;
      for (std::size_t l = 0; l < c; ++l) up[l] = static_cast<float>(log_z - logits[l]);
    }
  });
  return out;
}

LabelMap unary_argmax(const UnaryField& field) {
  const std::size_t h = field.unary.dim(0), w = field.unary.dim(1), c = field.unary.dim(2);
  LabelMap labels({h, w});
  for (std::size_t p = 0; p < h * w; ++p) {
    const float* up = field.unary.data() + p * c;
    std::size_t best = 0;
    for (std::size_t l = 1; l < c; ++l)
      if (up[l] < up[best]) best = l;
    labels[p] = static_cast<std::int32_t>(best) == field.background_index
                    ? kBackground
                    : static_cast<std::int32_t>(best);
  }
  return labels;
}

CrfResult crf_mean_field(const UnaryField& field, const Tensor<float>& embeddings,
                         const CrfConfig& cfg) {
  const std::size_t h = field.unary.dim(0), w = field.unary.dim(1), c = field.unary.dim(2);
  const std::size_t n = h * w;
  if (cfg.iterations < 0) throw DomainError("crf: iterations must be >= 0");

  // Q^0 = softmax(-unary); the unary is already a negative log-probability.
  Tensor<float> q({n, c});
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t l = 0; l < c; ++l)
      q.at(p, l) = std::exp(-static_cast<double>(field.unary[p * c + l]));

  const Tensor<float> emb = normalized_rows(embeddings, n, embeddings.dim(2), "crf: pixel");
  const std::size_t d = embeddings.dim(2);
  const bool dense = n <= cfg.dense_threshold;
  const auto& kern_tab = kern::kernels();

  // Planar transposes feed the SIMD gather kernel.
  Tensor<float> emb_t({d, n});
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t t = 0; t < d; ++t) emb_t.at(t, p) = emb[p * d + t];

  Tensor<float> q_t({c, n});
  auto rebuild_qt = [&]() {
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t l = 0; l < c; ++l) q_t.at(l, p) = q.at(p, l);
  };
  rebuild_qt();

  Tensor<float> q_new({n, c});
  for (int it = 0; it < cfg.iterations; ++it) {
    parallel_chunks(n, 64, [&](std::size_t b, std::size_t e) {
      std::vector<float> acc(c);
      std::vector<double> logits(c);
      for (std::size_t p = b; p < e; ++p) {
        const float* ep = emb.data() + p * d;
        double count;
        if (dense) {
          float ksum = 0.0f;
          kern_tab.affinity_row_f32(ep, emb_t.data(), q_t.data(), n, d, c, acc.data(),
                                    &ksum);
          // Remove the self term (unit affinity with itself).
          for (std::size_t l = 0; l < c; ++l) acc[l] -= q.at(p, l);
          ksum -= 1.0f;
          count = static_cast<double>(n - 1);
          for (std::size_t l = 0; l < c; ++l)
            logits[l] = static_cast<double>(ksum) - static_cast<double>(acc[l]);
        } else {
          const std::ptrdiff_t r = cfg.window_radius;
          const std::ptrdiff_t py = static_cast<std::ptrdiff_t>(p / w);
          const std::ptrdiff_t px = static_cast<std::ptrdiff_t>(p % w);
          std::fill(acc.begin(), acc.end(), 0.0f);
          double ksum = 0.0;
          std::size_t cnt = 0;
          for (std::ptrdiff_t dy = -r; dy <= r; ++dy) {
            const std::ptrdiff_t y = py + dy;
            if (y < 0 || y >= static_cast<std::ptrdiff_t>(h)) continue;
            for (std::ptrdiff_t dx = -r; dx <= r; ++dx) {
              const std::ptrdiff_t x = px + dx;
              if (x < 0 || x >= static_cast<std::ptrdiff_t>(w)) continue;
              const std::size_t j = static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x);
              if (j == p) continue;
              float kj = kern_tab.dot_f32(ep, emb.data() + j * d, d);
              if (kj < 0) kj = 0;
              ksum += kj;
              ++cnt;
              for (std::size_t l = 0; l < c; ++l) acc[l] += kj * q.at(j, l);
            }
          }
          count = std::max<std::size_t>(cnt, 1);
          for (std::size_t l = 0; l < c; ++l) logits[l] = ksum - static_cast<double>(acc[l]);
        }
        // Q_i(l) ∝ exp(-unary - w_eff * sum_{j≠i} k_ij (1 - Q_j(l))), messages
        // averaged over the neighborhood so the weight is resolution-free.
        const double scale = cfg.pairwise_weight / count;
        double mx = -1e300;
        for (std::size_t l = 0; l < c; ++l) {
          logits[l] = -static_cast<double>(field.unary[p * c + l]) - scale * logits[l];
          mx = std::max(mx, logits[l]);
        }
        double z = 0.0;
        for (std::size_t l = 0; l < c; ++l) z += std::exp(logits[l] - mx);
        for (std::size_t l = 0; l < c; ++l)
          q_new.at(p, l) = static_cast<float>(std::exp(logits[l] - mx) / z);
      }
    });
    std::swap(q.storage(), q_new.storage());
    rebuild_qt();
  }

  CrfResult res;
  res.labels = LabelMap({h, w});
  for (std::size_t p = 0; p < n; ++p) {
    std::size_t best = 0;
    for (std::size_t l = 1; l < c; ++l)
      if (q.at(p, l) > q.at(p, best)) best = l;
    res.labels[p] = static_cast<std::int32_t>(best) == field.background_index
                        ? kBackground
                        : static_cast<std::int32_t>(best);
  }
  res.marginals = Tensor<float>({h, w, c});
  std::copy(q.storage().begin(), q.storage().end(), res.marginals.storage().begin());
  return res;
}

std::vector<InstanceCandidate> extract_instances(const LabelMap& labels,
                                                 std::size_t min_pixels) {
  const std::size_t h = labels.dim(0), w = labels.dim(1);
  std::vector<std::uint8_t> visited(h * w, 0);
  std::vector<InstanceCandidate> out;

  for (std::size_t start = 0; start < h * w; ++start) {
    if (visited[start] || labels[start] == kBackground) continue;
    const std::int32_t lab = labels[start];
    InstanceCandidate comp;
    comp.label = lab;
    std::deque<std::uint32_t> queue{static_cast<std::uint32_t>(start)};
    visited[start] = 1;
    while (!queue.empty()) {
      const std::uint32_t p = queue.front();
      queue.pop_front();
      comp.pixels.push_back(p);
      const std::size_t y = p / w, x = p % w;
      const std::ptrdiff_t nb[4][2] = {{0, -1}, {0, 1}, {-1, 0}, {1, 0}};
      for (const auto& o : nb) {
        const std::ptrdiff_t ny = static_cast<std::ptrdiff_t>(y) + o[0];
        const std::ptrdiff_t nx = static_cast<std::ptrdiff_t>(x) + o[1];
        if (ny < 0 || nx < 0 || ny >= static_cast<std::ptrdiff_t>(h) ||
            nx >= static_cast<std::ptrdiff_t>(w))
          continue;
        const std::size_t np = static_cast<std::size_t>(ny) * w + static_cast<std::size_t>(nx);
        if (!visited[np] && labels[np] == lab) {
          visited[np] = 1;
          queue.push_back(static_cast<std::uint32_t>(np));
        }
      }
    }
    if (comp.pixels.size() >= min_pixels) {
      std::sort(comp.pixels.begin(), comp.pixels.end());
      out.push_back(std::move(comp));
    }
  }
  return out;
}

SegEvalReport eval_segmentation(const Tensor<std::int32_t>& pred_topk, const LabelMap& gt) {
  if (pred_topk.rank() != 3 || pred_topk.dim(2) != 5)
    throw DomainError("eval_segmentation: pred must be H x W x 5");
  if (pred_topk.dim(0) != gt.dim(0) || pred_topk.dim(1) != gt.dim(1))
    throw DomainError("eval_segmentation: shape mismatch");
  const std::size_t n = gt.size();

  std::size_t fg_count = 0;
  for (std::size_t p = 0; p < n; ++p) fg_count += gt[p] != kBackground;
  if (fg_count == 0) throw DomainError("eval_segmentation: gt has no foreground");

  // FB-IoU over all pixels.
  std::size_t fg_i = 0, fg_u = 0, bg_i = 0, bg_u = 0;
  for (std::size_t p = 0; p < n; ++p) {
    const bool gf = gt[p] != kBackground;
    const bool pf = pred_topk[p * 5] != kBackground;
    fg_i += gf && pf;
    fg_u += gf || pf;
    bg_i += !gf && !pf;
    bg_u += !gf || !pf;
  }
  const double fg_iou = fg_u ? static_cast<double>(fg_i) / static_cast<double>(fg_u) : 1.0;
  const double bg_iou = bg_u ? static_cast<double>(bg_i) / static_cast<double>(bg_u) : 1.0;

  // mIoU over GT-present classes, restricted to GT-foreground pixels.
  std::vector<std::int32_t> classes;
  for (std::size_t p = 0; p < n; ++p)
    if (gt[p] != kBackground) classes.push_back(gt[p]);
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());

  double iou_sum = 0.0;
  for (const std::int32_t cls : classes) {
    std::size_t inter = 0, uni = 0;
    for (std::size_t p = 0; p < n; ++p) {
      if (gt[p] == kBackground) continue;
      const bool g = gt[p] == cls;
      const bool pr = pred_topk[p * 5] == cls;
      inter += g && pr;
      uni += g || pr;
    }
    iou_sum += uni ? static_cast<double>(inter) / static_cast<double>(uni) : 1.0;
  }

  std::size_t hits = 0;
  for (std::size_t p = 0; p < n; ++p) {
    if (gt[p] == kBackground) continue;
    for (int r = 0; r < 5; ++r)
      if (pred_topk[p * 5 + r] == gt[p]) {
        ++hits;
        break;
      }
  }

  SegEvalReport rep;
  rep.fb_iou = 100.0 * 0.5 * (fg_iou + bg_iou);
  rep.miou = 100.0 * iou_sum / static_cast<double>(classes.size());
  rep.hit_at_5 = 100.0 * static_cast<double>(hits) / static_cast<double>(fg_count);
  return rep;
}

}  // namespace ocs::sem
