#include "ocs/pose/pose.hpp"

#include <algorithm>
#include <cmath>

#include "ocs/core/error.hpp"
#include "ocs/core/rng.hpp"

namespace ocs::pose {

namespace {

constexpr double kPi = 3.14159265358979323846;

/// Cyclic Jacobi eigendecomposition of a symmetric 3x3: a = v * diag(w) * v^T.
void sym_eigen3(const Mat3& a, Vec3& w, Mat3& v) {
  Mat3 m = a;
  v = Mat3::identity();
  for (int sweep = 0; sweep < 32; ++sweep) {
    double off = std::abs(m(0, 1)) + std::abs(m(0, 2)) + std::abs(m(1, 2));
    if (off == 0.0) break;
    for (int p = 0; p < 2; ++p)
      for (int q = p + 1; q < 3; ++q) {
        if (std::abs(m(p, q)) <= 1e-300) continue;
        const double theta = (m(q, q) - m(p, p)) / (2.0 * m(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        Mat3 rot = Mat3::identity();
        rot(p, p) = c;
        rot(q, q) = c;
        rot(p, q) = s;
        rot(q, p) = -s;
        m = rot.transposed() * m * rot;
        v = v * rot;
        m(p, q) = m(q, p) = 0.0;  // kill residual rounding noise
      }
  }
  w = {m(0, 0), m(1, 1), m(2, 2)};
}

struct Svd3 {
  Mat3 u, v;
  Vec3 d;  // singular values, descending
};

/// SVD of a general 3x3 via eigendecomposition of m^T m.
Svd3 svd3(const Mat3& m) {
  Vec3 lambda;
  Mat3 vm;
  sym_eigen3(m.transposed() * m, lambda, vm);

  int order[3] = {0, 1, 2};
  std::sort(order, order + 3, [&](int a, int b) { return lambda[a] > lambda[b]; });

  Svd3 out;
  Vec3 vcols[3];
  for (int i = 0; i < 3; ++i) {
    out.d[i] = std::sqrt(std::max(0.0, lambda[order[i]]));
    vcols[i] = vm.col(order[i]);
  }
  // Right-handed V (eigenvector signs are arbitrary).
  if (vcols[0].cross(vcols[1]).dot(vcols[2]) < 0) vcols[2] = -vcols[2];
  out.v = Mat3::from_cols(vcols[0], vcols[1], vcols[2]);

  const double eps = 1e-12 * std::max(out.d[0], 1e-300);
  Vec3 ucols[3];
  int full = 0;
  for (; full < 3; ++full) {
    if (out.d[full] <= eps) break;
    ucols[full] = (m * vcols[full]) / out.d[full];
  }
  if (full == 0) {
    out.u = Mat3::identity();
  } else if (full == 1) {
    // Rank 1: complete an arbitrary orthonormal frame around u0.
    const Vec3 u0 = ucols[0].normalized();
    Vec3 o = std::abs(u0.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
    ucols[1] = u0.cross(o).normalized();
    ucols[2] = u0.cross(ucols[1]);
    ucols[0] = u0;
    out.u = Mat3::from_cols(ucols[0], ucols[1], ucols[2]);
  } else {
    if (full == 2) ucols[2] = ucols[0].cross(ucols[1]).normalized();
    out.u = Mat3::from_cols(ucols[0], ucols[1], ucols[2]);
  }
  return out;
}

}  // namespace

namespace {
Sim3 umeyama_once(const CorrespondenceSet& corr);
}

Sim3 umeyama_sim3(const CorrespondenceSet& corr) {
  // Solve, rebase the camera points by the inverse, and solve the residual
  // problem near the identity where the eigendecomposition is perfectly
  // conditioned. Rescaling the objective by a fixed transform keeps the same
  // minimizer, so the composition is still the global least-squares optimum.
  const Sim3 first = umeyama_once(corr);
  const Sim3 inv = first.inverse();
  CorrespondenceSet rebased;
  rebased.canonical = corr.canonical;
  rebased.camera.reserve(corr.size());
  for (const auto& p : corr.camera) rebased.camera.push_back(inv.apply(p));
  return first.compose(umeyama_once(rebased));
}

namespace {

Sim3 umeyama_once(const CorrespondenceSet& corr) {
  const std::size_t n = corr.size();
  if (n != corr.camera.size()) throw DomainError("umeyama: unpaired correspondences");
  if (n < 3) throw DomainError("umeyama: need at least 3 correspondences");

  Vec3 mu_c, mu_p;
  for (std::size_t i = 0; i < n; ++i) {
    mu_c += corr.canonical[i];
    mu_p += corr.camera[i];
  }
  mu_c = mu_c / static_cast<double>(n);
  mu_p = mu_p / static_cast<double>(n);

  double var_c = 0.0;
  Mat3 cov = Mat3::zero();  // (1/n) sum (p - mu_p)(c - mu_c)^T
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 c = corr.canonical[i] - mu_c;
    const Vec3 p = corr.camera[i] - mu_p;
    var_c += c.squared_norm();
    cov = cov + Mat3::outer(p, c);
  }
  var_c /= static_cast<double>(n);
  cov = cov * (1.0 / static_cast<double>(n));

  const Svd3 svd = svd3(cov);
  if (!(svd.d[1] > 1e-12 * std::max(svd.d[0], 1e-300)) || svd.d[0] == 0.0)
    throw DomainError("umeyama: degenerate correspondences (covariance rank < 2)");

  Vec3 sign{1, 1, 1};
  const double rank_eps = 1e-12 * svd.d[0];
  if (svd.d[2] > rank_eps) {
    if (cov.det() < 0) sign.z = -1;
  } else {
    if (svd.u.det() * svd.v.det() < 0) sign.z = -1;
  }

  const Mat3 r = svd.u * Mat3::diag(sign) * svd.v.transposed();
  const double s = (svd.d[0] + svd.d[1] + sign.z * svd.d[2]) / var_c;
  if (!(s > 0)) throw DomainError("umeyama: degenerate correspondences (nonpositive scale)");

  Sim3 out;
  out.scale = s;
  out.rotation = Quat::from_matrix(r);
  out.translation = mu_p - (r * mu_c) * s;
  return out;
}

}  // namespace

double alignment_rms(const CorrespondenceSet& corr, const Sim3& t) {
  double sq = 0.0;
  for (std::size_t i = 0; i < corr.size(); ++i)
    sq += (corr.camera[i] - t.apply(corr.canonical[i])).squared_norm();
  return std::sqrt(sq / static_cast<double>(corr.size()));
}

std::optional<RansacResult> ransac_sim3(const CorrespondenceSet& corr,
                                        const RansacConfig& cfg) {
  const std::size_t n = corr.size();
  if (n < 3) return std::nullopt;
  if (!(cfg.inlier_threshold > 0) || !(cfg.confidence > 0 && cfg.confidence < 1))
    throw DomainError("ransac: invalid config");

  const Rng base(cfg.seed);
  std::size_t best_count = 0;
  double best_mean_res = 0.0;
  Sim3 best_pose;
  bool have_best = false;

  int needed = cfg.max_iterations;
  const double thr = cfg.inlier_threshold;

  auto count_inliers = [&](const Sim3& pose, double* mean_res,
                           std::vector<std::uint32_t>* idx) {
    std::size_t cnt = 0;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = (corr.camera[i] - pose.apply(corr.canonical[i])).norm();
      if (d < thr) {
        ++cnt;
        acc += d;
        if (idx) idx->push_back(static_cast<std::uint32_t>(i));
      }
    }
    if (mean_res) *mean_res = cnt ? acc / static_cast<double>(cnt) : 0.0;
    return cnt;
  };

  for (int iter = 0; iter < needed; ++iter) {
    Rng rng = base.stream("hypothesis", static_cast<std::uint64_t>(iter));
    std::uint32_t s0 = static_cast<std::uint32_t>(rng.uniform_index(n));
    std::uint32_t s1 = s0, s2 = s0;
    while (s1 == s0) s1 = static_cast<std::uint32_t>(rng.uniform_index(n));
    while (s2 == s0 || s2 == s1) s2 = static_cast<std::uint32_t>(rng.uniform_index(n));

    CorrespondenceSet minimal;
    minimal.canonical = {corr.canonical[s0], corr.canonical[s1], corr.canonical[s2]};
    minimal.camera = {corr.camera[s0], corr.camera[s1], corr.camera[s2]};

    Sim3 pose;
    try {
      pose = umeyama_sim3(minimal);
    } catch (const DomainError&) {
      continue;  // degenerate sample
    }

    double mean_res = 0.0;
    const std::size_t cnt = count_inliers(pose, &mean_res, nullptr);
    if (cnt < 3) continue;
    if (!have_best || cnt > best_count ||
        (cnt == best_count && mean_res < best_mean_res)) {
      have_best = true;
      best_count = cnt;
      best_mean_res = mean_res;
      best_pose = pose;
      // Standard adaptive schedule from the current inlier ratio.
      const double w = static_cast<double>(cnt) / static_cast<double>(n);
      const double p_good = w * w * w;
      if (p_good >= 1.0) {
        needed = iter + 1;
      } else if (p_good > 0.0) {
        const double est = std::log(1.0 - cfg.confidence) / std::log(1.0 - p_good);
        needed = static_cast<int>(
            std::min<double>(cfg.max_iterations, std::max(1.0, std::ceil(est))));
      }
    }
  }

  if (!have_best) return std::nullopt;

  // Refit on the consensus set, then re-collect inliers (once more if the set
  // changed so the returned pose is the least-squares fit of its own inliers).
  RansacResult res;
  res.pose = best_pose;
  count_inliers(best_pose, nullptr, &res.inliers);
  for (int pass = 0; pass < 3; ++pass) {
    CorrespondenceSet sub;
    sub.canonical.reserve(res.inliers.size());
    sub.camera.reserve(res.inliers.size());
    for (auto i : res.inliers) {
      sub.canonical.push_back(corr.canonical[i]);
      sub.camera.push_back(corr.camera[i]);
    }
    Sim3 refit;
    try {
      refit = umeyama_sim3(sub);
    } catch (const DomainError&) {
      break;
    }
    std::vector<std::uint32_t> new_inliers;
    count_inliers(refit, nullptr, &new_inliers);
    if (new_inliers.size() < 3) break;
    res.pose = refit;
    const bool stable = new_inliers == res.inliers;
    res.inliers = std::move(new_inliers);
    if (stable) break;
  }

  if (res.inliers.size() < static_cast<std::size_t>(std::max(3, cfg.min_inliers)))
    return std::nullopt;
  return res;
}

std::vector<InstanceSplit> split_instances(const std::vector<std::uint32_t>& mask_pixels,
                                           const Tensor<float>& nocs,
                                           const Tensor<float>& depth,
                                           const CameraIntrinsics& k,
                                           const SplitConfig& cfg) {
  std::vector<InstanceSplit> out;
  std::vector<std::uint32_t> remaining = mask_pixels;
  const std::size_t w = depth.dim(1);
  const std::size_t min_left = static_cast<std::size_t>(std::max(3, cfg.ransac.min_inliers));

  for (int round = 0; remaining.size() >= min_left; ++round) {
    CorrespondenceSet corr;
    corr.canonical.reserve(remaining.size());
    corr.camera.reserve(remaining.size());
    for (auto pix : remaining) {
      const std::size_t u = pix % w, v = pix / w;
      corr.canonical.push_back(
          {nocs.at(v, u, 0), nocs.at(v, u, 1), nocs.at(v, u, 2)});
      corr.camera.push_back(backproject(static_cast<double>(u), static_cast<double>(v),
                                        depth.at(v, u), k));
    }
    RansacConfig rcfg = cfg.ransac;
    rcfg.seed = Rng(cfg.ransac.seed).stream("split-round", round).next_u64();
    const auto res = ransac_sim3(corr, rcfg);
    if (!res) break;

    const double assign_thr = cfg.assign_factor * cfg.ransac.inlier_threshold;
    InstanceSplit inst;
    inst.pose = res->pose;
    inst.inlier_count = res->inliers.size();
    std::vector<std::uint32_t> keep;
    keep.reserve(remaining.size());
    for (std::size_t i = 0; i < remaining.size(); ++i) {
      const double d = (corr.camera[i] - res->pose.apply(corr.canonical[i])).norm();
      if (d < assign_thr)
        inst.pixels.push_back(remaining[i]);
      else
        keep.push_back(remaining[i]);
    }
    if (inst.pixels.empty()) break;
    out.push_back(std::move(inst));
    remaining = std::move(keep);
  }
  return out;
}

double rotation_error_deg(const Quat& a, const Quat& b) {
  const Mat3 rel = a.to_matrix().transposed() * b.to_matrix();
  double c = (rel.trace() - 1.0) / 2.0;
  c = std::clamp(c, -1.0, 1.0);
  return std::acos(c) * 180.0 / kPi;
}

double translation_error(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

PoseEvalReport eval_pose(const std::vector<PosePair>& matched) {
  if (matched.empty()) throw DomainError("eval_pose: empty matching");
  std::size_t n_t = 0, n_r = 0, n_j = 0;
  for (const auto& pr : matched) {
    const double te = translation_error(pr.pred.translation, pr.gt.translation);
    const double re = rotation_error_deg(pr.pred.rotation, pr.gt.rotation);
    const bool ok_t = te < 0.10;
    const bool ok_r = re < 10.0;
    n_t += ok_t;
    n_r += ok_r;
    n_j += ok_t && ok_r;
  }
  PoseEvalReport r;
  r.pairs = matched.size();
  const double dn = static_cast<double>(matched.size());
  r.acc_10cm = 100.0 * static_cast<double>(n_t) / dn;
  r.acc_10deg = 100.0 * static_cast<double>(n_r) / dn;
  r.acc_joint = 100.0 * static_cast<double>(n_j) / dn;
  return r;
}

}  // namespace ocs::pose
