#include "ocs/eval3d/driver.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "ocs/core/error.hpp"
#include "ocs/eval3d/match.hpp"
#include "ocs/io/bundle.hpp"
#include "ocs/io/npy.hpp"
#include "ocs/io/ply.hpp"
#include "ocs/io/scene.hpp"
#include "ocs/oracle/oracle.hpp"

namespace ocs::eval3d {

namespace fs = std::filesystem;

io::json SceneEvalReport::to_json() const {
  io::json j;
  j["depth"] = {{"delta1", depth.delta1},     {"delta2", depth.delta2},
                {"delta3", depth.delta3},     {"abs_rel", depth.abs_rel},
                {"log10", depth.log10},       {"rmse", depth.rmse},
                {"rmse_log", depth.rmse_log}, {"silog", depth.silog}};
  j["segmentation"] = {
      {"miou", seg.miou}, {"fb_iou", seg.fb_iou}, {"hit_at_5", seg.hit_at_5}};
  j["pose"] = {{"acc_10cm", pose.acc_10cm},
               {"acc_10deg", pose.acc_10deg},
               {"acc_joint", pose.acc_joint},
               {"acc_joint_over_gt", pose_joint_over_gt},
               {"matched_pairs", pose.pairs}};
  io::json objs = io::json::array();
  for (const auto& o : objects)
    objs.push_back(io::json{{"gt_id", o.gt_id},
                            {"pred_id", o.pred_id},
                            {"mask_iou", o.iou},
                            {"chamfer", o.chamfer_dist},
                            {"f1", o.f1},
                            {"rot_err_deg", o.rot_err_deg},
                            {"trans_err_m", o.trans_err_m}});
  j["objects"] = objs;
  j["unmatched_gt"] = unmatched_gt;
  j["unmatched_pred"] = unmatched_pred;
  j["reconstruction"] = {{"mean_chamfer", mean_chamfer},
                         {"mean_f1", mean_f1},
                         {"n_gt", n_gt},
                         {"n_pred", n_pred},
                         {"n_matched", n_matched}};
  return j;
}

SceneEvalReport evaluate_scene(const fs::path& bundle_dir, const fs::path& scene_dir,
                               const fs::path& gt_dir, const SceneEvalConfig& cfg) {
  const io::DenseMaps maps = io::read_bundle(bundle_dir);
  const fs::path gtd = gt_dir.empty() ? bundle_dir : gt_dir;
  const oracle::GtScene gt = oracle::read_gt_poses(gtd / "gt_poses.json");
  if (maps.gt_mask.empty()) throw InputError("evaluate: bundle has no gt_mask.npy");
  const io::SceneDescriptor scene = io::read_scene(scene_dir / "scene.json");
  const auto pred_mask_npy =
      io::read_npy_checked(scene_dir / "mask.npy", io::NpyDtype::U16, 2);
  const Tensor<std::uint16_t> pred_mask = io::to_tensor_u16(pred_mask_npy);
  if (!pred_mask.same_shape(maps.gt_mask))
    throw InputError("evaluate: prediction mask shape mismatch");

  const std::size_t h = maps.gt_mask.dim(0), w = maps.gt_mask.dim(1);
  const std::size_t n = h * w;

  SceneEvalReport rep;
  rep.n_gt = gt.objects.size();
  rep.n_pred = scene.instances.size();

  // ---- depth (against the clean ground truth when the bundle is noisy) ----
  Tensor<float> gt_depth = maps.depth;
  if (fs::exists(gtd / "gt_depth.npy"))
    gt_depth = io::to_tensor_f32(
        io::read_npy_checked(gtd / "gt_depth.npy", io::NpyDtype::F32, 2));
  Tensor<std::uint8_t> dmask;
  if (cfg.depth_foreground_only) {
    dmask = Tensor<std::uint8_t>({h, w});
    for (std::size_t i = 0; i < n; ++i) dmask[i] = maps.gt_mask[i] != 0;
  }
  rep.depth = depth::eval_depth(maps.depth, gt_depth, dmask);

  // ---- segmentation ----
  sem::LabelMap gt_labels({h, w});
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint16_t id = maps.gt_mask[i];
    gt_labels[i] =
        id == 0 ? sem::kBackground
                : (id <= gt.objects.size() ? gt.objects[id - 1].label_id : sem::kBackground);
  }
  // rank 0 from the assembled scene, ranks 1..4 from the unary ordering
  std::map<int, int> pred_label_of_id;
  for (const auto& inst : scene.instances) pred_label_of_id[inst.id] = inst.label_id;
  const sem::UnaryField unaries =
      sem::unaries_from_embeddings(maps.embeddings, maps.vocab, cfg.tau);
  const std::size_t c = maps.vocab.size();
  Tensor<std::int32_t> top5({h, w, 5});
  std::vector<std::pair<float, int>> order(c);
  for (std::size_t p = 0; p < n; ++p) {
    const std::uint16_t id = pred_mask[p];
    std::int32_t first = sem::kBackground;
    if (id != 0) {
      auto it = pred_label_of_id.find(id);
      first = it == pred_label_of_id.end() ? sem::kBackground : it->second;
    }
    top5[p * 5] = first;
    const float* up = unaries.unary.data() + p * c;
    for (std::size_t l = 0; l < c; ++l) order[l] = {up[l], static_cast<int>(l)};
    std::sort(order.begin(), order.end());
    int rank = 1;
    for (std::size_t l = 0; l < c && rank < 5; ++l) {
      const std::int32_t lab = order[l].second == unaries.background_index
                                   ? sem::kBackground
                                   : order[l].second;
      if (lab == first) continue;
      top5[p * 5 + rank] = lab;
      ++rank;
    }
    for (; rank < 5; ++rank) top5[p * 5 + rank] = sem::kBackground;
  }
  rep.seg = sem::eval_segmentation(top5, gt_labels);

  // ---- mask IoU matching (Hungarian on 1 - IoU) ----
  std::vector<std::vector<std::size_t>> gt_hist(rep.n_gt + 1), pred_hist(rep.n_pred + 1);
  std::vector<std::size_t> gt_area(rep.n_gt + 1, 0), pred_area(rep.n_pred + 1, 0);
  std::map<std::pair<int, int>, std::size_t> inter;
  for (std::size_t p = 0; p < n; ++p) {
    const int g = maps.gt_mask[p];
    const int q = pred_mask[p];
    if (g > 0 && g <= static_cast<int>(rep.n_gt)) ++gt_area[g];
    if (q > 0 && q <= static_cast<int>(rep.n_pred)) ++pred_area[q];
    if (g > 0 && q > 0 && g <= static_cast<int>(rep.n_gt) &&
        q <= static_cast<int>(rep.n_pred))
      ++inter[{g, q}];
  }
  std::vector<double> iou(rep.n_gt * rep.n_pred, 0.0);
  for (const auto& [key, cnt] : inter) {
    const auto [g, q] = key;
    const double uni =
        static_cast<double>(gt_area[g] + pred_area[q] - cnt);
    if (uni > 0) iou[(g - 1) * rep.n_pred + (q - 1)] = static_cast<double>(cnt) / uni;
  }
  std::vector<int> assign;
  if (rep.n_pred > 0 && rep.n_gt > 0) {
    std::vector<double> cost(iou.size());
    for (std::size_t i = 0; i < iou.size(); ++i) cost[i] = 1.0 - iou[i];
    assign = hungarian_assign(cost, rep.n_gt, rep.n_pred);
  } else {
    assign.assign(rep.n_gt, -1);
  }

  // ---- per matched object: pose + reconstruction ----
  std::vector<pose::PosePair> pairs;
  std::vector<char> pred_used(rep.n_pred, 0);
  std::size_t joint_hits = 0;
  double chamfer_sum = 0, f1_sum = 0;
  std::size_t recon_count = 0;

  for (std::size_t gi = 0; gi < rep.n_gt; ++gi) {
    const int pj = gi < assign.size() ? assign[gi] : -1;
    const double pair_iou = pj >= 0 ? iou[gi * rep.n_pred + pj] : 0.0;
    if (pj < 0 || pair_iou <= 0.0) {
      rep.unmatched_gt.push_back(static_cast<int>(gi) + 1);
      continue;
    }
    pred_used[pj] = 1;
    const auto& inst = scene.instances[pj];
    const auto& gto = gt.objects[gi];

    MatchedObject mo;
    mo.gt_id = static_cast<int>(gi) + 1;
    mo.pred_id = inst.id;
    mo.iou = pair_iou;
    mo.rot_err_deg = pose::rotation_error_deg(inst.sim3.rotation, gto.pose.rotation);
    mo.trans_err_m = pose::translation_error(inst.sim3.translation, gto.pose.translation);
    pairs.push_back({inst.sim3, gto.pose});
    if (mo.rot_err_deg < 10.0 && mo.trans_err_m < 0.10) ++joint_hits;

    const fs::path ply =
        scene_dir / "objects" / ("obj_" + std::to_string(inst.id) + ".ply");
    mo.chamfer_dist = std::nan("");
    mo.f1 = std::nan("");
    if (fs::exists(ply)) {
      const gs::GaussianSet set = io::import_gaussians_ply(ply);
      std::vector<Vec3> pred_cloud;
      for (const auto& g : set.primitives)
        if (g.opacity >= cfg.opacity_min) pred_cloud.push_back(g.mean);
      if (!pred_cloud.empty()) {
        const auto gt_cloud = oracle::sample_surface_points(
            gto, cfg.surface_samples, cfg.seed + static_cast<std::uint64_t>(gi));
        mo.chamfer_dist = chamfer(pred_cloud, gt_cloud);
        mo.f1 = fscore(pred_cloud, gt_cloud, cfg.fscore_threshold);
        chamfer_sum += mo.chamfer_dist;
        f1_sum += mo.f1;
        ++recon_count;
      }
    }
    rep.objects.push_back(mo);
  }
  for (std::size_t pj = 0; pj < rep.n_pred; ++pj)
    if (!pred_used[pj]) rep.unmatched_pred.push_back(scene.instances[pj].id);

  rep.n_matched = pairs.size();
  if (!pairs.empty()) rep.pose = pose::eval_pose(pairs);
  rep.pose_joint_over_gt =
      rep.n_gt ? 100.0 * static_cast<double>(joint_hits) / static_cast<double>(rep.n_gt)
               : 100.0;
  if (recon_count > 0) {
    rep.mean_chamfer = chamfer_sum / static_cast<double>(recon_count);
    rep.mean_f1 = f1_sum / static_cast<double>(recon_count);
  }
  return rep;
}

}  // namespace ocs::eval3d
