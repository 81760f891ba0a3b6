#pragma once

#include <filesystem>
#include <vector>

#include "ocs/depth/depth.hpp"
#include "ocs/eval3d/eval3d.hpp"
#include "ocs/io/json_util.hpp"
#include "ocs/pose/pose.hpp"
#include "ocs/sem/semantics.hpp"

namespace ocs::eval3d {

struct SceneEvalConfig {
  int surface_samples = 16384;
  double fscore_threshold = 0.1;  // canonical units
  double opacity_min = 0.05;      // Gaussians below this are dropped from the cloud
  bool depth_foreground_only = false;
  double tau = 0.07;  // softmax temperature for the top-5 candidate ranking
  std::uint64_t seed = 0;
};

struct MatchedObject {
  int gt_id = 0;
  int pred_id = 0;
  double iou = 0;
  double chamfer_dist = 0;
  double f1 = 0;
  double rot_err_deg = 0;
  double trans_err_m = 0;
};

struct SceneEvalReport {
  depth::DepthEvalReport depth;
  sem::SegEvalReport seg;
  pose::PoseEvalReport pose;      // over matched pairs
  double pose_joint_over_gt = 0;  // joint 10deg/10cm hits / gt count, percent
  std::vector<MatchedObject> objects;
  std::vector<int> unmatched_gt;
  std::vector<int> unmatched_pred;
  double mean_chamfer = 0;
  double mean_f1 = 0;
  std::size_t n_gt = 0, n_pred = 0, n_matched = 0;

  io::json to_json() const;
};

/// End-to-end evaluation: depth metrics, segmentation metrics over the
/// assembled labels, Hungarian mask-IoU instance matching, pose accuracies,
/// and per-object Chamfer / F1 against sampled ground-truth surfaces.
/// gt_dir defaults to bundle_dir (the oracle writes ground truth beside the
/// maps). Matching failures produce a partial report, not an error.
SceneEvalReport evaluate_scene(const std::filesystem::path& bundle_dir,
                               const std::filesystem::path& scene_dir,
                               const std::filesystem::path& gt_dir,
                               const SceneEvalConfig& cfg = {});

}  // namespace ocs::eval3d
