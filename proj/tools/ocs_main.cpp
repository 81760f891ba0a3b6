// ocs: object-centric scene assembly toolkit CLI.
// Subcommands: synth, assemble, render, css-fit, evaluate.
// Exit codes: 0 success, 1 internal/invariant failure, 2 input error.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "ocs/core/parallel.hpp"
#include "ocs/eval3d/driver.hpp"
#include "ocs/io/bundle.hpp"
#include "ocs/io/npy.hpp"
#include "ocs/io/ply.hpp"
#include "ocs/io/png.hpp"
#include "ocs/kernels/kernels.hpp"
#include "ocs/objective/losses.hpp"
#include "ocs/oracle/oracle.hpp"
#include "ocs/pipeline.hpp"
#include "ocs/render/css.hpp"

namespace fs = std::filesystem;
using ocs::io::json;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr double kPi = 3.14159265358979323846;

json provenance_block(const std::string& command, const json& config, std::uint64_t seed) {
  // No thread count here: outputs are byte-identical for any worker count, so
  // provenance must not encode it.
  json p;
  p["tool"] = "ocs";
  p["version"] = kVersion;
  p["command"] = command;
  p["seed"] = seed;
  p["kernels"] = ocs::kern::active_variant();
  p["config_hash"] = ocs::io::json_hash(config);
  return p;
}

ocs::Vec3 parse_background(const std::string& s) {
  if (s == "white") return {1, 1, 1};
  if (s == "black") return {0, 0, 0};
  double r, g, b;
  if (std::sscanf(s.c_str(), "%lf,%lf,%lf", &r, &g, &b) == 3) return {r, g, b};
  throw ocs::InputError("unrecognized background '" + s + "'");
}

int parse_views_arg(const std::string& s) {
  if (s.rfind("icosphere", 0) == 0) return std::stoi(s.substr(9));
  return std::stoi(s);
}

void write_views_dir(const fs::path& dir, const ocs::render::CanonicalViewSet& views,
                     const std::vector<ocs::render::Image>& images, int n_arg,
                     double fov_rad) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  json meta;
  meta["n"] = n_arg;
  meta["resolution"] = views.camera.width;
  meta["radius"] = views.radius;
  meta["fov_rad"] = fov_rad;
  ocs::io::save_json(dir / "views.json", meta);
  for (std::size_t i = 0; i < images.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "view_%03zu.npy", i);
    ocs::Tensor<float> f32(images[i].shape());
    for (std::size_t j = 0; j < images[i].size(); ++j)
      f32[j] = static_cast<float>(images[i][j]);
    ocs::io::write_npy(dir / name, f32);
  }
}

void read_views_dir(const fs::path& dir, ocs::render::CanonicalViewSet* views,
                    std::vector<ocs::render::Image>* images) {
  const json meta = ocs::io::load_json(dir / "views.json");
  const int n = meta.at("n").get<int>();
  *views = ocs::render::canonical_views(n, meta.at("resolution").get<int>(),
                                        meta.at("radius").get<double>(),
                                        meta.at("fov_rad").get<double>());
  images->clear();
  for (int i = 0; i < n; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "view_%03d.npy", i);
    const auto arr = ocs::io::read_npy_checked(dir / name, ocs::io::NpyDtype::F32, 3);
    ocs::render::Image img(arr.shape);
    for (std::size_t j = 0; j < img.size(); ++j) img[j] = arr.f32()[j];
    images->push_back(std::move(img));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ocs: feed-forward object-centric scene assembly toolkit"};
  app.require_subcommand(1);

  int threads = 0;
  app.add_option("--threads", threads, "worker threads (0 = hardware)")
      ->capture_default_str();
  bool scalar_only = false;
  app.add_flag("--scalar-kernels", scalar_only, "disable SIMD kernel variants");

  // ---------------- synth ----------------
  auto* synth = app.add_subcommand("synth", "generate a synthetic oracle bundle");
  int s_objects = 5;
  std::uint64_t s_seed = 0;
  int s_resolution = 128;
  double s_fov_deg = 75.0;
  int s_embed_dim = 16;
  std::string s_out;
  ocs::oracle::NoiseConfig s_noise;
  std::string s_views_out;
  int s_views = 42;
  int s_view_res = 128;
  synth->add_option("--objects", s_objects, "object count")->capture_default_str();
  synth->add_option("--seed", s_seed, "scene seed")->capture_default_str();
  synth->add_option("--resolution", s_resolution, "image size")->capture_default_str();
  synth->add_option("--fov", s_fov_deg, "field of view, degrees")->capture_default_str();
  synth->add_option("--embed-dim", s_embed_dim, "embedding dimension (heuristic default)")
      ->capture_default_str();
  synth->add_option("--out", s_out, "output bundle directory")->required();
  synth->add_option("--noise-depth", s_noise.depth_sigma, "multiplicative depth sigma")
      ->capture_default_str();
  synth->add_option("--noise-nocs", s_noise.nocs_sigma, "additive NOCS sigma")
      ->capture_default_str();
  synth->add_option("--noise-embed-rot", s_noise.embed_rot_deg,
                    "embedding rotation, degrees")
      ->capture_default_str();
  synth->add_option("--label-flip-rate", s_noise.label_flip_rate,
                    "per-pixel label flip probability")
      ->capture_default_str();
  synth->add_option("--flip-mix", s_noise.flip_mix,
                    "wrong-class blend factor for flips (heuristic default)")
      ->capture_default_str();
  synth->add_option("--canonical-views-out", s_views_out,
                    "also write per-object canonical GT views here");
  synth->add_option("--views", s_views, "canonical view count")->capture_default_str();
  synth->add_option("--view-resolution", s_view_res, "canonical view size")
      ->capture_default_str();

  // ---------------- assemble ----------------
  auto* assemble = app.add_subcommand("assemble", "bundle -> instances + poses + objects");
  std::string a_bundle, a_out;
  ocs::AssembleConfig a_cfg;
  std::string a_mode = "means-only";
  assemble->add_option("--bundle", a_bundle, "input bundle directory")->required();
  assemble->add_option("--out", a_out, "output scene directory")->required();
  assemble->add_option("--tau", a_cfg.tau, "softmax temperature (heuristic default)")
      ->capture_default_str();
  assemble->add_option("--crf-iters", a_cfg.crf.iterations, "mean-field iterations (heuristic default)")
      ->capture_default_str();
  assemble
      ->add_option("--pairwise-weight", a_cfg.crf.pairwise_weight,
                   "CRF pairwise weight (heuristic default)")
      ->capture_default_str();
  assemble->add_option("--window", a_cfg.crf.window_radius,
                       "pairwise window radius above the dense-CRF size limit")
      ->capture_default_str();
  assemble
      ->add_option("--dense-threshold", a_cfg.crf.dense_threshold,
                   "max pixels for the exact fully connected CRF (heuristic default)")
      ->capture_default_str();
  assemble
      ->add_option("--ransac-threshold", a_cfg.split.ransac.inlier_threshold,
                   "inlier threshold, meters (heuristic default)")
      ->capture_default_str();
  assemble->add_option("--min-inliers", a_cfg.split.ransac.min_inliers,
                       "minimum inliers per instance (heuristic default)")
      ->capture_default_str();
  assemble->add_option("--max-iterations", a_cfg.split.ransac.max_iterations,
                       "RANSAC iteration cap")
      ->capture_default_str();
  assemble->add_option("--min-pixels", a_cfg.min_pixels,
                       "minimum component size (heuristic default)")
      ->capture_default_str();
  assemble->add_option("--seed", a_cfg.seed, "RANSAC seed")->capture_default_str();
  assemble->add_option("--canonicalize", a_mode, "means-only | full-sim3")
      ->capture_default_str();

  // ---------------- render ----------------
  auto* render_cmd = app.add_subcommand("render", "render a Gaussian PLY from canonical views");
  std::string r_ply, r_out, r_views = "icosphere42", r_bg = "white";
  int r_resolution = 512;
  double r_radius = 2.0, r_fov_deg = 40.0;
  bool r_npy = false;
  render_cmd->add_option("--ply", r_ply, "input Gaussian PLY")->required();
  render_cmd->add_option("--out", r_out, "output directory")->required();
  render_cmd->add_option("--views", r_views, "icosphere42 | icosphere12 | <count>")
      ->capture_default_str();
  render_cmd->add_option("--resolution", r_resolution, "image size")->capture_default_str();
  render_cmd->add_option("--radius", r_radius, "camera radius (heuristic default)")
      ->capture_default_str();
  render_cmd->add_option("--fov", r_fov_deg, "view FOV, degrees (heuristic default)")
      ->capture_default_str();
  render_cmd->add_option("--bg", r_bg, "white | black | r,g,b")->capture_default_str();
  render_cmd->add_flag("--npy", r_npy, "also write f32 NPY images");

  // ---------------- css-fit ----------------
  auto* fit = app.add_subcommand("css-fit", "optimize Gaussians against canonical views");
  std::string f_ply, f_views_dir, f_out;
  ocs::render::FitConfig f_cfg;
  fit->add_option("--ply", f_ply, "initial Gaussian PLY")->required();
  fit->add_option("--views-dir", f_views_dir, "GT views directory (views.json + NPY)")
      ->required();
  fit->add_option("--out", f_out, "output fitted PLY")->required();
  fit->add_option("--steps", f_cfg.max_steps, "max optimization steps")->capture_default_str();
  fit->add_option("--lr", f_cfg.lr, "global step scale")->capture_default_str();
  fit->add_option("--momentum", f_cfg.momentum, "momentum")->capture_default_str();
  fit->add_option("--lambda-ssim", f_cfg.lambda_ssim, "SSIM weight (heuristic default)")
      ->capture_default_str();
  fit->add_option("--target-psnr-gain", f_cfg.target_psnr_gain,
                  "stop once this many dB gained (0 = run all steps)")
      ->capture_default_str();
  fit->add_flag("--monotone", f_cfg.monotone, "backtracking line-search safeguard");

  // ---------------- evaluate ----------------
  auto* eval = app.add_subcommand("evaluate", "metric reports");
  std::string e_task = "full", e_bundle, e_gt, e_scene, e_out;
  bool e_fg_only = false;
  double e_lambda_grad = 1.0, e_huber = 0.1;
  eval->add_option("--task", e_task, "full | depth | losses")->capture_default_str();
  eval->add_option("--bundle", e_bundle, "prediction bundle directory")->required();
  eval->add_option("--gt", e_gt, "ground-truth directory (default: bundle)");
  eval->add_option("--scene", e_scene, "assembled scene directory (task=full)");
  eval->add_option("--out", e_out, "write the JSON report here");
  eval->add_flag("--foreground-only", e_fg_only, "evaluate depth on GT foreground only");
  eval->add_option("--lambda-grad", e_lambda_grad,
                   "gradient weight in the depth loss (heuristic default)")
      ->capture_default_str();
  eval->add_option("--huber-delta", e_huber, "FOV loss Huber delta (heuristic default)")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  ocs::set_thread_count(threads);
  ocs::kern::force_scalar(scalar_only);

  try {
    if (*synth) {
      ocs::oracle::SceneConfig cfg;
      cfg.object_count = s_objects;
      cfg.seed = s_seed;
      cfg.resolution = s_resolution;
      cfg.fov = s_fov_deg * kPi / 180.0;
      cfg.embed_dim = s_embed_dim;
      cfg.noise = s_noise;
      const json cfg_json = {{"objects", s_objects},
                             {"resolution", s_resolution},
                             {"fov_deg", s_fov_deg},
                             {"embed_dim", s_embed_dim},
                             {"noise_depth", s_noise.depth_sigma},
                             {"noise_nocs", s_noise.nocs_sigma},
                             {"noise_embed_rot", s_noise.embed_rot_deg},
                             {"label_flip_rate", s_noise.label_flip_rate},
                             {"flip_mix", s_noise.flip_mix}};
      const auto scene = ocs::oracle::generate_scene(cfg);
      ocs::oracle::write_scene_bundle(scene, s_out,
                                      provenance_block("synth", cfg_json, s_seed));
      if (!s_views_out.empty()) {
        const auto views = ocs::render::canonical_views(s_views, s_view_res);
        for (std::size_t i = 0; i < scene.objects.size(); ++i) {
          const auto images = ocs::oracle::canonical_gt_renders(scene.objects[i], views);
          write_views_dir(fs::path(s_views_out) / ("obj_" + std::to_string(i + 1)), views,
                          images, s_views, 40.0 * kPi / 180.0);
        }
      }
      std::cout << "wrote bundle to " << s_out << " (" << scene.objects.size()
                << " objects)\n";
    } else if (*assemble) {
      if (a_mode == "full-sim3")
        a_cfg.canonicalize = ocs::gs::CanonicalizeMode::FullSim3;
      else if (a_mode != "means-only")
        throw ocs::InputError("--canonicalize must be means-only or full-sim3");
      const auto maps = ocs::io::read_bundle(a_bundle);
      auto result = ocs::assemble(maps, a_cfg);
      const json cfg_json = {{"tau", a_cfg.tau},
                             {"crf_iters", a_cfg.crf.iterations},
                             {"pairwise_weight", a_cfg.crf.pairwise_weight},
                             {"window", a_cfg.crf.window_radius},
                             {"ransac_threshold", a_cfg.split.ransac.inlier_threshold},
                             {"min_inliers", a_cfg.split.ransac.min_inliers},
                             {"min_pixels", a_cfg.min_pixels},
                             {"seed", a_cfg.seed},
                             {"canonicalize", a_mode}};
      result.scene.provenance = provenance_block("assemble", cfg_json, a_cfg.seed);
      ocs::write_assembly(result, a_out);
      std::cout << "assembled " << result.instances.size() << " instances -> " << a_out
                << "\n";
    } else if (*render_cmd) {
      const auto set = ocs::io::import_gaussians_ply(r_ply);
      const int n = parse_views_arg(r_views);
      const auto views =
          ocs::render::canonical_views(n, r_resolution, r_radius, r_fov_deg * kPi / 180.0);
      ocs::render::RenderTarget target;
      target.camera = views.camera;
      target.background = parse_background(r_bg);
      std::error_code ec;
      fs::create_directories(r_out, ec);
      std::vector<ocs::render::Image> images;
      for (std::size_t i = 0; i < views.size(); ++i) {
        target.pose = views.poses[i];
        images.push_back(ocs::render::render(set, target));
        char name[32];
        std::snprintf(name, sizeof name, "view_%03zu.png", i);
        ocs::io::write_png(fs::path(r_out) / name, images.back());
      }
      if (r_npy)
        write_views_dir(fs::path(r_out) / "npy", views, images, n, r_fov_deg * kPi / 180.0);
      std::cout << "rendered " << views.size() << " views -> " << r_out << "\n";
    } else if (*fit) {
      const auto init = ocs::io::import_gaussians_ply(f_ply);
      ocs::render::CanonicalViewSet views;
      std::vector<ocs::render::Image> gt;
      read_views_dir(f_views_dir, &views, &gt);
      const auto result = ocs::render::css_fit(init, gt, views, f_cfg);
      ocs::io::export_gaussians_ply(result.fitted, f_out);
      std::cout << "fit: " << result.steps_run << " steps, psnr "
                << result.psnr_init << " -> " << result.psnr_final << " dB\n";
    } else if (*eval) {
      const fs::path gt_dir = e_gt.empty() ? e_bundle : e_gt;
      json report;
      if (e_task == "depth") {
        const auto maps = ocs::io::read_bundle(e_bundle);
        ocs::Tensor<float> gt_depth = maps.depth;
        if (fs::exists(gt_dir / "gt_depth.npy"))
          gt_depth = ocs::io::to_tensor_f32(
              ocs::io::read_npy_checked(gt_dir / "gt_depth.npy", ocs::io::NpyDtype::F32, 2));
        else if (gt_dir != fs::path(e_bundle))
          gt_depth = ocs::io::read_bundle(gt_dir).depth;
        ocs::Tensor<std::uint8_t> mask;
        if (e_fg_only) {
          if (maps.gt_mask.empty())
            throw ocs::InputError("evaluate: --foreground-only needs gt_mask.npy");
          mask = ocs::Tensor<std::uint8_t>(maps.gt_mask.shape());
          for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = maps.gt_mask[i] != 0;
        }
        const auto r = ocs::depth::eval_depth(maps.depth, gt_depth, mask);
        report["depth"] = {{"delta1", r.delta1},     {"delta2", r.delta2},
                           {"delta3", r.delta3},     {"abs_rel", r.abs_rel},
                           {"log10", r.log10},       {"rmse", r.rmse},
                           {"rmse_log", r.rmse_log}, {"silog", r.silog}};
        std::printf("%-10s %10s %10s %10s %10s %10s %10s %10s\n", "delta1", "delta2",
                    "delta3", "abs_rel", "log10", "rmse", "rmse_log", "silog");
        std::printf("%-10.4f %10.4f %10.4f %10.6f %10.6f %10.6f %10.6f %10.6f\n",
                    r.delta1, r.delta2, r.delta3, r.abs_rel, r.log10, r.rmse, r.rmse_log,
                    r.silog);
      } else if (e_task == "losses") {
        const auto maps = ocs::io::read_bundle(e_bundle);
        const auto gt_maps =
            gt_dir == fs::path(e_bundle) ? maps : ocs::io::read_bundle(gt_dir);
        ocs::Tensor<float> gt_depth = gt_maps.depth;
        if (fs::exists(gt_dir / "gt_depth.npy"))
          gt_depth = ocs::io::to_tensor_f32(
              ocs::io::read_npy_checked(gt_dir / "gt_depth.npy", ocs::io::NpyDtype::F32, 2));
        const auto cam = maps.camera();
        const auto gt_cam = gt_maps.camera();
        const double dl =
            ocs::depth::depth_loss(ocs::depth::to_canonical_inverse(maps.depth, cam),
                                   ocs::depth::to_canonical_inverse(gt_depth, gt_cam),
                                   e_lambda_grad);
        const double cam_l = ocs::objective::camera_fov_loss(
            maps.fov_w, maps.fov_h, gt_maps.fov_w, gt_maps.fov_h, e_huber);
        report["losses"] = {{"depth", dl}, {"cam", cam_l}};
        std::cout << report["losses"].dump(2) << "\n";
      } else if (e_task == "full") {
        if (e_scene.empty()) throw ocs::InputError("evaluate: task=full needs --scene");
        ocs::eval3d::SceneEvalConfig cfg;
        cfg.depth_foreground_only = e_fg_only;
        const auto rep = ocs::eval3d::evaluate_scene(e_bundle, e_scene, gt_dir, cfg);
        report = rep.to_json();
        std::cout << report.dump(2) << "\n";
      } else {
        throw ocs::InputError("evaluate: unknown task '" + e_task + "'");
      }
      if (!e_out.empty()) ocs::io::save_json(e_out, report);
    }
  } catch (const ocs::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
