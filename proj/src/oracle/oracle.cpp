#include "ocs/oracle/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "ocs/core/error.hpp"
#include "ocs/core/rng.hpp"
#include "ocs/gs/gaussians.hpp"
#include "ocs/io/npy.hpp"

namespace ocs::oracle {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTauMin = 1e-9;

const char* kCategoryNames[12] = {"bottle", "bowl",  "can",   "cup",    "mug",  "plate",
                                  "book",   "ball",  "pot",   "teapot", "toy",  "basket"};

std::optional<double> ray_box(const Vec3& o, const Vec3& d) {
  double t0 = -1e300, t1 = 1e300;
  for (int ax = 0; ax < 3; ++ax) {
    const double oa = o[ax], da = d[ax];
    if (std::abs(da) < 1e-14) {
      if (oa < 0.0 || oa > 1.0) return std::nullopt;
      continue;
    }
    double lo = (0.0 - oa) / da, hi = (1.0 - oa) / da;
    if (lo > hi) std::swap(lo, hi);
    t0 = std::max(t0, lo);
    t1 = std::min(t1, hi);
    if (t0 > t1) return std::nullopt;
  }
  if (t1 < kTauMin) return std::nullopt;
  return t0 >= kTauMin ? t0 : t1;  // inside the box: exit point
}

std::optional<double> ray_sphere(const Vec3& o, const Vec3& d) {
  const Vec3 oc = o - Vec3{0.5, 0.5, 0.5};
  const double a = d.dot(d);
  const double b = 2.0 * oc.dot(d);
  const double c = oc.dot(oc) - 0.25;
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0) return std::nullopt;
  const double sq = std::sqrt(disc);
  const double r0 = (-b - sq) / (2.0 * a);
  const double r1 = (-b + sq) / (2.0 * a);
  if (r0 >= kTauMin) return r0;
  if (r1 >= kTauMin) return r1;
  return std::nullopt;
}

std::optional<double> ray_cylinder(const Vec3& o, const Vec3& d) {
  double best = 1e300;
  bool hit = false;
  // side surface: (x-.5)^2 + (y-.5)^2 = .25, z in [0, 1]
  const double ox = o.x - 0.5, oy = o.y - 0.5;
  const double a = d.x * d.x + d.y * d.y;
  if (a > 1e-14) {
    const double b = 2.0 * (ox * d.x + oy * d.y);
    const double c = ox * ox + oy * oy - 0.25;
    const double disc = b * b - 4.0 * a * c;
    if (disc >= 0) {
      const double sq = std::sqrt(disc);
      for (const double t : {(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)}) {
        if (t < kTauMin) continue;
        const double z = o.z + t * d.z;
        if (z >= 0.0 && z <= 1.0 && t < best) {
          best = t;
          hit = true;
        }
      }
    }
  }
  // caps at z = 0 and z = 1
  if (std::abs(d.z) > 1e-14) {
    for (const double zc : {0.0, 1.0}) {
      const double t = (zc - o.z) / d.z;
      if (t < kTauMin || t >= best) continue;
      const double x = o.x + t * d.x - 0.5, y = o.y + t * d.y - 0.5;
      if (x * x + y * y <= 0.25) {
        best = t;
        hit = true;
      }
    }
  }
  if (!hit) return std::nullopt;
  return best;
}

double surface_area(Shape s) {
  switch (s) {
    case Shape::Box: return 6.0;
    case Shape::Sphere: return kPi;            // 4 pi r^2, r = 1/2
    case Shape::Cylinder: return 1.5 * kPi;    // side pi + two pi/4 caps
  }
  return 6.0;
}

// Low-discrepancy (R2 additive recurrence) surface point for amodal Gaussian
// supervision: consecutive indices tile each primitive's surface evenly.
Vec3 stratified_surface_point(Shape shape, std::uint64_t index) {
  const std::uint64_t region = index % 6;
  const double j = static_cast<double>(index / 6);
  auto frac = [](double x) { return x - std::floor(x); };
  const double u1 = frac(0.5 + j * 0.7548776662466927);
  const double u2 = frac(0.5 + j * 0.5698402909980532);
  switch (shape) {
    case Shape::Box: {
      const int axis = static_cast<int>(region) / 2;
      Vec3 p;
      p[axis] = (region % 2 == 0) ? 0.0 : 1.0;
      p[(axis + 1) % 3] = u1;
      p[(axis + 2) % 3] = u2;
      return p;
    }
    case Shape::Sphere: {
      const double z = 1.0 - 2.0 * frac(0.5 + static_cast<double>(index) * 0.7548776662466927);
      const double th =
          2.0 * kPi * frac(0.5 + static_cast<double>(index) * 0.5698402909980532);
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      return Vec3{0.5, 0.5, 0.5} + Vec3{r * std::cos(th), r * std::sin(th), z} * 0.5;
    }
    case Shape::Cylinder: {
      // recur on the full index: the four side regions must not repeat points
      const double w1 = frac(0.5 + static_cast<double>(index) * 0.7548776662466927);
      const double w2 = frac(0.5 + static_cast<double>(index) * 0.5698402909980532);
      if (region < 4) {  // side: 2/3 of the area
        const double th = 2.0 * kPi * w1;
        return {0.5 + 0.5 * std::cos(th), 0.5 + 0.5 * std::sin(th), w2};
      }
      const double r = 0.5 * std::sqrt(w1);
      const double th = 2.0 * kPi * w2;
      return {0.5 + r * std::cos(th), 0.5 + r * std::sin(th), region == 4 ? 0.0 : 1.0};
    }
  }
  return {0.5, 0.5, 0.5};
}

Vec3 random_unit(Rng& rng, int) {
  // 3D unit vector (shape sampling only)
  for (;;) {
    const Vec3 v{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const double n = v.squared_norm();
    if (n > 1e-8 && n <= 1.0) return v / std::sqrt(n);
  }
}

std::vector<float> random_unit_embedding(Rng& rng, int dim) {
  std::vector<float> e(dim);
  double sq = 0.0;
  for (int i = 0; i < dim; ++i) {
    const double v = rng.normal();
    e[i] = static_cast<float>(v);
    sq += v * v;
  }
  const double inv = 1.0 / std::sqrt(sq);
  for (auto& v : e) v = static_cast<float>(v * inv);
  return e;
}

}  // namespace

std::string shape_name(Shape s) {
  switch (s) {
    case Shape::Box: return "box";
    case Shape::Sphere: return "sphere";
    case Shape::Cylinder: return "cylinder";
  }
  return "box";
}

Shape shape_from_name(const std::string& name) {
  if (name == "box") return Shape::Box;
  if (name == "sphere") return Shape::Sphere;
  if (name == "cylinder") return Shape::Cylinder;
  throw InputError("unknown shape '" + name + "'");
}

Vec3 Texture::sample(const Vec3& p) const {
  if (kind == Kind::Solid) return color_a;
  const int ix = std::min(cells - 1, std::max(0, static_cast<int>(std::floor(p.x * cells))));
  const int iy = std::min(cells - 1, std::max(0, static_cast<int>(std::floor(p.y * cells))));
  const int iz = std::min(cells - 1, std::max(0, static_cast<int>(std::floor(p.z * cells))));
  return ((ix + iy + iz) % 2 == 0) ? color_a : color_b;
}

std::optional<double> intersect_canonical(Shape shape, const Vec3& origin, const Vec3& dir) {
  switch (shape) {
    case Shape::Box: return ray_box(origin, dir);
    case Shape::Sphere: return ray_sphere(origin, dir);
    case Shape::Cylinder: return ray_cylinder(origin, dir);
  }
  return std::nullopt;
}

SceneOracle generate_scene(const SceneConfig& cfg) {
  if (cfg.object_count < 0) throw DomainError("generate_scene: negative object count");
  SceneOracle scene;
  scene.seed = cfg.seed;
  scene.noise = cfg.noise;
  scene.camera = intrinsics_from_fov(cfg.fov, cfg.fov, cfg.resolution, cfg.resolution);

  const Rng root(cfg.seed);

  // Vocabulary: "other" background + 12 everyday categories, random unit
  // embeddings standing in for text embeddings.
  Rng vrng = root.stream("vocab");
  scene.vocab.background_index = 0;
  scene.vocab.names.push_back("other");
  for (const char* n : kCategoryNames) scene.vocab.names.push_back(n);
  const std::size_t c = scene.vocab.names.size();
  scene.vocab.embeddings = Tensor<float>({c, static_cast<std::size_t>(cfg.embed_dim)});
  for (std::size_t i = 0; i < c; ++i) {
    const auto e = random_unit_embedding(vrng, cfg.embed_dim);
    std::copy(e.begin(), e.end(), scene.vocab.embeddings.data() + i * cfg.embed_dim);
  }

  // +y is down; objects rest on the plane y = ground_y below the camera.
  const Mat3 up_align = Mat3::from_rows({1, 0, 0}, {0, 0, -1}, {0, 1, 0});
  const double half_tan = std::tan(cfg.fov / 2.0);

  // Apparent-size windows (pixels) and the maximum allowed overlap of
  // projected bounding boxes. Small or heavily occluded objects would leave
  // too few pixels for pose RANSAC and for the amodal Gaussian surface
  // coverage; the floor scales with each shape's canonical surface area.
  const double res_scale = cfg.resolution / 128.0;
  const double max_extent_px = 60.0 * res_scale;
  const double max_bbox_overlap = 0.15;
  auto min_extent_px = [&](Shape sh) {
    switch (sh) {
      case Shape::Box: return 32.0 * res_scale;
      case Shape::Cylinder: return 24.0 * res_scale;
      case Shape::Sphere: return 20.0 * res_scale;
    }
    return 32.0 * res_scale;
  };

  // Camera pitched down toward the tabletop; object poses are expressed in
  // the camera frame, so the pitch is composed onto every world-frame pose.
  const Mat3 pitch = Quat::from_axis_angle({1, 0, 0}, scene.camera_pitch).to_matrix();
  const Quat pitch_q = Quat::from_matrix(pitch);

  // One jittered ground cell per object: blind rejection sampling cannot pack
  // five sized objects into the visible tabletop, a shuffled grid can. Far
  // cells take spheres and cylinders only; a far box would need an oversized
  // world footprint to meet its pixel floor. When a layout dead-ends the whole
  // placement reseeds, so per-seed success is essentially certain.
  struct Cell {
    double x0, x1, z0, z1;
    bool far;
  };
  const std::vector<Cell> grid = {{-0.38, -0.08, 0.78, 0.98, false},
                                  {0.08, 0.38, 0.78, 0.98, false},
                                  {-0.92, -0.55, 1.50, 1.95, true},
                                  {-0.18, 0.18, 1.50, 1.95, true},
                                  {0.55, 0.92, 1.50, 1.95, true}};

  for (int layout = 0; layout < 32; ++layout) {
  scene.objects.clear();
  bool layout_ok = true;
  std::vector<std::array<double, 4>> layout_boxes;
  Rng prng = root.stream("placement", static_cast<std::uint64_t>(layout));
  std::vector<std::size_t> cell_order(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) cell_order[i] = i;
  for (std::size_t i = grid.size(); i > 1; --i)
    std::swap(cell_order[i - 1], cell_order[prng.uniform_index(i)]);

  std::vector<Vec3> world_centers;
  std::vector<double> world_scales;
  for (int i = 0; i < cfg.object_count; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < 1500 && !placed; ++attempt) {
      PrimitiveObject obj;
      const bool far_cell = i < static_cast<int>(grid.size()) && grid[cell_order[i]].far;
      const int shape_pick = far_cell ? 1 + static_cast<int>(prng.uniform_index(2))
                                      : static_cast<int>(prng.uniform_index(3));
      obj.shape = static_cast<Shape>(shape_pick);
      obj.label_id = 1 + static_cast<int>(prng.uniform_index(12));
      obj.label_name = scene.vocab.names[obj.label_id];

      double cx, cz;
      if (i < static_cast<int>(grid.size())) {
        const Cell& cell = grid[cell_order[i]];
        cx = prng.uniform(cell.x0, cell.x1);
        cz = prng.uniform(cell.z0, cell.z1);
      } else {  // beyond the grid: plain rejection sampling
        cz = prng.uniform(0.8, 2.2);
        const double lateral = 0.75 * cz * half_tan;
        cx = prng.uniform(-lateral, lateral);
      }
      // Scale from a target apparent size at this depth, so far cells hold
      // proportionally larger objects.
      const double target_extent =
          prng.uniform(min_extent_px(obj.shape) + 3.0, max_extent_px - 4.0);
      const double s =
          std::clamp(target_extent * cz / (scene.camera.f_w * 1.30), 0.16, 0.55);
      const double yaw = prng.uniform(0.0, 2.0 * kPi);

      const Mat3 rot_world = up_align * Quat::from_axis_angle({0, 0, 1}, yaw).to_matrix();
      const Mat3 rot = pitch * rot_world;
      obj.pose.scale = s;
      obj.pose.rotation = (pitch_q * Quat::from_matrix(rot_world)).normalized().canonical();
      const Vec3 center_world{cx, scene.ground_y - 0.5 * s, cz};
      obj.pose.translation = pitch * center_world - rot * Vec3{0.5, 0.5, 0.5} * s;

      obj.texture.kind = Texture::Kind::Checker;
      obj.texture.cells = 4;
      obj.texture.color_a = {prng.uniform(0.55, 0.95), prng.uniform(0.55, 0.95),
                             prng.uniform(0.55, 0.95)};
      obj.texture.color_b = {prng.uniform(0.05, 0.45), prng.uniform(0.05, 0.45),
                             prng.uniform(0.05, 0.45)};

      // Ground-footprint separation (world XZ): objects share the plane, so
      // disjoint footprint circles keep the solids apart.
      bool ok = true;
      for (std::size_t j = 0; j < world_centers.size(); ++j) {
        const double dx = center_world.x - world_centers[j].x;
        const double dz = center_world.z - world_centers[j].z;
        const double r_sum = (s + world_scales[j]) * (std::sqrt(2.0) / 2.0) * 1.02;
        if (dx * dx + dz * dz < r_sum * r_sum) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;

      // All corners inside the image with a small margin, apparent size in the
      // target window, projected bbox overlap bounded.
      double u0 = 1e300, v0 = 1e300, u1 = -1e300, v1 = -1e300;
      for (int corner = 0; corner < 8 && ok; ++corner) {
        const Vec3 p{static_cast<double>(corner & 1), static_cast<double>((corner >> 1) & 1),
                     static_cast<double>((corner >> 2) & 1)};
        const Vec3 pc = obj.pose.apply(p);
        if (!(pc.z > 0.3)) {
          ok = false;
          break;
        }
        const auto [u, v] = project(pc, scene.camera);
        if (u < 2 || v < 2 || u > scene.camera.width - 3 || v > scene.camera.height - 3)
          ok = false;
        u0 = std::min(u0, u);
        v0 = std::min(v0, v);
        u1 = std::max(u1, u);
        v1 = std::max(v1, v);
      }
      if (!ok) continue;
      const double extent = std::max(u1 - u0, v1 - v0);
      if (extent < min_extent_px(obj.shape) || extent > max_extent_px) continue;
      for (const auto& b : layout_boxes) {
        const double iw = std::min(u1, b[2]) - std::max(u0, b[0]);
        const double ih = std::min(v1, b[3]) - std::max(v0, b[1]);
        if (iw <= 0 || ih <= 0) continue;
        const double inter = iw * ih;
        const double smaller = std::min((u1 - u0) * (v1 - v0), (b[2] - b[0]) * (b[3] - b[1]));
        if (inter > max_bbox_overlap * smaller) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;

      layout_boxes.push_back({u0, v0, u1, v1});
      world_centers.push_back(center_world);
      world_scales.push_back(s);
      scene.objects.push_back(std::move(obj));
      placed = true;
    }
    if (!placed) {
      layout_ok = false;
      break;
    }
  }
  if (layout_ok) return scene;
  }
  throw Error("generate_scene: could not place " + std::to_string(cfg.object_count) +
              " objects after bounded layout retries");
}

io::DenseMaps raycast_maps(const SceneOracle& scene) {
  const int w = scene.camera.width, h = scene.camera.height;
  const std::size_t n = static_cast<std::size_t>(w) * h;
  const int dim = static_cast<int>(scene.vocab.embeddings.dim(1));
  const Rng root(scene.seed);

  io::DenseMaps m;
  const auto [fw_fov, fh_fov] = fov_from_intrinsics(scene.camera);
  m.fov_w = fw_fov;
  m.fov_h = fh_fov;
  m.k = 2;
  m.vocab = scene.vocab;
  m.depth = Tensor<float>({static_cast<std::size_t>(h), static_cast<std::size_t>(w)});
  m.embeddings = Tensor<float>(
      {static_cast<std::size_t>(h), static_cast<std::size_t>(w), static_cast<std::size_t>(dim)});
  m.nocs = Tensor<float>({static_cast<std::size_t>(h), static_cast<std::size_t>(w), 3});
  m.gauss_params = Tensor<float>(
      {static_cast<std::size_t>(h), static_cast<std::size_t>(w), 2, 14});
  m.gt_mask =
      Tensor<std::uint16_t>({static_cast<std::size_t>(h), static_cast<std::size_t>(w)});

  // Canonical-frame ray origin/direction per object are affine in the camera
  // ray, so precompute the object-inverse transforms.
  struct InvPose {
    Sim3 inv;
    Vec3 origin_can;  // inv(0)
  };
  std::vector<InvPose> inv_poses;
  for (const auto& obj : scene.objects) {
    InvPose ip;
    ip.inv = obj.pose.inverse();
    ip.origin_can = ip.inv.apply({0, 0, 0});
    inv_poses.push_back(ip);
  }

  const NoiseConfig& noise = scene.noise;

  // First pass: analytic first hits, so amodal sample indices can be assigned
  // by each pixel's rank within its object.
  std::vector<std::int32_t> hit_of(n, -1);
  std::vector<double> tau_of(n, 0.0);
  std::vector<Vec3> can_of(n);
  std::vector<std::uint32_t> rank_of(n, 0);
  std::vector<std::uint32_t> object_pixels(scene.objects.size(), 0);
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u) {
      const std::size_t pix = static_cast<std::size_t>(v) * w + u;
      const Vec3 dir{(u - scene.camera.c_x) / scene.camera.f_w,
                     (v - scene.camera.c_y) / scene.camera.f_h, 1.0};
      int hit_obj = -1;
      double best_tau = 1e300;
      Vec3 hit_can;
      for (std::size_t oi = 0; oi < scene.objects.size(); ++oi) {
        const Vec3 o_can = inv_poses[oi].origin_can;
        const Vec3 d_can = inv_poses[oi].inv.rotation.rotate(dir) * inv_poses[oi].inv.scale;
        const auto tau = intersect_canonical(scene.objects[oi].shape, o_can, d_can);
        if (tau && *tau < best_tau) {
          best_tau = *tau;
          hit_obj = static_cast<int>(oi);
          hit_can = o_can + d_can * *tau;
        }
      }
      if (hit_obj >= 0) {  // objects rest on the plane: always in front of it
        hit_of[pix] = hit_obj;
        tau_of[pix] = best_tau;
        can_of[pix] = hit_can;
        rank_of[pix] = object_pixels[hit_obj]++;
      }
    }

  // Ground plane y_world = ground_y seen through the pitched camera.
  const Vec3 ground_normal =
      Quat::from_axis_angle({1, 0, 0}, scene.camera_pitch).rotate({0, 1, 0});

  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u) {
      const std::size_t pix = static_cast<std::size_t>(v) * w + u;
      const Vec3 dir{(u - scene.camera.c_x) / scene.camera.f_w,
                     (v - scene.camera.c_y) / scene.camera.f_h, 1.0};
      const int hit_obj = hit_of[pix];

      double depth;
      int label_row;
      Vec3 nocs_val{0, 0, 0};
      Vec3 albedo{0.55, 0.52, 0.48};
      const double ndir = ground_normal.dot(dir);
      if (hit_obj >= 0) {
        depth = tau_of[pix];  // dir.z == 1, so tau is the z-depth
        label_row = scene.objects[hit_obj].label_id;
        nocs_val = {std::clamp(can_of[pix].x, 0.0, 1.0), std::clamp(can_of[pix].y, 0.0, 1.0),
                    std::clamp(can_of[pix].z, 0.0, 1.0)};
        albedo = scene.objects[hit_obj].texture.sample(nocs_val);
        m.gt_mask[pix] = static_cast<std::uint16_t>(hit_obj + 1);
      } else if (ndir > 1e-9) {
        depth = scene.ground_y / ndir;  // ground, z-depth = tau * dir.z
        label_row = scene.vocab.background_index;
        m.gt_mask[pix] = 0;
      } else {
        depth = 10.0;  // sky
        label_row = scene.vocab.background_index;
        albedo = {0.7, 0.8, 0.9};
        m.gt_mask[pix] = 0;
      }

      Rng prng = root.stream("pixel-noise", pix);
      if (noise.depth_sigma > 0.0)
        depth = std::max(0.05, depth * (1.0 + noise.depth_sigma * prng.normal()));
      m.depth[pix] = static_cast<float>(depth);

      if (noise.nocs_sigma > 0.0 && m.gt_mask[pix] != 0) {
        nocs_val.x = std::clamp(nocs_val.x + noise.nocs_sigma * prng.normal(), 0.0, 1.0);
        nocs_val.y = std::clamp(nocs_val.y + noise.nocs_sigma * prng.normal(), 0.0, 1.0);
        nocs_val.z = std::clamp(nocs_val.z + noise.nocs_sigma * prng.normal(), 0.0, 1.0);
      }
      m.nocs[pix * 3 + 0] = static_cast<float>(nocs_val.x);
      m.nocs[pix * 3 + 1] = static_cast<float>(nocs_val.y);
      m.nocs[pix * 3 + 2] = static_cast<float>(nocs_val.z);

      // Embedding: class vector, optionally rotated or label-flipped.
      std::vector<double> e(dim);
      {
        const float* src = scene.vocab.embeddings.data() + label_row * dim;
        for (int t = 0; t < dim; ++t) e[t] = src[t];
        if (noise.label_flip_rate > 0.0 && prng.uniform() < noise.label_flip_rate) {
          std::size_t other = prng.uniform_index(scene.vocab.size() - 1);
          if (static_cast<int>(other) >= label_row) ++other;
          const float* wrong = scene.vocab.embeddings.data() + other * dim;
          for (int t = 0; t < dim; ++t)
            e[t] = (1.0 - noise.flip_mix) * e[t] + noise.flip_mix * wrong[t];
        }
        if (noise.embed_rot_deg > 0.0) {
          const double ang = noise.embed_rot_deg * kPi / 180.0;
          std::vector<double> uvec(dim);
          double dotp = 0.0, sq = 0.0;
          for (int t = 0; t < dim; ++t) {
            uvec[t] = prng.normal();
            dotp += uvec[t] * e[t];
          }
          double enorm = 0.0;
          for (int t = 0; t < dim; ++t) enorm += e[t] * e[t];
          for (int t = 0; t < dim; ++t) {
            uvec[t] -= dotp * e[t] / enorm;
            sq += uvec[t] * uvec[t];
          }
          if (sq > 1e-12) {
            const double inv = 1.0 / std::sqrt(sq);
            const double en = std::sqrt(enorm);
            for (int t = 0; t < dim; ++t)
              e[t] = std::cos(ang) * e[t] + std::sin(ang) * en * uvec[t] * inv;
          }
        }
        double sq2 = 0.0;
        for (int t = 0; t < dim; ++t) sq2 += e[t] * e[t];
        const double inv = 1.0 / std::sqrt(sq2);
        for (int t = 0; t < dim; ++t)
          m.embeddings[pix * dim + t] = static_cast<float>(e[t] * inv);
      }

      // Amodal surface Gaussians: each foreground pixel's k = 2 off-ray
      // offsets point at stratified samples of the whole canonical surface,
      // so the per-object Gaussian cloud covers occluded regions too. Shape
      // parameters live in the canonical frame.
      float* gp = m.gauss_params.data() + pix * 2 * 14;
      if (hit_obj >= 0) {
        const auto& obj = scene.objects[hit_obj];
        const Vec3 anchor = dir * tau_of[pix];  // clean hit point in camera frame
        const double area = surface_area(obj.shape);
        const double n_samples = 2.0 * std::max<std::uint32_t>(object_pixels[hit_obj], 1);
        const double sigma_can = 0.5 * std::sqrt(area / n_samples);
        for (int g = 0; g < 2; ++g) {
          float* row = gp + g * 14;
          const Vec3 sample =
              stratified_surface_point(obj.shape, 2ull * rank_of[pix] + g);
          const Vec3 delta = obj.pose.apply(sample) - anchor;
          const Vec3 color = obj.texture.sample(sample);
          row[0] = static_cast<float>(delta.x);
          row[1] = static_cast<float>(delta.y);
          row[2] = static_cast<float>(delta.z);
          row[3] = row[4] = row[5] = static_cast<float>(std::log(sigma_can));
          row[6] = 1.0f;
          row[7] = row[8] = row[9] = 0.0f;
          row[10] = 3.0f;
          row[11] = static_cast<float>(color.x);
          row[12] = static_cast<float>(color.y);
          row[13] = static_cast<float>(color.z);
        }
      } else {
        const double sigma_world = 0.7 * depth / scene.camera.f_w;
        for (int g = 0; g < 2; ++g) {
          float* row = gp + g * 14;
          row[0] = row[1] = row[2] = 0.0f;
          row[3] = row[4] = row[5] = static_cast<float>(std::log(std::max(1e-5, sigma_world)));
          row[6] = 1.0f;
          row[7] = row[8] = row[9] = 0.0f;
          row[10] = -8.0f;
          row[11] = static_cast<float>(albedo.x);
          row[12] = static_cast<float>(albedo.y);
          row[13] = static_cast<float>(albedo.z);
        }
      }
    }
  return m;
}

render::Image raycast_primitive_image(const PrimitiveObject& obj,
                                      const render::CameraPose& pose,
                                      const CameraIntrinsics& cam, const Vec3& background,
                                      Tensor<std::uint8_t>* hit_mask) {
  const std::size_t h = static_cast<std::size_t>(cam.height);
  const std::size_t w = static_cast<std::size_t>(cam.width);
  render::Image img({h, w, 3});
  if (hit_mask) *hit_mask = Tensor<std::uint8_t>({h, w});
  const Mat3 rt = pose.rotation.transposed();
  const Vec3 origin = rt * (-pose.translation);
  for (std::size_t v = 0; v < h; ++v)
    for (std::size_t u = 0; u < w; ++u) {
      const Vec3 dir_cam{(u - cam.c_x) / cam.f_w, (v - cam.c_y) / cam.f_h, 1.0};
      const Vec3 dir = rt * dir_cam;
      const auto tau = intersect_canonical(obj.shape, origin, dir);
      Vec3 color = background;
      if (tau) {
        const Vec3 p = origin + dir * *tau;
        color = obj.texture.sample(p);
        if (hit_mask) hit_mask->at(v, u) = 1;
      }
      img.at(v, u, 0) = color.x;
      img.at(v, u, 1) = color.y;
      img.at(v, u, 2) = color.z;
    }
  return img;
}

std::vector<render::Image> canonical_gt_renders(const PrimitiveObject& obj,
                                                const render::CanonicalViewSet& views) {
  std::vector<render::Image> out;
  out.reserve(views.size());
  for (const auto& pose : views.poses)
    out.push_back(raycast_primitive_image(obj, pose, views.camera, {1, 1, 1}, nullptr));
  return out;
}

std::vector<Vec3> sample_surface_points(const PrimitiveObject& obj, int n,
                                        std::uint64_t seed) {
  if (n <= 0) throw DomainError("sample_surface_points: n must be positive");
  Rng rng = Rng(seed).stream("surface");
  std::vector<Vec3> pts;
  pts.reserve(n);
  for (int i = 0; i < n; ++i) {
    switch (obj.shape) {
      case Shape::Box: {
        const int face = static_cast<int>(rng.uniform_index(6));
        const double a = rng.uniform(), b = rng.uniform();
        const int axis = face / 2;
        const double fixed = (face % 2 == 0) ? 0.0 : 1.0;
        Vec3 p;
        p[axis] = fixed;
        p[(axis + 1) % 3] = a;
        p[(axis + 2) % 3] = b;
        pts.push_back(p);
        break;
      }
      case Shape::Sphere: {
        const Vec3 d = random_unit(rng, 3);
        pts.push_back(Vec3{0.5, 0.5, 0.5} + d * 0.5);
        break;
      }
      case Shape::Cylinder: {
        // side area = pi, each cap = pi/4 -> probabilities 2/3, 1/6, 1/6
        const double pick = rng.uniform();
        if (pick < 2.0 / 3.0) {
          const double th = rng.uniform(0.0, 2.0 * kPi);
          pts.push_back({0.5 + 0.5 * std::cos(th), 0.5 + 0.5 * std::sin(th), rng.uniform()});
        } else {
          const double z = pick < 5.0 / 6.0 ? 0.0 : 1.0;
          const double r = 0.5 * std::sqrt(rng.uniform());
          const double th = rng.uniform(0.0, 2.0 * kPi);
          pts.push_back({0.5 + r * std::cos(th), 0.5 + r * std::sin(th), z});
        }
        break;
      }
    }
  }
  return pts;
}

void write_gt_poses(const SceneOracle& scene, const std::filesystem::path& path) {
  io::json j;
  j["camera"] = io::camera_to_json(scene.camera);
  io::json arr = io::json::array();
  for (std::size_t i = 0; i < scene.objects.size(); ++i) {
    const auto& o = scene.objects[i];
    arr.push_back(io::json{
        {"id", i + 1},
        {"label_id", o.label_id},
        {"label_name", o.label_name},
        {"shape", shape_name(o.shape)},
        {"sim3", io::sim3_to_json(o.pose)},
        {"texture",
         {{"kind", o.texture.kind == Texture::Kind::Checker ? "checker" : "solid"},
          {"color_a", {o.texture.color_a.x, o.texture.color_a.y, o.texture.color_a.z}},
          {"color_b", {o.texture.color_b.x, o.texture.color_b.y, o.texture.color_b.z}},
          {"cells", o.texture.cells}}}});
  }
  j["instances"] = arr;
  io::save_json(path, j);
}

void write_scene_bundle(const SceneOracle& scene, const std::filesystem::path& dir,
                        const io::json& provenance) {
  io::DenseMaps maps = raycast_maps(scene);
  maps.provenance = provenance;
  io::write_bundle(maps, dir);
  write_gt_poses(scene, dir / "gt_poses.json");

  const NoiseConfig& nz = scene.noise;
  const bool noisy = nz.depth_sigma > 0 || nz.nocs_sigma > 0 || nz.embed_rot_deg > 0 ||
                     nz.label_flip_rate > 0;
  if (noisy) {
    SceneOracle clean = scene;
    clean.noise = NoiseConfig{};
    const io::DenseMaps ref = raycast_maps(clean);
    io::write_npy(dir / "gt_depth.npy", ref.depth);
    io::write_npy(dir / "gt_nocs.npy", ref.nocs);
  }
}

GtScene read_gt_poses(const std::filesystem::path& path) {
  const io::json j = io::load_json(path);
  GtScene out;
  out.camera = io::camera_from_json(j.at("camera"));
  for (const auto& e : j.at("instances")) {
    PrimitiveObject o;
    o.label_id = e.at("label_id").get<int>();
    o.label_name = e.at("label_name").get<std::string>();
    o.shape = shape_from_name(e.at("shape").get<std::string>());
    o.pose = io::sim3_from_json(e.at("sim3"));
    const auto& t = e.at("texture");
    o.texture.kind = t.at("kind").get<std::string>() == "checker" ? Texture::Kind::Checker
                                                                  : Texture::Kind::Solid;
    const auto& ca = t.at("color_a");
    const auto& cb = t.at("color_b");
    o.texture.color_a = {ca.at(0).get<double>(), ca.at(1).get<double>(),
                         ca.at(2).get<double>()};
    o.texture.color_b = {cb.at(0).get<double>(), cb.at(1).get<double>(),
                         cb.at(2).get<double>()};
    o.texture.cells = t.at("cells").get<int>();
    out.objects.push_back(std::move(o));
  }
  return out;
}

}  // namespace ocs::oracle
