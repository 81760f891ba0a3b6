#include "ocs/pipeline.hpp"

#include "ocs/core/rng.hpp"
#include "ocs/io/npy.hpp"
#include "ocs/io/ply.hpp"

namespace ocs {

AssembleResult assemble(const io::DenseMaps& maps, const AssembleConfig& cfg) {
  AssembleResult out;
  out.scene.camera = maps.camera();

  const sem::UnaryField unaries =
      sem::unaries_from_embeddings(maps.embeddings, maps.vocab, cfg.tau);
  out.unary_labels = sem::unary_argmax(unaries);
  const sem::CrfResult crf = sem::crf_mean_field(unaries, maps.embeddings, cfg.crf);
  out.labels = crf.labels;

  const auto candidates = sem::extract_instances(out.labels, cfg.min_pixels);

  const std::size_t h = maps.depth.dim(0), w = maps.depth.dim(1);
  out.mask = Tensor<std::uint16_t>({h, w});

  int next_id = 1;
  for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
    const auto& cand = candidates[ci];
    pose::SplitConfig split = cfg.split;
    split.ransac.seed = Rng(cfg.seed).stream("component", ci).next_u64();
    const auto parts =
        pose::split_instances(cand.pixels, maps.nocs, maps.depth, out.scene.camera, split);
    for (const auto& part : parts) {
      AssembledInstance inst;
      inst.record.id = next_id++;
      inst.record.label_id = cand.label;
      inst.record.label_name =
          cand.label >= 0 && cand.label < static_cast<int>(maps.vocab.size())
              ? maps.vocab.names[cand.label]
              : "unknown";
      inst.record.sim3 = part.pose;
      inst.record.pixel_count = part.pixels.size();
      inst.record.inlier_count = part.inlier_count;
      inst.pixels = part.pixels;

      const gs::GaussianSet camera_set =
          gs::materialize(maps.gauss_params.data(), maps.depth.data(),
                          static_cast<int>(w), static_cast<int>(h), maps.k, part.pixels,
                          out.scene.camera);
      inst.canonical = gs::to_canonical(camera_set, part.pose, cfg.canonicalize);

      for (const auto pix : part.pixels)
        out.mask[pix] = static_cast<std::uint16_t>(inst.record.id);
      out.scene.instances.push_back(inst.record);
      out.instances.push_back(std::move(inst));
    }
  }
  return out;
}

void write_assembly(const AssembleResult& result, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir / "objects", ec);
  io::write_scene(result.scene, dir / "scene.json");
  io::write_npy(dir / "mask.npy", result.mask);
  for (const auto& inst : result.instances)
    io::export_gaussians_ply(
        inst.canonical, dir / "objects" / ("obj_" + std::to_string(inst.record.id) + ".ply"));
}

}  // namespace ocs
