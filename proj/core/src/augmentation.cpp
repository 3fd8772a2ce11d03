#include "postcn/augmentation.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace postcn::aug {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed,
                         const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find_if(allowed.begin(), allowed.end(),
                     [&](const char* k) { return it.key() == k; }) == allowed.end()) {
      throw std::runtime_error("unknown key \"" + it.key() + "\" in " + where);
    }
  }
}

void zero_channel(heatmap::HeatmapStack& stack, int k) {
  double* ch = stack.channel(k);
  std::fill(ch, ch + static_cast<size_t>(stack.height) * stack.width, 0.0);
}

void zero_frame(heatmap::HeatmapStack& stack) {
  std::fill(stack.data.begin(), stack.data.end(), 0.0);
}

bool channel_is_zero(const heatmap::HeatmapStack& stack, int k) {
  const double* ch = stack.channel(k);
  const size_t n = static_cast<size_t>(stack.height) * stack.width;
  return std::all_of(ch, ch + n, [](double v) { return v == 0.0; });
}

}  // namespace

AugmentationConfig AugmentationConfig::from_json_text(const std::string& text) {
  const json j = json::parse(text);
  reject_unknown_keys(j,
                      {"frame_occlusion_rate", "point_occlusion_rate", "area_occluder",
                       "noise_amplitude", "shift_max", "shift_probability", "swap_probability",
                       "tail_occlusion_frames", "seed"},
                      "augmentation config");
  AugmentationConfig c;
  c.frame_occlusion_rate = j.value("frame_occlusion_rate", c.frame_occlusion_rate);
  c.point_occlusion_rate = j.value("point_occlusion_rate", c.point_occlusion_rate);
  if (j.contains("area_occluder")) {
    const json& a = j.at("area_occluder");
    reject_unknown_keys(a, {"count", "min_width", "max_width", "min_height", "max_height"},
                        "area_occluder");
    c.area_occluder.count = a.value("count", c.area_occluder.count);
    c.area_occluder.min_width = a.value("min_width", c.area_occluder.min_width);
    c.area_occluder.max_width = a.value("max_width", c.area_occluder.max_width);
    c.area_occluder.min_height = a.value("min_height", c.area_occluder.min_height);
    c.area_occluder.max_height = a.value("max_height", c.area_occluder.max_height);
  }
  c.noise_amplitude = j.value("noise_amplitude", c.noise_amplitude);
  c.shift_max = j.value("shift_max", c.shift_max);
  c.shift_probability = j.value("shift_probability", c.shift_probability);
  c.swap_probability = j.value("swap_probability", c.swap_probability);
  c.tail_occlusion_frames = j.value("tail_occlusion_frames", c.tail_occlusion_frames);
  c.seed = j.value("seed", c.seed);

  for (double p : {c.frame_occlusion_rate, c.point_occlusion_rate, c.shift_probability,
                   c.swap_probability}) {
    if (p < 0.0 || p > 1.0) throw std::runtime_error("augmentation probability outside [0,1]");
  }
  if (c.noise_amplitude < 0.0) throw std::runtime_error("noise_amplitude must be nonnegative");
  if (c.shift_max < 0) throw std::runtime_error("shift_max must be nonnegative");
  if (c.tail_occlusion_frames < 0) throw std::runtime_error("tail_occlusion_frames must be nonnegative");
  return c;
}

std::string AugmentationConfig::to_json_text() const {
  json j;
  j["frame_occlusion_rate"] = frame_occlusion_rate;
  j["point_occlusion_rate"] = point_occlusion_rate;
  j["area_occluder"] = {{"count", area_occluder.count},
                        {"min_width", area_occluder.min_width},
                        {"max_width", area_occluder.max_width},
                        {"min_height", area_occluder.min_height},
                        {"max_height", area_occluder.max_height}};
  j["noise_amplitude"] = noise_amplitude;
  j["shift_max"] = shift_max;
  j["shift_probability"] = shift_probability;
  j["swap_probability"] = swap_probability;
  j["tail_occlusion_frames"] = tail_occlusion_frames;
  j["seed"] = seed;
  return j.dump();
}

std::string MaskRecord::to_json_text() const {
  json j;
  j["masked_frames"] = masked_frames;
  j["masked_points"] = json::array();
  for (const auto& [f, k] : masked_points) j["masked_points"].push_back({f, k});
  j["occluders"] = json::array();
  for (const auto& r : occluders) {
    j["occluders"].push_back({{"x", r.x}, {"y", r.y}, {"width", r.width}, {"height", r.height}});
  }
  j["area_masked_points"] = json::array();
  for (const auto& [f, k] : area_masked_points) j["area_masked_points"].push_back({f, k});
  j["shifted_points"] = json::array();
  for (const auto& [f, k] : shifted_points) j["shifted_points"].push_back({f, k});
  j["swapped_pairs"] = json::array();
  for (const auto& [f, p] : swapped_pairs) j["swapped_pairs"].push_back({f, p});
  j["noise_amplitude"] = noise_amplitude;
  return j.dump();
}

void occlude_frames(heatmap::HeatmapSequence& seq, double rate, Rng& rng, MaskRecord& record) {
  for (size_t t = 0; t < seq.size(); ++t) {
    if (rng.bernoulli(rate)) {
      zero_frame(seq[t]);
      record.masked_frames.push_back(static_cast<int>(t));
    }
  }
}

void occlude_frame_tail(heatmap::HeatmapSequence& seq, int count, MaskRecord& record) {
  const int n = static_cast<int>(seq.size());
  for (int t = std::max(0, n - count); t < n; ++t) {
    zero_frame(seq[static_cast<size_t>(t)]);
    record.masked_frames.push_back(t);
  }
}

void occlude_keypoints(heatmap::HeatmapSequence& seq, double rate, Rng& rng, MaskRecord& record) {
  for (size_t t = 0; t < seq.size(); ++t) {
    for (int k = 0; k < seq[t].channels; ++k) {
      if (rng.bernoulli(rate)) {
        zero_channel(seq[t], k);
        record.masked_points.emplace_back(static_cast<int>(t), k);
      }
    }
  }
}

void occlude_area(heatmap::HeatmapSequence& seq, const AreaOccluderSpec& spec, Rng& rng,
                  MaskRecord& record) {
  if (seq.empty() || spec.count <= 0) return;
  const int height = seq.front().height;
  const int width = seq.front().width;

  std::vector<MaskRecord::Rect> rects;
  for (int i = 0; i < spec.count; ++i) {
    MaskRecord::Rect r;
    r.width = spec.min_width +
              static_cast<int>(rng.uniform_int(spec.max_width - spec.min_width + 1));
    r.height = spec.min_height +
               static_cast<int>(rng.uniform_int(spec.max_height - spec.min_height + 1));
    r.width = std::clamp(r.width, 0, width);
    r.height = std::clamp(r.height, 0, height);
    r.x = static_cast<int>(rng.uniform_int(width - r.width + 1));
    r.y = static_cast<int>(rng.uniform_int(height - r.height + 1));
    rects.push_back(r);
    record.occluders.push_back(r);
  }

  for (size_t t = 0; t < seq.size(); ++t) {
    const auto peaks = heatmap::extract_peaks(seq[t]);
    for (int k = 0; k < seq[t].channels; ++k) {
      if (!peaks.pose.visible(k)) continue;
      const double u = peaks.pose.coords(k, 0);
      const double v = peaks.pose.coords(k, 1);
      const bool inside = std::any_of(rects.begin(), rects.end(), [&](const MaskRecord::Rect& r) {
        return u >= r.x && u < r.x + r.width && v >= r.y && v < r.y + r.height;
      });
      if (inside) {
        zero_channel(seq[t], k);
        record.area_masked_points.emplace_back(static_cast<int>(t), k);
      }
    }
  }
}

void perturb_noise(heatmap::HeatmapSequence& seq, double amplitude, Rng& rng,
                   MaskRecord& record) {
  record.noise_amplitude = amplitude;
  if (amplitude <= 0.0) return;
  for (auto& stack : seq) {
    for (int k = 0; k < stack.channels; ++k) {
      if (channel_is_zero(stack, k)) continue;  // occlusion semantics preserved
      double* ch = stack.channel(k);
      const size_t n = static_cast<size_t>(stack.height) * stack.width;
      for (size_t i = 0; i < n; ++i) {
        ch[i] = std::min(1.0, ch[i] + rng.uniform() * amplitude);
      }
    }
  }
}

void shift_keypoints(skeleton::PoseSequence2D& seq, int shift_max, double probability, Rng& rng,
                     MaskRecord& record) {
  if (shift_max <= 0 || probability <= 0.0) return;
  const int span = 2 * shift_max + 1;
  for (size_t t = 0; t < seq.size(); ++t) {
    for (int k = 0; k < seq[t].joint_count(); ++k) {
      if (!rng.bernoulli(probability)) continue;
      const double du = static_cast<double>(rng.uniform_int(span) - shift_max);
      const double dv = static_cast<double>(rng.uniform_int(span) - shift_max);
      seq[t].coords(k, 0) += du;
      seq[t].coords(k, 1) += dv;
      record.shifted_points.emplace_back(static_cast<int>(t), k);
    }
  }
}

void swap_symmetric(skeleton::PoseSequence2D& seq, double probability, Rng& rng,
                    const skeleton::SkeletonTopology& topology, MaskRecord& record) {
  if (probability <= 0.0 || topology.symmetry_pairs.empty()) return;
  const int pairs = static_cast<int>(topology.symmetry_pairs.size());
  for (size_t t = 0; t < seq.size(); ++t) {
    if (!rng.bernoulli(probability)) continue;
    const int p = static_cast<int>(rng.uniform_int(pairs));
    const auto& [l, r] = topology.symmetry_pairs[static_cast<size_t>(p)];
    seq[t].coords.row(l).swap(seq[t].coords.row(r));
    record.swapped_pairs.emplace_back(static_cast<int>(t), p);
  }
}

PipelineResult apply_pipeline(const AugmentationConfig& config,
                              const skeleton::PoseSequence2D& clean_poses,
                              const skeleton::SkeletonTopology& topology,
                              const RenderParams& render) {
  const Rng root(config.seed);
  PipelineResult out;

  skeleton::PoseSequence2D poses = clean_poses;
  if (config.shift_probability > 0.0 && config.shift_max > 0) {
    Rng r = root.fork(1);
    shift_keypoints(poses, config.shift_max, config.shift_probability, r, out.masks);
  }
  if (config.swap_probability > 0.0) {
    Rng r = root.fork(2);
    swap_symmetric(poses, config.swap_probability, r, topology, out.masks);
  }

  out.heatmaps.reserve(poses.size());
  for (const auto& pose : poses) {
    out.heatmaps.push_back(heatmap::render_heatmaps(pose, render.sigma, render.height, render.width));
  }

  if (config.area_occluder.count > 0) {
    Rng r = root.fork(3);
    occlude_area(out.heatmaps, config.area_occluder, r, out.masks);
  }
  if (config.point_occlusion_rate > 0.0) {
    Rng r = root.fork(4);
    occlude_keypoints(out.heatmaps, config.point_occlusion_rate, r, out.masks);
  }
  if (config.frame_occlusion_rate > 0.0) {
    Rng r = root.fork(5);
    occlude_frames(out.heatmaps, config.frame_occlusion_rate, r, out.masks);
  }
  if (config.tail_occlusion_frames > 0) {
    occlude_frame_tail(out.heatmaps, config.tail_occlusion_frames, out.masks);
  }
  if (config.noise_amplitude > 0.0) {
    Rng r = root.fork(6);
    perturb_noise(out.heatmaps, config.noise_amplitude, r, out.masks);
  }
  return out;
}

}  // namespace postcn::aug
