#include "postcn/synthdata.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "postcn/rng.hpp"

namespace postcn::synthdata {

namespace {

// ordered_json keeps the documented key order in written files; parsing is
// order-insensitive either way.
using json = nlohmann::ordered_json;
using skeleton::Pose3D;

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed,
                         const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find_if(allowed.begin(), allowed.end(),
                     [&](const char* k) { return it.key() == k; }) == allowed.end()) {
      throw DatasetError(DatasetError::Kind::Schema, "unknown key \"" + it.key() + "\" in " + where);
    }
  }
}

json gait_to_json(const GaitParams& g) {
  return json{{"leg", g.leg_amplitude},   {"arm", g.arm_amplitude}, {"sway", g.sway_amplitude},
              {"phase_lag", g.phase_lag}, {"cadence", g.cadence},   {"heading", g.heading}};
}

GaitParams gait_from_json(const json& j) {
  reject_unknown_keys(j, {"leg", "arm", "sway", "phase_lag", "cadence", "heading"}, "gait");
  GaitParams g;
  g.leg_amplitude = j.value("leg", g.leg_amplitude);
  g.arm_amplitude = j.value("arm", g.arm_amplitude);
  g.sway_amplitude = j.value("sway", g.sway_amplitude);
  g.phase_lag = j.value("phase_lag", g.phase_lag);
  g.cadence = j.value("cadence", g.cadence);
  g.heading = j.value("heading", g.heading);
  return g;
}

json projection_to_json(const losses::ProjectionConfig& p) {
  return json{{"pixels_per_unit", p.pixels_per_unit}, {"center_u", p.center_u},
              {"center_v", p.center_v}};
}

losses::ProjectionConfig projection_from_json(const json& j) {
  reject_unknown_keys(j, {"pixels_per_unit", "center_u", "center_v"}, "projection");
  losses::ProjectionConfig p;
  p.pixels_per_unit = j.value("pixels_per_unit", p.pixels_per_unit);
  p.center_u = j.value("center_u", p.center_u);
  p.center_v = j.value("center_v", p.center_v);
  return p;
}

json spec_to_json(const MotionSpec& spec) {
  json j;
  j["frames"] = spec.frames;
  j["speed"] = spec.speed_multiplier;
  j["bone_lengths"] = json::array();
  const Eigen::VectorXd lengths =
      spec.bone_lengths.size() > 0 ? spec.bone_lengths : default_bone_lengths();
  for (Eigen::Index i = 0; i < lengths.size(); ++i) j["bone_lengths"].push_back(lengths(i));
  j["gait"] = gait_to_json(spec.gait);
  j["noise_std"] = spec.noise_std;
  j["seed"] = spec.seed;
  j["projection"] = projection_to_json(spec.projection);
  j["cameras"] = json::array();
  for (const auto& cam : spec.cameras) {
    json rows = json::array();
    for (int r = 0; r < 3; ++r) rows.push_back({cam.mat(r, 0), cam.mat(r, 1), cam.mat(r, 2)});
    j["cameras"].push_back(rows);
  }
  return j;
}

MotionSpec spec_from_json(const json& j) {
  reject_unknown_keys(
      j, {"frames", "speed", "bone_lengths", "gait", "noise_std", "seed", "projection", "cameras"},
      "motion spec");
  MotionSpec spec;
  spec.frames = j.value("frames", spec.frames);
  spec.speed_multiplier = j.value("speed", spec.speed_multiplier);
  if (j.contains("bone_lengths")) {
    const auto lens = j.at("bone_lengths").get<std::vector<double>>();
    spec.bone_lengths = Eigen::Map<const Eigen::VectorXd>(lens.data(),
                                                          static_cast<Eigen::Index>(lens.size()));
  }
  if (j.contains("gait")) spec.gait = gait_from_json(j.at("gait"));
  spec.noise_std = j.value("noise_std", spec.noise_std);
  spec.seed = j.value("seed", spec.seed);
  if (j.contains("projection")) spec.projection = projection_from_json(j.at("projection"));
  if (j.contains("cameras")) {
    spec.cameras.clear();
    for (const auto& rows : j.at("cameras")) {
      losses::CameraRotation cam;
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) cam.mat(r, c) = rows.at(r).at(c).get<double>();
      }
      spec.cameras.push_back(cam);
    }
  }
  validate_spec(spec);
  return spec;
}

int bone_index(const skeleton::SkeletonTopology& topo, int parent, int child) {
  for (int m = 0; m < topo.bone_count(); ++m) {
    if (topo.bones[static_cast<size_t>(m)] == std::make_pair(parent, child)) return m;
  }
  throw DatasetError(DatasetError::Kind::Schema, "gait generator: topology lacks expected bone");
}

}  // namespace

void validate_spec(const MotionSpec& spec) {
  if (spec.frames <= 0) throw DatasetError(DatasetError::Kind::Schema, "frames must be positive");
  if (!(spec.speed_multiplier > 0.0)) {
    throw DatasetError(DatasetError::Kind::Schema, "speed multiplier must be positive");
  }
  if (spec.noise_std < 0.0) {
    throw DatasetError(DatasetError::Kind::Schema, "noise_std must be nonnegative");
  }
  for (Eigen::Index i = 0; i < spec.bone_lengths.size(); ++i) {
    if (!(spec.bone_lengths(i) > 0.0)) {
      throw DatasetError(DatasetError::Kind::Schema, "bone lengths must be positive");
    }
  }
}

MotionSpec MotionSpec::from_json_text(const std::string& text) {
  return spec_from_json(json::parse(text));
}

std::string MotionSpec::to_json_text() const { return spec_to_json(*this).dump(); }

bool json_is_corpus_spec(const std::string& text) {
  return json::parse(text).contains("sequences");
}

CorpusSpec CorpusSpec::from_json_text(const std::string& text) {
  json j = json::parse(text);
  CorpusSpec corpus;
  if (j.contains("sequences")) {
    corpus.sequences = j.at("sequences").get<int>();
    j.erase("sequences");
  }
  if (j.contains("speeds")) {
    corpus.speeds = j.at("speeds").get<std::vector<double>>();
    j.erase("speeds");
  }
  if (j.contains("heading_range")) {
    corpus.heading_range = j.at("heading_range").get<double>();
    j.erase("heading_range");
  }
  corpus.base = spec_from_json(j);
  if (corpus.sequences <= 0 || corpus.speeds.empty()) {
    throw DatasetError(DatasetError::Kind::Schema, "corpus needs sequences > 0 and speeds");
  }
  return corpus;
}

Eigen::VectorXd default_bone_lengths() {
  Eigen::VectorXd lengths(16);
  // Bone order of skeleton::default_topology().
  lengths << 120, 450, 440,   // right leg
      120, 450, 440,          // left leg
      230, 230, 110, 115,     // torso, neck, head
      170, 280, 250,          // left arm
      170, 280, 250;          // right arm
  return lengths;
}

skeleton::Pose3D pose_at(const MotionSpec& spec, const skeleton::SkeletonTopology& topology,
                         double t) {
  validate_spec(spec);
  const Eigen::VectorXd lengths =
      spec.bone_lengths.size() > 0 ? spec.bone_lengths : default_bone_lengths();
  if (lengths.size() != topology.bone_count()) {
    throw DatasetError(DatasetError::Kind::Schema, "bone length count does not match topology");
  }

  const double phase0 = Rng(spec.seed).fork(1).uniform(0.0, 2.0 * M_PI);
  const double phi = phase0 + spec.gait.cadence * spec.speed_multiplier * t;
  const double lag = spec.gait.phase_lag;
  const double a_leg = spec.gait.leg_amplitude;
  const double a_arm = spec.gait.arm_amplitude;
  const double a_sway = spec.gait.sway_amplitude;

  auto unit = [](double x, double y, double z) {
    return Eigen::Vector3d(x, y, z).normalized();
  };
  auto thigh_dir = [&](double p) {
    return unit(0.5 * a_leg * std::sin(p), -1.0, a_leg * std::sin(p + lag));
  };
  auto shank_dir = [&](double p) {
    return unit(0.5 * a_leg * std::sin(p - 0.6), -1.0, a_leg * std::sin(p - 0.6 + lag));
  };
  auto upper_arm_dir = [&](double p) {
    return unit(0.3 * a_arm * std::sin(p), -1.0, a_arm * std::sin(p + lag));
  };
  auto forearm_dir = [&](double p) {
    return unit(0.36 * a_arm * std::sin(p - 0.5), -1.0, 1.2 * a_arm * std::sin(p - 0.5 + lag));
  };
  auto torso_dir = [&](double shift, double gx, double gz) {
    return unit(gx * a_sway * std::sin(2.0 * phi + shift), 1.0,
                gz * a_sway * std::sin(2.0 * phi + shift + lag));
  };

  auto len = [&](int p, int c) { return lengths(bone_index(topology, p, c)); };

  Eigen::Matrix<double, Eigen::Dynamic, 3> x(topology.joint_count(), 3);
  auto set = [&](int j, const Eigen::Vector3d& v) { x.row(j) = v.transpose(); };
  const Eigen::Vector3d pelvis = Eigen::Vector3d::Zero();
  set(0, pelvis);

  // Legs: right leads left by half a cycle.
  const Eigen::Vector3d r_hip = pelvis + len(0, 1) * unit(-1, 0, 0);
  const Eigen::Vector3d l_hip = pelvis + len(0, 4) * unit(1, 0, 0);
  set(1, r_hip);
  set(4, l_hip);
  const Eigen::Vector3d r_knee = r_hip + len(1, 2) * thigh_dir(phi + M_PI);
  const Eigen::Vector3d l_knee = l_hip + len(4, 5) * thigh_dir(phi);
  set(2, r_knee);
  set(5, l_knee);
  set(3, r_knee + len(2, 3) * shank_dir(phi + M_PI));
  set(6, l_knee + len(5, 6) * shank_dir(phi));

  // Torso sways at double the step frequency.
  const Eigen::Vector3d spine = pelvis + len(0, 7) * torso_dir(0.0, 0.3, 0.2);
  const Eigen::Vector3d thorax = spine + len(7, 8) * torso_dir(0.5, 0.3, 0.2);
  const Eigen::Vector3d neck = thorax + len(8, 9) * torso_dir(1.0, 0.1, 0.05);
  set(7, spine);
  set(8, thorax);
  set(9, neck);
  set(10, neck + len(9, 10) * torso_dir(1.5, 0.1, 0.05));

  // Arms swing against the same-side leg.
  const Eigen::Vector3d l_shoulder = thorax + len(8, 11) * unit(1, -0.15, 0);
  const Eigen::Vector3d r_shoulder = thorax + len(8, 14) * unit(-1, -0.15, 0);
  set(11, l_shoulder);
  set(14, r_shoulder);
  const Eigen::Vector3d l_elbow = l_shoulder + len(11, 12) * upper_arm_dir(phi + M_PI);
  const Eigen::Vector3d r_elbow = r_shoulder + len(14, 15) * upper_arm_dir(phi);
  set(12, l_elbow);
  set(15, r_elbow);
  set(13, l_elbow + len(12, 13) * forearm_dir(phi + M_PI));
  set(16, r_elbow + len(15, 16) * forearm_dir(phi));

  if (spec.gait.heading != 0.0) {
    const losses::CameraRotation yaw = losses::rotation_matrix(0.0, spec.gait.heading, 0.0);
    x = x * yaw.mat.transpose();
  }
  return Pose3D{std::move(x)};
}

Eigen::MatrixXd displacement_rate(const MotionSpec& spec,
                                  const skeleton::SkeletonTopology& topology, double t) {
  const double delta = 1e-6;  // frames
  const Pose3D plus = pose_at(spec, topology, t + delta);
  const Pose3D minus = pose_at(spec, topology, t - delta);
  return (plus.coords - minus.coords) / (2.0 * delta);
}

skeleton::PoseSequence3D generate_sequence(const MotionSpec& spec,
                                           const skeleton::SkeletonTopology& topology) {
  validate_spec(spec);
  skeleton::PoseSequence3D seq;
  seq.reserve(static_cast<size_t>(spec.frames));
  for (int t = 0; t < spec.frames; ++t) {
    seq.push_back(pose_at(spec, topology, static_cast<double>(t)));
  }
  if (spec.noise_std > 0.0) {
    Rng noise = Rng(spec.seed).fork(2);
    for (auto& pose : seq) {
      for (int j = 0; j < topology.joint_count(); ++j) {
        if (j == topology.root_index) continue;  // root stays pinned at origin
        for (int axis = 0; axis < 3; ++axis) {
          pose.coords(j, axis) += spec.noise_std * noise.normal();
        }
      }
    }
  }
  return seq;
}

std::pair<skeleton::PoseSequence3D, skeleton::PoseSequence3D> make_multiview(
    const skeleton::PoseSequence3D& seq, const losses::CameraRotation& rotation) {
  if (!losses::is_valid_rotation(rotation)) {
    throw DatasetError(DatasetError::Kind::Schema, "make_multiview: invalid rotation");
  }
  skeleton::PoseSequence3D rotated;
  rotated.reserve(seq.size());
  for (const auto& pose : seq) {
    rotated.push_back(Pose3D{pose.coords * rotation.mat.transpose()});
  }
  return {seq, std::move(rotated)};
}

skeleton::PoseSequence2D project_to_2d(const skeleton::PoseSequence3D& seq,
                                       const skeleton::SkeletonTopology& topology,
                                       const losses::ProjectionConfig& projection) {
  skeleton::PoseSequence2D out;
  out.reserve(seq.size());
  for (const auto& pose : seq) {
    out.push_back(losses::orthographic_project(pose, topology, projection));
  }
  return out;
}

SequenceData generate_sequence_data(const MotionSpec& spec,
                                    const skeleton::SkeletonTopology& topology) {
  SequenceData data;
  data.topology = topology;
  data.spec = spec;
  data.j3d = generate_sequence(spec, topology);
  data.j2d = project_to_2d(data.j3d, topology, spec.projection);
  return data;
}

std::vector<SequenceData> generate_corpus(const CorpusSpec& corpus,
                                          const skeleton::SkeletonTopology& topology) {
  std::vector<SequenceData> out;
  out.reserve(static_cast<size_t>(corpus.sequences));
  const Rng root(corpus.base.seed);
  for (int i = 0; i < corpus.sequences; ++i) {
    Rng per_seq = root.fork(static_cast<std::uint64_t>(i) + 1);
    MotionSpec spec = corpus.base;
    spec.speed_multiplier = corpus.speeds[static_cast<size_t>(i) % corpus.speeds.size()];
    spec.seed = per_seq.next_u64();
    spec.gait.heading =
        corpus.base.gait.heading + per_seq.uniform(-corpus.heading_range, corpus.heading_range);
    out.push_back(generate_sequence_data(spec, topology));
  }
  return out;
}

void write_dataset(const std::string& path, const SequenceData& data) {
  std::ofstream file(path);
  if (!file) throw DatasetError(DatasetError::Kind::Io, "cannot open for writing: " + path);

  json header;
  header["schema"] = "postcn-v1";
  header["topology"] = json::parse(skeleton::topology_to_json_text(data.topology));
  header["spec"] = spec_to_json(data.spec);
  file << header.dump() << "\n";

  const int k = data.topology.joint_count();
  for (size_t t = 0; t < data.j3d.size(); ++t) {
    json frame;
    frame["t"] = static_cast<int>(t);
    json j3d = json::array();
    json j2d = json::array();
    json vis = json::array();
    for (int j = 0; j < k; ++j) {
      j3d.push_back({data.j3d[t].coords(j, 0), data.j3d[t].coords(j, 1), data.j3d[t].coords(j, 2)});
      j2d.push_back({data.j2d[t].coords(j, 0), data.j2d[t].coords(j, 1)});
      vis.push_back(data.j2d[t].visible(j));
    }
    frame["j3d"] = std::move(j3d);
    frame["j2d"] = std::move(j2d);
    frame["vis"] = std::move(vis);
    file << frame.dump() << "\n";
  }
  if (!file) throw DatasetError(DatasetError::Kind::Io, "write failed: " + path);
}

SequenceData read_dataset(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw DatasetError(DatasetError::Kind::Io, "cannot open: " + path);

  SequenceData data;
  std::string line;
  long line_number = 0;

  if (!std::getline(file, line)) {
    throw DatasetError(DatasetError::Kind::Parse, "empty dataset file: " + path, 1);
  }
  ++line_number;
  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception& e) {
    throw DatasetError(DatasetError::Kind::Parse, std::string("bad header: ") + e.what(), 1);
  }
  if (header.value("schema", "") != "postcn-v1") {
    throw DatasetError(DatasetError::Kind::Schema, "unsupported schema tag", 1);
  }
  data.topology = skeleton::topology_from_json_text(header.at("topology").dump());
  data.spec = spec_from_json(header.at("spec"));
  const int k = data.topology.joint_count();

  while (std::getline(file, line)) {
    ++line_number;
    if (line.empty()) continue;
    json frame;
    try {
      frame = json::parse(line);
    } catch (const json::exception& e) {
      throw DatasetError(DatasetError::Kind::Parse, std::string("bad frame: ") + e.what(),
                         line_number);
    }
    const auto& j3d = frame.at("j3d");
    const auto& j2d = frame.at("j2d");
    const auto& vis = frame.at("vis");
    if (static_cast<int>(j3d.size()) != k || static_cast<int>(j2d.size()) != k ||
        static_cast<int>(vis.size()) != k) {
      throw DatasetError(DatasetError::Kind::Schema,
                         "joint arity does not match header topology", line_number);
    }
    Pose3D p3;
    p3.coords.resize(k, 3);
    skeleton::Pose2D p2;
    p2.coords.resize(k, 2);
    p2.visibility.assign(static_cast<size_t>(k), 0);
    for (int j = 0; j < k; ++j) {
      for (int a = 0; a < 3; ++a) p3.coords(j, a) = j3d.at(j).at(a).get<double>();
      for (int a = 0; a < 2; ++a) p2.coords(j, a) = j2d.at(j).at(a).get<double>();
      p2.visibility[static_cast<size_t>(j)] = vis.at(j).get<bool>() ? 1 : 0;
    }
    data.j3d.push_back(std::move(p3));
    data.j2d.push_back(std::move(p2));
  }
  if (data.j3d.empty()) {
    throw DatasetError(DatasetError::Kind::Parse, "dataset has no frames", line_number);
  }
  return data;
}

std::vector<SequenceData> load_corpus(const std::string& path) {
  namespace fs = std::filesystem;
  std::vector<SequenceData> out;
  if (fs::is_directory(path)) {
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.path().extension() == ".jsonl") files.push_back(entry.path().string());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw DatasetError(DatasetError::Kind::Io, "no .jsonl files in " + path);
    for (const auto& f : files) out.push_back(read_dataset(f));
  } else {
    out.push_back(read_dataset(path));
  }
  return out;
}

}  // namespace postcn::synthdata
