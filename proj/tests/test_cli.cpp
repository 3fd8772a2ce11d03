// End-to-end checks of the postcn binary: the gen-data -> train -> eval
// pipeline, augment, describe, grad-check, and the exit-code contract.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kBin = POSTCN_BIN;

struct RunResult {
  int exit_code = -1;
  std::string stdout_text;
};

RunResult run(const std::string& args, const fs::path& dir) {
  const fs::path out_file = dir / "stdout.txt";
  const std::string cmd = kBin + " " + args + " > " + out_file.string() + " 2> " +
                          (dir / "stderr.txt").string();
  const int raw = std::system(cmd.c_str());
  RunResult result;
  result.exit_code = WEXITSTATUS(raw);
  std::ifstream in(out_file);
  std::ostringstream ss;
  ss << in.rdbuf();
  result.stdout_text = ss.str();
  return result;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

fs::path make_workspace() {
  const auto dir = fs::temp_directory_path() / "postcn_cli_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

const char* kTrainConfig = R"({
  "model": {"embed_dim": 16, "temporal_length": 32, "strides": [1, 2],
            "branch_channels": 8, "pool_factor": 8},
  "optimizer": {"lr": 0.003},
  "loss_weights": {"w1": 0.0, "w2": 0.0, "w3": 0.0},
  "train": {"epochs": 1, "batch_size": 2, "steps_per_epoch": 2, "seed": 3,
            "heatmap_height": 32, "heatmap_width": 32}
})";

const char* kCorpusSpec = R"({
  "sequences": 3,
  "speeds": [0.5, 1.0, 2.0],
  "frames": 48,
  "seed": 97,
  "projection": {"pixels_per_unit": 3.0, "center_u": 16.0, "center_v": 16.0}
})";

}  // namespace

TEST_CASE("full pipeline: gen-data, train, eval") {
  const auto dir = make_workspace();
  write_file(dir / "corpus.json", kCorpusSpec);
  write_file(dir / "train.json", kTrainConfig);

  auto gen = run("gen-data --spec " + (dir / "corpus.json").string() + " --out " +
                     (dir / "data").string(),
                 dir);
  REQUIRE(gen.exit_code == 0);
  CHECK(fs::exists(dir / "data" / "seq_0000.jsonl"));
  CHECK(fs::exists(dir / "data" / "seq_0002.jsonl"));

  auto train = run("train --config " + (dir / "train.json").string() + " --data " +
                       (dir / "data").string() + " --out " + (dir / "model.ckpt").string(),
                   dir);
  REQUIRE(train.exit_code == 0);
  CHECK(fs::exists(dir / "model.ckpt"));
  const auto summary = json::parse(train.stdout_text);
  CHECK(summary.at("epochs") == 1);

  auto eval = run("eval --ckpt " + (dir / "model.ckpt").string() + " --data " +
                      (dir / "data").string(),
                  dir);
  REQUIRE(eval.exit_code == 0);
  const auto report = json::parse(eval.stdout_text);
  CHECK(report.size() == 5);
  CHECK(report.contains("mpjpe"));
  CHECK(report.contains("p_mpjpe"));
  CHECK(report.contains("pck150"));
  CHECK(report.contains("mae"));
  CHECK(report.contains("frames"));
  CHECK(report.at("mpjpe").get<double>() >= 0.0);

  // Same command + seed -> byte-identical checkpoint and metrics.
  auto train2 = run("train --config " + (dir / "train.json").string() + " --data " +
                        (dir / "data").string() + " --out " + (dir / "model2.ckpt").string(),
                    dir);
  REQUIRE(train2.exit_code == 0);
  CHECK(read_file(dir / "model.ckpt") == read_file(dir / "model2.ckpt"));

  auto eval2 = run("eval --ckpt " + (dir / "model2.ckpt").string() + " --data " +
                       (dir / "data").string(),
                   dir);
  CHECK(eval2.stdout_text == eval.stdout_text);

  fs::remove_all(dir);
}

TEST_CASE("gen-data writes a single sequence for a plain motion spec") {
  const auto dir = make_workspace();
  write_file(dir / "spec.json", R"({"frames": 40, "speed": 1.5, "seed": 11})");
  auto gen = run("gen-data --spec " + (dir / "spec.json").string() + " --out " +
                     (dir / "one.jsonl").string(),
                 dir);
  REQUIRE(gen.exit_code == 0);
  std::ifstream in(dir / "one.jsonl");
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == 41);  // header + 40 frames
  fs::remove_all(dir);
}

TEST_CASE("augment emits a masked dataset plus a mask record") {
  const auto dir = make_workspace();
  write_file(dir / "spec.json", R"({"frames": 30, "seed": 13})");
  REQUIRE(run("gen-data --spec " + (dir / "spec.json").string() + " --out " +
                  (dir / "clean.jsonl").string(),
              dir)
              .exit_code == 0);
  write_file(dir / "aug.json",
             R"({"frame_occlusion_rate": 0.2, "point_occlusion_rate": 0.1,
                 "area_occluder": {"count": 0}, "shift_probability": 0.3,
                 "swap_probability": 0.2, "seed": 5})");
  auto aug = run("augment --config " + (dir / "aug.json").string() + " --in " +
                     (dir / "clean.jsonl").string() + " --out " + (dir / "masked.jsonl").string(),
                 dir);
  REQUIRE(aug.exit_code == 0);
  CHECK(fs::exists(dir / "masked.jsonl"));
  CHECK(fs::exists(dir / "masked.jsonl.masks.json"));
  const auto masks = json::parse(read_file(dir / "masked.jsonl.masks.json"));
  CHECK(masks.contains("masked_frames"));
  CHECK(masks.contains("masked_points"));
  CHECK(masks.contains("shifted_points"));

  // Masked frames must be fully invisible in the written dataset.
  std::ifstream in(dir / "masked.jsonl");
  std::string line;
  std::getline(in, line);  // header
  std::vector<json> frames;
  while (std::getline(in, line)) frames.push_back(json::parse(line));
  for (const auto& f : masks.at("masked_frames")) {
    const auto& vis = frames.at(f.get<size_t>()).at("vis");
    for (const auto& v : vis) CHECK_FALSE(v.get<bool>());
  }
  fs::remove_all(dir);
}

TEST_CASE("describe dumps one JSON line per frame") {
  const auto dir = make_workspace();
  write_file(dir / "spec.json", R"({"frames": 10, "seed": 17})");
  REQUIRE(run("gen-data --spec " + (dir / "spec.json").string() + " --out " +
                  (dir / "seq.jsonl").string(),
              dir)
              .exit_code == 0);
  auto describe =
      run("describe --data " + (dir / "seq.jsonl").string() + " --interval 2", dir);
  REQUIRE(describe.exit_code == 0);
  std::istringstream ss(describe.stdout_text);
  std::string line;
  int count = 0;
  while (std::getline(ss, line)) {
    const auto parsed = json::parse(line);
    CHECK(parsed.at("t") == count);
    CHECK(parsed.at("features").size() == 323);
    ++count;
  }
  CHECK(count == 10);
  fs::remove_all(dir);
}

TEST_CASE("grad-check succeeds and reports the error") {
  const auto dir = make_workspace();
  auto result = run("grad-check --seed 777", dir);
  REQUIRE(result.exit_code == 0);
  const auto parsed = json::parse(result.stdout_text);
  CHECK(parsed.at("max_rel_error").get<double>() < 1e-4);
  fs::remove_all(dir);
}

TEST_CASE("usage errors exit with code 1") {
  const auto dir = make_workspace();
  CHECK(run("--definitely-not-a-flag", dir).exit_code == 1);
  CHECK(run("eval", dir).exit_code == 1);          // missing required options
  CHECK(run("no-such-command", dir).exit_code == 1);
  fs::remove_all(dir);
}

TEST_CASE("runtime errors exit with code 2") {
  const auto dir = make_workspace();
  CHECK(run("describe --data /nonexistent/file.jsonl", dir).exit_code == 2);
  write_file(dir / "bad.json", "{not json");
  CHECK(run("gen-data --spec " + (dir / "bad.json").string() + " --out " +
                (dir / "x.jsonl").string(),
            dir)
            .exit_code == 2);
  fs::remove_all(dir);
}
