// Command-line front end over the cgwalk C API: scene generation,
// segmentation, evaluation, and multi-scene benchmarking.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <cgwalk/cgwalk.h>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct SceneDeleter {
  void operator()(cgw_scene* s) const { cgw_scene_free(s); }
};
struct LabelingDeleter {
  void operator()(cgw_labeling* l) const { cgw_labeling_free(l); }
};
struct ReportDeleter {
  void operator()(cgw_report* r) const { cgw_report_free(r); }
};
struct StringDeleter {
  void operator()(char* s) const { cgw_string_free(s); }
};
using ScenePtr = std::unique_ptr<cgw_scene, SceneDeleter>;
using LabelingPtr = std::unique_ptr<cgw_labeling, LabelingDeleter>;
using ReportPtr = std::unique_ptr<cgw_report, ReportDeleter>;
using StringPtr = std::unique_ptr<char, StringDeleter>;

void check(cgw_status status, const std::string& context) {
  if (status == CGW_OK) return;
  throw std::runtime_error(context + ": " + cgw_last_error());
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void atomic_write(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
  }
  fs::rename(tmp, path);
}

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  int threads = 0;
  bool seed_set = false;
  bool threads_set = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "Run configuration JSON file");
  cmd->add_option("--out", flags.out_dir, "Output directory")->required();
  cmd->add_option("--seed", flags.seed, "Override the configured seed")
      ->each([&flags](const std::string&) { flags.seed_set = true; });
  cmd->add_option("--threads", flags.threads, "Override the configured worker count")
      ->each([&flags](const std::string&) { flags.threads_set = true; });
}

// Normalized configuration text with CLI overrides folded in, via the
// library so one canonical rendering exists.
std::string effective_config(const CommonFlags& flags) {
  std::string text;
  if (!flags.config_path.empty()) text = slurp(flags.config_path);
  StringPtr first;
  {
    char* raw = nullptr;
    check(cgw_config_echo(text.empty() ? nullptr : text.c_str(), &raw), "config");
    first.reset(raw);
  }
  if (!flags.seed_set && !flags.threads_set) return first.get();
  json parsed = json::parse(first.get());
  if (flags.seed_set) parsed["seed"] = flags.seed;
  if (flags.threads_set) parsed["threads"] = flags.threads;
  const std::string merged = parsed.dump();
  char* raw = nullptr;
  check(cgw_config_echo(merged.c_str(), &raw), "config");
  return std::string(StringPtr(raw).get());
}

// The marker exists while a command writes into the directory and is removed
// only on success, so interrupted runs stay recognizable as partial.
class PartialMarker {
 public:
  explicit PartialMarker(const fs::path& dir) : path_(dir / ".partial") {
    fs::create_directories(dir);
    std::ofstream(path_).flush();
  }
  void done() {
    std::error_code ec;
    fs::remove(path_, ec);
  }

 private:
  fs::path path_;
};

std::string scene_dir_name(int index) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "scene_%04d", index);
  return buf;
}

std::string format_seconds(double seconds) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", seconds);
  return buf;
}

int cmd_synth(const CommonFlags& flags, int scene_count) {
  if (scene_count < 0) throw std::runtime_error("--scenes must be non-negative");
  const std::string cfg_text = effective_config(flags);
  const std::uint64_t base_seed = json::parse(cfg_text).at("seed").get<std::uint64_t>();

  PartialMarker marker(flags.out_dir);
  atomic_write(fs::path(flags.out_dir) / "config.json", cfg_text);
  for (int i = 0; i < scene_count; ++i) {
    const std::string name = scene_dir_name(i);
    cgw_scene* raw = nullptr;
    check(cgw_scene_generate(cfg_text.c_str(), base_seed + static_cast<std::uint64_t>(i),
                             name.c_str(), &raw),
          name);
    ScenePtr scene(raw);
    check(cgw_scene_save(scene.get(), (fs::path(flags.out_dir) / name).string().c_str()), name);
    int64_t points = 0;
    cgw_scene_point_count(scene.get(), &points);
    std::cout << name << ": " << points << " points\n";
  }
  marker.done();
  return 0;
}

int cmd_segment(const std::string& scene_dir, const CommonFlags& flags,
                const std::string& algo) {
  const std::string cfg_text = effective_config(flags);
  const int threads = json::parse(cfg_text).at("threads").get<int>();

  cgw_scene* scene_raw = nullptr;
  check(cgw_scene_load(scene_dir.c_str(), &scene_raw), scene_dir);
  ScenePtr scene(scene_raw);

  PartialMarker marker(flags.out_dir);
  atomic_write(fs::path(flags.out_dir) / "config.json", cfg_text);

  cgw_labeling* lab_raw = nullptr;
  check(cgw_segment(scene.get(), algo.c_str(), cfg_text.c_str(), threads, &lab_raw),
        "segment");
  LabelingPtr labeling(lab_raw);

  check(cgw_labeling_save(labeling.get(), flags.out_dir.c_str()), flags.out_dir);
  const double seconds = cgw_labeling_wall_seconds(labeling.get());
  atomic_write(fs::path(flags.out_dir) / "timing.txt",
               "wall_seconds " + format_seconds(seconds) + "\n");
  for (int i = 0; i < cgw_labeling_warning_count(labeling.get()); ++i)
    std::cerr << "warning: " << cgw_labeling_warning(labeling.get(), i) << "\n";
  std::cout << "segmented with " << algo << " in " << format_seconds(seconds) << " s\n";
  marker.done();
  return 0;
}

int cmd_eval(const std::string& scene_dir, const std::string& pred_dir,
             const CommonFlags& flags) {
  cgw_scene* scene_raw = nullptr;
  check(cgw_scene_load(scene_dir.c_str(), &scene_raw), scene_dir);
  ScenePtr scene(scene_raw);

  cgw_labeling* lab_raw = nullptr;
  check(cgw_labeling_load(pred_dir.c_str(), scene.get(), &lab_raw), pred_dir);
  LabelingPtr labeling(lab_raw);

  cgw_report* rep_raw = nullptr;
  check(cgw_evaluate(scene.get(), labeling.get(), &rep_raw), "evaluate");
  ReportPtr report(rep_raw);

  PartialMarker marker(flags.out_dir);
  check(cgw_report_write(report.get(), flags.out_dir.c_str()), flags.out_dir);
  marker.done();

  double miou = 0, map = 0, map50 = 0, map25 = 0;
  cgw_report_metric(report.get(), "miou", &miou);
  cgw_report_metric(report.get(), "map", &map);
  cgw_report_metric(report.get(), "map50", &map50);
  cgw_report_metric(report.get(), "map25", &map25);
  std::cout << "miou " << miou << "  map " << map << "  map50 " << map50 << "  map25 "
            << map25 << "\n";
  return 0;
}

struct BenchRun {
  std::string label;
  std::string algo;
  std::string config_text;
};

struct SceneMetrics {
  double values[6] = {0, 0, 0, 0, 0, 0};
};

constexpr const char* kMetricNames[6] = {"miou", "map", "map50", "map25", "mpre50", "mrec50"};

int cmd_bench(const std::string& scenes_dir, const CommonFlags& flags,
              const std::string& algo_list, const std::string& t2_sweep) {
  const std::string cfg_text = effective_config(flags);
  const int pool = json::parse(cfg_text).at("threads").get<int>();

  std::vector<std::string> scene_dirs;
  for (const auto& entry : fs::directory_iterator(scenes_dir))
    if (entry.is_directory() && fs::exists(entry.path() / "points.txt"))
      scene_dirs.push_back(entry.path().string());
  std::sort(scene_dirs.begin(), scene_dirs.end());
  if (scene_dirs.empty())
    throw std::runtime_error("no scene bundles found under " + scenes_dir);

  std::vector<BenchRun> runs;
  std::stringstream algos(algo_list);
  std::string token;
  while (std::getline(algos, token, ',')) {
    if (token.empty()) continue;
    if (token == "cgcrw" && !t2_sweep.empty()) {
      std::stringstream sweep(t2_sweep);
      std::string value;
      while (std::getline(sweep, value, ',')) {
        if (value.empty()) continue;
        const int t2 = std::stoi(value);
        if (t2 < 0) throw std::runtime_error("--t2-sweep values must be non-negative");
        json cfg = json::parse(cfg_text);
        cfg["cgcrw"]["t2_max"] = t2;
        char* raw = nullptr;
        check(cgw_config_echo(cfg.dump().c_str(), &raw), "t2 sweep");
        runs.push_back({"cgcrw_t2=" + std::to_string(t2), token, StringPtr(raw).get()});
      }
    } else {
      runs.push_back({token, token, cfg_text});
    }
  }
  if (runs.empty()) throw std::runtime_error("no algorithms requested");

  std::vector<ScenePtr> scenes;
  scenes.reserve(scene_dirs.size());
  for (const auto& dir : scene_dirs) {
    cgw_scene* raw = nullptr;
    check(cgw_scene_load(dir.c_str(), &raw), dir);
    scenes.emplace_back(raw);
  }

  PartialMarker marker(flags.out_dir);
  atomic_write(fs::path(flags.out_dir) / "config.json", cfg_text);

  std::ostringstream csv;
  csv << "algo,scene,metric,value\n";
  for (const auto& run : runs) {
    std::vector<SceneMetrics> results(scenes.size());
    // Scene-level worker pool; every scene runs single-threaded inside so the
    // numbers do not depend on the pool size.
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::string first_error;
    auto worker = [&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= scenes.size()) return;
        {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error.empty()) return;
        }
        try {
          cgw_labeling* lab_raw = nullptr;
          check(cgw_segment(scenes[i].get(), run.algo.c_str(), run.config_text.c_str(), 1,
                            &lab_raw),
                run.label);
          LabelingPtr labeling(lab_raw);
          cgw_report* rep_raw = nullptr;
          check(cgw_evaluate(scenes[i].get(), labeling.get(), &rep_raw), run.label);
          ReportPtr report(rep_raw);
          for (int m = 0; m < 6; ++m)
            check(cgw_report_metric(report.get(), kMetricNames[m], &results[i].values[m]),
                  run.label);
        } catch (const std::exception& e) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (first_error.empty()) first_error = e.what();
          return;
        }
      }
    };
    const int worker_count = std::max(1, std::min(pool, static_cast<int>(scenes.size())));
    std::vector<std::thread> threads;
    threads.reserve(worker_count);
    for (int w = 0; w < worker_count; ++w) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (!first_error.empty()) throw std::runtime_error(first_error);

    double sums[6] = {0, 0, 0, 0, 0, 0};
    for (std::size_t i = 0; i < scenes.size(); ++i) {
      const std::string name = fs::path(scene_dirs[i]).filename().string();
      for (int m = 0; m < 6; ++m) {
        csv << run.label << ',' << name << ',' << kMetricNames[m] << ','
            << json(results[i].values[m]).dump() << '\n';
        sums[m] += results[i].values[m];
      }
    }
    for (int m = 0; m < 6; ++m)
      csv << run.label << ",mean," << kMetricNames[m] << ','
          << json(sums[m] / static_cast<double>(scenes.size())).dump() << '\n';
    std::cout << run.label << ": mean map50 over " << scenes.size()
              << " scenes = " << sums[2] / static_cast<double>(scenes.size()) << "\n";
  }
  atomic_write(fs::path(flags.out_dir) / "bench.csv", csv.str());
  marker.done();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weakly supervised point-cloud instance segmentation toolkit"};
  app.require_subcommand(1);

  CommonFlags synth_flags, segment_flags, eval_flags, bench_flags;
  int scene_count = 1;
  std::string segment_scene_dir, segment_algo = "cgcrw";
  std::string eval_scene_dir, eval_pred_dir;
  std::string bench_scenes_dir, bench_algos = "cgcrw", bench_sweep;

  CLI::App* synth = app.add_subcommand("synth", "Generate synthetic scene bundles");
  add_common(synth, synth_flags);
  synth->add_option("--scenes", scene_count, "Number of scenes to generate");

  CLI::App* segment = app.add_subcommand("segment", "Segment one scene bundle");
  segment->add_option("scene", segment_scene_dir, "Scene bundle directory")->required();
  add_common(segment, segment_flags);
  segment->add_option("--algo", segment_algo, "cgcrw | rw | kmeans | bfs");

  CLI::App* eval = app.add_subcommand("eval", "Evaluate predictions against ground truth");
  eval->add_option("scene", eval_scene_dir, "Scene bundle directory")->required();
  eval->add_option("pred", eval_pred_dir, "Directory with pred_instance.txt")->required();
  add_common(eval, eval_flags);

  CLI::App* bench = app.add_subcommand("bench", "Run algorithms over a scene set");
  bench->add_option("scenes_dir", bench_scenes_dir, "Directory of scene bundles")->required();
  add_common(bench, bench_flags);
  bench->add_option("--algo", bench_algos, "Comma-separated algorithm list");
  bench->add_option("--t2-sweep", bench_sweep,
                    "Comma-separated competition round counts for cgcrw");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (synth->parsed()) return cmd_synth(synth_flags, scene_count);
    if (segment->parsed()) return cmd_segment(segment_scene_dir, segment_flags, segment_algo);
    if (eval->parsed()) return cmd_eval(eval_scene_dir, eval_pred_dir, eval_flags);
    if (bench->parsed()) return cmd_bench(bench_scenes_dir, bench_flags, bench_algos, bench_sweep);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
