#include "cgwalk/bundle_io.hpp"

#include <charconv>
#include <sstream>
#include <string_view>

#include <json.hpp>

#include "cgwalk/error.hpp"
#include "cgwalk/util.hpp"

namespace cgwalk {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void parse_fail(const fs::path& file, int line, const std::string& what) {
  fail(ErrorCode::kParse, file.string() + ":" + std::to_string(line) + ": " + what);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) {
      ++pos;
    }
    std::size_t start = pos;
    while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t') {
      ++pos;
    }
    if (pos > start) {
      fields.push_back(line.substr(start, pos - start));
    }
  }
  return fields;
}

double parse_double_field(std::string_view s, const fs::path& file, int line) {
  double value = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), value);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    parse_fail(file, line, "expected a number, got '" + std::string(s) + "'");
  }
  return value;
}

int parse_int_field(std::string_view s, const fs::path& file, int line) {
  int value = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), value);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    parse_fail(file, line, "expected an integer, got '" + std::string(s) + "'");
  }
  return value;
}

std::vector<Vec3> read_vec3_file(const fs::path& file) {
  std::vector<Vec3> rows;
  for (const auto& line : data_lines(read_text_file(file))) {
    auto fields = split_fields(line.text);
    if (fields.size() != 3) {
      parse_fail(file, line.number, "expected 3 fields");
    }
    rows.emplace_back(parse_double_field(fields[0], file, line.number),
                      parse_double_field(fields[1], file, line.number),
                      parse_double_field(fields[2], file, line.number));
  }
  return rows;
}

std::vector<int> read_int_file(const fs::path& file) {
  std::vector<int> rows;
  for (const auto& line : data_lines(read_text_file(file))) {
    auto fields = split_fields(line.text);
    if (fields.size() != 1) {
      parse_fail(file, line.number, "expected 1 field");
    }
    rows.push_back(parse_int_field(fields[0], file, line.number));
  }
  return rows;
}

std::string vec3_file_text(const std::vector<Vec3>& rows) {
  std::ostringstream out;
  for (const auto& v : rows) {
    out << format_double(v.x()) << ' ' << format_double(v.y()) << ' ' << format_double(v.z())
        << '\n';
  }
  return out.str();
}

std::string int_file_text(const std::vector<int>& rows) {
  std::ostringstream out;
  for (int v : rows) {
    out << v << '\n';
  }
  return out.str();
}

void require_file(const fs::path& file) {
  if (!fs::exists(file)) {
    fail(ErrorCode::kIo, "missing file: " + file.string());
  }
}

}  // namespace

SceneBundle load_bundle(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    fail(ErrorCode::kIo, "not a scene directory: " + dir.string());
  }
  for (const char* name : {"points.txt", "semantic.txt", "offsets.txt", "weak.txt", "meta.json"}) {
    require_file(dir / name);
  }

  SceneBundle scene;
  scene.cloud.points = read_vec3_file(dir / "points.txt");
  scene.semantics.labels = read_int_file(dir / "semantic.txt");
  scene.offsets.offsets = read_vec3_file(dir / "offsets.txt");

  const fs::path weak_file = dir / "weak.txt";
  for (const auto& line : data_lines(read_text_file(weak_file))) {
    auto fields = split_fields(line.text);
    if (fields.size() != 3) {
      parse_fail(weak_file, line.number, "expected 3 fields");
    }
    WeakAnnotation e;
    e.point_index = parse_int_field(fields[0], weak_file, line.number);
    e.semantic_id = parse_int_field(fields[1], weak_file, line.number);
    e.instance_id = parse_int_field(fields[2], weak_file, line.number);
    scene.weak.entries.push_back(e);
  }

  if (fs::exists(dir / "supervoxels.txt")) {
    SupervoxelSegmentation sv;
    sv.segment_ids = read_int_file(dir / "supervoxels.txt");
    scene.supervoxels = std::move(sv);
  }
  if (fs::exists(dir / "gt_instance.txt")) {
    scene.gt_instances = read_int_file(dir / "gt_instance.txt");
  }
  if (fs::exists(dir / "gt_semantic.txt")) {
    scene.gt_semantics = read_int_file(dir / "gt_semantic.txt");
  }

  const fs::path meta_file = dir / "meta.json";
  json meta;
  try {
    meta = json::parse(read_text_file(meta_file));
  } catch (const json::exception& e) {
    fail(ErrorCode::kParse, meta_file.string() + ": " + e.what());
  }
  if (!meta.contains("foreground_classes") || !meta["foreground_classes"].is_array()) {
    fail(ErrorCode::kParse, meta_file.string() + ": missing foreground_classes array");
  }
  for (const auto& c : meta["foreground_classes"]) {
    if (!c.is_number_integer()) {
      fail(ErrorCode::kParse, meta_file.string() + ": foreground_classes must be integers");
    }
    scene.semantics.foreground_classes.push_back(c.get<int>());
  }
  scene.name = meta.value("name", dir.filename().string());

  validate_scene(scene);
  return scene;
}

void save_bundle(const SceneBundle& scene, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    fail(ErrorCode::kIo, "cannot create directory: " + dir.string());
  }

  atomic_write_text(dir / "points.txt", vec3_file_text(scene.cloud.points));
  atomic_write_text(dir / "semantic.txt", int_file_text(scene.semantics.labels));
  atomic_write_text(dir / "offsets.txt", vec3_file_text(scene.offsets.offsets));

  std::ostringstream weak;
  for (const auto& e : scene.weak.entries) {
    weak << e.point_index << ' ' << e.semantic_id << ' ' << e.instance_id << '\n';
  }
  atomic_write_text(dir / "weak.txt", weak.str());

  if (scene.supervoxels) {
    atomic_write_text(dir / "supervoxels.txt", int_file_text(scene.supervoxels->segment_ids));
  }
  if (scene.gt_instances) {
    atomic_write_text(dir / "gt_instance.txt", int_file_text(*scene.gt_instances));
  }
  if (scene.gt_semantics) {
    atomic_write_text(dir / "gt_semantic.txt", int_file_text(*scene.gt_semantics));
  }

  json meta;
  meta["name"] = scene.name;
  meta["foreground_classes"] = scene.semantics.foreground_classes;
  atomic_write_text(dir / "meta.json", meta.dump(2) + "\n");
}

void save_labeling(const InstanceLabeling& labeling, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    fail(ErrorCode::kIo, "cannot create directory: " + dir.string());
  }
  atomic_write_text(dir / "pred_instance.txt", int_file_text(labeling.instance_ids));
  std::ostringstream conf;
  for (const auto& [id, c] : labeling.confidences) {
    conf << id << ' ' << format_double(c) << '\n';
  }
  atomic_write_text(dir / "pred_confidence.txt", conf.str());
}

InstanceLabeling load_labeling(const fs::path& dir, int expect_n) {
  require_file(dir / "pred_instance.txt");
  InstanceLabeling labeling;
  labeling.instance_ids = read_int_file(dir / "pred_instance.txt");
  if (expect_n >= 0 && static_cast<int>(labeling.instance_ids.size()) != expect_n) {
    fail(ErrorCode::kLengthMismatch,
         "pred_instance.txt has " + std::to_string(labeling.instance_ids.size()) +
             " entries, expected " + std::to_string(expect_n));
  }
  const fs::path conf_file = dir / "pred_confidence.txt";
  if (fs::exists(conf_file)) {
    for (const auto& line : data_lines(read_text_file(conf_file))) {
      auto fields = split_fields(line.text);
      if (fields.size() != 2) {
        parse_fail(conf_file, line.number, "expected 2 fields");
      }
      const int id = parse_int_field(fields[0], conf_file, line.number);
      labeling.confidences[id] = parse_double_field(fields[1], conf_file, line.number);
    }
  }
  return labeling;
}

}  // namespace cgwalk
