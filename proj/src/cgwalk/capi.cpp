#include "cgwalk/cgwalk.h"

#include <cstring>
#include <string>
#include <vector>

#include "cgwalk/bundle_io.hpp"
#include "cgwalk/config.hpp"
#include "cgwalk/error.hpp"
#include "cgwalk/metrics.hpp"
#include "cgwalk/pipeline.hpp"
#include "cgwalk/synth.hpp"
#include "cgwalk/util.hpp"

struct cgw_scene {
  cgwalk::SceneBundle bundle;
};

struct cgw_labeling {
  cgwalk::InstanceLabeling labeling;
  double wall_seconds = 0.0;
  std::vector<std::string> warnings;
};

struct cgw_report {
  cgwalk::EvalReport report;
};

namespace {

thread_local std::string g_last_error;

cgw_status status_of(cgwalk::ErrorCode code) {
  using cgwalk::ErrorCode;
  switch (code) {
    case ErrorCode::kBadArgument: return CGW_BAD_ARGUMENT;
    case ErrorCode::kLengthMismatch: return CGW_LENGTH_MISMATCH;
    case ErrorCode::kIndexOutOfRange: return CGW_INDEX_OUT_OF_RANGE;
    case ErrorCode::kDuplicateInstanceId: return CGW_DUPLICATE_INSTANCE_ID;
    case ErrorCode::kNonFinite: return CGW_NON_FINITE;
    case ErrorCode::kIo: return CGW_IO;
    case ErrorCode::kParse: return CGW_PARSE;
    case ErrorCode::kConfig: return CGW_CONFIG;
    case ErrorCode::kInternal: return CGW_INTERNAL;
  }
  return CGW_INTERNAL;
}

// Runs fn, translating exceptions into status codes plus the thread-local
// error message.
template <typename Fn>
cgw_status guarded(Fn&& fn) {
  try {
    fn();
    return CGW_OK;
  } catch (const cgwalk::Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return CGW_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return CGW_INTERNAL;
  }
}

cgw_status fail_arg(const char* message) {
  g_last_error = message;
  return CGW_BAD_ARGUMENT;
}

cgwalk::RunConfig config_from(const char* config_json) {
  if (config_json == nullptr || config_json[0] == '\0') return cgwalk::RunConfig{};
  return cgwalk::RunConfig::from_json_text(config_json);
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* cgw_version(void) { return "0.1.0"; }

const char* cgw_last_error(void) { return g_last_error.c_str(); }

char* cgw_default_config(void) { return dup_string(cgwalk::RunConfig{}.to_json_text()); }

void cgw_string_free(char* text) { delete[] text; }

cgw_status cgw_config_echo(const char* config_json, char** out) {
  if (out == nullptr) return fail_arg("out must not be NULL");
  *out = nullptr;
  return guarded([&] { *out = dup_string(config_from(config_json).to_json_text()); });
}

cgw_status cgw_scene_generate(const char* config_json, uint64_t seed, const char* name,
                              cgw_scene** out) {
  if (out == nullptr) return fail_arg("out must not be NULL");
  *out = nullptr;
  return guarded([&] {
    cgwalk::RunConfig cfg = config_from(config_json);
    cfg.seed = seed;
    cfg.propagate_seed();
    auto scene = new cgw_scene{cgwalk::generate_scene(
        cfg.scene, name == nullptr || name[0] == '\0' ? "scene" : name)};
    *out = scene;
  });
}

cgw_status cgw_scene_load(const char* bundle_dir, cgw_scene** out) {
  if (out == nullptr) return fail_arg("out must not be NULL");
  if (bundle_dir == nullptr) return fail_arg("bundle_dir must not be NULL");
  *out = nullptr;
  return guarded([&] { *out = new cgw_scene{cgwalk::load_bundle(bundle_dir)}; });
}

cgw_status cgw_scene_save(const cgw_scene* scene, const char* bundle_dir) {
  if (scene == nullptr) return fail_arg("scene must not be NULL");
  if (bundle_dir == nullptr) return fail_arg("bundle_dir must not be NULL");
  return guarded([&] { cgwalk::save_bundle(scene->bundle, bundle_dir); });
}

cgw_status cgw_scene_point_count(const cgw_scene* scene, int64_t* out) {
  if (scene == nullptr) return fail_arg("scene must not be NULL");
  if (out == nullptr) return fail_arg("out must not be NULL");
  *out = scene->bundle.size();
  return CGW_OK;
}

void cgw_scene_free(cgw_scene* scene) { delete scene; }

cgw_status cgw_segment(const cgw_scene* scene, const char* algo, const char* config_json,
                       int threads, cgw_labeling** out) {
  if (scene == nullptr) return fail_arg("scene must not be NULL");
  if (algo == nullptr) return fail_arg("algo must not be NULL");
  if (out == nullptr) return fail_arg("out must not be NULL");
  *out = nullptr;
  return guarded([&] {
    const cgwalk::Algo parsed = cgwalk::parse_algo(algo);
    const cgwalk::RunConfig cfg = config_from(config_json);
    auto result = new cgw_labeling{};
    cgwalk::WallTimer timer;
    result->labeling = cgwalk::run_segmentation(scene->bundle, parsed, cfg,
                                                threads > 0 ? threads : cfg.threads,
                                                &result->warnings);
    result->wall_seconds = timer.seconds();
    *out = result;
  });
}

cgw_status cgw_labeling_save(const cgw_labeling* labeling, const char* dir) {
  if (labeling == nullptr) return fail_arg("labeling must not be NULL");
  if (dir == nullptr) return fail_arg("dir must not be NULL");
  return guarded([&] { cgwalk::save_labeling(labeling->labeling, dir); });
}

cgw_status cgw_labeling_load(const char* dir, const cgw_scene* scene, cgw_labeling** out) {
  if (dir == nullptr) return fail_arg("dir must not be NULL");
  if (scene == nullptr) return fail_arg("scene must not be NULL");
  if (out == nullptr) return fail_arg("out must not be NULL");
  *out = nullptr;
  return guarded([&] {
    *out = new cgw_labeling{cgwalk::load_labeling(dir, scene->bundle.size()), 0.0, {}};
  });
}

cgw_status cgw_labeling_instance_id(const cgw_labeling* labeling, int64_t point, int* out) {
  if (labeling == nullptr) return fail_arg("labeling must not be NULL");
  if (out == nullptr) return fail_arg("out must not be NULL");
  if (point < 0 || point >= static_cast<int64_t>(labeling->labeling.instance_ids.size())) {
    g_last_error = "point index out of range";
    return CGW_INDEX_OUT_OF_RANGE;
  }
  *out = labeling->labeling.instance_ids[static_cast<std::size_t>(point)];
  return CGW_OK;
}

double cgw_labeling_wall_seconds(const cgw_labeling* labeling) {
  return labeling == nullptr ? 0.0 : labeling->wall_seconds;
}

int cgw_labeling_warning_count(const cgw_labeling* labeling) {
  return labeling == nullptr ? 0 : static_cast<int>(labeling->warnings.size());
}

const char* cgw_labeling_warning(const cgw_labeling* labeling, int index) {
  if (labeling == nullptr || index < 0 ||
      index >= static_cast<int>(labeling->warnings.size()))
    return nullptr;
  return labeling->warnings[static_cast<std::size_t>(index)].c_str();
}

void cgw_labeling_free(cgw_labeling* labeling) { delete labeling; }

cgw_status cgw_evaluate(const cgw_scene* scene, const cgw_labeling* labeling, cgw_report** out) {
  if (scene == nullptr) return fail_arg("scene must not be NULL");
  if (labeling == nullptr) return fail_arg("labeling must not be NULL");
  if (out == nullptr) return fail_arg("out must not be NULL");
  *out = nullptr;
  return guarded([&] {
    *out = new cgw_report{cgwalk::evaluate_scene(scene->bundle, labeling->labeling)};
  });
}

cgw_status cgw_report_json(const cgw_report* report, char** out) {
  if (report == nullptr) return fail_arg("report must not be NULL");
  if (out == nullptr) return fail_arg("out must not be NULL");
  *out = nullptr;
  return guarded([&] { *out = dup_string(cgwalk::report_json_text(report->report)); });
}

cgw_status cgw_report_metric(const cgw_report* report, const char* name, double* out) {
  if (report == nullptr) return fail_arg("report must not be NULL");
  if (name == nullptr) return fail_arg("name must not be NULL");
  if (out == nullptr) return fail_arg("out must not be NULL");
  const std::string key = name;
  const cgwalk::EvalReport& r = report->report;
  if (key == "miou") *out = r.miou;
  else if (key == "map") *out = r.map;
  else if (key == "map50") *out = r.map50;
  else if (key == "map25") *out = r.map25;
  else if (key == "mpre50") *out = r.mpre50;
  else if (key == "mrec50") *out = r.mrec50;
  else {
    g_last_error = "unknown metric \"" + key + "\"";
    return CGW_BAD_ARGUMENT;
  }
  return CGW_OK;
}

cgw_status cgw_report_write(const cgw_report* report, const char* dir) {
  if (report == nullptr) return fail_arg("report must not be NULL");
  if (dir == nullptr) return fail_arg("dir must not be NULL");
  return guarded([&] { cgwalk::write_report(dir, report->report); });
}

void cgw_report_free(cgw_report* report) { delete report; }

}  // extern "C"
