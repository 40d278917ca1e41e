#pragma once

#include <cstdint>
#include <string>

#include "cgwalk/baselines.hpp"
#include "cgwalk/scene.hpp"
#include "cgwalk/synth.hpp"

namespace cgwalk {

// One JSON file drives every command. All fields are optional; defaults are
// the struct initializers. Unknown keys are rejected so typos cannot silently
// fall back to defaults. The top-level seed feeds the per-component rng_seed
// fields.
struct RunConfig {
  std::uint64_t seed = 0;
  int threads = 1;
  CgcrwParams cgcrw;
  BaselineParams baseline;
  SceneSpec scene;

  // Re-applies `seed` to the component seeds; called after any field change.
  void propagate_seed();
  void validate() const;

  static RunConfig from_json_text(const std::string& text, const std::string& origin = "config");
  static RunConfig load_file(const std::string& path);

  // Effective configuration with every field spelled out, suitable as a
  // provenance echo next to run outputs.
  std::string to_json_text() const;
};

}  // namespace cgwalk
