#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include "dd2/scenario.h"

namespace fx {

inline std::filesystem::path source_dir() { return DD2_SOURCE_DIR; }
inline std::filesystem::path demo_path() { return source_dir() / "scenarios" / "demo.json"; }
inline std::filesystem::path fixture_path(const std::string& name) {
  return source_dir() / "scenarios" / "fixtures" / name;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline std::shared_ptr<const dd2::Scenario> demo() {
  static auto s = std::make_shared<const dd2::Scenario>(dd2::load_scenario_file(demo_path()));
  return s;
}

inline std::shared_ptr<const dd2::Scenario> fixture(const std::string& name) {
  return std::make_shared<const dd2::Scenario>(dd2::load_scenario_file(fixture_path(name)));
}

}  // namespace fx
